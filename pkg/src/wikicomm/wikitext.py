"""Parsing of user talk pages and project pages from raw wikitext.

Talk pages are segmented into discussion threads at level-2 headings, and
threads into posts at signature occurrences. A signature is a link into the
User or User-talk namespace followed, on the same line, by a timestamp of
the default MediaWiki form ``HH:MM, D Month YYYY (UTC)``. Customized
signatures lacking a user-namespace link are missed; that recall limitation
is accepted. Parsing never raises on malformed wikitext; bad input degrades
to fewer, larger threads or to unattributed (dropped) text.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import IO, Iterable, Iterator, Optional, Sequence

__all__ = [
    "Signature",
    "Post",
    "DiscussionThread",
    "TalkPage",
    "canonical_username",
    "parse_signature",
    "split_threads",
    "extract_posts",
    "is_mass_message",
    "parse_talk_page",
    "extract_project_members",
    "posts_to_records",
    "write_posts_jsonl",
    "read_pages_jsonl",
    "DEFAULT_DELIVERY_AGENTS",
    "DEFAULT_MASS_MESSAGE_MARKERS",
]

log = logging.getLogger(__name__)

DEFAULT_DELIVERY_AGENTS = ("MediaWiki message delivery",)
# The MassMessage extension appends an HTML comment of this form to every drop.
DEFAULT_MASS_MESSAGE_MARKERS = ("Message sent by User:",)

_HEADING_RE = re.compile(r"^==([^=\n][^\n]*?)==[ \t]*$", re.MULTILINE)
_USER_LINK_RE = re.compile(
    r"\[\[\s*[Uu]ser(?:[ _][Tt]alk)?\s*:\s*([^|\[\]#/]+?)\s*(?:[|#/][^\[\]]*)?\]\]",
    re.IGNORECASE,
)
_MONTHS = {
    name: i
    for i, name in enumerate(
        (
            "January", "February", "March", "April", "May", "June",
            "July", "August", "September", "October", "November", "December",
        ),
        start=1,
    )
}
_TIMESTAMP_RE = re.compile(
    r"(\d{1,2}):(\d{2}),\s*(\d{1,2})\s+"
    r"(January|February|March|April|May|June|July|August|September|October|November|December)"
    r"\s+(\d{4})\s+\(UTC\)"
)
_DEPTH_RE = re.compile(r"^[:*]+")

# Wikipedia went live in January 2001; signatures dated earlier are suspect.
_EARLIEST_PLAUSIBLE = datetime(2001, 1, 15, tzinfo=timezone.utc)


def canonical_username(raw: str) -> str:
    """Normalize a username the way MediaWiki normalizes titles.

    Underscores become spaces, whitespace runs collapse, and the first
    character is uppercased. Idempotent.
    """
    name = raw.replace("_", " ")
    name = " ".join(name.split())
    if not name:
        return ""
    return name[0].upper() + name[1:]


@dataclass(frozen=True)
class Signature:
    """Author attribution parsed from a user-namespace link plus UTC timestamp."""

    user: str
    timestamp: datetime


@dataclass(frozen=True)
class Post:
    """One signed message: author, signing time, indentation depth."""

    author: str
    timestamp: datetime
    depth: int
    is_template_message: bool = False


@dataclass
class DiscussionThread:
    """A talk-page section: heading, raw body, and the posts parsed from it."""

    heading: str
    body: str
    posts: list[Post] = field(default_factory=list)
    is_mass_message: bool = False


@dataclass(frozen=True)
class TalkPage:
    """A user talk page; ``owner`` is derived from the title prefix."""

    title: str
    owner: str
    wikitext: str

    @classmethod
    def from_page(cls, title: str, wikitext: str) -> "TalkPage":
        """Build from a raw page record, deriving the owner from the title.

        Raises:
            ValueError: if the title is not in the User-talk namespace.
        """
        m = re.match(r"[Uu]ser[ _][Tt]alk:(.+)$", title)
        if not m:
            raise ValueError(f"not a user talk page title: {title!r}")
        owner = canonical_username(m.group(1).split("/", 1)[0])
        return cls(title=title, owner=owner, wikitext=wikitext)


def _parse_timestamp(m: re.Match) -> Optional[datetime]:
    hour, minute = int(m.group(1)), int(m.group(2))
    day, month, year = int(m.group(3)), _MONTHS[m.group(4)], int(m.group(5))
    try:
        ts = datetime(year, month, day, hour, minute, tzinfo=timezone.utc)
    except ValueError:
        return None
    if ts < _EARLIEST_PLAUSIBLE or ts.year > datetime.now(timezone.utc).year:
        log.warning("timestamp outside plausible range kept: %s", ts.isoformat())
    return ts


def _iter_signatures(text: str) -> Iterator[tuple[Signature, int, int]]:
    """Yield ``(signature, start, end)`` for each valid signature occurrence.

    A valid occurrence is a timestamp with at least one user-namespace link
    earlier on the same line; the last such link names the author (copes
    with trailing "(talk)" links and pings). ``start``/``end`` delimit the
    timestamp match.
    """
    for ts_match in _TIMESTAMP_RE.finditer(text):
        line_start = text.rfind("\n", 0, ts_match.start()) + 1
        line_prefix = text[line_start : ts_match.start()]
        user = None
        for link in _USER_LINK_RE.finditer(line_prefix):
            user = canonical_username(link.group(1))
        if not user:
            continue
        ts = _parse_timestamp(ts_match)
        if ts is None:
            continue
        yield Signature(user=user, timestamp=ts), ts_match.start(), ts_match.end()


def parse_signature(segment: str) -> Optional[Signature]:
    """Return the first signature in ``segment``, or None if there is none."""
    for sig, _, _ in _iter_signatures(segment):
        return sig
    return None


def split_threads(page: TalkPage) -> list[DiscussionThread]:
    """Segment a talk page into threads at level-2 headings.

    Content before the first heading forms an implicit thread with an empty
    heading (only if it contains any non-whitespace). Lower-level headings
    (``===`` and deeper) stay inside their parent thread.
    """
    text = page.wikitext
    threads: list[DiscussionThread] = []
    matches = list(_HEADING_RE.finditer(text))
    preamble = text[: matches[0].start()] if matches else text
    if preamble.strip():
        threads.append(DiscussionThread(heading="", body=preamble))
    for i, m in enumerate(matches):
        end = matches[i + 1].start() if i + 1 < len(matches) else len(text)
        threads.append(
            DiscussionThread(heading=m.group(1).strip(), body=text[m.end() : end])
        )
    return threads


def _first_content_line(segment: str) -> str:
    # Blank lines and subsection headings are structure, not post content.
    for line in segment.split("\n"):
        if line.strip() and not line.lstrip().startswith("="):
            return line
    return ""


def extract_posts(body: str) -> list[Post]:
    """Split a thread body at signatures; unsigned trailing text yields no post.

    Each post runs from the end of the previous signature to the end of its
    own; depth is the count of leading ``:``/``*`` on the post's first
    content line (blank and subsection-heading lines are skipped).
    """
    posts: list[Post] = []
    cursor = 0
    for sig, _, sig_end in _iter_signatures(body):
        segment = body[cursor:sig_end]
        first = _first_content_line(segment)
        depth_match = _DEPTH_RE.match(first)
        depth = len(depth_match.group(0)) if depth_match else 0
        content_start = first[depth:].lstrip()
        posts.append(
            Post(
                author=sig.user,
                timestamp=sig.timestamp,
                depth=depth,
                is_template_message=content_start.startswith("{{"),
            )
        )
        cursor = sig_end
    return posts


def is_mass_message(
    thread: DiscussionThread,
    delivery_agents: Sequence[str] = DEFAULT_DELIVERY_AGENTS,
    markers: Sequence[str] = DEFAULT_MASS_MESSAGE_MARKERS,
) -> bool:
    """True for bot-delivered bulk drops (newsletters etc.).

    A thread is a mass message when any post author is a configured delivery
    agent or the body contains a configured delivery marker. Template
    messages signed by a person (warnings, barnstars, welcomes) are not mass
    messages.
    """
    agents = {canonical_username(a) for a in delivery_agents}
    if any(p.author in agents for p in thread.posts):
        return True
    return any(marker in thread.body for marker in markers)


def parse_talk_page(
    page: TalkPage,
    delivery_agents: Sequence[str] = DEFAULT_DELIVERY_AGENTS,
    markers: Sequence[str] = DEFAULT_MASS_MESSAGE_MARKERS,
) -> list[DiscussionThread]:
    """Fully parse a talk page: threads, posts, and mass-message flags."""
    threads = split_threads(page)
    for thread in threads:
        thread.posts = extract_posts(thread.body)
        thread.is_mass_message = is_mass_message(thread, delivery_agents, markers)
    return threads


def _is_talk_title(title: str) -> bool:
    ns, sep, rest = title.partition(":")
    if sep and rest and ns.strip().replace("_", " ").lower().endswith("talk"):
        return True
    # Also reject ".../Talk" style subpages.
    return any(part.strip().lower() == "talk" for part in title.split("/")[1:])


def extract_project_members(project_pages: Iterable[tuple[str, str]]) -> set[str]:
    """Union of signature authors over a project's pages (not talk pages).

    Member lists usually consist of user signatures, so one signature scan
    covers both the lists and other signed contributions to project pages.

    Raises:
        ValueError: if a talk-namespace title is passed in.
    """
    members: set[str] = set()
    for title, wikitext in project_pages:
        if _is_talk_title(title):
            raise ValueError(f"talk page passed to member extraction: {title!r}")
        for sig, _, _ in _iter_signatures(wikitext):
            members.add(sig.user)
    return members


def posts_to_records(page: TalkPage, threads: Iterable[DiscussionThread]) -> list[dict]:
    """Flatten parsed threads into JSON-ready post records."""
    records = []
    for thread in threads:
        for post in thread.posts:
            records.append(
                {
                    "page_owner": page.owner,
                    "thread": thread.heading,
                    "author": post.author,
                    "timestamp": post.timestamp.strftime("%Y-%m-%dT%H:%M:%SZ"),
                    "depth": post.depth,
                    "mass_message": thread.is_mass_message,
                }
            )
    return records


def write_posts_jsonl(records: Iterable[dict], out: IO[str]) -> int:
    """Write post records as JSON lines; returns the number written."""
    n = 0
    for record in records:
        out.write(json.dumps(record, ensure_ascii=False, sort_keys=True) + "\n")
        n += 1
    return n


def read_pages_jsonl(source: IO[str]) -> Iterator[dict]:
    """Read page dumps: one JSON object per line with ``title`` and ``wikitext``."""
    for lineno, line in enumerate(source, start=1):
        line = line.strip()
        if not line:
            continue
        obj = json.loads(line)
        if "title" not in obj or "wikitext" not in obj:
            raise ValueError(f"line {lineno}: page record needs title and wikitext")
        yield obj
