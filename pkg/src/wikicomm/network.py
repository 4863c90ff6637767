"""Aggregation of parsed posts into per-project communication networks.

A post by editor A on the talk page of editor B counts as one undirected
interaction A–B when both are members of the project under construction and
A is not B. Mass-message threads must be filtered out upstream.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import IO, Iterable, Mapping, Sequence

from .graph import WeightedGraph

__all__ = [
    "ProjectRecord",
    "build_network",
    "project_record",
    "filter_projects",
    "write_project_summary",
]


@dataclass(frozen=True)
class ProjectRecord:
    """One Wikiproject: members, its communication network, coverage stats."""

    project: str
    members: frozenset[str]
    network: WeightedGraph
    member_count: int
    active_count: int
    fraction_in_network: float


def build_network(
    posts: Iterable[tuple[str, str]],
    members: Iterable[str],
    require_both_members: bool = True,
) -> WeightedGraph:
    """Count undirected interactions from ``(author, page_owner)`` post pairs.

    Self-posts never count. With ``require_both_members`` (the default) an
    interaction counts only when both endpoints belong to ``members``; the
    alternative keeps interactions with at least one member endpoint, in
    which case the network is no longer a subgraph of the member set.
    """
    member_set = set(members)
    g = WeightedGraph()
    for author, owner in posts:
        if author == owner:
            continue
        if require_both_members:
            if author in member_set and owner in member_set:
                g.add_interaction(author, owner)
        elif author in member_set or owner in member_set:
            g.add_interaction(author, owner)
    return g


def project_record(
    project: str,
    members: Iterable[str],
    network: WeightedGraph,
) -> ProjectRecord:
    """Assemble a :class:`ProjectRecord`, computing the member fraction in-network.

    Raises:
        ValueError: if the member set is empty.
    """
    member_set = frozenset(members)
    if not member_set:
        raise ValueError(f"project {project!r} has an empty member set")
    active = len(network.active_nodes())
    return ProjectRecord(
        project=project,
        members=member_set,
        network=network,
        member_count=len(member_set),
        active_count=active,
        fraction_in_network=active / len(member_set),
    )


def filter_projects(
    records: Sequence[ProjectRecord],
    quality: Mapping[str, int],
    min_active_nodes: int = 5,
) -> list[ProjectRecord]:
    """Keep projects with enough network participants and at least one quality page.

    Structural metrics are not meaningful on very small networks, and
    projects with no quality output form a different population, so records
    are kept only when ``active_count >= min_active_nodes`` and the project
    has a positive quality-page count. Input order is preserved; the
    operation is idempotent.

    Args:
        records: project records to filter.
        quality: per-project count of quality pages (FA+GA).
        min_active_nodes: minimum non-isolated network nodes.

    Raises:
        KeyError: if a record's project is missing from ``quality``.
    """
    kept = []
    for record in records:
        if record.project not in quality:
            raise KeyError(f"no quality-page count for project {record.project!r}")
        if record.active_count >= min_active_nodes and quality[record.project] >= 1:
            kept.append(record)
    return kept


def write_project_summary(records: Iterable[ProjectRecord], out: IO[str]) -> None:
    """Write the per-project coverage CSV."""
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["project", "member_count", "active_nodes", "fraction_in_network"])
    for record in records:
        writer.writerow(
            [
                record.project,
                record.member_count,
                record.active_count,
                f"{record.fraction_in_network:.6f}",
            ]
        )
