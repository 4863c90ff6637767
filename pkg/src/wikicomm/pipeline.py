"""End-to-end stage orchestration: ingest → parse → build → quality → metrics → regress.

Every stage reads its inputs from files under the output directory and
rewrites its outputs deterministically, so a run over an unchanged cache is
byte-identical and any stage can be rerun in isolation. A stage failure
halts the run with the stage name; everything already fetched stays cached.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from collections import defaultdict
from pathlib import Path
from typing import Optional

from . import __version__
from .client import MediaWikiClient
from .config import ConfigError, PipelineConfig, normalize_project_name
from .graph import WeightedGraph, effective_information, read_edge_list, write_edge_list
from .network import ProjectRecord, build_network, filter_projects, write_project_summary
from .quality import (
    AssessmentRecord,
    Grade,
    count_quality,
    dedupe_assessments,
    q_score,
    read_assessments_csv,
    write_quality_csv,
)
from .report import (
    REFERENCE_SNAPSHOT_ANCHORS,
    f_test_to_dict,
    fit_to_dict,
    render_coefficient_table,
)
from .stats import (
    DataMatrix,
    descriptives,
    linear_hypothesis,
    nested_f_test,
    ols_fit,
    pearson_r,
)
from .wikitext import (
    TalkPage,
    extract_project_members,
    parse_talk_page,
    posts_to_records,
    read_pages_jsonl,
    write_posts_jsonl,
)

__all__ = ["PipelineStageError", "STAGES", "run_stage", "run_pipeline"]

log = logging.getLogger(__name__)

VARIABLE_LABELS = {
    "fraction": "Fraction in communication network",
    "det_norm": "Determinism",
    "deg_norm": "Degeneracy",
    "ei_norm": "Effective information",
    "strength_log": "Average connection strength (log)",
    "members_log": "Number of project members (log)",
    "const": "Constant",
}

# Below this many observations the full-scale reference anchors are not
# comparable and the bundle is labeled accordingly.
ANCHOR_COMPARABLE_MIN_ROWS = 500


class PipelineStageError(Exception):
    """A stage failed; carries the stage name and the original error."""

    def __init__(self, stage: str, cause: Exception) -> None:
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause


def _out(config: PipelineConfig) -> Path:
    path = Path(config.output_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _slug(project: str) -> str:
    return "".join(c if c.isalnum() or c in "._-" else "_" for c in project)


def _write_text(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8")


# -- ingest -----------------------------------------------------------------


def stage_ingest(config: PipelineConfig, client: Optional[MediaWikiClient] = None) -> dict:
    """Fetch project pages, member talk pages, and assessments into the work dir."""
    out = _out(config)
    ingest_outputs = ["project_pages.jsonl", "talk_pages.jsonl", "assessments.csv"]
    if config.offline and all((out / name).exists() for name in ingest_outputs):
        log.info("ingest: offline, reusing pre-seeded inputs in %s", out)
        manifest_path = out / "fetch_manifest.json"
        if manifest_path.exists():
            return json.loads(manifest_path.read_text(encoding="utf-8"))
        return {"requests": 0, "earliest_fetch": None, "latest_fetch": None}
    projects = config.canonical_projects()
    if not projects:
        raise ConfigError("config lists no projects; ingest needs an explicit project list")
    client = client or MediaWikiClient(config)

    members_by_project: dict[str, set[str]] = {}
    with open(out / "project_pages.jsonl", "w", encoding="utf-8") as f:
        for project in projects:
            pages = []
            titles = [
                f"Wikipedia:WikiProject {project}{subpage}"
                for subpage in config.project_subpages
            ]
            for record in client.fetch_pages(titles, config.user_talk_query):
                pages.append((record["title"], record["wikitext"]))
                f.write(
                    json.dumps(
                        {"project": project, **record}, ensure_ascii=False, sort_keys=True
                    )
                    + "\n"
                )
            members_by_project[project] = extract_project_members(pages)

    all_members = sorted(set().union(*members_by_project.values()))
    with open(out / "talk_pages.jsonl", "w", encoding="utf-8") as f:
        for record in client.fetch_user_talk_pages(all_members):
            f.write(json.dumps(record, ensure_ascii=False, sort_keys=True) + "\n")

    with open(out / "assessments.csv", "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["project", "article", "grade"])
        for row in client.fetch_assessments():
            writer.writerow([row["project"], row["article"], row["grade"]])

    fetched = sorted(ts.isoformat() for ts in client.fetched_at)
    manifest = {
        "requests": len(fetched),
        "earliest_fetch": fetched[0] if fetched else None,
        "latest_fetch": fetched[-1] if fetched else None,
    }
    _write_text(out / "fetch_manifest.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    log.info("ingest: %d projects, %d member talk pages", len(projects), len(all_members))
    return manifest


# -- parse ------------------------------------------------------------------


def stage_parse(config: PipelineConfig) -> dict:
    """Parse fetched wikitext into member sets and flattened post records."""
    out = _out(config)

    pages_by_project: dict[str, list[tuple[str, str]]] = defaultdict(list)
    with open(out / "project_pages.jsonl", encoding="utf-8") as f:
        for record in read_pages_jsonl(f):
            pages_by_project[record["project"]].append(
                (record["title"], record["wikitext"])
            )
    members = {
        project: sorted(extract_project_members(pages))
        for project, pages in pages_by_project.items()
    }
    _write_text(out / "members.json", json.dumps(members, indent=2, sort_keys=True) + "\n")

    n_posts = 0
    n_pages = 0
    skipped = 0
    with open(out / "talk_pages.jsonl", encoding="utf-8") as f_in, open(
        out / "posts.jsonl", "w", encoding="utf-8"
    ) as f_out:
        for record in read_pages_jsonl(f_in):
            try:
                page = TalkPage.from_page(record["title"], record["wikitext"])
            except ValueError as exc:
                skipped += 1
                log.warning("skipping non-user-talk record: %s", exc)
                continue
            threads = parse_talk_page(
                page,
                delivery_agents=config.delivery_agents,
                markers=config.mass_message_markers,
            )
            n_posts += write_posts_jsonl(posts_to_records(page, threads), f_out)
            n_pages += 1
    log.info("parse: %d pages -> %d posts (%d records skipped)", n_pages, n_posts, skipped)
    return {"pages": n_pages, "posts": n_posts, "skipped": skipped}


# -- build ------------------------------------------------------------------


def _read_posts(path: Path) -> list[dict]:
    posts = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if line:
                posts.append(json.loads(line))
    return posts


def stage_build(config: PipelineConfig) -> list[ProjectRecord]:
    """Aggregate posts into per-project networks, edge lists, and the summary CSV."""
    out = _out(config)
    members = json.loads((out / "members.json").read_text(encoding="utf-8"))
    posts = _read_posts(out / "posts.jsonl")
    pairs = [
        (p["author"], p["page_owner"]) for p in posts if not p["mass_message"]
    ]

    networks_dir = out / "networks"
    networks_dir.mkdir(exist_ok=True)
    records = []
    slugs: dict[str, str] = {}
    for project in sorted(members):
        member_set = set(members[project])
        if not member_set:
            log.warning("project %s has no detected members, skipped", project)
            continue
        g = build_network(pairs, member_set, config.require_both_members)
        for m in sorted(member_set):
            g.add_node(m)
        slug = _slug(project)
        if slug in slugs.values():
            raise ValueError(f"project slug collision for {project!r}")
        slugs[project] = slug
        with open(networks_dir / f"{slug}.edges", "w", encoding="utf-8") as f:
            write_edge_list(g, f)
        records.append(
            ProjectRecord(
                project=project,
                members=frozenset(member_set),
                network=g,
                member_count=len(member_set),
                active_count=len(g.active_nodes()),
                fraction_in_network=len(g.active_nodes()) / len(member_set),
            )
        )
    with open(out / "projects.csv", "w", encoding="utf-8", newline="") as f:
        write_project_summary(records, f)
    log.info("build: %d project networks", len(records))
    return records


# -- quality ----------------------------------------------------------------


def stage_quality(config: PipelineConfig) -> dict[str, tuple[int, int]]:
    """Compute N_Q and Q_p per configured project from the assessment dump."""
    out = _out(config)
    wanted = set(config.canonical_projects())
    with open(out / "assessments.csv", encoding="utf-8") as f:
        raw_records = read_assessments_csv(f)

    normalized = []
    for record in raw_records:
        try:
            project = normalize_project_name(record.project, config.project_aliases)
        except ConfigError:
            log.warning("assessment with unusable project name skipped: %r", record.project)
            continue
        if wanted and project not in wanted:
            continue
        normalized.append(
            AssessmentRecord(project=project, article=record.article, grade=record.grade)
        )

    by_project: dict[str, list[AssessmentRecord]] = defaultdict(list)
    for record in dedupe_assessments(normalized):
        by_project[record.project].append(record)

    counts = {}
    rows = []
    fa_counts = []
    ga_counts = []
    for project in sorted(by_project):
        records = by_project[project]
        n_articles, n_quality = count_quality(records)
        counts[project] = (n_articles, n_quality)
        rows.append((project, q_score(n_quality, n_articles, config.p_exponent)))
        fa_counts.append(sum(1 for r in records if r.grade is Grade.FA))
        ga_counts.append(sum(1 for r in records if r.grade is Grade.GA))
    with open(out / "quality.csv", "w", encoding="utf-8", newline="") as f:
        write_quality_csv(rows, f)

    # FA and GA counts are combined into one quality measure downstream; the
    # correlation between them is the check that this combination is sound.
    summary: dict[str, object] = {"projects_scored": len(rows)}
    try:
        r, p = pearson_r(fa_counts, ga_counts)
        summary["fa_ga_pearson_r"] = r
        summary["fa_ga_p_value"] = p
    except ValueError as exc:
        summary["fa_ga_pearson_r"] = None
        summary["fa_ga_p_value"] = None
        summary["note"] = f"correlation undefined: {exc}"
    _write_text(
        out / "quality_summary.json", json.dumps(summary, indent=2, sort_keys=True) + "\n"
    )
    log.info("quality: %d projects scored", len(rows))
    return counts


# -- metrics ----------------------------------------------------------------


def _read_projects_csv(path: Path) -> list[dict]:
    with open(path, encoding="utf-8", newline="") as f:
        return list(csv.DictReader(f))


def stage_metrics(config: PipelineConfig) -> int:
    """Join networks and quality, filter, and emit the per-project variables CSV."""
    out = _out(config)
    summary = _read_projects_csv(out / "projects.csv")
    quality_rows = {row["project"]: row for row in _read_projects_csv(out / "quality.csv")}

    records = []
    graphs: dict[str, WeightedGraph] = {}
    quality_counts: dict[str, int] = {}
    for row in summary:
        project = row["project"]
        with open(out / "networks" / f"{_slug(project)}.edges", encoding="utf-8") as f:
            graphs[project] = read_edge_list(f)
        records.append(
            ProjectRecord(
                project=project,
                members=frozenset(graphs[project].nodes),
                network=graphs[project],
                member_count=int(row["member_count"]),
                active_count=int(row["active_nodes"]),
                fraction_in_network=float(row["fraction_in_network"]),
            )
        )
        if project in quality_rows:
            quality_counts[project] = int(quality_rows[project]["n_quality"])
        else:
            quality_counts[project] = 0
            log.info("project %s has no quality row; treated as zero quality pages", project)

    kept = filter_projects(records, quality_counts, config.min_active_nodes)
    log.info("metrics: %d of %d projects kept after filtering", len(kept), len(records))

    header = [
        "project", "member_count", "active_nodes", "fraction",
        "det_norm", "deg_norm", "ei_norm", "avg_strength",
        "n_articles", "n_quality", "q_score",
    ]
    rows_out = []
    for record in kept:
        metrics = effective_information(record.network)
        quality_row = quality_rows[record.project]
        rows_out.append(
            [
                record.project,
                str(record.member_count),
                str(record.active_count),
                f"{record.fraction_in_network:.6f}",
                f"{metrics.determinism_norm:.6f}",
                f"{metrics.degeneracy_norm:.6f}",
                f"{metrics.effective_information_norm:.6f}",
                f"{record.network.average_strength():.6f}",
                quality_row["n_articles"],
                quality_row["n_quality"],
                quality_row["q_score"],
            ]
        )
    with open(out / "variables.csv", "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows_out)

    summary_vars = ["q_score", "fraction", "det_norm", "deg_norm", "avg_strength", "member_count"]
    with open(out / "variables_summary.csv", "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["variable", "mean", "sd", "median"])
        if rows_out:
            column_index = {name: i for i, name in enumerate(header)}
            for name in summary_vars:
                values = [float(r[column_index[name]]) for r in rows_out]
                d = descriptives(values)
                writer.writerow(
                    [
                        name,
                        f"{d.mean:.6f}",
                        "" if d.sd is None else f"{d.sd:.6f}",
                        f"{d.median:.6f}",
                    ]
                )
    return len(kept)


# -- regress ----------------------------------------------------------------

MODEL_1 = ["fraction", "det_norm", "deg_norm", "strength_log", "members_log"]
MODEL_2 = ["det_norm", "deg_norm", "strength_log", "members_log"]
MODEL_3 = ["ei_norm", "strength_log", "members_log"]


def build_data_matrix(variables_csv: Path) -> DataMatrix:
    """Load the variables CSV and add the natural-log model columns."""
    with open(variables_csv, encoding="utf-8", newline="") as f:
        base = DataMatrix.from_csv(f, skip=["project"])
    columns = {name: base.column(name) for name in base.names}
    for source, target in (
        ("q_score", "quality_log"),
        ("avg_strength", "strength_log"),
        ("member_count", "members_log"),
    ):
        values = columns[source]
        if (values <= 0).any():
            raise ValueError(f"column {source} must be positive for log transform")
        columns[target] = [math.log(v) for v in values]
    return DataMatrix(columns)


def stage_regress(config: PipelineConfig) -> dict:
    """Fit the three quality models and emit the JSON and text reports."""
    out = _out(config)
    dm = build_data_matrix(out / "variables.csv")

    fits = [
        ols_fit(dm, "quality_log", MODEL_1),
        ols_fit(dm, "quality_log", MODEL_2),
        ols_fit(dm, "quality_log", MODEL_3),
    ]
    drop_fraction = nested_f_test(fits[0], fits[1])
    # H0: the determinism and degeneracy effects cancel (their sum is zero).
    weights = [0.0] * (len(MODEL_2) + 1)
    weights[1 + MODEL_2.index("det_norm")] = 1.0
    weights[1 + MODEL_2.index("deg_norm")] = 1.0
    det_deg_sum = linear_hypothesis(fits[1], weights, 0.0)

    report = {
        "models": {
            "model_1": fit_to_dict(fits[0]),
            "model_2": fit_to_dict(fits[1]),
            "model_3": fit_to_dict(fits[2]),
        },
        "nested_test_fraction_dropped": f_test_to_dict(drop_fraction),
        "linear_hypothesis_det_plus_deg_zero": f_test_to_dict(det_deg_sum),
        "metadata": {
            "n": dm.n_rows,
            "log_transform": "natural log",
            "response": "quality_log",
        },
    }
    _write_text(out / "report.json", json.dumps(report, indent=2, sort_keys=True) + "\n")

    table = render_coefficient_table(
        fits, ["Model 1", "Model 2", "Model 3"], VARIABLE_LABELS
    )
    lines = [
        "Effects of communication-network structure on project quality",
        "",
        table,
        f"Dropping the network fraction: F({drop_fraction.df1}, {drop_fraction.df2}) "
        f"= {drop_fraction.f_value:.3f}, p = {drop_fraction.p_value:.3f}",
        f"H0 determinism + degeneracy = 0: F({det_deg_sum.df1}, {det_deg_sum.df2}) "
        f"= {det_deg_sum.f_value:.3f}, p = {det_deg_sum.p_value:.3f}",
        "",
    ]
    _write_text(out / "report.txt", "\n".join(lines))
    log.info("regress: fitted 3 models on %d projects", dm.n_rows)
    return report


# -- report -----------------------------------------------------------------


def stage_report(config: PipelineConfig) -> dict:
    """Assemble bundle metadata describing provenance and comparability."""
    out = _out(config)
    manifest_path = out / "fetch_manifest.json"
    if manifest_path.exists():
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
        snapshot = {
            "earliest_fetch": manifest.get("earliest_fetch"),
            "latest_fetch": manifest.get("latest_fetch"),
        }
    else:
        snapshot = {"earliest_fetch": None, "latest_fetch": None, "note": "pre-seeded inputs"}

    n_rows = 0
    variables_path = out / "variables.csv"
    if variables_path.exists():
        with open(variables_path, encoding="utf-8", newline="") as f:
            n_rows = sum(1 for _ in csv.DictReader(f))

    quality_summary = None
    summary_path = out / "quality_summary.json"
    if summary_path.exists():
        quality_summary = json.loads(summary_path.read_text(encoding="utf-8"))

    meta = {
        "quality_summary": quality_summary,
        "tool": {"name": "wikicomm", "version": __version__},
        "config": config.to_metadata(),
        "snapshot": snapshot,
        "observations": n_rows,
        "anchors_comparable": n_rows >= ANCHOR_COMPARABLE_MIN_ROWS,
        "reference_anchors": REFERENCE_SNAPSHOT_ANCHORS,
        "limitations": [
            "usernames are not rename-resolved; renamed accounts appear as distinct nodes",
            "member detection is signature-based; unsigned contributions to project pages are not seen",
            "log transforms use the natural logarithm",
        ],
    }
    _write_text(out / "bundle_meta.json", json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return meta


STAGES = {
    "ingest": stage_ingest,
    "parse": stage_parse,
    "build": stage_build,
    "quality": stage_quality,
    "metrics": stage_metrics,
    "regress": stage_regress,
    "report": stage_report,
}

STAGE_ORDER = ["ingest", "parse", "build", "quality", "metrics", "regress", "report"]


def run_stage(name: str, config: PipelineConfig):
    """Run one stage, wrapping any failure with the stage name."""
    if name not in STAGES:
        raise ConfigError(f"unknown stage {name!r}; stages are {STAGE_ORDER}")
    try:
        return STAGES[name](config)
    except PipelineStageError:
        raise
    except Exception as exc:
        raise PipelineStageError(name, exc) from exc


def run_pipeline(config: PipelineConfig) -> dict:
    """Run all stages in order; returns the bundle metadata."""
    result = None
    for name in STAGE_ORDER:
        result = run_stage(name, config)
    return result  # type: ignore[return-value]
