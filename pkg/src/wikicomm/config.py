"""Pipeline configuration: API endpoints, throttling, filtering thresholds."""

from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import IO, Optional

from .wikitext import (
    DEFAULT_DELIVERY_AGENTS,
    DEFAULT_MASS_MESSAGE_MARKERS,
    canonical_username,
)

__all__ = ["ConfigError", "PipelineConfig", "normalize_project_name"]

ENV_API_BASE_URL = "WIKICOMM_API_BASE_URL"

# Working defaults; both query parameter sets are configuration because the
# right extraction endpoint can differ between wikis and API versions. The
# content query also serves project-page fetches.
DEFAULT_USER_TALK_QUERY = {
    "action": "query",
    "prop": "revisions",
    "rvprop": "content",
    "rvslots": "main",
    "format": "json",
    "formatversion": "2",
}
DEFAULT_ASSESSMENTS_QUERY = {
    "action": "query",
    "generator": "allpages",
    "gaplimit": "200",
    "prop": "pageassessments",
    "palimit": "max",
    "format": "json",
    "formatversion": "2",
}


class ConfigError(Exception):
    """Invalid or unusable configuration."""


def normalize_project_name(raw: str, aliases: Optional[dict[str, str]] = None) -> str:
    """Standardize an inconsistently written Wikiproject name.

    Strips ``Wikipedia:`` and ``WikiProject`` prefixes, collapses whitespace
    and underscores, uppercases the first letter, then applies the alias
    table. Idempotent for already-canonical input.

    Raises:
        ConfigError: if nothing remains after stripping.
    """
    name = raw.replace("_", " ").strip()
    name = re.sub(r"^\s*Wikipedia\s*:\s*", "", name, flags=re.IGNORECASE)
    name = re.sub(r"^\s*WikiProject\b\s*", "", name, flags=re.IGNORECASE)
    name = canonical_username(name)
    if aliases:
        name = aliases.get(name, name)
    if not name:
        raise ConfigError(f"project name is empty after normalization: {raw!r}")
    return name


@dataclass
class PipelineConfig:
    """All knobs of the end-to-end pipeline; see README for the JSON schema."""

    api_base_url: str = "https://en.wikipedia.org/w/api.php"
    request_interval: float = 1.0
    max_retries: int = 3
    cache_dir: str = "cache"
    output_dir: str = "out"
    projects: list[str] = field(default_factory=list)
    p_exponent: float = 0.5
    min_active_nodes: int = 5
    delivery_agents: list[str] = field(default_factory=lambda: list(DEFAULT_DELIVERY_AGENTS))
    mass_message_markers: list[str] = field(
        default_factory=lambda: list(DEFAULT_MASS_MESSAGE_MARKERS)
    )
    project_aliases: dict[str, str] = field(default_factory=dict)
    project_subpages: list[str] = field(
        default_factory=lambda: ["", "/Members", "/Participants"]
    )
    user_talk_query: dict[str, str] = field(default_factory=lambda: dict(DEFAULT_USER_TALK_QUERY))
    assessments_query: dict[str, str] = field(
        default_factory=lambda: dict(DEFAULT_ASSESSMENTS_QUERY)
    )
    require_both_members: bool = True
    user_agent: str = "wikicomm/0.1 (collaboration-network research toolkit)"
    offline: bool = False

    def __post_init__(self) -> None:
        env_url = os.environ.get(ENV_API_BASE_URL)
        if env_url:
            self.api_base_url = env_url
        if self.request_interval <= 0:
            raise ConfigError(f"request_interval must be > 0, got {self.request_interval}")
        if self.min_active_nodes < 2:
            raise ConfigError(f"min_active_nodes must be >= 2, got {self.min_active_nodes}")
        if not 0.0 <= self.p_exponent <= 1.0:
            raise ConfigError(f"p_exponent must be in [0, 1], got {self.p_exponent}")
        if self.max_retries < 0:
            raise ConfigError(f"max_retries must be >= 0, got {self.max_retries}")

    @classmethod
    def from_file(cls, path: str | Path) -> "PipelineConfig":
        """Load a JSON config file; unknown keys are rejected."""
        try:
            with open(path, encoding="utf-8") as f:
                return cls.from_json(f)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc

    @classmethod
    def from_json(cls, source: IO[str]) -> "PipelineConfig":
        try:
            data = json.load(source)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config root must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {unknown}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    def canonical_projects(self) -> list[str]:
        """The configured project list, normalized, order-preserving, deduped."""
        seen: dict[str, None] = {}
        for raw in self.projects:
            seen.setdefault(normalize_project_name(raw, self.project_aliases))
        return list(seen)

    def to_metadata(self) -> dict:
        """Config snapshot for bundle metadata (plain JSON types only)."""
        return {
            "api_base_url": self.api_base_url,
            "request_interval": self.request_interval,
            "p_exponent": self.p_exponent,
            "min_active_nodes": self.min_active_nodes,
            "projects": self.canonical_projects(),
            "require_both_members": self.require_both_members,
        }
