"""Report objects: one JSON schema shared by every command.

A report is plain data. Whatever richer objects produced it (criterion
values, bound comparisons, factorization info) are flattened to dicts of
JSON-safe scalars before they get here, so a report round-trips through
text without loss and diffs cleanly; wall_time is the one field excluded
from reproducibility comparisons.

The schema carries a major.minor version. Readers accept any minor
revision of their major and refuse the rest instead of misreading it.
"""

from __future__ import annotations

import dataclasses
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

SCHEMA_VERSION = "1.0"


def _tool_version() -> str:
    from . import __version__

    return __version__


def plain(obj):
    """Recursively reduce to JSON-safe types.

    numpy scalars and arrays become python scalars and lists, complex
    values become [re, im] pairs, dataclasses flatten (through their
    describe() when they have one), and non-finite floats become null
    rather than producing invalid JSON.
    """
    if obj is None or isinstance(obj, (bool, int, str)):
        return obj
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, complex):
        return [plain(obj.real), plain(obj.imag)]
    if isinstance(obj, np.generic):
        return plain(obj.item())
    if isinstance(obj, np.ndarray):
        return [plain(x) for x in obj.tolist()]
    if hasattr(obj, "describe") and callable(obj.describe):
        return plain(obj.describe())
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: plain(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(x) for x in obj]
    raise ValidationError(f"cannot serialize {type(obj).__name__} into a report")


@dataclass
class Report:
    """Uniform result envelope for every CLI command."""

    command: str
    config: dict = field(default_factory=dict)
    criterion_values: dict = field(default_factory=dict)
    bound_reports: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)
    estimates: dict = field(default_factory=dict)
    seed: int | None = None
    wall_time: float = 0.0
    tool_version: str = ""
    schema_version: str = SCHEMA_VERSION

    def __post_init__(self):
        if not self.tool_version:
            self.tool_version = _tool_version()

    def to_dict(self) -> dict:
        return plain(dataclasses.asdict(self))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, allow_nan=False) + "\n"

    def csv_summary(self) -> str:
        """One row per bound comparison; empty cells where a value is undefined."""
        import csv

        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["bound_name", "theoretical", "empirical", "stderr",
                    "margin_sigmas", "verdict"])
        for b in self.bound_reports:
            d = plain(b)
            w.writerow([
                d.get("bound_name", ""),
                _cell(d.get("theoretical")),
                _cell(d.get("empirical")),
                _cell(d.get("stderr")),
                _cell(d.get("margin_sigmas")),
                d.get("verdict", ""),
            ])
        return buf.getvalue()


def _cell(v) -> str:
    return "" if v is None else repr(v)


def from_json(text: str) -> Report:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"report is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ValidationError("report JSON must be an object")
    version = str(data.get("schema_version", ""))
    major = version.split(".", 1)[0]
    ours = SCHEMA_VERSION.split(".", 1)[0]
    if major != ours:
        raise ValidationError(
            f"report schema version {version!r} is not readable by a {SCHEMA_VERSION} reader"
        )
    known = {f.name for f in dataclasses.fields(Report)}
    kwargs = {k: v for k, v in data.items() if k in known}
    return Report(**kwargs)


def equal_modulo_wall_time(json_a: str, json_b: str) -> bool:
    """Reproducibility comparison: every field but wall_time must agree."""
    da = json.loads(json_a)
    db = json.loads(json_b)
    if isinstance(da, dict):
        da.pop("wall_time", None)
    if isinstance(db, dict):
        db.pop("wall_time", None)
    return da == db
