"""Experiment records shared by every module and serialized by the CLI."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, is_dataclass
from typing import Any

import numpy as np

from . import __version__

SCHEMA_VERSION = "1.0"
PASS, FAIL, OBSERVED = "PASS", "FAIL", "OBSERVED"


@dataclass
class Verdict:
    invariant: str
    status: str
    detail: str = ""

    def __post_init__(self):
        if self.status not in (PASS, FAIL, OBSERVED):
            raise ValueError(f"unknown verdict status {self.status!r}")


@dataclass
class EigenPair:
    """Eigenvalue with its eigenfunction.

    ``eigenfunction`` is a closed-form descriptor in 1-D and a ScalarField2D
    (or a plain sample vector) in 2-D.
    """

    index: int
    eigenvalue: float
    eigenfunction: Any
    multiplicity: int = 1
    residual: float | None = None
    gap: float | None = None
    cluster: int | None = None


@dataclass
class ExperimentReport:
    name: str
    config: dict = field(default_factory=dict)
    results: dict = field(default_factory=dict)
    verdicts: list[Verdict] = field(default_factory=list)
    artifacts: list[str] = field(default_factory=list)
    wall_time: float = 0.0
    version: str = __version__

    def add(self, invariant: str, ok: bool | None, detail: str = "") -> Verdict:
        """Record a verdict; ``ok=None`` records an observation."""
        status = OBSERVED if ok is None else (PASS if ok else FAIL)
        v = Verdict(invariant, status, detail)
        self.verdicts.append(v)
        return v

    @property
    def passed(self) -> bool:
        return all(v.status != FAIL for v in self.verdicts)

    def verdict(self, invariant: str) -> Verdict:
        for v in self.verdicts:
            if v.invariant == invariant:
                return v
        raise KeyError(invariant)

    def to_dict(self, timestamps: bool = True) -> dict:
        d = {
            "schema_version": SCHEMA_VERSION,
            "name": self.name,
            "config": _plain(self.config),
            "results": _plain(self.results),
            "verdicts": [asdict(v) for v in self.verdicts],
            "artifacts": list(self.artifacts),
            "version": self.version,
            "passed": self.passed,
        }
        if timestamps:
            d["wall_time"] = round(float(self.wall_time), 6)
        return d

    def to_json(self, timestamps: bool = True) -> str:
        return json.dumps(self.to_dict(timestamps), indent=2, sort_keys=True, allow_nan=False)


def _plain(obj):
    """Convert numpy scalars/arrays, dataclasses and tuples into JSON-ready data."""
    if is_dataclass(obj) and not isinstance(obj, type):
        return _plain(asdict(obj))
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def report_schema() -> dict:
    """The JSON schema every report validates against."""
    from importlib.resources import files

    return json.loads(files("nodal_lab").joinpath("schemas/report.schema.json").read_text())
