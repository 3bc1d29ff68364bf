"""Check results and deterministic JSON report assembly."""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

TOOL_NAME = "fellgeom"
TOOL_VERSION = "0.1.0"


@dataclass(frozen=True)
class CheckReport:
    name: str
    passed: bool
    residual: float

    def to_json(self) -> dict:
        return {"pass": bool(self.passed), "residual": float(self.residual)}


def input_digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def assemble_report(source_text: str, checks=(), extra=None) -> dict:
    """Report skeleton: tool stamp, input digest, one entry per check."""
    names = [c.name for c in checks]
    if len(set(names)) != len(names):
        raise ValueError("every check must appear exactly once")
    report = {
        "tool": {"name": TOOL_NAME, "version": TOOL_VERSION},
        "input": {"sha256": input_digest(source_text)},
        "checks": {c.name: c.to_json() for c in checks},
    }
    if extra:
        report.update(extra)
    return report


def render_report(report: dict) -> str:
    """Canonical byte-stable rendering: sorted keys, fixed layout."""
    return json.dumps(report, indent=2, sort_keys=True, allow_nan=False) + "\n"
