"""Machine-readable check reports.

A Report is a schema-versioned, deterministic JSON document: given
identical parameters the serialized bytes are identical (keys are sorted,
no timestamps, canonical check ordering is the caller's responsibility).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

from . import __version__

SCHEMA_VERSION = 1

PASS = "pass"
FAIL = "fail"
UNKNOWN = "unknown"
TRUNCATION_ARTIFACT = "truncation_artifact"


@dataclass(frozen=True)
class CheckRecord:
    name: str
    verdict: str                      # pass | fail | unknown | truncation_artifact
    evidence: dict = field(default_factory=dict)
    anchor: str | None = None         # which claim the check exercises

    def to_json(self) -> dict:
        d = {"name": self.name, "verdict": self.verdict,
             "evidence": _plain(self.evidence)}
        if self.anchor is not None:
            d["anchor"] = self.anchor
        return d


@dataclass
class Report:
    command: str
    parameters: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)

    def add(self, name: str, verdict: str, evidence: dict | None = None,
            anchor: str | None = None) -> None:
        self.checks.append(CheckRecord(name, verdict, evidence or {}, anchor))

    @property
    def verdicts(self) -> list[str]:
        return [c.verdict for c in self.checks]

    def exit_code(self) -> int:
        """0 all pass, 1 any fail, 3 any unknown with no fail.

        truncation_artifact counts as an expected (passing) outcome: the
        check detected exactly the finite-bound behaviour it reports.
        """
        if FAIL in self.verdicts:
            return 1
        if UNKNOWN in self.verdicts:
            return 3
        return 0

    def to_json(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "tool": f"clott {__version__}",
            "command": self.command,
            "parameters": _plain(self.parameters),
            "checks": [c.to_json() for c in self.checks],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=2) + "\n"

    def summary(self) -> str:
        lines = []
        for c in self.checks:
            lines.append(f"{c.verdict:>20}  {c.name}")
        counts = {v: self.verdicts.count(v)
                  for v in (PASS, FAIL, UNKNOWN, TRUNCATION_ARTIFACT)
                  if v in self.verdicts}
        tail = ", ".join(f"{n} {v}" for v, n in counts.items()) or "no checks"
        lines.append(f"-- {tail}")
        return "\n".join(lines)


def _plain(v):
    """Make evidence JSON-serializable and deterministic."""
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in sorted(
            v.items(), key=lambda kv: str(kv[0]))}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, (frozenset, set)):
        return sorted(str(x) for x in v)
    if isinstance(v, (str, int, float, bool)) or v is None:
        return v
    return str(v)
