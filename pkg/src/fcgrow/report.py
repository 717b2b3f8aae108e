"""Analysis report assembly and serialization.

Reports are deterministic for a fixed input and tool version: keys are
sorted, sets are serialized in canonical order, and wall-clock timing
is logged rather than embedded, so identical runs produce identical
bytes.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

from . import dep_domain as dd

TOOL_VERSION = "0.1.0"
SCHEMA = 1

EXIT_ALL_POLY = 0
EXIT_INVALID = 1
EXIT_GROWTH = 2
EXIT_INTERNAL = 3


@dataclass
class PairSummary:
    entry: str
    exit: str
    deps: dd.DepSet
    report: dd.GrowthReport


@dataclass
class ReportDocument:
    digest: str
    input_format: str
    mode: str
    pairs: list[PairSummary]
    combined: dd.GrowthReport
    warnings: list[str] = field(default_factory=list)
    timing_ms: float | None = None  # logged, never serialized

    @property
    def exit_code(self) -> int:
        return EXIT_ALL_POLY if self.combined.all_polynomial() else EXIT_GROWTH

    def to_json(self) -> str:
        def growth(rep: dd.GrowthReport) -> dict:
            return {
                f"x{vg.var}": {
                    "class": vg.classification,
                    "witnesses": [dd.format_dep(d) for d in vg.witnesses],
                }
                for vg in rep.per_var
            }

        doc = {
            "schema": SCHEMA,
            "version": TOOL_VERSION,
            "digest": self.digest,
            "format": self.input_format,
            "mode": self.mode,
            "pairs": [
                {
                    "entry": p.entry,
                    "exit": p.exit,
                    "deps": sorted(dd.format_dep(d) for d in p.deps),
                    "growth": growth(p.report),
                }
                for p in sorted(self.pairs, key=lambda p: (p.entry, p.exit))
            ],
            "combined": growth(self.combined),
            "warnings": sorted(self.warnings),
        }
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"

    def to_text(self) -> str:
        lines = [f"fcgrow {TOOL_VERSION}  input {self.digest[:12]}  mode {self.mode}"]
        for w in sorted(self.warnings):
            lines.append(f"warning: {w}")
        for p in sorted(self.pairs, key=lambda p: (p.entry, p.exit)):
            lines.append(f"pair {p.entry} -> {p.exit}:")
            for vg in p.report.per_var:
                wit = ""
                if vg.witnesses:
                    wit = "  [" + ", ".join(dd.format_dep(d) for d in vg.witnesses) + "]"
                lines.append(f"  x{vg.var}: {vg.classification}{wit}")
        lines.append("combined:")
        for vg in self.combined.per_var:
            wit = ""
            if vg.witnesses:
                wit = "  [" + ", ".join(dd.format_dep(d) for d in vg.witnesses) + "]"
            lines.append(f"  x{vg.var}: {vg.classification}{wit}")
        return "\n".join(lines) + "\n"


def input_digest(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()
