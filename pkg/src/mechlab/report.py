"""Report assembly and serialization.

One ReportDocument per CLI invocation, serialized as sorted-key JSON so
identical runs produce byte-identical files.  Delimited output uses a
fixed CSV schema, versioned in a leading comment line, one file per
report section.  Wall-clock data is attached only outside deterministic
mode.
"""

import csv
import datetime
import json
from dataclasses import dataclass, field

CSV_SCHEMA_VERSION = "v1"


@dataclass
class ReportDocument:
    """Everything one command run produced, ready for serialization."""

    command: str
    scenario: dict
    sections: dict
    tool: str = "mechlab"
    version: str = "0.1.0"
    timings: dict = None
    created_utc: str = None

    def to_dict(self) -> dict:
        data = {
            "tool": self.tool,
            "version": self.version,
            "command": self.command,
            "scenario": self.scenario,
            "sections": self.sections,
        }
        if self.timings is not None:
            data["timings"] = self.timings
        if self.created_utc is not None:
            data["created_utc"] = self.created_utc
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "ReportDocument":
        return cls(
            command=data["command"],
            scenario=data["scenario"],
            sections=data["sections"],
            tool=data.get("tool", "mechlab"),
            version=data.get("version", "unknown"),
            timings=data.get("timings"),
            created_utc=data.get("created_utc"),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    def write_json(self, path) -> None:
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(self.to_json())


def stamp_now() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat()


def write_csv(path, kind: str, columns, rows) -> None:
    """Write one delimited section with the versioned schema comment line."""
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(f"# mechlab-csv {CSV_SCHEMA_VERSION} {kind}\n")
        writer = csv.writer(handle)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])


TRACE_CSV_COLUMNS = ("param", "computed", "reference", "slack")
GAINS_CSV_COLUMNS = ("profile_index", "kind", "deviator", "chosen_bid", "gain")
WITNESS_CSV_COLUMNS = ("axiom", "profile", "agent", "detail", "violation")
MATRIX_CSV_COLUMNS = ("mechanism", "axiom", "verdict")

_AXIOM_ABBREVIATIONS = {
    "non_wastefulness": "NW",
    "symmetry": "SYM",
    "monotonicity": "MONO",
    "zero_bid_payment": "ZERO",
    "incentive_compatibility": "IC",
    "sybil_proofness": "SYBIL",
    "individual_rationality": "IR",
}


def matrix_text_table(verdicts: dict) -> str:
    """Aligned mechanism-by-axiom table of pass/fail marks."""
    axioms = list(next(iter(verdicts.values())).keys())
    headers = [_AXIOM_ABBREVIATIONS.get(a, a) for a in axioms]
    name_width = max(len("mechanism"), *(len(n) for n in verdicts))
    widths = [max(len(h), 4) for h in headers]
    lines = []
    lines.append("  ".join(["mechanism".ljust(name_width)]
                           + [h.rjust(w) for h, w in zip(headers, widths)]))
    for name, row in verdicts.items():
        marks = ["pass" if row[a] == "pass" else "FAIL" for a in axioms]
        lines.append("  ".join([name.ljust(name_width)]
                               + [m.rjust(w) for m, w in zip(marks, widths)]))
    legend = ", ".join(f"{_AXIOM_ABBREVIATIONS.get(a, a)}={a}" for a in axioms)
    lines.append(f"({legend})")
    return "\n".join(lines)
