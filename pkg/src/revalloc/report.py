"""Versioned run reports: provenance, stage outputs, and a discrepancy ledger.

JSON reports carry full float precision and round-trip losslessly.  CSV
reports are flat ``section,key,values...`` tables rounded to the display
precision; parsing one back recovers exactly the printed numbers.  Output
is byte-deterministic for fixed inputs and flags once the timestamp is
suppressed.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone

TOOL_NAME = "revalloc"
TOOL_VERSION = "0.1.0"
SCHEMA_VERSION = 1


@dataclass(eq=False)
class Report:
    command: str
    config: dict
    provenance: dict
    results: dict
    discrepancies: list = field(default_factory=list)
    schema_version: int = SCHEMA_VERSION

    def to_json(self) -> str:
        payload = {
            "schema_version": self.schema_version,
            "command": self.command,
            "config": self.config,
            "provenance": self.provenance,
            "results": self.results,
            "discrepancy_ledger": self.discrepancies,
        }
        return json.dumps(payload, indent=2, sort_keys=False) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "Report":
        payload = json.loads(text)
        return cls(
            command=payload["command"],
            config=payload["config"],
            provenance=payload["provenance"],
            results=payload["results"],
            discrepancies=payload["discrepancy_ledger"],
            schema_version=payload["schema_version"],
        )

    def to_csv(self, precision: int = 2) -> str:
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["section", "key", "values"])
        w.writerow(["meta", "schema_version", self.schema_version])
        w.writerow(["meta", "command", self.command])
        for key in sorted(self.config):
            w.writerow(["config", key, _scalar(self.config[key])])
        for key in sorted(self.provenance):
            w.writerow(["provenance", key, _scalar(self.provenance[key])])
        for idx, note in enumerate(self.discrepancies):
            w.writerow(["discrepancy", idx, note])

        fmt = lambda v: f"{float(v):.{precision}f}"
        results = self.results
        if "theta" in results:
            for name, value in zip(results["theta"]["names"], results["theta"]["values"]):
                w.writerow(["theta", name, fmt(value)])
        if "matrix" in results:
            names = results["matrix"]["names"]
            for name, row in zip(names, results["matrix"]["values"]):
                w.writerow(["matrix", name] + [fmt(v) for v in row])
        if "shapley" in results:
            sh = results["shapley"]
            w.writerow(["shapley_meta", "empty_coalition", sh["empty_coalition"]])
            for i, name in enumerate(sh["names"]):
                w.writerow([
                    "shapley", name,
                    fmt(sh["phi_lower"][i]), fmt(sh["phi"][i]), fmt(sh["phi_upper"][i]),
                ])
        if "allocation" in results:
            al = results["allocation"]
            w.writerow(["allocation_meta", "revenue", _scalar(al["revenue"])])
            for i, name in enumerate(al["names"]):
                w.writerow([
                    "allocation", name,
                    fmt(al["lower"][i]), fmt(al["central"][i]), fmt(al["upper"][i]),
                ])
        return out.getvalue()

    @classmethod
    def parse_csv(cls, text: str) -> dict:
        """Parse a CSV report back into {section: {key: [values...]}}."""
        sections: dict[str, dict] = {}
        rows = list(csv.reader(io.StringIO(text)))
        for row in rows[1:]:
            section, key, values = row[0], row[1], row[2:]
            sections.setdefault(section, {})[key] = values
        return sections


def _scalar(value):
    if isinstance(value, float):
        return repr(value)
    return value


def sha256_of(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def build_provenance(input_files: dict, timestamp: bool) -> dict:
    """Hash every provided input file; optionally stamp the wall clock."""
    prov = {"tool": TOOL_NAME, "version": TOOL_VERSION}
    for role in sorted(input_files):
        path = input_files[role]
        if path is not None:
            prov[f"{role}_sha256"] = sha256_of(path)
    if timestamp:
        prov["timestamp"] = datetime.now(timezone.utc).isoformat()
    return prov
