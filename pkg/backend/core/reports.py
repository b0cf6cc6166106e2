import io
import json
import logging
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional

import pandas as pd
from pydantic import BaseModel, Field

logger = logging.getLogger(__name__)

VERSION = "1.0.0"
FORMATS = ("json", "csv", "text")


class Verdict(BaseModel):
    name: str
    ok: bool
    detail: str = ""
    # failing S-polynomial, slice or table difference
    witness: Optional[Dict[str, Any]] = None


class DimensionTable(BaseModel):
    label: str
    # arity -> degree -> count
    graded: Dict[int, Dict[int, int]] = Field(default_factory=dict)
    expected: Optional[Dict[int, int]] = None

    def totals(self) -> Dict[int, int]:
        return {arity: sum(counts.values()) for arity, counts in sorted(self.graded.items())}


class Report(BaseModel):
    """Outcome of one command: echo, truncation, dimension tables and verdicts"""

    command: str
    arguments: Dict[str, Any] = Field(default_factory=dict)
    truncation: Dict[str, Optional[int]] = Field(default_factory=dict)
    tables: List[DimensionTable] = Field(default_factory=list)
    verdicts: List[Verdict] = Field(default_factory=list)
    body: Optional[str] = None
    version: str = VERSION
    timestamp: str = Field(default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec="seconds"))

    @property
    def ok(self) -> bool:
        return all(v.ok for v in self.verdicts)

    def add_verdict(self, name: str, ok: bool, detail: str = "", witness: Optional[Dict[str, Any]] = None) -> Verdict:
        verdict = Verdict(name=name, ok=bool(ok), detail=detail, witness=witness)
        self.verdicts.append(verdict)
        if not verdict.ok:
            logger.warning(f"Verdict {name} failed: {detail}")
        return verdict

    def merge(self, other: "Report") -> "Report":
        self.tables.extend(other.tables)
        self.verdicts.extend(other.verdicts)
        return self


def report_schema() -> Dict[str, Any]:
    return Report.model_json_schema()


def tables_frame(report: Report) -> pd.DataFrame:
    rows = []
    for table in report.tables:
        for arity, counts in sorted(table.graded.items()):
            expected = None if table.expected is None else table.expected.get(arity)
            if not counts:
                rows.append({"family": table.label, "arity": arity, "degree": None, "dimension": 0, "expected": expected})
            for degree, count in sorted(counts.items()):
                rows.append(
                    {"family": table.label, "arity": arity, "degree": degree, "dimension": count, "expected": expected}
                )
    return pd.DataFrame(rows, columns=["family", "arity", "degree", "dimension", "expected"])


def verdicts_frame(report: Report) -> pd.DataFrame:
    rows = [{"check": v.name, "ok": v.ok, "detail": v.detail} for v in report.verdicts]
    return pd.DataFrame(rows, columns=["check", "ok", "detail"])


def render(report: Report, fmt: str = "text") -> str:
    if fmt not in FORMATS:
        raise ValueError(f"Unknown format {fmt!r}, expected one of {', '.join(FORMATS)}")
    if fmt == "json":
        return json.dumps(report.model_dump(mode="json"), indent=2, sort_keys=True) + "\n"
    tables = tables_frame(report)
    verdicts = verdicts_frame(report)
    if fmt == "csv":
        buffer = io.StringIO()
        buffer.write(f"# {report.command} {json.dumps(report.arguments, sort_keys=True)}\n")
        if not tables.empty:
            tables.to_csv(buffer, index=False)
        if not verdicts.empty:
            verdicts.to_csv(buffer, index=False)
        return buffer.getvalue()
    lines = [f"{report.command} {' '.join(f'{k}={v}' for k, v in sorted(report.arguments.items()))}".rstrip()]
    if report.truncation:
        lines.append("truncation: " + ", ".join(f"{k}={v}" for k, v in sorted(report.truncation.items())))
    for table in report.tables:
        lines.append("")
        lines.append(f"{table.label}: " + " ".join(str(v) for v in table.totals().values()))
    if not tables.empty:
        lines.append("")
        lines.append(tables.to_string(index=False))
    if report.body:
        lines.append("")
        lines.append(report.body.rstrip("\n"))
    if not verdicts.empty:
        lines.append("")
        lines.append(verdicts.to_string(index=False))
        lines.append("")
        lines.append("PASS" if report.ok else "FAIL")
    return "\n".join(lines) + "\n"


def write_report(text: str, out: Optional[str] = None) -> None:
    if out is None:
        print(text, end="")
        return
    path = Path(out)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    logger.info(f"Report written to {path}")
