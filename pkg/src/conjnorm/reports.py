"""
Report rendering

Text output for people and JSON records (sorted keys, exact rationals)
for machines. Rendering never changes a result; the same result always
renders to the same bytes.
"""

import json
from typing import Any, Dict, List, Sequence

from .free_bounds import NormBound
from .groups import ElementSet
from .models import Verdict, WitnessReport, format_value
from .norms import ChainValue, NormTable
from .probes import SearchReport, SeparationCertificate

FORMATS = ("text", "records")


def to_json(record: Dict[str, Any]) -> str:
    return json.dumps(record, sort_keys=True, ensure_ascii=False)


def table_record(table: NormTable) -> Dict[str, Any]:
    return {
        "group": table.group.name,
        "order": table.group.order,
        "domain": str(table.domain),
        "values": {element: value for _, element, value in table.rows()},
        "notes": list(table.notes),
    }


def set_record(elements: ElementSet, label: str = "set") -> Dict[str, Any]:
    return {label: elements.describe(), "size": len(elements), "group": elements.group.name}


def render_table(table: NormTable) -> List[str]:
    lines = [f"📊 Norm on {table.group.name} (order {table.group.order}, values in {table.domain})"]
    width = max(len(element) for _, element, _ in table.rows())
    for _, element, value in table.rows():
        lines.append(f"  {element.ljust(width)}  {value}")
    lines.extend(f"  note: {n}" for n in table.notes)
    return lines


def render_report(report: WitnessReport) -> List[str]:
    lines = [report.get_summary()]
    for key, value in sorted(report.parameters.items()):
        lines.append(f"   {key}: {value}")
    for key, value in sorted(report.measurements.items()):
        lines.append(f"   {key} = {value}")
    for violation in report.violations:
        lines.append(f"   - {violation.describe()}")
    lines.extend(f"   note: {n}" for n in report.notes)
    return lines


def render_certificate(cert: SeparationCertificate) -> List[str]:
    lines = [cert.get_summary(), f"   w = {cert.problem.w} -> {cert.image}"]
    lines.append(f"   checked set: {len(cert.checked_set)} elements of {cert.spec.group.order}")
    for key, value in sorted(cert.details.items()):
        lines.append(f"   {key}: {value}")
    return lines


def render_search(report: SearchReport) -> List[str]:
    lines = [report.get_summary()]
    for label, verdict in report.outcomes:
        lines.append(f"   {label}: {verdict}")
    if report.certificate is not None:
        lines.extend(render_certificate(report.certificate))
    lines.extend(f"   note: {n}" for n in report.notes)
    return lines


def render_bounds(bounds: Sequence[NormBound]) -> List[str]:
    lines = []
    for bound in bounds:
        symbol = Verdict.PASS.symbol if bound.exact else Verdict.INCONCLUSIVE.symbol
        lines.append(f"{symbol} {bound.describe()}")
    return lines


def render_chain(values: Sequence[ChainValue]) -> List[str]:
    lines = []
    for v in values:
        text = f"l({v.word}) = {format_value(v.value)}"
        if v.level is not None:
            text += f" (first nontrivial at level {v.level})"
        if v.finite_depth_zero:
            text += f" ⚠️ zero at finite depth {v.depth}"
        lines.append(text)
    return lines


def render_set(elements: ElementSet, title: str) -> List[str]:
    lines = [f"{title}: {len(elements)} of {elements.group.order} elements"]
    lines.extend(f"  {e}" for e in elements.describe())
    return lines


def emit_lines(lines: Sequence[str]) -> str:
    return "\n".join(lines)


def emit_records(records: Sequence[Dict[str, Any]]) -> str:
    return "\n".join(to_json(r) for r in records)
