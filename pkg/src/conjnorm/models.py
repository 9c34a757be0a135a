"""
Result models for Conjnorm checks

Defines verdicts and the structured reports returned by norm validation,
witness checks and audits. Reports never raise on a failing check; the
failure is recorded as a list of violations.
"""

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Optional, Tuple

INPUT_ERROR_EXIT = 3


class Verdict(Enum):
    """Outcome of a check, probe or search."""

    PASS = "pass"
    FAIL = "fail"
    INCONCLUSIVE = "inconclusive"
    SEPARATED = "separated"
    CONTAINED = "contained"
    EXHAUSTED = "exhausted"

    @property
    def exit_code(self) -> int:
        """Shell exit status for this verdict."""
        if self in (Verdict.PASS, Verdict.SEPARATED):
            return 0
        if self in (Verdict.FAIL, Verdict.CONTAINED):
            return 1
        return 2

    @property
    def symbol(self) -> str:
        if self.exit_code == 0:
            return "✅"
        if self.exit_code == 1:
            return "❌"
        return "⚠️"


def format_value(value: Optional[Fraction]) -> str:
    """Render an exact rational as "p/q" (or an integer); None as "-"."""
    if value is None:
        return "-"
    return str(Fraction(value))


@dataclass(frozen=True)
class Violation:
    """One failed condition of a check.

    Attributes:
        condition: Tag of the failed condition (e.g. "triangle", "norm")
        subject: Offending tuple rendered as strings
        measured: Measured quantity, when the condition is quantitative
        conclusive: False when the check could not be decided
        detail: Free-form explanation
    """

    condition: str
    subject: Tuple[str, ...] = ()
    measured: Optional[Fraction] = None
    conclusive: bool = True
    detail: str = ""

    def sort_key(self) -> Tuple[str, Tuple[str, ...], str]:
        return (self.condition, self.subject, self.detail)

    def to_record(self) -> Dict[str, Any]:
        record: Dict[str, Any] = {
            "condition": self.condition,
            "subject": list(self.subject),
            "conclusive": self.conclusive,
        }
        if self.measured is not None:
            record["measured"] = format_value(self.measured)
        if self.detail:
            record["detail"] = self.detail
        return record

    def describe(self) -> str:
        text = f"{self.condition} at ({', '.join(self.subject)})"
        if self.measured is not None:
            text += f": measured {format_value(self.measured)}"
        if self.detail:
            text += f" [{self.detail}]"
        if not self.conclusive:
            text += " (inconclusive)"
        return text


@dataclass
class WitnessReport:
    """Verdict of a check with per-condition diagnostics."""

    check: str
    verdict: Verdict
    violations: List[Violation] = field(default_factory=list)
    parameters: Dict[str, str] = field(default_factory=dict)
    measurements: Dict[str, str] = field(default_factory=dict)
    notes: List[str] = field(default_factory=list)

    @classmethod
    def from_violations(
        cls,
        check: str,
        violations: Iterable[Violation],
        parameters: Optional[Dict[str, str]] = None,
        measurements: Optional[Dict[str, str]] = None,
        notes: Optional[List[str]] = None,
    ) -> "WitnessReport":
        """Build a report whose verdict follows from its violations.

        Pass when there are none, fail when any is conclusive, otherwise
        inconclusive. Violations are sorted canonically.
        """
        ordered = sorted(violations, key=lambda v: v.sort_key())
        if not ordered:
            verdict = Verdict.PASS
        elif any(v.conclusive for v in ordered):
            verdict = Verdict.FAIL
        else:
            verdict = Verdict.INCONCLUSIVE
        return cls(
            check=check,
            verdict=verdict,
            violations=ordered,
            parameters=dict(parameters or {}),
            measurements=dict(measurements or {}),
            notes=list(notes or []),
        )

    @classmethod
    def combine(
        cls,
        check: str,
        reports: Iterable["WitnessReport"],
        parameters: Optional[Dict[str, str]] = None,
        extra: Iterable[Violation] = (),
    ) -> "WitnessReport":
        """Merge several sub-reports into one composite verdict."""
        violations: List[Violation] = list(extra)
        measurements: Dict[str, str] = {}
        notes: List[str] = []
        merged_parameters: Dict[str, str] = {}
        for report in reports:
            violations.extend(report.violations)
            merged_parameters.update(report.parameters)
            for key, value in report.measurements.items():
                measurements[f"{report.check}.{key}"] = value
            notes.extend(report.notes)
        merged_parameters.update(parameters or {})
        return cls.from_violations(
            check, violations, merged_parameters, measurements, notes
        )

    @property
    def passed(self) -> bool:
        return self.verdict == Verdict.PASS

    def conditions(self) -> List[str]:
        """Distinct condition tags that failed, in canonical order."""
        seen: List[str] = []
        for violation in self.violations:
            if violation.condition not in seen:
                seen.append(violation.condition)
        return seen

    def get_summary(self) -> str:
        """Get a summary string for the report."""
        status = f"{self.verdict.symbol} {self.verdict.value.upper()}"
        if self.violations:
            return f"{status}: {self.check} ({len(self.violations)} violations)"
        return f"{status}: {self.check}"

    def to_record(self) -> Dict[str, Any]:
        return {
            "check": self.check,
            "verdict": self.verdict.value,
            "violations": [v.to_record() for v in self.violations],
            "parameters": dict(self.parameters),
            "measurements": dict(self.measurements),
            "notes": list(self.notes),
        }
