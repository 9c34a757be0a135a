"""
Tests for verdicts and witness reports.
"""

from fractions import Fraction

import pytest

from conjnorm.models import Verdict, Violation, WitnessReport, format_value


class TestVerdict:
    """Test verdict exit codes and symbols."""

    @pytest.mark.parametrize(
        "verdict,code",
        [
            (Verdict.PASS, 0),
            (Verdict.SEPARATED, 0),
            (Verdict.FAIL, 1),
            (Verdict.CONTAINED, 1),
            (Verdict.INCONCLUSIVE, 2),
            (Verdict.EXHAUSTED, 2),
        ],
    )
    def test_exit_codes(self, verdict, code):
        assert verdict.exit_code == code

    def test_symbols(self):
        assert Verdict.PASS.symbol == "✅"
        assert Verdict.CONTAINED.symbol == "❌"
        assert Verdict.EXHAUSTED.symbol == "⚠️"


class TestFormatValue:
    def test_rationals(self):
        assert format_value(Fraction(3, 6)) == "1/2"
        assert format_value(Fraction(4)) == "4"
        assert format_value(None) == "-"


class TestWitnessReport:
    """Test report construction and merging."""

    def test_no_violations_pass(self):
        report = WitnessReport.from_violations("norm-axioms", [])
        assert report.passed
        assert report.get_summary() == "✅ PASS: norm-axioms"

    def test_conclusive_violation_fails(self):
        report = WitnessReport.from_violations(
            "norm-axioms",
            [Violation("triangle", ("a", "b"), Fraction(3)), Violation("norm", ("c",), conclusive=False)],
        )
        assert report.verdict == Verdict.FAIL
        assert "2 violations" in report.get_summary()

    def test_only_undecided_violations_are_inconclusive(self):
        report = WitnessReport.from_violations("lef", [Violation("norm", ("a",), conclusive=False)])
        assert report.verdict == Verdict.INCONCLUSIVE

    def test_violations_are_sorted(self):
        report = WitnessReport.from_violations(
            "norm-axioms",
            [Violation("triangle", ("b",)), Violation("symmetry", ("a",)), Violation("triangle", ("a",))],
        )
        assert [(v.condition, v.subject) for v in report.violations] == [
            ("symmetry", ("a",)),
            ("triangle", ("a",)),
            ("triangle", ("b",)),
        ]
        assert report.conditions() == ["symmetry", "triangle"]

    def test_combine_prefixes_measurements(self):
        first = WitnessReport.from_violations("almost-hom", [], measurements={"max": "1"})
        second = WitnessReport.from_violations("metric-hom", [], parameters={"isometric": "false"})
        combined = WitnessReport.combine(
            "lef-witness", [first, second], extra=[Violation("extends", ("1",))]
        )
        assert combined.verdict == Verdict.FAIL
        assert combined.measurements == {"almost-hom.max": "1"}
        assert combined.parameters == {"isometric": "false"}

    def test_record(self):
        violation = Violation("norm", ("1 1",), Fraction(1, 2), detail="(0 1)")
        record = WitnessReport.from_violations("mws-witness", [violation]).to_record()
        assert record["verdict"] == "fail"
        assert record["violations"] == [
            {
                "condition": "norm",
                "subject": ["1 1"],
                "conclusive": True,
                "measured": "1/2",
                "detail": "(0 1)",
            }
        ]

    def test_describe(self):
        violation = Violation("norm", ("1",), Fraction(2), conclusive=False)
        assert violation.describe() == "norm at (1): measured 2 (inconclusive)"
