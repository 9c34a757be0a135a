"""
Tests for YAML input files and certificate loading.
"""

import json
from fractions import Fraction

import pytest

from conjnorm.errors import ContractError, MalformedInputError
from conjnorm.free_bounds import SearchBudget
from conjnorm.inputs import (
    ChainFile,
    GroupModel,
    NormFile,
    ProblemFile,
    WitnessFile,
    load_certificates,
    load_input,
    parse_rational,
)
from conjnorm.norms import INTEGERS
from conjnorm.probes import separation_check_rf
from tests.fixtures import cyclic_spec


class TestRationals:
    """Test exact rational parsing."""

    @pytest.mark.parametrize(
        "value,expected",
        [(3, Fraction(3)), ("1/3", Fraction(1, 3)), (" 2/4 ", Fraction(1, 2)), ("-5", Fraction(-5))],
    )
    def test_parses(self, value, expected):
        assert parse_rational(value) == expected

    @pytest.mark.parametrize("value", ["1/0", "one", True, "1.5.2"])
    def test_rejects(self, value):
        with pytest.raises(MalformedInputError):
            parse_rational(value, "weight")


class TestLoadInput:
    """Test YAML reading and schema validation."""

    def test_yaml_syntax_error_has_a_position(self, temp_workspace, test_helper):
        path = test_helper.create_test_file(
            temp_workspace / "broken.yaml", "group:\n  named: symmetric 3\nnorm: [unclosed\n"
        )
        with pytest.raises(MalformedInputError) as exc_info:
            load_input(path, NormFile)
        assert exc_info.value.line is not None
        assert exc_info.value.column is not None
        assert "line" in str(exc_info.value)

    def test_document_must_be_a_mapping(self, temp_workspace, test_helper):
        path = test_helper.create_test_file(temp_workspace / "list.yaml", "- 1\n")
        with pytest.raises(MalformedInputError, match="mapping"):
            load_input(path, NormFile)

    def test_schema_errors_name_the_location(self, temp_workspace, test_helper):
        path = test_helper.write_yaml(temp_workspace / "chain.yaml", {"rank": 0, "prime": 2})
        with pytest.raises(MalformedInputError, match="errors"):
            load_input(path, ChainFile)

    def test_unknown_keys_are_rejected(self, temp_workspace, test_helper):
        path = test_helper.write_yaml(
            temp_workspace / "problem.yaml", {"rank": 1, "w": "1", "radius": 3}
        )
        with pytest.raises(MalformedInputError, match="radius"):
            load_input(path, ProblemFile)

    def test_valid_problem(self, temp_workspace, test_helper):
        path = test_helper.write_yaml(
            temp_workspace / "problem.yaml", {"rank": 2, "w": "-1 -2 1 2", "m": 1}
        )
        problem = load_input(path, ProblemFile).problem()
        assert str(problem.w) == "-1 -2 1 2"
        assert problem.m == 1


class TestGroupsAndNorms:
    """Test group and norm models."""

    def test_named_group(self):
        assert GroupModel(named="symmetric 3").build().order == 6

    def test_named_group_syntax(self):
        with pytest.raises(ValueError):
            GroupModel(named="symmetric")

    def test_product_group(self):
        G = GroupModel(product=[GroupModel(named="cyclic 2"), GroupModel(named="cyclic 3")]).build()
        assert G.order == 6

    def test_exactly_one_group_form(self):
        with pytest.raises(MalformedInputError, match="exactly one"):
            GroupModel(named="cyclic 2", generators=["(0 1)"]).build()

    def test_group_from_generators(self):
        G = GroupModel(generators=["(0 1 2 3)"], name="C4").build()
        assert G.order == 4
        assert G.name == "C4"

    def test_value_table(self):
        spec = NormFile.model_validate(
            {
                "group": {"named": "cyclic 2"},
                "norm": {"values": {"()": 0, "(0 1)": "1/2"}},
            }
        )
        table = spec.build()
        assert sorted(table.values) == [Fraction(0), Fraction(1, 2)]

    def test_missing_values_break_totality(self):
        spec = NormFile.model_validate(
            {"group": {"named": "cyclic 3"}, "norm": {"values": {"()": 0}}}
        )
        with pytest.raises(ContractError, match="total"):
            spec.build()

    def test_integer_domain(self):
        spec = NormFile.model_validate(
            {"group": {"named": "cyclic 4"}, "norm": {"word_norm": ["(0 1 2 3)"], "domain": "Integers"}}
        )
        assert spec.norm.value_domain() == INTEGERS

    def test_interval_needs_a_bound(self):
        spec = NormFile.model_validate(
            {"group": {"named": "cyclic 4"}, "norm": {"values": {}, "domain": "interval"}}
        )
        with pytest.raises(MalformedInputError, match="bound"):
            spec.norm.value_domain()

    def test_unknown_domain(self):
        with pytest.raises(ValueError):
            NormFile.model_validate(
                {"group": {"named": "cyclic 4"}, "norm": {"values": {}, "domain": "reals"}}
            )

    def test_kernel_set(self):
        spec = NormFile.model_validate(
            {
                "group": {"named": "cyclic 4"},
                "norm": {"word_norm": ["(0 1 2 3)"]},
                "kernel": ["()", "(0 2)(1 3)"],
            }
        )
        G = spec.build().group
        assert len(spec.kernel_set(G)) == 2

    def test_missing_kernel(self):
        spec = NormFile.model_validate(
            {"group": {"named": "cyclic 4"}, "norm": {"word_norm": ["(0 1 2 3)"]}}
        )
        with pytest.raises(MalformedInputError, match="kernel"):
            spec.kernel_set(spec.build().group)


class TestProblemFile:
    """Test problem files and catalogs."""

    def test_catalog_order(self):
        problem = ProblemFile.model_validate(
            {
                "rank": 1,
                "specs": [{"images": ["(0 1)"], "name": "flip"}],
                "cyclic_orders": [3, 5],
                "targets": [{"named": "cyclic 2"}],
            }
        )
        labels = [spec.label for spec in problem.catalog()]
        assert labels[:3] == ["flip", "Z/3", "Z/5"]
        assert len(labels) == 5

    def test_word_list_defaults_to_w(self):
        problem = ProblemFile.model_validate({"rank": 2, "w": "1 2"})
        assert [str(w) for w in problem.word_list()] == ["1 2"]

    def test_generating_set(self):
        problem = ProblemFile.model_validate({"rank": 2, "S": ["1 2"]})
        assert len(problem.generating_set()) == 2


class TestWitnessFile:
    """Test witness file helpers."""

    def test_check_is_validated(self):
        with pytest.raises(ValueError):
            WitnessFile.model_validate({"check": "sofic", "rank": 1, "domain": ["1"]})

    def test_images_through_the_spec(self):
        witness = WitnessFile.model_validate(
            {"rank": 1, "domain": ["e", "1", "1 1"], "spec": {"images": ["(0 1 2 3)"]}}
        )
        spec = witness.build_spec()
        G = witness.target_group(spec)
        images = witness.image_ids(G, spec)
        assert images[0] == G.identity
        assert len(set(images)) == 3

    def test_images_must_align(self):
        witness = WitnessFile.model_validate(
            {"rank": 1, "domain": ["1", "1 1"], "target": {"named": "cyclic 4"}, "images": ["(0 1 2 3)"]}
        )
        G = witness.target_group(None)
        with pytest.raises(MalformedInputError, match="images"):
            witness.image_ids(G, None)

    def test_needs_a_target(self):
        witness = WitnessFile.model_validate({"rank": 1, "domain": ["1"]})
        with pytest.raises(MalformedInputError):
            witness.target_group(None)

    def test_estimated_source_norms(self):
        witness = WitnessFile.model_validate(
            {"rank": 2, "domain": ["e", "1 1", "-1 -2 1 2"], "spec": {"images": ["(0 1)", "(1 2)"]}}
        )
        spec = witness.build_spec()
        norms = witness.source_norms(SearchBudget(), spec)
        # the spec is S3, which certifies the commutator
        assert norms == [Fraction(0), Fraction(2), Fraction(2)]

    def test_given_norms_must_align(self):
        witness = WitnessFile.model_validate({"rank": 1, "domain": ["1", "1 1"], "norms": [1]})
        with pytest.raises(MalformedInputError):
            witness.source_norms(SearchBudget(), None)

    def test_unknown_norms_stay_unknown(self):
        witness = WitnessFile.model_validate({"rank": 1, "domain": ["1"], "norms": [None]})
        assert witness.source_norms(SearchBudget(), None) == [None]


class TestCertificates:
    """Test JSON-lines certificate files."""

    def test_load_certificates_and_reports(self, temp_workspace, test_helper):
        from conjnorm.probes import ProbeProblem

        problem = ProbeProblem.from_record({"rank": 1, "w": "1 1 1 1 1", "m": 3})
        record = separation_check_rf(problem, cyclic_spec(9)).to_record()
        report = {"goal": "rf-separation", "certificate": record}
        empty = {"goal": "rf-separation", "certificate": None}
        lines = [json.dumps(record), "", json.dumps(report), json.dumps(empty)]
        path = test_helper.create_test_file(temp_workspace / "certs.jsonl", "\n".join(lines))

        certificates = load_certificates(path)
        assert len(certificates) == 2
        assert all(c.spec.label == "Z/9" for c in certificates)

    def test_bad_line_is_located(self, temp_workspace, test_helper):
        path = test_helper.create_test_file(temp_workspace / "certs.jsonl", "\n{oops\n")
        with pytest.raises(MalformedInputError) as exc_info:
            load_certificates(path)
        assert exc_info.value.line == 2
