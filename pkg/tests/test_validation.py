"""
バリデーションシステムのテストケース
"""

import copy

import pytest

from src.file_reader import RegistryReader
from src.validation import (
    AssociativityValidator, BaseValidator, FixtureValidator, MembershipValidator,
    ModuleAxiomValidator, SettingsValidator, UnitValidator, ValidationConfig, ValidationEngine,
    ValidationLevel, ValidationReport, ValidationResult, create_engine, validate,
)


DUAL_NUMBERS = {
    "name": "dual",
    "field": {"p": 7},
    "algebra": {
        "basis": ["1", "t"],
        "products": {"1*1": {"1": 1}, "1*t": {"t": 1}, "t*1": {"t": 1}},
        "unit": {"1": 1}
    },
    "modules": [
        {"name": "Lambda", "regular": True},
        {"name": "k", "dim": 1, "action": {"1": [[1]]}}
    ],
    "x_members": ["Lambda"]
}

NON_ASSOCIATIVE = {
    "algebra": {
        "basis": ["1", "x", "y"],
        "products": {
            "1*1": {"1": 1}, "1*x": {"x": 1}, "1*y": {"y": 1},
            "x*1": {"x": 1}, "y*1": {"y": 1},
            "x*y": {"x": 1}
        },
        "unit": {"1": 1}
    },
    "modules": [{"name": "R", "regular": True}],
    "x_members": ["R"]
}


def build(data):
    return RegistryReader().build_registry(copy.deepcopy(data))


def dual_numbers(**changes):
    data = copy.deepcopy(DUAL_NUMBERS)
    data.update(changes)
    return data


class TestValidationResult:
    """ValidationResultクラスのテスト"""

    def test_creation(self):
        result = ValidationResult(
            level=ValidationLevel.WARNING,
            message="テストメッセージ",
            suggestion="修正提案",
            location="modules[0]",
            code="TEST_001",
            indices=("x", "y")
        )

        assert result.level == ValidationLevel.WARNING
        assert result.message == "テストメッセージ"
        assert result.suggestion == "修正提案"
        assert result.location == "modules[0]"
        assert result.code == "TEST_001"
        assert result.indices == ("x", "y")


class TestValidationReport:
    """ValidationReportクラスのテスト"""

    def test_empty_report(self):
        report = ValidationReport()
        assert len(report.results) == 0
        assert not report.has_errors()
        assert report.summary["critical"] == 0

    def test_summary_has_one_entry_per_level(self):
        report = ValidationReport()
        assert set(report.summary) == {level.value for level in ValidationLevel}
        assert set(report.summary) == {"critical", "warning", "info"}

    def test_add_results(self):
        report = ValidationReport()

        report.add_result(ValidationResult(ValidationLevel.WARNING, "警告メッセージ"))
        report.add_result(ValidationResult(ValidationLevel.CRITICAL, "重大エラー", code="X"))

        assert len(report.results) == 2
        assert report.has_errors()  # CRITICALがあるためTrue
        assert report.summary["warning"] == 1
        assert report.summary["critical"] == 1
        assert len(report.get_results_by_level(ValidationLevel.WARNING)) == 1
        assert len(report.get_results_by_code("X")) == 1

    def test_to_dict(self):
        report = ValidationReport()
        report.add_result(ValidationResult(
            level=ValidationLevel.INFO,
            message="テスト",
            location="x_members",
            indices=("k",)
        ))

        data = report.to_dict()
        assert data["valid"] is True
        assert data["summary"]["info"] == 1
        assert data["results"][0]["location"] == "x_members"
        assert data["results"][0]["indices"] == ["k"]


class TestAlgebraValidators:
    """代数の公理バリデータのテスト"""

    def test_valid_algebra(self):
        registry = build(DUAL_NUMBERS)
        assert AssociativityValidator(ValidationConfig()).validate(registry) == []
        assert UnitValidator(ValidationConfig()).validate(registry) == []

    def test_associativity_violation(self):
        registry = build(NON_ASSOCIATIVE)
        results = AssociativityValidator(ValidationConfig()).validate(registry)
        assert results
        assert all(r.level == ValidationLevel.CRITICAL for r in results)
        assert any(r.indices == ("x", "y", "y") for r in results)
        assert any("(x*y)*y" in r.message for r in results)
        assert results[0].code == "ALGEBRA_NOT_ASSOCIATIVE"

    def test_violations_are_truncated(self):
        registry = build(NON_ASSOCIATIVE)
        assert len(registry.algebra.associativity_violations()) == 1
        results = AssociativityValidator(ValidationConfig(max_reported=0)).validate(registry)
        assert [r.code for r in results] == ["MORE_VIOLATIONS"]
        assert "1 件" in results[0].message

    def test_unit_violation(self):
        data = dual_numbers()
        data["algebra"]["unit"] = {"t": 1}
        results = UnitValidator(ValidationConfig()).validate(build(data))
        assert results
        assert results[0].code == "ALGEBRA_UNIT"
        assert results[0].location == "algebra.unit"


class TestModuleAxiomValidator:
    """ModuleAxiomValidatorのテスト"""

    def setup_method(self):
        self.validator = ModuleAxiomValidator(ValidationConfig())

    def test_valid_modules(self):
        assert self.validator.validate(build(DUAL_NUMBERS)) == []

    def test_non_nilpotent_action(self):
        data = dual_numbers()
        data["modules"][1]["action"]["t"] = [[1]]
        results = self.validator.validate(build(data))
        assert len(results) >= 1
        assert results[0].code == "MODULE_AXIOM"
        assert results[0].location == "modules[1].action"
        assert ("t", "t") in [r.indices for r in results]

    def test_missing_unit_action(self):
        data = dual_numbers()
        data["modules"][1]["action"] = {}
        results = self.validator.validate(build(data))
        assert ("unit",) in [r.indices for r in results]

    def test_zero_module_is_info(self):
        data = dual_numbers()
        data["modules"].append({"name": "Z", "dim": 0})
        results = self.validator.validate(build(data))
        assert [r.code for r in results] == ["MODULE_ZERO"]
        assert results[0].level == ValidationLevel.INFO


class TestMembershipValidator:
    """MembershipValidatorのテスト"""

    def setup_method(self):
        self.validator = MembershipValidator(ValidationConfig())

    def test_unknown_x_member(self):
        results = self.validator.validate(build(dual_numbers(x_members=["Lambda", "P"])))
        assert len(results) == 1
        assert results[0].code == "X_MEMBER_UNKNOWN"
        assert results[0].level == ValidationLevel.CRITICAL
        assert results[0].location == "x_members"
        assert "Lambda" in results[0].suggestion

    def test_unknown_subcategory_member(self):
        results = self.validator.validate(build(dual_numbers(subcategories={"injectives": ["I"]})))
        assert results[0].location == "subcategories.injectives"
        assert results[0].indices == ("injectives", "I")

    def test_empty_x(self):
        results = self.validator.validate(build(dual_numbers(x_members=[])))
        assert [r.code for r in results] == ["X_EMPTY"]
        assert results[0].level == ValidationLevel.WARNING


class TestFixtureAndSettingsValidators:
    """FixtureValidator・SettingsValidatorのテスト"""

    def test_stable_complex_references(self):
        fixtures = {"stable_complex": {"M": "M", "k": "k", "pi": [[1, 0]], "iota": "none"}}
        results = FixtureValidator(ValidationConfig()).validate(build(dual_numbers(fixtures=fixtures)))
        codes = [r.code for r in results]
        assert codes.count("FIXTURE_UNKNOWN_OBJECT") == 1
        assert codes.count("FIXTURE_MATRIX") == 1

    def test_stable_complex_must_be_object(self):
        results = FixtureValidator(ValidationConfig()).validate(
            build(dual_numbers(fixtures={"stable_complex": [1, 2]}))
        )
        assert [r.code for r in results] == ["FIXTURE_MATRIX"]

    def test_without_fixtures(self):
        assert FixtureValidator(ValidationConfig()).validate(build(DUAL_NUMBERS)) == []

    def test_unknown_setting_warns(self):
        registry = build(dual_numbers(settings={"n_max": 2, "colour": "blue"}))
        results = SettingsValidator(ValidationConfig()).validate(registry)
        assert len(results) == 1
        assert results[0].level == ValidationLevel.WARNING
        assert results[0].indices == ("colour",)

    def test_unknown_setting_in_strict_mode(self):
        registry = build(dual_numbers(settings={"colour": "blue"}))
        results = SettingsValidator(ValidationConfig(strict_mode=True)).validate(registry)
        assert results[0].level == ValidationLevel.CRITICAL


class TestValidationEngine:
    """ValidationEngineクラスのテスト"""

    def test_standard_engine(self):
        engine = create_engine()
        names = [v.get_name() for v in engine.validators]
        assert names == [
            "AssociativityValidator", "UnitValidator", "ModuleAxiomValidator",
            "MembershipValidator", "FixtureValidator", "SettingsValidator",
        ]

    @pytest.mark.parametrize("data", [DUAL_NUMBERS])
    def test_valid_registry(self, data):
        report = validate(build(data))
        assert not report.has_errors()
        assert report.to_dict()["valid"] is True

    def test_invalid_registry(self):
        report = validate(build(NON_ASSOCIATIVE))
        assert report.has_errors()
        assert report.get_results_by_code("ALGEBRA_NOT_ASSOCIATIVE")

    def test_validator_exception_becomes_critical(self):
        class BrokenValidator(BaseValidator):
            def get_name(self):
                return "BrokenValidator"

            def validate(self, registry):
                raise RuntimeError("壊れています")

        engine = ValidationEngine()
        engine.register_validator(BrokenValidator(engine.config))
        report = engine.validate_registry(build(DUAL_NUMBERS))
        assert report.has_errors()
        assert report.results[0].code == "VALIDATOR_ERROR"
        assert "BrokenValidator" in report.results[0].message
