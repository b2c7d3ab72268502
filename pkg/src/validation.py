"""
homquot バリデーションシステム
レジストリの代数・加群の公理と名前参照を検証し、項目ごとのフィードバックを提供
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

from .algmod import ObjectRegistry
from .config import WorkbenchConfig


logger = logging.getLogger(__name__)


class ValidationLevel(Enum):
    """バリデーション結果のレベル"""
    CRITICAL = "critical"    # 重大エラー（計算不可能）
    WARNING = "warning"      # 警告（見直し推奨）
    INFO = "info"           # 情報


@dataclass
class ValidationResult:
    """バリデーション結果"""
    level: ValidationLevel
    message: str
    suggestion: Optional[str] = None
    location: Optional[str] = None  # 例: modules[2] / algebra.products
    code: Optional[str] = None  # エラーコード（例：ALGEBRA_NOT_ASSOCIATIVE）
    indices: Tuple[Any, ...] = ()


@dataclass
class ValidationConfig:
    """バリデーション設定"""
    strict_mode: bool = False
    max_reported: int = 20  # バリデータごとに個別に報告する違反の上限
    known_settings: Tuple[str, ...] = field(default_factory=WorkbenchConfig.setting_names)


class ValidationReport:
    """バリデーション結果の集約レポート"""

    def __init__(self):
        self.results: List[ValidationResult] = []
        self.summary: Dict[str, int] = {
            "critical": 0,
            "warning": 0,
            "info": 0
        }

    def add_result(self, result: ValidationResult):
        """結果を追加"""
        self.results.append(result)
        self.summary[result.level.value] += 1

    def has_errors(self) -> bool:
        """エラーがあるかチェック"""
        return self.summary["critical"] > 0

    def get_results_by_level(self, level: ValidationLevel) -> List[ValidationResult]:
        """指定レベルの結果のみ取得"""
        return [r for r in self.results if r.level == level]

    def get_results_by_code(self, code: str) -> List[ValidationResult]:
        return [r for r in self.results if r.code == code]

    def to_dict(self) -> Dict[str, Any]:
        """辞書形式で出力"""
        return {
            "valid": not self.has_errors(),
            "summary": self.summary,
            "results": [
                {
                    "level": r.level.value,
                    "message": r.message,
                    "suggestion": r.suggestion,
                    "location": r.location,
                    "code": r.code,
                    "indices": list(r.indices)
                }
                for r in self.results
            ]
        }


class BaseValidator(ABC):
    """バリデータの基底クラス"""

    def __init__(self, config: ValidationConfig):
        self.config = config

    @abstractmethod
    def validate(self, registry: ObjectRegistry) -> List[ValidationResult]:
        """レジストリをバリデーション"""
        pass

    @abstractmethod
    def get_name(self) -> str:
        """バリデータ名を取得"""
        pass

    def _create_result(
        self,
        level: ValidationLevel,
        message: str,
        suggestion: str = None,
        location: str = None,
        code: str = None,
        indices: Tuple[Any, ...] = ()
    ) -> ValidationResult:
        """ValidationResult作成のヘルパー"""
        return ValidationResult(
            level=level,
            message=message,
            suggestion=suggestion,
            location=location,
            code=code,
            indices=tuple(indices)
        )

    def _truncated(self, results: List[ValidationResult], total: int, location: str) -> List[ValidationResult]:
        """上限を超えた違反は件数だけを報告"""
        if total > self.config.max_reported:
            results.append(self._create_result(
                level=ValidationLevel.INFO,
                message=f"ほか {total - self.config.max_reported} 件の違反があります",
                location=location,
                code="MORE_VIOLATIONS"
            ))
        return results


class ValidationEngine:
    """バリデーションエンジンの中核クラス"""

    def __init__(self, config: ValidationConfig = None):
        self.config = config or ValidationConfig()
        self.validators: List[BaseValidator] = []

    def register_validator(self, validator: BaseValidator):
        """バリデータを登録"""
        self.validators.append(validator)

    def validate_registry(self, registry: ObjectRegistry) -> ValidationReport:
        """レジストリ全体をバリデーション"""
        report = ValidationReport()

        for validator in self.validators:
            try:
                for result in validator.validate(registry):
                    report.add_result(result)
            except Exception as e:
                logger.error(f"バリデータ '{validator.get_name()}' でエラーが発生: {e}", exc_info=True)

                # バリデータエラーをCRITICALとして記録
                report.add_result(ValidationResult(
                    level=ValidationLevel.CRITICAL,
                    message=f"バリデータエラー ({validator.get_name()}): {str(e)}",
                    code="VALIDATOR_ERROR"
                ))

        return report


class AssociativityValidator(BaseValidator):
    """積の結合律バリデータ"""

    def get_name(self) -> str:
        return "AssociativityValidator"

    def validate(self, registry: ObjectRegistry) -> List[ValidationResult]:
        algebra = registry.algebra
        names = algebra.basis_names
        triples = algebra.associativity_violations()
        results = []
        for i, j, k in triples[:self.config.max_reported]:
            results.append(self._create_result(
                level=ValidationLevel.CRITICAL,
                message=f"結合律が成り立ちません: ({names[i]}*{names[j]})*{names[k]} != {names[i]}*({names[j]}*{names[k]})",
                suggestion="algebra.products の構造定数を確認してください",
                location="algebra.products",
                code="ALGEBRA_NOT_ASSOCIATIVE",
                indices=(names[i], names[j], names[k])
            ))
        return self._truncated(results, len(triples), "algebra.products")


class UnitValidator(BaseValidator):
    """単位元バリデータ"""

    def get_name(self) -> str:
        return "UnitValidator"

    def validate(self, registry: ObjectRegistry) -> List[ValidationResult]:
        names = registry.algebra.basis_names
        results = []
        for side, j in registry.algebra.unit_violations():
            side_text = "左" if side == 'left' else "右"
            results.append(self._create_result(
                level=ValidationLevel.CRITICAL,
                message=f"単位元が {names[j]} に対して{side_text}単位として働きません",
                suggestion="algebra.unit と algebra.products を確認してください",
                location="algebra.unit",
                code="ALGEBRA_UNIT",
                indices=(side, names[j])
            ))
        return results


class ModuleAxiomValidator(BaseValidator):
    """加群の公理バリデータ"""

    def get_name(self) -> str:
        return "ModuleAxiomValidator"

    def validate(self, registry: ObjectRegistry) -> List[ValidationResult]:
        names = registry.algebra.basis_names
        results = []
        for position, (name, module) in enumerate(registry.modules.items()):
            location = f"modules[{position}]"
            violations = module.axiom_violations()
            for v in violations[:self.config.max_reported]:
                if v == 'unit':
                    message = f"加群 {name}: 単位元の作用が恒等写像ではありません"
                    indices: Tuple[Any, ...] = ('unit',)
                else:
                    i, j = v
                    message = f"加群 {name}: {names[i]}*{names[j]} の作用が作用行列の積と一致しません"
                    indices = (names[i], names[j])
                results.append(self._create_result(
                    level=ValidationLevel.CRITICAL,
                    message=message,
                    suggestion="作用行列（列が基底ベクトルの像）を確認してください",
                    location=f"{location}.action",
                    code="MODULE_AXIOM",
                    indices=indices
                ))
            self._truncated(results, len(violations), f"{location}.action")
            if module.is_zero():
                results.append(self._create_result(
                    level=ValidationLevel.INFO,
                    message=f"加群 {name} は零加群です",
                    location=location,
                    code="MODULE_ZERO"
                ))
        return results


class MembershipValidator(BaseValidator):
    """X の宣言と名前付き部分圏の参照バリデータ"""

    def get_name(self) -> str:
        return "MembershipValidator"

    def validate(self, registry: ObjectRegistry) -> List[ValidationResult]:
        results = []
        for label, name in registry.unresolved_members():
            location = "x_members" if label == 'X' else f"subcategories.{label}"
            results.append(self._create_result(
                level=ValidationLevel.CRITICAL,
                message=f"{label} の対象 {name} がレジストリにありません",
                suggestion=f"登録済みの加群: {', '.join(registry.names)}",
                location=location,
                code="X_MEMBER_UNKNOWN",
                indices=(label, name)
            ))
        if not registry.x_members:
            results.append(self._create_result(
                level=ValidationLevel.WARNING,
                message="X が宣言されていません",
                suggestion="x_members に射影加群などを列挙してください",
                location="x_members",
                code="X_EMPTY"
            ))
        return results


class FixtureValidator(BaseValidator):
    """付属データ（stable_complex など）の参照バリデータ"""

    def get_name(self) -> str:
        return "FixtureValidator"

    def validate(self, registry: ObjectRegistry) -> List[ValidationResult]:
        results = []
        complex_fixture = registry.fixtures.get('stable_complex')
        if complex_fixture is None:
            return results
        location = "fixtures.stable_complex"
        if not isinstance(complex_fixture, dict):
            results.append(self._create_result(
                level=ValidationLevel.CRITICAL,
                message="stable_complex はオブジェクトである必要があります",
                location=location,
                code="FIXTURE_MATRIX"
            ))
            return results
        for key in ('M', 'k'):
            name = complex_fixture.get(key)
            if name not in registry.modules:
                results.append(self._create_result(
                    level=ValidationLevel.CRITICAL,
                    message=f"stable_complex の {key} = {name} がレジストリにありません",
                    location=f"{location}.{key}",
                    code="FIXTURE_UNKNOWN_OBJECT",
                    indices=(key, name)
                ))
        for key in ('pi', 'iota'):
            if not isinstance(complex_fixture.get(key), list):
                results.append(self._create_result(
                    level=ValidationLevel.CRITICAL,
                    message=f"stable_complex の {key} は行列である必要があります",
                    location=f"{location}.{key}",
                    code="FIXTURE_MATRIX"
                ))
        return results


class SettingsValidator(BaseValidator):
    """settings ブロックの未知キーバリデータ"""

    def get_name(self) -> str:
        return "SettingsValidator"

    def validate(self, registry: ObjectRegistry) -> List[ValidationResult]:
        results = []
        known = set(self.config.known_settings)
        for key in sorted(registry.settings):
            if key in known:
                continue
            results.append(self._create_result(
                level=ValidationLevel.CRITICAL if self.config.strict_mode else ValidationLevel.WARNING,
                message=f"未知の設定項目です: {key}",
                suggestion="設定項目名を確認してください（この項目は無視されます）",
                location=f"settings.{key}",
                code="SETTING_UNKNOWN",
                indices=(key,)
            ))
        return results


def create_engine(config: ValidationConfig = None) -> ValidationEngine:
    """標準のバリデータを登録したエンジンを作成"""
    engine = ValidationEngine(config)
    for validator_class in (
        AssociativityValidator, UnitValidator, ModuleAxiomValidator,
        MembershipValidator, FixtureValidator, SettingsValidator,
    ):
        engine.register_validator(validator_class(engine.config))
    return engine


def validate(registry: ObjectRegistry, config: ValidationConfig = None) -> ValidationReport:
    return create_engine(config).validate_registry(registry)
