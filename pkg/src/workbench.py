"""
ワークベンチ本体
レジストリ・設定・計算モジュールを組み合わせて compute / suite / validate を実行
"""

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple, TypeVar

from .algmod import FdModule, ObjectRegistry, XSubcategory, clear_hom_cache
from .approx import certify_resolution, cosyzygy, syzygy, x_coresolution, x_resolution
from .barres import bar_tor
from .catmod import LEFT, RIGHT, canonical_map, restriction_module, tor
from .config import WorkbenchConfig
from .errors import (
    ComputationError, DegreeRangeError, InvalidRegistryError, RegistryFormatError,
    ResolutionCertificationError, StabilizationError,
)
from .file_reader import RegistryReader
from .komplex import phi_tor_check, phi_vanishing_check, stable_complex_check, verdier_hom
from .relext import (
    ext_lower, ext_lower_via_coresolution, ext_upper_contravariant, ext_upper_covariant,
    frobenius_formula_check, stable_hom, syzygy_formula_check,
)
from .report import Agreement, InvariantReport
from .validation import ValidationConfig, ValidationReport, validate


logger = logging.getLogger(__name__)

KINDS = ('ext-lower', 'ext-upper', 'tor', 'bar-tor', 'stable-hom', 'verdier-hom')
SUITES = (
    'balance', 'ext-tor-bar', 'theorem31', 'verdier', 'syzygy', 'hereditary', 'phi',
    'certify', 'stable-complex',
)

# 計算の失敗として報告に記録する例外
COMPUTATION_ERRORS = (ComputationError, StabilizationError, ResolutionCertificationError)

T = TypeVar('T')


def resolve_registry_path(path: str, config: WorkbenchConfig) -> Path:
    """パスが存在しなければ付属レジストリのディレクトリから探す（拡張子は省略可）"""
    candidate = Path(path)
    if candidate.exists():
        return candidate
    for name in (path, f"{path}.json"):
        bundled = config.fixtures_dir / name
        if bundled.exists():
            return bundled
    return candidate


class Workbench:
    """一つのレジストリに対する計算の窓口"""

    def __init__(
        self,
        registry: ObjectRegistry,
        config: Optional[WorkbenchConfig] = None,
        unknown_settings: Sequence[str] = ()
    ):
        self.registry = registry
        self.config = config or WorkbenchConfig.create_default()
        self.unknown_settings = tuple(unknown_settings)
        self._subcategories: Dict[Optional[str], XSubcategory] = {}

    @classmethod
    def open(cls, path: str, base_config: Optional[WorkbenchConfig] = None, **flags: Any) -> 'Workbench':
        """レジストリファイルを読み込む

        優先順位はフラグ > ファイルの settings > 既定値。p はフラグ > field.p > settings の順。

        Raises:
            FileNotFoundError: ファイルが存在しない
            RegistryFormatError: 内容の形式エラー
            ValueError: 設定値が不正
        """
        base_config = base_config or WorkbenchConfig.create_default()
        file_path = resolve_registry_path(path, base_config)
        data = RegistryReader(base_config).load_json(file_path)
        settings = data.get('settings', {})
        if not isinstance(settings, dict):
            raise RegistryFormatError("オブジェクトである必要があります", location='settings')
        try:
            config, unknown = WorkbenchConfig.from_sources(settings, **flags)
        except (TypeError, ValueError) as e:
            raise RegistryFormatError(f"設定値が不正です: {e}", location='settings') from e
        registry = RegistryReader(config).build_registry(
            data, p=flags.get('p'), default_name=file_path.stem
        )
        logger.debug("レジストリを読み込みました: %s (p=%d)", file_path, registry.field.p)
        return cls(registry, config, unknown)

    def close(self):
        """部分圏ごとのキャッシュと Hom 空間のキャッシュを解放する"""
        for x in self._subcategories.values():
            x.clear_cache()
        self._subcategories.clear()
        clear_hom_cache()

    def __enter__(self) -> 'Workbench':
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        self.close()

    # --- 検証 ---

    def validate(self) -> ValidationReport:
        return validate(self.registry, ValidationConfig())

    def ensure_valid(self):
        report = self.validate()
        if report.has_errors():
            raise InvalidRegistryError(report)

    # --- 共通処理 ---

    def subcategory(self, label: Optional[str] = None) -> XSubcategory:
        if label not in self._subcategories:
            self._subcategories[label] = self.registry.x_subcategory(
                label, mode=self.config.approximation_mode
            )
        return self._subcategories[label]

    def _check_degree(self, n: int):
        if abs(n) > self.config.max_degree:
            raise DegreeRangeError(f"次数 {n} が上限 {self.config.max_degree} を超えています")

    def _map(self, fn: Callable[[Any], T], items: Iterable[Any]) -> List[T]:
        """独立な問い合わせを順序を保って実行（workers > 1 ならスレッドで並行）"""
        items = list(items)
        if self.config.workers <= 1 or len(items) <= 1:
            return [fn(item) for item in items]
        with ThreadPoolExecutor(max_workers=self.config.workers) as pool:
            return list(pool.map(fn, items))

    def _pairs(self) -> List[Tuple[FdModule, FdModule]]:
        modules = list(self.registry.modules.values())
        return [(a, b) for a in modules for b in modules]

    def _new_report(self, command: str, query: Dict[str, Any], x: XSubcategory) -> InvariantReport:
        query = dict(query)
        query.update({
            "registry": self.registry.name,
            "p": self.registry.field.p,
            "X": list(x.names),
            "mode": x.mode,
        })
        return InvariantReport(command=command, query=query)

    def _record_failure(self, report: InvariantReport, label: str, error: Exception):
        logger.error("%s の計算に失敗しました: %s", label, error, exc_info=True)
        report.errors.append(f"{label}: {error}")

    # --- compute ---

    def compute(
        self,
        kind: str,
        a: str,
        b: str,
        n: int,
        cross_check: bool = False,
        x_label: Optional[str] = None
    ) -> InvariantReport:
        """一つの不変量を計算する

        Args:
            kind: KINDS のいずれか
            a, b: 対象名
            n: 次数
            cross_check: True なら利用できる全経路で計算して一致を確認する

        Raises:
            UnknownObjectError: 対象名がない
            DegreeRangeError: 次数が計算種別の範囲外
        """
        if kind not in KINDS:
            raise ValueError(f"未知の計算種別です: {kind}")
        self.ensure_valid()
        self._check_degree(n)
        x = self.subcategory(x_label)
        obj_a, obj_b = self.registry.get(a), self.registry.get(b)
        report = self._new_report(f"compute {kind}", {"kind": kind, "A": a, "B": b, "n": n}, x)
        started = time.perf_counter()
        handler = getattr(self, '_compute_' + kind.replace('-', '_'))
        try:
            handler(report, obj_a, obj_b, n, x, cross_check)
        except COMPUTATION_ERRORS as e:
            self._record_failure(report, kind, e)
        report.timing = time.perf_counter() - started
        return report

    def _primary(self, report: InvariantReport, route: str, dim: int):
        report.dims[route] = dim
        report.extra["dim"] = dim

    def _agree(
        self, report: InvariantReport, name: str, query: Dict[str, Any],
        left: Tuple[str, int], right: Tuple[str, int], asserted: bool = True, note: Optional[str] = None
    ):
        report.add_agreement(Agreement(name, query, left[0], left[1], right[0], right[1], asserted, note))

    def _compute_ext_lower(self, report, a, b, n, x, cross_check):
        cfg = self.config
        result = ext_lower(a, b, n, x, cfg.stability_check, cfg.include_representatives)
        self._primary(report, "resolution", result.dim)
        report.certificates["stabilization_lengths"] = list(result.lengths)
        if result.lengths:
            report.certificates["resolution"] = certify_resolution(
                x_resolution(b, x, result.lengths[-1]), raise_on_failure=False
            ).to_dict()
        if result.representatives is not None:
            report.extra["representatives"] = [r.tolist() for r in result.representatives]
        if not cross_check:
            return
        query = {"A": a.name, "B": b.name, "n": n}
        dual = ext_lower_via_coresolution(a, b, n, x, cfg.stability_check).dim
        report.dims["coresolution"] = dual
        self._agree(report, "balance", query, ("resolution", result.dim), ("coresolution", dual))
        if n < 0:
            return
        stable = stable_hom(a, syzygy(b, x, n), x).dim
        report.dims["syzygy-formula"] = stable
        self._agree(report, "syzygy-formula", query, ("resolution", result.dim), ("syzygy-formula", stable))
        if n == 1:
            kernel_dim = canonical_map(a, b, x).kernel_dim
            report.dims["canonical-kernel"] = kernel_dim
            self._agree(report, "ext-tor", query, ("resolution", result.dim), ("canonical-kernel", kernel_dim))
        elif n >= 2:
            tor_dim = self._tor(a, b, n - 1, x, cfg.tor_resolve)
            bar_dim = bar_tor(a, b, x, n - 1)
            report.dims["tor"] = tor_dim
            report.dims["bar-tor"] = bar_dim
            self._agree(report, "ext-tor", query, ("resolution", result.dim), ("tor", tor_dim))
            self._agree(report, "ext-bar", query, ("resolution", result.dim), ("bar-tor", bar_dim))
        if n >= 1:
            quotient = verdier_hom(a, b, n, x).dim
            report.dims["verdier-hom"] = quotient
            self._agree(report, "verdier", query, ("resolution", result.dim), ("verdier-hom", quotient))

    def _compute_ext_upper(self, report, a, b, n, x, cross_check):
        # Ext^n(A, B)：A を分解する側
        cfg = self.config
        result = ext_upper_contravariant(a, b, n, x, cfg.include_representatives)
        self._primary(report, "resolution", result.dim)
        report.certificates["resolution_certified"] = result.certified
        if result.representatives is not None:
            report.extra["representatives"] = [r.tolist() for r in result.representatives]
        if not cross_check:
            return
        dual = ext_upper_covariant(a, b, n, x)
        report.dims["coresolution"] = dual.dim
        report.certificates["coresolution_certified"] = dual.certified
        self._agree(
            report, "upper-variants", {"A": a.name, "B": b.name, "n": n},
            ("resolution", result.dim), ("coresolution", dual.dim), asserted=False,
            note="X による分解側と余分解側の上側拡大群は一般に異なる関手です"
        )

    def _tor(self, a: FdModule, b: FdModule, n: int, x: XSubcategory, resolve: str) -> int:
        return tor(
            restriction_module(b, RIGHT, x), restriction_module(a, LEFT, x), n,
            resolve=resolve, stability_check=self.config.stability_check, mode=x.mode
        )

    def _compute_tor(self, report, a, b, n, x, cross_check):
        resolve = self.config.tor_resolve
        dim = self._tor(a, b, n, x, resolve)
        route = f"tor-{resolve}"
        self._primary(report, route, dim)
        if not cross_check:
            return
        query = {"A": a.name, "B": b.name, "n": n}
        other = LEFT if resolve == RIGHT else RIGHT
        other_dim = self._tor(a, b, n, x, other)
        report.dims[f"tor-{other}"] = other_dim
        self._agree(report, "tor-sides", query, (route, dim), (f"tor-{other}", other_dim))
        bar_dim = bar_tor(a, b, x, n)
        report.dims["bar-tor"] = bar_dim
        self._agree(report, "tor-bar", query, (route, dim), ("bar-tor", bar_dim))
        if n >= 1:
            ext_dim = ext_lower(a, b, n + 1, x, self.config.stability_check).dim
            report.dims["ext-lower"] = ext_dim
            self._agree(report, "ext-tor", query, (route, dim), ("ext-lower", ext_dim))

    def _compute_bar_tor(self, report, a, b, n, x, cross_check):
        if n < 0:
            raise DegreeRangeError(f"Tor の次数は0以上である必要があります: {n}")
        dim = bar_tor(a, b, x, n)
        self._primary(report, "bar-tor", dim)
        report.certificates["top_degree"] = n + 1
        if not cross_check:
            return
        query = {"A": a.name, "B": b.name, "n": n}
        normalized = bar_tor(a, b, x, n, normalized=True)
        report.dims["bar-tor-normalized"] = normalized
        self._agree(report, "bar-normalized", query, ("bar-tor", dim), ("bar-tor-normalized", normalized))
        tor_dim = self._tor(a, b, n, x, self.config.tor_resolve)
        report.dims["tor"] = tor_dim
        self._agree(report, "tor-bar", query, ("bar-tor", dim), ("tor", tor_dim))

    def _compute_stable_hom(self, report, a, b, n, x, cross_check):
        # n は第二引数のシジジー次数（A/[X](A, Ω^n B)）
        if n < 0:
            raise DegreeRangeError(f"シジジーの次数は0以上である必要があります: {n}")
        result = stable_hom(a, syzygy(b, x, n), x)
        self._primary(report, "stable-hom", result.dim)
        report.extra["hom_dim"] = result.hom_dim
        if self.config.include_representatives:
            report.extra["representatives"] = [h.matrix.tolist() for h in result.representatives]
        if not cross_check:
            return
        query = {"A": a.name, "B": b.name, "n": n}
        ext_dim = ext_lower(a, b, n, x, self.config.stability_check).dim
        report.dims["ext-lower"] = ext_dim
        self._agree(report, "syzygy-formula", query, ("stable-hom", result.dim), ("ext-lower", ext_dim))
        if n == 0:
            coker = canonical_map(a, b, x).cokernel_dim
            report.dims["canonical-cokernel"] = coker
            self._agree(report, "canonical-cokernel", query, ("stable-hom", result.dim), ("canonical-cokernel", coker))
            quotient = verdier_hom(a, b, 0, x).dim
            report.dims["verdier-hom"] = quotient
            self._agree(report, "verdier", query, ("stable-hom", result.dim), ("verdier-hom", quotient))

    def _compute_verdier_hom(self, report, a, b, n, x, cross_check):
        result = verdier_hom(a, b, n, x)
        self._primary(report, "verdier-hom", result.dim)
        report.certificates["truncation_lengths"] = list(result.truncation_lengths)
        report.certificates["tried"] = [list(pair) for pair in result.tried]
        if not cross_check:
            return
        query = {"A": a.name, "B": b.name, "n": n}
        route, expected = self._verdier_expectation(a, b, n, x)
        report.dims[route] = expected
        self._agree(report, "verdier", query, ("verdier-hom", result.dim), (route, expected))

    def _verdier_expectation(self, a: FdModule, b: FdModule, n: int, x: XSubcategory) -> Tuple[str, int]:
        if n < 0:
            return "vanishing", 0
        if n == 0:
            return "stable-hom", stable_hom(a, b, x).dim
        return "ext-lower", ext_lower(a, b, n, x, self.config.stability_check).dim

    # --- suite ---

    def run_suite(self, name: str, x_label: Optional[str] = None) -> InvariantReport:
        """性質スイートを全登録対象の組に対して実行する"""
        if name not in SUITES:
            raise ValueError(f"未知のスイートです: {name}")
        self.ensure_valid()
        x = self.subcategory(x_label)
        report = self._new_report(f"suite {name}", {"suite": name, "n_max": self.config.n_max}, x)
        started = time.perf_counter()
        runner = getattr(self, '_suite_' + name.replace('-', '_'))
        runner(report, x)
        report.timing = time.perf_counter() - started
        return report

    def _run_queries(
        self, report: InvariantReport, label: str,
        queries: Sequence[Tuple[Any, ...]], check: Callable[..., List[Agreement]]
    ):
        def guarded(query):
            try:
                return check(*query), None
            except COMPUTATION_ERRORS as e:
                return [], e

        for query, (agreements, error) in zip(queries, self._map(guarded, queries)):
            if error is not None:
                names = [q.name if isinstance(q, FdModule) else q for q in query]
                self._record_failure(report, f"{label}{tuple(names)}", error)
                continue
            for agreement in agreements:
                report.add_agreement(agreement)

    def _suite_balance(self, report, x):
        degrees = range(-3, self.config.n_max + 3)
        queries = [(a, b, n) for a, b in self._pairs() for n in degrees]

        def check(a, b, n):
            left = ext_lower(a, b, n, x, self.config.stability_check).dim
            right = ext_lower_via_coresolution(a, b, n, x, self.config.stability_check).dim
            return [Agreement("balance", {"A": a.name, "B": b.name, "n": n},
                              "resolution", left, "coresolution", right)]

        self._run_queries(report, "balance", queries, check)

    def _suite_ext_tor_bar(self, report, x):
        cfg = self.config
        queries = [(a, b, n) for a, b in self._pairs() for n in range(0, cfg.n_max + 1)]

        def check(a, b, n):
            query = {"A": a.name, "B": b.name, "n": n}
            if n == 0:
                can = canonical_map(a, b, x)
                ext1 = ext_lower(a, b, 1, x, cfg.stability_check).dim
                stable = stable_hom(a, b, x).dim
                return [
                    Agreement("ext-canonical-kernel", query, "ext-lower", ext1, "canonical-kernel", can.kernel_dim),
                    Agreement("canonical-cokernel", query, "stable-hom", stable, "canonical-cokernel", can.cokernel_dim),
                ]
            ext_dim = ext_lower(a, b, n + 1, x, cfg.stability_check).dim
            tor_dim = self._tor(a, b, n, x, cfg.tor_resolve)
            bar_dim = bar_tor(a, b, x, n)
            return [
                Agreement("ext-tor", query, "ext-lower", ext_dim, "tor", tor_dim),
                Agreement("tor-bar", query, "tor", tor_dim, "bar-tor", bar_dim),
            ]

        self._run_queries(report, "ext-tor-bar", queries, check)

    def _suite_verdier(self, report, x):
        queries = [(a, b, n) for a, b in self._pairs() for n in range(-2, self.config.n_max + 1)]

        def check(a, b, n):
            result = verdier_hom(a, b, n, x)
            route, expected = self._verdier_expectation(a, b, n, x)
            return [Agreement(
                "verdier", {"A": a.name, "B": b.name, "n": n}, "verdier-hom", result.dim, route, expected,
                note=f"truncation {list(result.truncation_lengths)}"
            )]

        self._run_queries(report, "verdier", queries, check)

    _suite_theorem31 = _suite_verdier

    def _suite_syzygy(self, report, x):
        cfg = self.config
        queries = [(a, b, n) for a, b in self._pairs() for n in range(0, cfg.n_max + 2)]

        def check(a, b, n):
            query = {"A": a.name, "B": b.name, "n": n}
            forward = syzygy_formula_check(a, b, n, x, cfg.stability_check)
            backward = frobenius_formula_check(a, b, n, x, cfg.stability_check)
            return [
                Agreement("syzygy-formula", query, "ext-lower", forward.left, "stable-hom-syzygy", forward.right),
                Agreement("cosyzygy-formula", query, "ext-lower", backward.left, "stable-hom-cosyzygy", backward.right),
            ]

        self._run_queries(report, "syzygy", queries, check)

    def _hereditary_side(self, report, x, label: str, level_of: Callable[[FdModule], int]):
        cfg = self.config
        objects = list(self.registry.modules.values())
        verdict = phi_vanishing_check(objects, x, cfg.n_max, cfg.stability_check)
        levels = {obj.name: level_of(obj) for obj in objects}
        exceeding = sorted(name for name, dim in levels.items() if dim)
        report.results.append({
            "side": label,
            "X": list(x.names),
            "no_obstruction": verdict.no_obstruction,
            "witness": list(verdict.witness[:3]) if verdict.witness else None,
            "dimension_exceeds_one": exceeding,
        })
        report.add_agreement(Agreement(
            f"hereditary-{label}", {"n_max": cfg.n_max},
            "ext-vanishing", 0 if verdict.no_obstruction else 1,
            "x-dimension", 1 if exceeding else 0,
        ))
        return verdict

    def _suite_hereditary(self, report, x):
        def projective_side(obj):
            # Ω^1 B ∈ add X ⟺ 安定 End(Ω^1 B) = 0
            omega = syzygy(obj, x, 1)
            return stable_hom(omega, omega, x).dim

        try:
            verdict = self._hereditary_side(report, x, "projective", projective_side)
        except COMPUTATION_ERRORS as e:
            self._record_failure(report, "hereditary", e)
            return
        n_max = self.config.n_max
        if verdict.no_obstruction:
            report.verdict = f"hereditary-consistent up to n_max={n_max}"
        else:
            a, b, n, _ = verdict.witness
            report.verdict = f"not hereditary: witness ({a},{b},{n})"

        if 'injectives' in self.registry.subcategories and x.label != 'injectives':
            injectives = self.subcategory('injectives')

            def injective_side(obj):
                omega = cosyzygy(obj, injectives, 1)
                return stable_hom(omega, omega, injectives).dim

            try:
                dual = self._hereditary_side(report, injectives, "injective", injective_side)
            except COMPUTATION_ERRORS as e:
                self._record_failure(report, "hereditary(injectives)", e)
                return
            report.add_agreement(Agreement(
                "hereditary-sides", {"n_max": n_max},
                "projective", 0 if verdict.no_obstruction else 1,
                "injective", 0 if dual.no_obstruction else 1,
            ))

    def _suite_phi(self, report, x):
        cfg = self.config
        objects = list(self.registry.modules.values())
        try:
            ext_side = phi_vanishing_check(objects, x, cfg.n_max, cfg.stability_check)
            tor_side = phi_tor_check(objects, x, cfg.n_max, cfg.stability_check)
        except COMPUTATION_ERRORS as e:
            self._record_failure(report, "phi", e)
            return
        report.results.append(dict(side="ext", **ext_side.to_dict()))
        report.results.append(dict(side="tor", **tor_side.to_dict()))
        report.add_agreement(Agreement(
            "phi-sides", {"n_max": cfg.n_max},
            "ext-vanishing", 0 if ext_side.no_obstruction else 1,
            "tor-vanishing", 0 if tor_side.no_obstruction else 1,
        ))
        if ext_side.no_obstruction:
            report.verdict = f"no obstruction up to n_max={cfg.n_max}"
        else:
            a, b, n, dim = ext_side.witness
            report.verdict = f"obstruction: Ext_{n}({a},{b}) = {dim}"

    def _suite_certify(self, report, x):
        length = self.config.certify_length
        objects = list(self.registry.modules.values())
        queries = [(obj, kind) for obj in objects for kind in ("resolution", "coresolution")]

        def certify(query):
            obj, kind = query
            if kind == "resolution":
                res = x_resolution(obj, x, length)
            else:
                res = x_coresolution(obj, x, length)
            return certify_resolution(res, raise_on_failure=False)

        for certificate in self._map(certify, queries):
            report.results.append({
                "object": certificate.target,
                "kind": certificate.kind,
                "length": certificate.length,
                "certified": certificate.certified,
            })
            report.certificates[f"{certificate.kind}:{certificate.target}"] = certificate.to_dict()
            if not certificate.certified:
                name, degree, dim = certificate.first_failure()
                report.errors.append(
                    f"{certificate.kind} {certificate.target} が次数 {degree} (X対象 {name}) で非輪状です: {dim}"
                )

    def _suite_stable_complex(self, report, x):
        fixture = self.registry.fixtures.get('stable_complex')
        if fixture is None:
            raise RegistryFormatError("stable_complex の付属データがありません", location='fixtures.stable_complex')
        m = self.registry.get(fixture['M'])
        k = self.registry.get(fixture['k'])
        result = stable_complex_check(m, k, fixture['pi'], fixture['iota'], x)
        report.extra["stable_complex"] = result.to_dict()
        report.dims["stable-hom(pi)"] = result.pi_class_dim
        report.dims["stable-hom(iota)"] = result.iota_class_dim
        if not result.passed:
            report.errors.append("安定圏での複体の確認に失敗しました")
        report.verdict = "passed" if result.passed else "failed"
