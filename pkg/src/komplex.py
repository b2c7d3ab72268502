"""
加群の有界複体とホモトピー圏
懸垂、写像錐、愚直な切り詰め、ホモトピー圏の Hom、Verdier 商の Hom
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .algmod import AlgebraPresentation, FdModule, ModuleHom, XSubcategory, direct_sum, hom_matrices
from .approx import shared_zero, x_resolution
from .catmod import LEFT, RIGHT, canonical_map, restriction_module, tor
from .errors import ComputationError, DimensionMismatchError, StabilizationError
from .exactla import extending_columns, kernel_basis, rank
from .relext import Factorization, ext_lower, factor_through_x, stable_hom


logger = logging.getLogger(__name__)


# 符号の取り決め
SIGNS = {
    "suspend": -1,      # Σ の微分に掛かる符号
    "cone_source": -1,  # 写像錐の X 側の微分
}


@dataclass(frozen=True, eq=False)
class BoundedComplex:
    """有界余鎖複体。degrees [lo, hi] の外は零

    differentials[k] は C^k → C^{k+1}（lo ≤ k < hi）。
    """
    algebra: AlgebraPresentation
    lo: int
    hi: int
    components: Dict[int, FdModule]
    differentials: Dict[int, ModuleHom] = field(default_factory=dict)

    def term(self, degree: int) -> FdModule:
        if self.lo <= degree <= self.hi and degree in self.components:
            return self.components[degree]
        return shared_zero(self.algebra)

    def differential(self, degree: int) -> ModuleHom:
        if degree in self.differentials:
            return self.differentials[degree]
        return ModuleHom.zero(self.term(degree), self.term(degree + 1))

    def support(self) -> List[int]:
        return [k for k in range(self.lo, self.hi + 1) if self.term(k).dim]

    def is_zero(self) -> bool:
        return not self.support()

    def d_squared_violations(self) -> List[int]:
        f = self.algebra.field
        return [
            k for k in range(self.lo - 1, self.hi + 1)
            if np.any(f.mul(self.differential(k + 1).matrix, self.differential(k).matrix))
        ]

    @classmethod
    def zero(cls, algebra: AlgebraPresentation) -> 'BoundedComplex':
        return cls(algebra, 0, -1, {})

    @classmethod
    def from_resolution(cls, res, lower: int, upper: int) -> 'BoundedComplex':
        """分解（term/differential を持つもの）の次数 [lower, upper] 部分"""
        components = {k: res.term(k) for k in range(lower, upper + 1)}
        differentials = {k: res.differential(k) for k in range(lower, upper)}
        return cls(res.target.algebra, lower, upper, components, differentials)


@dataclass(frozen=True, eq=False)
class ChainMap:
    source: BoundedComplex
    target: BoundedComplex
    components: Dict[int, ModuleHom]

    def component(self, degree: int) -> ModuleHom:
        if degree in self.components:
            return self.components[degree]
        return ModuleHom.zero(self.source.term(degree), self.target.term(degree))

    def commutation_violations(self) -> List[int]:
        f = self.source.algebra.field
        lo = min(self.source.lo, self.target.lo) - 1
        hi = max(self.source.hi, self.target.hi)
        return [
            k for k in range(lo, hi + 1)
            if np.any(
                f.mul(self.target.differential(k).matrix, self.component(k).matrix)
                != f.mul(self.component(k + 1).matrix, self.source.differential(k).matrix)
            )
        ]


def stalk(module: FdModule, degree: int = 0) -> BoundedComplex:
    """次数 degree に集中した複体"""
    if module.dim == 0:
        return BoundedComplex.zero(module.algebra)
    return BoundedComplex(module.algebra, degree, degree, {degree: module})


def suspend(c: BoundedComplex, n: int = 1) -> BoundedComplex:
    """(Σ^n C)^j = C^{j+n}、微分に (-1)^n"""
    if n == 0 or c.is_zero():
        return c
    sign = SIGNS["suspend"] ** (n % 2)
    components = {k - n: m for k, m in c.components.items()}
    differentials = {
        k - n: ModuleHom(d.source, d.target, sign * d.matrix)
        for k, d in c.differentials.items()
    }
    return BoundedComplex(c.algebra, c.lo - n, c.hi - n, components, differentials)


@dataclass(frozen=True, eq=False)
class Cone:
    """写像錐と標準写像 B → Cone(f) → ΣX"""
    complex: BoundedComplex
    inclusion: ChainMap
    projection: ChainMap


def cone(f: ChainMap) -> Cone:
    """Cone(f)^k = B^k ⊕ X^{k+1}、微分は [[d_B, f], [0, -d_X]]"""
    x, b = f.source, f.target
    algebra = b.algebra
    field_ = algebra.field
    lo = min(b.lo, x.lo - 1)
    hi = max(b.hi, x.hi - 1)
    sums = {k: direct_sum([b.term(k), x.term(k + 1)]) for k in range(lo, hi + 1)}
    components = {k: s.module for k, s in sums.items()}
    differentials = {}
    for k in range(lo, hi):
        src, tgt = sums[k], sums[k + 1]
        db = b.differential(k).matrix
        dx = x.differential(k + 1).matrix
        fk = f.component(k + 1).matrix
        top = np.hstack([db, fk])
        bottom = np.hstack([
            np.zeros((dx.shape[0], db.shape[1]), dtype=np.int64), SIGNS["cone_source"] * dx
        ])
        differentials[k] = ModuleHom(src.module, tgt.module, np.vstack([top, bottom]))
    complex_ = BoundedComplex(algebra, lo, hi, components, differentials)
    bad = complex_.d_squared_violations()
    if bad:
        raise ComputationError(f"写像錐で d² ≠ 0 となる次数があります: {bad}")
    shifted = suspend(x, 1)
    inclusion = ChainMap(b, complex_, {k: sums[k].injections[0] for k in range(lo, hi + 1)})
    projection = ChainMap(complex_, shifted, {
        k: ModuleHom(sums[k].module, shifted.term(k), sums[k].projections[1].matrix)
        for k in range(lo, hi + 1)
    })
    return Cone(complex_, inclusion, projection)


def brutal_truncate(c: BoundedComplex, lower: Optional[int] = None, upper: Optional[int] = None) -> BoundedComplex:
    """次数 [lower, upper] の外の成分を零に置き換える"""
    lower = c.lo if lower is None else max(lower, c.lo)
    upper = c.hi if upper is None else min(upper, c.hi)
    if lower > upper:
        return BoundedComplex.zero(c.algebra)
    components = {k: m for k, m in c.components.items() if lower <= k <= upper}
    differentials = {k: d for k, d in c.differentials.items() if lower <= k and k + 1 <= upper}
    return BoundedComplex(c.algebra, lower, upper, components, differentials)


@dataclass
class HomotopyHomResult:
    """ホモトピー圏の Hom：連鎖写像を零ホモトピー写像で割った空間"""
    dim: int
    chain_map_dim: int
    null_homotopic_rank: int
    representatives: Optional[List[Dict[int, np.ndarray]]] = None


def homotopy_hom(c: BoundedComplex, d: BoundedComplex, representatives: bool = False) -> HomotopyHomResult:
    """Hom_K(C, D) を一つの連立方程式と零ホモトピーの像の階数から求める"""
    f = c.algebra.field
    if c.is_zero() or d.is_zero():
        return HomotopyHomResult(0, 0, 0, [] if representatives else None)
    lo = min(c.lo, d.lo) - 1
    hi = max(c.hi, d.hi) + 1
    degrees = range(lo, hi + 1)
    bases = {k: hom_matrices(c.term(k), d.term(k)) for k in degrees}
    sizes = {k: c.term(k).dim * d.term(k).dim for k in degrees}
    col_offsets, total = {}, 0
    for k in degrees:
        col_offsets[k] = total
        total += len(bases[k])
    amb_offsets, ambient = {}, 0
    for k in degrees:
        amb_offsets[k] = ambient
        ambient += sizes[k]

    # d_D φ^k − φ^{k+1} d_C = 0
    rows = []
    for k in degrees:
        if k + 1 not in bases:
            continue
        height = d.term(k + 1).dim * c.term(k).dim
        if height == 0:
            continue
        block = np.zeros((height, total), dtype=np.int64)
        dd = d.differential(k).matrix
        dc = c.differential(k).matrix
        for a, h in enumerate(bases[k]):
            block[:, col_offsets[k] + a] = f.mul(dd, h).reshape(-1)
        for a, h in enumerate(bases[k + 1]):
            block[:, col_offsets[k + 1] + a] -= f.mul(h, dc).reshape(-1)
        rows.append(block % f.p)
    system = np.vstack(rows) if rows else np.zeros((0, total), dtype=np.int64)
    cycles = kernel_basis(system, f)

    # 係数座標から行列成分の座標へ
    embed = np.zeros((ambient, total), dtype=np.int64)
    for k in degrees:
        for a, h in enumerate(bases[k]):
            embed[amb_offsets[k]:amb_offsets[k] + sizes[k], col_offsets[k] + a] = h.reshape(-1)
    chain_maps = f.mul(embed, cycles)

    # d_D s + s d_C
    homotopies = []
    for k in degrees:
        for s in hom_matrices(c.term(k), d.term(k - 1)):
            vec = np.zeros(ambient, dtype=np.int64)
            if k - 1 in amb_offsets and sizes[k - 1]:
                part = f.mul(s, c.differential(k - 1).matrix)
                vec[amb_offsets[k - 1]:amb_offsets[k - 1] + sizes[k - 1]] = part.reshape(-1)
            if sizes[k]:
                part = f.mul(d.differential(k - 1).matrix, s)
                vec[amb_offsets[k]:amb_offsets[k] + sizes[k]] = part.reshape(-1)
            homotopies.append(vec % f.p)
    null = np.stack(homotopies, axis=1) if homotopies else np.zeros((ambient, 0), dtype=np.int64)
    null_rank = rank(null, f)
    dim = cycles.shape[1] - null_rank
    reps = None
    if representatives:
        reps = []
        for j in extending_columns(null, chain_maps, f):
            column = chain_maps[:, j]
            reps.append({
                k: column[amb_offsets[k]:amb_offsets[k] + sizes[k]].reshape(d.term(k).dim, c.term(k).dim)
                for k in degrees if sizes[k]
            })
    return HomotopyHomResult(dim, cycles.shape[1], null_rank, reps)


@dataclass
class QuotientHomResult:
    """Verdier 商の Hom 次元と安定化の証拠"""
    a: str
    b: str
    n: int
    dim: int
    truncation_lengths: Tuple[int, int]
    tried: Tuple[Tuple[int, int], ...] = ()

    def to_dict(self) -> Dict:
        return {
            "A": self.a,
            "B": self.b,
            "n": self.n,
            "dim": self.dim,
            "truncation_lengths": list(self.truncation_lengths),
        }


def truncated_resolution(b: FdModule, x: XSubcategory, length: int) -> BoundedComplex:
    """X_B^{≥-length}：B を次数 0 に置いた X分解の切り詰め"""
    res = x_resolution(b, x, length)
    return BoundedComplex.from_resolution(res, -length, 0)


def _quotient_dim_at(a: FdModule, b: FdModule, n: int, x: XSubcategory, length: int) -> int:
    source = suspend(stalk(a, 0), n)
    return homotopy_hom(source, truncated_resolution(b, x, length)).dim


def verdier_hom(a: FdModule, b: FdModule, n: int, x: XSubcategory) -> QuotientHomResult:
    """Hom_{K^b(A)/K^b(X)}(Σ^n A, B) を切り詰め長 l, l+1 で安定化させて求める"""
    start = max(n, 0) + 1
    tried = []
    dims = []
    for l in (start, start + 1):
        pair = (l, l + 1)
        values = (_quotient_dim_at(a, b, n, x, l), _quotient_dim_at(a, b, n, x, l + 1))
        tried.append(pair)
        dims.extend(values)
        logger.debug("Verdier商 Hom(Σ^%d %s, %s): 長さ %s で %s", n, a.name, b.name, pair, values)
        if values[0] == values[1]:
            return QuotientHomResult(a.name, b.name, n, values[0], pair, tuple(tried))
    lengths = [l for pair in tried for l in pair]
    raise StabilizationError(lengths, dims)


@dataclass
class StableComplexReport:
    """安定圏での複体 0 → M → k → M → k → 0 の確認結果"""
    pi_class_dim: int
    iota_class_dim: int
    pi_nonzero: bool
    iota_nonzero: bool
    pi_iota_honest_zero: bool
    iota_pi_factorization: Optional[Factorization]
    pi_iota_factorization: Optional[Factorization]

    @property
    def passed(self) -> bool:
        return (
            self.pi_nonzero and self.iota_nonzero
            and self.iota_pi_factorization is not None
            and self.pi_iota_factorization is not None
        )

    def to_dict(self) -> Dict:
        def _fact(fz: Optional[Factorization]):
            if fz is None:
                return None
            return {
                "through": fz.first.target.name,
                "first": fz.first.matrix.tolist(),
                "second": fz.second.matrix.tolist(),
            }
        return {
            "pi": {"stable_hom_dim": self.pi_class_dim, "nonzero": self.pi_nonzero},
            "iota": {"stable_hom_dim": self.iota_class_dim, "nonzero": self.iota_nonzero},
            "pi∘iota": {"honest_zero": self.pi_iota_honest_zero, "factorization": _fact(self.pi_iota_factorization)},
            "iota∘pi": {"factorization": _fact(self.iota_pi_factorization)},
            "passed": self.passed,
        }


def stable_complex_check(
    m: FdModule, k: FdModule, pi: np.ndarray, iota: np.ndarray, x: XSubcategory
) -> StableComplexReport:
    """π: M → k と ι: k → M の連続する合成が X を経由し、[π], [ι] が零でないか"""
    pi_hom = ModuleHom(m, k, np.asarray(pi))
    iota_hom = ModuleHom(k, m, np.asarray(iota))
    for name, h in (("π", pi_hom), ("ι", iota_hom)):
        bad = h.intertwining_violations()
        if bad:
            raise DimensionMismatchError(f"{name} が準同型ではありません（基底元 {bad}）")
    pi_iota = pi_hom.compose(iota_hom)
    iota_pi = iota_hom.compose(pi_hom)
    report = StableComplexReport(
        pi_class_dim=stable_hom(m, k, x).dim,
        iota_class_dim=stable_hom(k, m, x).dim,
        pi_nonzero=factor_through_x(pi_hom, x) is None,
        iota_nonzero=factor_through_x(iota_hom, x) is None,
        pi_iota_honest_zero=pi_iota.is_zero(),
        iota_pi_factorization=factor_through_x(iota_pi, x),
        pi_iota_factorization=factor_through_x(pi_iota, x),
    )
    logger.debug("安定圏の複体の確認: %s", report.passed)
    return report


@dataclass
class PhiVerdict:
    """有限集合上の消滅判定（証明ではなく証拠）"""
    no_obstruction: bool
    witness: Optional[Tuple[str, str, int, int]]
    n_max: int
    checked: int
    note: str = "与えられた有限個の対象と次数の範囲での証拠であり、同値性の証明ではありません"

    def to_dict(self) -> Dict:
        return {
            "no_obstruction": self.no_obstruction,
            "witness": list(self.witness) if self.witness else None,
            "n_max": self.n_max,
            "checked": self.checked,
            "note": self.note,
        }


def phi_vanishing_check(
    objects: Sequence[FdModule], x: XSubcategory, n_max: int, stability_check: bool = True
) -> PhiVerdict:
    """Ext_{X,n}(A, B) = 0（n = 1..n_max、全順序対）を調べ、最初の反例を返す"""
    if n_max < 1:
        raise ValueError(f"n_max は1以上である必要があります: {n_max}")
    checked = 0
    for n in range(1, n_max + 1):
        for a in objects:
            for b in objects:
                dim = ext_lower(a, b, n, x, stability_check=stability_check).dim
                checked += 1
                if dim:
                    return PhiVerdict(False, (a.name, b.name, n, dim), n_max, checked)
    return PhiVerdict(True, None, n_max, checked)


def phi_tor_check(
    objects: Sequence[FdModule], x: XSubcategory, n_max: int, stability_check: bool = True
) -> PhiVerdict:
    """標準写像の単射性と Tor_n = 0（n = 1..n_max-1）による同じ判定"""
    if n_max < 1:
        raise ValueError(f"n_max は1以上である必要があります: {n_max}")
    checked = 0
    for a in objects:
        for b in objects:
            kernel_dim = canonical_map(a, b, x).kernel_dim
            checked += 1
            if kernel_dim:
                return PhiVerdict(False, (a.name, b.name, 1, kernel_dim), n_max, checked)
    for n in range(1, n_max):
        for a in objects:
            for b in objects:
                dim = tor(
                    restriction_module(b, RIGHT, x), restriction_module(a, LEFT, x), n,
                    stability_check=stability_check, mode=x.mode
                )
                checked += 1
                if dim:
                    return PhiVerdict(False, (a.name, b.name, n + 1, dim), n_max, checked)
    return PhiVerdict(True, None, n_max, checked)
