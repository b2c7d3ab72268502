"""
Hom複体とそのコホモロジー
下側拡大群、上側拡大群、安定Hom、平衡性とシジジー公式の照合
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from .algmod import FdModule, ModuleHom, XSubcategory, hom_matrices
from .approx import (
    XCoresolution, XResolution, certify_resolution, cosyzygy,
    right_approximation, shared_zero, syzygy, x_coresolution, x_resolution,
)
from .errors import ComputationError, DegreeRangeError
from .exactla import (
    FieldSpec, combine, coordinates, extending_columns, flatten, kernel_basis, rank, solve,
)


logger = logging.getLogger(__name__)

Complexlike = Union[XResolution, XCoresolution, 'TruncatedView']


class Route(Enum):
    """計算経路"""
    RESOLUTION = "resolution"
    CORESOLUTION = "coresolution"
    SYZYGY_FORMULA = "syzygy-formula"
    COSYZYGY_FORMULA = "cosyzygy-formula"


@dataclass
class HomComplex:
    """次数ごとの Hom空間の基底と、係数行列で表した微分

    differentials[k] は spaces[k] の座標から spaces[k+1] の座標への行列。
    """
    field: FieldSpec
    degrees: range
    spaces: Dict[int, Tuple[np.ndarray, ...]]
    differentials: Dict[int, np.ndarray]

    def dim(self, k: int) -> int:
        return len(self.spaces.get(k, ()))

    def _diff(self, k: int) -> np.ndarray:
        if k in self.differentials:
            return self.differentials[k]
        return np.zeros((self.dim(k + 1), self.dim(k)), dtype=np.int64)

    def cohomology_dim(self, k: int) -> int:
        return self.dim(k) - rank(self._diff(k), self.field) - rank(self._diff(k - 1), self.field)

    def d_squared_violations(self) -> List[int]:
        return [
            k for k in self.degrees
            if k + 1 in self.differentials and k in self.differentials
            and np.any(self.field.mul(self._diff(k + 1), self._diff(k)))
        ]

    def representatives(self, k: int) -> List[np.ndarray]:
        """コサイクルをコバウンダリで割った代表元（基底の一次結合として）"""
        if self.dim(k) == 0:
            return []
        cocycles = kernel_basis(self._diff(k), self.field)
        boundaries = self._diff(k - 1)
        chosen = extending_columns(boundaries, cocycles, self.field)
        basis = self.spaces[k]
        return [combine(basis, cocycles[:, j], self.field) for j in chosen]


class TruncatedView:
    """分解の次数 [lower, upper] の外を零にした見え方（微分は変えない）"""

    def __init__(self, inner: Complexlike, lower: int, upper: int):
        self.inner = inner
        self.lower = lower
        self.upper = upper
        self._zero = shared_zero(inner.term(0).algebra)

    def term(self, degree: int) -> FdModule:
        if self.lower <= degree <= self.upper:
            return self.inner.term(degree)
        return self._zero

    def differential(self, degree: int) -> ModuleHom:
        if self.lower <= degree and degree + 1 <= self.upper:
            return self.inner.differential(degree)
        return ModuleHom.zero(self.term(degree), self.term(degree + 1))


def _build(field_: FieldSpec, lo: int, hi: int, space, image) -> HomComplex:
    spaces = {k: tuple(space(k)) for k in range(lo, hi + 1)}
    differentials = {}
    for k in range(lo, hi):
        images = [image(k, h) for h in spaces[k]]
        if images:
            differentials[k] = coordinates(spaces[k + 1], images, field_)
        else:
            differentials[k] = np.zeros((len(spaces[k + 1]), 0), dtype=np.int64)
    complex_ = HomComplex(field_, range(lo, hi + 1), spaces, differentials)
    bad = complex_.d_squared_violations()
    if bad:
        raise ComputationError(f"Hom複体で d² ≠ 0 となる次数があります: {bad}")
    return complex_


def covariant_hom_complex(a: FdModule, c: Complexlike, lo: int, hi: int) -> HomComplex:
    """Hom(A, C)：次数 m の空間は Hom(A, C^m)、微分は後合成"""
    f = a.field
    return _build(
        f, lo, hi,
        lambda k: hom_matrices(a, c.term(k)),
        lambda k, h: f.mul(c.differential(k).matrix, h)
    )


def contravariant_hom_complex(c: Complexlike, b: FdModule, lo: int, hi: int) -> HomComplex:
    """Hom(C, B)：次数 m の空間は Hom(C^{-m}, B)、微分は d^{-m-1} との前合成"""
    f = b.field
    return _build(
        f, lo, hi,
        lambda k: hom_matrices(c.term(-k), b),
        lambda k, h: f.mul(h, c.differential(-k - 1).matrix)
    )


@dataclass
class ExtResult:
    """拡大群の計算結果"""
    a: str
    b: str
    n: int
    dim: int
    route: Route
    lengths: Tuple[int, ...] = ()
    certified: Optional[bool] = None
    representatives: Optional[List[np.ndarray]] = None

    def to_dict(self) -> Dict:
        data = {
            "A": self.a,
            "B": self.b,
            "n": self.n,
            "dim": self.dim,
            "route": self.route.value,
            "lengths": list(self.lengths),
        }
        if self.certified is not None:
            data["certified"] = self.certified
        if self.representatives is not None:
            data["representatives"] = [r.tolist() for r in self.representatives]
        return data


def _stable_lengths(n: int, stability_check: bool) -> Tuple[int, ...]:
    base = max(n, 0) + 2
    return (base, base + 2) if stability_check else (base,)


def _lower_dim(a: FdModule, b: FdModule, n: int, x: XSubcategory, length: int, route: Route):
    if route is Route.RESOLUTION:
        res = x_resolution(b, x, length)
        hc = covariant_hom_complex(a, res, -n - 1, -n + 1)
    else:
        cores = x_coresolution(a, x, length)
        hc = contravariant_hom_complex(cores, b, -n - 1, -n + 1)
    return hc.cohomology_dim(-n), hc


def _ext_lower_route(
    a: FdModule, b: FdModule, n: int, x: XSubcategory, route: Route,
    stability_check: bool, representatives: bool
) -> ExtResult:
    if n < 0:
        return ExtResult(a.name, b.name, n, 0, route, representatives=[] if representatives else None)
    lengths = _stable_lengths(n, stability_check)
    dims = []
    complex_ = None
    for length in lengths:
        dim, hc = _lower_dim(a, b, n, x, length, route)
        dims.append(dim)
        if complex_ is None:
            complex_ = hc
    if len(set(dims)) != 1:
        raise ComputationError(
            f"Ext_X,{n}({a.name}, {b.name}) が分解の長さ {lengths} で安定しません: {dims}"
        )
    logger.debug("Ext_X,%d(%s, %s) = %d [%s]", n, a.name, b.name, dims[0], route.value)
    reps = complex_.representatives(-n) if representatives else None
    return ExtResult(a.name, b.name, n, dims[0], route, lengths, representatives=reps)


def ext_lower(
    a: FdModule, b: FdModule, n: int, x: XSubcategory,
    stability_check: bool = True, representatives: bool = False
) -> ExtResult:
    """Ext_{X,n}(A, B) = H^{-n} Hom(A, X_B)"""
    return _ext_lower_route(a, b, n, x, Route.RESOLUTION, stability_check, representatives)


def ext_lower_via_coresolution(
    a: FdModule, b: FdModule, n: int, x: XSubcategory,
    stability_check: bool = True, representatives: bool = False
) -> ExtResult:
    """Ext_{X,n}(A, B) = H^{-n} Hom(_AX, B)"""
    return _ext_lower_route(a, b, n, x, Route.CORESOLUTION, stability_check, representatives)


@dataclass
class Comparison:
    """二つの経路の次元の比較"""
    left: int
    right: int

    @property
    def equal(self) -> bool:
        return self.left == self.right

    def as_tuple(self) -> Tuple[int, int, bool]:
        return self.left, self.right, self.equal


def balance_check(a: FdModule, b: FdModule, n: int, x: XSubcategory, stability_check: bool = True) -> Comparison:
    """分解側と余分解側の下側拡大群の次元を比べる"""
    left = ext_lower(a, b, n, x, stability_check=stability_check).dim
    right = ext_lower_via_coresolution(a, b, n, x, stability_check=stability_check).dim
    if left != right:
        logger.error("平衡性の不一致: Ext_X,%d(%s, %s) = %d / %d", n, a.name, b.name, left, right)
    return Comparison(left, right)


def _check_upper_degree(n: int):
    if n < 0:
        raise DegreeRangeError(f"上側拡大群の次数は0以上である必要があります: {n}")


def ext_upper_contravariant(
    b: FdModule, a: FdModule, n: int, x: XSubcategory, representatives: bool = False
) -> ExtResult:
    """Ext^n_{X,-}(B, A) = H^{n+1} Hom(X_B^{≤-1}, A)"""
    _check_upper_degree(n)
    length = n + 2
    res = x_resolution(b, x, length)
    certificate = certify_resolution(res, raise_on_failure=False)
    view = TruncatedView(res, -length, -1)
    hc = contravariant_hom_complex(view, a, n, n + 2)
    dim = hc.cohomology_dim(n + 1)
    reps = hc.representatives(n + 1) if representatives else None
    return ExtResult(b.name, a.name, n, dim, Route.RESOLUTION, (length,), certificate.certified, reps)


def ext_upper_covariant(
    b: FdModule, a: FdModule, n: int, x: XSubcategory, representatives: bool = False
) -> ExtResult:
    """Ext^n_{-,X}(B, A) = H^{n+1} Hom(B, _AX^{≥1})

    余分解が検証できない場合は certified=False を付けて返す。
    """
    _check_upper_degree(n)
    length = n + 2
    cores = x_coresolution(a, x, length)
    certificate = certify_resolution(cores, raise_on_failure=False)
    view = TruncatedView(cores, 1, length)
    hc = covariant_hom_complex(b, view, n, n + 2)
    dim = hc.cohomology_dim(n + 1)
    if not certificate.certified:
        logger.warning("余分解が検証できません: %s (X=%s)", a.name, x.label)
    reps = hc.representatives(n + 1) if representatives else None
    return ExtResult(b.name, a.name, n, dim, Route.CORESOLUTION, (length,), certificate.certified, reps)


@dataclass
class StableHomResult:
    """安定Hom A/[X](A, B)"""
    a: str
    b: str
    dim: int
    hom_dim: int
    representatives: Tuple[ModuleHom, ...] = ()


def _through_x_images(a: FdModule, b: FdModule, x: XSubcategory):
    approx = right_approximation(b, x, mode=x.mode)
    f = a.field
    gs = hom_matrices(a, approx.x_object)
    images = [f.mul(approx.map.matrix, g) for g in gs]
    return approx, gs, images


def stable_hom(a: FdModule, b: FdModule, x: XSubcategory) -> StableHomResult:
    """dim Hom(A, B) から右近似を経由する写像の像の階数を引く"""
    f = a.field
    basis = hom_matrices(a, b)
    _, _, images = _through_x_images(a, b, x)
    ambient = a.dim * b.dim
    through = flatten(images, ambient)
    dim = len(basis) - rank(through, f)
    chosen = extending_columns(through, flatten(basis, ambient), f)
    reps = tuple(ModuleHom(a, b, basis[j]) for j in chosen)
    logger.debug("安定Hom(%s, %s) = %d", a.name, b.name, dim)
    return StableHomResult(a.name, b.name, dim, len(basis), reps)


@dataclass
class Factorization:
    """h = second ∘ first（X の対象を経由）"""
    first: ModuleHom
    second: ModuleHom


def factor_through_x(h: ModuleHom, x: XSubcategory) -> Optional[Factorization]:
    """h が X を経由するなら具体的な分解を返す"""
    a, b = h.source, h.target
    f = a.field
    approx, gs, images = _through_x_images(a, b, x)
    if not gs:
        return None if not h.is_zero() else Factorization(
            ModuleHom.zero(a, approx.x_object), ModuleHom.zero(approx.x_object, b)
        )
    coeffs = solve(flatten(images, a.dim * b.dim), h.matrix.reshape(-1, 1), f)
    if coeffs is None:
        return None
    g = combine(list(gs), coeffs[:, 0], f)
    return Factorization(ModuleHom(a, approx.x_object, g), approx.map)


def syzygy_formula_check(
    a: FdModule, b: FdModule, n: int, x: XSubcategory, stability_check: bool = True
) -> Comparison:
    """Ext_{X,n}(A, B) と安定Hom(A, Ω^n B) の比較"""
    ext_dim = ext_lower(a, b, n, x, stability_check=stability_check).dim
    stable_dim = stable_hom(a, syzygy(b, x, n), x).dim
    return Comparison(ext_dim, stable_dim)


def frobenius_formula_check(
    a: FdModule, b: FdModule, n: int, x: XSubcategory, stability_check: bool = True
) -> Comparison:
    """Ext_{X,n}(A, B) と安定Hom(Ω^{-n} A, B) の比較"""
    ext_dim = ext_lower(a, b, n, x, stability_check=stability_check).dim
    stable_dim = stable_hom(cosyzygy(a, x, n), b, x).dim
    return Comparison(ext_dim, stable_dim)
