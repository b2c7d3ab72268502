"""
X近似と X分解・X余分解・シジジー
右近似と核、左近似と余核を交互に取って分解を構成する
"""

import logging
import threading
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .algmod import (
    AlgebraPresentation, FdModule, ModuleHom, XSubcategory, cokernel, direct_sum, hom_matrices, kernel, zero_module,
)
from .errors import ComputationError, DegreeRangeError, ResolutionCertificationError
from .exactla import FieldSpec, flatten, rank


logger = logging.getLogger(__name__)


class ApproximationKind(Enum):
    """近似の向き"""
    RIGHT = "right"  # X → B
    LEFT = "left"    # A → X


@dataclass(frozen=True, eq=False)
class Approximation:
    """右/左 X近似

    components[s] = (基本対象の番号, 成分写像の行列)
    """
    kind: ApproximationKind
    object: FdModule
    x_object: FdModule
    multiplicities: Tuple[int, ...]
    map: ModuleHom
    components: Tuple[Tuple[int, np.ndarray], ...]

    def is_zero(self) -> bool:
        return self.x_object.dim == 0


def _image_rank(mats: Sequence[np.ndarray], ambient: int, field: FieldSpec) -> int:
    return rank(flatten(mats, ambient), field) if mats else 0


def irredundant_subset(
    contributions: Sequence[Sequence[np.ndarray]],
    targets: Sequence[int],
    field: FieldSpec
) -> List[int]:
    """各検査で必要な次元を張り切る候補の非冗長な部分族を選ぶ

    contributions[s][j] は候補 s が検査 j に寄与する列ベクトル群。
    貪欲に追加したあと、外しても張り切れる候補を順に取り除く。
    """
    def spans(selection: Sequence[int]) -> bool:
        for j, need in enumerate(targets):
            cols = [contributions[s][j] for s in selection if contributions[s][j].shape[1]]
            have = rank(np.hstack(cols), field) if cols else 0
            if have < need:
                return False
        return True

    selected: List[int] = []
    current = [0] * len(targets)
    for s in range(len(contributions)):
        if all(c >= t for c, t in zip(current, targets)):
            break
        gains = False
        trial_ranks = []
        for j in range(len(targets)):
            cols = [contributions[u][j] for u in selected + [s] if contributions[u][j].shape[1]]
            r = rank(np.hstack(cols), field) if cols else 0
            trial_ranks.append(r)
            gains = gains or r > current[j]
        if gains:
            selected.append(s)
            current = trial_ranks
    for s in list(selected):
        trial = [u for u in selected if u != s]
        if spans(trial):
            selected = trial
    return selected


def _check_surjective(approx: Approximation, x: XSubcategory):
    """近似の定義条件（Hom の誘導写像の全射性）を階数で確認"""
    f = approx.object.field
    for j, xj in enumerate(x.objects):
        if approx.kind is ApproximationKind.RIGHT:
            need = len(hom_matrices(xj, approx.object))
            images = [
                f.mul(h, y)
                for i, h in approx.components
                for y in hom_matrices(xj, x.objects[i])
            ]
            ambient = approx.object.dim * xj.dim
        else:
            need = len(hom_matrices(approx.object, xj))
            images = [
                f.mul(y, g)
                for i, g in approx.components
                for y in hom_matrices(x.objects[i], xj)
            ]
            ambient = approx.object.dim * xj.dim
        got = _image_rank(images, ambient, f)
        if got != need:
            raise ComputationError(
                f"{approx.kind.value}近似が {x.names[j]} について全射ではありません: {got} < {need}"
            )


def _assemble(
    kind: ApproximationKind,
    obj: FdModule,
    x: XSubcategory,
    chosen: Sequence[Tuple[int, np.ndarray]]
) -> Approximation:
    multiplicities = [0] * len(x)
    for i, _ in chosen:
        multiplicities[i] += 1
    if not chosen:
        zero = zero_module(obj.algebra)
        if kind is ApproximationKind.RIGHT:
            hom = ModuleHom.zero(zero, obj)
        else:
            hom = ModuleHom.zero(obj, zero)
        return Approximation(kind, obj, zero, tuple(multiplicities), hom, ())
    ds = direct_sum([x.objects[i] for i, _ in chosen])
    if kind is ApproximationKind.RIGHT:
        hom = ModuleHom(ds.module, obj, np.hstack([h for _, h in chosen]))
    else:
        hom = ModuleHom(obj, ds.module, np.vstack([g for _, g in chosen]))
    return Approximation(kind, obj, ds.module, tuple(multiplicities), hom, tuple(chosen))


def right_approximation(b: FdModule, x: XSubcategory, mode: str = 'universal') -> Approximation:
    """右 X近似 ⊕X_i → B

    universal は Hom(X_i, B) の基底をすべて使い、pruned はその非冗長な部分族を使う。
    """
    f = b.field
    candidates = [(i, h) for i, xi in enumerate(x.objects) for h in hom_matrices(xi, b)]
    if mode == 'pruned' and candidates:
        targets = [len(hom_matrices(xj, b)) for xj in x.objects]
        contributions = [
            [
                flatten([f.mul(h, y) for y in hom_matrices(xj, x.objects[i])], b.dim * xj.dim)
                for xj in x.objects
            ]
            for i, h in candidates
        ]
        keep = irredundant_subset(contributions, targets, f)
        candidates = [candidates[s] for s in keep]
    approx = _assemble(ApproximationKind.RIGHT, b, x, candidates)
    _check_surjective(approx, x)
    logger.debug("右近似 %s: 重複度 %s (%s)", b.name, approx.multiplicities, mode)
    return approx


def left_approximation(a: FdModule, x: XSubcategory, mode: str = 'universal') -> Approximation:
    """左 X近似 A → ⊕X_i"""
    f = a.field
    candidates = [(i, g) for i, xi in enumerate(x.objects) for g in hom_matrices(a, xi)]
    if mode == 'pruned' and candidates:
        targets = [len(hom_matrices(a, xj)) for xj in x.objects]
        contributions = [
            [
                flatten([f.mul(y, g) for y in hom_matrices(x.objects[i], xj)], a.dim * xj.dim)
                for xj in x.objects
            ]
            for i, g in candidates
        ]
        keep = irredundant_subset(contributions, targets, f)
        candidates = [candidates[s] for s in keep]
    approx = _assemble(ApproximationKind.LEFT, a, x, candidates)
    _check_surjective(approx, x)
    logger.debug("左近似 %s: 重複度 %s (%s)", a.name, approx.multiplicities, mode)
    return approx


@dataclass(frozen=True, eq=False)
class XResolution:
    """X分解 ⋯ → X^{-2} → X^{-1} → B → 0

    次数 0 に B、次数 -i に terms[i-1] を置いた複体として term/differential で参照する。
    """
    target: FdModule
    x: XSubcategory
    terms: Tuple[FdModule, ...]
    differentials: Tuple[ModuleHom, ...]
    augmentation: ModuleHom
    syzygies: Tuple[FdModule, ...] = ()

    @property
    def length(self) -> int:
        return len(self.terms)

    def term(self, degree: int) -> FdModule:
        if degree == 0:
            return self.target
        if -self.length <= degree <= -1:
            return self.terms[-degree - 1]
        return shared_zero(self.target.algebra)

    def differential(self, degree: int) -> ModuleHom:
        """term(degree) → term(degree + 1)"""
        if degree == -1 and self.length >= 1:
            return self.augmentation
        if -self.length <= degree <= -2:
            return self.differentials[-degree - 2]
        return ModuleHom.zero(self.term(degree), self.term(degree + 1))

    def degrees(self) -> range:
        return range(-self.length, 1)


@dataclass(frozen=True, eq=False)
class XCoresolution:
    """X余分解 0 → A → X^1 → X^2 → ⋯（次数 0 に A）"""
    target: FdModule
    x: XSubcategory
    terms: Tuple[FdModule, ...]
    differentials: Tuple[ModuleHom, ...]
    coaugmentation: ModuleHom
    cosyzygies: Tuple[FdModule, ...] = ()

    @property
    def length(self) -> int:
        return len(self.terms)

    def term(self, degree: int) -> FdModule:
        if degree == 0:
            return self.target
        if 1 <= degree <= self.length:
            return self.terms[degree - 1]
        return shared_zero(self.target.algebra)

    def differential(self, degree: int) -> ModuleHom:
        """term(degree) → term(degree + 1)"""
        if degree == 0 and self.length >= 1:
            return self.coaugmentation
        if 1 <= degree <= self.length - 1:
            return self.differentials[degree - 1]
        return ModuleHom.zero(self.term(degree), self.term(degree + 1))

    def degrees(self) -> range:
        return range(0, self.length + 1)


_ZEROS: Dict[int, FdModule] = {}
_ZEROS_LOCK = threading.Lock()


def shared_zero(algebra: AlgebraPresentation) -> FdModule:
    """代数ごとに共有する零加群"""
    key = id(algebra)
    with _ZEROS_LOCK:
        zero = _ZEROS.get(key)
        if zero is None or zero.algebra is not algebra:
            zero = zero_module(algebra)
            _ZEROS[key] = zero
        return zero


class _StepBuilder:
    """分解の各段を必要な長さまで延長して保持する"""

    def __init__(self, start: FdModule, step: Callable[[FdModule], Tuple[Approximation, FdModule, ModuleHom]]):
        self.start = start
        self._step = step
        self.steps: List[Tuple[Approximation, FdModule, ModuleHom]] = []
        self._lock = threading.Lock()

    def extend(self, length: int) -> List[Tuple[Approximation, FdModule, ModuleHom]]:
        with self._lock:
            while len(self.steps) < length:
                current = self.steps[-1][1] if self.steps else self.start
                self.steps.append(self._step(current))
            return self.steps[:length]


def _check_length(length: int):
    if length < 1:
        raise DegreeRangeError(f"分解の長さは1以上である必要があります: {length}")


def x_resolution(b: FdModule, x: XSubcategory, length: int) -> XResolution:
    """右近似と核の反復による X分解"""
    _check_length(length)

    def step(current: FdModule):
        approx = right_approximation(current, x, mode=x.mode)
        syz, inclusion = kernel(approx.map)
        return approx, syz, inclusion

    builder = x.memo(('resolution', b), lambda: _StepBuilder(b, step))
    steps = builder.extend(length)
    terms = tuple(approx.x_object for approx, _, _ in steps)
    augmentation = steps[0][0].map
    differentials = tuple(
        steps[i - 1][2].compose(steps[i][0].map) for i in range(1, len(steps))
    )
    logger.debug("X分解 %s: 項の次元 %s", b.name, [t.dim for t in terms])
    return XResolution(
        target=b,
        x=x,
        terms=terms,
        differentials=differentials,
        augmentation=augmentation,
        syzygies=tuple(syz for _, syz, _ in steps)
    )


def x_coresolution(a: FdModule, x: XSubcategory, length: int) -> XCoresolution:
    """左近似と余核の反復による X余分解"""
    _check_length(length)

    def step(current: FdModule):
        approx = left_approximation(current, x, mode=x.mode)
        cosyz, projection = cokernel(approx.map)
        return approx, cosyz, projection

    builder = x.memo(('coresolution', a), lambda: _StepBuilder(a, step))
    steps = builder.extend(length)
    terms = tuple(approx.x_object for approx, _, _ in steps)
    coaugmentation = steps[0][0].map
    differentials = tuple(
        steps[i][0].map.compose(steps[i - 1][2]) for i in range(1, len(steps))
    )
    logger.debug("X余分解 %s: 項の次元 %s", a.name, [t.dim for t in terms])
    return XCoresolution(
        target=a,
        x=x,
        terms=terms,
        differentials=differentials,
        coaugmentation=coaugmentation,
        cosyzygies=tuple(c for _, c, _ in steps)
    )


def syzygy(b: FdModule, x: XSubcategory, n: int, mode: Optional[str] = None) -> FdModule:
    """n次シジジー Ω^n(B)。Ω^0(B) = B"""
    if n < 0:
        raise DegreeRangeError(f"シジジーの次数は0以上である必要があります: {n}")
    if n == 0:
        return b
    sub = x if mode is None or mode == x.mode else x.with_mode(mode)
    return x_resolution(b, sub, n).syzygies[n - 1]


def cosyzygy(a: FdModule, x: XSubcategory, n: int, mode: Optional[str] = None) -> FdModule:
    """n次余シジジー Ω^{-n}(A)。n = 0 なら A"""
    if n < 0:
        raise DegreeRangeError(f"余シジジーの次数は0以上である必要があります: {n}")
    if n == 0:
        return a
    sub = x if mode is None or mode == x.mode else x.with_mode(mode)
    return x_coresolution(a, sub, n).cosyzygies[n - 1]


@dataclass
class CertificationReport:
    """分解の Hom複体のコホモロジー次元（X対象名と次数ごと）"""
    kind: str
    target: str
    length: int
    dims: Dict[Tuple[str, int], int]

    @property
    def certified(self) -> bool:
        return all(d == 0 for d in self.dims.values())

    def first_failure(self) -> Optional[Tuple[str, int, int]]:
        for (name, degree), dim in self.dims.items():
            if dim:
                return name, degree, dim
        return None

    def to_dict(self) -> Dict:
        return {
            "kind": self.kind,
            "target": self.target,
            "length": self.length,
            "certified": self.certified,
            "dims": {f"{name}@{degree}": dim for (name, degree), dim in self.dims.items()},
        }


def _covariant_rank(xi: FdModule, d: ModuleHom) -> int:
    """Hom(X_i, d) の階数"""
    f = xi.field
    return _image_rank([f.mul(d.matrix, h) for h in hom_matrices(xi, d.source)], d.target.dim * xi.dim, f)


def _contravariant_rank(xi: FdModule, d: ModuleHom) -> int:
    """Hom(d, X_i) の階数"""
    f = xi.field
    return _image_rank([f.mul(h, d.matrix) for h in hom_matrices(d.target, xi)], xi.dim * d.source.dim, f)


def certify_resolution(
    res: Union[XResolution, XCoresolution],
    raise_on_failure: bool = True
) -> CertificationReport:
    """全基本 X対象について Hom複体が計算範囲で非輪状か確認"""
    dims: Dict[Tuple[str, int], int] = {}
    if isinstance(res, XResolution):
        kind = "resolution"
        degrees = range(-res.length + 1, 1)
        for name, xi in zip(res.x.names, res.x.objects):
            for k in degrees:
                total = len(hom_matrices(xi, res.term(k)))
                out_rank = _covariant_rank(xi, res.differential(k))
                in_rank = _covariant_rank(xi, res.differential(k - 1))
                dims[(name, k)] = total - out_rank - in_rank
    else:
        kind = "coresolution"
        degrees = range(0, res.length)
        for name, xi in zip(res.x.names, res.x.objects):
            for k in degrees:
                total = len(hom_matrices(res.term(k), xi))
                out_rank = _contravariant_rank(xi, res.differential(k - 1))
                in_rank = _contravariant_rank(xi, res.differential(k))
                dims[(name, k)] = total - out_rank - in_rank
    report = CertificationReport(kind, res.target.name, res.length, dims)
    failure = report.first_failure()
    if failure is not None:
        logger.error("分解の検証失敗: %s %s", kind, failure)
        if raise_on_failure:
            name, degree, dim = failure
            raise ResolutionCertificationError(degree, name, dim)
    return report
