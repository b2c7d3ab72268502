"""
有限圏 X 上の加群
制限加群、X 上のテンソル積、標準写像、表現可能加群による射影分解と Tor
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .algmod import FdModule, XSubcategory, hom_matrices
from .approx import irredundant_subset
from .errors import ComputationError, DegreeRangeError, DimensionMismatchError
from .exactla import (
    FieldSpec, coordinates, extending_columns, kernel_basis, rank, solve,
)
from .relext import stable_hom


logger = logging.getLogger(__name__)

RIGHT = 'right'
LEFT = 'left'


@dataclass(frozen=True, eq=False)
class XCategory:
    """基本 X対象上の有限線形圏

    hom_dims[(i, j)] は X_i → X_j の基底の個数。
    comp[(i, j, k)][c, b, a] は y_b ∘ x_a（x_a: i→j, y_b: j→k）の c 番目の係数。
    """
    field: FieldSpec
    names: Tuple[str, ...]
    hom_dims: Dict[Tuple[int, int], int]
    comp: Dict[Tuple[int, int, int], np.ndarray]
    identity: Tuple[np.ndarray, ...]

    @property
    def size(self) -> int:
        return len(self.names)

    def morphisms(self):
        """基底射 (i, j, a) を決まった順序で列挙"""
        for i in range(self.size):
            for j in range(self.size):
                for a in range(self.hom_dims[(i, j)]):
                    yield i, j, a

    @classmethod
    def from_subcategory(cls, x: XSubcategory) -> 'XCategory':
        f = x.algebra.field
        n = len(x)
        homs = {(i, j): hom_matrices(x.objects[i], x.objects[j]) for i in range(n) for j in range(n)}
        comp = {}
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    target = homs[(i, k)]
                    table = np.zeros((len(target), len(homs[(j, k)]), len(homs[(i, j)])), dtype=np.int64)
                    for b, y in enumerate(homs[(j, k)]):
                        products = [f.mul(y, xa) for xa in homs[(i, j)]]
                        if products:
                            table[:, b, :] = coordinates(target, products, f)
                    comp[(i, j, k)] = table
        identity = tuple(
            coordinates(homs[(i, i)], [np.eye(x.objects[i].dim, dtype=np.int64)], f)[:, 0]
            for i in range(n)
        )
        return cls(
            field=f,
            names=x.names,
            hom_dims={key: len(v) for key, v in homs.items()},
            comp=comp,
            identity=identity
        )

    def opposite(self) -> 'XCategory':
        """反対圏（射の向きと合成の順序を入れ替える）"""
        n = self.size
        return XCategory(
            field=self.field,
            names=self.names,
            hom_dims={(i, j): self.hom_dims[(j, i)] for i in range(n) for j in range(n)},
            comp={
                (i, j, k): np.transpose(self.comp[(k, j, i)], (0, 2, 1)).copy()
                for i in range(n) for j in range(n) for k in range(n)
            },
            identity=self.identity
        )


def category_of(x: XSubcategory) -> XCategory:
    return x.memo(('category',), lambda: XCategory.from_subcategory(x))


@dataclass(frozen=True, eq=False)
class CatModule:
    """X加群（右は反変、左は共変）

    action[(i, j, a)] は基底射 x_a: X_i → X_j の作用行列。
    右加群では M(X_j) → M(X_i)、左加群では N(X_i) → N(X_j)。
    """
    category: XCategory
    side: str
    dims: Tuple[int, ...]
    action: Dict[Tuple[int, int, int], np.ndarray]
    name: str = ''

    def action_of(self, i: int, j: int, coeffs: np.ndarray) -> np.ndarray:
        """射 Σ c_a x_a の作用行列"""
        if self.side == RIGHT:
            shape = (self.dims[i], self.dims[j])
        else:
            shape = (self.dims[j], self.dims[i])
        total = np.zeros(shape, dtype=np.int64)
        for a, c in enumerate(coeffs):
            if c:
                total = total + int(c) * self.action[(i, j, a)]
        return total % self.category.field.p

    def functoriality_violations(self) -> List[Tuple]:
        """合成と恒等射が保たれない箇所"""
        cat = self.category
        f = cat.field
        bad: List[Tuple] = []
        n = cat.size
        for i in range(n):
            if np.any(self.action_of(i, i, cat.identity[i]) != np.eye(self.dims[i], dtype=np.int64)):
                bad.append(('identity', i))
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    table = cat.comp[(i, j, k)]
                    for b in range(cat.hom_dims[(j, k)]):
                        for a in range(cat.hom_dims[(i, j)]):
                            composite = self.action_of(i, k, table[:, b, a])
                            if self.side == RIGHT:
                                expected = f.mul(self.action[(i, j, a)], self.action[(j, k, b)])
                            else:
                                expected = f.mul(self.action[(j, k, b)], self.action[(i, j, a)])
                            if np.any(composite != expected):
                                bad.append((i, j, k, a, b))
        return bad

    def as_opposite(self) -> 'CatModule':
        """右 X加群を左 X^op加群として（またはその逆）見る"""
        return CatModule(
            category=self.category.opposite(),
            side=LEFT if self.side == RIGHT else RIGHT,
            dims=self.dims,
            action={(j, i, a): m for (i, j, a), m in self.action.items()},
            name=self.name
        )

    def is_zero(self) -> bool:
        return sum(self.dims) == 0


def restriction_module(obj: FdModule, side: str, x: XSubcategory) -> CatModule:
    """右なら A(-, B)、左なら A(A, -) を X に制限した加群"""
    cat = category_of(x)
    f = obj.field
    n = len(x)
    if side == RIGHT:
        values = [hom_matrices(x.objects[i], obj) for i in range(n)]
    elif side == LEFT:
        values = [hom_matrices(obj, x.objects[i]) for i in range(n)]
    else:
        raise ValueError(f"加群の向きは right / left のいずれかです: {side}")
    action = {}
    for i, j, a in cat.morphisms():
        xa = hom_matrices(x.objects[i], x.objects[j])[a]
        if side == RIGHT:
            # g ↦ g ∘ x
            images = [f.mul(g, xa) for g in values[j]]
            shape = (len(values[i]), len(values[j]))
            source, target = values[j], values[i]
        else:
            # g ↦ x ∘ g
            images = [f.mul(xa, g) for g in values[i]]
            shape = (len(values[j]), len(values[i]))
            source, target = values[i], values[j]
        if images and target:
            action[(i, j, a)] = coordinates(target, images, f)
        else:
            action[(i, j, a)] = np.zeros(shape, dtype=np.int64)
    label = f"A(-,{obj.name})" if side == RIGHT else f"A({obj.name},-)"
    return CatModule(cat, side, tuple(len(v) for v in values), action, label)


@dataclass
class TensorValue:
    """M ⊗_X N の値

    generators は商空間の基底を与える基本テンソル (対象番号, M側の基底番号, N側の基底番号)。
    """
    dim: int
    ambient_dim: int
    relations: np.ndarray
    generators: Tuple[Tuple[int, int, int], ...]
    offsets: Tuple[int, ...]


def _check_pair(m: CatModule, n: CatModule):
    if m.side != RIGHT or n.side != LEFT:
        raise ValueError("テンソル積は右 X加群と左 X加群の組で計算します")
    if m.category.size != n.category.size:
        raise DimensionMismatchError("異なる X 上の加群です")


def _offsets(m: CatModule, n: CatModule) -> Tuple[int, ...]:
    offsets = [0]
    for i in range(m.category.size):
        offsets.append(offsets[-1] + m.dims[i] * n.dims[i])
    return tuple(offsets)


def _relation_matrix(m: CatModule, n: CatModule, offsets: Sequence[int]) -> np.ndarray:
    """b∘x ⊗ a − b ⊗ x∘a を列に並べた行列"""
    cat = m.category
    p = cat.field.p
    ambient = offsets[-1]
    columns = []
    for i, j, a in cat.morphisms():
        mi, mj, ni, nj = m.dims[i], m.dims[j], n.dims[i], n.dims[j]
        if mj * ni == 0:
            continue
        block = np.zeros((ambient, mj * ni), dtype=np.int64)
        block[offsets[i]:offsets[i + 1]] += np.kron(m.action[(i, j, a)], np.eye(ni, dtype=np.int64))
        block[offsets[j]:offsets[j + 1]] -= np.kron(np.eye(mj, dtype=np.int64), n.action[(i, j, a)])
        columns.append(block % p)
    if not columns:
        return np.zeros((ambient, 0), dtype=np.int64)
    return np.hstack(columns)


def tensor_over_x(m: CatModule, n: CatModule) -> TensorValue:
    """⊕ M(X_i) ⊗ N(X_i) をすべり関係で割った商の次元"""
    _check_pair(m, n)
    f = m.category.field
    offsets = _offsets(m, n)
    relations = _relation_matrix(m, n, offsets)
    ambient = offsets[-1]
    chosen = extending_columns(relations, np.eye(ambient, dtype=np.int64), f)
    generators = []
    for idx in chosen:
        i = max(k for k in range(len(offsets) - 1) if offsets[k] <= idx)
        local = idx - offsets[i]
        generators.append((i, local // n.dims[i], local % n.dims[i]))
    dim = ambient - rank(relations, f)
    return TensorValue(dim, ambient, relations, tuple(generators), offsets)


@dataclass
class CanonicalMapResult:
    """標準写像 A(-,B) ⊗_X A(A,-) → A(A,B)（g ⊗ f ↦ g ∘ f）"""
    matrix: np.ndarray
    tensor_dim: int
    rank: int
    hom_dim: int
    stable_dim: int

    @property
    def kernel_dim(self) -> int:
        return self.tensor_dim - self.rank

    @property
    def cokernel_dim(self) -> int:
        return self.hom_dim - self.rank

    @property
    def consistent(self) -> bool:
        return self.cokernel_dim == self.stable_dim


def canonical_map(a: FdModule, b: FdModule, x: XSubcategory) -> CanonicalMapResult:
    """標準写像の行列（基本テンソルの座標から Hom(A,B) の座標へ）と核・余核の次元"""
    f = a.field
    m = restriction_module(b, RIGHT, x)
    n = restriction_module(a, LEFT, x)
    tensor = tensor_over_x(m, n)
    hom_basis = hom_matrices(a, b)
    images = []
    for i in range(len(x)):
        gs = hom_matrices(x.objects[i], b)
        fs = hom_matrices(a, x.objects[i])
        for g in gs:
            for h in fs:
                images.append(f.mul(g, h))
    if images and hom_basis:
        matrix = coordinates(hom_basis, images, f)
    else:
        matrix = np.zeros((len(hom_basis), tensor.ambient_dim), dtype=np.int64)
    if tensor.relations.shape[1] and np.any(f.mul(matrix, tensor.relations)):
        raise ComputationError("標準写像がすべり関係を零に写しません")
    result = CanonicalMapResult(
        matrix=matrix,
        tensor_dim=tensor.dim,
        rank=rank(matrix, f),
        hom_dim=len(hom_basis),
        stable_dim=stable_hom(a, b, x).dim
    )
    if not result.consistent:
        logger.error(
            "標準写像の余核 %d と安定Hom %d が一致しません (%s, %s)",
            result.cokernel_dim, result.stable_dim, a.name, b.name
        )
    return result


def representable_sum(cat: XCategory, generators: Sequence[int], name: str = '') -> CatModule:
    """⊕_s X(-, X_{k_s}) を右加群として構成"""
    n = cat.size
    dims = tuple(sum(cat.hom_dims[(i, k)] for k in generators) for i in range(n))
    action = {}
    for i, j, a in cat.morphisms():
        block = np.zeros((dims[i], dims[j]), dtype=np.int64)
        ri = rj = 0
        for k in generators:
            di, dj = cat.hom_dims[(i, k)], cat.hom_dims[(j, k)]
            # y ↦ y ∘ x_a
            block[ri:ri + di, rj:rj + dj] = cat.comp[(i, j, k)][:, :, a]
            ri += di
            rj += dj
        action[(i, j, a)] = block
    return CatModule(cat, RIGHT, dims, action, name)


def _cover(module: CatModule, mode: str):
    """表現可能加群の和からの全射。(生成元の対象番号, 元, 対象ごとの行列)"""
    cat = module.category
    f = cat.field
    n = cat.size
    candidates = [(k, b) for k in range(n) for b in range(module.dims[k])]

    def columns(k: int, b: int, i: int) -> np.ndarray:
        v = np.zeros((module.dims[k], 1), dtype=np.int64)
        v[b, 0] = 1
        cols = [f.mul(module.action[(i, k, c)], v) for c in range(cat.hom_dims[(i, k)])]
        if not cols:
            return np.zeros((module.dims[i], 0), dtype=np.int64)
        return np.hstack(cols)

    if mode == 'pruned' and candidates:
        contributions = [[columns(k, b, i) for i in range(n)] for k, b in candidates]
        keep = irredundant_subset(contributions, list(module.dims), f)
        candidates = [candidates[s] for s in keep]
    gens = tuple(k for k, _ in candidates)
    elements = []
    for k, b in candidates:
        v = np.zeros(module.dims[k], dtype=np.int64)
        v[b] = 1
        elements.append(v)
    maps = {}
    for i in range(n):
        blocks = [columns(k, b, i) for k, b in candidates]
        maps[i] = np.hstack(blocks) if blocks else np.zeros((module.dims[i], 0), dtype=np.int64)
        if rank(maps[i], f) != module.dims[i]:
            raise ComputationError(f"被覆が対象 {cat.names[i]} で全射になりません")
    return gens, elements, maps


def _kernel(source: CatModule, maps: Dict[int, np.ndarray]):
    """対象ごとの核と誘導作用"""
    cat = source.category
    f = cat.field
    inclusions = {i: kernel_basis(maps[i], f) for i in range(cat.size)}
    dims = tuple(inclusions[i].shape[1] for i in range(cat.size))
    action = {}
    for i, j, a in cat.morphisms():
        induced = solve(inclusions[i], f.mul(source.action[(i, j, a)], inclusions[j]), f)
        if induced is None:
            raise ComputationError("核が部分加群になっていません")
        action[(i, j, a)] = induced
    return CatModule(cat, source.side, dims, action, "ker"), inclusions


@dataclass
class CatResolution:
    """表現可能加群による射影分解 ⋯ → P_1 → P_0 → M

    generators[n] は P_n の各生成元の対象番号。
    yoneda[n][s] は生成元 s の像（n ≥ 1 では P_{n-1}(X_{k_s}) の座標、n = 0 では M(X_{k_s})）。
    maps[n][i] は対象 i での P_n → P_{n-1}（n = 0 では M）の行列。
    """
    target: CatModule
    generators: List[Tuple[int, ...]] = field(default_factory=list)
    yoneda: List[List[np.ndarray]] = field(default_factory=list)
    maps: List[Dict[int, np.ndarray]] = field(default_factory=list)
    terms: List[CatModule] = field(default_factory=list)

    @property
    def length(self) -> int:
        return len(self.generators)

    def exactness_defects(self) -> List[Tuple[int, int, int]]:
        """(次数, 対象, 核と像の次元差)。P_0 → M の全射性は次数 -1 として報告"""
        f = self.target.category.field
        defects = []
        for i in range(self.target.category.size):
            if rank(self.maps[0][i], f) != self.target.dims[i]:
                defects.append((-1, i, self.target.dims[i] - rank(self.maps[0][i], f)))
            for n in range(self.length - 1):
                d_n = self.maps[n][i]
                d_next = self.maps[n + 1][i]
                kernel_dim = d_n.shape[1] - rank(d_n, f)
                image_dim = rank(d_next, f)
                if np.any(f.mul(d_n, d_next)) or kernel_dim != image_dim:
                    defects.append((n, i, kernel_dim - image_dim))
        return defects


class _CatResolutionBuilder:
    def __init__(self, module: CatModule, mode: str):
        self.resolution = CatResolution(target=module)
        self.mode = mode
        self._current = module
        self._inclusions: Optional[Dict[int, np.ndarray]] = None

    def extend(self, length: int) -> CatResolution:
        """必要な長さまで延長し、先頭 length 項を返す"""
        res = self.resolution
        cat = res.target.category
        f = cat.field
        while res.length < length:
            gens, elements, maps = _cover(self._current, self.mode)
            term = representable_sum(cat, gens, f"P{res.length}")
            if self._inclusions is None:
                res.maps.append(maps)
                res.yoneda.append(elements)
            else:
                inc = self._inclusions
                res.maps.append({i: f.mul(inc[i], maps[i]) for i in maps})
                res.yoneda.append([
                    f.mul(inc[k], v.reshape(-1, 1))[:, 0] for k, v in zip(gens, elements)
                ])
            res.generators.append(gens)
            res.terms.append(term)
            self._current, self._inclusions = _kernel(term, maps)
            logger.debug("X加群の射影分解 %s: P_%d の生成元 %s", res.target.name, res.length - 1, gens)
        return CatResolution(
            target=res.target,
            generators=res.generators[:length],
            yoneda=res.yoneda[:length],
            maps=res.maps[:length],
            terms=res.terms[:length]
        )


def cat_projective_resolution(module: CatModule, length: int, mode: str = 'pruned') -> CatResolution:
    """表現可能加群の被覆と核を繰り返す射影分解（右加群）"""
    if length < 1:
        raise DegreeRangeError(f"分解の長さは1以上である必要があります: {length}")
    if module.side != RIGHT:
        raise ValueError("射影分解は右 X加群に対して計算します（左加群は反対圏で扱います）")
    return _CatResolutionBuilder(module, mode).extend(length)


def _tor_differential(res: CatResolution, n_module: CatModule, degree: int) -> np.ndarray:
    """P_degree ⊗ N → P_{degree-1} ⊗ N（各項は ⊕_s N(X_{k_s})）"""
    cat = n_module.category
    f = cat.field
    source_gens = res.generators[degree]
    target_gens = res.generators[degree - 1]
    rows = sum(n_module.dims[k] for k in target_gens)
    cols = sum(n_module.dims[k] for k in source_gens)
    d = np.zeros((rows, cols), dtype=np.int64)
    col = 0
    for k, element in zip(source_gens, res.yoneda[degree]):
        row = 0
        offset = 0
        for kt in target_gens:
            width = cat.hom_dims[(k, kt)]
            coeffs = element[offset:offset + width]
            block = n_module.action_of(k, kt, coeffs)
            d[row:row + n_module.dims[kt], col:col + n_module.dims[k]] = block
            row += n_module.dims[kt]
            offset += width
        col += n_module.dims[k]
    return d % f.p


def _tor_from_resolution(res: CatResolution, n_module: CatModule, n: int) -> int:
    f = n_module.category.field
    dim_n = sum(n_module.dims[k] for k in res.generators[n])
    out_rank = rank(_tor_differential(res, n_module, n), f) if n >= 1 else 0
    in_rank = rank(_tor_differential(res, n_module, n + 1), f)
    return dim_n - out_rank - in_rank


def tor(
    m: CatModule, n_module: CatModule, n: int,
    resolve: str = RIGHT, stability_check: bool = True, mode: str = 'pruned'
) -> int:
    """Tor^X_n(M, N)。resolve='left' なら N を反対圏上の右加群として分解する"""
    _check_pair(m, n_module)
    if n < 0:
        raise DegreeRangeError(f"Tor の次数は0以上である必要があります: {n}")
    if n == 0:
        return tensor_over_x(m, n_module).dim
    if resolve == LEFT:
        resolved, other = n_module.as_opposite(), m.as_opposite()
    else:
        resolved, other = m, n_module
    lengths = (n + 2, n + 4) if stability_check else (n + 2,)
    builder = _CatResolutionBuilder(resolved, mode)
    dims = [_tor_from_resolution(builder.extend(length), other, n) for length in lengths]
    if len(set(dims)) != 1:
        raise ComputationError(f"Tor_{n} が分解の長さ {lengths} で安定しません: {dims}")
    logger.debug("Tor_%d(%s, %s) = %d [%s]", n, m.name, n_module.name, dims[0], resolve)
    return dims[0]
