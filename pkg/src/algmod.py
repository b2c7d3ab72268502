"""
有限次元代数と有限次元左加群
構造定数による代数の表示、加群準同型、Hom空間、核・余核・直和、対象レジストリ
"""

import logging
import threading
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import DimensionMismatchError, UnknownObjectError
from .exactla import (
    FieldSpec, complement_basis, independent_columns, inverse, kernel_basis, solve,
)


logger = logging.getLogger(__name__)


def _frozen(m: np.ndarray) -> np.ndarray:
    m = np.ascontiguousarray(m, dtype=np.int64)
    m.flags.writeable = False
    return m


@dataclass(frozen=True, eq=False)
class AlgebraPresentation:
    """構造定数で与えた F_p 上の有限次元結合代数

    mult[i, j] は積 e_i e_j の基底係数ベクトル。
    """
    field: FieldSpec
    basis_names: Tuple[str, ...]
    mult: np.ndarray
    unit: np.ndarray

    def __post_init__(self):
        d = len(self.basis_names)
        if self.mult.shape != (d, d, d):
            raise DimensionMismatchError(
                f"構造定数の形が不正です: {self.mult.shape}（期待値 {(d, d, d)}）"
            )
        if self.unit.shape != (d,):
            raise DimensionMismatchError(f"単位元の長さが不正です: {self.unit.shape}")
        object.__setattr__(self, 'mult', _frozen(self.mult % self.field.p))
        object.__setattr__(self, 'unit', _frozen(self.unit % self.field.p))

    @property
    def dim(self) -> int:
        return len(self.basis_names)

    def index(self, name: str) -> int:
        try:
            return self.basis_names.index(name)
        except ValueError:
            raise UnknownObjectError(name, self.basis_names) from None

    def associativity_violations(self) -> List[Tuple[int, int, int]]:
        """(e_i e_j) e_k != e_i (e_j e_k) となる三つ組"""
        left = self.field.tensordot(self.mult, self.mult, axes=([2], [0]))
        right = self.field.tensordot(self.mult, self.mult, axes=([1], [2]))
        right = np.transpose(right, (0, 2, 3, 1))
        bad = np.argwhere(np.any(left != right, axis=3))
        return [tuple(int(v) for v in idx) for idx in bad]

    def unit_violations(self) -> List[Tuple[str, int]]:
        """単位元が両側単位として働かない基底元（'left'/'right', index）"""
        p = self.field.p
        eye = np.eye(self.dim, dtype=np.int64)
        left = np.tensordot(self.unit, self.mult, axes=([0], [0])) % p
        right = np.tensordot(self.unit, self.mult, axes=([0], [1])) % p
        result = []
        for j in range(self.dim):
            if np.any(left[j] != eye[j]):
                result.append(('left', j))
            if np.any(right[j] != eye[j]):
                result.append(('right', j))
        return result

    def opposite(self) -> 'AlgebraPresentation':
        """反対代数（積の順序を入れ替える）"""
        return AlgebraPresentation(
            field=self.field,
            basis_names=self.basis_names,
            mult=np.transpose(self.mult, (1, 0, 2)).copy(),
            unit=self.unit.copy()
        )

    def regular_module(self, name: str = 'Lambda') -> 'FdModule':
        """左正則加群。e_i の作用行列の第 j 列は e_i e_j"""
        action = tuple(self.mult[i].T.copy() for i in range(self.dim))
        return FdModule(name=name, algebra=self, action=action)


@dataclass(frozen=True, eq=False)
class FdModule:
    """有限次元左加群（基底元ごとの作用行列）

    summands は直和として構成した場合の成分。Hom計算の分解に使う。
    """
    name: str
    algebra: AlgebraPresentation
    action: Tuple[np.ndarray, ...]
    summands: Tuple['FdModule', ...] = ()

    def __post_init__(self):
        if len(self.action) != self.algebra.dim:
            raise DimensionMismatchError(
                f"加群 {self.name} の作用行列の個数 {len(self.action)} が"
                f"代数の次元 {self.algebra.dim} と一致しません"
            )
        frozen = tuple(_frozen(a % self.algebra.field.p) for a in self.action)
        dims = {a.shape for a in frozen}
        if len(dims) > 1 or any(s[0] != s[1] for s in dims):
            raise DimensionMismatchError(f"加群 {self.name} の作用行列が正方行列ではありません")
        object.__setattr__(self, 'action', frozen)

    @property
    def dim(self) -> int:
        if not self.action:
            return 0
        return self.action[0].shape[0]

    @property
    def field(self) -> FieldSpec:
        return self.algebra.field

    def is_zero(self) -> bool:
        return self.dim == 0

    def acting(self, basis_name: str) -> np.ndarray:
        return self.action[self.algebra.index(basis_name)]

    def axiom_violations(self) -> List[Any]:
        """作用が準同型にならない組 (i, j) と、単位元が恒等でない場合の 'unit'"""
        f = self.field
        n = self.dim
        bad: List[Any] = []
        stacked = np.stack(self.action) if self.action else np.zeros((0, n, n), dtype=np.int64)
        for i in range(self.algebra.dim):
            for j in range(self.algebra.dim):
                lhs = f.mul(self.action[i], self.action[j])
                rhs = f.tensordot(self.algebra.mult[i, j], stacked, axes=([0], [0]))
                if np.any(lhs != rhs):
                    bad.append((i, j))
        unit_action = f.tensordot(self.algebra.unit, stacked, axes=([0], [0]))
        if np.any(unit_action != np.eye(n, dtype=np.int64)):
            bad.append('unit')
        return bad

    def renamed(self, name: str) -> 'FdModule':
        return FdModule(name=name, algebra=self.algebra, action=self.action, summands=self.summands)


@dataclass(frozen=True, eq=False)
class ModuleHom:
    """加群準同型（行列は dim(target) x dim(source)）"""
    source: FdModule
    target: FdModule
    matrix: np.ndarray

    def __post_init__(self):
        expected = (self.target.dim, self.source.dim)
        m = np.asarray(self.matrix, dtype=np.int64)
        if m.size == 0 and expected[0] * expected[1] == 0:
            m = m.reshape(expected)
        if m.shape != expected:
            raise DimensionMismatchError(
                f"準同型 {self.source.name}→{self.target.name} の行列の形 {m.shape} が"
                f"期待値 {expected} と一致しません"
            )
        object.__setattr__(self, 'matrix', _frozen(m % self.source.field.p))

    @classmethod
    def zero(cls, source: FdModule, target: FdModule) -> 'ModuleHom':
        return cls(source, target, np.zeros((target.dim, source.dim), dtype=np.int64))

    @classmethod
    def identity(cls, module: FdModule) -> 'ModuleHom':
        return cls(module, module, np.eye(module.dim, dtype=np.int64))

    @property
    def field(self) -> FieldSpec:
        return self.source.field

    def compose(self, other: 'ModuleHom') -> 'ModuleHom':
        """self ∘ other"""
        if other.target is not self.source and other.target.dim != self.source.dim:
            raise DimensionMismatchError(
                f"合成できません: {other.target.name} と {self.source.name}"
            )
        return ModuleHom(other.source, self.target, self.field.mul(self.matrix, other.matrix))

    def is_zero(self) -> bool:
        return not np.any(self.matrix)

    def intertwining_violations(self) -> List[int]:
        f = self.field
        return [
            i for i, (a, b) in enumerate(zip(self.source.action, self.target.action))
            if np.any(f.mul(self.matrix, a) != f.mul(b, self.matrix))
        ]


def _check_same_algebra(m: FdModule, n: FdModule):
    if m.algebra is not n.algebra and m.algebra.dim != n.algebra.dim:
        raise DimensionMismatchError(f"異なる代数上の加群です: {m.name}, {n.name}")


def _solve_hom_basis(m: FdModule, n: FdModule) -> List[np.ndarray]:
    """X A_i = B_i X を行優先 vec(X) の連立方程式として解く"""
    f = m.field
    dm, dn = m.dim, n.dim
    if dm == 0 or dn == 0:
        return []
    blocks = []
    eye_n = np.eye(dn, dtype=np.int64)
    eye_m = np.eye(dm, dtype=np.int64)
    for a, b in zip(m.action, n.action):
        blocks.append((np.kron(eye_n, a.T) - np.kron(b, eye_m)) % f.p)
    system = np.vstack(blocks) if blocks else np.zeros((0, dm * dn), dtype=np.int64)
    kb = kernel_basis(system, f)
    return [kb[:, j].reshape(dn, dm) for j in range(kb.shape[1])]


@lru_cache(maxsize=4096)
def _hom_space_cached(m: FdModule, n: FdModule) -> Tuple[np.ndarray, ...]:
    if m.summands:
        result = []
        offset = 0
        for part in m.summands:
            for h in _hom_space_cached(part, n):
                full = np.zeros((n.dim, m.dim), dtype=np.int64)
                full[:, offset:offset + part.dim] = h
                result.append(_frozen(full))
            offset += part.dim
        return tuple(result)
    if n.summands:
        result = []
        offset = 0
        for part in n.summands:
            for h in _hom_space_cached(m, part):
                full = np.zeros((n.dim, m.dim), dtype=np.int64)
                full[offset:offset + part.dim, :] = h
                result.append(_frozen(full))
            offset += part.dim
        return tuple(result)
    basis = tuple(_frozen(h) for h in _solve_hom_basis(m, n))
    logger.debug("Hom(%s, %s): 次元 %d", m.name, n.name, len(basis))
    return basis


def clear_hom_cache():
    """Hom 空間の基底のキャッシュを破棄（保持している加群も解放される）"""
    _hom_space_cached.cache_clear()


def hom_cache_size() -> int:
    return _hom_space_cached.cache_info().currsize


def hom_space(m: FdModule, n: FdModule) -> List[ModuleHom]:
    """Hom_Λ(M, N) の基底"""
    _check_same_algebra(m, n)
    return [ModuleHom(m, n, h) for h in _hom_space_cached(m, n)]


def hom_matrices(m: FdModule, n: FdModule) -> Tuple[np.ndarray, ...]:
    """hom_space の行列だけを返す（読み取り専用）"""
    _check_same_algebra(m, n)
    return _hom_space_cached(m, n)


def hom_dim(m: FdModule, n: FdModule) -> int:
    return len(hom_matrices(m, n))


def zero_module(algebra: AlgebraPresentation, name: str = '0') -> FdModule:
    return FdModule(
        name=name,
        algebra=algebra,
        action=tuple(np.zeros((0, 0), dtype=np.int64) for _ in range(algebra.dim))
    )


def kernel(f: ModuleHom) -> Tuple[FdModule, ModuleHom]:
    """核と包含写像"""
    field_ = f.field
    src = f.source
    k = kernel_basis(f.matrix, field_)
    action = []
    for a in src.action:
        induced = solve(k, field_.mul(a, k), field_)
        if induced is None:
            raise DimensionMismatchError(f"{src.name} の核が部分加群になっていません")
        action.append(induced)
    module = FdModule(name=f"ker({src.name}→{f.target.name})", algebra=src.algebra, action=tuple(action))
    return module, ModuleHom(module, src, k)


def cokernel(f: ModuleHom) -> Tuple[FdModule, ModuleHom]:
    """余核と射影"""
    field_ = f.field
    tgt = f.target
    image = independent_columns(f.matrix, field_) if f.source.dim else np.zeros((tgt.dim, 0), dtype=np.int64)
    comp = complement_basis(image, field_)
    r = image.shape[1]
    if comp.shape[1] == 0:
        projection = np.zeros((0, tgt.dim), dtype=np.int64)
        action = tuple(np.zeros((0, 0), dtype=np.int64) for _ in tgt.action)
    else:
        t = np.hstack([image, comp])
        projection = inverse(t, field_)[r:]
        action = tuple(field_.chain(projection, a, comp) for a in tgt.action)
    module = FdModule(name=f"coker({f.source.name}→{tgt.name})", algebra=tgt.algebra, action=action)
    return module, ModuleHom(tgt, module, projection)


@dataclass(frozen=True, eq=False)
class DirectSum:
    """直和と双積の構造写像"""
    module: FdModule
    injections: Tuple[ModuleHom, ...]
    projections: Tuple[ModuleHom, ...]


def direct_sum(
    parts: Sequence[FdModule],
    algebra: Optional[AlgebraPresentation] = None,
    name: Optional[str] = None
) -> DirectSum:
    """ブロック対角作用の直和"""
    parts = list(parts)
    if not parts:
        if algebra is None:
            raise ValueError("空の直和には代数の指定が必要です")
        zero = zero_module(algebra)
        return DirectSum(zero, (), ())
    alg = parts[0].algebra
    for part in parts[1:]:
        _check_same_algebra(parts[0], part)
    total = sum(part.dim for part in parts)
    action = []
    for i in range(alg.dim):
        block = np.zeros((total, total), dtype=np.int64)
        offset = 0
        for part in parts:
            block[offset:offset + part.dim, offset:offset + part.dim] = part.action[i]
            offset += part.dim
        action.append(block)
    label = name or " ⊕ ".join(part.name for part in parts)
    module = FdModule(name=label, algebra=alg, action=tuple(action), summands=tuple(parts))
    injections = []
    projections = []
    offset = 0
    for part in parts:
        emb = np.zeros((total, part.dim), dtype=np.int64)
        emb[offset:offset + part.dim, :] = np.eye(part.dim, dtype=np.int64)
        injections.append(ModuleHom(part, module, emb))
        projections.append(ModuleHom(module, part, emb.T.copy()))
        offset += part.dim
    return DirectSum(module, tuple(injections), tuple(projections))


class XSubcategory:
    """基本対象の有限リストが生成する充満加法的部分圏 X

    分解などの構成結果をキー付きで保持する。挿入は初回のみ有効。
    """

    def __init__(
        self,
        objects: Sequence[FdModule],
        names: Optional[Sequence[str]] = None,
        mode: str = 'pruned',
        label: str = 'X'
    ):
        self.objects: Tuple[FdModule, ...] = tuple(objects)
        self.names: Tuple[str, ...] = tuple(names) if names is not None else tuple(o.name for o in objects)
        if len(self.names) != len(self.objects):
            raise ValueError("X の対象名と対象の個数が一致しません")
        if mode not in ('pruned', 'universal'):
            raise ValueError(f"未知の近似モードです: {mode}")
        self.mode = mode
        self.label = label
        self._cache: Dict[Any, Any] = {}
        self._lock = threading.Lock()

    def __len__(self) -> int:
        return len(self.objects)

    def __iter__(self):
        return iter(self.objects)

    @property
    def algebra(self) -> AlgebraPresentation:
        return self.objects[0].algebra

    def contains(self, module: FdModule) -> bool:
        """登録された基本対象そのものか"""
        return any(module is obj for obj in self.objects)

    def memo(self, key: Any, factory: Callable[[], Any]) -> Any:
        """未登録なら factory() の結果を登録して返す"""
        with self._lock:
            if key in self._cache:
                return self._cache[key]
        value = factory()
        with self._lock:
            return self._cache.setdefault(key, value)

    @property
    def cache_size(self) -> int:
        return len(self._cache)

    def clear_cache(self):
        with self._lock:
            self._cache.clear()

    def with_mode(self, mode: str) -> 'XSubcategory':
        return XSubcategory(self.objects, self.names, mode=mode, label=self.label)


@dataclass
class ObjectRegistry:
    """名前付き加群の集まりと X の宣言"""
    algebra: AlgebraPresentation
    modules: Dict[str, FdModule]
    x_members: Tuple[str, ...]
    name: str = 'registry'
    subcategories: Dict[str, Tuple[str, ...]] = field(default_factory=dict)
    fixtures: Dict[str, Any] = field(default_factory=dict)
    settings: Dict[str, Any] = field(default_factory=dict)

    @property
    def field(self) -> FieldSpec:
        return self.algebra.field

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(self.modules)

    def get(self, name: str) -> FdModule:
        try:
            return self.modules[name]
        except KeyError:
            raise UnknownObjectError(name, self.names) from None

    def unresolved_members(self) -> List[Tuple[str, str]]:
        """解決できない X 宣言 (部分圏ラベル, 名前)"""
        missing = [('X', n) for n in self.x_members if n not in self.modules]
        for label, members in self.subcategories.items():
            missing.extend((label, n) for n in members if n not in self.modules)
        return missing

    def x_subcategory(self, label: Optional[str] = None, mode: str = 'pruned') -> XSubcategory:
        """X（または名前付き部分圏）を取り出す。カンマ区切りの対象名も受け付ける"""
        if label is None or label == 'X':
            members = self.x_members
            label = 'X'
        elif label in self.subcategories:
            members = self.subcategories[label]
        else:
            members = tuple(part.strip() for part in label.split(',') if part.strip())
        if not members:
            raise UnknownObjectError(label or 'X', tuple(self.subcategories))
        return XSubcategory([self.get(n) for n in members], members, mode=mode, label=label)
