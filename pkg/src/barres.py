"""
バー複体による Tor の計算
A(-,B) ⊗ X ⊗ ⋯ ⊗ X ⊗ A(A,-) の非正規化バー複体を次数ごとに組み立ててホモロジーを取る
"""

import itertools
import logging
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .algmod import FdModule, XSubcategory
from .catmod import LEFT, RIGHT, CatModule, XCategory, restriction_module
from .errors import BarComplexError, DegreeRangeError
from .exactla import FieldSpec, complement_basis, inverse, rank


logger = logging.getLogger(__name__)


def _kron_all(mats: Sequence[np.ndarray]) -> np.ndarray:
    result = np.ones((1, 1), dtype=np.int64)
    for m in mats:
        result = np.kron(result, m)
    return result


class BarComplex:
    """非正規化（または正規化）バー複体

    次数 n の鎖は対象の列 (t_0, ..., t_n) ごとの
    M(X_{t_0}) ⊗ X(X_{t_1}, X_{t_0}) ⊗ ⋯ ⊗ X(X_{t_n}, X_{t_{n-1}}) ⊗ N(X_{t_n})。
    """

    def __init__(self, m: CatModule, n_module: CatModule, top_degree: int, normalized: bool = False):
        if m.side != RIGHT or n_module.side != LEFT:
            raise ValueError("バー複体は右 X加群と左 X加群の組から作ります")
        self.m = m
        self.n_module = n_module
        self.category: XCategory = m.category
        self.field: FieldSpec = self.category.field
        self.top_degree = top_degree
        self.normalized = normalized
        self._sections, self._projections = self._identity_quotients()

    def _identity_quotients(self):
        """End(X_i) を恒等射で割る切断と射影"""
        sections, projections = {}, {}
        for i in range(self.category.size):
            ident = self.category.identity[i].reshape(-1, 1)
            comp = complement_basis(ident, self.field)
            sections[i] = comp
            projections[i] = inverse(np.hstack([ident, comp]), self.field)[1:]
        return sections, projections

    def _factor_dims(self, tup: Tuple[int, ...], normalized: bool) -> List[int]:
        cat = self.category
        dims = [self.m.dims[tup[0]]]
        for k in range(1, len(tup)):
            e = cat.hom_dims[(tup[k], tup[k - 1])]
            if normalized and tup[k] == tup[k - 1]:
                e -= 1
            dims.append(e)
        dims.append(self.n_module.dims[tup[-1]])
        return dims

    def _blocks(self, n: int, normalized: bool) -> Tuple[List[Tuple[int, ...]], Dict[Tuple[int, ...], int], int]:
        tuples = []
        offsets = {}
        total = 0
        for tup in itertools.product(range(self.category.size), repeat=n + 1):
            size = int(np.prod(self._factor_dims(tup, normalized)))
            if size == 0:
                continue
            tuples.append(tup)
            offsets[tup] = total
            total += size
        return tuples, offsets, total

    def chain_dim(self, n: int) -> int:
        if n < 0:
            return 0
        return self._blocks(n, self.normalized)[2]

    def recount_chain_dim(self, n: int) -> int:
        """対象列の数え上げを行列の冪で置き換えた次元（非正規化）"""
        cat = self.category
        size = cat.size
        e = np.array([[cat.hom_dims[(s, t)] for s in range(size)] for t in range(size)], dtype=object)
        walk = np.identity(size, dtype=object)
        for _ in range(n):
            walk = walk.dot(e)
        m = np.array(self.m.dims, dtype=object)
        nd = np.array(self.n_module.dims, dtype=object)
        return int(m.dot(walk).dot(nd))

    def _face_factor(self, tup: Tuple[int, ...], i: int) -> np.ndarray:
        """面写像 d_i が隣り合う二つのテンソル因子に作用する行列"""
        cat = self.category
        n = len(tup) - 1
        if i == 0:
            t0, t1 = tup[0], tup[1]
            e = cat.hom_dims[(t1, t0)]
            f = np.zeros((self.m.dims[t1], self.m.dims[t0], e), dtype=np.int64)
            for x in range(e):
                f[:, :, x] = self.m.action[(t1, t0, x)]
            return f.reshape(self.m.dims[t1], -1)
        if i == n:
            tp, tn = tup[n - 1], tup[n]
            e = cat.hom_dims[(tn, tp)]
            f = np.zeros((self.n_module.dims[tp], e, self.n_module.dims[tn]), dtype=np.int64)
            for x in range(e):
                f[:, x, :] = self.n_module.action[(tn, tp, x)]
            return f.reshape(self.n_module.dims[tp], -1)
        # x_i ∘ x_{i+1}
        table = cat.comp[(tup[i + 1], tup[i], tup[i - 1])]
        return table.reshape(table.shape[0], -1)

    def _face(self, tup: Tuple[int, ...], i: int) -> Tuple[Tuple[int, ...], np.ndarray]:
        dims = self._factor_dims(tup, False)
        left = int(np.prod(dims[:i]))
        right = int(np.prod(dims[i + 2:]))
        block = _kron_all([
            np.eye(left, dtype=np.int64), self._face_factor(tup, i), np.eye(right, dtype=np.int64)
        ])
        return tup[:i] + tup[i + 1:], block

    def _section(self, tup: Tuple[int, ...]) -> np.ndarray:
        mats = [np.eye(self.m.dims[tup[0]], dtype=np.int64)]
        for k in range(1, len(tup)):
            if tup[k] == tup[k - 1]:
                mats.append(self._sections[tup[k]])
            else:
                mats.append(np.eye(self.category.hom_dims[(tup[k], tup[k - 1])], dtype=np.int64))
        mats.append(np.eye(self.n_module.dims[tup[-1]], dtype=np.int64))
        return _kron_all(mats)

    def _projection(self, tup: Tuple[int, ...]) -> np.ndarray:
        mats = [np.eye(self.m.dims[tup[0]], dtype=np.int64)]
        for k in range(1, len(tup)):
            if tup[k] == tup[k - 1]:
                mats.append(self._projections[tup[k]])
            else:
                mats.append(np.eye(self.category.hom_dims[(tup[k], tup[k - 1])], dtype=np.int64))
        mats.append(np.eye(self.n_module.dims[tup[-1]], dtype=np.int64))
        return _kron_all(mats)

    def differential(self, n: int) -> np.ndarray:
        """次数 n から n-1 への微分 Σ (-1)^i d_i"""
        if n < 1 or n > self.top_degree:
            return np.zeros((self.chain_dim(n - 1), self.chain_dim(n)), dtype=np.int64)
        p = self.field.p
        src_tuples, src_offsets, src_total = self._blocks(n, False)
        tgt_tuples, tgt_offsets, tgt_total = self._blocks(n - 1, False)
        d = np.zeros((tgt_total, src_total), dtype=np.int64)
        for tup in src_tuples:
            col = src_offsets[tup]
            for i in range(n + 1):
                face_tup, block = self._face(tup, i)
                if face_tup not in tgt_offsets:
                    continue
                row = tgt_offsets[face_tup]
                sign = 1 if i % 2 == 0 else -1
                d[row:row + block.shape[0], col:col + block.shape[1]] += sign * block
        d %= p
        if not self.normalized:
            return d
        return self._normalize(d, src_tuples, src_offsets, tgt_tuples, tgt_offsets)

    def _normalize(self, d, src_tuples, src_offsets, tgt_tuples, tgt_offsets) -> np.ndarray:
        """退化鎖で割った商複体の微分 Q d S"""
        f = self.field
        sections = []
        for tup in src_tuples:
            s = np.zeros((d.shape[1], 0), dtype=np.int64)
            local = self._section(tup)
            if local.shape[1]:
                s = np.zeros((d.shape[1], local.shape[1]), dtype=np.int64)
                s[src_offsets[tup]:src_offsets[tup] + local.shape[0]] = local
            sections.append(s)
        projections = []
        for tup in tgt_tuples:
            local = self._projection(tup)
            q = np.zeros((local.shape[0], d.shape[0]), dtype=np.int64)
            q[:, tgt_offsets[tup]:tgt_offsets[tup] + local.shape[1]] = local
            projections.append(q)
        big_s = np.hstack(sections) if sections else np.zeros((d.shape[1], 0), dtype=np.int64)
        big_q = np.vstack(projections) if projections else np.zeros((0, d.shape[0]), dtype=np.int64)
        return f.chain(big_q, d, big_s)

    def _rank(self, n: int) -> int:
        return rank(self.differential(n), self.field)

    def homology_dim(self, n: int) -> int:
        if n < 0:
            raise DegreeRangeError(f"バー複体の次数は0以上である必要があります: {n}")
        if self.top_degree < n + 1:
            raise BarComplexError(
                f"次数 {n} のホモロジーには上端次数 {n + 1} 以上が必要です（指定: {self.top_degree}）"
            )
        return self.chain_dim(n) - self._rank(n) - self._rank(n + 1)

    def stream(self, start: int = 0) -> Iterator[Tuple[int, int]]:
        """(次数, ホモロジー次元) を順に返す。保持する微分は隣接する二つだけ"""
        previous_rank = self._rank(start) if start >= 1 else 0
        for n in range(start, self.top_degree):
            next_rank = self._rank(n + 1)
            dim = self.chain_dim(n) - previous_rank - next_rank
            logger.debug("バー複体 次数 %d: 鎖 %d, ホモロジー %d", n, self.chain_dim(n), dim)
            yield n, dim
            previous_rank = next_rank

    def d_squared_holds(self, n: int) -> bool:
        if n < 2:
            return True
        return not np.any(self.field.mul(self.differential(n - 1), self.differential(n)))


def bar_complex(a: FdModule, b: FdModule, x: XSubcategory, top: int, normalized: bool = False) -> BarComplex:
    m = restriction_module(b, RIGHT, x)
    n_module = restriction_module(a, LEFT, x)
    return BarComplex(m, n_module, top, normalized)


def bar_tor(
    a: FdModule, b: FdModule, x: XSubcategory, n: int, top: Optional[int] = None,
    normalized: bool = False
) -> int:
    """バー複体の次数 n のホモロジー次元（Tor^X_n(A(-,B), A(A,-))）"""
    if top is None:
        top = n + 1
    complex_ = bar_complex(a, b, x, top, normalized)
    dim = complex_.homology_dim(n)
    logger.debug("バー複体 Tor_%d(%s, %s) = %d (top=%d)", n, a.name, b.name, dim, top)
    return dim
