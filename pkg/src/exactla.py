"""
素体 F_p 上の厳密な密行列線形代数
上位モジュールすべての計算基盤（階数・核・連立方程式・商空間の次元）
"""

from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import DimensionMismatchError


# int64 の積和がオーバーフローしない上限
_INT64_LIMIT = 2 ** 63 - 1


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


@dataclass(frozen=True)
class FieldSpec:
    """素体 F_p の指定"""
    p: int = 101

    def __post_init__(self):
        if not isinstance(self.p, int) or not (2 <= self.p < 2 ** 31):
            raise ValueError(f"法 p は 2 <= p < 2^31 の整数である必要があります: {self.p}")
        if not _is_prime(self.p):
            raise ValueError(f"法 p が素数ではありません: {self.p}")

    def matrix(self, data, rows: Optional[int] = None, cols: Optional[int] = None) -> np.ndarray:
        """任意の整数データを既約な行列に変換"""
        m = np.array(data, dtype=np.int64)
        if rows is not None and cols is not None:
            m = m.reshape(rows, cols)
        if m.ndim != 2:
            raise DimensionMismatchError(f"2次元の行列が必要です: shape={m.shape}")
        return m % self.p

    def zeros(self, rows: int, cols: int) -> np.ndarray:
        return np.zeros((rows, cols), dtype=np.int64)

    def identity(self, n: int) -> np.ndarray:
        return np.eye(n, dtype=np.int64)

    def inverse_scalar(self, a: int) -> int:
        return pow(int(a) % self.p, -1, self.p)

    def mul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """行列積 (mod p)"""
        if a.shape[1] != b.shape[0]:
            raise DimensionMismatchError(f"行列積の次元不一致: {a.shape} x {b.shape}")
        inner = a.shape[1]
        if (self.p - 1) ** 2 * max(inner, 1) < _INT64_LIMIT:
            return (a @ b) % self.p
        # 大きな p では Python 整数で計算
        prod = a.astype(object) @ b.astype(object)
        return (prod % self.p).astype(np.int64)

    def tensordot(self, a: np.ndarray, b: np.ndarray, axes) -> np.ndarray:
        """np.tensordot の mod p 版（構造定数の縮約用）"""
        a_axes = axes[0] if isinstance(axes[0], (list, tuple)) else [axes[0]]
        inner = int(np.prod([a.shape[ax] for ax in a_axes])) if a_axes else 1
        if (self.p - 1) ** 2 * max(inner, 1) < _INT64_LIMIT:
            return np.tensordot(a, b, axes=axes) % self.p
        prod = np.tensordot(a.astype(object), b.astype(object), axes=axes)
        return (prod % self.p).astype(np.int64)

    def chain(self, *mats: np.ndarray) -> np.ndarray:
        """左から順に掛け合わせる（f ∘ g ∘ ... の行列）"""
        result = mats[0]
        for m in mats[1:]:
            result = self.mul(result, m)
        return result


def _echelon(m: np.ndarray, p: int, reduced: bool = True) -> Tuple[np.ndarray, List[int]]:
    """先頭非零ピボットによるガウス消去。(行階段形, ピボット列) を返す"""
    a = np.array(m, dtype=np.int64) % p
    rows, cols = a.shape
    pivots: List[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(a[r:, c])[0]
        if nz.size == 0:
            continue
        piv = r + int(nz[0])
        if piv != r:
            a[[r, piv]] = a[[piv, r]]
        inv = pow(int(a[r, c]), -1, p)
        a[r, c:] = (a[r, c:] * inv) % p
        if reduced:
            targets = np.nonzero(a[:, c])[0]
            targets = targets[targets != r]
        else:
            targets = r + 1 + np.nonzero(a[r + 1:, c])[0]
        if targets.size:
            factors = a[targets, c][:, None]
            a[targets, c:] = (a[targets, c:] - factors * a[r, c:]) % p
        pivots.append(c)
        r += 1
    return a, pivots


def rref(m: np.ndarray, field: FieldSpec) -> Tuple[np.ndarray, List[int]]:
    """既約行階段形とピボット列"""
    return _echelon(m, field.p, reduced=True)


def rank(m: np.ndarray, field: FieldSpec) -> int:
    """F_p 上の階数"""
    if m.size == 0:
        return 0
    # 横長の方が消去の段数が少ない
    if m.shape[0] > m.shape[1]:
        m = m.T
    return len(_echelon(m, field.p, reduced=False)[1])


def kernel_basis(m: np.ndarray, field: FieldSpec) -> np.ndarray:
    """右核の基底（列）。自由変数ごとに1本、ピボット順で決定的"""
    rows, cols = m.shape
    if rows == 0:
        return field.identity(cols)
    reduced, pivots = rref(m, field)
    pivot_set = set(pivots)
    free = [c for c in range(cols) if c not in pivot_set]
    basis = np.zeros((cols, len(free)), dtype=np.int64)
    for j, f in enumerate(free):
        basis[f, j] = 1
        for i, pc in enumerate(pivots):
            basis[pc, j] = (-reduced[i, f]) % field.p
    return basis


def solve(a: np.ndarray, b: np.ndarray, field: FieldSpec) -> Optional[np.ndarray]:
    """aX = b の特殊解（自由変数は0）。解なしなら None"""
    if a.shape[0] != b.shape[0]:
        raise DimensionMismatchError(
            f"連立方程式の行数が一致しません: {a.shape[0]} != {b.shape[0]}"
        )
    n = a.shape[1]
    if a.shape[0] == 0:
        return field.zeros(n, b.shape[1])
    reduced, pivots = rref(np.hstack([a, b]), field)
    if any(pc >= n for pc in pivots):
        return None
    x = field.zeros(n, b.shape[1])
    for i, pc in enumerate(pivots):
        x[pc] = reduced[i, n:]
    return x


def quotient_dim(sub: np.ndarray, ambient_dim: int, field: FieldSpec) -> int:
    """部分空間（列で張る）による商空間の次元"""
    if sub.shape[0] != ambient_dim:
        raise DimensionMismatchError(
            f"部分空間の行数 {sub.shape[0]} が全体次元 {ambient_dim} と一致しません"
        )
    return ambient_dim - rank(sub, field)


def extending_columns(sub: np.ndarray, candidates: np.ndarray, field: FieldSpec) -> List[int]:
    """span(sub) を独立に拡張する candidates の列番号（左から貪欲）"""
    if candidates.shape[1] == 0:
        return []
    offset = sub.shape[1]
    _, pivots = rref(np.hstack([sub, candidates]), field)
    return [pc - offset for pc in pivots if pc >= offset]


def complement_basis(sub: np.ndarray, field: FieldSpec) -> np.ndarray:
    """span(sub) の補空間を張る標準基底ベクトル（列）"""
    n = sub.shape[0]
    chosen = extending_columns(sub, field.identity(n), field)
    basis = field.zeros(n, len(chosen))
    for j, idx in enumerate(chosen):
        basis[idx, j] = 1
    return basis


def independent_columns(m: np.ndarray, field: FieldSpec) -> np.ndarray:
    """列空間の基底（ピボット列をそのまま抜き出す）"""
    if m.shape[1] == 0:
        return m
    _, pivots = rref(m, field)
    return m[:, pivots]


def inverse(m: np.ndarray, field: FieldSpec) -> np.ndarray:
    if m.shape[0] != m.shape[1]:
        raise DimensionMismatchError(f"正方行列ではありません: {m.shape}")
    inv = solve(m, field.identity(m.shape[0]), field)
    if inv is None:
        raise DimensionMismatchError("正則でない行列の逆行列は存在しません")
    return inv


def flatten(mats: Sequence[np.ndarray], ambient: int) -> np.ndarray:
    """行列の列を平坦化して並べる（Hom空間の座標化に使用）"""
    if not mats:
        return np.zeros((ambient, 0), dtype=np.int64)
    return np.stack([m.reshape(-1) for m in mats], axis=1)


def coordinates(basis: Sequence[np.ndarray], targets: Iterable[np.ndarray], field: FieldSpec) -> np.ndarray:
    """基底の一次結合として targets を表す係数（列）。表せなければ例外"""
    targets = list(targets)
    if basis:
        ambient = basis[0].size
    elif targets:
        ambient = targets[0].size
    else:
        return field.zeros(0, 0)
    coeffs = solve(flatten(basis, ambient), flatten(targets, ambient), field)
    if coeffs is None:
        raise DimensionMismatchError("基底の張る空間に含まれない元があります")
    return coeffs


def combine(basis: Sequence[np.ndarray], coeffs: np.ndarray, field: FieldSpec) -> np.ndarray:
    """係数ベクトルから行列を組み立てる"""
    shape = basis[0].shape
    flat = field.mul(flatten(basis, basis[0].size), coeffs.reshape(-1, 1))
    return flat.reshape(shape)
