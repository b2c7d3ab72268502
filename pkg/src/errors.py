"""
例外定義モジュール
入力不正と計算失敗を区別できるよう、組み込み例外を継承した専用例外を集約
"""

from typing import Optional, Sequence


class HomquotError(Exception):
    """homquot全体の基底例外"""


class RegistryFormatError(HomquotError, ValueError):
    """レジストリファイルの形式エラー（位置情報付き）"""

    def __init__(
        self,
        message: str,
        location: Optional[str] = None,
        line: Optional[int] = None,
        column: Optional[int] = None
    ):
        self.location = location
        self.line = line
        self.column = column
        where = []
        if location:
            where.append(location)
        if line is not None:
            where.append(f"行{line}")
        if column is not None:
            where.append(f"列{column}")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(f"{prefix}{message}")


class DimensionMismatchError(HomquotError, ValueError):
    """行列・加群の次元不一致"""


class UnknownObjectError(HomquotError, KeyError):
    """レジストリに存在しない対象名"""

    def __init__(self, name: str, known: Sequence[str] = ()):
        self.name = name
        self.known = tuple(known)
        super().__init__(name)

    def __str__(self) -> str:
        if self.known:
            return f"未知の対象です: {self.name}（登録済み: {', '.join(self.known)}）"
        return f"未知の対象です: {self.name}"


class DegreeRangeError(HomquotError, ValueError):
    """計算種別に対して次数が範囲外"""


class ResolutionCertificationError(HomquotError, RuntimeError):
    """分解のHom複体が非輪状（構成バグの兆候）"""

    def __init__(self, degree: int, x_object: str, cohomology_dim: int):
        self.degree = degree
        self.x_object = x_object
        self.cohomology_dim = cohomology_dim
        super().__init__(
            f"分解の検証に失敗しました: 次数{degree}, X対象 {x_object}, "
            f"コホモロジー次元 {cohomology_dim}"
        )


class StabilizationError(HomquotError, RuntimeError):
    """切り詰め長を伸ばしても商Homの次元が安定しない"""

    def __init__(self, lengths: Sequence[int], dims: Sequence[int]):
        self.lengths = tuple(lengths)
        self.dims = tuple(dims)
        super().__init__(
            f"切り詰め長 {self.lengths} で次元が安定しません: {self.dims}"
        )


class BarComplexError(HomquotError, ValueError):
    """バー複体の上端次数が不足"""


class ComputationError(HomquotError, RuntimeError):
    """内部整合性の破れ（理論上起こらない不一致）"""


class InvalidRegistryError(HomquotError, ValueError):
    """検証で重大エラーが見つかったレジストリ"""

    def __init__(self, report):
        self.report = report
        critical = [r.message for r in report.results if r.level.value == "critical"]
        super().__init__(f"レジストリが不正です（重大エラー {len(critical)} 件）: " + "; ".join(critical[:3]))
