"""
設定管理モジュール
homquot の全体設定を集約管理（優先順位: フラグ > レジストリの settings > 既定値）
"""

import os
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple


FIXTURES_ENV = 'HOMQUOT_FIXTURES'


@dataclass
class WorkbenchConfig:
    """homquot 全体設定"""

    # 体と次数の設定
    p: int = 101
    n_max: int = 4
    max_degree: int = 12

    # 計算方針
    approximation_mode: str = 'pruned'
    stability_check: bool = True
    include_representatives: bool = False
    tor_resolve: str = 'right'
    certify_length: int = 8
    workers: int = 1

    # ファイル処理設定
    default_encoding: str = 'utf-8'
    supported_encodings: List[str] = field(default_factory=lambda: [
        'utf-8', 'shift_jis', 'cp932', 'euc-jp', 'iso-2022-jp'
    ])
    max_file_size: int = 10 * 1024 * 1024  # 10MB
    encoding_detection_sample_size: int = 100000  # 100KB
    encoding_confidence_threshold: float = 0.7
    enable_chardet: bool = True

    # 出力設定
    include_timing: bool = True
    pretty: bool = False

    fixtures_dir: Optional[Path] = None

    def __post_init__(self):
        """初期化後の処理"""
        if self.fixtures_dir is None:
            env = os.environ.get(FIXTURES_ENV)
            if env:
                self.fixtures_dir = Path(env)
            else:
                self.fixtures_dir = Path(__file__).parent.parent / 'fixtures'
        self.fixtures_dir = Path(self.fixtures_dir)
        self.check()

    def check(self):
        """値の範囲を確認"""
        if self.approximation_mode not in ('pruned', 'universal'):
            raise ValueError(f"未知の近似モードです: {self.approximation_mode}")
        if self.tor_resolve not in ('right', 'left'):
            raise ValueError(f"Tor の分解方向は right / left のいずれかです: {self.tor_resolve}")
        if self.n_max < 1:
            raise ValueError(f"n_max は1以上である必要があります: {self.n_max}")
        if self.n_max > self.max_degree:
            raise ValueError(f"n_max {self.n_max} が上限 {self.max_degree} を超えています")
        if self.workers < 1:
            raise ValueError(f"workers は1以上である必要があります: {self.workers}")

    @classmethod
    def setting_names(cls) -> Tuple[str, ...]:
        return tuple(f.name for f in fields(cls))

    @classmethod
    def from_sources(
        cls,
        file_settings: Optional[Dict[str, Any]] = None,
        **flags: Any
    ) -> Tuple['WorkbenchConfig', List[str]]:
        """レジストリの settings とコマンドラインのフラグから設定を作る

        Returns:
            (設定, 未知のキーのリスト)
        """
        known = set(cls.setting_names())
        values: Dict[str, Any] = {}
        unknown: List[str] = []
        for key, value in (file_settings or {}).items():
            if key in known:
                values[key] = value
            else:
                unknown.append(key)
        for key, value in flags.items():
            if value is None:
                continue
            if key not in known:
                raise ValueError(f"未知の設定項目です: {key}")
            values[key] = value
        return cls(**values), sorted(unknown)

    @classmethod
    def create_default(cls) -> 'WorkbenchConfig':
        """デフォルト設定を作成"""
        return cls()

    @classmethod
    def create_fast(cls) -> 'WorkbenchConfig':
        """小さな次数だけを安定性の再計算なしで扱う設定"""
        return cls(
            n_max=2,
            stability_check=False,
            certify_length=4,
            include_timing=False
        )

    @classmethod
    def create_strict(cls) -> 'WorkbenchConfig':
        """安定性の確認と分解の検証をすべて行う設定"""
        return cls(
            stability_check=True,
            certify_length=8,
            approximation_mode='universal'
        )
