"""
ファイル読み込み専用モジュール
レジストリ JSON の読み込み（エンコーディング自動検出）と ObjectRegistry への変換を担当
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import chardet
import numpy as np

from .algmod import AlgebraPresentation, FdModule, ObjectRegistry
from .config import WorkbenchConfig
from .errors import DimensionMismatchError, RegistryFormatError
from .exactla import FieldSpec


logger = logging.getLogger(__name__)


class RegistryReader:
    """レジストリファイル読み込み専用クラス"""

    def __init__(self, config: Optional[WorkbenchConfig] = None):
        self.config = config or WorkbenchConfig.create_default()
        # フォールバックで試すエンコーディング（既定のエンコーディングを先頭に、重複なし）
        default = self.config.default_encoding
        self.supported_encodings = [default] + [
            e for e in self.config.supported_encodings if e != default
        ]

    def read_file(self, file_path: Path, p: Optional[int] = None) -> ObjectRegistry:
        """レジストリファイルを読み込んで ObjectRegistry を返す

        Args:
            file_path: レジストリファイル（.json）
            p: 指定した場合はファイルの field.p より優先する

        Raises:
            FileNotFoundError: ファイルが存在しない
            ValueError: 対応していない形式、サイズ超過、エンコーディング不明
            RegistryFormatError: 内容の形式エラー
        """
        file_path = Path(file_path)
        data = self.load_json(file_path)
        return self.build_registry(data, p=p, default_name=file_path.stem)

    def load_json(self, file_path: Path) -> Dict[str, Any]:
        """JSON を辞書として読み込む（構文エラーは行・列付き）"""
        file_path = Path(file_path)
        if not file_path.exists():
            raise FileNotFoundError(f"ファイルが見つかりません: {file_path}")
        if file_path.suffix.lower() not in self.get_supported_extensions():
            raise ValueError(f"対応していない形式: {file_path.suffix}")
        size = file_path.stat().st_size
        if size > self.config.max_file_size:
            raise ValueError(
                f"ファイルサイズが上限を超えています: {size} > {self.config.max_file_size}"
            )
        text = self._read_text_file(file_path)
        return self.parse_text(text)

    def parse_text(self, text: str) -> Dict[str, Any]:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise RegistryFormatError(f"JSON の構文エラー: {e.msg}", line=e.lineno, column=e.colno) from e
        if not isinstance(data, dict):
            raise RegistryFormatError("最上位はオブジェクトである必要があります", location="$")
        return data

    def _read_text_file(self, file_path: Path) -> str:
        """テキストファイルを読み込み（エンコーディング自動検出）"""
        detected_encoding = self._detect_encoding_with_chardet(file_path)
        if detected_encoding:
            try:
                with open(file_path, 'r', encoding=detected_encoding) as f:
                    return f.read()
            except (UnicodeDecodeError, LookupError):
                pass

        # chardet が失敗した場合はフォールバック
        return self._read_with_fallback_encodings(file_path)

    def _detect_encoding_with_chardet(self, file_path: Path) -> Optional[str]:
        """chardetライブラリを使用してエンコーディングを検出"""
        if not self.config.enable_chardet:
            return None
        try:
            with open(file_path, 'rb') as f:
                file_size = file_path.stat().st_size
                sample_size = min(file_size, self.config.encoding_detection_sample_size)
                raw_data = f.read(sample_size)

                if not raw_data:
                    return None

                result = chardet.detect(raw_data)

                if result and (result.get('confidence') or 0) > self.config.encoding_confidence_threshold:
                    return self._normalize_encoding_name(result['encoding'])

        except OSError as e:
            logger.debug("エンコーディング検出に失敗: %s", e)

        return None

    def _normalize_encoding_name(self, encoding: Optional[str]) -> Optional[str]:
        """chardetの結果をPythonの標準エンコーディング名に正規化"""
        if not encoding:
            return None

        mapping = {
            'ascii': 'utf-8',
            'shift_jis': 'shift_jis',
            'shift-jis': 'shift_jis',
            'sjis': 'shift_jis',
            'cp932': 'cp932',
            'windows-31j': 'cp932',
            'euc-jp': 'euc-jp',
            'eucjp': 'euc-jp',
            'iso-2022-jp': 'iso-2022-jp',
            'utf-8': 'utf-8',
            'utf8': 'utf-8',
            'utf-8-sig': 'utf-8-sig',
        }

        return mapping.get(encoding.lower(), encoding)

    def _read_with_fallback_encodings(self, file_path: Path) -> str:
        """フォールバックエンコーディングリストで順次試行"""
        last_error = None

        for encoding in self.supported_encodings:
            try:
                with open(file_path, 'r', encoding=encoding) as f:
                    return f.read()
            except UnicodeDecodeError as e:
                last_error = e
                continue

        raise ValueError(
            f"ファイルのエンコーディングを特定できませんでした: {file_path}\n"
            f"最後のエラー: {last_error}"
        )

    def get_supported_extensions(self) -> List[str]:
        return ['.json']

    def is_supported_file(self, file_path: Path) -> bool:
        return Path(file_path).suffix.lower() in self.get_supported_extensions()

    # --- 辞書から ObjectRegistry への変換 ---

    def build_registry(
        self, data: Dict[str, Any], p: Optional[int] = None, default_name: str = 'registry'
    ) -> ObjectRegistry:
        field_spec = self._parse_field(data.get('field'), p)
        algebra = self._parse_algebra(data.get('algebra'), field_spec)
        modules = self._parse_modules(data.get('modules', []), algebra)
        x_members = self._parse_names(data.get('x_members', []), 'x_members')
        subcategories = {}
        raw_subs = data.get('subcategories', {})
        if not isinstance(raw_subs, dict):
            raise RegistryFormatError("オブジェクトである必要があります", location='subcategories')
        for label, members in raw_subs.items():
            subcategories[label] = self._parse_names(members, f'subcategories.{label}')
        fixtures = data.get('fixtures', {})
        settings = data.get('settings', {})
        for key, value in (('fixtures', fixtures), ('settings', settings)):
            if not isinstance(value, dict):
                raise RegistryFormatError("オブジェクトである必要があります", location=key)
        name = data.get('name', default_name)
        if not isinstance(name, str):
            raise RegistryFormatError("文字列である必要があります", location='name')
        logger.debug(
            "レジストリ %s: 代数の次元 %d, 加群 %d 個, p = %d",
            name, algebra.dim, len(modules), field_spec.p
        )
        return ObjectRegistry(
            algebra=algebra,
            modules=modules,
            x_members=x_members,
            name=name,
            subcategories=subcategories,
            fixtures=fixtures,
            settings=settings,
        )

    def _parse_field(self, raw: Any, p: Optional[int]) -> FieldSpec:
        if p is None:
            if raw is None:
                p = self.config.p
            elif isinstance(raw, dict) and isinstance(raw.get('p', self.config.p), int):
                p = raw.get('p', self.config.p)
            else:
                raise RegistryFormatError("整数の p を持つオブジェクトである必要があります", location='field')
        try:
            return FieldSpec(p)
        except ValueError as e:
            raise RegistryFormatError(str(e), location='field.p') from e

    def _parse_names(self, raw: Any, location: str) -> Tuple[str, ...]:
        if not isinstance(raw, list) or not all(isinstance(n, str) for n in raw):
            raise RegistryFormatError("文字列のリストである必要があります", location=location)
        return tuple(raw)

    def _parse_coefficients(self, raw: Any, basis: Tuple[str, ...], location: str) -> np.ndarray:
        if not isinstance(raw, dict):
            raise RegistryFormatError("{基底名: 係数} の形である必要があります", location=location)
        vec = np.zeros(len(basis), dtype=np.int64)
        for key, value in raw.items():
            if key not in basis:
                raise RegistryFormatError(f"未知の基底名です: {key}", location=f'{location}.{key}')
            if not isinstance(value, int) or isinstance(value, bool):
                raise RegistryFormatError("係数は整数である必要があります", location=f'{location}.{key}')
            vec[basis.index(key)] = value
        return vec

    def _parse_algebra(self, raw: Any, field_spec: FieldSpec) -> AlgebraPresentation:
        if not isinstance(raw, dict):
            raise RegistryFormatError("algebra がありません", location='algebra')
        basis = raw.get('basis')
        if not isinstance(basis, list) or not basis or not all(isinstance(b, str) for b in basis):
            raise RegistryFormatError("空でない文字列のリストである必要があります", location='algebra.basis')
        if len(set(basis)) != len(basis):
            raise RegistryFormatError("基底名が重複しています", location='algebra.basis')
        basis = tuple(basis)
        d = len(basis)

        mult = np.zeros((d, d, d), dtype=np.int64)
        products = raw.get('products', {})
        if not isinstance(products, dict):
            raise RegistryFormatError("オブジェクトである必要があります", location='algebra.products')
        for key, value in products.items():
            location = f'algebra.products.{key}'
            parts = [part.strip() for part in key.split('*')]
            if len(parts) != 2 or any(part not in basis for part in parts):
                raise RegistryFormatError("キーは \"x*y\"（x, y は基底名）の形である必要があります", location=location)
            i, j = basis.index(parts[0]), basis.index(parts[1])
            mult[i, j] = self._parse_coefficients(value, basis, location)

        if 'unit' not in raw:
            raise RegistryFormatError("単位元がありません", location='algebra.unit')
        unit = self._parse_coefficients(raw['unit'], basis, 'algebra.unit')
        return AlgebraPresentation(field=field_spec, basis_names=basis, mult=mult, unit=unit)

    def _parse_matrix(self, raw: Any, dim: int, location: str) -> np.ndarray:
        if not isinstance(raw, list) or len(raw) != dim:
            raise RegistryFormatError(f"{dim} 行の行列である必要があります", location=location)
        for r, row in enumerate(raw):
            if not isinstance(row, list) or len(row) != dim:
                raise RegistryFormatError(f"{dim} 列である必要があります", location=f'{location}[{r}]')
            if not all(isinstance(v, int) and not isinstance(v, bool) for v in row):
                raise RegistryFormatError("成分は整数である必要があります", location=f'{location}[{r}]')
        return np.array(raw, dtype=np.int64).reshape(dim, dim)

    def _parse_modules(self, raw: Any, algebra: AlgebraPresentation) -> Dict[str, FdModule]:
        if not isinstance(raw, list):
            raise RegistryFormatError("リストである必要があります", location='modules')
        modules: Dict[str, FdModule] = {}
        for k, entry in enumerate(raw):
            location = f'modules[{k}]'
            if not isinstance(entry, dict):
                raise RegistryFormatError("オブジェクトである必要があります", location=location)
            name = entry.get('name')
            if not isinstance(name, str) or not name:
                raise RegistryFormatError("name がありません", location=f'{location}.name')
            if name in modules:
                raise RegistryFormatError(f"加群名が重複しています: {name}", location=f'{location}.name')
            if entry.get('regular'):
                modules[name] = algebra.regular_module(name)
                continue
            dim = entry.get('dim')
            if not isinstance(dim, int) or isinstance(dim, bool) or dim < 0:
                raise RegistryFormatError("0以上の整数である必要があります", location=f'{location}.dim')
            action_raw = entry.get('action', {})
            if not isinstance(action_raw, dict):
                raise RegistryFormatError("オブジェクトである必要があります", location=f'{location}.action')
            action = [np.zeros((dim, dim), dtype=np.int64) for _ in range(algebra.dim)]
            for key, matrix in action_raw.items():
                if key not in algebra.basis_names:
                    raise RegistryFormatError(f"未知の基底名です: {key}", location=f'{location}.action.{key}')
                action[algebra.index(key)] = self._parse_matrix(matrix, dim, f'{location}.action.{key}')
            try:
                modules[name] = FdModule(name=name, algebra=algebra, action=tuple(action))
            except DimensionMismatchError as e:
                raise RegistryFormatError(str(e), location=location) from e
        return modules
