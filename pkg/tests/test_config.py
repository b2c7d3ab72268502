"""
設定管理のテストコード
"""

import os
from pathlib import Path
from unittest.mock import patch

import pytest

from src.config import FIXTURES_ENV, WorkbenchConfig


class TestWorkbenchConfig:
    """WorkbenchConfigクラスのテスト"""

    def test_defaults(self):
        config = WorkbenchConfig()
        assert config.p == 101
        assert config.n_max == 4
        assert config.approximation_mode == 'pruned'
        assert config.stability_check is True
        assert config.tor_resolve == 'right'
        assert config.workers == 1
        assert config.max_file_size == 10 * 1024 * 1024
        assert 'shift_jis' in config.supported_encodings

    def test_factories(self):
        fast = WorkbenchConfig.create_fast()
        assert fast.n_max == 2
        assert fast.stability_check is False
        assert fast.include_timing is False

        strict = WorkbenchConfig.create_strict()
        assert strict.approximation_mode == 'universal'
        assert strict.stability_check is True

        assert WorkbenchConfig.create_default() == WorkbenchConfig()

    @pytest.mark.parametrize("changes", [
        {"approximation_mode": "minimal"},
        {"tor_resolve": "both"},
        {"n_max": 0},
        {"n_max": 20},
        {"workers": 0},
    ])
    def test_invalid_values(self, changes):
        with pytest.raises(ValueError):
            WorkbenchConfig(**changes)

    def test_setting_names(self):
        names = WorkbenchConfig.setting_names()
        assert 'n_max' in names
        assert 'fixtures_dir' in names


class TestFromSources:
    """from_sources の優先順位のテスト"""

    def test_flags_override_file_settings(self):
        config, unknown = WorkbenchConfig.from_sources(
            {"n_max": 3, "workers": 2}, n_max=5
        )
        assert config.n_max == 5
        assert config.workers == 2
        assert unknown == []

    def test_none_flags_are_skipped(self):
        config, _ = WorkbenchConfig.from_sources({"n_max": 3}, n_max=None)
        assert config.n_max == 3

    def test_unknown_file_keys_are_reported(self):
        config, unknown = WorkbenchConfig.from_sources({"zeta": 1, "colour": "blue"})
        assert unknown == ["colour", "zeta"]
        assert config == WorkbenchConfig()

    def test_unknown_flag(self):
        with pytest.raises(ValueError):
            WorkbenchConfig.from_sources({}, colour="blue")

    def test_invalid_file_value(self):
        with pytest.raises(ValueError):
            WorkbenchConfig.from_sources({"approximation_mode": "minimal"})


class TestFixturesDir:
    """付属レジストリのディレクトリ解決のテスト"""

    def test_default_location(self):
        with patch.dict(os.environ, {}, clear=False):
            os.environ.pop(FIXTURES_ENV, None)
            config = WorkbenchConfig()
        assert config.fixtures_dir.resolve() == (Path(__file__).parent.parent / 'fixtures').resolve()
        assert (config.fixtures_dir / 'k_t2.json').exists()

    def test_environment_variable(self):
        with patch.dict(os.environ, {FIXTURES_ENV: '/tmp/registries'}):
            config = WorkbenchConfig()
        assert config.fixtures_dir == Path('/tmp/registries')

    def test_explicit_value_wins(self):
        with patch.dict(os.environ, {FIXTURES_ENV: '/tmp/registries'}):
            config = WorkbenchConfig(fixtures_dir='/srv/data')
        assert config.fixtures_dir == Path('/srv/data')
