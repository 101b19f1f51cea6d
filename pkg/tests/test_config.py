"""Tests for configuration management."""

import os
import pytest
from unittest.mock import patch
from pydantic import ValidationError

from src.cp_branching.config.settings import PackingSettings, get_settings


class TestPackingSettings:
    """Test packing settings and validation."""

    def test_default_settings(self):
        """Test default configuration values."""
        settings = PackingSettings()

        assert settings.tol == 1e-8
        assert settings.max_iters == 50_000
        assert settings.zero_floor == 1e-9
        assert settings.sweep_mode == "gauss_seidel"
        assert settings.holonomy_tol == 1e-6
        assert settings.winding_slack == 0.05
        assert settings.scan_samples == 33
        assert settings.scan_workers == 4
        assert settings.scan_executor == "thread"
        assert settings.seed == 0
        assert settings.log_level == "WARNING"

    def test_environment_override(self):
        """Test CPB_ environment variable overrides."""
        with patch.dict(os.environ, {
            'CPB_TOL': '1e-10',
            'CPB_MAX_ITERS': '200',
            'CPB_SWEEP_MODE': 'JACOBI',
            'CPB_SCAN_EXECUTOR': 'process',
            'CPB_LOG_LEVEL': 'debug',
        }):
            settings = PackingSettings()

            assert settings.tol == 1e-10
            assert settings.max_iters == 200
            assert settings.sweep_mode == "jacobi"
            assert settings.scan_executor == "process"
            assert settings.log_level == "DEBUG"

    def test_validation_errors(self):
        """Test configuration validation."""
        with patch.dict(os.environ, {'CPB_TOL': '0'}):
            with pytest.raises(ValidationError):
                PackingSettings()

        with patch.dict(os.environ, {'CPB_TOL': '0.5'}):
            with pytest.raises(ValidationError):
                PackingSettings()

        with patch.dict(os.environ, {'CPB_MAX_ITERS': '0'}):
            with pytest.raises(ValidationError):
                PackingSettings()

        with patch.dict(os.environ, {'CPB_SWEEP_MODE': 'newton'}):
            with pytest.raises(ValidationError):
                PackingSettings()

        with patch.dict(os.environ, {'CPB_SCAN_SAMPLES': '2'}):
            with pytest.raises(ValidationError):
                PackingSettings()

        with patch.dict(os.environ, {'CPB_LOG_LEVEL': 'INVALID'}):
            with pytest.raises(ValidationError):
                PackingSettings()

    def test_worker_limits(self):
        """Test worker count bounds."""
        assert PackingSettings(scan_workers=1).scan_workers == 1
        assert PackingSettings(sweep_workers=64).sweep_workers == 64

        with pytest.raises(ValidationError):
            PackingSettings(scan_workers=0)
        with pytest.raises(ValidationError):
            PackingSettings(sweep_workers=65)

    def test_winding_slack_range(self):
        """Winding slack must stay strictly inside (0, 0.5)."""
        assert PackingSettings(winding_slack=0.1).winding_slack == 0.1
        with pytest.raises(ValidationError):
            PackingSettings(winding_slack=0.5)

    def test_out_dir_created(self, tmp_path):
        """Test output directory is created on validation."""
        target = tmp_path / "nested" / "out"
        settings = PackingSettings(out_dir=str(target))

        assert settings.out_dir == str(target)
        assert target.is_dir()

    def test_config_generators(self):
        """Test configuration dict generators."""
        settings = PackingSettings(sweep_workers=3, scan_workers=2)

        solver_config = settings.get_solver_config()
        assert solver_config == {
            "tol": 1e-8,
            "max_iters": 50_000,
            "zero_floor": 1e-9,
            "sweep_mode": "gauss_seidel",
            "workers": 3,
        }

        layout_config = settings.get_layout_config()
        assert set(layout_config) == {"holonomy_tol", "winding_slack"}

        scan_config = settings.get_scan_config()
        assert scan_config["max_workers"] == 2
        assert scan_config["executor"] == "thread"
        assert scan_config["samples"] == 33

    def test_log_file_path(self):
        """Test log file path handling."""
        settings = PackingSettings()
        assert settings.get_log_file_path() is None

        with patch.dict(os.environ, {'CPB_LOG_FILE': 'logs/cpb.log'}):
            settings = PackingSettings()
            log_path = settings.get_log_file_path()
            assert log_path is not None
            assert str(log_path) == 'logs/cpb.log'


class TestSettingsCache:
    """Test settings caching functionality."""

    def test_settings_caching(self):
        """Test that get_settings() returns cached instance."""
        get_settings.cache_clear()

        settings1 = get_settings()
        settings2 = get_settings()

        assert settings1 is settings2

    def test_cache_with_environment_changes(self):
        """Test cache behavior with environment changes."""
        get_settings.cache_clear()

        settings1 = get_settings()
        initial_tol = settings1.tol

        with patch.dict(os.environ, {'CPB_TOL': '1e-6'}):
            settings2 = get_settings()
            assert settings2.tol == initial_tol

        get_settings.cache_clear()
        with patch.dict(os.environ, {'CPB_TOL': '1e-6'}):
            settings3 = get_settings()
            assert settings3.tol == 1e-6

        get_settings.cache_clear()


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
