"""Application settings and configuration management."""

from functools import lru_cache
from pathlib import Path
from typing import Optional

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class PackingSettings(BaseSettings):
    """Numerical and runtime configuration for packing computations."""

    model_config = SettingsConfigDict(
        env_prefix="CPB_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # Solver Configuration
    tol: float = Field(default=1e-8, description="Angle-sum residual tolerance")
    max_iters: int = Field(default=50_000, description="Maximum solver sweeps")
    zero_floor: float = Field(default=1e-9, description="Free labels below this abort the solve")
    sweep_mode: str = Field(default="gauss_seidel", description="gauss_seidel or jacobi")
    sweep_workers: int = Field(default=1, description="Threads used by jacobi sweeps")

    # Layout Configuration
    holonomy_tol: float = Field(default=1e-6, description="Triviality threshold for holonomy")
    winding_slack: float = Field(default=0.05, description="Allowed fractional part of a winding")

    # Parameter Scan Configuration
    scan_samples: int = Field(default=33, description="Coarse scan samples for holonomy search")
    scan_workers: int = Field(default=4, description="Concurrent scan evaluations")
    scan_executor: str = Field(default="thread", description="thread or process")
    seed: int = Field(default=0, description="Seed for sampled property scans")

    # Output Configuration
    out_dir: str = Field(default="./cpb_out", description="Directory for reports and renders")

    # Logging Configuration
    log_level: str = Field(default="WARNING")
    log_file: Optional[str] = Field(default=None)

    @field_validator("tol", "holonomy_tol", "zero_floor")
    @classmethod
    def validate_tolerance(cls, v: float) -> float:
        """Tolerances must be positive and small."""
        if v <= 0:
            raise ValueError("tolerance must be positive")
        if v >= 1e-2:
            raise ValueError("tolerance should be below 1e-2")
        return v

    @field_validator("max_iters")
    @classmethod
    def validate_max_iters(cls, v: int) -> int:
        if v < 1:
            raise ValueError("max_iters must be at least 1")
        return v

    @field_validator("sweep_mode")
    @classmethod
    def validate_sweep_mode(cls, v: str) -> str:
        v_lower = v.lower()
        if v_lower not in ("gauss_seidel", "jacobi"):
            raise ValueError(f"Invalid sweep mode: {v}. Must be gauss_seidel or jacobi")
        return v_lower

    @field_validator("sweep_workers", "scan_workers")
    @classmethod
    def validate_workers(cls, v: int) -> int:
        if v < 1:
            raise ValueError("worker count must be at least 1")
        if v > 64:
            raise ValueError("worker count should not exceed 64")
        return v

    @field_validator("scan_samples")
    @classmethod
    def validate_scan_samples(cls, v: int) -> int:
        if v < 3:
            raise ValueError("scan_samples must be at least 3")
        return v

    @field_validator("scan_executor")
    @classmethod
    def validate_scan_executor(cls, v: str) -> str:
        v_lower = v.lower()
        if v_lower not in ("thread", "process"):
            raise ValueError(f"Invalid executor: {v}. Must be thread or process")
        return v_lower

    @field_validator("winding_slack")
    @classmethod
    def validate_winding_slack(cls, v: float) -> float:
        if not 0 < v < 0.5:
            raise ValueError("winding_slack must lie in (0, 0.5)")
        return v

    @field_validator("out_dir")
    @classmethod
    def validate_out_dir(cls, v: str) -> str:
        """Ensure output directory exists."""
        Path(v).mkdir(parents=True, exist_ok=True)
        return v

    @field_validator("log_level")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        """Validate log level."""
        valid_levels = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
        v_upper = v.upper()
        if v_upper not in valid_levels:
            raise ValueError(f"Invalid log level: {v}. Must be one of {valid_levels}")
        return v_upper

    def get_log_file_path(self) -> Optional[Path]:
        """Get log file path."""
        if not self.log_file:
            return None
        return Path(self.log_file)

    def get_solver_config(self) -> dict:
        """Keyword arguments for solve_label."""
        return {
            "tol": self.tol,
            "max_iters": self.max_iters,
            "zero_floor": self.zero_floor,
            "sweep_mode": self.sweep_mode,
            "workers": self.sweep_workers,
        }

    def get_layout_config(self) -> dict:
        """Thresholds used by holonomy and winding checks."""
        return {
            "holonomy_tol": self.holonomy_tol,
            "winding_slack": self.winding_slack,
        }

    def get_scan_config(self) -> dict:
        """Configuration dict for ScanManager initialization."""
        return {
            "max_workers": self.scan_workers,
            "executor": self.scan_executor,
            "samples": self.scan_samples,
        }


@lru_cache()
def get_settings() -> PackingSettings:
    """Get application settings (cached)."""
    return PackingSettings()
