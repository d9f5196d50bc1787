"""
Configuration management module
Manages environment variables, JSON config files and default values
"""

import json
import os
import re
import threading
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Callable, Dict, Optional

from dotenv import load_dotenv

from .error_handling import ConfigValidationError
from .utils.logging import get_sam_logger

logger = get_sam_logger(__name__)


@dataclass
class SolverSection:
    """Reference DDE solver configuration"""

    rel_tol: float = 1e-8
    abs_tol: float = 1e-10
    max_steps: int = 2_000_000
    initial_step: Optional[float] = None
    breakpoint_depth: int = 4
    safety: float = 0.9
    min_factor: float = 0.2
    max_factor: float = 5.0
    oscillatory_step_fraction: int = 8  # step cap T/8 on oscillatory references


@dataclass
class GridSection:
    """Macro/micro grid configuration"""

    feasibility_ratio: float = 2.0  # H >= ratio * T
    feasibility_slack: float = 0.02  # relative
    retain_micro: bool = False


@dataclass
class BenchSection:
    """Benchmark harness configuration"""

    cache_size: int = 64
    persist_references: bool = False
    cache_dir: str = ""  # empty -> platformdirs cache
    max_workers: int = 1
    timing_repeats: int = 3


@dataclass
class AveragingSection:
    """Averaged-system evaluator probes"""

    probe_count: int = 50
    h1_tolerance: float = 1e-10
    imag_tolerance: float = 1e-8
    fd_delta: float = 1e-6


_ENV_BINDINGS: Dict[str, tuple] = {
    "SAM_DDE_REL_TOL": ("solver", "rel_tol", float),
    "SAM_DDE_ABS_TOL": ("solver", "abs_tol", float),
    "SAM_DDE_MAX_STEPS": ("solver", "max_steps", int),
    "SAM_DDE_FEASIBILITY_RATIO": ("grid", "feasibility_ratio", float),
    "SAM_DDE_FEASIBILITY_SLACK": ("grid", "feasibility_slack", float),
    "SAM_DDE_CACHE_SIZE": ("bench", "cache_size", int),
    "SAM_DDE_PERSIST_REFERENCES": ("bench", "persist_references", None),
    "SAM_DDE_CACHE_DIR": ("bench", "cache_dir", str),
    "SAM_DDE_MAX_WORKERS": ("bench", "max_workers", int),
}


def _parse_bool(value: str) -> bool:
    return value.strip().lower() in ("1", "true", "yes", "on")


@dataclass
class Config:
    """Main configuration class"""

    solver: SolverSection = field(default_factory=SolverSection)
    grid: GridSection = field(default_factory=GridSection)
    bench: BenchSection = field(default_factory=BenchSection)
    averaging: AveragingSection = field(default_factory=AveragingSection)

    log_level: str = "INFO"
    seed: int = 0
    debug_mode: bool = False

    @classmethod
    def load(cls, config_path: Optional[str] = None, cli_args: Optional[Dict[str, Any]] = None) -> "Config":
        """
        Load configuration (CLI > environment variables > config.json > defaults)

          1. If --config is given, that file must exist
          2. Otherwise SAM_DDE_CONFIG_FILE, then ./config.json
          3. Environment variables (and a .env file) override the file
        """
        load_dotenv(override=False)
        config = cls()

        config_file: Optional[str] = None
        if config_path:
            if not Path(config_path).exists():
                raise ConfigValidationError("config", config_path, "file does not exist")
            config_file = config_path
        else:
            env_config = os.getenv("SAM_DDE_CONFIG_FILE")
            if env_config and Path(env_config).exists():
                config_file = env_config
            elif (Path.cwd() / "config.json").exists():
                config_file = str(Path.cwd() / "config.json")

        if config_file:
            config._load_from_file(config_file)

        config._load_from_env()

        if cli_args:
            if cli_args.get("log_level"):
                config.log_level = str(cli_args["log_level"])
            if cli_args.get("seed") is not None:
                config.seed = int(cli_args["seed"])
            if cli_args.get("workers") is not None:
                config.bench.max_workers = int(cli_args["workers"])

        config._validate()
        return config

    def _load_from_env(self) -> None:
        """Load configuration from environment variables"""
        for var, (section, key, cast) in _ENV_BINDINGS.items():
            raw = os.getenv(var)
            if raw is None or raw == "":
                continue
            convert: Callable[[str], Any] = cast or _parse_bool
            try:
                setattr(getattr(self, section), key, convert(expand_environment_variables(raw)))
            except ValueError as e:
                raise ConfigValidationError(f"{section}.{key}", raw, f"cannot parse {var}: {e}") from e

        self.log_level = os.getenv("LOG_LEVEL", self.log_level)
        if os.getenv("SAM_DDE_SEED"):
            self.seed = int(os.environ["SAM_DDE_SEED"])
        if os.getenv("DEBUG"):
            self.debug_mode = _parse_bool(os.environ["DEBUG"])

    def _load_from_file(self, config_path: str) -> None:
        """Load configuration from a JSON file"""
        try:
            with open(config_path, "r", encoding="utf-8") as f:
                config_data = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigValidationError("config", config_path, f"unreadable JSON: {e}") from e

        if not isinstance(config_data, dict):
            raise ConfigValidationError("config", config_path, "top level must be an object")

        config_data = expand_dict_env_vars(config_data)
        self._merge_config(config_data)
        logger.info(f"Configuration loaded from {config_path}", config_file=config_path)

    def _merge_config(self, config_data: Dict[str, Any]) -> None:
        """Merge configuration data; unknown sections and keys are rejected"""
        scalars = {"log_level", "seed", "debug_mode"}
        for section, values in config_data.items():
            if section in scalars:
                setattr(self, section, values)
                continue
            if section not in {f.name for f in fields(self)}:
                raise ConfigValidationError(section, values, "unknown configuration section")
            if not isinstance(values, dict):
                raise ConfigValidationError(section, values, "section must be an object")
            section_obj = getattr(self, section)
            known = {f.name for f in fields(section_obj)}
            for key, value in values.items():
                if key not in known:
                    raise ConfigValidationError(f"{section}.{key}", value, "unknown configuration key")
                setattr(section_obj, key, value)

    def _validate(self) -> None:
        """Validate configuration values"""
        if self.solver.rel_tol <= 0 or self.solver.abs_tol <= 0:
            raise ConfigValidationError("solver tolerances", (self.solver.rel_tol, self.solver.abs_tol), "must be > 0")
        if self.solver.max_steps < 1:
            raise ConfigValidationError("solver.max_steps", self.solver.max_steps, "must be >= 1")
        if not 0 < self.solver.min_factor < 1 < self.solver.max_factor:
            raise ConfigValidationError(
                "solver factors", (self.solver.min_factor, self.solver.max_factor), "need min < 1 < max"
            )
        if self.grid.feasibility_ratio < 1:
            raise ConfigValidationError("grid.feasibility_ratio", self.grid.feasibility_ratio, "must be >= 1")
        if not 0 <= self.grid.feasibility_slack < 1:
            raise ConfigValidationError("grid.feasibility_slack", self.grid.feasibility_slack, "must be in [0, 1)")
        if self.bench.cache_size < 1:
            raise ConfigValidationError("bench.cache_size", self.bench.cache_size, "must be >= 1")
        if self.bench.max_workers < 1:
            raise ConfigValidationError("bench.max_workers", self.bench.max_workers, "must be >= 1")
        if self.averaging.probe_count < 1:
            raise ConfigValidationError("averaging.probe_count", self.averaging.probe_count, "must be >= 1")

    def to_dict(self) -> Dict[str, Any]:
        """Get configuration in dictionary format"""
        return asdict(self)


def expand_environment_variables(text: str) -> str:
    """
    環境変数展開機能
    ${VAR_NAME} 形式の環境変数を展開する
    """

    def replace_env_var(match: Any) -> str:
        var_name = match.group(1)
        return os.getenv(var_name, match.group(0))  # 見つからない場合は元のまま

    return re.sub(r"\$\{([A-Za-z_][A-Za-z0-9_]*)\}", replace_env_var, text)


def expand_dict_env_vars(data: Any) -> Any:
    """
    辞書やリスト内の環境変数を再帰的に展開
    """
    if isinstance(data, dict):
        return {key: expand_dict_env_vars(value) for key, value in data.items()}
    elif isinstance(data, list):
        return [expand_dict_env_vars(item) for item in data]
    elif isinstance(data, str):
        return expand_environment_variables(data)
    return data


# Global configuration instance - Singleton pattern
_global_config: Optional[Config] = None
_config_lock = threading.Lock()


def get_config() -> Config:
    """
    Get global configuration instance (Singleton pattern)

    Returns:
        Config: The global configuration instance
    """
    global _global_config

    # Double-checked locking pattern for thread safety
    if _global_config is None:
        with _config_lock:
            if _global_config is None:
                _global_config = Config.load()
                logger.debug("Initialized global Config singleton")

    return _global_config


def set_config(config: Config) -> None:
    """
    Set global configuration instance

    Args:
        config: Configuration instance to set as global
    """
    global _global_config
    with _config_lock:
        _global_config = config


def initialize_config(config_path: Optional[str] = None, cli_args: Optional[Dict[str, Any]] = None) -> Config:
    """
    Initialize global configuration with specific config file

    Args:
        config_path: Path to configuration file (optional)
        cli_args: Command line overrides (log_level, seed, workers)

    Returns:
        Config: The initialized configuration instance
    """
    global _global_config
    with _config_lock:
        _global_config = Config.load(config_path, cli_args)
        logger.info(f"Initialized global Config from {config_path or 'default locations'}")
    return _global_config
