"""
Configuration for thermoporo

Two layers:
- ToolkitSettings: process-level settings from the environment and .env
  (sweep parallelism, logging)
- RunConfig: one run's parameters, read from a sectioned ``key = value``
  file, overridden with ``--set section.key=value`` and validated by
  pydantic models that reject unknown keys

Run-config sections:
- dimensional: physical coefficients (see DimensionalParams)
- scales: characteristic length L and velocity V
- ck: Carman-Kozeny constant C_k and cell-diameter parameter D_c
- solver: grid sizes and convergence settings
- scenario: model selection and its switches
- transient: radial simulation setup
- output: directory and number format
"""

import difflib
import os
from functools import lru_cache
from pathlib import Path
from typing import Any, Literal, Optional, Sequence, Union

from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    ValidationError,
    field_validator,
    model_validator,
)
from pydantic_settings import BaseSettings, SettingsConfigDict

from .error_handler import ConfigError
from .logger import get_logger
from .parameters import FIGURE_CASES, DimensionalParams
from .transient import SCENARIOS, CouplingFlags, TransientConfig, scenario_config

logger = get_logger(__name__)

MAX_DEFAULT_THREADS = 8
VALID_LOG_LEVELS = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]


def _default_threads() -> int:
    return max(1, min(os.cpu_count() or 1, MAX_DEFAULT_THREADS))


class ToolkitSettings(BaseSettings):
    """
    Process-level settings loaded from environment variables and .env file.

    Environment variables use the THERMOPORO_ prefix, e.g. THERMOPORO_THREADS=4.
    """

    model_config = SettingsConfigDict(
        env_prefix="THERMOPORO_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    threads: int = Field(
        default_factory=_default_threads,
        gt=0,
        description="Maximum number of sweep cases solved concurrently",
    )
    log_level: str = Field(
        default="INFO",
        description="Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)",
    )
    log_format: Literal["text", "json"] = Field(
        default="text",
        description="Log line format: key=value text or JSON lines",
    )

    @field_validator("log_level")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        """
        Validate log level is a standard Python logging level.

        Raises:
            ValueError: If log level is not recognized
        """
        if v.upper() not in VALID_LOG_LEVELS:
            raise ValueError(f"log_level must be one of {VALID_LOG_LEVELS}")
        return v.upper()


@lru_cache()
def get_settings() -> ToolkitSettings:
    """
    Get cached settings instance (singleton pattern).

    Returns:
        ToolkitSettings: Process settings

    Raises:
        ValidationError: If an environment value is invalid
    """
    return ToolkitSettings()


def _check_odd(v: int, name: str) -> int:
    if v % 2 == 0:
        raise ValueError(f"{name} must be odd (Simpson-compatible), got {v}")
    return v


class SolverSection(BaseModel):
    """Grid sizes and convergence settings."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    grid_nodes: int = Field(default=201, ge=5, description="Nodes of the steady 1D grid")
    converge_grids: list[int] = Field(
        default=[101, 201, 401], description="Grid sizes of the convergence study"
    )
    min_order: float = Field(
        default=1.5, gt=0, description="Lowest acceptable observed order for second-order models"
    )
    residual_tolerance: float = Field(
        default=1e-10, gt=0, description="Relative residual accepted after a linear solve"
    )

    @field_validator("grid_nodes")
    @classmethod
    def validate_grid_nodes(cls, v: int) -> int:
        return _check_odd(v, "grid_nodes")

    @field_validator("converge_grids")
    @classmethod
    def validate_converge_grids(cls, v: list[int]) -> list[int]:
        for n in v:
            _check_odd(n, "converge_grids entries")
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("converge_grids must be strictly increasing")
        return v


class ScenarioSection(BaseModel):
    """Which model to run and its switches."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    model: Literal["spherical", "cartesian", "thermal", "transient"] = Field(
        default="thermal", description="Model pipeline run by 'solve'"
    )
    xi: int = Field(default=1, ge=0, le=1, description="Thermal coupling of the displacement")
    flow: Literal["closed_form", "zero"] = Field(
        default="closed_form", description="Fluid velocity driving the thermal solve"
    )
    figure: Optional[str] = Field(
        default=None, description="Named parameter case; explicit [dimensional] values win"
    )
    quadrature_nodes: int = Field(default=101, ge=3, description="Simpson nodes for Q_t")
    lam: Optional[float] = Field(default=None, gt=0, description="Spherical eigenvalue override")
    varrho: Optional[float] = Field(
        default=None, gt=0, description="Spherical elasticity constant; auto is 2 + lambda2"
    )
    snapshot_times: list[float] = Field(
        default=[0.0, 1800.0, 3600.0, 5400.0, 7200.0],
        description="Transient snapshot times in seconds",
    )

    @field_validator("quadrature_nodes")
    @classmethod
    def validate_quadrature_nodes(cls, v: int) -> int:
        return _check_odd(v, "quadrature_nodes")

    @field_validator("figure")
    @classmethod
    def validate_figure(cls, v: Optional[str]) -> Optional[str]:
        if v is not None and v not in FIGURE_CASES:
            raise ValueError(f"figure must be one of {sorted(FIGURE_CASES)}")
        return v


class TransientSection(BaseModel):
    """Radial simulation setup (SI units)."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    preset: Optional[str] = Field(default=None, description="Scenario preset applied on top")
    radius: float = Field(default=1.0, gt=0, description="Domain radius (m)")
    t_end: float = Field(default=7200.0, gt=0, description="Time horizon (s)")
    dt: float = Field(default=60.0, gt=0, description="Time step (s)")
    n_nodes: int = Field(default=101, ge=5, description="Radial grid nodes")
    dim: int = Field(default=2, ge=2, le=3, description="Spatial dimension of the radial Laplacian")
    robin_alpha_f: float = Field(default=10.0, ge=0, description="Fluid external exchange")
    robin_alpha_s: float = Field(default=10.0, ge=0, description="Solid external exchange")
    ambient_f: float = Field(default=310.0, description="Fluid ambient temperature (K)")
    ambient_s: float = Field(default=315.0, description="Solid ambient temperature (K)")
    initial_theta_f: float = Field(default=310.0, description="Initial fluid temperature (K)")
    theta_s_base: float = Field(default=300.0, description="Initial solid temperature base (K)")
    theta_s_amplitude: float = Field(default=15.0, description="Amplitude of the pw1 bump (K)")
    pw1: list[float] = Field(
        default=[0.0, 0.0, 0.25, 0.0, 0.4, 1.0, 0.6, 1.0, 0.75, 0.0, 1.0, 0.0],
        description="Breakpoints of pw1 as r1, value1, r2, value2, ...",
    )
    outer_velocity_gradient: float = Field(default=1.0, description="dV_f/dr at r = R (1/s)")
    implicitness: float = Field(
        default=1.0, ge=0.5, le=1.0, description="1 = backward Euler, 0.5 = Crank-Nicolson"
    )
    dissipation_on: bool = Field(default=False, description="Dissipation terms")
    drag_on: bool = Field(default=False, description="Interphase drag")
    inertia_on: bool = Field(default=False, description="Inertia in the momentum equations")
    exchange_on: bool = Field(default=True, description="Interphase heat exchange")

    @field_validator("pw1")
    @classmethod
    def validate_pw1(cls, v: list[float]) -> list[float]:
        if len(v) % 2 or len(v) < 4:
            raise ValueError("pw1 needs an even number of values (at least two r, value pairs)")
        return v

    @field_validator("preset")
    @classmethod
    def validate_preset(cls, v: Optional[str]) -> Optional[str]:
        if v is not None and v not in SCENARIOS:
            raise ValueError(f"preset must be one of {list(SCENARIOS)}")
        return v


class OutputSection(BaseModel):
    """Where and how results are written."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    directory: str = Field(default="out", description="Output directory")
    precision: int = Field(default=17, ge=1, le=17, description="Significant digits in CSV")


SCALE_KEYS = ("L", "V")
CK_KEYS = ("C_k", "D_c")
DIMENSIONAL_KEYS = tuple(
    k for k in DimensionalParams.model_fields if k not in SCALE_KEYS + CK_KEYS
)

SECTION_MODELS: dict[str, type[BaseModel]] = {
    "solver": SolverSection,
    "scenario": ScenarioSection,
    "transient": TransientSection,
    "output": OutputSection,
}

SECTION_KEYS: dict[str, tuple[str, ...]] = {
    "dimensional": DIMENSIONAL_KEYS,
    "scales": SCALE_KEYS,
    "ck": CK_KEYS,
    **{name: tuple(model.model_fields) for name, model in SECTION_MODELS.items()},
}

# Values not taken from the tabulated parameter set
INFERRED_KEYS = {
    ("scales", "L"): "characteristic length, not tabulated",
    ("scales", "V"): "characteristic velocity, not tabulated",
    ("dimensional", "P_a"): "chosen so that a1/a2 = 1 at the default scales",
    ("dimensional", "a0"): "transmural conductance, not tabulated",
    ("dimensional", "alpha_s_exp"): "expansion coefficient, not tabulated",
    ("ck", "C_k"): "auto selects 2 for phi_f >= 0.9, otherwise 4",
}

_NONE_WORDS = {"auto", "none"}

LIST_KEYS = {
    ("solver", "converge_grids"),
    ("scenario", "snapshot_times"),
    ("transient", "pw1"),
}

# Setting one volume fraction alone re-derives the other
_CLOSURE_PARTNER = {"phi_f": "phi_s", "phi_s": "phi_f"}


class RunConfig(BaseModel):
    """Fully resolved configuration of one run."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    dimensional: DimensionalParams = Field(default_factory=DimensionalParams)
    solver: SolverSection = Field(default_factory=SolverSection)
    scenario: ScenarioSection = Field(default_factory=ScenarioSection)
    transient: TransientSection = Field(default_factory=TransientSection)
    output: OutputSection = Field(default_factory=OutputSection)

    @model_validator(mode="before")
    @classmethod
    def apply_figure_case(cls, data: Any) -> Any:
        """
        Fill dimensional values from the named figure case.

        Values given explicitly in [dimensional] win over the case; a case
        volume fraction is skipped when either fraction was given.
        """
        if not isinstance(data, dict):
            return data
        scenario = data.get("scenario")
        if isinstance(scenario, dict):
            figure = scenario.get("figure")
        else:
            figure = getattr(scenario, "figure", None)
        if figure not in FIGURE_CASES:
            return data

        dims = data.get("dimensional")
        if isinstance(dims, DimensionalParams):
            given = dims.model_dump(include=dims.model_fields_set)
        else:
            given = dict(dims or {})
        filled = []
        for key, value in FIGURE_CASES[figure].items():
            partner = _CLOSURE_PARTNER.get(key)
            if given.get(key) is None and (partner is None or given.get(partner) is None):
                given[key] = value
                filled.append(key)
        logger.debug(
            f"Figure case {figure} applied",
            extra={"figure": figure, "filled": filled},
        )
        return {**data, "dimensional": given}

    def params(self) -> DimensionalParams:
        """Dimensional parameters of the run, figure case included."""
        return self.dimensional

    def transient_config(self) -> TransientConfig:
        """Build the simulator configuration, applying the preset if one is set."""
        t = self.transient
        cfg = TransientConfig(
            radius=t.radius,
            t_end=t.t_end,
            dt=t.dt,
            n_nodes=t.n_nodes,
            dim=t.dim,
            robin_alpha_f=t.robin_alpha_f,
            robin_alpha_s=t.robin_alpha_s,
            ambient_f=t.ambient_f,
            ambient_s=t.ambient_s,
            initial_theta_f=t.initial_theta_f,
            theta_s_base=t.theta_s_base,
            theta_s_amplitude=t.theta_s_amplitude,
            pw1=tuple((t.pw1[i], t.pw1[i + 1]) for i in range(0, len(t.pw1), 2)),
            outer_velocity_gradient=t.outer_velocity_gradient,
            implicitness=t.implicitness,
            coupling=CouplingFlags(
                dissipation_on=t.dissipation_on,
                drag_on=t.drag_on,
                inertia_on=t.inertia_on,
                exchange_on=t.exchange_on,
            ),
            params=self.params(),
        )
        return scenario_config(t.preset, cfg) if t.preset else cfg


RawConfig = dict[str, dict[str, Union[str, list[str]]]]


def _suggest(word: str, choices: Sequence[str]) -> Optional[str]:
    matches = difflib.get_close_matches(word, list(choices), n=1, cutoff=0.5)
    if matches:
        return matches[0]
    lowered = {c.lower(): c for c in choices}
    return lowered.get(word.lower())


def _parse_value(text: str) -> Union[str, list[str]]:
    if "," in text:
        return [part.strip() for part in text.split(",") if part.strip()]
    return text


def _check_section(section: str, line: Optional[int]) -> None:
    if section not in SECTION_KEYS:
        raise ConfigError(
            f"unknown section '[{section}]'",
            line=line,
            key=section,
            suggestion=_suggest(section, list(SECTION_KEYS)),
        )


def _locate(section: str, key: str, raw_line: Optional[int]) -> tuple[str, str]:
    """Check that (section, key) exists or raise with the nearest valid key."""
    _check_section(section, raw_line)
    if key not in SECTION_KEYS[section]:
        raise ConfigError(
            f"unknown key '{key}' in section [{section}]",
            line=raw_line,
            key=key,
            suggestion=_suggest(key, SECTION_KEYS[section]),
        )
    return section, key


def read_config_text(text: str) -> tuple[RawConfig, dict[tuple[str, str], int]]:
    """
    Parse the sectioned text format into raw string values

    Returns:
        Raw values per section and the line number of every key

    Raises:
        ConfigError: For malformed lines, unknown sections or keys, duplicates
    """
    raw: RawConfig = {}
    lines: dict[tuple[str, str], int] = {}
    section: Optional[str] = None

    for number, line in enumerate(text.splitlines(), start=1):
        content = line.split("#", 1)[0].strip()
        if not content:
            continue
        if content.startswith("[") and content.endswith("]"):
            section = content[1:-1].strip()
            _check_section(section, number)
            raw.setdefault(section, {})
            continue
        if "=" not in content:
            raise ConfigError(f"expected 'key = value', got '{content}'", line=number)
        if section is None:
            raise ConfigError("key outside of any [section]", line=number)
        key, _, value = (part.strip() for part in content.partition("="))
        if not key or not value:
            raise ConfigError(f"empty key or value in '{content}'", line=number)
        _locate(section, key, number)
        if (section, key) in lines:
            raise ConfigError(
                f"duplicate key '{key}' (first set on line {lines[(section, key)]})",
                line=number,
                key=key,
            )
        raw[section][key] = _parse_value(value)
        lines[(section, key)] = number

    return raw, lines


def apply_overrides(raw: RawConfig, overrides: Sequence[str]) -> RawConfig:
    """
    Apply ``section.key=value`` overrides; a bare ``key=value`` is accepted
    when the key belongs to exactly one section.

    Raises:
        ConfigError: For malformed, ambiguous or unknown overrides
    """
    merged: RawConfig = {s: dict(v) for s, v in raw.items()}
    for item in overrides:
        target, sep, value = item.partition("=")
        target, value = target.strip(), value.strip()
        if not sep or not target or not value:
            raise ConfigError(f"override must look like section.key=value, got '{item}'")
        if "." in target:
            section, key = target.split(".", 1)
        else:
            owners = [s for s, keys in SECTION_KEYS.items() if target in keys]
            if len(owners) != 1:
                every = [k for keys in SECTION_KEYS.values() for k in keys]
                raise ConfigError(
                    f"override key '{target}' is "
                    + ("ambiguous" if owners else "unknown")
                    + "; use section.key",
                    key=target,
                    suggestion=_suggest(target, every) if not owners else None,
                )
            section, key = owners[0], target
        _locate(section, key, None)
        values = merged.setdefault(section, {})
        values[key] = _parse_value(value)
        partner = _CLOSURE_PARTNER.get(key)
        if section == "dimensional" and partner and not _overridden(overrides, partner):
            values.pop(partner, None)
    return merged


def _overridden(overrides: Sequence[str], key: str) -> bool:
    targets = {item.partition("=")[0].strip() for item in overrides}
    return key in targets or f"dimensional.{key}" in targets


def _normalize(section: str, key: str, value: Union[str, list[str]]) -> Any:
    if isinstance(value, str) and value.lower() in _NONE_WORDS:
        return [] if (section, key) in LIST_KEYS else None
    if isinstance(value, str) and (section, key) in LIST_KEYS:
        return [value]
    return value


def build_run_config(
    raw: RawConfig, lines: Optional[dict[tuple[str, str], int]] = None
) -> RunConfig:
    """
    Validate raw values into a RunConfig

    Raises:
        ConfigError: Naming the first invalid value and its line when known
    """
    lines = lines or {}
    dimensional: dict[str, Any] = {}
    for section in ("dimensional", "scales", "ck"):
        dimensional.update({k: _normalize(section, k, v) for k, v in raw.get(section, {}).items()})
    data: dict[str, Any] = {"dimensional": dimensional}
    for section in SECTION_MODELS:
        data[section] = {k: _normalize(section, k, v) for k, v in raw.get(section, {}).items()}

    try:
        cfg = RunConfig.model_validate(data)
    except ValidationError as e:
        raise _config_error(e, lines) from None

    if "phi_f" in dimensional and "phi_s" not in dimensional:
        logger.info(f"phi_s set to {cfg.dimensional.phi_s} so that phi_f + phi_s = 1")
    if "phi_s" in dimensional and "phi_f" not in dimensional:
        logger.info(f"phi_f set to {cfg.dimensional.phi_f} so that phi_f + phi_s = 1")
    if cfg.dimensional.C_k is None:
        logger.debug(
            "C_k selected from porosity",
            extra={"phi_f": cfg.dimensional.phi_f, "C_k": cfg.dimensional.resolved_C_k},
        )
    return cfg


def _config_error(error: ValidationError, lines: dict[tuple[str, str], int]) -> ConfigError:
    first = error.errors()[0]
    loc = [str(part) for part in first["loc"]]
    section = loc[0] if loc else ""
    key = loc[1] if len(loc) > 1 else None

    # dimensional values may come from [scales] or [ck]; model-level errors
    # there concern the volume fractions
    if section == "dimensional":
        places = [(s, k) for s in ("dimensional", "scales", "ck") for k in ([key] if key else [])]
        places = places or [("dimensional", "phi_f"), ("dimensional", "phi_s")]
    else:
        places = [(section, key)] if key else []
    line = next((lines[p] for p in places if p in lines), None)
    where = ".".join(loc) if loc else "config"
    return ConfigError(f"invalid value for {where}: {first['msg']}", line=line, key=key)


def parse_config_text(text: str, overrides: Sequence[str] = ()) -> RunConfig:
    """Parse config text, apply overrides and validate."""
    raw, lines = read_config_text(text)
    if overrides:
        raw = apply_overrides(raw, overrides)
    return build_run_config(raw, lines)


def parse_config(path: Optional[Union[str, Path]], overrides: Sequence[str] = ()) -> RunConfig:
    """
    Read a run configuration file

    An absent path gives the default configuration.

    Args:
        path: Config file path, or None for defaults
        overrides: ``section.key=value`` overrides applied before validation

    Returns:
        RunConfig with every default materialized

    Raises:
        ConfigError: If the file is missing, malformed or holds invalid values
    """
    if path is None:
        return parse_config_text("", overrides)
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {p}") from None
    except OSError as e:
        raise ConfigError(f"cannot read config file {p}: {e}") from e
    logger.debug(f"Read config file {p}", extra={"path": str(p)})
    return parse_config_text(text, overrides)


def _format_value(value: Any) -> str:
    if value is None:
        return "auto"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        if not value:
            return "none"
        return ", ".join(_format_value(v) for v in value)
    return str(value)


def render_resolved_config(cfg: RunConfig) -> str:
    """
    Render a RunConfig in the input format with every value explicit

    Values outside the tabulated parameter set carry an ``# INFERRED`` note.
    Parsing the output gives back an identical RunConfig.
    """
    dims = cfg.dimensional.model_dump()
    sections: dict[str, dict[str, Any]] = {
        "dimensional": {k: dims[k] for k in DIMENSIONAL_KEYS},
        "scales": {k: dims[k] for k in SCALE_KEYS},
        "ck": {k: dims[k] for k in CK_KEYS},
    }
    for name in SECTION_MODELS:
        sections[name] = getattr(cfg, name).model_dump()

    out = ["# Resolved thermoporo configuration"]
    for name, values in sections.items():
        out.append("")
        out.append(f"[{name}]")
        for key, value in values.items():
            text = f"{key} = {_format_value(value)}"
            note = INFERRED_KEYS.get((name, key))
            if note:
                text += f"  # INFERRED: {note}"
            out.append(text)
    return "\n".join(out) + "\n"


def write_resolved_config(cfg: RunConfig, directory: Union[str, Path]) -> Path:
    """Write ``resolved_config.ini`` into the output directory."""
    path = Path(directory) / "resolved_config.ini"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render_resolved_config(cfg), encoding="utf-8", newline="\n")
    return path


def with_override(cfg: RunConfig, key: str, value: Any) -> RunConfig:
    """
    Copy of cfg with one ``section.key`` set, validated like file input

    Changing ``scenario.figure`` drops the dimensional values that the old and
    the new case set, so the new case takes effect; other explicit values stay.
    """
    text = _format_value(value)
    raw, lines = read_config_text(render_resolved_config(cfg))
    if key.rpartition(".")[2] == "figure":
        dims = raw.get("dimensional", {})
        for case in (cfg.scenario.figure, text):
            for name in FIGURE_CASES.get(case or "", {}):
                dims.pop(name, None)
                dims.pop(_CLOSURE_PARTNER.get(name, ""), None)
    return build_run_config(apply_overrides(raw, [f"{key}={text}"]), lines)
