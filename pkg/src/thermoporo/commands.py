"""
Subcommand implementations

This module contains the logic behind each CLI subcommand:
- groups: dimensionless groups with their defining formulas
- solve: one pipeline run (spherical, cartesian, thermal or transient)
- sweep: concurrent solves over values of one config key
- converge: grid (or time-step) convergence study
- transient: radial simulation with snapshot output

Every command takes a resolved RunConfig and writes into
``cfg.output.directory``.
"""

import asyncio
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Optional, Sequence, Union

import numpy as np

from .cartesian import (
    compute_coefficients,
    displacement_profile,
    fluid_velocity,
    fluid_velocity_derivative,
    pressure,
)
from .config import RunConfig, get_settings, with_override, write_resolved_config
from .error_handler import ArgumentError, ConvergenceError, SweepError
from .logger import get_logger
from .numerics import FieldProfile, FloatArray, Grid1D
from .output import ProfileCSV, write_manifest, write_table
from .parameters import GROUP_FORMULAS, nondimensionalize
from .spherical import SphericalParams, flow_rate, profiles
from .thermal import SolutionBundle, ThermalProblem, solve_coupled_steady
from .transient import TransientState, run_scenario, total_heat

logger = get_logger(__name__)

PROFILE_FILE = "profiles.csv"
SUMMARY_FILE = "summary.csv"
SWEEP_FILE = "sweep.csv"
CONVERGE_FILE = "convergence.csv"
MANIFEST_FILE = "manifest.json"


@dataclass
class SolveResult:
    """Profiles and scalar summary of one pipeline run."""

    model: str
    columns: dict[str, FloatArray]
    summary: dict[str, Any]
    bundle: Optional[SolutionBundle] = None
    snapshots: list[TransientState] = field(default_factory=list)


def cmd_groups(cfg: RunConfig, key_value: bool = False) -> str:
    """
    Format every dimensionless group

    Args:
        cfg: Resolved configuration
        key_value: Emit flat ``name=value`` lines instead of the table

    Returns:
        Text to print
    """
    groups = nondimensionalize(cfg.params()).model_dump()
    if key_value:
        return "\n".join(f"{name}={value!r}" for name, value in groups.items()) + "\n"
    width = max(len(name) for name in groups)
    lines = [
        f"{name.ljust(width)} = {value:<22.10g} {GROUP_FORMULAS[name]}"
        for name, value in groups.items()
    ]
    return "\n".join(lines) + "\n"


def _end_slope(values: FloatArray, h: float) -> float:
    # one-sided second-order derivative at the last node
    return float((3.0 * values[-1] - 4.0 * values[-2] + values[-3]) / (2.0 * h))


def _extrema(columns: dict[str, FloatArray], skip: str) -> dict[str, float]:
    out: dict[str, float] = {}
    for name, values in columns.items():
        if name == skip:
            continue
        out[f"{name}_min"] = float(np.min(values))
        out[f"{name}_max"] = float(np.max(values))
    return out


def _solve_spherical(cfg: RunConfig, grid: Grid1D) -> SolveResult:
    groups = nondimensionalize(cfg.params())
    sp = SphericalParams.from_groups(groups, varrho=cfg.scenario.varrho)
    if cfg.scenario.lam is not None:
        sp = replace(sp, lam=cfg.scenario.lam)
    fields = profiles(sp, grid)
    columns = {"r": grid.nodes, **{k: p.values for k, p in fields.items()}}
    summary = {
        "model": "spherical",
        "n": grid.n,
        "lambda": sp.lam,
        "Q_t": flow_rate(sp, cfg.scenario.quadrature_nodes),
        "P_center": float(fields["P"].values[0]),
        "bc_P_outer": float(fields["P"].values[-1]),
        "bc_v_f_center": float(fields["v_f"].values[0]),
        "bc_u_s_outer": float(fields["u_s"].values[-1]),
        **_extrema(columns, "r"),
    }
    return SolveResult("spherical", columns, summary)


def _solve_steady(cfg: RunConfig, grid: Grid1D) -> SolveResult:
    """
    Chain the 1D solvers

    Flow:
        1. Dimensionless groups and closed-form coefficients
        2. Fluid velocity and pressure on the grid
        3. Coupled thermal solve (thermal model, or whenever Xi = 1)
        4. Displacement, closed form or thermally coupled

    ``flow = zero`` replaces only the velocity fed to the thermal solve.
    """
    model = cfg.scenario.model
    xi = cfg.scenario.xi
    groups = nondimensionalize(cfg.params())
    coeffs = compute_coefficients(groups, Xi=xi)
    x = grid.nodes

    v_f = FieldProfile(grid, np.asarray(fluid_velocity(coeffs, x)))
    P = FieldProfile(grid, np.asarray(pressure(coeffs, x)))
    u_closed = displacement_profile(replace(coeffs, Xi=0), grid)

    summary: dict[str, Any] = {
        "model": model,
        "n": grid.n,
        "xi": xi,
        "alpha_f": coeffs.alpha_f,
        "bc_v_f_inlet": float(v_f.values[0] - 1.0),
        "bc_dv_f_outlet": float(fluid_velocity_derivative(coeffs, 1.0)),
    }

    if model == "cartesian" and xi == 0:
        columns = {"x": x, "v_f": v_f.values, "P": P.values, "u_s": u_closed.values}
        summary.update(
            {
                "bc_u_s_inlet": float(u_closed.values[0]),
                "bc_u_s_outlet": float(u_closed.values[-1]),
                **_extrema(columns, "x"),
            }
        )
        return SolveResult(model, columns, summary)

    if cfg.scenario.flow == "zero":
        problem = ThermalProblem.at_rest(grid, groups.Pe_f, groups.N, groups.kappa_ratio)
    else:
        problem = ThermalProblem.from_flow(groups, coeffs, grid)
    theta_f, theta_s = solve_coupled_steady(problem)
    u_s = displacement_profile(coeffs, grid, theta_s) if xi == 1 else u_closed

    bundle = SolutionBundle(grid, v_f, P, u_s, theta_f, theta_s)
    bundle.extras["theta_mix"] = bundle.composite_temperature(groups.phi_f, groups.phi_s)
    columns = bundle.columns()

    summary.update(
        {
            "bc_u_s_inlet": float(u_s.values[0]),
            "bc_u_s_outlet": float(u_s.values[-1]),
            "bc_theta_f_inlet": float(theta_f.values[0] - 1.0),
            "bc_theta_s_inlet": float(theta_s.values[0] - 1.0),
            "bc_dtheta_f_outlet": _end_slope(theta_f.values, grid.h),
            "bc_dtheta_s_outlet": _end_slope(theta_s.values, grid.h),
            "theta_f_end": float(theta_f.values[-1]),
            "theta_s_end": float(theta_s.values[-1]),
            "u_s_gap": float(np.max(np.abs(u_s.values - u_closed.values))) if xi == 1 else 0.0,
            **_extrema(columns, "x"),
        }
    )
    return SolveResult(model, columns, summary, bundle=bundle)


def _solve_transient(cfg: RunConfig) -> SolveResult:
    tcfg = cfg.transient_config()
    snapshots = run_scenario(tcfg, cfg.scenario.snapshot_times)
    summary: dict[str, Any] = {"model": "transient", "n": tcfg.n_nodes, "snapshots": len(snapshots)}
    columns: dict[str, FloatArray] = {}
    if snapshots:
        last = snapshots[-1]
        columns = last.columns()
        summary.update(
            {
                "t_last": last.t,
                "total_heat": total_heat(last, tcfg),
                "max_gap": float(np.max(np.abs(last.theta_f.values - last.theta_s.values))),
                **_extrema(columns, "r"),
            }
        )
    return SolveResult("transient", columns, summary, snapshots=snapshots)


def run_pipeline(cfg: RunConfig, grid_nodes: Optional[int] = None) -> SolveResult:
    """
    Run the configured model without writing files

    Args:
        cfg: Resolved configuration
        grid_nodes: Grid override for the steady models

    Returns:
        SolveResult
    """
    model = cfg.scenario.model
    if model == "transient":
        return _solve_transient(cfg)
    grid = Grid1D(0.0, 1.0, grid_nodes or cfg.solver.grid_nodes)
    if model == "spherical":
        return _solve_spherical(cfg, grid)
    return _solve_steady(cfg, grid)


def _out_dir(cfg: RunConfig) -> Path:
    path = Path(cfg.output.directory)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _snapshot_name(index: int, t: float) -> str:
    return f"snapshot_{index:03d}_t{t:g}.csv"


def _write_snapshots(cfg: RunConfig, out: Path, snapshots: Sequence[TransientState]) -> list[Path]:
    precision = cfg.output.precision
    written = []
    for i, state in enumerate(snapshots):
        path = out / _snapshot_name(i, state.t)
        ProfileCSV.from_columns(state.columns()).write(path, precision)
        written.append(path)
    return written


def cmd_solve(cfg: RunConfig, grid_nodes: Optional[int] = None) -> SolveResult:
    """
    Run the configured pipeline and write its files

    Writes the resolved config, the profile CSV (one per snapshot for the
    transient model, plus a manifest) and a one-row summary CSV.

    Raises:
        ThermoporoError: Solver and domain errors with their parameter context
    """
    out = _out_dir(cfg)
    logger.info(
        f"Solving {cfg.scenario.model} model",
        extra={"model": cfg.scenario.model, "out": str(out)},
    )
    result = run_pipeline(cfg, grid_nodes)
    resolved = write_resolved_config(cfg, out)

    if result.model == "transient":
        files = _write_snapshots(cfg, out, result.snapshots)
        _write_transient_manifest(cfg, out, result.snapshots, files, resolved)
    else:
        ProfileCSV.from_columns(result.columns).write(out / PROFILE_FILE, cfg.output.precision)
    write_table(out / SUMMARY_FILE, [result.summary], cfg.output.precision)

    logger.info(
        f"Solve finished for {result.model} model",
        extra={"model": result.model, "out": str(out)},
    )
    return result


def _numeric(value: Any, key: str) -> Union[int, float]:
    try:
        number = float(value)
    except (TypeError, ValueError):
        raise ArgumentError(f"sweep values for {key} must be numeric, got {value!r}") from None
    if not math.isfinite(number):
        raise ArgumentError(f"sweep values for {key} must be finite, got {value!r}")
    # integral values stay ints so integer keys (grid_nodes) validate
    return int(number) if number.is_integer() else number


async def cmd_sweep(
    cfg: RunConfig,
    key: str,
    values: Sequence[Any],
    threads: Optional[int] = None,
) -> list[dict[str, Any]]:
    """
    Solve once per value of ``key`` and merge the summaries

    Cases run concurrently in worker threads, at most ``threads`` at a time
    (default: THERMOPORO_THREADS). Rows come back in input order.

    Args:
        cfg: Base configuration
        key: Config key (``section.key`` or a key unique to one section)
        values: Numeric values to sweep
        threads: Concurrency cap

    Returns:
        One summary row per value, first column the swept value

    Raises:
        ArgumentError: If the sweep is empty or a value is not numeric
        ConfigError: If the key is unknown or a value is out of range
        SweepError: If a case fails, naming the value
    """
    if not values:
        raise ArgumentError("sweep needs at least one value")
    numbers = [_numeric(v, key) for v in values]
    cases = [with_override(cfg, key, v) for v in numbers]
    limit = threads or get_settings().threads
    semaphore = asyncio.Semaphore(limit)

    logger.info(
        f"Sweeping {key} over {len(numbers)} values",
        extra={"key": key, "values": numbers, "threads": limit},
    )

    async def run_case(value: float, case: RunConfig) -> dict[str, Any]:
        async with semaphore:
            try:
                result = await asyncio.to_thread(run_pipeline, case)
            except Exception as e:
                raise SweepError(key, value, e) from e
        return {key: value, **result.summary}

    rows = list(await asyncio.gather(*(run_case(v, c) for v, c in zip(numbers, cases))))

    out = _out_dir(cfg)
    write_resolved_config(cfg, out)
    write_table(out / SWEEP_FILE, rows, cfg.output.precision)
    return rows


def _nested_stride(coarse: int, fine: int) -> int:
    if (fine - 1) % (coarse - 1):
        raise ArgumentError(f"grid {fine} does not contain the nodes of grid {coarse}")
    return (fine - 1) // (coarse - 1)


def _converge_field(result: SolveResult) -> FloatArray:
    if result.model == "cartesian":
        return result.columns["u_s"]
    return np.concatenate([result.columns["theta_f"], result.columns["theta_s"]])


def _on_coarse(values: FloatArray, stride: int, coarse_n: int, fields: int) -> FloatArray:
    parts = np.split(values, fields)
    return np.concatenate([p[::stride][:coarse_n] for p in parts])


def observed_orders(
    differences: Sequence[float], ratios: Sequence[float]
) -> list[Optional[float]]:
    """
    p = log(|u_h - u_{h/r}| / |u_{h/r} - u_{h/r^2}|) / log(r) for successive grids.

    The first entry is None; a zero difference also gives None.
    """
    orders: list[Optional[float]] = [None]
    for i in range(1, len(differences)):
        a, b = differences[i - 1], differences[i]
        if a > 0 and b > 0:
            orders.append(math.log(a / b) / math.log(ratios[i]))
        else:
            orders.append(None)
    return orders


def _converge_steady(cfg: RunConfig, grids: Sequence[int]) -> tuple[list[dict[str, Any]], float]:
    results = [run_pipeline(cfg, n) for n in grids]
    fields = 1 if cfg.scenario.model == "cartesian" else 2
    finest = _converge_field(results[-1])

    rows: list[dict[str, Any]] = []
    diffs: list[float] = []
    ratios: list[float] = []
    for k, n in enumerate(grids):
        u = _converge_field(results[k])
        stride_finest = _nested_stride(n, grids[-1])
        err_finest = float(np.max(np.abs(u - _on_coarse(finest, stride_finest, n, fields))))
        if k + 1 < len(grids):
            stride = _nested_stride(n, grids[k + 1])
            finer = _on_coarse(_converge_field(results[k + 1]), stride, n, fields)
            diffs.append(float(np.max(np.abs(u - finer))))
            ratios.append(float(stride))
        rows.append({"n": n, "h": 1.0 / (n - 1), "error_vs_finest": err_finest})

    orders = observed_orders(diffs, ratios)
    for k, row in enumerate(rows):
        row["difference_to_next"] = diffs[k] if k < len(diffs) else ""
        p = orders[k] if k < len(orders) else None
        row["observed_order"] = "" if p is None else p
    valid = [p for p in orders if p is not None]
    return rows, (min(valid) if valid else math.nan)


def _converge_spherical(cfg: RunConfig, grids: Sequence[int]) -> list[dict[str, Any]]:
    groups = nondimensionalize(cfg.params())
    sp = SphericalParams.from_groups(groups, varrho=cfg.scenario.varrho)
    if cfg.scenario.lam is not None:
        sp = replace(sp, lam=cfg.scenario.lam)
    values = [flow_rate(sp, n) for n in grids]
    return [
        {
            "n": n,
            "h": 1.0 / (n - 1),
            "Q_t": q,
            "error_vs_finest": abs(q - values[-1]),
            "difference_to_next": "",
            "observed_order": "",
        }
        for n, q in zip(grids, values)
    ]


def _converge_transient(cfg: RunConfig, levels: int) -> tuple[list[dict[str, Any]], float]:
    base = cfg.transient_config()
    dts = [base.dt / 2**k for k in range(levels)]
    finals = []
    for dt in dts:
        state = run_scenario(replace(base, dt=dt), [base.t_end])[0]
        finals.append(np.concatenate([state.theta_f.values, state.theta_s.values]))

    diffs = [float(np.max(np.abs(finals[k] - finals[k + 1]))) for k in range(levels - 1)]
    orders = observed_orders(diffs, [2.0] * len(diffs))
    rows: list[dict[str, Any]] = []
    for k, dt in enumerate(dts):
        p = orders[k] if k < len(orders) else None
        rows.append(
            {
                "dt": dt,
                "error_vs_finest": float(np.max(np.abs(finals[k] - finals[-1]))),
                "difference_to_next": diffs[k] if k < len(diffs) else "",
                "observed_order": "" if p is None else p,
            }
        )
    valid = [p for p in orders if p is not None]
    return rows, (min(valid) if valid else math.nan)


def cmd_converge(cfg: RunConfig, grids: Optional[Sequence[int]] = None) -> list[dict[str, Any]]:
    """
    Convergence study of the configured model

    Steady models are solved on nested grids and the observed order is taken
    from differences between successive grids. The transient model halves dt
    at fixed grid, once per entry in ``grids``. Closed-form spherical fields
    only report quadrature differences.

    Args:
        cfg: Resolved configuration
        grids: Strictly increasing odd node counts, at least three

    Returns:
        One row per grid (or time step)

    Raises:
        ArgumentError: With fewer than three grids or non-nested grids
        ConvergenceError: If the observed order is below the threshold
    """
    grids = list(grids or cfg.solver.converge_grids)
    if len(grids) < 3:
        raise ArgumentError(f"convergence needs at least 3 grids, got {len(grids)}")
    if any(b <= a for a, b in zip(grids, grids[1:])) or any(n % 2 == 0 for n in grids):
        raise ArgumentError(f"grids must be strictly increasing and odd, got {grids}")

    model = cfg.scenario.model
    threshold: Optional[float] = None
    order = math.nan
    if model == "spherical":
        rows = _converge_spherical(cfg, grids)
    elif model == "transient":
        rows, order = _converge_transient(cfg, len(grids))
        threshold = cfg.solver.min_order / 2.0
    elif model == "cartesian" and cfg.scenario.xi == 0:
        rows = _converge_closed_form(grids)
    else:
        rows, order = _converge_steady(cfg, grids)
        threshold = cfg.solver.min_order

    out = _out_dir(cfg)
    write_resolved_config(cfg, out)
    write_table(out / CONVERGE_FILE, rows, cfg.output.precision)
    logger.info(
        f"Convergence study of {model} model finished",
        extra={"model": model, "grids": grids, "order": order},
    )

    if threshold is not None and not order >= threshold:
        raise ConvergenceError(
            f"observed order {order:.3g} is below {threshold:.3g} for the {model} model",
            model=model,
            order=order,
        )
    return rows


def _converge_closed_form(grids: Sequence[int]) -> list[dict[str, Any]]:
    # Xi = 0 Cartesian fields are exact at every node
    return [
        {
            "n": n,
            "h": 1.0 / (n - 1),
            "error_vs_finest": 0.0,
            "difference_to_next": "",
            "observed_order": "",
        }
        for n in grids
    ]


def _write_transient_manifest(
    cfg: RunConfig,
    out: Path,
    snapshots: Sequence[TransientState],
    files: Sequence[Path],
    resolved: Path,
) -> Path:
    tcfg = cfg.transient_config()
    payload = {
        "model": "transient",
        "resolved_config": resolved.name,
        "config": cfg.model_dump(mode="json"),
        "snapshots": [
            {"t": s.t, "file": f.name, "total_heat": total_heat(s, tcfg)}
            for s, f in zip(snapshots, files)
        ],
    }
    return write_manifest(out / MANIFEST_FILE, payload)


def cmd_transient(cfg: RunConfig, times: Optional[Sequence[float]] = None) -> list[TransientState]:
    """
    Run the radial simulation and write one CSV per snapshot plus a manifest

    Args:
        cfg: Resolved configuration
        times: Snapshot times; defaults to scenario.snapshot_times

    Returns:
        Snapshot states in time order
    """
    tcfg = cfg.transient_config()
    times = list(cfg.scenario.snapshot_times if times is None else times)
    logger.info(
        f"Running transient simulation with {len(times)} snapshots",
        extra={**tcfg.context(), "preset": cfg.transient.preset},
    )
    snapshots = run_scenario(tcfg, times)

    out = _out_dir(cfg)
    resolved = write_resolved_config(cfg, out)
    files = _write_snapshots(cfg, out, snapshots)
    _write_transient_manifest(cfg, out, snapshots, files, resolved)
    return snapshots
