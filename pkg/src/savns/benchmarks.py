"""Convergence studies on the manufactured solution and double shear layer runs."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .fourier import (
    PhysicalField,
    SpectralField,
    curl2d,
    h1_norm,
    h1_seminorm,
    l2_norm,
    make_grid,
    max_divergence,
    resample,
    to_physical,
    to_spectral,
)
from .integrator import (
    EtaMode,
    SavState,
    init_state,
    pressure_from_velocity,
    step,
    step_unstabilized,
)
from .manufactured import ManufacturedCase, example_grid
from .nonlinear import project_forcing

__all__ = [
    "ConvergenceResult",
    "ShearLayerConfig",
    "DiagnosticsRecord",
    "ManufacturedRun",
    "fit_rate",
    "run_manufactured",
    "run_convergence",
    "shear_layer_initial",
    "run_shear_layer",
    "THICK_LAYER",
    "THIN_LAYER",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    energy: float
    enstrophy: float
    r: float
    xi: float
    eta: float
    div_max: float


@dataclass
class ConvergenceResult:
    k: int
    rows: list[tuple[float, float, float]]
    fitted_rate_velocity: float
    fitted_rate_pressure: float
    max_xi_defect: list[float] = field(default_factory=list)

    @property
    def dts(self) -> list[float]:
        return [row[0] for row in self.rows]


@dataclass(frozen=True)
class ShearLayerConfig:
    rho: float
    nu: float
    N: int
    dt: float
    T_final: float
    k: int
    delta: float = 0.05
    eta_mode: EtaMode = "theorem"

    def __post_init__(self) -> None:
        for name in ("rho", "nu", "dt", "T_final"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive, got {value}")
        if self.delta < 0:
            raise ValueError(f"delta must be non-negative, got {self.delta}")
        if self.N < 4 or self.N % 2:
            raise ValueError(f"N must be even and >= 4, got {self.N}")
        if self.k not in range(1, 6):
            raise ValueError(f"k must be in 1..5, got {self.k}")


THICK_LAYER = ShearLayerConfig(rho=30.0, nu=1e-4, N=128, dt=8e-4, T_final=1.2, k=4)
THIN_LAYER = ShearLayerConfig(rho=100.0, nu=5e-5, N=256, dt=3e-4, T_final=1.2, k=3)


def fit_rate(pairs: Sequence[tuple[float, float]]) -> float:
    """Least-squares slope of ``log(error)`` against ``log(dt)``."""
    if len(pairs) < 3:
        raise ValueError(f"need at least 3 (dt, error) pairs to fit a rate, got {len(pairs)}")
    arr = np.asarray(pairs, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
        raise ValueError("dt and error values must be positive and finite")
    slope, _ = np.polyfit(np.log(arr[:, 0]), np.log(arr[:, 1]), 1)
    return float(slope)


@dataclass
class ManufacturedRun:
    state: SavState
    velocity_error: float
    pressure_error: float
    max_xi_defect: float
    records: list[DiagnosticsRecord]


def _record(state: SavState, div_max: float) -> DiagnosticsRecord:
    u = state.u
    return DiagnosticsRecord(
        t=state.t,
        energy=0.5 * l2_norm(u) ** 2,
        enstrophy=0.5 * l2_norm(curl2d(u)) ** 2 if u.grid.dim == 2 else 0.5 * h1_seminorm(u) ** 2,
        r=state.r,
        xi=state.last_xi,
        eta=state.last_eta,
        div_max=div_max,
    )


def run_manufactured(
    k: int,
    dt: float,
    N: int = 40,
    T: float = 1.0,
    nu: float = 1.0,
    eta_mode: EtaMode = "theorem",
    bootstrap: str = "exact",
    reference_N: int | None = None,
) -> ManufacturedRun:
    """Integrate the manufactured problem to ``T`` and measure ``H^1`` errors there.

    By default the errors are taken against the exact fields sampled on the
    run's own grid.  Those fields solve the discrete problem exactly, so only
    the time error shows.  With ``reference_N`` the numerical fields are
    resampled onto a finer grid and compared there, which adds the spatial
    truncation error.
    """
    n_steps = int(round(T / dt))
    if n_steps < k or abs(n_steps * dt - T) > 1e-9 * T:
        raise ValueError(f"T={T} is not a whole number (>= k) of steps of size {dt}")
    case = ManufacturedCase(example_grid(N), nu=nu)
    if bootstrap == "exact":
        history = [case.exact_velocity(i * dt) for i in range(1, k)]
        state = init_state(
            case.exact_velocity(0.0), k, 2, history, t=(k - 1) * dt, eta_mode=eta_mode
        )
    elif bootstrap == "cascade":
        state = init_state(case.exact_velocity(0.0), k, 2, eta_mode=eta_mode)
    else:
        raise ValueError(f"unknown bootstrap {bootstrap!r}")
    max_defect = 0.0
    records = []
    while state.step_index < n_steps:
        t_next = (state.step_index + 1) * dt
        state, report = step(state, dt, nu, case.forcing(t_next))
        max_defect = max(max_defect, abs(1.0 - report.xi))
        records.append(_record(state, report.divergence_max))
    p = pressure_from_velocity(state.u, case.forcing(T))
    if reference_N is None:
        eu, ep = case.error_h1(state.u, p, T)
    else:
        if reference_N < N:
            raise ValueError(f"reference grid ({reference_N}) must be at least as fine as N={N}")
        ref = ManufacturedCase(example_grid(reference_N), nu=nu)
        eu, ep = ref.error_h1(resample(state.u, ref.grid), resample(p, ref.grid), T)
    return ManufacturedRun(state, eu, ep, max_defect, records)


def run_convergence(
    k: int,
    dt_list: Sequence[float],
    N: int = 40,
    T: float = 1.0,
    nu: float = 1.0,
    eta_mode: EtaMode = "theorem",
) -> ConvergenceResult:
    """Temporal convergence study with exact start-up history.

    The largest time step is left out of the fit when its velocity error
    exceeds 10% of the exact solution's ``H^1`` norm.
    """
    dts = [float(dt) for dt in dt_list]
    if len(dts) < 3:
        raise ValueError("need at least 3 time steps for a convergence study")
    if any(b >= a for a, b in zip(dts, dts[1:])):
        raise ValueError("time steps must be strictly decreasing")
    if np.sin(T) == 0.0:
        raise ValueError("exact solution vanishes at T; choose another final time")
    rows, defects = [], []
    for dt in dts:
        run = run_manufactured(k, dt, N=N, T=T, nu=nu, eta_mode=eta_mode)
        rows.append((dt, run.velocity_error, run.pressure_error))
        defects.append(run.max_xi_defect)
        log.info("k=%d dt=%.4g  |e_u|_1=%.3e  |e_p|_1=%.3e", k, dt, *rows[-1][1:])
    fit_rows = rows
    norm = h1_norm(ManufacturedCase(example_grid(N), nu=nu).exact_velocity(T))
    if rows[0][1] > 0.1 * norm and len(rows) > 3:
        log.info("excluding pre-asymptotic dt=%.4g from the rate fit", rows[0][0])
        fit_rows = rows[1:]
    return ConvergenceResult(
        k=k,
        rows=rows,
        fitted_rate_velocity=fit_rate([(r[0], r[1]) for r in fit_rows]),
        fitted_rate_pressure=fit_rate([(r[0], r[2]) for r in fit_rows]),
        max_xi_defect=defects,
    )


def shear_layer_initial(config: ShearLayerConfig) -> SpectralField:
    """Double shear layer on the unit box, made discretely solenoidal."""
    grid = make_grid(2, [config.N, config.N], [1.0, 1.0])
    x, y = grid.coordinates()
    u1 = np.where(
        y <= 0.5, np.tanh(config.rho * (y - 0.25)), np.tanh(config.rho * (0.75 - y))
    ) + 0.0 * x
    u2 = config.delta * np.sin(2.0 * np.pi * x) + 0.0 * y
    sampled = to_spectral(PhysicalField.from_values(grid, np.stack([u1, u2])))
    return project_forcing(sampled)


@dataclass
class ShearLayerResult:
    snapshots: list[tuple[float, PhysicalField]]
    records: list[DiagnosticsRecord]
    state: SavState


def run_shear_layer(
    config: ShearLayerConfig,
    snapshot_times: Sequence[float] = (),
    stabilized: bool = True,
    u0: SpectralField | None = None,
    callback: Callable[[SavState], None] | None = None,
) -> ShearLayerResult:
    """Step the double shear layer to ``T_final`` with cascade start-up.

    A vorticity snapshot is taken at the first step reaching each requested
    time and a diagnostics record is emitted after every step.  With
    ``stabilized=False`` the plain IMEX scheme is used and a
    :class:`~savns.integrator.SolverError` signals blow-up.
    """
    if u0 is None:
        u0 = shear_layer_initial(config)
    state = init_state(u0, config.k, 2, eta_mode=config.eta_mode)
    n_steps = int(np.ceil(config.T_final / config.dt - 1e-9))
    pending = sorted(float(t) for t in snapshot_times)
    snapshots: list[tuple[float, PhysicalField]] = []
    records = [_record(state, max_divergence(state.u))]

    def take_snapshots() -> None:
        while pending and state.t >= pending[0] - 1e-9 * max(1.0, pending[0]):
            pending.pop(0)
            snapshots.append((state.t, to_physical(curl2d(state.u))))

    take_snapshots()
    for _ in range(n_steps):
        if stabilized:
            state, report = step(state, config.dt, config.nu)
            div = report.divergence_max
        else:
            state = step_unstabilized(state, config.dt, config.nu)
            div = max_divergence(state.u)
        records.append(_record(state, div))
        take_snapshots()
        if callback is not None:
            callback(state)
    return ShearLayerResult(snapshots=snapshots, records=records, state=state)
