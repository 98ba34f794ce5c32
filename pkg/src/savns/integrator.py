"""SAV-stabilised IMEX BDF-k time stepping for the pressure-free momentum equation.

One step solves, mode by mode,

    (alpha_k/dt - nu lap) ubar = A_k(ubar history)/dt + A(B_k(u) . grad B_k(u)) + P f

then updates the auxiliary scalar ``r`` (which shadows ``E + 1``), forms
``xi = r/(E(ubar) + 1)`` and rescales ``u = eta * ubar`` with
``eta = 1 - (1 - xi)**e``.  ``E`` is ``||grad u||^2/2`` in 2-D mode and
``||u||^2/2`` in 3-D mode.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Literal, Sequence

import numpy as np

from .fourier import (
    GridSpec,
    SpectralField,
    _leray_A_coeffs,
    divergence,
    h1_seminorm,
    h2_seminorm,
    inner,
    inv_laplacian,
    l2_norm,
    laplacian,
    max_divergence,
)
from .nonlinear import advection, project_forcing, workspace_for

__all__ = [
    "SolverError",
    "SchemeTable",
    "scheme_table",
    "SavState",
    "StepReport",
    "energy",
    "dissipation",
    "init_state",
    "step",
    "step_unstabilized",
    "pressure_from_velocity",
    "eta_exponent",
]

log = logging.getLogger(__name__)

EtaMode = Literal["theorem", "literal"]

_TABLES = {
    1: (Fraction(1), (Fraction(1),), (Fraction(1),)),
    2: (Fraction(3, 2), (Fraction(2), Fraction(-1, 2)), (Fraction(2), Fraction(-1))),
    3: (
        Fraction(11, 6),
        (Fraction(3), Fraction(-3, 2), Fraction(1, 3)),
        (Fraction(3), Fraction(-3), Fraction(1)),
    ),
    4: (
        Fraction(25, 12),
        (Fraction(4), Fraction(-3), Fraction(4, 3), Fraction(-1, 4)),
        (Fraction(4), Fraction(-6), Fraction(4), Fraction(-1)),
    ),
    5: (
        Fraction(137, 60),
        (Fraction(5), Fraction(-5), Fraction(10, 3), Fraction(-5, 4), Fraction(1, 5)),
        (Fraction(5), Fraction(-10), Fraction(10), Fraction(-5), Fraction(1)),
    ),
}


class SolverError(RuntimeError):
    """A non-finite value appeared during a step."""

    def __init__(self, message: str, step_index: int | None = None, t: float | None = None):
        super().__init__(message)
        self.step_index = step_index
        self.t = t


@dataclass(frozen=True)
class SchemeTable:
    """BDF-k coefficients; weights are listed newest history entry first."""

    k: int
    alpha: Fraction
    a_weights: tuple[Fraction, ...]
    b_weights: tuple[Fraction, ...]


def scheme_table(k: int) -> SchemeTable:
    if k not in _TABLES:
        raise ValueError(f"scheme order must be in 1..5, got {k}")
    alpha, a, b = _TABLES[k]
    return SchemeTable(k=k, alpha=alpha, a_weights=a, b_weights=b)


def eta_exponent(order: int, mode: EtaMode = "theorem") -> int:
    """Exponent of ``(1 - xi)`` in the rescaling factor.

    ``"theorem"`` uses ``max(order, 2)`` so the first-order scheme keeps a
    second-order rescale; ``"literal"`` uses ``order``.
    """
    if mode == "theorem":
        return max(order, 2)
    if mode == "literal":
        return order
    raise ValueError(f"unknown eta mode {mode!r}")


def energy(u: SpectralField, dim_mode: int) -> float:
    if dim_mode == 2:
        return 0.5 * h1_seminorm(u) ** 2
    if dim_mode == 3:
        return 0.5 * l2_norm(u) ** 2
    raise ValueError(f"dim_mode must be 2 or 3, got {dim_mode}")


def dissipation(u: SpectralField, dim_mode: int) -> float:
    """``||lap u||^2`` (2-D mode) or ``||grad u||^2`` (3-D mode)."""
    if dim_mode == 2:
        return h2_seminorm(u) ** 2
    if dim_mode == 3:
        return h1_seminorm(u) ** 2
    raise ValueError(f"dim_mode must be 2 or 3, got {dim_mode}")


@dataclass(frozen=True)
class SavState:
    """Integrator state.  Histories are tuples ordered newest first."""

    grid: GridSpec
    k: int
    dim_mode: int
    history_bar: tuple[SpectralField, ...]
    history_scaled: tuple[SpectralField, ...]
    r: float
    last_xi: float = 1.0
    last_eta: float = 1.0
    step_index: int = 0
    t: float = 0.0
    eta_mode: EtaMode = "theorem"

    @property
    def u(self) -> SpectralField:
        """Latest rescaled velocity."""
        return self.history_scaled[0]

    @property
    def ubar(self) -> SpectralField:
        return self.history_bar[0]


@dataclass(frozen=True)
class StepReport:
    xi: float
    eta: float
    r_before: float
    r_after: float
    implicit_residual: float
    divergence_max: float
    order_used: int = field(default=1)


def _relative_divergence(u: SpectralField) -> float:
    scale = h1_seminorm(u)
    return 0.0 if scale == 0.0 else l2_norm(divergence(u)) / scale


def init_state(
    u0: SpectralField,
    k: int,
    dim_mode: int = 2,
    exact_history: Sequence[SpectralField] | None = None,
    *,
    t: float = 0.0,
    eta_mode: EtaMode = "theorem",
) -> SavState:
    """Build the starting state for a BDF-``k`` run.

    With ``exact_history`` the caller supplies ``u^1 .. u^{k-1}`` (oldest
    first, e.g. the projected exact solution) and ``t`` is the time of the
    last of them; ``r`` is then ``E(u^{k-1}) + 1``.  Without it the history
    holds ``u0`` only and the first ``k - 1`` steps cascade through the
    lower-order tables.
    """
    scheme_table(k)
    eta_exponent(1, eta_mode)
    if dim_mode not in (2, 3):
        raise ValueError(f"dim_mode must be 2 or 3, got {dim_mode}")
    if dim_mode == 2 and u0.grid.dim != 2:
        raise ValueError("dim_mode 2 needs a 2-D grid")
    if u0.ncomp != u0.grid.dim:
        raise ValueError("initial velocity must be a vector field")
    fields = [u0] + list(exact_history or [])
    if exact_history is not None and len(fields) != k:
        raise ValueError(f"order {k} needs {k - 1} exact history fields, got {len(fields) - 1}")
    for f in fields:
        if f.grid != u0.grid or f.ncomp != u0.ncomp:
            raise ValueError("history fields must match the initial field's grid and rank")
        if not f.is_finite():
            raise ValueError("history contains non-finite values")
        rel = _relative_divergence(f)
        if rel > 1e-8:
            raise ValueError(f"initial velocity is not solenoidal (relative divergence {rel:.3e})")
    hist = tuple(reversed(fields))
    return SavState(
        grid=u0.grid,
        k=k,
        dim_mode=dim_mode,
        history_bar=hist,
        history_scaled=hist,
        r=energy(hist[0], dim_mode) + 1.0,
        step_index=len(fields) - 1,
        t=t,
        eta_mode=eta_mode,
    )


def _check_params(dt: float, nu: float) -> None:
    if not (np.isfinite(dt) and dt > 0):
        raise ValueError(f"time step must be positive and finite, got {dt}")
    if not (np.isfinite(nu) and nu > 0):
        raise ValueError(f"viscosity must be positive and finite, got {nu}")


def _implicit_solve(
    state: SavState, dt: float, nu: float, forcing: SpectralField | None
) -> tuple[SpectralField, int, float]:
    grid = state.grid
    order = min(state.k, len(state.history_bar))
    table = scheme_table(order)
    ak = sum(float(a) * f.coeffs for a, f in zip(table.a_weights, state.history_bar))
    bk = sum(float(b) * f.coeffs for b, f in zip(table.b_weights, state.history_scaled))
    rhs = ak / dt + _leray_A_coeffs(grid, workspace_for(grid).convective(bk, bk))
    if forcing is not None:
        if forcing.grid != grid or forcing.ncomp != grid.dim:
            raise ValueError("forcing must be a vector field on the state's grid")
        rhs = rhs + project_forcing(forcing).coeffs
    symbol = float(table.alpha) / dt + nu * grid.k2
    ubar = (rhs / symbol) * grid.mask
    if not np.all(np.isfinite(ubar)):
        raise SolverError(
            f"non-finite velocity at step {state.step_index + 1} (t={state.t + dt:.6g})",
            step_index=state.step_index + 1,
            t=state.t + dt,
        )
    w = grid.parseval_weights
    res = symbol * ubar - rhs
    rhs_norm = np.sqrt(np.sum(w * np.abs(rhs) ** 2))
    residual = 0.0 if rhs_norm == 0 else float(np.sqrt(np.sum(w * np.abs(res) ** 2)) / rhs_norm)
    return SpectralField(grid, ubar), order, residual


def _rotate(history: tuple[SpectralField, ...], new: SpectralField, k: int) -> tuple:
    return ((new,) + history)[:k]


def step(
    state: SavState,
    dt: float,
    nu: float,
    forcing: SpectralField | None = None,
) -> tuple[SavState, StepReport]:
    """Advance one SAV/BDF-k step; ``forcing`` is the body force at ``t + dt``.

    For unforced runs ``r`` follows the closed-form update
    ``r / (1 + dt nu D/(E + 1))`` and is therefore non-increasing.  With a
    body force, the work done by the projected force on the energy is added
    explicitly so that ``r`` keeps tracking ``E + 1``.
    """
    _check_params(dt, nu)
    ubar, order, residual = _implicit_solve(state, dt, nu, forcing)
    dim_mode = state.dim_mode
    e_bar = energy(ubar, dim_mode)
    diss = dissipation(ubar, dim_mode)
    numerator = state.r
    if forcing is not None:
        pf = project_forcing(forcing)
        work = -inner(laplacian(ubar), pf) if dim_mode == 2 else inner(ubar, pf)
        numerator = state.r + dt * work
        if numerator < 0:
            raise SolverError(
                f"auxiliary variable driven negative by forcing work at step "
                f"{state.step_index + 1}; reduce the time step",
                step_index=state.step_index + 1,
                t=state.t + dt,
            )
    r_new = numerator / (1.0 + dt * nu * diss / (e_bar + 1.0))
    xi = r_new / (e_bar + 1.0)
    eta = 1.0 - (1.0 - xi) ** eta_exponent(order, state.eta_mode)
    u_new = ubar * eta
    if not (np.isfinite(r_new) and np.isfinite(eta)):
        raise SolverError(
            f"non-finite auxiliary variable at step {state.step_index + 1}",
            step_index=state.step_index + 1,
            t=state.t + dt,
        )
    new_state = replace(
        state,
        history_bar=_rotate(state.history_bar, ubar, state.k),
        history_scaled=_rotate(state.history_scaled, u_new, state.k),
        r=r_new,
        last_xi=xi,
        last_eta=eta,
        step_index=state.step_index + 1,
        t=state.t + dt,
    )
    report = StepReport(
        xi=xi,
        eta=eta,
        r_before=state.r,
        r_after=r_new,
        implicit_residual=residual,
        divergence_max=max_divergence(u_new),
        order_used=order,
    )
    return new_state, report


def step_unstabilized(
    state: SavState,
    dt: float,
    nu: float,
    forcing: SpectralField | None = None,
) -> SavState:
    """Plain IMEX BDF-k step (no auxiliary variable, no rescaling); ``u = ubar``."""
    _check_params(dt, nu)
    ubar, _, _ = _implicit_solve(state, dt, nu, forcing)
    if not np.all(np.isfinite(ubar.coeffs)):
        raise SolverError("non-finite velocity", state.step_index + 1, state.t + dt)
    return replace(
        state,
        history_bar=_rotate(state.history_bar, ubar, state.k),
        history_scaled=_rotate(state.history_scaled, ubar, state.k),
        last_xi=1.0,
        last_eta=1.0,
        step_index=state.step_index + 1,
        t=state.t + dt,
    )


def pressure_from_velocity(
    u: SpectralField, forcing: SpectralField | None = None
) -> SpectralField:
    """Zero-mean pressure from ``lap p = -div((u . grad) u) + div f``."""
    src = divergence(advection(u))
    if forcing is not None:
        src = src - divergence(forcing)
    return -inv_laplacian(src)
