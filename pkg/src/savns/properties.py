"""Fast operator and scheme invariant checks, runnable without pytest."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .fourier import (
    divergence,
    gradient,
    inv_laplacian,
    l2_norm,
    laplacian,
    leray_A,
    h1_norm,
    h2_seminorm,
    make_grid,
    max_divergence,
)
from .integrator import init_state, scheme_table, step
from .nonlinear import trilinear_b
from .random_fields import random_field, random_solenoidal


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _leray_contraction(rng: np.random.Generator) -> tuple[bool, str]:
    worst = 0.0
    for i in range(200):
        grid = make_grid(2 + i % 2, 8, 2 * np.pi) if i % 2 else make_grid(2, 16, 1.0)
        v = random_field(grid, grid.dim, rng)
        worst = max(worst, l2_norm(leray_A(v)) / l2_norm(v))
    return worst <= 1.0 + 1e-14, f"max ||Av||/||v|| = {worst:.16f}"


def _leray_solenoidal(rng: np.random.Generator) -> tuple[bool, str]:
    worst = 0.0
    for _ in range(20):
        grid = make_grid(2, 16, 2.0)
        v = random_solenoidal(grid, rng)
        worst = max(worst, l2_norm(leray_A(v) + v) / l2_norm(v))
    return worst <= 1e-12, f"max ||Av + v||/||v|| = {worst:.2e}"


def _skew(rng: np.random.Generator) -> tuple[bool, str]:
    worst_vv = worst_skew = 0.0
    for dim in (2, 3, 2):
        grid = make_grid(dim, 12 if dim == 3 else 24, 2.0)
        u = random_solenoidal(grid, rng, decay=1.0)
        v = random_field(grid, dim, rng, decay=1.0)
        w = random_field(grid, dim, rng, decay=1.0)
        scale = h1_norm(u) * h1_norm(v) * h1_norm(w)
        worst_vv = max(worst_vv, abs(trilinear_b(u, v, v)) / (h1_norm(u) * h1_norm(v) ** 2))
        worst_skew = max(worst_skew, abs(trilinear_b(u, v, w) + trilinear_b(u, w, v)) / scale)
    ok = worst_vv <= 1e-12 and worst_skew <= 1e-12
    return ok, f"|b(u,v,v)| {worst_vv:.2e}, |b(u,v,w)+b(u,w,v)| {worst_skew:.2e} (scaled)"


def _tri2(rng: np.random.Generator) -> tuple[bool, str]:
    worst = 0.0
    for _ in range(5):
        grid = make_grid(2, 32, 2 * np.pi)
        u = random_solenoidal(grid, rng, kmax=10)
        scale = (l2_norm(u) + h1_norm(u) + h2_seminorm(u)) ** 3
        worst = max(worst, abs(trilinear_b(u, u, laplacian(u))) / scale)
    return worst <= 1e-10, f"|b(u,u,lap u)|/||u||_2^3 = {worst:.2e}"


def _divergence_preservation(rng: np.random.Generator) -> tuple[bool, str]:
    grid = make_grid(2, 32, 1.0)
    state = init_state(random_solenoidal(grid, rng, kmax=6), 3, 2)
    worst = 0.0
    for _ in range(100):
        state, report = step(state, 1e-3, 1e-3)
        worst = max(worst, report.divergence_max, max_divergence(state.ubar))
    return worst <= 1e-11, f"max relative divergence {worst:.2e}"


def _operators(rng: np.random.Generator) -> tuple[bool, str]:
    grid = make_grid(2, 16, 3.0)
    f = random_field(grid, 1, rng)
    same = np.array_equal(divergence(gradient(f)).coeffs, laplacian(f).coeffs)
    back = l2_norm(inv_laplacian(laplacian(f)) - f) / l2_norm(f)
    return same and back <= 1e-13, f"div grad == lap: {same}, inverse pair error {back:.1e}"


def _tables() -> tuple[bool, str]:
    bad = []
    for k in range(1, 6):
        tab = scheme_table(k)
        for deg in range(k + 1):
            # unit step, t^{n+1} = 0, history at -1, -2, ...
            lhs = tab.alpha * Fraction(0) ** deg - sum(
                a * Fraction(-(i + 1)) ** deg for i, a in enumerate(tab.a_weights)
            )
            if lhs != (1 if deg == 1 else 0):
                bad.append(f"A_{k} deg {deg}")
            if deg < k:
                ext = sum(b * Fraction(-(i + 1)) ** deg for i, b in enumerate(tab.b_weights))
                if ext != Fraction(0) ** deg:
                    bad.append(f"B_{k} deg {deg}")
    return not bad, "exact" if not bad else ", ".join(bad)


CHECKS: dict[str, Callable[[np.random.Generator], tuple[bool, str]]] = {
    "leray_contraction": _leray_contraction,
    "leray_solenoidal": _leray_solenoidal,
    "trilinear_skew": _skew,
    "trilinear_2d_laplacian": _tri2,
    "divergence_preservation": _divergence_preservation,
    "operator_identities": _operators,
    "scheme_tables": lambda rng: _tables(),
}


def run_all(seed: int = 0) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    out = []
    for name, check in CHECKS.items():
        try:
            ok, detail = check(rng)
        except Exception as exc:  # a crashing check is a failing check
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append(CheckResult(name, bool(ok), detail))
    return out
