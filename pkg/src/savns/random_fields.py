"""Random band-limited test fields."""

from __future__ import annotations

import numpy as np

from .fourier import GridSpec, PhysicalField, SpectralField, to_spectral
from .nonlinear import project_forcing


def random_field(
    grid: GridSpec,
    ncomp: int,
    rng: np.random.Generator,
    kmax: int | None = None,
    decay: float = 0.0,
) -> SpectralField:
    """Real zero-mean field with i.i.d. normal coefficients on ``|j|_inf <= kmax``.

    ``decay`` damps mode ``j`` by ``(1 + |j|^2)**(-decay/2)``.
    """
    values = rng.standard_normal((ncomp,) + grid.shape)
    f = to_spectral(PhysicalField(grid, values))
    if kmax is None and decay == 0.0:
        return f
    weight = np.ones(grid.spectral_shape)
    jj = np.zeros(grid.spectral_shape)
    for axis in range(grid.dim):
        idx = grid.mode_indices(axis)
        shape = [1] * grid.dim
        shape[axis] = -1
        j = np.abs(idx).reshape(shape)
        jj = jj + j**2
        if kmax is not None:
            weight = weight * (j <= kmax)
    weight = weight * (1.0 + jj) ** (-decay / 2.0)
    return SpectralField(grid, f.coeffs * weight)


def random_solenoidal(
    grid: GridSpec,
    rng: np.random.Generator,
    kmax: int | None = None,
    decay: float = 0.0,
) -> SpectralField:
    return project_forcing(random_field(grid, grid.dim, rng, kmax=kmax, decay=decay))
