"""Convective terms, their Leray-projected form, trilinear forms and forcing projection."""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .fourier import (
    GridSpec,
    SpectralField,
    _axes,
    _leray_A_coeffs,
    _unpad,
    inner,
    leray_A,
)

__all__ = [
    "AdvectionWorkspace",
    "workspace_for",
    "convective_term",
    "advection",
    "projected_advection",
    "trilinear_b",
    "trilinear_bA",
    "project_forcing",
]


class AdvectionWorkspace:
    """Padded scratch storage for evaluating ``(u . grad) v`` on one grid.

    Not thread safe: use one workspace per thread.
    """

    def __init__(self, grid: GridSpec):
        self.grid = grid
        d = grid.dim
        m = grid.padded_shape
        self.padded_spectral_shape = m[:-1] + (m[-1] // 2 + 1,)
        # slots 0..d-1: u_j, slots d + i*d + j: d_j v_i
        self._buf = np.zeros((d + d * d,) + self.padded_spectral_shape, dtype=complex)

    def convective(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        """Coefficients of ``Pi_N sum_j u_j d_j v_i`` from coefficient arrays."""
        grid = self.grid
        d = grid.dim
        buf = self._buf
        stack = np.empty((d + d * d,) + grid.spectral_shape, dtype=complex)
        stack[:d] = u
        for i in range(d):
            for j in range(d):
                stack[d + i * d + j] = (1j * grid.k[j]) * v[i]
        for src, dst in grid._pad_blocks:
            buf[(slice(None),) + dst] = stack[(slice(None),) + src]
        phys = np.fft.irfftn(buf, s=grid.padded_shape, axes=_axes(grid), norm="forward")
        uu = phys[:d]
        grads = phys[d:].reshape((d, d) + phys.shape[1:])
        prod = np.einsum("j...,ij...->i...", uu, grads)
        raw = np.fft.rfftn(prod, axes=_axes(grid), norm="forward")
        return _unpad(grid, raw)


@lru_cache(maxsize=16)
def workspace_for(grid: GridSpec) -> AdvectionWorkspace:
    return AdvectionWorkspace(grid)


def _require_vector(*fields: SpectralField) -> None:
    grid = fields[0].grid
    for f in fields:
        if f.grid != grid:
            raise ValueError("fields live on different grids")
        if f.ncomp != grid.dim:
            raise ValueError(f"expected a {grid.dim}-component vector field, got {f.ncomp}")


def convective_term(u: SpectralField, v: SpectralField) -> SpectralField:
    """Galerkin-truncated ``(u . grad) v``."""
    _require_vector(u, v)
    return SpectralField(u.grid, workspace_for(u.grid).convective(u.coeffs, v.coeffs))


def advection(u: SpectralField) -> SpectralField:
    """Galerkin-truncated ``(u . grad) u``, evaluated exactly by 3/2 padding."""
    return convective_term(u, u)


def projected_advection(u: SpectralField) -> SpectralField:
    """``A((u . grad) u)``: minus the solenoidal part of the advection term."""
    _require_vector(u)
    adv = workspace_for(u.grid).convective(u.coeffs, u.coeffs)
    return SpectralField(u.grid, _leray_A_coeffs(u.grid, adv))


def trilinear_b(u: SpectralField, v: SpectralField, w: SpectralField) -> float:
    """``b(u, v, w) = integral of ((u . grad) v) . w``."""
    _require_vector(u, v, w)
    return inner(convective_term(u, v), w)


def trilinear_bA(u: SpectralField, v: SpectralField, w: SpectralField) -> float:
    """``b_A(u, v, w) = integral of A((u . grad) v) . w``."""
    _require_vector(u, v, w)
    return inner(leray_A(convective_term(u, v)), w)


def project_forcing(f: SpectralField) -> SpectralField:
    """Solenoidal part ``f - grad inv_lap div f`` of a body force (``-A f``)."""
    _require_vector(f)
    return SpectralField(f.grid, -_leray_A_coeffs(f.grid, f.coeffs))
