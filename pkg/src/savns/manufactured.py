"""Manufactured solution on the periodic box [0, 2)^2.

    u1 =  pi exp(sin pi x) exp(sin pi y) cos(pi y) sin^2 t
    u2 = -pi exp(sin pi x) exp(sin pi y) cos(pi x) sin^2 t
    p  =  exp(cos pi x sin pi y) sin^2 t

The velocity is ``(d_y psi, -d_x psi) sin^2 t`` with
``psi = exp(sin pi x) exp(sin pi y)``, hence solenoidal; it is built as the
spectral curl of the sampled ``psi`` so the discrete field is solenoidal too.  The body force is the
residual of the momentum equation, assembled spectrally from the sampled
spatial profiles.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .fourier import (
    GridSpec,
    PhysicalField,
    SpectralField,
    gradient,
    h1_norm,
    laplacian,
    make_grid,
    to_spectral,
)
from .nonlinear import advection

__all__ = ["ManufacturedCase", "example_grid"]

BOX = (2.0, 2.0)


def example_grid(n: int = 40) -> GridSpec:
    return make_grid(2, [n, n], BOX)


@dataclass(frozen=True)
class ManufacturedCase:
    grid: GridSpec
    nu: float = 1.0

    def __post_init__(self) -> None:
        if self.grid.dim != 2 or self.grid.lengths != BOX:
            raise ValueError(f"manufactured case needs a 2-D grid on [0, 2)^2, got {self.grid}")

    @cached_property
    def velocity_profile(self) -> SpectralField:
        # spectral curl of the sampled stream function: discretely solenoidal on any grid
        x, y = self.grid.coordinates()
        psi = np.exp(np.sin(np.pi * x)) * np.exp(np.sin(np.pi * y))
        g = gradient(to_spectral(PhysicalField.from_values(self.grid, psi)))
        return SpectralField(self.grid, np.stack([g.coeffs[1], -g.coeffs[0]]))

    @cached_property
    def pressure_profile(self) -> SpectralField:
        x, y = self.grid.coordinates()
        p = np.exp(np.cos(np.pi * x) * np.sin(np.pi * y))
        return to_spectral(PhysicalField.from_values(self.grid, p))

    @cached_property
    def _force_parts(self) -> tuple[SpectralField, SpectralField, SpectralField]:
        u = self.velocity_profile
        return advection(u), laplacian(u), gradient(self.pressure_profile)

    def exact_velocity(self, t: float) -> SpectralField:
        return self.velocity_profile * np.sin(t) ** 2

    def exact_pressure(self, t: float) -> SpectralField:
        return self.pressure_profile * np.sin(t) ** 2

    def forcing(self, t: float) -> SpectralField:
        """``u_t + (u . grad) u - nu lap u + grad p`` at time ``t``."""
        s2 = np.sin(t) ** 2
        adv, lap, gradp = self._force_parts
        return (
            self.velocity_profile * (2.0 * np.sin(t) * np.cos(t))
            + adv * (s2 * s2)
            - lap * (self.nu * s2)
            + gradp * s2
        )

    def error_h1(
        self, u_num: SpectralField, p_num: SpectralField, t: float
    ) -> tuple[float, float]:
        """``H^1`` errors of velocity and pressure against the exact fields."""
        if u_num.grid != self.grid or p_num.grid != self.grid:
            raise ValueError("numerical fields are not on the manufactured-case grid")
        return (
            h1_norm(u_num - self.exact_velocity(t)),
            h1_norm(p_num - self.exact_pressure(t)),
        )
