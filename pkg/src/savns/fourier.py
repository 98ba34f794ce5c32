"""Periodic Fourier grids, transforms, spectral operators and Parseval norms.

Fields are stored in real-to-complex (``rfftn``) layout with coefficients
normalised so that ``u(x) = sum_j c_j exp(i xi_j . x)``, i.e. ``c_j`` is the
mean of ``u exp(-i xi_j . x)`` over the box.  The semantic model is the full
Hermitian-symmetric set ``|j| <= N/2 - 1`` per axis: the zero mode and the
unpaired Nyquist mode ``j = -N/2`` are always held at zero.

Array axes are ordered ``(component, x, y[, z])``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numpy.typing import NDArray

__all__ = [
    "GridSpec",
    "SpectralField",
    "PhysicalField",
    "make_grid",
    "to_spectral",
    "to_physical",
    "resample",
    "gradient",
    "divergence",
    "laplacian",
    "curl2d",
    "curl3d",
    "inv_laplacian",
    "leray_A",
    "dealiased_product",
    "inner",
    "l2_norm",
    "h1_seminorm",
    "h1_norm",
    "h2_seminorm",
    "max_divergence",
]


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid on ``[0, L_1) x ... x [0, L_d)``.

    Use :func:`make_grid` to build a validated instance.  Derived arrays
    (wavevectors, symbols, masks) are computed lazily and cached; equality
    and hashing only look at ``dim``, ``modes`` and ``lengths``.
    """

    dim: int
    modes: tuple[int, ...]
    lengths: tuple[float, ...]

    def __post_init__(self) -> None:
        if self.dim not in (2, 3):
            raise ValueError(f"dim must be 2 or 3, got {self.dim}")
        if len(self.modes) != self.dim or len(self.lengths) != self.dim:
            raise ValueError(
                f"need {self.dim} mode counts and lengths, got "
                f"modes={self.modes}, lengths={self.lengths}"
            )
        for n in self.modes:
            if n % 2 != 0 or n < 4:
                raise ValueError(f"mode counts must be even and >= 4, got {self.modes}")
        for length in self.lengths:
            if not (np.isfinite(length) and length > 0):
                raise ValueError(f"box lengths must be positive, got {self.lengths}")

    @property
    def volume(self) -> float:
        return float(np.prod(self.lengths))

    @property
    def shape(self) -> tuple[int, ...]:
        """Collocation grid shape."""
        return self.modes

    @cached_property
    def padded_shape(self) -> tuple[int, ...]:
        """Collocation shape of the 3/2-refined grid used for products."""
        return tuple(3 * n // 2 for n in self.modes)

    @cached_property
    def spectral_shape(self) -> tuple[int, ...]:
        return self.modes[:-1] + (self.modes[-1] // 2 + 1,)

    def mode_indices(self, axis: int) -> NDArray[np.int64]:
        """Integer mode index ``j`` at each storage position along ``axis``."""
        n = self.modes[axis]
        if axis == self.dim - 1:
            return np.arange(n // 2 + 1)
        return np.fft.fftfreq(n, 1.0 / n).astype(np.int64)

    def wavenumbers(self, axis: int) -> NDArray[np.float64]:
        """Wavevector component ``2*pi*j/L`` along ``axis`` (1-D)."""
        return 2.0 * np.pi * self.mode_indices(axis) / self.lengths[axis]

    @cached_property
    def k(self) -> tuple[NDArray[np.float64], ...]:
        """Per-axis wavenumbers reshaped to broadcast against spectral arrays."""
        out = []
        for axis in range(self.dim):
            shape = [1] * self.dim
            shape[axis] = -1
            out.append(self.wavenumbers(axis).reshape(shape))
        return tuple(out)

    @cached_property
    def k2(self) -> NDArray[np.float64]:
        """``|xi|^2`` on the spectral array."""
        total = np.zeros(self.spectral_shape)
        for kj in self.k:
            total = total + kj * kj
        return total

    @cached_property
    def inv_k2(self) -> NDArray[np.float64]:
        """``-1/|xi|^2`` with the zero mode mapped to 0 (symbol of the inverse Laplacian)."""
        out = np.zeros(self.spectral_shape)
        nz = self.k2 > 0
        out[nz] = -1.0 / self.k2[nz]
        return out

    @cached_property
    def mask(self) -> NDArray[np.bool_]:
        """True on retained modes: nonzero and ``|j| <= N/2 - 1`` on every axis."""
        keep = np.ones(self.spectral_shape, dtype=bool)
        for axis in range(self.dim):
            idx = self.mode_indices(axis)
            ok = np.abs(idx) <= self.modes[axis] // 2 - 1
            shape = [1] * self.dim
            shape[axis] = -1
            keep = keep & ok.reshape(shape)
        keep[(0,) * self.dim] = False
        return keep

    @cached_property
    def parseval_weights(self) -> NDArray[np.float64]:
        """Multiplicity of each stored coefficient in the full symmetric set."""
        w = np.full(self.spectral_shape, 2.0)
        w[..., 0] = 1.0
        return w * self.mask

    @cached_property
    def _pad_blocks(self) -> list[tuple[tuple[slice, ...], tuple[slice, ...]]]:
        # (source, destination) slice pairs moving retained modes into the padded layout
        per_axis = []
        for axis, (n, m) in enumerate(zip(self.modes, self.padded_shape)):
            h = n // 2
            if axis == self.dim - 1:
                per_axis.append([(slice(0, h), slice(0, h))])
            else:
                per_axis.append(
                    [(slice(0, h), slice(0, h)), (slice(h + 1, n), slice(m - h + 1, m))]
                )
        blocks = []
        for combo in itertools.product(*per_axis):
            src = tuple(c[0] for c in combo)
            dst = tuple(c[1] for c in combo)
            blocks.append((src, dst))
        return blocks

    def coordinates(self, padded: bool = False) -> tuple[NDArray[np.float64], ...]:
        """Collocation coordinates as broadcastable arrays (``indexing='ij'``)."""
        shape = self.padded_shape if padded else self.modes
        out = []
        for axis, (n, length) in enumerate(zip(shape, self.lengths)):
            x = np.arange(n) * (length / n)
            s = [1] * self.dim
            s[axis] = -1
            out.append(x.reshape(s))
        return tuple(out)


def make_grid(dim: int, modes, lengths) -> GridSpec:
    """Validated grid with ``modes[i]`` Fourier modes on a box of side ``lengths[i]``."""
    modes = tuple(int(n) for n in np.broadcast_to(modes, (dim,)))
    lengths = tuple(float(x) for x in np.broadcast_to(lengths, (dim,)))
    return GridSpec(dim=dim, modes=modes, lengths=lengths)


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Fourier coefficients of a real scalar (``ncomp == 1``) or vector field.

    ``coeffs`` has shape ``(ncomp, *grid.spectral_shape)``.  Instances are
    treated as immutable values; operations always return new arrays.
    """

    grid: GridSpec
    coeffs: NDArray[np.complex128]

    def __post_init__(self) -> None:
        expected = self.grid.spectral_shape
        if self.coeffs.ndim != self.grid.dim + 1 or self.coeffs.shape[1:] != expected:
            raise ValueError(
                f"coefficient array shape {self.coeffs.shape} does not match grid "
                f"spectral shape {expected}"
            )

    @property
    def ncomp(self) -> int:
        return self.coeffs.shape[0]

    @classmethod
    def zeros(cls, grid: GridSpec, ncomp: int) -> SpectralField:
        return cls(grid, np.zeros((ncomp,) + grid.spectral_shape, dtype=complex))

    @classmethod
    def from_coeffs(cls, grid: GridSpec, coeffs) -> SpectralField:
        """Wrap ``coeffs``, forcing dropped modes (zero, Nyquist) to 0."""
        c = np.array(coeffs, dtype=complex)
        if c.ndim == grid.dim:
            c = c[None]
        return cls(grid, c * grid.mask)

    def component(self, i: int) -> SpectralField:
        return SpectralField(self.grid, self.coeffs[i : i + 1])

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.coeffs)))

    def check_invariants(self, atol: float = 0.0) -> None:
        """Raise ``ValueError`` if mean, dropped modes, symmetry or finiteness are violated."""
        if not self.is_finite():
            raise ValueError("non-finite coefficients")
        if np.any(self.coeffs[:, ~self.grid.mask] != 0):
            raise ValueError("zero mode or Nyquist mode is nonzero")
        # on the last-axis zero plane the stored set must be self-conjugate
        plane = self.coeffs[(slice(None),) + (slice(None),) * (self.grid.dim - 1) + (0,)]
        flipped = plane
        for axis in range(1, self.grid.dim):
            flipped = np.roll(np.flip(flipped, axis=axis), 1, axis=axis)
        if np.max(np.abs(plane - np.conj(flipped)), initial=0.0) > atol:
            raise ValueError("Hermitian symmetry violated")

    def _check_compatible(self, other: SpectralField) -> None:
        if self.grid != other.grid:
            raise ValueError("fields live on different grids")

    def __add__(self, other: SpectralField) -> SpectralField:
        self._check_compatible(other)
        return SpectralField(self.grid, self.coeffs + other.coeffs)

    def __sub__(self, other: SpectralField) -> SpectralField:
        self._check_compatible(other)
        return SpectralField(self.grid, self.coeffs - other.coeffs)

    def __neg__(self) -> SpectralField:
        return SpectralField(self.grid, -self.coeffs)

    def __mul__(self, scalar: float) -> SpectralField:
        return SpectralField(self.grid, self.coeffs * float(scalar))

    __rmul__ = __mul__

    def __truediv__(self, scalar: float) -> SpectralField:
        return SpectralField(self.grid, self.coeffs / float(scalar))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SpectralField):
            return NotImplemented
        return self.grid == other.grid and np.array_equal(self.coeffs, other.coeffs)

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True, eq=False)
class PhysicalField:
    """Real samples of a field on the collocation grid or its 3/2 refinement."""

    grid: GridSpec
    values: NDArray[np.float64]

    def __post_init__(self) -> None:
        shape = self.values.shape[1:]
        if self.values.ndim != self.grid.dim + 1 or shape not in (
            self.grid.shape,
            self.grid.padded_shape,
        ):
            raise ValueError(
                f"value array shape {self.values.shape} matches neither the "
                f"collocation grid {self.grid.shape} nor its 3/2 refinement"
            )

    @property
    def ncomp(self) -> int:
        return self.values.shape[0]

    @property
    def padded(self) -> bool:
        return self.values.shape[1:] == self.grid.padded_shape and (
            self.grid.padded_shape != self.grid.shape
        )

    @classmethod
    def from_values(cls, grid: GridSpec, values) -> PhysicalField:
        v = np.asarray(values, dtype=float)
        if v.ndim == grid.dim:
            v = v[None]
        return cls(grid, v)


def _axes(grid: GridSpec) -> tuple[int, ...]:
    return tuple(range(-grid.dim, 0))


def to_spectral(p: PhysicalField) -> SpectralField:
    """Forward transform; removes the mean and truncates to the retained modes."""
    grid = p.grid
    if not np.all(np.isfinite(p.values)):
        raise ValueError("physical field contains non-finite values")
    raw = np.fft.rfftn(p.values, axes=_axes(grid), norm="forward")
    if p.padded:
        return SpectralField(grid, _unpad(grid, raw))
    return SpectralField(grid, raw * grid.mask)


def to_physical(s: SpectralField, padded: bool = False) -> PhysicalField:
    """Inverse transform onto the collocation grid (or the 3/2-refined grid)."""
    grid = s.grid
    if padded:
        values = _padded_values(grid, s.coeffs)
    else:
        values = np.fft.irfftn(s.coeffs, s=grid.shape, axes=_axes(grid), norm="forward")
    return PhysicalField(grid, values)


def resample(s: SpectralField, grid: GridSpec) -> SpectralField:
    """Same Fourier series on another grid of the same box: zero-fill or truncate."""
    src = s.grid
    if grid.dim != src.dim or grid.lengths != src.lengths:
        raise ValueError("resampling needs a grid on the same box")
    out = np.zeros((s.ncomp,) + grid.spectral_shape, dtype=complex)
    src_idx, dst_idx = [], []
    for axis in range(src.dim):
        h = min(src.modes[axis], grid.modes[axis]) // 2 - 1
        j = np.arange(h + 1) if axis == src.dim - 1 else np.arange(-h, h + 1)
        src_idx.append(j % src.modes[axis])
        dst_idx.append(j % grid.modes[axis])
    out[(slice(None),) + np.ix_(*dst_idx)] = s.coeffs[(slice(None),) + np.ix_(*src_idx)]
    return SpectralField(grid, out * grid.mask)


def _pad(grid: GridSpec, coeffs: NDArray) -> NDArray:
    lead = coeffs.shape[:-grid.dim]
    m = grid.padded_shape
    out = np.zeros(lead + m[:-1] + (m[-1] // 2 + 1,), dtype=complex)
    for src, dst in grid._pad_blocks:
        out[(...,) + dst] = coeffs[(...,) + src]
    return out


def _unpad(grid: GridSpec, raw: NDArray) -> NDArray:
    lead = raw.shape[:-grid.dim]
    out = np.zeros(lead + grid.spectral_shape, dtype=complex)
    for src, dst in grid._pad_blocks:
        out[(...,) + src] = raw[(...,) + dst]
    return out * grid.mask


def _padded_values(grid: GridSpec, coeffs: NDArray) -> NDArray[np.float64]:
    return np.fft.irfftn(
        _pad(grid, coeffs), s=grid.padded_shape, axes=_axes(grid), norm="forward"
    )


def _from_padded_values(grid: GridSpec, values: NDArray) -> NDArray[np.complex128]:
    raw = np.fft.rfftn(values, axes=_axes(grid), norm="forward")
    return _unpad(grid, raw)


def _require_ncomp(f: SpectralField, ncomp: int, op: str) -> None:
    if f.ncomp != ncomp:
        raise ValueError(f"{op} expects {ncomp} component(s), got {f.ncomp}")


def _ddx(c: NDArray, kj: NDArray) -> NDArray:
    return (1j * kj) * c


def gradient(s: SpectralField) -> SpectralField:
    _require_ncomp(s, 1, "gradient")
    c = s.coeffs[0]
    return SpectralField(s.grid, np.stack([_ddx(c, kj) for kj in s.grid.k]))


def divergence(v: SpectralField) -> SpectralField:
    grid = v.grid
    _require_ncomp(v, grid.dim, "divergence")
    total = _ddx(v.coeffs[0], grid.k[0])
    for j in range(1, grid.dim):
        total = total + _ddx(v.coeffs[j], grid.k[j])
    return SpectralField(grid, total[None])


def laplacian(f: SpectralField) -> SpectralField:
    """Multiply by ``-|xi|^2``; accumulated per axis to match ``divergence(gradient(f))``."""
    grid = f.grid
    total = -(grid.k[0] * (grid.k[0] * f.coeffs))
    for kj in grid.k[1:]:
        total = total - kj * (kj * f.coeffs)
    return SpectralField(grid, total)


def curl2d(v: SpectralField) -> SpectralField:
    """Scalar vorticity ``d_x v_y - d_y v_x``."""
    grid = v.grid
    if grid.dim != 2:
        raise ValueError("curl2d needs a 2-D grid")
    _require_ncomp(v, 2, "curl2d")
    kx, ky = grid.k
    w = _ddx(v.coeffs[1], kx) - _ddx(v.coeffs[0], ky)
    return SpectralField(grid, w[None])


def curl3d(v: SpectralField) -> SpectralField:
    grid = v.grid
    if grid.dim != 3:
        raise ValueError("curl3d needs a 3-D grid")
    _require_ncomp(v, 3, "curl3d")
    kx, ky, kz = grid.k
    a, b, c = v.coeffs
    return SpectralField(
        grid,
        np.stack(
            [
                _ddx(c, ky) - _ddx(b, kz),
                _ddx(a, kz) - _ddx(c, kx),
                _ddx(b, kx) - _ddx(a, ky),
            ]
        ),
    )


def inv_laplacian(f: SpectralField) -> SpectralField:
    """Zero-mean periodic solution of ``lap w = f``; the zero mode maps to 0."""
    return SpectralField(f.grid, f.coeffs * f.grid.inv_k2)


def _leray_A_coeffs(grid: GridSpec, c: NDArray) -> NDArray:
    # grad(inv_lap(div v)) - v  ==  xi (xi . v)/|xi|^2 - v
    kdotv = grid.k[0] * c[0]
    for j in range(1, grid.dim):
        kdotv = kdotv + grid.k[j] * c[j]
    s = -kdotv * grid.inv_k2
    return np.stack([grid.k[j] * s for j in range(grid.dim)]) - c


def leray_A(v: SpectralField) -> SpectralField:
    """The operator ``curl curl inv_lap``, i.e. minus the Leray projection.

    Computed mode by mode as ``grad inv_lap div v - v``; annihilates gradients
    and maps solenoidal fields to their negatives.
    """
    _require_ncomp(v, v.grid.dim, "leray_A")
    return SpectralField(v.grid, _leray_A_coeffs(v.grid, v.coeffs))


def dealiased_product(a: SpectralField, b: SpectralField) -> SpectralField:
    """Galerkin truncation of the pointwise product ``a*b`` (3/2 zero padding).

    Component counts must agree or one side must be scalar (broadcast).
    """
    if a.grid != b.grid:
        raise ValueError("dealiased_product: fields live on different grids")
    if a.ncomp != b.ncomp and 1 not in (a.ncomp, b.ncomp):
        raise ValueError(
            f"dealiased_product: incompatible component counts {a.ncomp}, {b.ncomp}"
        )
    grid = a.grid
    pa = _padded_values(grid, a.coeffs)
    pb = pa if b is a else _padded_values(grid, b.coeffs)
    return SpectralField(grid, _from_padded_values(grid, pa * pb))


def inner(a: SpectralField, b: SpectralField) -> float:
    """``L^2`` inner product ``(a, b)`` summed over components (Parseval)."""
    if a.grid != b.grid or a.ncomp != b.ncomp:
        raise ValueError("inner: incompatible fields")
    w = a.grid.parseval_weights
    return a.grid.volume * float(np.sum(w * (np.conj(a.coeffs) * b.coeffs).real))


def _weighted_sq(f: SpectralField, symbol: NDArray | None = None) -> float:
    w = f.grid.parseval_weights if symbol is None else f.grid.parseval_weights * symbol
    return f.grid.volume * float(np.sum(w * (f.coeffs.real**2 + f.coeffs.imag**2)))


def l2_norm(f: SpectralField) -> float:
    return float(np.sqrt(_weighted_sq(f)))


def h1_seminorm(f: SpectralField) -> float:
    """``||grad f||``."""
    return float(np.sqrt(_weighted_sq(f, f.grid.k2)))


def h1_norm(f: SpectralField) -> float:
    return float(np.sqrt(_weighted_sq(f) + _weighted_sq(f, f.grid.k2)))


def h2_seminorm(f: SpectralField) -> float:
    """``||lap f||``."""
    return float(np.sqrt(_weighted_sq(f, f.grid.k2**2)))


def max_divergence(v: SpectralField) -> float:
    """Max of ``|div v|`` on the collocation grid relative to the RMS of ``|grad v|``.

    Returns 0 for the zero field.
    """
    scale = h1_seminorm(v) / np.sqrt(v.grid.volume)
    if scale == 0.0:
        return 0.0
    d = to_physical(divergence(v)).values
    return float(np.max(np.abs(d)) / scale)
