import numpy as np
import pytest

from savns.fourier import PhysicalField, SpectralField, make_grid, to_spectral


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def grid2():
    return make_grid(2, [16, 16], [2 * np.pi, 2 * np.pi])


def sample(grid, *components):
    """SpectralField from callables or arrays evaluated on the collocation grid."""
    coords = grid.coordinates()
    arrays = []
    for c in components:
        v = c(*coords) if callable(c) else c
        arrays.append(np.broadcast_to(v, grid.shape))
    return to_spectral(PhysicalField.from_values(grid, np.stack(arrays)))


def centered(field: SpectralField, comp: int = 0) -> np.ndarray:
    """Full coefficient array indexed by ``j + h`` with ``h = N/2 - 1`` (2-D).

    Built from physical samples with a complex FFT, independent of the
    half-spectrum storage.
    """
    from savns.fourier import to_physical

    values = to_physical(field).values[comp]
    full = np.fft.fftn(values, norm="forward")
    nx, ny = values.shape
    hx, hy = nx // 2 - 1, ny // 2 - 1
    jx = np.arange(-hx, hx + 1)
    jy = np.arange(-hy, hy + 1)
    return full[np.ix_(jx % nx, jy % ny)]


def convolve_truncated(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Direct O(N^4) convolution of centered coefficient arrays, truncated to the band."""
    hx, hy = a.shape[0] // 2, a.shape[1] // 2
    out = np.zeros((4 * hx + 1, 4 * hy + 1), dtype=complex)
    for ix in range(a.shape[0]):
        for iy in range(a.shape[1]):
            if a[ix, iy] != 0:
                out[ix : ix + b.shape[0], iy : iy + b.shape[1]] += a[ix, iy] * b
    return out[hx : hx + 2 * hx + 1, hy : hy + 2 * hy + 1]


ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def record_criterion(number: int, passed: bool, detail: str) -> None:
    ACCEPTANCE[number] = (bool(passed), detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}")
