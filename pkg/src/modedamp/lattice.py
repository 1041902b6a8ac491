"""Truncated symmetric Fourier lattice for fields on the 2-pi-periodic torus.

Spectral fields live on the square of integer wavevectors k with
|k1|, |k2| <= max_wavenumber.  Coefficients follow the convention

    f(x) = (1 / 2 pi) * sum_k  fhat(k) * exp(i k.x)

so that Parseval reads  int f g dx = sum_k fhat(k) * conj(ghat(k)).
"""

from __future__ import annotations

import numpy as np
import scipy.fft


def default_grid_points(max_wavenumber: int) -> int:
    """Smallest fast, even collocation size with an exact dealiasing margin.

    Quadratic products of fields truncated at N are alias-free on the
    retained modes when the grid has at least 3N+1 points per dimension.
    """
    m = 3 * max_wavenumber + 1
    while True:
        m = scipy.fft.next_fast_len(m, real=True)
        if m % 2 == 0:
            return m
        m += 1


class Lattice:
    """Square lattice of retained modes plus its collocation grid.

    Parameters
    ----------
    max_wavenumber : int
        Modes k with |k1|, |k2| <= max_wavenumber are retained.
    grid_points : int, optional
        Collocation points per dimension (even).  Defaults to the smallest
        fast even size >= 3*max_wavenumber + 1 so quadratic products are
        exactly dealiased.
    """

    def __init__(self, max_wavenumber: int, grid_points: int | None = None):
        if max_wavenumber < 1:
            raise ValueError("max_wavenumber must be a positive integer")
        if grid_points is None:
            grid_points = default_grid_points(max_wavenumber)
        if grid_points % 2 != 0 or grid_points < 2 * max_wavenumber + 1:
            raise ValueError(
                "grid_points must be even and at least 2*max_wavenumber + 1"
            )
        self.max_wavenumber = int(max_wavenumber)
        self.grid_points = int(grid_points)

        n = self.max_wavenumber
        self.size = 2 * n + 1
        ks = np.arange(-n, n + 1)
        # k1 varies along axis 0, k2 along axis 1
        self.k1 = ks[:, None] * np.ones(self.size, dtype=int)[None, :]
        self.k2 = ks[None, :] * np.ones(self.size, dtype=int)[:, None]
        self.ksq = self.k1 ** 2 + self.k2 ** 2
        with np.errstate(divide="ignore"):
            inv = np.where(self.ksq > 0, 1.0 / np.maximum(self.ksq, 1), 0.0)
        self.inv_ksq = inv
        self.origin = (n, n)
        # wrapped row indices into the padded FFT grid
        self._rows = ks % self.grid_points
        self._cols = np.arange(n + 1)

    @property
    def dealias_ok(self) -> bool:
        """True when quadratic products are alias-free on retained modes."""
        return self.grid_points >= 3 * self.max_wavenumber + 1

    def index(self, k: tuple[int, int]) -> tuple[int, int]:
        """Array index of mode k = (k1, k2)."""
        n = self.max_wavenumber
        k1, k2 = k
        if abs(k1) > n or abs(k2) > n:
            raise KeyError(f"mode {k} outside lattice |k| <= {n}")
        return (k1 + n, k2 + n)

    def contains(self, k: tuple[int, int]) -> bool:
        n = self.max_wavenumber
        return abs(k[0]) <= n and abs(k[1]) <= n

    def modes(self):
        """All retained modes as (k1, k2) tuples, origin included."""
        n = self.max_wavenumber
        return [(a, b) for a in range(-n, n + 1) for b in range(-n, n + 1)]

    def __eq__(self, other):
        return (
            isinstance(other, Lattice)
            and self.max_wavenumber == other.max_wavenumber
            and self.grid_points == other.grid_points
        )

    def __hash__(self):
        return hash((self.max_wavenumber, self.grid_points))

    def __repr__(self):
        return f"Lattice(max_wavenumber={self.max_wavenumber}, grid_points={self.grid_points})"

    # -- transforms -------------------------------------------------------

    def to_grid(self, coeffs: np.ndarray) -> np.ndarray:
        """Evaluate spectral coefficients on the collocation grid.

        Accepts arbitrary leading batch dimensions; the trailing two axes
        must have shape (size, size).  Returns real samples at
        x_j = 2 pi j / grid_points.
        """
        n, m = self.max_wavenumber, self.grid_points
        batch = coeffs.shape[:-2]
        buf = np.zeros(batch + (m, m // 2 + 1), dtype=np.complex128)
        scale = m * m / (2.0 * np.pi)
        buf[..., self._rows[:, None], self._cols[None, :]] = (
            coeffs[..., :, n:] * scale
        )
        return scipy.fft.irfft2(buf, s=(m, m))

    def from_grid(self, grid: np.ndarray) -> np.ndarray:
        """Project real grid samples onto the retained modes (truncation)."""
        n, m = self.max_wavenumber, self.grid_points
        fwd = scipy.fft.rfft2(grid)
        half = fwd[..., self._rows[:, None], self._cols[None, :]] * (
            2.0 * np.pi / (m * m)
        )
        out = np.empty(grid.shape[:-2] + (self.size, self.size), dtype=np.complex128)
        out[..., :, n:] = half
        out[..., :, :n] = np.conj(half[..., ::-1, n:0:-1])
        return out
