"""Spectral vorticity and velocity fields on the truncated lattice.

Both field types are immutable value objects around dense coefficient
arrays indexed by (k1 + N, k2 + N).  Two invariants are maintained:

* reality:    fhat(-k) = conj(fhat(k)) for every retained k,
* mean-zero:  fhat(0, 0) = 0  (vorticity integrates to zero; velocity is
  taken in the zero-mean frame).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .lattice import Lattice

REALITY_TOL = 1e-12


def hermitize(coeffs: np.ndarray) -> np.ndarray:
    """Project onto the reality-symmetric subspace: average with the
    conjugate of the k -> -k reflection."""
    return 0.5 * (coeffs + np.conj(coeffs[..., ::-1, ::-1]))


def reality_defect(coeffs: np.ndarray) -> float:
    return float(np.max(np.abs(coeffs - np.conj(coeffs[..., ::-1, ::-1]))))


@dataclass(frozen=True)
class SpectralVorticity:
    """Fourier coefficients of a scalar vorticity field."""

    lattice: Lattice
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.coeffs.shape[-2:] != (self.lattice.size, self.lattice.size):
            raise ValueError("coefficient array does not match the lattice")
        self.coeffs.setflags(write=False)

    @classmethod
    def zeros(cls, lattice: Lattice) -> "SpectralVorticity":
        return cls(lattice, np.zeros((lattice.size, lattice.size), dtype=np.complex128))

    @classmethod
    def from_modes(cls, lattice: Lattice, modes: dict) -> "SpectralVorticity":
        """Build a field from {k: coefficient}; the conjugate half may be
        omitted and is filled in from reality."""
        arr = np.zeros((lattice.size, lattice.size), dtype=np.complex128)
        for k, val in modes.items():
            arr[lattice.index(k)] = val
        for k, val in modes.items():
            mk = (-k[0], -k[1])
            if mk not in modes:
                arr[lattice.index(mk)] = np.conj(val)
        return cls(lattice, arr).validated()

    def validated(self) -> "SpectralVorticity":
        defect = reality_defect(self.coeffs)
        scale = max(1.0, float(np.max(np.abs(self.coeffs)) or 0.0))
        if defect > REALITY_TOL * scale:
            raise ValueError(f"reality invariant violated (defect {defect:.3e})")
        if self.coeffs[self.lattice.origin] != 0:
            raise ValueError("mean-zero invariant violated: nonzero (0,0) coefficient")
        return self

    def __getitem__(self, k: tuple[int, int]) -> complex:
        return complex(self.coeffs[self.lattice.index(k)])

    def with_coeffs(self, coeffs: np.ndarray) -> "SpectralVorticity":
        return SpectralVorticity(self.lattice, coeffs)

    def to_grid(self) -> np.ndarray:
        return self.lattice.to_grid(self.coeffs)

    def l2_norm(self) -> float:
        """L2 norm of the physical field, sqrt(int w^2 dx)."""
        return float(np.sqrt(np.sum(np.abs(self.coeffs) ** 2)))

    def linf_norm(self) -> float:
        """Max |w| on the collocation grid."""
        return float(np.max(np.abs(self.to_grid())))

    def support(self, threshold: float = 0.0) -> set:
        """Modes with |coefficient| above threshold."""
        idx = np.argwhere(np.abs(self.coeffs) > threshold)
        n = self.lattice.max_wavenumber
        return {(int(i) - n, int(j) - n) for i, j in idx}

    # -- serialization ----------------------------------------------------

    def to_json_dict(self) -> dict:
        """Half-lattice JSON form: only modes with k1 > 0, or k1 == 0 and
        k2 > 0, are listed; the conjugate half is implied by reality."""
        entries = []
        n = self.lattice.max_wavenumber
        for (i, j) in np.argwhere(self.coeffs != 0):
            k1, k2 = int(i) - n, int(j) - n
            if k1 > 0 or (k1 == 0 and k2 > 0):
                c = self.coeffs[i, j]
                entries.append([k1, k2, float(c.real), float(c.imag)])
        entries.sort(key=lambda e: (e[0], e[1]))
        return {"lattice": self.lattice.max_wavenumber, "coeffs": entries}

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())

    @classmethod
    def from_json_dict(cls, doc: dict, grid_points: int | None = None) -> "SpectralVorticity":
        lattice = Lattice(int(doc["lattice"]), grid_points)
        arr = np.zeros((lattice.size, lattice.size), dtype=np.complex128)
        for k1, k2, re, im in doc["coeffs"]:
            if not (k1 > 0 or (k1 == 0 and k2 > 0)):
                raise ValueError(f"serialized mode ({k1},{k2}) is not in the half-lattice")
            arr[lattice.index((k1, k2))] = complex(re, im)
            arr[lattice.index((-k1, -k2))] = complex(re, -im)
        return cls(lattice, arr).validated()

    @classmethod
    def from_json(cls, text: str, grid_points: int | None = None) -> "SpectralVorticity":
        return cls.from_json_dict(json.loads(text), grid_points)


@dataclass(frozen=True)
class SpectralVelocity:
    """Fourier coefficients of a divergence-free velocity field; component
    axis first, so coeffs has shape (2, size, size)."""

    lattice: Lattice
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.coeffs.shape != (2, self.lattice.size, self.lattice.size):
            raise ValueError("velocity coefficients must have shape (2, size, size)")
        self.coeffs.setflags(write=False)

    def validated(self) -> "SpectralVelocity":
        defect = reality_defect(self.coeffs)
        scale = max(1.0, float(np.max(np.abs(self.coeffs)) or 0.0))
        if defect > REALITY_TOL * scale:
            raise ValueError(f"reality invariant violated (defect {defect:.3e})")
        if np.any(self.coeffs[:, self.lattice.origin[0], self.lattice.origin[1]] != 0):
            raise ValueError("zero-mean frame violated: nonzero (0,0) coefficient")
        div = self.lattice.k1 * self.coeffs[0] + self.lattice.k2 * self.coeffs[1]
        if np.max(np.abs(div)) > REALITY_TOL * scale:
            raise ValueError("velocity is not divergence-free")
        return self

    def to_grid(self) -> np.ndarray:
        """Real velocity samples, shape (2, M, M)."""
        return self.lattice.to_grid(self.coeffs)

    def l2_norm_sq(self) -> float:
        """int |u|^2 dx via Parseval."""
        return float(np.sum(np.abs(self.coeffs) ** 2))


def random_vorticity(
    lattice: Lattice,
    rng: np.random.Generator,
    max_active: int | None = None,
    amplitude: float = 1.0,
    support: set | None = None,
) -> SpectralVorticity:
    """Random reality-constrained field with per-mode magnitudes drawn
    uniformly from the annulus [0.5, 1.5] * amplitude and uniform phases.

    Either restrict to modes with |k1|,|k2| <= max_active, or to an
    explicit symmetric support set.
    """
    n = lattice.max_wavenumber
    if support is None:
        if max_active is None:
            max_active = n
        support = {
            (a, b)
            for a in range(-max_active, max_active + 1)
            for b in range(-max_active, max_active + 1)
            if (a, b) != (0, 0)
        }
    arr = np.zeros((lattice.size, lattice.size), dtype=np.complex128)
    for k in sorted(support):
        if not (k[0] > 0 or (k[0] == 0 and k[1] > 0)):
            continue
        mag = amplitude * rng.uniform(0.5, 1.5)
        phase = rng.uniform(0.0, 2.0 * np.pi)
        val = mag * np.exp(1j * phase)
        arr[lattice.index(k)] = val
        arr[lattice.index((-k[0], -k[1]))] = np.conj(val)
    return SpectralVorticity(lattice, arr)
