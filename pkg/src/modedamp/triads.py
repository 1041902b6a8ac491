"""Galerkin-truncated spectral Euler dynamics via explicit triad sums.

The vorticity ODE on the truncated lattice reads, per retained mode m,

    d/dt what(m) = -(1/4pi) sum_{k+l=m} (k1 l2 - k2 l1)
                                       (1/|k|^2 - 1/|l|^2) what(k) what(l)

with the sum over ordered pairs (k, l) of retained nonzero modes.  Pairs
on a common circle or common line through the origin contribute zero and
are omitted from the table, so fields supported on such sets are steady
to the last bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .field import SpectralVorticity, hermitize
from .lattice import Lattice
from .modesets import ModeSet

BLOWUP_LIMIT = 1e12


class BlowUpError(RuntimeError):
    """Raised when coefficients leave the conservative range; the truncated
    dynamics are bounded, so this indicates integrator misuse."""


@dataclass(frozen=True)
class TriadTable:
    """Sparse ordered-pair interaction table on a fixed lattice.

    Flat indices address the (size, size) coefficient array; coefficient
    zeros are omitted.  The table is exactly symmetric under global
    negation of all three modes.
    """

    lattice: Lattice
    m_idx: np.ndarray
    k_idx: np.ndarray
    l_idx: np.ndarray
    coef: np.ndarray

    def __len__(self):
        return len(self.coef)


def triad_coefficient(k, l) -> float:
    """Interaction weight of the ordered pair (k, l); zero for pairs on a
    shared circle or line through the origin."""
    det = k[0] * l[1] - k[1] * l[0]
    if det == 0:
        return 0.0
    ksq = k[0] ** 2 + k[1] ** 2
    lsq = l[0] ** 2 + l[1] ** 2
    if ksq == lsq:
        return 0.0
    return -det * (1.0 / ksq - 1.0 / lsq) / (4.0 * np.pi)


def build_triads(lattice: Lattice, support: ModeSet | None = None) -> TriadTable:
    """Enumerate every ordered interaction (k, l) -> m = k + l with all
    three modes retained and a nonzero weight.

    When a finite support set is given, k and l range over it instead of
    the whole lattice (m still ranges over the lattice, which is how
    leakage out of a declared support becomes visible).
    """
    n = lattice.max_wavenumber
    if support is None:
        members = [
            (a, b)
            for a in range(-n, n + 1)
            for b in range(-n, n + 1)
            if (a, b) != (0, 0)
        ]
    else:
        if support.kind != "finite":
            raise ValueError("support must be a finite set")
        members = sorted(support.members)
        for k in members:
            if not lattice.contains(k):
                raise ValueError(f"support mode {k} outside the lattice")

    size = lattice.size
    m_idx, k_idx, l_idx, coefs = [], [], [], []
    for k in members:
        for l in members:
            if k == l:
                continue
            c = triad_coefficient(k, l)
            if c == 0.0:
                continue
            m = (k[0] + l[0], k[1] + l[1])
            if m == (0, 0) or not lattice.contains(m):
                continue
            m_idx.append((m[0] + n) * size + (m[1] + n))
            k_idx.append((k[0] + n) * size + (k[1] + n))
            l_idx.append((l[0] + n) * size + (l[1] + n))
            coefs.append(c)
    return TriadTable(
        lattice,
        np.asarray(m_idx, dtype=np.int64),
        np.asarray(k_idx, dtype=np.int64),
        np.asarray(l_idx, dtype=np.int64),
        np.asarray(coefs, dtype=np.float64),
    )


def rhs_arrays(table: TriadTable, coeffs: np.ndarray) -> np.ndarray:
    """Triad-sum time derivative on a raw coefficient array."""
    flat = coeffs.reshape(-1)
    contrib = table.coef * flat[table.k_idx] * flat[table.l_idx]
    out = np.zeros(flat.shape, dtype=np.complex128)
    np.add.at(out, table.m_idx, contrib)
    return out.reshape(coeffs.shape)


def rhs(state: "OdeState", table: TriadTable) -> SpectralVorticity:
    """Spectral Euler right-hand side at the state's vorticity."""
    return state.w.with_coeffs(rhs_arrays(table, state.w.coeffs))


@dataclass(frozen=True)
class OdeState:
    time: float
    w: SpectralVorticity
    step_count: int = 0


def step_rk4(state: OdeState, dt: float, table: TriadTable) -> OdeState:
    """Classical RK4 step of the triad ODE; reality is re-imposed exactly
    after the update (the stages preserve it to rounding)."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    w0 = state.w.coeffs
    a = rhs_arrays(table, w0)
    b = rhs_arrays(table, w0 + 0.5 * dt * a)
    c = rhs_arrays(table, w0 + 0.5 * dt * b)
    d = rhs_arrays(table, w0 + dt * c)
    w1 = w0 + (dt / 6.0) * (a + 2.0 * (b + c) + d)
    w1 = hermitize(w1)
    if not np.all(np.isfinite(w1)) or np.max(np.abs(w1)) > BLOWUP_LIMIT:
        raise BlowUpError(
            f"coefficients exceeded {BLOWUP_LIMIT:g} at t={state.time + dt:g}"
        )
    return OdeState(state.time + dt, state.w.with_coeffs(w1), state.step_count + 1)


def integrate(
    state: OdeState,
    dt: float,
    n_steps: int,
    table: TriadTable,
    callback=None,
) -> OdeState:
    """Advance n_steps, invoking callback(state) after each step."""
    for _ in range(n_steps):
        state = step_rk4(state, dt, table)
        if callback is not None:
            callback(state)
    return state


def support_tracker(state: OdeState, threshold: float) -> ModeSet:
    """Modes with coefficient magnitude above the threshold; leakage out
    of a declared support shows up as growth of this set."""
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    return ModeSet.finite(state.w.support(threshold))
