"""Pseudo-spectral time stepping of the partially damped vorticity
equation with continuous budget verification.

The linear part is diagonal in Fourier space (decay rate nu |k|^2 on the
damped modes, epsilon |k|^2 on the undamped ones) and is integrated
exactly by an integrating factor; classical RK4 handles the advective
nonlinearity.  The energy and enstrophy dissipation integrals are
accumulated with the same RK4 stages, so the budget identities hold to
integrator accuracy and any residual is a genuine defect.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.fft

from .field import SpectralVorticity, hermitize, random_vorticity
from .lattice import Lattice
from .modesets import ModeSet, classify_set, kappa_min, coupling_constant_estimate
from .operators import DampingMask
from .triads import BLOWUP_LIMIT, BlowUpError

STABILITY_GUARD_C = 10.0


@dataclass(frozen=True)
class SolverConfig:
    lattice: Lattice
    mask: DampingMask
    dt: float
    t_final: float
    diag_stride: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.t_final <= 0:
            raise ValueError("t_final must be positive")
        if self.diag_stride < 1:
            raise ValueError("diag_stride must be >= 1")
        n = self.lattice.max_wavenumber
        if self.mask.nu > 0:
            bound = STABILITY_GUARD_C / (self.mask.nu * n * n)
            if self.dt > bound:
                raise ValueError(
                    f"dt={self.dt:g} exceeds the stability guard "
                    f"{STABILITY_GUARD_C:g}/(nu N^2) = {bound:g}"
                )

    @property
    def n_steps(self) -> int:
        return max(1, int(round(self.t_final / self.dt)))


LEDGER_COLUMNS = (
    "t",
    "energy",
    "enstrophy",
    "cumulative_dissipation",
    "energy_residual",
    "enstrophy_residual",
    "vorticity_linf",
    "damped_l2",
    "undamped_l2",
)


@dataclass
class BudgetLedger:
    """Time series of budget diagnostics, one row per sampled step.

    cumulative_dissipation is the enstrophy-side integral of the (negated,
    hence nonnegative) dissipation functional.  Residuals are signed
    absolute defects of the energy and (halved) enstrophy identities.
    """

    rows: np.ndarray  # shape (n_samples, len(LEDGER_COLUMNS))
    metadata: dict = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        return self.rows[:, LEDGER_COLUMNS.index(name)]

    def to_csv(self) -> str:
        lines = [",".join(LEDGER_COLUMNS)]
        for row in self.rows:
            lines.append(",".join(f"{v:.17g}" for v in row))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text: str) -> "BudgetLedger":
        lines = [ln for ln in text.strip().splitlines() if ln]
        if lines[0].split(",") != list(LEDGER_COLUMNS):
            raise ValueError("unexpected ledger header")
        rows = np.array(
            [[float(v) for v in ln.split(",")] for ln in lines[1:]], dtype=float
        )
        return cls(rows)


class Solver:
    """Precomputed multipliers, integrating factors, and reusable FFT
    buffers for one config; the hot path avoids reallocation."""

    def __init__(self, cfg: SolverConfig):
        self.cfg = cfg
        lat = cfg.lattice
        if not lat.dealias_ok:
            raise ValueError(
                f"grid_points={lat.grid_points} violates the dealiasing "
                f"margin 3*max_wavenumber+1={3 * lat.max_wavenumber + 1}"
            )
        inside = cfg.mask.undamped_mask(lat)
        self.inside = inside
        self.rates = cfg.mask.decay_rates(lat)          # nu|k|^2 or eps|k|^2
        self.energy_weight = np.where(inside, cfg.mask.epsilon, cfg.mask.nu)
        dt = cfg.dt
        self.exp_half = np.exp(-0.5 * dt * self.rates)
        self.exp_full = np.exp(-dt * self.rates)
        # truncation-error sentinel: highest-third square shell
        n = lat.max_wavenumber
        cut = (2 * n) // 3
        self.tail = np.maximum(np.abs(lat.k1), np.abs(lat.k2)) > cut
        # fused multipliers for (u1, u2, dw/dx1, dw/dx2), FFT scale folded in
        m = lat.grid_points
        scale = m * m / (2.0 * np.pi)
        self._mult = scale * np.stack([
            1j * lat.k2 * lat.inv_ksq,
            -1j * lat.k1 * lat.inv_ksq,
            1j * lat.k1 + 0j,
            1j * lat.k2 + 0j,
        ])
        self._buf = None  # lazily sized to the batch shape

    def _nonlin(self, w: np.ndarray) -> np.ndarray:
        """Advective right-hand side -u.grad(w) on a batched coefficient
        array; equal to the exact triad sum on the retained modes."""
        lat = self.cfg.lattice
        n, m = lat.max_wavenumber, lat.grid_points
        rows, cols = lat._rows, lat._cols
        shape = (4,) + w.shape[:-2] + (m, m // 2 + 1)
        if self._buf is None or self._buf.shape != shape:
            self._buf = np.zeros(shape, dtype=np.complex128)
        # only the retained block is ever written, the padding stays zero
        mult_half = self._mult[(slice(None),) + (None,) * (w.ndim - 2) + (slice(None), slice(n, None))]
        self._buf[..., rows[:, None], cols[None, :]] = mult_half * w[None, ..., :, n:]
        grids = scipy.fft.irfft2(self._buf, s=(m, m))
        advection = grids[0] * grids[2]
        advection += grids[1] * grids[3]
        fwd = scipy.fft.rfft2(advection)
        out = np.empty(w.shape, dtype=np.complex128)
        out[..., :, n:] = fwd[..., rows[:, None], cols[None, :]]
        out[..., :, n:] *= -2.0 * np.pi / (m * m)
        out[..., :, :n] = np.conj(out[..., ::-1, 2 * n:n:-1])
        out[..., lat.origin[0], lat.origin[1]] = 0.0
        return out

    def step_arrays(self, w: np.ndarray):
        """One integrating-factor RK4 step on a (batched) coefficient
        array.  Returns (w_next, energy_dissipation_increment,
        enstrophy_dissipation_increment); increments are the nonnegative
        integrals of the negated dissipation functionals over the step,
        quadratured with the same RK4 stages.
        """
        dt = self.cfg.dt
        e1, e2 = self.exp_half, self.exp_full
        w1 = w
        n1 = self._nonlin(w1)
        w2 = e1 * (w + 0.5 * dt * n1)
        n2 = self._nonlin(w2)
        w3 = e1 * w + 0.5 * dt * n2
        n3 = self._nonlin(w3)
        w4 = e2 * w + dt * e1 * n3
        n4 = self._nonlin(w4)
        out = e2 * w + (dt / 6.0) * (e2 * n1 + 2.0 * e1 * (n2 + n3) + n4)
        out = hermitize(out)

        d_energy = 0.0
        d_enstrophy = 0.0
        for stage, weight in ((w1, 1.0), (w2, 2.0), (w3, 2.0), (w4, 1.0)):
            s2 = stage.real ** 2
            s2 += stage.imag ** 2
            d_energy = d_energy + weight * np.sum(
                self.energy_weight * s2, axis=(-2, -1)
            )
            d_enstrophy = d_enstrophy + weight * np.sum(
                self.rates * s2, axis=(-2, -1)
            )
        return out, (dt / 6.0) * d_energy, (dt / 6.0) * d_enstrophy

    def diagnostics(self, w: np.ndarray, t, cum_e, cum_i, e0, i0):
        """Ledger rows (batched) at time t."""
        lat = self.cfg.lattice
        mag2 = w.real ** 2 + w.imag ** 2
        energy = 0.5 * np.sum(mag2 * lat.inv_ksq, axis=(-2, -1))
        enstrophy = np.sum(mag2, axis=(-2, -1))
        linf = np.max(np.abs(lat.to_grid(w)), axis=(-2, -1))
        inside_l2 = np.sqrt(np.sum(np.where(self.inside, mag2, 0.0), axis=(-2, -1)))
        outside_l2 = np.sqrt(np.maximum(enstrophy - inside_l2 ** 2, 0.0))
        res_e = energy + cum_e - e0
        res_i = 0.5 * enstrophy + cum_i - 0.5 * i0
        cols = [
            np.broadcast_to(np.asarray(t, dtype=float), energy.shape),
            energy,
            enstrophy,
            cum_i,
            res_e,
            res_i,
            linf,
            outside_l2,
            inside_l2,
        ]
        return np.stack([np.asarray(c, dtype=float) for c in cols], axis=-1)

    def tail_fraction(self, w: np.ndarray):
        mag2 = w.real ** 2 + w.imag ** 2
        total = np.sum(mag2, axis=(-2, -1))
        tail = np.sum(np.where(self.tail, mag2, 0.0), axis=(-2, -1))
        return np.where(total > 0, tail / np.maximum(total, 1e-300), 0.0)


def run_batch(w0: np.ndarray, cfg: SolverConfig, checkpoint_cb=None) -> list[BudgetLedger]:
    """Integrate a batch of initial coefficient arrays (B, size, size) under
    one config; returns one ledger per trajectory.

    checkpoint_cb, when given, is called as checkpoint_cb(step, t, coeffs)
    at every diagnostic sample.
    """
    solver = Solver(cfg)
    w = hermitize(np.array(w0, dtype=np.complex128, copy=True))
    batch = w.shape[:-2]
    zeros = np.zeros(batch)
    mag2 = w.real ** 2 + w.imag ** 2
    e0 = 0.5 * np.sum(mag2 * cfg.lattice.inv_ksq, axis=(-2, -1))
    i0 = np.sum(mag2, axis=(-2, -1))
    cum_e = zeros.copy()
    cum_i = zeros.copy()
    samples = [solver.diagnostics(w, 0.0, cum_e, cum_i, e0, i0)]
    tail_max = solver.tail_fraction(w)
    if checkpoint_cb is not None:
        checkpoint_cb(0, 0.0, w)
    for step in range(1, cfg.n_steps + 1):
        w, de, di = solver.step_arrays(w)
        cum_e = cum_e + de
        cum_i = cum_i + di
        if not np.all(np.isfinite(w)) or np.max(np.abs(w)) > BLOWUP_LIMIT:
            raise BlowUpError(f"coefficients diverged at t={step * cfg.dt:g}")
        if step % cfg.diag_stride == 0 or step == cfg.n_steps:
            t = step * cfg.dt
            samples.append(solver.diagnostics(w, t, cum_e, cum_i, e0, i0))
            tail_max = np.maximum(tail_max, solver.tail_fraction(w))
            if checkpoint_cb is not None:
                checkpoint_cb(step, t, w)
    stacked = np.stack(samples)  # (n_samples, *batch, ncols)
    flat = stacked.reshape(stacked.shape[0], -1, stacked.shape[-1])
    tails = np.asarray(tail_max).reshape(-1)
    ledgers = []
    for b in range(flat.shape[1]):
        ledgers.append(
            BudgetLedger(
                flat[:, b, :],
                metadata={
                    "tail_enstrophy_fraction_max": float(tails[b]),
                    "resolution_ok": bool(tails[b] <= 1e-8),
                },
            )
        )
    return ledgers


def step(state: SpectralVorticity, cfg: SolverConfig) -> SpectralVorticity:
    """Single integrating-factor RK4 step of one field."""
    solver = Solver(cfg)
    out, _, _ = solver.step_arrays(state.coeffs)
    return state.with_coeffs(out)


def run(w0: SpectralVorticity, cfg: SolverConfig, checkpoint_cb=None) -> BudgetLedger:
    """Integrate one trajectory to t_final, collecting the budget ledger."""
    if w0.lattice != cfg.lattice:
        raise ValueError("initial data lattice does not match the config")
    [ledger] = run_batch(w0.coeffs[None, ...], cfg, checkpoint_cb=checkpoint_cb)
    return ledger


def final_state_and_ledger(w0: SpectralVorticity, cfg: SolverConfig):
    """run() variant that also returns the final field."""
    holder = {}

    def cb(step_idx, t, w):
        holder["w"] = np.array(w[0])

    ledger = run(w0, cfg, checkpoint_cb=cb)
    return w0.with_coeffs(hermitize(holder["w"])), ledger


def decay_experiment(
    w0: SpectralVorticity,
    cfg: SolverConfig,
    fit_window: tuple[float, float] | None = None,
) -> dict:
    """Exponential-decay measurement of the damped-mode part for a
    degenerate undamped set.

    Asserts the measured decay rate of its L2 norm only when the
    small-data precondition  ||w0||_L2 < nu * kappa_min / c  holds, with c
    the lattice coupling-constant estimate; otherwise the run is reported
    as observational only.
    """
    mask = cfg.mask
    if mask.undamped.kind != "finite":
        raise ValueError("decay experiment needs a finite undamped set")
    report: dict = {}
    degenerate = classify_set(mask.undamped).is_degenerate
    report["undamped_degenerate"] = degenerate
    kmin = kappa_min(mask.undamped, cfg.lattice)
    c_est = coupling_constant_estimate(mask.undamped, cfg.lattice)
    w0_l2 = w0.l2_norm()
    report["kappa_min"] = kmin
    report["coupling_constant"] = c_est
    report["w0_l2"] = w0_l2
    threshold = np.inf if c_est == 0 else mask.nu * kmin / c_est
    report["smallness_threshold"] = threshold
    precondition = degenerate and mask.nu > 0 and w0_l2 < threshold
    report["precondition_met"] = bool(precondition)

    ledger = run(w0, cfg)
    t = ledger.column("t")
    wd = ledger.column("damped_l2")
    report["ledger"] = ledger
    lo, hi = fit_window if fit_window is not None else (0.2 * cfg.t_final, cfg.t_final)
    sel = (t >= lo) & (t <= hi) & (wd > 0)
    if np.count_nonzero(sel) >= 2:
        slope = np.polyfit(t[sel], np.log(wd[sel]), 1)[0]
        report["measured_decay_rate"] = float(-slope)
    else:
        report["measured_decay_rate"] = None
    if precondition and report["measured_decay_rate"] is not None:
        bound = mask.nu * kmin - c_est * w0_l2
        report["rate_lower_bound"] = bound
        report["rate_ok"] = bool(report["measured_decay_rate"] >= bound - 1e-3)
    else:
        report["rate_ok"] = None
    return report


def stability_experiment(
    w0: SpectralVorticity,
    perturbation_scale: float,
    cfg: SolverConfig,
    gap_growth_factor: float = 1.0,
) -> dict:
    """Paired-run continuous-dependence measurement.

    Evolves the base field, a perturbed copy (random perturbation of the
    given L2 size), and a half-perturbed copy.  Records the velocity-space
    gap over time and checks continuous dependence at desk scale:
    final_gap(scale/2) <= gap_growth_factor * final_gap(scale).
    """
    lat = cfg.lattice
    rng = np.random.default_rng(cfg.seed + 1)
    pert = random_vorticity(lat, rng, max_active=lat.max_wavenumber // 2 or 1)
    pert_arr = pert.coeffs / max(pert.l2_norm(), 1e-300) * perturbation_scale
    stackw = np.stack([
        w0.coeffs,
        w0.coeffs + pert_arr,
        w0.coeffs + 0.5 * pert_arr,
    ])

    solver = Solver(cfg)
    w = hermitize(stackw.astype(np.complex128))
    gaps_full, gaps_half, times = [], [], []

    def vel_gap(a, b):
        d = a - b
        return float(
            np.sqrt(np.sum((d.real ** 2 + d.imag ** 2) * lat.inv_ksq))
        )

    times.append(0.0)
    gaps_full.append(vel_gap(w[1], w[0]))
    gaps_half.append(vel_gap(w[2], w[0]))
    for step_idx in range(1, cfg.n_steps + 1):
        w, _, _ = solver.step_arrays(w)
        if not np.all(np.isfinite(w)) or np.max(np.abs(w)) > BLOWUP_LIMIT:
            raise BlowUpError(f"coefficients diverged at t={step_idx * cfg.dt:g}")
        if step_idx % cfg.diag_stride == 0 or step_idx == cfg.n_steps:
            times.append(step_idx * cfg.dt)
            gaps_full.append(vel_gap(w[1], w[0]))
            gaps_half.append(vel_gap(w[2], w[0]))
    report = {
        "t": np.array(times),
        "gap_full": np.array(gaps_full),
        "gap_half": np.array(gaps_half),
        "perturbation_scale": perturbation_scale,
    }
    if perturbation_scale == 0:
        report["gap_ok"] = bool(max(gaps_full) == 0.0)
    else:
        report["final_ratio"] = gaps_half[-1] / max(gaps_full[-1], 1e-300)
        report["gap_ok"] = bool(report["final_ratio"] <= gap_growth_factor)
    return report


def shell_modes(lattice: Lattice, radius_sq: int) -> list:
    """Lattice modes with |k|^2 equal to radius_sq."""
    n = lattice.max_wavenumber
    return [
        (a, b)
        for a in range(-n, n + 1)
        for b in range(-n, n + 1)
        if a * a + b * b == radius_sq
    ]


def steady_fixture(
    kind: str,
    shell_radius_sq: int,
    lattice: Lattice,
    seed: int = 0,
    amplitude: float = 1.0,
) -> SpectralVorticity:
    """Exact steady states of the truncated Euler dynamics.

    "eigenfunction": a single cosine stream function on the shell, so the
    vorticity is a Laplacian eigenfunction.  "single_shell": random
    reality-constrained coefficients on every mode of the shell (a circle
    support, hence steady).
    """
    modes = shell_modes(lattice, shell_radius_sq)
    if not modes:
        raise ValueError(
            f"{shell_radius_sq} is not a sum of two squares representable "
            f"on this lattice"
        )
    arr = np.zeros((lattice.size, lattice.size), dtype=np.complex128)
    if kind == "eigenfunction":
        k = sorted(m for m in modes if m > (0, 0))[0]
        arr[lattice.index(k)] = amplitude
        arr[lattice.index((-k[0], -k[1]))] = amplitude
    elif kind == "single_shell":
        rng = np.random.default_rng(seed)
        for k in sorted(modes):
            if not (k[0] > 0 or (k[0] == 0 and k[1] > 0)):
                continue
            val = amplitude * rng.uniform(0.5, 1.5) * np.exp(
                1j * rng.uniform(0, 2 * np.pi)
            )
            arr[lattice.index(k)] = val
            arr[lattice.index((-k[0], -k[1]))] = np.conj(val)
    else:
        raise ValueError(f"unknown fixture kind {kind!r}")
    return SpectralVorticity(lattice, arr)
