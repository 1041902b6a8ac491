"""Scenario configuration, named presets, run manifests, and the
assertion engine behind the `simulate` subcommand.

A scenario is a flat JSON document (structured values like mode sets stay
JSON) so experiment records diff cleanly.  Reports never contain
timestamps; given the manifest's config and seed a report regenerates
bitwise.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass

import numpy as np

from . import __version__
from .field import SpectralVorticity, random_vorticity
from .lattice import Lattice
from .modesets import ModeSet, linf_growth_constant
from .operators import DampingMask
from .solver import BudgetLedger, SolverConfig, run, steady_fixture


class ConfigError(ValueError):
    """Invalid or inconsistent scenario configuration."""


NAMED_MODE_SETS = {
    "empty": lambda: ModeSet.empty(),
    # the four lowest modes, a circle of squared radius 1
    "circle1": lambda: ModeSet.finite([(1, 0), (-1, 0), (0, 1), (0, -1)]),
    # multiples of (1, 0) up to |k| = 3, a line through the origin
    "line1": lambda: ModeSet.finite(
        [(1, 0), (-1, 0), (2, 0), (-2, 0), (3, 0), (-3, 0)]
    ),
    # everything except the four lowest modes
    "cofinite1": lambda: ModeSet.cofinite([(1, 0), (-1, 0), (0, 1), (0, -1)]),
}


DEFAULT_SCENARIO = {
    "lattice_n": 16,
    "grid_points": None,
    "undamped": "empty",
    "nu": 0.5,
    "epsilon": 0.0,
    "dt": 0.001,
    "t_final": 1.0,
    "diag_stride": 100,
    "seed": 0,
    "initial": {"type": "random", "max_active": 4, "amplitude": 1.0},
    "checkpoint_stride": 0,
    "assertions": {
        "monotone_budgets": True,
        "budget_residual_rel": 1e-6,
        "steady_tol": None,
        "damped_l2_rel_final_max": None,
        "dissipation_final_max": None,
        "linf_growth_bound": False,
        "linf_growth_slack": 1e-6,
    },
}


def parse_mode_set(value) -> ModeSet:
    if isinstance(value, str):
        try:
            return NAMED_MODE_SETS[value]()
        except KeyError:
            raise ConfigError(
                f"unknown mode set name {value!r}; known: {sorted(NAMED_MODE_SETS)}"
            ) from None
    if isinstance(value, dict):
        try:
            return ModeSet.from_json_dict(value)
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"malformed mode set document: {exc}") from None
        # symmetry violations surface as ValueError from ModeSet and name
        # the offending wavevector
    raise ConfigError("mode set must be a name or a {kind, members} document")


def merged_scenario(overrides: dict) -> dict:
    doc = json.loads(json.dumps(DEFAULT_SCENARIO))
    unknown = set(overrides) - set(DEFAULT_SCENARIO)
    if unknown:
        raise ConfigError(f"unknown scenario keys: {sorted(unknown)}")
    for key, val in overrides.items():
        if key in ("assertions",) and isinstance(val, dict):
            bad = set(val) - set(DEFAULT_SCENARIO["assertions"])
            if bad:
                raise ConfigError(f"unknown assertion keys: {sorted(bad)}")
            doc[key].update(val)
        else:
            doc[key] = val
    return doc


def scenario_hash(doc: dict) -> str:
    return hashlib.sha256(
        json.dumps(doc, sort_keys=True, separators=(",", ":")).encode()
    ).hexdigest()


def build_solver_config(doc: dict) -> SolverConfig:
    try:
        lattice = Lattice(int(doc["lattice_n"]), doc.get("grid_points"))
        mask = DampingMask(
            parse_mode_set(doc["undamped"]),
            nu=float(doc["nu"]),
            epsilon=float(doc["epsilon"]),
        )
        return SolverConfig(
            lattice,
            mask,
            dt=float(doc["dt"]),
            t_final=float(doc["t_final"]),
            diag_stride=int(doc["diag_stride"]),
            seed=int(doc["seed"]),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def build_initial(doc: dict, cfg: SolverConfig) -> SpectralVorticity:
    spec = doc["initial"]
    kind = spec.get("type")
    if kind == "random":
        rng = np.random.default_rng(cfg.seed)
        return random_vorticity(
            cfg.lattice,
            rng,
            max_active=int(spec.get("max_active") or cfg.lattice.max_wavenumber),
            amplitude=float(spec.get("amplitude", 1.0)),
        )
    if kind == "fixture":
        return steady_fixture(
            spec.get("kind", "eigenfunction"),
            int(spec.get("shell", 1)),
            cfg.lattice,
            seed=cfg.seed,
            amplitude=float(spec.get("amplitude", 1.0)),
        )
    if kind == "file":
        with open(spec["path"]) as fh:
            return SpectralVorticity.from_json(
                fh.read(), grid_points=cfg.lattice.grid_points
            )
    raise ConfigError(f"unknown initial-data type {kind!r}")


@dataclass
class RunOutcome:
    scenario: dict
    ledger: BudgetLedger
    report: dict
    checkpoints: list  # (step, t, SpectralVorticity)

    @property
    def all_passed(self) -> bool:
        return self.report["all_passed"]


def evaluate_assertions(
    doc: dict,
    cfg: SolverConfig,
    w0: SpectralVorticity,
    w_final: SpectralVorticity,
    ledger: BudgetLedger,
) -> dict:
    """Run the scenario's assertion list against the finished trajectory.

    Physical assertions are refused (reported as null) when the
    truncation-error sentinel tripped; identity residual checks are about
    the discrete system itself and always apply.
    """
    checks = doc["assertions"]
    results = {}
    resolution_ok = ledger.metadata.get("resolution_ok", True)

    t = ledger.column("t")
    energy = ledger.column("energy")
    enstrophy = ledger.column("enstrophy")

    if checks.get("monotone_budgets"):
        tol = 1e-8 * cfg.t_final * max(1.0, energy[0], 0.5 * enstrophy[0])
        passed = bool(
            np.all(np.diff(energy) <= tol) and np.all(np.diff(enstrophy) <= 2 * tol)
        )
        results["monotone_budgets"] = {"passed": passed, "tolerance": tol}

    rel = checks.get("budget_residual_rel")
    if rel is not None:
        res_e = float(np.max(np.abs(ledger.column("energy_residual"))))
        res_i = float(np.max(np.abs(ledger.column("enstrophy_residual"))))
        scale_e = max(energy[0], 1e-300)
        scale_i = max(0.5 * enstrophy[0], 1e-300)
        results["budget_residual_rel"] = {
            "passed": bool(res_e <= rel * scale_e and res_i <= rel * scale_i),
            "energy_residual_rel": res_e / scale_e,
            "enstrophy_residual_rel": res_i / scale_i,
            "threshold": rel,
        }

    tol = checks.get("steady_tol")
    if tol is not None:
        drift = float(np.max(np.abs(w_final.coeffs - w0.coeffs)))
        results["steady_tol"] = {"passed": bool(drift <= tol), "drift": drift,
                                 "threshold": tol}

    ratio = checks.get("damped_l2_rel_final_max")
    if ratio is not None:
        initial = max(float(ledger.column("damped_l2")[0]), 1e-300)
        final = float(ledger.column("damped_l2")[-1])
        entry = {"final_over_initial": final / initial, "threshold": ratio}
        entry["passed"] = bool(final / initial <= ratio) if resolution_ok else None
        results["damped_l2_rel_final_max"] = entry

    cap = checks.get("dissipation_final_max")
    if cap is not None:
        # (damped-part L2)^2 is exactly the negated velocity-side
        # dissipation functional divided by nu, evaluated in coefficients
        final = float(ledger.column("damped_l2")[-1]) ** 2
        entry = {"final_dissipation_functional": final, "threshold": cap}
        entry["passed"] = bool(final <= cap) if resolution_ok else None
        results["dissipation_final_max"] = entry

    if checks.get("linf_growth_bound"):
        mask = cfg.mask
        if mask.undamped.kind != "cofinite":
            raise ConfigError("linf_growth_bound needs a cofinite undamped set")
        c = linf_growth_constant(ModeSet.finite(mask.undamped.members))
        slack = float(checks.get("linf_growth_slack", 1e-6))
        linf = ledger.column("vorticity_linf")
        w0_l2 = float(np.sqrt(enstrophy[0]))
        bound = linf[0] + mask.nu * c * w0_l2 * t + slack
        margin = float(np.min(bound - linf))
        entry = {
            "constant": c,
            "min_margin": margin,
            "slack": slack,
        }
        entry["passed"] = bool(np.all(linf <= bound)) if resolution_ok else None
        results["linf_growth_bound"] = entry

    return results


def run_scenario(overrides: dict) -> RunOutcome:
    doc = merged_scenario(overrides)
    cfg = build_solver_config(doc)
    w0 = build_initial(doc, cfg)

    checkpoints = []
    stride = int(doc.get("checkpoint_stride") or 0)

    def cb(step_idx, t_now, w):
        if step_idx == cfg.n_steps or (
            stride > 0 and step_idx % stride == 0
        ):
            checkpoints.append(
                (step_idx, t_now, w0.with_coeffs(np.array(w[0])))
            )

    ledger = run(w0, cfg, checkpoint_cb=cb)
    w_final = checkpoints[-1][2]
    assertion_results = evaluate_assertions(doc, cfg, w0, w_final, ledger)
    passed = [r["passed"] for r in assertion_results.values()]
    report = {
        "scenario_hash": scenario_hash(doc),
        "package_version": __version__,
        "n_steps": cfg.n_steps,
        "energy_initial": float(ledger.column("energy")[0]),
        "energy_final": float(ledger.column("energy")[-1]),
        "enstrophy_initial": float(ledger.column("enstrophy")[0]),
        "enstrophy_final": float(ledger.column("enstrophy")[-1]),
        "resolution_ok": ledger.metadata.get("resolution_ok"),
        "tail_enstrophy_fraction_max": ledger.metadata.get(
            "tail_enstrophy_fraction_max"
        ),
        "assertions": assertion_results,
        "refused": any(p is None for p in passed),
        "all_passed": all(p for p in passed if p is not None) and not any(
            p is None for p in passed
        ),
    }
    return RunOutcome(doc, ledger, report, checkpoints)


PRESETS = {
    "degenerate-steady": {
        "description": "circle-supported data inside the undamped set stays "
        "steady to the last diagnostic digit",
        "overrides": {
            "lattice_n": 12,
            "undamped": "circle1",
            "nu": 0.5,
            "dt": 0.002,
            "t_final": 5.0,
            "diag_stride": 250,
            "initial": {"type": "fixture", "kind": "single_shell", "shell": 1,
                        "amplitude": 1.0},
            "assertions": {"steady_tol": 1e-10, "budget_residual_rel": 1e-6},
        },
    },
    "finite-K-relaxation": {
        "description": "long-horizon relaxation onto the undamped modes for "
        "a finite undamped set",
        "overrides": {
            "lattice_n": 32,
            "undamped": "circle1",
            "nu": 0.5,
            "dt": 0.005,
            "t_final": 200.0,
            "diag_stride": 400,
            "seed": 7,
            "initial": {"type": "random", "max_active": 5, "amplitude": 0.25},
            "assertions": {
                "damped_l2_rel_final_max": 1e-6,
                "dissipation_final_max": 1e-10,
                "budget_residual_rel": 1e-5,
            },
        },
    },
    "cofinite-linf-bound": {
        "description": "sup-norm growth bound for a cofinite undamped set, "
        "checked pointwise in time",
        "overrides": {
            "lattice_n": 32,
            "undamped": "cofinite1",
            "nu": 0.5,
            "dt": 0.002,
            "t_final": 20.0,
            "diag_stride": 100,
            "seed": 3,
            # the undamped tail is inviscid, so the amplitude is kept small
            # enough that no enstrophy reaches the truncation shell by T
            "initial": {"type": "random", "max_active": 2, "amplitude": 0.05},
            "assertions": {
                "linf_growth_bound": True,
                "budget_residual_rel": 1e-6,
                "monotone_budgets": True,
            },
        },
    },
    "decay-small-data": {
        "description": "small-data exponential decay of the damped part for "
        "a degenerate undamped set",
        "overrides": {
            "lattice_n": 8,
            "undamped": {"kind": "finite", "members": [[1, 0], [-1, 0]]},
            "nu": 1.0,
            "dt": 0.001,
            "t_final": 10.0,
            "diag_stride": 100,
            "seed": 1,
            "initial": {"type": "random", "max_active": 2, "amplitude": 0.01},
            "assertions": {"budget_residual_rel": 1e-6,
                           "monotone_budgets": True},
        },
    },
}


def run_preset(name: str) -> RunOutcome:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; known: {sorted(PRESETS)}")
    return run_scenario(PRESETS[name]["overrides"])


def build_manifest(doc: dict, files: dict) -> dict:
    """Reproduction record for one run: config, seed, version, and hashes
    of every produced file.  Timestamps live here, never in report.json."""
    return {
        "scenario": doc,
        "scenario_hash": scenario_hash(doc),
        "seed": doc["seed"],
        "package_version": __version__,
        "created_unix": time.time(),
        "files": {
            name: hashlib.sha256(payload).hexdigest()
            for name, payload in files.items()
        },
    }
