"""Command-line front end.

Exit codes: 0 success, 2 a requested assertion failed, 3 a numerical
guard tripped (divergence, or the truncation sentinel refused a physical
claim), 4 configuration or input error.
"""

from __future__ import annotations

import argparse
import itertools
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .field import SpectralVorticity, random_vorticity
from .lattice import Lattice
from .modesets import ModeSet, classify_set
from .presets import (
    NAMED_MODE_SETS,
    PRESETS,
    ConfigError,
    build_manifest,
    merged_scenario,
    parse_mode_set,
    run_scenario,
)
from .solver import steady_fixture
from .triads import BlowUpError, OdeState, build_triads, integrate

EXIT_OK = 0
EXIT_ASSERTION = 2
EXIT_GUARD = 3
EXIT_CONFIG = 4


def _load_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"no such file: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from None


def _write(path: Path, payload: bytes):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(payload)


def _json_bytes(doc) -> bytes:
    return (json.dumps(doc, indent=1, sort_keys=True) + "\n").encode()


def _emit_run(out_dir: Path, outcome) -> None:
    files = {
        "ledger.csv": outcome.ledger.to_csv().encode(),
        "report.json": _json_bytes(outcome.report),
    }
    for step_idx, t_now, w in outcome.checkpoints:
        files[f"checkpoint_{step_idx:08d}.json"] = (w.to_json() + "\n").encode()
    manifest = build_manifest(outcome.scenario, files)
    for name, payload in files.items():
        _write(out_dir / name, payload)
    _write(out_dir / "manifest.json", _json_bytes(manifest))


def _outcome_exit(outcome) -> int:
    if outcome.report["refused"]:
        return EXIT_GUARD
    if not outcome.report["all_passed"]:
        return EXIT_ASSERTION
    return EXIT_OK


def cmd_simulate(args) -> int:
    overrides = {}
    if args.preset:
        if args.preset not in PRESETS:
            raise ConfigError(
                f"unknown preset {args.preset!r}; known: {sorted(PRESETS)}"
            )
        overrides.update(PRESETS[args.preset]["overrides"])
    if args.config:
        user = _load_json(args.config)
        for key, val in user.items():
            if key == "assertions" and "assertions" in overrides:
                overrides["assertions"] = {**overrides["assertions"], **val}
            else:
                overrides[key] = val
    doc = merged_scenario(overrides)
    if args.print_config:
        print(json.dumps(doc, indent=1, sort_keys=True))
        return EXIT_OK
    outcome = run_scenario(overrides)
    if args.out_dir:
        _emit_run(Path(args.out_dir), outcome)
    for name, result in outcome.report["assertions"].items():
        status = {True: "pass", False: "FAIL", None: "refused"}[result["passed"]]
        print(f"{name}: {status}")
    print(f"energy {outcome.report['energy_initial']:.6g} -> "
          f"{outcome.report['energy_final']:.6g}")
    return _outcome_exit(outcome)


def cmd_galerkin(args) -> int:
    support = ModeSet.from_json_dict(_load_json(args.support))
    if support.kind != "finite":
        raise ConfigError("galerkin support must be a finite mode set")
    lattice = Lattice(args.lattice)
    table = build_triads(lattice, support=support)
    rng = np.random.default_rng(args.seed)
    w0 = random_vorticity(lattice, rng, support=set(support.members),
                          amplitude=args.amplitude)

    tracked = sorted(support.members)
    report = classify_set(support)
    if report.star_witness is not None:
        witness_mode = report.star_witness[0]
        if witness_mode not in support.members:
            tracked.append(witness_mode)
    header = ["t"] + [f"abs_{k1}_{k2}" for k1, k2 in tracked] + [
        "energy", "enstrophy"]

    inv_ksq = lattice.inv_ksq
    lines = [",".join(header)]

    def record(state: OdeState):
        mag2 = state.w.coeffs.real ** 2 + state.w.coeffs.imag ** 2
        vals = [state.time]
        vals += [abs(state.w[k]) for k in tracked]
        vals.append(0.5 * float(np.sum(mag2 * inv_ksq)))
        vals.append(float(np.sum(mag2)))
        lines.append(",".join(f"{v:.17g}" for v in vals))

    n_steps = max(1, int(round(args.t_final / args.dt)))
    stride = max(1, args.stride)
    state = OdeState(0.0, w0)
    record(state)
    for step_idx in range(1, n_steps + 1):
        state = integrate(state, args.dt, 1, table)
        if step_idx % stride == 0 or step_idx == n_steps:
            record(state)
    Path(args.out).write_text("\n".join(lines) + "\n")
    print(f"wrote {args.out}: {len(lines) - 1} samples, "
          f"{len(tracked)} tracked modes")
    return EXIT_OK


def cmd_check_modeset(args) -> int:
    if args.input in NAMED_MODE_SETS:
        mode_set = parse_mode_set(args.input)
    else:
        mode_set = parse_mode_set(_load_json(args.input))
    report = classify_set(mode_set)
    doc = report.to_json_dict()
    text = json.dumps(doc, indent=1, sort_keys=True)
    if args.out:
        Path(args.out).write_text(text + "\n")
    print(text)
    return EXIT_OK


def _grid_runs(base: dict, grid: dict):
    """Cartesian product of dotted-key parameter lists over a base
    scenario."""
    keys = sorted(grid)
    for combo in itertools.product(*(grid[k] for k in keys)):
        doc = json.loads(json.dumps(base))
        for key, val in zip(keys, combo):
            target = doc
            parts = key.split(".")
            for part in parts[:-1]:
                target = target.setdefault(part, {})
            target[parts[-1]] = val
        yield dict(zip(keys, combo)), doc


def _sweep_one(overrides):
    try:
        outcome = run_scenario(overrides)
        return _outcome_exit(outcome), outcome, None
    except BlowUpError as exc:
        return EXIT_GUARD, None, str(exc)
    except ConfigError as exc:
        return EXIT_CONFIG, None, str(exc)


def cmd_sweep(args) -> int:
    base = _load_json(args.config) if args.config else {}
    grid = _load_json(args.grid)
    if not isinstance(grid, dict) or not grid or not all(
        isinstance(v, list) and v for v in grid.values()
    ):
        raise ConfigError("grid must map parameter paths to nonempty lists")
    out_root = Path(args.out_dir)
    runs = list(_grid_runs(base, grid))
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_sweep_one, [ov for _, ov in runs]))
    else:
        results = [_sweep_one(ov) for _, ov in runs]
    worst = EXIT_OK
    index = []
    for i, ((point, _), (code, outcome, error)) in enumerate(zip(runs, results)):
        run_dir = out_root / f"run_{i:04d}"
        entry = {"run": run_dir.name, "point": point}
        if outcome is not None:
            _emit_run(run_dir, outcome)
            entry["status"] = {EXIT_OK: "pass", EXIT_ASSERTION: "fail",
                               EXIT_GUARD: "refused"}[code]
        else:
            entry["status"] = "diverged" if code == EXIT_GUARD else "config-error"
            entry["error"] = error
        worst = max(worst, code)
        index.append(entry)
        print(f"{entry['run']}: {entry['status']}  {point}")
    _write(out_root / "sweep.json", _json_bytes(index))
    return worst


def cmd_fixtures(args) -> int:
    lattice = Lattice(args.lattice)
    w = steady_fixture(args.kind, args.shell, lattice, seed=args.seed,
                       amplitude=args.amplitude)
    Path(args.out).write_text(w.to_json() + "\n")
    print(f"wrote {args.out}: {len(w.support(0.0))} modes")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="modedamp",
        description="partially damped 2D vorticity dynamics on the torus",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one damped scenario")
    p.add_argument("--config", help="scenario JSON (overrides the preset)")
    p.add_argument("--preset", choices=sorted(PRESETS),
                   help="named scenario to start from")
    p.add_argument("--out-dir", help="write ledger, report, checkpoints, manifest")
    p.add_argument("--print-config", action="store_true",
                   help="print the fully merged scenario and exit")
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("galerkin", help="integrate the triad ODE on a support")
    p.add_argument("--support", required=True, help="finite mode-set JSON")
    p.add_argument("--lattice", type=int, required=True)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--t-final", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--amplitude", type=float, default=1.0)
    p.add_argument("--stride", type=int, default=10,
                   help="record every this many steps")
    p.add_argument("--out", required=True, help="CSV output path")
    p.set_defaults(fn=cmd_galerkin)

    p = sub.add_parser("check-modeset", help="classify a mode set")
    p.add_argument("--input", required=True,
                   help="mode-set JSON or a named set")
    p.add_argument("--out", help="also write the report here")
    p.set_defaults(fn=cmd_check_modeset)

    p = sub.add_parser("sweep", help="run a parameter grid of scenarios")
    p.add_argument("--config", help="base scenario JSON")
    p.add_argument("--grid", required=True,
                   help="JSON mapping dotted parameter paths to value lists")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--jobs", type=int, default=1,
                   help="run grid points in this many worker processes")
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("fixtures", help="emit an exact steady state")
    p.add_argument("--kind", choices=["eigenfunction", "single_shell"],
                   default="eigenfunction")
    p.add_argument("--shell", type=int, default=1,
                   help="squared radius of the shell")
    p.add_argument("--lattice", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--amplitude", type=float, default=1.0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_fixtures)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except BlowUpError as exc:
        print(f"numerical guard: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (ConfigError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
