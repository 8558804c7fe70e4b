"""Command-line front end.

Subcommands: ``bipartite``, ``erase``, ``cluster``, ``smolin``, ``criteria``,
``state``, ``report``.  Artifacts are JSON (states, verdicts) and CSV
(sweeps); all floats are printed with 17 significant digits so files
round-trip losslessly and identical configurations produce byte-identical
output.  ``CVSIM_THREADS`` caps sweep parallelism; rows are always ordered
by grid index.

Exit codes: 0 ok, 2 usage error, 3 physics-validation failure, 4 solver
non-convergence.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import core, criteria, protocols
from .errors import CvsimError, NoConvergenceError, NonPhysicalError

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PHYSICS = 3
EXIT_NO_CONVERGENCE = 4


def _fmt(value):
    """JSON-ready value with floats at 17 significant digits."""
    if isinstance(value, bool):
        return value
    if isinstance(value, (float, np.floating)):
        return float(format(float(value), ".17g"))
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, dict):
        return {k: _fmt(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_fmt(v) for v in value]
    return value


def _write_json(obj: dict, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_fmt(obj), fh, indent=1, sort_keys=True)
        fh.write("\n")


def _threads() -> int | None:
    raw = os.environ.get("CVSIM_THREADS", "")
    if not raw:
        return None
    try:
        value = int(raw)
    except ValueError:
        raise SystemExit(f"CVSIM_THREADS must be an integer, got {raw!r}")
    return max(1, value)


def _parse_grid(spec: str, name: str) -> list[float]:
    """Parse 'start,stop,count' into a uniform grid (count >= 1)."""
    parts = spec.split(",")
    if len(parts) != 3:
        raise ValueError(f"--{name} expects start,stop,count, got {spec!r}")
    start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    if count < 1:
        raise ValueError(f"--{name} count must be >= 1")
    if count == 1:
        return [start]
    return list(np.linspace(start, stop, count))


# ---------------------------------------------------------------------------
# subcommand handlers


def _cmd_bipartite(args) -> int:
    if args.n1 < 1 or args.n2 < 1:
        raise NonPhysicalError("thermal parameters must be >= 1")
    if args.kappa < 0:
        raise ValueError("kappa must be >= 0")
    if args.erase and args.steps != "one":
        raise ValueError("--erase applies to the one-step protocol only")
    steps = "one_step" if args.steps == "one" else "two_step"
    state, verdict = protocols.bipartite_thermal(
        args.n1, args.n2, args.kappa, steps=steps, outcomes=(args.outcome, args.outcome2)
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    core.save_state(state, out / "state.json")
    record = verdict.to_dict()
    record["params"] = {"n1": args.n1, "n2": args.n2, "kappa": args.kappa, "steps": args.steps}
    if args.erase:
        erased = protocols.erase_entanglement(state, args.n1, args.n2, args.kappa)
        core.save_state(erased, out / "erased_state.json")
        initial = core.thermal_state([args.n1, args.n2])
        record["erasure"] = {
            "ppt": criteria.is_ppt(erased, (0,)),
            "restored": bool(np.max(np.abs(erased.cm - initial.cm)) <= 1e-9),
        }
    _write_json(record, out / "verdict.json")
    return EXIT_OK


def _cmd_erase(args) -> int:
    state, _ = protocols.bipartite_thermal(args.n1, args.n2, args.kappa, outcomes=(args.outcome,))
    erased = protocols.erase_entanglement(state, args.n1, args.n2, args.kappa, outcome=args.outcome2)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    core.save_state(state, out / "state.json")
    core.save_state(erased, out / "erased_state.json")
    initial = core.thermal_state([args.n1, args.n2])
    _write_json(
        {
            "ppt": criteria.is_ppt(erased, (0,)),
            "restored": bool(np.max(np.abs(erased.cm - initial.cm)) <= 1e-9),
            "max_abs_diff_from_initial": float(np.max(np.abs(erased.cm - initial.cm))),
        },
        out / "erase.json",
    )
    return EXIT_OK


def _cmd_cluster(args) -> int:
    kappa_grid = _parse_grid(args.kappa_grid, "kappa-grid")
    t_grid = _parse_grid(args.t_grid, "T-grid")
    sweep = protocols.cluster_sweep(
        args.shape, kappa_grid, t_grid, omega=args.omega, max_workers=_threads()
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    sweep.to_csv(out / "sweep.csv")
    undecided = sweep.meta["undecided_points"]
    if args.boundaries:
        record = {}
        for kappa in kappa_grid:
            try:
                record[format(kappa, ".17g")] = protocols.cluster_boundaries(
                    args.shape, kappa, omega=args.omega
                )
            except (ValueError, NonPhysicalError) as exc:
                record[format(kappa, ".17g")] = {"error": str(exc)}
        _write_json(record, out / "boundaries.json")
    if undecided:
        print(f"warning: {undecided} undecided separability points (class=0)", file=sys.stderr)
    return EXIT_OK


def _cmd_smolin(args) -> int:
    kappa = None if args.kappa == "auto" else float(args.kappa)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.sweep:
        r_grid = _parse_grid(args.r_grid, "r-grid")
        vp_grid = _parse_grid(args.var_p_grid, "var-p-grid")
        sweep = protocols.smolin_negativity_sweep(r_grid, vp_grid, max_workers=_threads())
        sweep.to_csv(out / "negativity.csv")
        return EXIT_OK
    params = protocols.SmolinParams(
        r=args.r, kappa=kappa, var_p_beam=args.var_p, var_x_probe=args.var_x_probe
    )
    momenta = None
    if args.seed is not None:
        rng = np.random.default_rng(args.seed)
        sd = math.sqrt(params.var_p_beam / 2.0)
        momenta = (rng.normal(0.0, sd), rng.normal(0.0, sd))
    state = protocols.smolin_generate(params, momenta=momenta)
    core.save_state(state, out / "state.json")
    record = protocols.smolin_cut_reports(state).to_dict()
    record["params"] = {
        "r": params.r,
        "kappa": params.kappa_value,
        "var_p": params.var_p_beam,
        "var_x_probe": params.var_x_probe_value,
        "noise_strength": params.noise_strength,
    }
    if momenta is not None:
        record["sampled_momenta"] = list(momenta)
    if args.unlock:
        unlocked = protocols.smolin_unlock(state, params, outcomes=tuple(args.outcomes))
        core.save_state(unlocked.state, out / "unlocked_state.json")
        unlock_record = unlocked.to_dict()
        unlock_record["logneg_unlocked"] = unlocked.verdict.cuts[0].log_negativity
        unlock_record["logneg_epr"] = 2.0 * params.r
        _write_json(unlock_record, out / "unlocked.json")
    _write_json(record, out / "verdict.json")
    return EXIT_OK


def _cmd_criteria(args) -> int:
    state = core.load_state(args.state)
    cut_labels = [c.strip() for c in args.cuts.split(",") if c.strip()] if args.cuts else []
    reports = tuple(
        criteria.cut_report(state, criteria.Bipartition.from_string(c, state.n_modes))
        for c in cut_labels
    )
    verdict = criteria.EntanglementVerdict(cuts=reports)
    record = verdict.to_dict()
    if args.classify:
        tri = criteria.classify_tripartite(state)
        record["classification"] = tri.to_dict()
        if tri.undecided:
            _write_json(record, Path(args.out) / "criteria.json")
            print("error: full-separability test did not converge", file=sys.stderr)
            return EXIT_NO_CONVERGENCE
    _write_json(record, Path(args.out) / "criteria.json")
    return EXIT_OK


def _cmd_state(args) -> int:
    out = Path(args.out)
    if args.make:
        kind, _, params = args.make.partition(":")
        if kind == "vacuum":
            state = core.vacuum_state(int(params))
        elif kind == "thermal":
            state = core.thermal_state([float(v) for v in params.split(",")])
        elif kind == "epr":
            state = core.epr_state(float(params))
        else:
            raise ValueError(f"unknown state kind {kind!r} (vacuum:N, thermal:n1,..., epr:r)")
        out.parent.mkdir(parents=True, exist_ok=True)
        core.save_state(state, out)
        return EXIT_OK
    if not args.state:
        raise ValueError("state: pass --state FILE to inspect or --make KIND to create")
    state = core.load_state(args.state)
    nus = core.symplectic_eigenvalues(state.cm)
    summary = {
        "modes": state.n_modes,
        "labels": list(state.labels),
        "hbar": state.hbar,
        "symplectic_eigenvalues": [float(v) for v in nus],
        "physical": bool(nus[-1] >= 1.0 - core.PSD_TOL),
        "pure": bool(abs(float(np.prod(nus)) - 1.0) <= 1e-9),
    }
    print(json.dumps(_fmt(summary), indent=1, sort_keys=True))
    return EXIT_OK


def _cmd_report(args) -> int:
    from . import report

    written = report.render_csv(args.csv, out_dir=args.out, kind=args.kind)
    for path in written:
        print(path)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cvsim",
        description="Gaussian light/matter interface simulator and entanglement analyzer",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bipartite", help="entangle two thermal ensembles")
    p.add_argument("--n1", type=float, required=True)
    p.add_argument("--n2", type=float, required=True)
    p.add_argument("--kappa", type=float, required=True)
    p.add_argument("--steps", choices=("one", "two"), default="one")
    p.add_argument("--erase", action="store_true", help="also run the erasure beam")
    p.add_argument("--outcome", type=float, default=0.0, help="homodyne outcome, first beam")
    p.add_argument("--outcome2", type=float, default=0.0, help="homodyne outcome, second beam")
    p.add_argument("--out", default=".")
    p.set_defaults(handler=_cmd_bipartite)

    p = sub.add_parser("erase", help="one-step entangling followed by erasure")
    p.add_argument("--n1", type=float, required=True)
    p.add_argument("--n2", type=float, required=True)
    p.add_argument("--kappa", type=float, required=True)
    p.add_argument("--outcome", type=float, default=0.0)
    p.add_argument("--outcome2", type=float, default=0.0)
    p.add_argument("--out", default=".")
    p.set_defaults(handler=_cmd_erase)

    p = sub.add_parser("cluster", help="sweep the tripartite cluster classes")
    p.add_argument("--shape", choices=protocols.CLUSTER_SHAPES, required=True)
    p.add_argument("--kappa-grid", dest="kappa_grid", required=True, metavar="START,STOP,COUNT")
    p.add_argument("--T-grid", dest="t_grid", required=True, metavar="START,STOP,COUNT")
    p.add_argument("--omega", type=float, default=1.0)
    p.add_argument("--boundaries", action="store_true", help="bisect t_a, t_b, t_c per kappa")
    p.add_argument("--out", default=".")
    p.set_defaults(handler=_cmd_cluster)

    p = sub.add_parser("smolin", help="four-mode unlockable bound entanglement")
    p.add_argument("--r", type=float, default=0.5)
    p.add_argument("--kappa", default="auto", help="coupling, or 'auto' for the tied value")
    p.add_argument("--var-p", dest="var_p", type=float, default=1.0)
    p.add_argument("--var-x-probe", dest="var_x_probe", type=float, default=None)
    p.add_argument("--unlock", action="store_true")
    p.add_argument("--outcomes", type=float, nargs=2, default=(0.0, 0.0), metavar=("XPLUS", "PMINUS"))
    p.add_argument("--seed", type=int, default=None, help="sample the random displacement")
    p.add_argument("--sweep", action="store_true", help="negativity surface over (r, var_p)")
    p.add_argument("--r-grid", dest="r_grid", default="0.1,1.5,15", metavar="START,STOP,COUNT")
    p.add_argument("--var-p-grid", dest="var_p_grid", default="0.5,4,8", metavar="START,STOP,COUNT")
    p.add_argument("--out", default=".")
    p.set_defaults(handler=_cmd_smolin)

    p = sub.add_parser("criteria", help="PPT and negativity data for a state file")
    p.add_argument("--state", required=True)
    p.add_argument("--cuts", default="", help="comma-separated cuts like 12|34,1|234")
    p.add_argument("--classify", action="store_true", help="tripartite classification (3 modes)")
    p.add_argument("--out", default=".")
    p.set_defaults(handler=_cmd_criteria)

    p = sub.add_parser("state", help="inspect/validate a state file, or make one")
    p.add_argument("--state", help="state JSON to inspect")
    p.add_argument("--make", help="vacuum:N | thermal:n1,n2,... | epr:r")
    p.add_argument("--out", default="state.json")
    p.set_defaults(handler=_cmd_state)

    p = sub.add_parser("report", help="render figures from sweep CSV artifacts")
    p.add_argument("--csv", required=True)
    p.add_argument("--kind", choices=("auto", "cluster", "smolin"), default="auto")
    p.add_argument("--out", default=None, help="output directory (default: alongside the CSV)")
    p.set_defaults(handler=_cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse uses 2 for usage errors already
        return int(exc.code or 0)
    try:
        return args.handler(args)
    except NoConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    except NonPhysicalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PHYSICS
    except (CvsimError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
