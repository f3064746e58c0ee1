"""Command-line front end.

Commands: ``solve`` (any algorithm, writes solution/history/manifest),
``evaluate`` (fix a dispatch, report V(x) and mitigation statistics),
``compare`` (merge several runs against the one-shot baseline),
``validate`` (check an instance document), ``discretize`` (report the
subpipe table). All outputs are CSV/JSON/plain text.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 solver
failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_SOLVER = 4

ALGORITHMS = ("shacv", "shace", "shaxe", "benders", "oneshot", "opf-only")


class _CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _versions() -> dict:
    import numpy
    import scipy

    from . import __version__
    return {"python": sys.version.split()[0], "numpy": numpy.__version__,
            "scipy": scipy.__version__, "opgf": __version__}


def _resolve_instance_path(token: str) -> Path:
    p = Path(token)
    if p.exists():
        return p
    if token in ("micro", "desk"):
        from .datasets import bundled_path
        return Path(str(bundled_path(f"{token}.json")))
    raise _CliError(EXIT_DATA, f"instance {token!r}: no such file or bundled name")


def _resolve_scenario_path(token: str | None, instance_token: str) -> Path:
    if token:
        p = Path(token)
        if not p.exists():
            raise _CliError(EXIT_DATA, f"scenario file {token!r} not found")
        return p
    if instance_token in ("micro", "desk"):
        from .datasets import bundled_path
        return Path(str(bundled_path(f"{instance_token}_scenarios.csv")))
    raise _CliError(EXIT_CONFIG, "no --scenarios given and instance is not bundled")


def _load_problem(args):
    from .io import apply_cost_stress, instance_from_dict
    from .scenarios import load_scenarios

    ipath = _resolve_instance_path(args.instance)
    spath = _resolve_scenario_path(getattr(args, "scenarios", None), args.instance)
    with open(ipath) as fh:
        doc = json.load(fh)
    mults = None
    if getattr(args, "stress", False):
        mults = (0.25, 0.25, 2.0)
    if getattr(args, "stress_mults", None):
        parts = [float(v) for v in args.stress_mults.split(",")]
        if len(parts) != 3:
            raise _CliError(EXIT_CONFIG, "--stress-mults wants gas,gfpp,other")
        mults = tuple(parts)
    if mults:
        doc = apply_cost_stress(doc, *mults)
    try:
        inst = instance_from_dict(doc, name=Path(args.instance).stem,
                                  horizon=getattr(args, "horizon", None))
        scen = load_scenarios(spath, args.split, args.seed)
    except Exception as exc:
        raise _CliError(EXIT_DATA, f"loading problem data failed: {exc}") from exc
    if getattr(args, "horizon", None):
        from .scenarios import ScenarioSet
        scen = ScenarioSet(profiles=scen.profiles[:args.horizon],
                           train=scen.train, test=scen.test, seed=scen.seed,
                           farm_ids=scen.farm_ids)
    if scen.horizon != inst.grid.horizon:
        raise _CliError(EXIT_DATA,
                        f"scenario horizon {scen.horizon} != instance horizon "
                        f"{inst.grid.horizon}")
    return inst, scen, str(ipath), str(spath), mults


def _slp_config(args):
    from .slp import SlpConfig
    return SlpConfig(epsilon=args.slp_epsilon, tr_init=args.slp_tr,
                     step_tol=args.slp_step_tol, max_iter=args.slp_max_iter,
                     backend=args.backend)


def _write_solution(path: Path, instance, x: np.ndarray) -> None:
    from .builders import XIndex
    xi = XIndex.of(instance)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["generator", "t", "p_mw"])
        for g in xi.gens:
            for t in range(xi.horizon):
                w.writerow([g, t, f"{x[xi.pos(g, t)]:.12g}"])


def _read_solution(path: Path, instance) -> np.ndarray:
    from .builders import XIndex
    xi = XIndex.of(instance)
    x = np.full(xi.size, np.nan)
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            x[xi.pos(row["generator"], int(row["t"]))] = float(row["p_mw"])
    if np.isnan(x).any():
        raise _CliError(EXIT_DATA, f"{path}: incomplete dispatch table")
    return x


def _write_rows(path: Path, fieldnames: list[str], rows: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=fieldnames)
        w.writeheader()
        for r in rows:
            w.writerow({k: (f"{v:.12g}" if isinstance(v, float) else v)
                        for k, v in r.items()})


def _manifest(outdir: Path, payload: dict) -> None:
    payload = dict(payload)
    payload["versions"] = _versions()
    with open(outdir / "manifest.json", "w") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True, default=str)
        fh.write("\n")


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_solve(args) -> int:
    from .builders import XIndex
    inst, scen, ipath, spath, mults = _load_problem(args)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    slp = _slp_config(args)
    t0 = time.perf_counter()
    history_rows: list[dict] = []
    extra: dict = {}

    try:
        if args.algorithm in ("shacv", "shace", "shaxe"):
            from .evaluate import evaluate
            from .sha import ShaConfig, run, window_deltas
            window = {"inf": math.inf, "half": "half"}.get(
                args.window, args.window)
            if isinstance(window, str) and window not in ("half",):
                window = int(window)
            cfg = ShaConfig(variant=args.algorithm, rho=args.rho, a=args.a,
                            window=window, eps_tol=args.eps_tol,
                            max_iterations=args.max_iterations,
                            time_limit=args.time_limit, seed=args.seed,
                            eval_every=args.eval_every)
            quality = None
            if args.eval_every:
                quality = lambda x: evaluate(x, inst, scen, which="train",
                                             slp=slp, backend=args.backend,
                                             workers=args.workers).v
            res = run(inst, scen, cfg, slp=slp, backend=args.backend,
                      quality_fn=quality)
            x_out = res.x_bar
            history_rows = res.history
            extra = {"stop_reason": res.stop_reason,
                     "failed_samples": res.failed_samples}
            if args.window_study:
                from .sha import window_deltas
                windows = []
                for tok in args.window_study.split(","):
                    tok = tok.strip()
                    windows.append(math.inf if tok == "inf" else
                                   ("half" if tok in ("half", "nu/2") else int(tok)))
                cols = {f"delta_n_{tok.strip()}":
                        window_deltas(res.iterates, res.alphas, w)
                        for tok, w in zip(args.window_study.split(","), windows)}
                rows = [{"nu": k + 1,
                         **{name: float(v[k]) for name, v in cols.items()}}
                        for k in range(res.iterates.shape[0])]
                _write_rows(outdir / "window_study.csv",
                            ["nu"] + list(cols), rows)
        elif args.algorithm == "benders":
            from .benchmarks import run_benders
            log_rows: list[dict] = []
            res = run_benders(inst, scen, eps=args.benders_eps,
                              max_iterations=args.max_iterations,
                              time_limit=args.time_limit, slp=slp,
                              backend=args.backend,
                              stop_rule=args.benders_stop,
                              log=log_rows.append)
            x_out = res.x
            history_rows = log_rows
            extra = {"stop_reason": res.stop_reason, "gap": res.gap}
        elif args.algorithm in ("oneshot", "opf-only"):
            from .benchmarks import solve_one_shot, solve_opf_only
            fn = solve_one_shot if args.algorithm == "oneshot" else solve_opf_only
            res = fn(inst, scen, slp=slp, backend=args.backend)
            x_out = res.x
            history_rows = [{"objective": res.objective,
                             "converged": res.converged,
                             "slp_iterations": res.iterations,
                             "wall_s": time.perf_counter() - t0}]
            extra = {"objective": res.objective, "converged": res.converged}
        else:                                    # pragma: no cover
            raise _CliError(EXIT_CONFIG, f"unknown algorithm {args.algorithm}")
    except _CliError:
        raise
    except Exception as exc:
        raise _CliError(EXIT_SOLVER, f"solver failed: {exc}") from exc

    _write_solution(outdir / "solution.csv", inst, x_out)
    if history_rows:
        _write_rows(outdir / "history.csv", list(history_rows[0]), history_rows)
    _manifest(outdir, {
        "command": "solve", "algorithm": args.algorithm,
        "instance": ipath, "scenarios": spath, "split": args.split,
        "seed": args.seed, "horizon": args.horizon,
        "stress_multipliers": mults,
        "parameters": {"rho": args.rho, "a": args.a, "window": args.window,
                       "eps_tol": args.eps_tol,
                       "max_iterations": args.max_iterations,
                       "time_limit": args.time_limit,
                       "benders_eps": args.benders_eps,
                       "benders_stop": args.benders_stop,
                       "slp_epsilon": args.slp_epsilon,
                       "slp_tr": args.slp_tr,
                       "slp_step_tol": args.slp_step_tol,
                       "slp_max_iter": args.slp_max_iter,
                       "backend": args.backend, "workers": args.workers},
        **extra})
    print(f"wrote {outdir}/solution.csv")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    from .evaluate import evaluate
    inst, scen, ipath, spath, mults = _load_problem(args)
    x = _read_solution(Path(args.x), inst)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    which = args.set
    label = "out-of-sample" if which == "test" else "in-sample"
    try:
        rep = evaluate(x, inst, scen, which=which, slp=_slp_config(args),
                       backend=args.backend, workers=args.workers,
                       label=f"{label} ({which})")
    except Exception as exc:
        raise _CliError(EXIT_SOLVER, f"evaluation failed: {exc}") from exc
    _write_rows(outdir / "evaluation.csv", list(rep.rows()[0]), rep.rows())
    (outdir / "evaluation.txt").write_text(rep.to_text() + "\n")
    _manifest(outdir, {"command": "evaluate", "instance": ipath,
                       "scenarios": spath, "split": args.split,
                       "seed": args.seed, "set": which, "x": args.x,
                       "stress_multipliers": mults,
                       "V": rep.v, "flagged": rep.flagged})
    print(rep.to_text())
    return EXIT_OK


def cmd_compare(args) -> int:
    from .evaluate import compare, comparison_table, evaluate
    runs = []
    for d in args.runs:
        mpath = Path(d) / "manifest.json"
        if not mpath.exists():
            raise _CliError(EXIT_DATA, f"{d}: no manifest.json")
        with open(mpath) as fh:
            man = json.load(fh)
        runs.append((Path(d), man))
    base = next((r for r in runs if r[1].get("algorithm") == "oneshot"), None)
    if base is None:
        raise _CliError(EXIT_DATA,
                        "compare needs a one-shot baseline run for "
                        "normalization; none of the given runs has "
                        "algorithm=oneshot")
    man0 = base[1]
    for _, man in runs:
        for key in ("instance", "scenarios", "split", "horizon"):
            if man.get(key) != man0.get(key):
                raise _CliError(EXIT_DATA,
                                f"runs disagree on {key}: {man.get(key)} vs "
                                f"{man0.get(key)}")

    ns = argparse.Namespace(instance=man0["instance"],
                            scenarios=man0["scenarios"],
                            split=man0["split"], seed=man0["seed"],
                            horizon=man0.get("horizon"), stress=False,
                            stress_mults=_stress_token(man0))
    inst, scen, *_ = _load_problem(ns)
    slp = _slp_config(args)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)

    candidates = {}
    walls = {}
    for d, man in runs:
        x = _read_solution(d / "solution.csv", inst)
        name = man.get("algorithm", d.name)
        candidates[name] = x
        walls[name] = _final_wall(d)
    rows = []
    reports = {}
    for which in ("train", "test"):
        reps = compare(candidates, inst, scen, which=which, slp=slp,
                       backend=args.backend, workers=args.workers)
        v_os = reps["oneshot"].v
        for name, rep in reps.items():
            rows.append({"algorithm": name, "set": which,
                         "wall_s": walls[name], "V": rep.v,
                         "V_ratio": rep.v / v_os})
        reports[which] = reps
    _write_rows(outdir / "comparison.csv",
                ["algorithm", "set", "wall_s", "V", "V_ratio"], rows)
    text = "\n\n".join(f"== {which} ==\n" + comparison_table(reps)
                       for which, reps in reports.items())
    (outdir / "comparison.txt").write_text(text + "\n")
    _manifest(outdir, {"command": "compare",
                       "runs": [str(d) for d, _ in runs],
                       "instance": man0["instance"],
                       "scenarios": man0["scenarios"]})
    print(text)
    return EXIT_OK


def _stress_token(man: dict) -> str | None:
    m = man.get("stress_multipliers")
    return ",".join(str(v) for v in m) if m else None


def _final_wall(rundir: Path) -> float:
    hpath = rundir / "history.csv"
    if not hpath.exists():
        return float("nan")
    wall = float("nan")
    with open(hpath, newline="") as fh:
        for row in csv.DictReader(fh):
            if "wall_s" in row:
                wall = float(row["wall_s"])
    return wall


def cmd_validate(args) -> int:
    from .io import instance_from_dict
    from .network import DataError
    ipath = _resolve_instance_path(args.instance)
    with open(ipath) as fh:
        doc = json.load(fh)
    try:
        inst = instance_from_dict(doc, name=str(ipath))
    except DataError as exc:
        print(f"INVALID: {exc}")
        return EXIT_DATA
    n_sub = len(inst.dgas.subpipes) if inst.dgas else 0
    print(f"OK: {len(inst.electric.buses)} buses, "
          f"{len(inst.electric.generators)} generators, "
          f"{len(inst.gas.nodes) if inst.gas else 0} gas nodes, "
          f"{n_sub} subpipes, T={inst.grid.horizon}")
    return EXIT_OK


def cmd_discretize(args) -> int:
    from .io import instance_from_dict
    ipath = _resolve_instance_path(args.instance)
    with open(ipath) as fh:
        doc = json.load(fh)
    try:
        inst = instance_from_dict(doc, name=str(ipath),
                                  max_segment_length=args.max_segment_length)
    except Exception as exc:
        raise _CliError(EXIT_DATA, f"discretization failed: {exc}") from exc
    if inst.dgas is None:
        raise _CliError(EXIT_DATA, "instance has no gas network")
    rows = [{"subpipe": sp.id, "parent": sp.parent, "from": sp.from_node,
             "to": sp.to_node, "dx_m": sp.dx, "v_m": sp.v_m, "v_p": sp.v_p,
             "v_f": sp.v_f} for sp in inst.dgas.subpipes]
    out = Path(args.out)
    _write_rows(out, list(rows[0]), rows)
    print(f"wrote {out} ({len(rows)} subpipes, "
          f"{len(inst.dgas.aux_nodes)} auxiliary nodes)")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _add_problem_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--instance", required=True,
                   help="instance JSON path, or bundled name (micro, desk)")
    p.add_argument("--scenarios", help="scenario CSV (default: bundled pair)")
    p.add_argument("--split", type=float, default=0.8,
                   help="training fraction of the scenario file (default 0.8)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--horizon", type=int, default=None,
                   help="truncate to the first N steps")
    p.add_argument("--stress", action="store_true",
                   help="cost-stress preset: gas supply and GFPP costs x0.25, "
                        "other generation x2")
    p.add_argument("--stress-mults", default=None,
                   help="explicit gas,gfpp,other multipliers")


def _add_solver_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--backend", default="highs", choices=["highs", "simplex"])
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--slp-epsilon", type=float, default=1e-6)
    p.add_argument("--slp-tr", type=float, default=0.1)
    p.add_argument("--slp-step-tol", type=float, default=1e-6)
    p.add_argument("--slp-max-iter", type=int, default=50)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="opgf",
        description="Two-stage stochastic scheduling of coupled gas-electric "
                    "systems under wind uncertainty")
    sub = ap.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("solve", help="run one algorithm, write artifacts")
    _add_problem_args(ps)
    _add_solver_args(ps)
    ps.add_argument("--algorithm", required=True, choices=ALGORITHMS)
    ps.add_argument("--rho", type=float, default=1.0)
    ps.add_argument("--a", type=float, default=1000.0)
    ps.add_argument("--window", default="inf",
                    help="averaging window: integer, 'inf', or 'half'")
    ps.add_argument("--eps-tol", type=float, default=1e-4)
    ps.add_argument("--max-iterations", type=int, default=500)
    ps.add_argument("--time-limit", type=float, default=None)
    ps.add_argument("--benders-eps", type=float, default=0.01)
    ps.add_argument("--benders-stop", default="auto",
                    choices=["auto", "gap", "bound-change"])
    ps.add_argument("--eval-every", type=int, default=None,
                    help="record V(x_bar) every N iterations (costly)")
    ps.add_argument("--window-study", default=None,
                    help="comma list of windows (e.g. '1,100,inf,half'); "
                         "writes window_study.csv")
    ps.add_argument("--out", required=True)
    ps.set_defaults(fn=cmd_solve)

    pe = sub.add_parser("evaluate", help="evaluate a dispatch on a scenario set")
    _add_problem_args(pe)
    _add_solver_args(pe)
    pe.add_argument("--x", required=True, help="solution.csv from a solve run")
    pe.add_argument("--set", default="test", choices=["train", "test"])
    pe.add_argument("--out", required=True)
    pe.set_defaults(fn=cmd_evaluate)

    pc = sub.add_parser("compare", help="merge runs against the one-shot baseline")
    _add_solver_args(pc)
    pc.add_argument("--runs", nargs="+", required=True)
    pc.add_argument("--out", required=True)
    pc.set_defaults(fn=cmd_compare)

    pv = sub.add_parser("validate", help="check an instance document")
    pv.add_argument("--instance", required=True)
    pv.set_defaults(fn=cmd_validate)

    pd = sub.add_parser("discretize", help="emit the subpipe table")
    pd.add_argument("--instance", required=True)
    pd.add_argument("--max-segment-length", type=float, default=None)
    pd.add_argument("--out", required=True)
    pd.set_defaults(fn=cmd_discretize)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except _CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":                       # pragma: no cover
    sys.exit(main())
