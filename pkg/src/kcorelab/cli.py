"""Command-line entry point: theory tables, peeling, generation, and the
Monte Carlo experiment suite.

All randomness flows from a single --seed (flag > config file > the
KCORELAB_SEED environment variable > 0).  Report files are deterministic
for a given command line; wall-clock metadata goes to a sibling .log
file so reruns stay byte-identical.

Exit codes: 0 success/pass, 1 runtime error, 2 empty core (peel),
3 experiment verdict failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from dataclasses import asdict, dataclass

import numpy as np

from .covariance import assemble_critical, assemble_supercritical
from .degrees import parse_degree_file
from .experiments import (ConfigError, ExperimentSpec, run_experiment)
from .generators import config_model, gnm, gnp, parse_edgelist_text, simple_graph
from .peeling import peel_core
from .poisson import DomainError, pois_tail
from .thresholds import compute_ck, threshold_profile

ENV_SEED = "KCORELAB_SEED"
JSON_SIG_DIGITS = 12


@dataclass
class RunConfig:
    """Fully resolved invocation, echoed into every output."""

    subcommand: str
    options: dict

    def to_json_dict(self) -> dict:
        return {"subcommand": self.subcommand, "options": self.options}


def _round_sig(x: float, sig: int = JSON_SIG_DIGITS) -> float:
    if x == 0 or not math.isfinite(x):
        return x
    return round(x, sig - 1 - int(math.floor(math.log10(abs(x)))))


def _round_floats(obj, sig: int = JSON_SIG_DIGITS):
    if isinstance(obj, np.generic):
        obj = obj.item()
    if isinstance(obj, float):
        return _round_sig(obj, sig)
    if isinstance(obj, dict):
        return {k: _round_floats(v, sig) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_round_floats(v, sig) for v in obj]
    return obj


def _dump_json(payload: dict, path: str | None) -> str:
    text = json.dumps(_round_floats(payload), indent=2, allow_nan=True) + "\n"
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    return text


def _write_log(path_prefix: str, started: float) -> None:
    with open(path_prefix + ".log", "w") as fh:
        json.dump({"started_unix": started, "elapsed_s": time.time() - started}, fh)
        fh.write("\n")


def _resolve_seed(args, file_cfg: dict) -> int:
    if getattr(args, "seed", None) is not None:
        return int(args.seed)
    if "seed" in file_cfg:
        return int(file_cfg["seed"])
    if os.environ.get(ENV_SEED):
        return int(os.environ[ENV_SEED])
    return 0


def _load_config_file(path: str | None) -> dict:
    if not path:
        return {}
    cfg = {}
    with open(path) as fh:
        for no, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise DomainError(f"{path}:{no}: expected key=value, got {line!r}")
            key, val = line.split("=", 1)
            cfg[key.strip()] = val.strip()
    return cfg


def _parse_grid(text: str) -> tuple[float, ...]:
    if ":" in text:
        parts = [float(v) for v in text.split(":")]
        if len(parts) != 3:
            raise DomainError("grid range must be start:step:stop")
        start, step, stop = parts
        if step <= 0:
            raise DomainError("grid step must be positive")
        return tuple(np.arange(start, stop + step / 2, step).round(12))
    return tuple(float(v) for v in text.split(","))


def _fmt(x) -> str:
    if x is None:
        return "n/a"
    if isinstance(x, float) and math.isnan(x):
        return "n/a"
    return f"{x:.6g}" if isinstance(x, float) else str(x)


# ---------------------------------------------------------------------------
# theory
# ---------------------------------------------------------------------------

def cmd_theory(args) -> int:
    k = args.k
    c_k, _ = compute_ck(k)
    if args.critical:
        if k == 2:
            print("c_2 = 1 exactly; critical-window constants require k >= 3")
            return 0
        report = assemble_critical(k, args.model)
    else:
        if args.lam is None:
            print(f"c_{k} = {_fmt(c_k)}")
            if k == 2:
                print("note: critical-window constants require k >= 3")
            return 0
        if args.lam <= c_k:
            print(f"error: lambda = {args.lam} is not above c_{k} = {_fmt(c_k)}; "
                  "pass --critical for the at-threshold constants (k >= 3)",
                  file=sys.stderr)
            return 1
        report = assemble_supercritical(k, args.lam, args.model)
    prof = threshold_profile(k, report.lam)
    payload = {
        "config": RunConfig("theory", {"k": k, "lambda": report.lam,
                                       "model": args.model,
                                       "critical": bool(args.critical)}).to_json_dict(),
        "c_k": c_k,
        "psi_k_mu_hat": pois_tail(k, report.mu_hat),
        "alpha": prof.alpha,
        "beta": prof.beta,
        "beta_hat": prof.beta_hat,
        "t_hat": prof.t_hat,
        **report.to_json_dict(),
    }
    if args.json:
        text = _dump_json(payload, args.out)
        if not args.out:
            sys.stdout.write(text)
    else:
        rows = [("c_k", c_k), ("mu_hat", report.mu_hat), ("p_hat", report.p_hat),
                ("v-fraction psi_k(mu_hat)", payload["psi_k_mu_hat"]),
                ("a_v", report.a_v), ("a_e", report.a_e),
                ("Var(Zv)", report.var_zv), ("Var(Ze)", report.var_ze),
                ("Cov(Zv,Ze)", report.cov_zvze),
                ("sigma^2", report.sigma_sq), ("sigma_k^2", report.sigma_k_sq)]
        width = max(len(r[0]) for r in rows)
        for name, val in rows:
            print(f"{name:<{width}}  {_fmt(val)}")
    return 0


# ---------------------------------------------------------------------------
# peel
# ---------------------------------------------------------------------------

def _graph_from_args(args, seed: int):
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    if args.input:
        with open(args.input) as fh:
            return parse_edgelist_text(fh.read())
    if args.gnm:
        n, m = int(args.gnm[0]), int(args.gnm[1])
        return gnm(n, m, rng)
    if args.gnp:
        n, p = int(args.gnp[0]), float(args.gnp[1])
        return gnp(n, p, rng)
    if args.degrees:
        with open(args.degrees) as fh:
            seq = parse_degree_file(fh.read())
        if args.simple:
            return simple_graph(seq, rng)[0]
        return config_model(seq, rng)
    raise DomainError("no graph source given: use --input, --gnm, --gnp or --degrees")


def cmd_peel(args) -> int:
    cfg = _load_config_file(args.config)
    seed = _resolve_seed(args, cfg)
    g = _graph_from_args(args, seed)
    core = peel_core(g, args.k)
    if args.json:
        payload = {
            "config": RunConfig("peel", {"k": args.k, "seed": seed,
                                         "n": g.n, "m": g.m}).to_json_dict(),
            "v_core": core.v_core,
            "e_core": core.e_core,
            "degree_hist": {str(j): int(c) for j, c in enumerate(core.degree_hist) if c},
        }
        text = _dump_json(payload, args.out)
        if not args.out:
            sys.stdout.write(text)
    else:
        print(f"{core.v_core} {core.e_core}")
        for j, c in enumerate(core.degree_hist):
            if c:
                print(f"deg {j}: {c}")
    return 0 if core.v_core > 0 else 2


# ---------------------------------------------------------------------------
# generate
# ---------------------------------------------------------------------------

def cmd_generate(args) -> int:
    cfg = _load_config_file(args.config)
    seed = _resolve_seed(args, cfg)
    g = _graph_from_args(args, seed)
    text = g.to_edgelist_text()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        print(f"wrote {g.n} vertices, {g.m} edges to {args.out}")
    else:
        sys.stdout.write(text)
    return 0


# ---------------------------------------------------------------------------
# experiment / report
# ---------------------------------------------------------------------------

def cmd_experiment(args) -> int:
    started = time.time()
    cfg = _load_config_file(args.config)
    seed = _resolve_seed(args, cfg)
    threads = args.threads if args.threads is not None else (os.cpu_count() or 1)
    grid = _parse_grid(args.grid) if args.grid else ()
    try:
        spec = ExperimentSpec(
            theorem=args.theorem, k=args.k, n=args.n, replicates=args.reps,
            seed=seed, model=args.model, lam=args.lam, gamma=args.gamma,
            grid=grid, threads=threads,
            **({"delta_guard": args.delta} if args.delta is not None else {}),
        )
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    report = run_experiment(spec)
    payload = {
        "config": RunConfig("experiment", {**asdict(spec)}).to_json_dict(),
        **report.to_json_dict(),
    }
    prefix = args.out_prefix or f"experiment_{spec.theorem}"
    _dump_json(payload, prefix + ".json")
    with open(prefix + ".csv", "w") as fh:
        fh.write(report.raw_csv_text())
    _write_log(prefix, started)
    print(f"{spec.theorem}: n={spec.n} replicates={spec.replicates} seed={spec.seed}")
    for c in report.comparisons:
        status = "pass" if c.passed else "FAIL"
        print(f"  [{status}] {c.name}: observed={_fmt(c.observed)} "
              f"expected={_fmt(c.expected)} tol={_fmt(c.tolerance)}")
    for note in report.notes:
        print(f"  note: {note}")
    print(f"verdict: {'PASS' if report.verdict else 'FAIL'} "
          f"({prefix}.json, {prefix}.csv)")
    return 0 if report.verdict else 3


def cmd_report(args) -> int:
    all_pass = True
    for path in args.files:
        with open(path) as fh:
            payload = json.load(fh)
        verdict = payload.get("verdict")
        comps = payload.get("comparisons", [])
        n_fail = sum(1 for c in comps if not c.get("passed"))
        all_pass &= bool(verdict)
        print(f"{path}: {'PASS' if verdict else 'FAIL'} "
              f"({len(comps)} comparisons, {n_fail} failing)")
    return 0 if all_pass else 3


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kcorelab",
                                     description="k-core laboratory for random graphs")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--config", default=None, help="key=value file; flags win")
        p.add_argument("--json", action="store_true")
        p.add_argument("--out", default=None)

    p = sub.add_parser("theory", help="threshold and limit-variance constants")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--model", choices=["gnp", "gnm"], default="gnm")
    p.add_argument("--critical", action="store_true")
    common(p)
    p.set_defaults(fn=cmd_theory)

    p = sub.add_parser("peel", help="extract a k-core")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--input", default=None, help="edge-list file ('n m' header)")
    p.add_argument("--gnm", nargs=2, metavar=("N", "M"), default=None)
    p.add_argument("--gnp", nargs=2, metavar=("N", "P"), default=None)
    p.add_argument("--degrees", default=None, help="degree-sequence file")
    p.add_argument("--simple", action="store_true",
                   help="reject multigraphs when pairing --degrees")
    common(p)
    p.set_defaults(fn=cmd_peel)

    p = sub.add_parser("generate", help="write a random graph as an edge list")
    p.add_argument("--gnm", nargs=2, metavar=("N", "M"), default=None)
    p.add_argument("--gnp", nargs=2, metavar=("N", "P"), default=None)
    p.add_argument("--degrees", default=None)
    p.add_argument("--simple", action="store_true")
    p.set_defaults(input=None)
    common(p)
    p.set_defaults(fn=cmd_generate)

    p = sub.add_parser("experiment", help="run a Monte Carlo verification")
    p.add_argument("theorem", choices=["lln", "clt", "window", "emergence",
                                       "trajectory", "degseq_clt", "degseq_window"])
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--reps", type=int, required=True)
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--model", choices=["gnp", "gnm", "config", "config-simple"],
                   default="gnm")
    p.add_argument("--grid", default=None, help="times: start:step:stop or a,b,c")
    p.add_argument("--delta", type=float, default=None,
                   help="nonempty guard: e_core > delta*n")
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--out-prefix", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--config", default=None)
    p.set_defaults(fn=cmd_experiment)

    p = sub.add_parser("report", help="summarize experiment JSON reports")
    p.add_argument("files", nargs="+")
    p.set_defaults(fn=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (DomainError, ConfigError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
