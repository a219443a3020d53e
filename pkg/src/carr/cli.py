"""Command-line entry point.

Subcommands: ``synth`` (write a synthetic CSV), ``train`` / ``sweep``
(experiment runs from a JSON config), ``audit`` (property suites over random
instances), ``bound`` (generalization-bound table).  Exit codes: 0 success,
1 runtime error, 2 usage or configuration error.  The ``CARR_SEED``
environment variable overrides the default seed everywhere.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import bounds as bounds_mod
from . import infometrics, scm as scm_mod
from .model import init_params
from .numkit import ConfigurationError, Rng, grad_check
from .objective import loss_and_grads
from .trainer import RunConfig, run_experiment, sweep

__all__ = ["main", "build_parser", "run_audit"]


def _default_seed() -> int:
    return int(os.environ.get("CARR_SEED", "0"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="carr")
    sub = parser.add_subparsers(dest="command", required=True)

    p_synth = sub.add_parser("synth", help="write a synthetic dataset CSV")
    p_synth.add_argument("--beta", type=float, required=True)
    p_synth.add_argument("--n", type=int, required=True)
    p_synth.add_argument("--seed", type=int, default=None)
    p_synth.add_argument("--out", required=True)
    p_synth.add_argument("--nc-cols", type=int, default=0)
    p_synth.add_argument("--shared-noise", action="store_true")

    for name in ("train", "sweep"):
        p = sub.add_parser(name, help=f"{name} from a JSON config")
        p.add_argument("--config", required=True)
        p.add_argument("--out", default=None,
                       help="report path (train) or directory (sweep)")
        p.add_argument("--seed", type=int, default=None, help="override config seed")
        if name == "sweep":
            p.add_argument("--seeds", type=int, default=5)

    p_audit = sub.add_parser("audit", help="run a property suite")
    p_audit.add_argument("--what", required=True,
                         choices=["dpi", "lemma1", "lemma2", "pns", "gradcheck"])
    p_audit.add_argument("--trials", type=int, default=200)
    p_audit.add_argument("--seed", type=int, default=None)
    p_audit.add_argument("--shape", choices=["a", "b"], default="a",
                         help="causal shape for the lemma suites")

    p_bound = sub.add_parser("bound", help="print a generalization-bound table")
    p_bound.add_argument("--card-y", type=int, default=2)
    p_bound.add_argument("--card-z", type=int, default=64)
    p_bound.add_argument("--beta", type=float, default=0.3)
    p_bound.add_argument("--delta", type=float, default=0.05)
    p_bound.add_argument("--C", type=float, default=16.0)
    p_bound.add_argument("--m-grid", default="1e4,1e5,1e6,1e7",
                         help="comma-separated sample counts")
    return parser


def cmd_synth(args) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    cfg = scm_mod.SynthConfig(beta=args.beta, n=args.n, seed=seed,
                              nc_cols=args.nc_cols, shared_noise=args.shared_noise)
    data = scm_mod.generate(cfg)
    scm_mod.write_csv(data, args.out)
    print(f"wrote {len(data)} samples to {args.out} "
          f"(label rate {data.y.mean():.4f}, seed {seed})")
    return 0


def _load_config(path, seed_override) -> RunConfig:
    with open(path) as fh:
        doc = json.load(fh)
    if seed_override is not None:
        doc["seed"] = seed_override
    elif "seed" not in doc and "CARR_SEED" in os.environ:
        doc["seed"] = _default_seed()
    return RunConfig.from_dict(doc)


def cmd_train(args) -> int:
    cfg = _load_config(args.config, args.seed)
    report = run_experiment(cfg, out_path=args.out)
    print(json.dumps(report["metrics"], indent=2, sort_keys=True))
    return 0


def cmd_sweep(args) -> int:
    cfg = _load_config(args.config, args.seed)
    result = sweep(cfg, args.seeds, out_dir=args.out)
    print(json.dumps(result["summary"]["aggregate"], indent=2, sort_keys=True))
    return 0


def run_audit(what: str, trials: int, seed: int, shape: str = "a"):
    """Run a named property suite; returns (failures, worst_margin)."""
    failures = 0
    worst = 0.0
    if what == "dpi":
        for i in range(trials):
            table = infometrics.random_markov_chain(Rng(seed, stream=10 + i))
            lhs = infometrics.mutual_info(table, ("x",), ("z",))
            rhs = infometrics.mutual_info(table, ("x",), ("y",))
            margin = rhs - lhs
            worst = max(worst, margin)
            if margin > 1e-10:
                failures += 1
    elif what in ("lemma1", "lemma2"):
        for i in range(trials):
            model = scm_mod.random_scm(Rng(seed, stream=10 + i), shape=shape)
            if what == "lemma1":
                lhs, rhs, ok = infometrics.check_lemma1(model)
                worst = max(worst, lhs - rhs)
                failures += 0 if ok else 1
            else:
                ineq1, ineq2 = infometrics.check_lemma2(model)
                worst = max(worst, ineq1[0] - ineq1[1], ineq2[0] - ineq2[1])
                failures += 0 if (ineq1[2] and ineq2[2]) else 1
    elif what == "pns":
        for i in range(trials):
            model = scm_mod.random_scm(Rng(seed, stream=10 + i), shape=shape)
            try:
                suff, nec, combined, alt = infometrics.pns(
                    model, "pa", 0, "y", 0, z_alt=1
                )
            except infometrics.QueryError:
                continue
            table = infometrics.JointTable(
                names=("pa", "y"),
                probs=scm_mod.enumerate_joint(model).marginal(("pa", "y")),
            )
            p_event = float(table.probs[0, 0])
            margin = abs((combined - alt) - p_event)
            worst = max(worst, margin, max(0.0, combined - 1.0), -min(0.0, combined))
            if margin > 1e-10 or not 0.0 <= combined <= 1.0 + 1e-10:
                failures += 1
    elif what == "gradcheck":
        for i in range(trials):
            rng = Rng(seed, stream=10 + i)
            params = init_params(rng, d_in=5, d_z=3)
            xb = rng.uniform(-1, 1, size=(4, 5))
            yb = rng.integers(0, 2, size=4)
            eps = rng.normal(size=(4, 3))
            delta = 0.05 * rng.normal(size=(4, 3))
            neg_delta = 0.05 * rng.normal(size=(4, 3))

            def f(vec):
                params.from_vector(vec)
                breakdown, grad = loss_and_grads(
                    params, xb, yb, "carr", eps_std=eps,
                    attack_delta=delta, neg_delta=neg_delta,
                )
                return breakdown.total, grad

            err = grad_check(f, params.to_vector())
            worst = max(worst, err)
            if err > 1e-4:
                failures += 1
    else:
        raise ConfigurationError(f"unknown audit suite {what!r}")
    return failures, worst


def cmd_audit(args) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    failures, worst = run_audit(args.what, args.trials, seed, args.shape)
    status = "ok" if failures == 0 else "FAILED"
    print(f"{args.what}: {args.trials - failures}/{args.trials} hold, "
          f"worst margin {worst:.3e} [{status}]")
    return 0 if failures == 0 else 1


def cmd_bound(args) -> int:
    grid = [int(float(tok)) for tok in args.m_grid.split(",")]
    print(f"{'m':>12} {'threshold_gen':>14} {'threshold_ideal':>16} "
          f"{'bound_general':>14} {'bound_ideal':>12}")
    for m in grid:
        inputs = bounds_mod.BoundInputs(m=m, card_y=args.card_y,
                                        card_z=args.card_z, beta=args.beta,
                                        delta=args.delta, C=args.C)
        t_gen = bounds_mod.min_samples("general", inputs)
        t_ideal = bounds_mod.min_samples("ideal", inputs)
        bg = bounds_mod.bound_general(inputs) if m >= t_gen else float("nan")
        bi = bounds_mod.bound_ideal(inputs) if m >= t_ideal else float("nan")
        print(f"{m:>12d} {t_gen:>14d} {t_ideal:>16d} {bg:>14.6g} {bi:>12.6g}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    handlers = {"synth": cmd_synth, "train": cmd_train, "sweep": cmd_sweep,
                "audit": cmd_audit, "bound": cmd_bound}
    try:
        return handlers[args.command](args)
    except (ConfigurationError, ValueError, KeyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failures
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
