"""Command-line interface.

Subcommands: estimate (full pipeline), mi (per-dimension MI/weights), bound
(KL order-preservation bounds), inject-noise (synthesize noisy labels), eval
(estimation error between two matrices), train (downstream linear check).
"""

import argparse
import json
import sys

from .core import (EstimatorConfig, NoiseRatePair, OptimizerConfig,
                   TransitionMatrix, load_dataset, save_dataset)
from .evaluation import estimation_error, train_linear
from .infotheory import (FDivergenceKind, build_weights, estimate_fmi_per_dim,
                         kl_order_gap, practical_gap)
from .noise import NoiseScheme, avg_noise_rate_from_r, build_transition, inject_noise
from .pipeline import estimate


def _cmd_estimate(args):
    data = load_dataset(args.input, k=args.k)
    config = EstimatorConfig(
        variant=args.variant, bins=args.bins, activation=args.activation,
        seed=args.seed,
        optimizer=OptimizerConfig(step_size=args.step_size,
                                  max_iters=args.max_iters,
                                  restarts=args.restarts,
                                  tolerance=args.tolerance),
    )
    true_t = TransitionMatrix.load(args.true_t) if args.true_t else None
    report = estimate(data, config, true_t=true_t)
    if args.output:
        report.save(args.output)
    json.dump(report.to_json(), sys.stdout, indent=2)
    print()
    return 0


def _cmd_mi(args):
    data = load_dataset(args.input, k=args.k)
    kind = FDivergenceKind.KL if args.divergence == "kl" else FDivergenceKind.TV
    mi = estimate_fmi_per_dim(data.features, data.noisy_labels, kind, args.bins)
    weights = build_weights(mi, args.activation)
    print("dim,mi,weight")
    for i, (v, w) in enumerate(zip(mi.per_dim, weights.w)):
        print(f"{i},{v},{w}")
    return 0


def _cmd_bound(args):
    rates = NoiseRatePair(args.e1, args.e2)
    out = {
        "epsilon": kl_order_gap(rates),
        "practical_gap": practical_gap(rates, args.beta_lo, args.beta_hi),
        "beta_range": [args.beta_lo, args.beta_hi],
    }
    json.dump(out, sys.stdout, indent=2)
    print()
    return 0


def _cmd_inject_noise(args):
    data = load_dataset(args.input, k=args.k)
    if data.clean_labels is None:
        # treat the noisy column as clean ground truth to corrupt
        data = type(data)(data.features, data.noisy_labels, data.k,
                          clean_labels=data.noisy_labels, ids=data.ids)
    if args.scheme == "dirichlet":
        e = args.e if args.e is not None else avg_noise_rate_from_r(args.r, data.k)
        scheme = NoiseScheme("dirichlet", avg_rate=e, seed=args.seed)
    elif args.scheme == "symmetric":
        scheme = NoiseScheme("binary", e1=args.e1, e2=args.e1, seed=args.seed)
    else:
        scheme = NoiseScheme("binary", e1=args.e1, e2=args.e2, seed=args.seed)
    t = build_transition(scheme, data.k)
    noisy = inject_noise(data, t, seed=args.seed)
    save_dataset(noisy, args.output)
    t.save(args.output + ".true_t.json")
    print(f"wrote {args.output} and {args.output}.true_t.json")
    return 0


def _cmd_eval(args):
    with open(args.estimated, encoding="utf-8") as fh:
        obj = json.load(fh)
    est = TransitionMatrix.from_json(obj["estimated_t"] if "estimated_t" in obj else obj)
    true_t = TransitionMatrix.load(args.true)
    print(estimation_error(true_t, est))
    return 0


def _cmd_train(args):
    train = load_dataset(args.train, k=args.k)
    test = load_dataset(args.test, k=args.k)
    t = None
    if args.mode == "forward":
        if args.t is None:
            raise SystemExit("forward mode requires --t")
        t = TransitionMatrix.load(args.t)
    res = train_linear(train, test, t=t, epochs=args.epochs,
                       step_size=args.step_size, seed=args.seed)
    json.dump({"last": res.last_epoch_accuracy, "best": res.best_epoch_accuracy,
               "best_epoch": res.best_epoch, "mode": res.loss_mode},
              sys.stdout, indent=2)
    print()
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="tmest",
                                description="Noise transition matrix estimation")
    sub = p.add_subparsers(dest="command", required=True)

    pe = sub.add_parser("estimate", help="run the full estimation pipeline")
    pe.add_argument("--input", required=True)
    pe.add_argument("--variant", default="plain-hoc",
                    choices=["plain-hoc", "x-kl", "x-tv", "a-kl", "a-tv"])
    pe.add_argument("--bins", type=int, default=15)
    pe.add_argument("--activation", default="minmax", choices=["minmax", "log-minmax"])
    pe.add_argument("--seed", type=int, default=0)
    pe.add_argument("--k", type=int, default=None)
    pe.add_argument("--output", default=None)
    pe.add_argument("--true-t", dest="true_t", default=None)
    pe.add_argument("--step-size", type=float, default=0.1)
    pe.add_argument("--max-iters", type=int, default=3000)
    pe.add_argument("--restarts", type=int, default=10)
    pe.add_argument("--tolerance", type=float, default=1e-8)
    pe.set_defaults(func=_cmd_estimate)

    pm = sub.add_parser("mi", help="per-dimension MI and weights as CSV")
    pm.add_argument("--input", required=True)
    pm.add_argument("--divergence", default="tv", choices=["kl", "tv"])
    pm.add_argument("--bins", type=int, default=15)
    pm.add_argument("--activation", default="minmax", choices=["minmax", "log-minmax"])
    pm.add_argument("--k", type=int, default=None)
    pm.set_defaults(func=_cmd_mi)

    pb = sub.add_parser("bound", help="KL order-preservation bounds as JSON")
    pb.add_argument("--e1", type=float, required=True)
    pb.add_argument("--e2", type=float, required=True)
    pb.add_argument("--beta-lo", type=float, default=1 / 6)
    pb.add_argument("--beta-hi", type=float, default=5 / 6)
    pb.set_defaults(func=_cmd_bound)

    pn = sub.add_parser("inject-noise", help="synthesize noisy labels")
    pn.add_argument("--input", required=True)
    pn.add_argument("--output", required=True)
    pn.add_argument("--scheme", required=True,
                    choices=["symmetric", "asymmetric", "dirichlet"])
    pn.add_argument("--e1", type=float, default=0.0)
    pn.add_argument("--e2", type=float, default=0.0)
    pn.add_argument("--e", type=float, default=None)
    pn.add_argument("--r", type=float, default=None)
    pn.add_argument("--seed", type=int, default=0)
    pn.add_argument("--k", type=int, default=None)
    pn.set_defaults(func=_cmd_inject_noise)

    pv = sub.add_parser("eval", help="estimation error between matrices")
    pv.add_argument("--estimated", required=True)
    pv.add_argument("--true", required=True)
    pv.set_defaults(func=_cmd_eval)

    pt = sub.add_parser("train", help="downstream linear-model check")
    pt.add_argument("--train", required=True)
    pt.add_argument("--test", required=True)
    pt.add_argument("--t", default=None)
    pt.add_argument("--mode", default="plain", choices=["plain", "forward"])
    pt.add_argument("--epochs", type=int, default=500)
    pt.add_argument("--step-size", type=float, default=0.5)
    pt.add_argument("--seed", type=int, default=0)
    pt.add_argument("--k", type=int, default=None)
    pt.set_defaults(func=_cmd_train)

    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
