"""Command-line entry points: sample, trace, diagnose.

Exit codes: 0 on success, 2 on configuration errors, 3 on numerical
failures.
"""

import argparse
import csv
import dataclasses
import glob
import json
import sys
from pathlib import Path

import numpy as np

from .bench import (
    build_target,
    load_experiment,
    load_target_spec,
    proposal_trace,
    run_experiment,
    _format,
    _write_csv,
)
from .diagnostics import autocorrelation, bias_and_mcse, effective_sample_size
from .errors import ConfigError, MhmcError


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mhmc", description="Magnetic HMC benchmark harness"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sample = sub.add_parser("sample", help="run an experiment config")
    sample.add_argument("--config", required=True, help="experiment TOML file")
    sample.add_argument("--seed", type=int, default=None, help="override seed")
    sample.add_argument("--chains", type=int, default=None, help="override n_chains")
    sample.add_argument("--samples", type=int, default=None, help="override n_samples")
    sample.add_argument("--out", default=None, help="override output directory")

    trace = sub.add_parser("trace", help="dump integrator proposal trajectories")
    trace.add_argument("--config", required=True, help="experiment TOML file")
    trace.add_argument("--n", type=int, required=True, help="number of traces")
    trace.add_argument("--seed", type=int, default=None, help="override seed")
    trace.add_argument("--out", default=None, help="override output directory")

    diagnose = sub.add_parser("diagnose", help="summarize sample CSV files")
    diagnose.add_argument(
        "--samples", required=True,
        help="sample CSV path or glob (one file per chain)",
    )
    diagnose.add_argument(
        "--truth", default=None,
        help="experiment/target TOML supplying analytic moments",
    )
    diagnose.add_argument("--burn-in", type=int, default=0)
    diagnose.add_argument("--max-lag", type=int, default=50)
    diagnose.add_argument("--out", default=None, help="write diagnostics.csv here")
    return parser


def _apply_overrides(spec, args):
    updates = {}
    if args.seed is not None:
        updates["seed"] = args.seed
    if getattr(args, "chains", None) is not None:
        if args.chains < 1:
            raise ConfigError(f"--chains must be >= 1, got {args.chains}")
        updates["n_chains"] = args.chains
    if getattr(args, "samples", None) is not None:
        if args.samples < 0:
            raise ConfigError(f"--samples must be >= 0, got {args.samples}")
        updates["n_samples"] = args.samples
    if getattr(args, "out", None) is not None:
        updates["out_dir"] = args.out
    return dataclasses.replace(spec, **updates) if updates else spec


def _cmd_sample(args) -> int:
    spec = _apply_overrides(load_experiment(args.config), args)
    summary = run_experiment(spec)
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


def _cmd_trace(args) -> int:
    spec = _apply_overrides(load_experiment(args.config), args)
    paths = proposal_trace(spec, args.n)
    for path in paths:
        print(path)
    return 0


def _read_samples_csv(path):
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None or header[:4] != ["iter", "accepted", "energy_error", "g_sign"]:
            raise ConfigError(
                f"{path}: expected header iter,accepted,energy_error,g_sign,theta_*"
            )
        rows = [row for row in reader if row]
    if not rows:
        raise ConfigError(f"{path}: no sample rows")
    data = np.array([[float(cell) for cell in row] for row in rows])
    return data[:, 4:], data[:, 1].astype(bool)


def _cmd_diagnose(args) -> int:
    paths = sorted(glob.glob(args.samples))
    if not paths:
        raise ConfigError(f"no sample files match {args.samples!r}")
    chains, accepted = [], []
    for path in paths:
        thetas, acc = _read_samples_csv(path)
        if args.burn_in >= thetas.shape[0]:
            raise ConfigError(
                f"--burn-in {args.burn_in} >= chain length {thetas.shape[0]}"
            )
        chains.append(thetas[args.burn_in :])
        accepted.append(acc)
    dim = chains[0].shape[1]
    if any(chain.shape[1] != dim for chain in chains):
        raise ConfigError("sample files have inconsistent dimensions")

    acceptance = float(np.mean(np.concatenate(accepted)))
    max_lag = min(args.max_lag, min(c.shape[0] for c in chains) - 1)
    curve = np.mean([autocorrelation(c, max_lag) for c in chains], axis=0)
    ess = np.array(
        [[effective_sample_size(c, j) for j in range(dim)] for c in chains]
    )
    ess_mean = ess.mean(axis=0)

    rows = [["acceptance", "", "", _format(acceptance)]]
    rows.extend(["autocorr", "mean", str(k), _format(v)] for k, v in enumerate(curve))
    rows.extend(["ess", str(j + 1), "", _format(ess_mean[j])] for j in range(dim))
    rows.append(["min_ess", "", "", _format(float(ess.min(axis=1).mean()))])

    print(f"chains: {len(chains)}  samples/chain: {chains[0].shape[0]}  dim: {dim}")
    print(f"acceptance: {acceptance:.4f}")
    print("ess per coordinate:", " ".join(f"{v:.1f}" for v in ess_mean))

    if args.truth is not None:
        target = build_target(load_target_spec(args.truth))
        if target.mean is not None and len(chains) >= 2:
            for j in range(dim):
                b1, m1 = bias_and_mcse(
                    chains, lambda c, j=j: c[:, j], float(target.mean[j])
                )
                b2, m2 = bias_and_mcse(
                    chains, lambda c, j=j: c[:, j] ** 2, float(target.second_moment[j])
                )
                rows.append(["bias_first_moment", str(j + 1), "", _format(b1)])
                rows.append(["mcse_first_moment", str(j + 1), "", _format(m1)])
                rows.append(["bias_second_moment", str(j + 1), "", _format(b2)])
                rows.append(["mcse_second_moment", str(j + 1), "", _format(m2)])
                print(
                    f"coordinate {j + 1}: bias(E[x]) = {b1:.5f} +- {m1:.5f}, "
                    f"bias(E[x^2]) = {b2:.5f} +- {m2:.5f}"
                )

    if args.out is not None:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        _write_csv(out / "diagnostics.csv", ["metric", "coordinate", "lag", "value"], rows)
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {"sample": _cmd_sample, "trace": _cmd_trace, "diagnose": _cmd_diagnose}
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except MhmcError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
