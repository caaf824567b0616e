"""Command-line interface: estimate, bf, and simulate subcommands.

Exit codes: 0 success; 2 I/O or parse errors (malformed CSV, unreadable or
unwritable paths); 3 invalid statistical input (too few rows, non-finite
values, impossible plans); 4 simulation finished but some replications
failed (details in the manifest).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from .asymptotic import PosteriorGrid, asymptotic_posterior, cosine_prior, prior_density
from .copulas import FAMILIES
from .latent import ChainConfig, run_chain
from .rank_core import InsufficientDataError, PairedSample, kendall_tau
from .simulate import METHODS, SimulationPlan, run_simulation
from .summary import savage_dickey_bf01, summarize

__all__ = ["main"]

EXIT_OK = 0
EXIT_IO = 2
EXIT_INVALID = 3
EXIT_PARTIAL = 4


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def read_xy_csv(path: str) -> PairedSample:
    """Parse a two-column CSV with header `x,y` into a PairedSample."""
    try:
        with open(path, "r", encoding="utf-8-sig") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise CliError(f"{path}: {exc.strerror or exc}", EXIT_IO) from exc
    if not lines:
        raise CliError(f"{path} line 1: empty file, expected header 'x,y'", EXIT_IO)
    header = lines[0].strip()
    if header != "x,y":
        raise CliError(f"{path} line 1: expected header 'x,y', got {header!r}", EXIT_IO)
    xs, ys = [], []
    for lineno, raw in enumerate(lines[1:], start=2):
        if not raw.strip():
            continue
        parts = raw.split(",")
        if len(parts) != 2:
            raise CliError(
                f"{path} line {lineno}: expected two comma-separated fields, got {raw!r}",
                EXIT_IO,
            )
        try:
            xs.append(float(parts[0]))
            ys.append(float(parts[1]))
        except ValueError:
            raise CliError(
                f"{path} line {lineno}: non-numeric field in {raw!r}", EXIT_IO
            ) from None
    min_rows = 2
    if len(xs) < min_rows:
        raise CliError(
            f"{path}: insufficient data: need at least {min_rows} rows, got {len(xs)}",
            EXIT_INVALID,
        )
    try:
        return PairedSample(x=np.array(xs), y=np.array(ys))
    except (InsufficientDataError, ValueError) as exc:
        raise CliError(f"{path}: {exc}", EXIT_INVALID) from exc


def _posterior_for(sample: PairedSample, args):
    if args.method == "latent":
        if sample.n <= 3:
            raise CliError(
                f"insufficient data: latent method needs n >= 4, got n = {sample.n}",
                EXIT_INVALID,
            )
        cfg = ChainConfig(
            total_iterations=args.iterations,
            burn_in=args.burn_in,
            seed=args.seed,
            hastings_correction=args.hastings_correction,
        )
        return run_chain(sample, config=cfg, backend=args.backend)
    try:
        return asymptotic_posterior(sample, method=args.method)
    except InsufficientDataError as exc:
        raise CliError(str(exc), EXIT_INVALID) from exc


def _dump_posterior(post, path: str) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            if isinstance(post, PosteriorGrid):
                fh.write("tau,density\n")
                for t, d in zip(post.tau_grid, post.density):
                    fh.write(f"{float(t)!r},{float(d)!r}\n")
            else:
                for t in post.tau_draws:
                    fh.write(f"{float(t)!r}\n")
    except OSError as exc:
        raise CliError(f"{path}: {exc.strerror or exc}", EXIT_IO) from exc


def _estimate_payload(args) -> dict:
    sample = read_xy_csv(args.input)
    post = _posterior_for(sample, args)
    summ = summarize(post, ci_level=args.ci_level)
    try:
        bf01 = savage_dickey_bf01(post, cosine_prior())
    except ValueError as exc:
        raise CliError(str(exc), EXIT_INVALID) from exc
    if args.dump_posterior:
        _dump_posterior(post, args.dump_posterior)
    return {
        "method": args.method,
        "n": sample.n,
        "tau_obs": kendall_tau(sample),
        "median": summ.median,
        "ci_low": summ.ci_low,
        "ci_high": summ.ci_high,
        "ci_level": summ.ci_level,
        "bf01": bf01,
        "seed": args.seed,
    }


def cmd_estimate(args) -> int:
    print(json.dumps(_estimate_payload(args)))
    return EXIT_OK


def cmd_bf(args) -> int:
    payload = _estimate_payload(args)
    payload["bf10"] = 1.0 / payload["bf01"] if payload["bf01"] > 0 else math.inf
    payload["prior_density_zero"] = prior_density(0.0)
    print(json.dumps(payload))
    return EXIT_OK


def _parse_list(text, cast):
    return tuple(cast(tok) for tok in text.split(",") if tok.strip())


def _plan_from_args(args) -> SimulationPlan:
    fields: dict = {}
    if args.config:
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                fields = json.load(fh)
        except OSError as exc:
            raise CliError(f"{args.config}: {exc.strerror or exc}", EXIT_IO) from exc
        except json.JSONDecodeError as exc:
            raise CliError(f"{args.config}: invalid JSON: {exc}", EXIT_IO) from exc
        unknown = set(fields) - set(SimulationPlan.__dataclass_fields__)
        if unknown:
            raise CliError(
                f"{args.config}: unknown plan fields {sorted(unknown)}", EXIT_INVALID
            )
    if args.tau_values is not None:
        fields["tau_values"] = _parse_list(args.tau_values, float)
    if args.n_values is not None:
        fields["n_values"] = _parse_list(args.n_values, int)
    if args.families is not None:
        fields["families"] = _parse_list(args.families, str)
    if args.methods is not None:
        fields["methods"] = _parse_list(args.methods, str)
    if args.replications is not None:
        fields["replications"] = args.replications
    if args.base_seed is not None:
        fields["base_seed"] = args.base_seed
    if args.ci_level is not None:
        fields["ci_level"] = args.ci_level
    try:
        return SimulationPlan(**fields)
    except (TypeError, ValueError) as exc:
        raise CliError(f"invalid plan: {exc}", EXIT_INVALID) from exc


def cmd_simulate(args) -> int:
    plan = _plan_from_args(args)
    out_dir = args.out
    try:
        os.makedirs(out_dir, exist_ok=True)
        probe = os.path.join(out_dir, ".write_probe")
        with open(probe, "w") as fh:
            fh.write("")
        os.remove(probe)
    except OSError as exc:
        raise CliError(f"{out_dir}: {exc.strerror or exc}", EXIT_IO) from exc
    quiet = args.quiet

    def log(msg):
        if not quiet:
            print(msg, file=sys.stderr)

    return run_simulation(plan, out_dir, force=args.force, workers=args.workers, log=log)


def _add_estimate_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("input", help="two-column CSV with header x,y")
    p.add_argument("--method", choices=METHODS, default="original")
    p.add_argument("--ci-level", type=float, default=0.95, dest="ci_level")
    p.add_argument("--seed", type=int, default=0, help="chain seed (latent method)")
    p.add_argument("--iterations", type=int, default=5500, help="chain length (latent)")
    p.add_argument("--burn-in", type=int, default=500, dest="burn_in")
    p.add_argument(
        "--hastings-correction",
        action="store_true",
        dest="hastings_correction",
        help="use the proposal-asymmetry-corrected acceptance (latent)",
    )
    p.add_argument(
        "--backend",
        choices=("compiled", "python"),
        default=None,
        help="chain kernel (default: compiled when built)",
    )
    p.add_argument(
        "--dump-posterior",
        metavar="PATH",
        dest="dump_posterior",
        help="write the posterior: grid CSV (tau,density) or one tau draw per line",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="taulatent",
        description="Bayesian estimation and testing of Kendall's tau",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_est = sub.add_parser("estimate", help="posterior summary for one dataset")
    _add_estimate_options(p_est)
    p_est.set_defaults(func=cmd_estimate)

    p_bf = sub.add_parser("bf", help="Savage-Dickey Bayes factor for tau = 0")
    _add_estimate_options(p_bf)
    p_bf.set_defaults(func=cmd_bf)

    p_sim = sub.add_parser("simulate", help="parameter-recovery study")
    p_sim.add_argument("--out", required=True, help="output directory")
    p_sim.add_argument("--config", help="JSON file with SimulationPlan fields")
    p_sim.add_argument("--tau-values", dest="tau_values", help="comma-separated taus")
    p_sim.add_argument("--n-values", dest="n_values", help="comma-separated sizes")
    p_sim.add_argument(
        "--families", help=f"comma-separated subset of {','.join(FAMILIES)}"
    )
    p_sim.add_argument(
        "--methods", help=f"comma-separated subset of {','.join(METHODS)}"
    )
    p_sim.add_argument("--replications", type=int, default=None)
    p_sim.add_argument("--base-seed", type=int, default=None, dest="base_seed")
    p_sim.add_argument("--ci-level", type=float, default=None, dest="ci_level")
    p_sim.add_argument(
        "--workers", type=int, default=None,
        help="worker processes (default: TAU_LATENT_WORKERS or 1)",
    )
    p_sim.add_argument("--force", action="store_true", help="recompute existing cells")
    p_sim.add_argument("--quiet", action="store_true", help="suppress progress messages")
    p_sim.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (InsufficientDataError,) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
