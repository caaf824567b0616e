"""Parameter-recovery simulation harness.

For every (family, tau, n) design cell the harness draws `replications`
synthetic datasets, runs each requested inference method on the same data,
and writes two CSVs per (cell, method): per-replication recovery rows and the
quantile-averaged posterior curve. A manifest JSON records the plan, seed
derivation, package versions, wall-times, per-file checksums, and any
replication failures.

Determinism: every replication's RNG seeds are a pure function of
(base_seed, family, tau, n, replication index), so results do not depend on
the worker count or on scheduling order. Workers compute; only the parent
process writes files.
"""

from __future__ import annotations

import hashlib
import json
import os
import platform
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy

from . import __version__
from .asymptotic import asymptotic_posterior_from_stats, cosine_prior
from .copulas import FAMILIES, CopulaSpec, sample_copula
from .latent import ChainConfig, run_chain
from .rank_core import kendall_tau
from .summary import (
    DEFAULT_PROBS,
    PosteriorSummary,
    QuantileAveragedPosterior,
    posterior_quantiles,
    savage_dickey_bf01,
    summarize,
)

__all__ = [
    "METHODS",
    "SimulationPlan",
    "RecoveryResult",
    "replication_seeds",
    "run_replication",
    "run_cell",
    "run_simulation",
    "resolve_workers",
]

METHODS = ("original", "enhanced", "latent")

_RECOVERY_HEADER = "replication,tau_obs,median,ci_low,ci_high,bf01"
_QAVG_HEADER = "prob,avg_quantile"


@dataclass(frozen=True)
class SimulationPlan:
    """Full description of a recovery study; the output is a pure function
    of this object."""

    tau_values: tuple[float, ...] = (0.0, 0.2, 0.4, 0.7)
    n_values: tuple[int, ...] = (10, 20, 50)
    families: tuple[str, ...] = FAMILIES
    methods: tuple[str, ...] = METHODS
    replications: int = 500
    base_seed: int = 0
    workers: int | None = None
    ci_level: float = 0.95

    def __post_init__(self):
        object.__setattr__(self, "tau_values", tuple(float(t) for t in self.tau_values))
        object.__setattr__(self, "n_values", tuple(int(n) for n in self.n_values))
        object.__setattr__(self, "families", tuple(self.families))
        object.__setattr__(self, "methods", tuple(self.methods))
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if not self.tau_values or not self.n_values or not self.families or not self.methods:
            raise ValueError("tau_values, n_values, families, and methods must be nonempty")
        for fam in self.families:
            if fam not in FAMILIES:
                raise ValueError(f"unknown copula family {fam!r}")
        for m in self.methods:
            if m not in METHODS:
                raise ValueError(f"unknown method {m!r}")
        for t in self.tau_values:
            if not -1.0 < t < 1.0:
                raise ValueError(f"tau must lie strictly inside (-1, 1), got {t}")
            for fam in self.families:
                if fam in ("clayton", "gumbel") and t < 0.0:
                    raise ValueError(f"tau unreachable for family {fam!r}: needs tau >= 0")
        for n in self.n_values:
            if n < 2:
                raise ValueError("n must be >= 2")
            if n <= 3 and "latent" in self.methods:
                raise ValueError("latent method requires n >= 4")
        if self.base_seed < 0:
            raise ValueError("base_seed must be a non-negative integer")
        if self.workers is not None and self.workers < 1:
            raise ValueError("workers must be >= 1")
        if not 0.0 < self.ci_level < 1.0:
            raise ValueError("ci_level must lie in (0, 1)")

    def cells(self):
        for fam in self.families:
            for tau in self.tau_values:
                for n in self.n_values:
                    yield fam, tau, n


@dataclass(frozen=True)
class RecoveryResult:
    """All replication outcomes for one (family, tau, n, method) cell."""

    family: str
    tau: float
    n: int
    method: str
    summaries: tuple[PosteriorSummary, ...]
    tau_obs: tuple[float, ...]
    bf01: tuple[float, ...]
    quantile_avg: QuantileAveragedPosterior
    median_of_medians: float = field(init=False)
    ci_coverage: float = field(init=False)

    def __post_init__(self):
        meds = np.array([s.median for s in self.summaries])
        inside = [s.ci_low <= self.tau <= s.ci_high for s in self.summaries]
        object.__setattr__(self, "median_of_medians", float(np.median(meds)))
        object.__setattr__(self, "ci_coverage", float(np.mean(inside)))


def resolve_workers(plan_workers: int | None = None, flag_workers: int | None = None) -> int:
    """Worker count: explicit flag, then plan, then TAU_LATENT_WORKERS, then 1."""
    if flag_workers is not None:
        return max(1, flag_workers)
    if plan_workers is not None:
        return max(1, plan_workers)
    env = os.environ.get("TAU_LATENT_WORKERS", "").strip()
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ValueError(f"TAU_LATENT_WORKERS must be an integer, got {env!r}") from None
    return 1


def replication_seeds(base_seed: int, family: str, tau: float, n: int, rep: int) -> tuple[int, int]:
    """(data seed, chain seed) for one replication.

    A pure function of the cell coordinates, independent of worker scheduling;
    tau enters as an integer number of thousandths, offset to stay
    non-negative.
    """
    tau_code = int(round(tau * 1000)) + 1000
    ss = np.random.SeedSequence(
        [base_seed, FAMILIES.index(family), tau_code, n, rep]
    )
    data_seed, chain_seed = (int(v) for v in ss.generate_state(2, dtype=np.uint64))
    return data_seed, chain_seed


def run_replication(task):
    """One replication of one cell, all methods on the same dataset.

    Returns (rep, {method: (tau_obs, summary, bf01, quantile_row)}). Runs
    inside worker processes; must stay picklable.
    """
    family, tau, n, rep, methods, base_seed, ci_level = task
    data_seed, chain_seed = replication_seeds(base_seed, family, tau, n, rep)
    s = sample_copula(CopulaSpec(family=family, tau=tau, n=n, seed=data_seed))
    t_obs = kendall_tau(s)
    prior = cosine_prior()
    out = {}
    for method in methods:
        if method == "latent":
            post = run_chain(s, config=ChainConfig(seed=chain_seed))
        else:
            post = asymptotic_posterior_from_stats(t_obs, n, method=method)
        sm = summarize(post, ci_level=ci_level)
        bf01 = savage_dickey_bf01(post, prior)
        qrow = posterior_quantiles(post, DEFAULT_PROBS)
        out[method] = (t_obs, sm, bf01, qrow)
    return rep, out


def _cell_tasks(plan: SimulationPlan, family: str, tau: float, n: int):
    return [
        (family, tau, n, rep, plan.methods, plan.base_seed, plan.ci_level)
        for rep in range(plan.replications)
    ]


def run_cell(plan: SimulationPlan, family: str, tau: float, n: int,
             executor=None, n_workers: int = 1):
    """Run every replication of one (family, tau, n) cell.

    Returns ({method: RecoveryResult}, failures) where failures is a list of
    {replication, error} records for replications that raised.
    """
    tasks = _cell_tasks(plan, family, tau, n)
    rows: dict[int, dict] = {}
    failures: list[dict] = []
    if executor is None:
        for task in tasks:
            try:
                rep, out = run_replication(task)
                rows[rep] = out
            except Exception as exc:  # noqa: BLE001 — recorded, run continues
                failures.append({"replication": task[3], "error": f"{type(exc).__name__}: {exc}"})
    else:
        chunk = max(1, len(tasks) // (max(1, n_workers) * 8))
        futures = [executor.submit(_run_chunk, tasks[i : i + chunk])
                   for i in range(0, len(tasks), chunk)]
        for fut in futures:
            for rep, out, err in fut.result():
                if err is None:
                    rows[rep] = out
                else:
                    failures.append({"replication": rep, "error": err})

    results = {}
    for method in plan.methods:
        reps_ok = sorted(r for r in rows if method in rows[r])
        if not reps_ok:
            continue
        summaries, t_obs_list, bf_list, qrows = [], [], [], []
        for rep in reps_ok:
            t_obs, sm, bf01, qrow = rows[rep][method]
            summaries.append(sm)
            t_obs_list.append(t_obs)
            bf_list.append(bf01)
            qrows.append(qrow)
        qavg = QuantileAveragedPosterior(
            probs=np.asarray(DEFAULT_PROBS, dtype=np.float64).copy(),
            avg_quantiles=np.stack(qrows).mean(axis=0),
            replication_count=len(reps_ok),
        )
        results[method] = RecoveryResult(
            family=family, tau=tau, n=n, method=method,
            summaries=tuple(summaries), tau_obs=tuple(t_obs_list),
            bf01=tuple(bf_list), quantile_avg=qavg,
        )
    return results, failures


def _run_chunk(tasks):
    out = []
    for task in tasks:
        try:
            rep, res = run_replication(task)
            out.append((rep, res, None))
        except Exception as exc:  # noqa: BLE001 — recorded, run continues
            out.append((task[3], None, f"{type(exc).__name__}: {exc}"))
    return out


def _fmt(v: float) -> str:
    return repr(float(v))


def cell_filenames(family: str, tau: float, n: int, method: str) -> tuple[str, str]:
    stem = f"{family}_{tau:g}_{n}_{method}"
    return f"recovery_{stem}.csv", f"qavg_{stem}.csv"


def _write_recovery_csv(path: str, result: RecoveryResult, reps: list[int]) -> None:
    lines = [_RECOVERY_HEADER]
    for k, rep in enumerate(reps):
        s = result.summaries[k]
        lines.append(
            f"{rep},{_fmt(result.tau_obs[k])},{_fmt(s.median)},"
            f"{_fmt(s.ci_low)},{_fmt(s.ci_high)},{_fmt(result.bf01[k])}"
        )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _write_qavg_csv(path: str, qavg: QuantileAveragedPosterior) -> None:
    lines = [_QAVG_HEADER]
    for p, q in zip(qavg.probs, qavg.avg_quantiles):
        lines.append(f"{_fmt(p)},{_fmt(q)}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def run_simulation(plan: SimulationPlan, out_dir: str, force: bool = False,
                   workers: int | None = None, log=None) -> int:
    """Execute the plan, writing CSVs and a manifest into out_dir.

    Cells whose output files already exist are skipped unless force is set.
    Returns 0 on full success, 4 if any replication failed (failures are
    recorded in the manifest and the remaining replications still run).
    """
    def say(msg):
        if log is not None:
            log(msg)

    os.makedirs(out_dir, exist_ok=True)
    n_workers = resolve_workers(plan.workers, workers)
    all_failures: list[dict] = []
    wall_times: dict[str, float] = {}
    file_list: list[str] = []

    executor = None
    try:
        if n_workers > 1:
            executor = ProcessPoolExecutor(max_workers=n_workers)
        for family, tau, n in plan.cells():
            cell_files = [
                name
                for method in plan.methods
                for name in cell_filenames(family, tau, n, method)
            ]
            if not force and all(os.path.exists(os.path.join(out_dir, f)) for f in cell_files):
                say(f"cell {family} tau={tau:g} n={n}: outputs exist, skipping")
                file_list.extend(cell_files)
                continue
            t0 = time.perf_counter()
            results, failures = run_cell(
                plan, family, tau, n, executor=executor, n_workers=n_workers
            )
            wall_times[f"{family}_{tau:g}_{n}"] = time.perf_counter() - t0
            for rec in failures:
                rec.update({"family": family, "tau": tau, "n": n})
            all_failures.extend(failures)
            failed_reps = {rec["replication"] for rec in failures}
            reps_ok = [r for r in range(plan.replications) if r not in failed_reps]
            for method in plan.methods:
                if method not in results:
                    continue
                rec_name, qavg_name = cell_filenames(family, tau, n, method)
                _write_recovery_csv(os.path.join(out_dir, rec_name), results[method], reps_ok)
                _write_qavg_csv(os.path.join(out_dir, qavg_name), results[method].quantile_avg)
                file_list.extend([rec_name, qavg_name])
            say(
                f"cell {family} tau={tau:g} n={n}: {len(reps_ok)}/{plan.replications} "
                f"replications in {wall_times[f'{family}_{tau:g}_{n}']:.1f}s"
            )
    finally:
        if executor is not None:
            executor.shutdown()

    manifest = {
        "plan": asdict(plan),
        "seed_derivation": (
            "per replication: SeedSequence([base_seed, family_index, "
            "round(tau*1000)+1000, n, replication]) -> (data_seed, chain_seed)"
        ),
        # wall_times_s and workers vary run to run by nature; every other
        # field, and every CSV, is a pure function of the plan
        "versions": {
            "taulatent": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": platform.python_version(),
        },
        "workers": n_workers,
        "wall_times_s": {k: round(v, 3) for k, v in wall_times.items()},
        "failures": all_failures,
        "files": {
            name: {
                "sha256": _sha256(os.path.join(out_dir, name)),
                "bytes": os.path.getsize(os.path.join(out_dir, name)),
            }
            for name in sorted(set(file_list))
        },
    }
    with open(os.path.join(out_dir, "manifest.json"), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return 4 if all_failures else 0
