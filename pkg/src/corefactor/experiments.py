"""Seeded Monte Carlo trials on G(n, c/n): cores, core statistics, k-factors.

Every trial is a pure function of its arguments.  Sweeps derive one seed
per ``(grid index, trial index)`` so results do not depend on how trials are
scheduled across worker processes.
"""

from __future__ import annotations

import csv
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence, Union

from .factor import delta_k, find_k_factor
from .graph import gnp_random, k_core
from .seeding import derive_seed
from .thresholds import compute_ck, degree_pmf_distance, mu_kc

DEFAULT_SAMPLES = 30


@dataclass
class TrialRecord:
    seed: int
    n: int
    c: float
    k: int
    factor_k: Optional[int]
    core_size: int
    core_edges: int
    degree_hist: dict[int, int]
    outcome: Optional[str] = None
    sampled: bool = False
    factor_edges: Optional[int] = None
    timings: dict[str, float] = field(default_factory=dict, compare=False)

    @property
    def factor_success(self) -> bool:
        return self.outcome in ("factor", "critical")

    def to_json(self) -> dict:
        """Deterministic fields only; timings are kept out on purpose."""
        d = asdict(self)
        del d["timings"]
        d["degree_hist"] = {str(j): cnt for j, cnt in sorted(self.degree_hist.items())}
        return d

    @classmethod
    def from_json(cls, d: dict) -> "TrialRecord":
        d = dict(d)
        d["degree_hist"] = {int(j): cnt for j, cnt in d["degree_hist"].items()}
        return cls(**d)


def run_trial(n: int, c: float, k: int, factor_k: Optional[int], seed: int,
              samples: int = DEFAULT_SAMPLES) -> TrialRecord:
    """Generate G(n, c/n), peel its k-core and look for a factor_k-factor.

    When ``factor_k * |core|`` is odd, criticality is tested on ``samples``
    vertices of the core (fewer if the core is smaller).  ``factor_k=None``
    skips the factor step.
    """
    if factor_k is not None and not 1 <= factor_k <= k:
        raise ValueError(f"factor_k must lie in [1, k]; got {factor_k} with k={k}")
    timings: dict[str, float] = {}
    t0 = time.perf_counter()
    g = gnp_random(n, c, seed)
    t1 = time.perf_counter()
    core = k_core(g, k)
    t2 = time.perf_counter()
    timings["generate"] = 1e3 * (t1 - t0)
    timings["peel"] = 1e3 * (t2 - t1)
    rec = TrialRecord(seed=seed, n=n, c=c, k=k, factor_k=factor_k,
                      core_size=core.size, core_edges=core.core.m,
                      degree_hist=core.degree_histogram(), timings=timings)
    if factor_k is None or core.size == 0:
        return rec
    h = core.core
    r = min(samples, h.n)
    out = find_k_factor(h, factor_k, critical="sampled", samples=r,
                        seed=derive_seed(seed, 0x5A))
    rec.outcome = out.kind
    rec.sampled = out.sampled
    if out.edges is not None:
        rec.factor_edges = len(out.edges)
    timings.update(out.timings)
    return rec


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------

def wilson_interval(successes: int, trials: int, z: float = 1.96) -> tuple[float, float]:
    if trials == 0:
        return (0.0, 1.0)
    p = successes / trials
    denom = 1 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    return (max(0.0, centre - half), min(1.0, centre + half))


@dataclass
class SweepRow:
    c: float
    trials: int
    core_nonempty: int
    factor_success: int
    mean_core_fraction: float
    predicted_core_fraction: float
    mean_tv_distance: Optional[float]

    @property
    def core_frequency(self) -> float:
        return self.core_nonempty / self.trials if self.trials else float("nan")

    @property
    def factor_frequency(self) -> float:
        return self.factor_success / self.trials if self.trials else float("nan")


@dataclass
class SweepSummary:
    n: int
    k: int
    factor_k: Optional[int]
    grid: list[float]
    rows: list[SweepRow]
    records: list[TrialRecord] = field(repr=False, default_factory=list)


def _task(args):
    return run_trial(*args)


def _trial_tasks(n, k, factor_k, c_grid, trials, base_seed, samples):
    return [(n, c, k, factor_k, derive_seed(base_seed, ci, ti), samples)
            for ci, c in enumerate(c_grid) for ti in range(trials)]


def run_tasks(tasks: Sequence[tuple], parallelism: int = 1) -> list[TrialRecord]:
    """Run trial argument tuples, returning records in task order."""
    if parallelism <= 1 or len(tasks) <= 1:
        return [_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=parallelism) as pool:
        return list(pool.map(_task, tasks, chunksize=1))


def summarize(n: int, k: int, factor_k: Optional[int], c_grid: Sequence[float],
              trials: int, records: Sequence[TrialRecord]) -> SweepSummary:
    th = compute_ck(k) if k >= 3 else None
    rows = []
    for ci, c in enumerate(c_grid):
        recs = records[ci * trials:(ci + 1) * trials]
        pred = None
        if th is not None and c > th.c_k:
            pred = mu_kc(k, c, th)
        fracs = [r.core_size / r.n for r in recs]
        tvs = [degree_pmf_distance(pred, r.degree_hist, r.n)
               for r in recs if pred is not None and r.core_size]
        rows.append(SweepRow(
            c=c,
            trials=len(recs),
            core_nonempty=sum(1 for r in recs if r.core_size > 0),
            factor_success=sum(1 for r in recs if r.factor_success),
            mean_core_fraction=math.fsum(fracs) / len(fracs) if fracs else float("nan"),
            predicted_core_fraction=pred.core_fraction if pred is not None else 0.0,
            mean_tv_distance=math.fsum(tvs) / len(tvs) if tvs else None,
        ))
    return SweepSummary(n, k, factor_k, list(c_grid), rows, list(records))


def sweep(n: int, k: int, factor_k: Optional[int], c_grid: Sequence[float], trials: int,
          base_seed: int, parallelism: int = 1,
          samples: int = DEFAULT_SAMPLES) -> SweepSummary:
    """``trials`` trials at every grid point; seed = mix(base_seed, ci, ti)."""
    grid = list(c_grid)
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise ValueError("c grid must be sorted ascending")
    tasks = _trial_tasks(n, k, factor_k, grid, trials, base_seed, samples)
    records = run_tasks(tasks, parallelism)
    return summarize(n, k, factor_k, grid, trials, records)


def write_sweep(out_dir: Union[str, os.PathLike], config: dict, summary: SweepSummary) -> None:
    """Write ``config.json``, ``trials.jsonl``, ``summary.csv`` and
    ``timings.jsonl`` under ``out_dir``."""
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "config.json"), "w") as fh:
        json.dump(config, fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(os.path.join(out_dir, "trials.jsonl"), "w") as fh:
        for rec in summary.records:
            fh.write(json.dumps(rec.to_json()) + "\n")
    with open(os.path.join(out_dir, "timings.jsonl"), "w") as fh:
        for rec in summary.records:
            fh.write(json.dumps({"seed": rec.seed, "c": rec.c, **rec.timings}) + "\n")
    with open(os.path.join(out_dir, "summary.csv"), "w", newline="") as fh:
        write_summary_csv(summary, fh)


SUMMARY_COLUMNS = [
    "c", "trials", "core_freq", "core_freq_lo", "core_freq_hi",
    "factor_freq", "factor_freq_lo", "factor_freq_hi",
    "mean_core_fraction", "predicted_core_fraction", "mean_tv_distance",
]


def write_summary_csv(summary: SweepSummary, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(SUMMARY_COLUMNS)
    for row in summary.rows:
        clo, chi = wilson_interval(row.core_nonempty, row.trials)
        flo, fhi = wilson_interval(row.factor_success, row.trials)
        w.writerow([
            repr(row.c), row.trials,
            f"{row.core_frequency:.6g}", f"{clo:.6g}", f"{chi:.6g}",
            f"{row.factor_frequency:.6g}", f"{flo:.6g}", f"{fhi:.6g}",
            f"{row.mean_core_fraction:.8g}", f"{row.predicted_core_fraction:.8g}",
            "" if row.mean_tv_distance is None else f"{row.mean_tv_distance:.6g}",
        ])


# ---------------------------------------------------------------------------
# Threshold location
# ---------------------------------------------------------------------------

@dataclass
class BisectResult:
    estimate: float
    c_lo: float
    c_hi: float
    freq_lo: float
    freq_hi: float
    evaluations: int


def event_frequency(n: int, k: int, c: float, trials: int, factor_k: Optional[int],
                    base_seed: int, parallelism: int = 1,
                    samples: int = DEFAULT_SAMPLES) -> float:
    """Fraction of trials where the target event happens at mean degree c.

    The target is a nonempty k-core when ``factor_k`` is None, otherwise a
    nonempty k-core that has a factor_k-factor or is factor_k-critical.
    Trial ``t`` uses seed mix(base_seed, t) at every c.
    """
    tasks = [(n, c, k, factor_k, derive_seed(base_seed, t), samples) for t in range(trials)]
    recs = run_tasks(tasks, parallelism)
    if factor_k is None:
        hits = sum(1 for r in recs if r.core_size > 0)
    else:
        hits = sum(1 for r in recs if r.factor_success)
    return hits / trials


def threshold_bisect(n: int, k: int, trials: int, c_lo: float, c_hi: float,
                     factor_k: Optional[int] = None, base_seed: int = 0,
                     resolution: float = 0.01, parallelism: int = 1) -> BisectResult:
    """Bisect on c for the 1/2-crossing of the event frequency."""
    if not c_lo < c_hi:
        raise ValueError("need c_lo < c_hi")
    if trials < 1:
        raise ValueError("need at least one trial per point")
    f_lo = event_frequency(n, k, c_lo, trials, factor_k, base_seed, parallelism)
    f_hi = event_frequency(n, k, c_hi, trials, factor_k, base_seed, parallelism)
    evals = 2
    if not f_lo < 0.5:
        raise ValueError(f"frequency {f_lo:.3f} at c_lo={c_lo} is not below 1/2")
    if not f_hi > 0.5:
        raise ValueError(f"frequency {f_hi:.3f} at c_hi={c_hi} is not above 1/2")
    lo, hi = c_lo, c_hi
    while hi - lo > resolution:
        mid = 0.5 * (lo + hi)
        f = event_frequency(n, k, mid, trials, factor_k, base_seed, parallelism)
        evals += 1
        if f > 0.5:
            hi, f_hi = mid, f
        else:
            lo, f_lo = mid, f
    return BisectResult(0.5 * (lo + hi), lo, hi, f_lo, f_hi, evals)
