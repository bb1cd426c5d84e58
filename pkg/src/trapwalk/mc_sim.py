"""Monte Carlo estimates of the survival time.

Two estimators:

* ``site``: the walk is stepped site by site, literally following the
  transition rules.  Many paths advance in lockstep as numpy arrays.
* ``trap``: only the embedded trap-to-trap chain is sampled.  Each sampled
  transition contributes its exact conditional mean duration instead of a
  sampled one (a Rao-Blackwellized estimator).  It is unbiased for E(tau),
  never has larger variance, and its cost does not grow with interval lengths.

Random streams are numpy Philox generators keyed by (seed, worker, batch), so
a run is reproducible for a fixed (seed, worker_count) regardless of process
scheduling.  Per-worker partial sums are merged in worker order.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import BudgetExceeded, ValidationError
from .exact_engine import build_kernel, build_sojourn_table
from .landscape import Landscape
from .oracle import check_trajectory

MODES = ("site", "trap")
DEFAULT_PATH_CAP = 10**8
MAX_SITE_SPAN = 10**7  # the site mode keeps a trap mask of this many bytes at most
BATCH_SIZE = 1 << 15
SEED_LIMIT = 1 << 64

# outcome codes stored per path; non-negative values are death-trap indices
WALL_CODE = -1
CENSORED_CODE = -2

# column order of the trap-level destination table
_DESTS = ("left", "stay", "right", "wall", "die")
_MOVES = np.array([-1, 0, 1, 0, 0], dtype=np.int64)


@dataclass(frozen=True)
class SimConfig:
    seed: int = 0
    n_paths: int = 10_000
    worker_count: int = 1
    mode: str = "site"
    path_cap: int = DEFAULT_PATH_CAP

    def __post_init__(self) -> None:
        if not 0 <= self.seed < SEED_LIMIT:
            raise ValidationError("seed must be an unsigned 64-bit integer")
        if self.n_paths < 1:
            raise ValidationError("n_paths must be >= 1")
        if self.worker_count < 1:
            raise ValidationError("worker_count must be >= 1")
        if self.mode not in MODES:
            raise ValidationError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.path_cap < 1:
            raise ValidationError("path_cap must be >= 1")


@dataclass
class _Partial:
    """Sufficient statistics of one worker's share of paths."""

    n: int = 0
    total: float = 0.0
    total_sq: float = 0.0
    outcomes: dict = field(default_factory=dict)  # code -> count
    trap_visits: int = 0
    deaths: int = 0

    def add_batch(self, values: np.ndarray, codes: np.ndarray, visits: int, deaths: int) -> None:
        self.n += values.size
        self.total += float(values.sum())
        self.total_sq += float(np.dot(values, values))
        uniq, counts = np.unique(codes, return_counts=True)
        for u, c in zip(uniq.tolist(), counts.tolist()):
            self.outcomes[u] = self.outcomes.get(u, 0) + c
        self.trap_visits += visits
        self.deaths += deaths

    def merge(self, other: _Partial) -> None:
        self.n += other.n
        self.total += other.total
        self.total_sq += other.total_sq
        for u, c in sorted(other.outcomes.items()):
            self.outcomes[u] = self.outcomes.get(u, 0) + c
        self.trap_visits += other.trap_visits
        self.deaths += other.deaths


@dataclass(frozen=True)
class SurvivalEstimate:
    mode: str
    seed: int
    worker_count: int
    n: int
    mean: float
    std_error: float
    variance: float  # per-path sample variance
    histogram: dict  # "trap index" | "wall" | "censored" -> fraction of paths; sums to 1
    wall_fraction: float
    censored: int
    trap_visits: int
    deaths: int

    @property
    def biased_low(self) -> bool:
        """Censored paths contribute their capped length, so the mean is a lower estimate."""
        return self.censored > 0

    @property
    def death_rate_per_visit(self) -> float:
        return self.deaths / self.trap_visits if self.trap_visits else math.nan

    def z_score(self, exact: float) -> float:
        if self.std_error == 0:
            return 0.0 if self.mean == exact else math.inf
        return abs(self.mean - float(exact)) / self.std_error

    def to_json(self) -> dict:
        finite = lambda v: v if math.isfinite(v) else None  # noqa: E731
        return {
            "mean": self.mean,
            "stderr": finite(self.std_error),
            "variance": finite(self.variance),
            "n": self.n,
            "mode": self.mode,
            "seed": self.seed,
            "workers": self.worker_count,
            "histogram": self.histogram,
            "wall_fraction": self.wall_fraction,
            "censored": self.censored,
            "biased_low": self.biased_low,
            "trap_visits": self.trap_visits,
            "deaths": self.deaths,
        }


def _finish(p: _Partial, cfg: SimConfig) -> SurvivalEstimate:
    mean = p.total / p.n
    if p.n > 1:
        var = max(p.total_sq - p.n * mean * mean, 0.0) / (p.n - 1)
        se = math.sqrt(var / p.n)
    else:
        var = se = math.inf
    hist = {}
    for code in sorted(c for c in p.outcomes if c >= 0):
        hist[str(code)] = p.outcomes[code] / p.n
    if p.outcomes.get(WALL_CODE):
        hist["wall"] = p.outcomes[WALL_CODE] / p.n
    if p.outcomes.get(CENSORED_CODE):
        hist["censored"] = p.outcomes[CENSORED_CODE] / p.n
    return SurvivalEstimate(
        cfg.mode, cfg.seed, cfg.worker_count, p.n, mean, se, var, hist,
        p.outcomes.get(WALL_CODE, 0) / p.n, p.outcomes.get(CENSORED_CODE, 0),
        p.trap_visits, p.deaths,
    )


def _rng(seed: int, worker: int, batch: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, worker, batch])))


def _shares(n: int, workers: int) -> list[int]:
    base, extra = divmod(n, workers)
    return [base + (w < extra) for w in range(workers)]


# ---------------------------------------------------------------- site level


def _site_batch(positions: np.ndarray, mask: np.ndarray, wall: int, n: int,
                rng: np.random.Generator, cap: int):
    x = np.zeros(n, dtype=np.int64)
    ids = np.arange(n)
    tau = np.zeros(n, dtype=np.float64)
    codes = np.full(n, CENSORED_CODE, dtype=np.int64)
    visits = deaths = 0
    step = 0
    while ids.size and step < cap:
        step += 1
        u = rng.random(ids.size)
        trapped = mask[x]
        die = trapped & (u < 1 / 3)
        go_left = np.where(trapped, (u < 2 / 3) & (x > 0), u < 0.5)
        visits += int(trapped.sum())
        deaths += int(die.sum())
        x = x + np.where(go_left, -1, 1)
        done = die | (x == wall)
        if done.any():
            fin = ids[done]
            tau[fin] = step
            # a dying walker has not moved: its trap is the previous site
            died_at = x[done] - np.where(go_left[done], -1, 1)
            codes[fin] = np.where(die[done], np.searchsorted(positions, died_at), WALL_CODE)
            keep = ~done
            ids, x = ids[keep], x[keep]
    tau[ids] = cap  # censored paths
    return tau, codes, visits, deaths


def _site_worker(args) -> _Partial:
    intervals, wall, cfg, worker, n = args
    ls = Landscape(intervals, wall)
    positions = np.asarray(ls.positions, dtype=np.int64)
    mask = np.zeros(wall + 1, dtype=bool)
    mask[positions] = True
    part = _Partial()
    for batch, start in enumerate(range(0, n, BATCH_SIZE)):
        size = min(BATCH_SIZE, n - start)
        vals, codes, visits, deaths = _site_batch(positions, mask, wall, size,
                                                 _rng(cfg.seed, worker, batch), cfg.path_cap)
        part.add_batch(vals, codes, visits, deaths)
    return part


# ---------------------------------------------------------------- trap level


def _trap_tables(ls: Landscape) -> tuple[np.ndarray, np.ndarray]:
    kernel = build_kernel(ls)
    table = build_sojourn_table(ls)
    probs = np.array([[float(getattr(r, d)) for d in _DESTS] for r in kernel.rows])
    durations = np.array([[float(e.durations.get(d, 0)) for d in _DESTS] for e in table.entries])
    cum = np.cumsum(probs, axis=1)[:, :-1]  # thresholds for the first four destinations
    return cum, durations


def _trap_batch(cum: np.ndarray, durations: np.ndarray, n: int,
                rng: np.random.Generator, cap: int):
    trap = np.zeros(n, dtype=np.int64)
    ids = np.arange(n)
    acc = np.zeros(n, dtype=np.float64)
    codes = np.full(n, CENSORED_CODE, dtype=np.int64)
    visits = deaths = 0
    step = 0
    while ids.size and step < cap:
        step += 1
        u = rng.random(ids.size)
        dest = (u[:, None] >= cum[trap]).sum(axis=1)
        acc[ids] += durations[trap, dest]
        visits += ids.size
        die = dest == 4
        deaths += int(die.sum())
        done = die | (dest == 3)
        if done.any():
            codes[ids[done]] = np.where(die[done], trap[done], WALL_CODE)
            keep = ~done
            ids, trap, dest = ids[keep], trap[keep], dest[keep]
        trap = trap + _MOVES[dest]
    return acc, codes, visits, deaths


def _trap_worker(args) -> _Partial:
    intervals, wall, cfg, worker, n = args
    cum, durations = _trap_tables(Landscape(intervals, wall))
    part = _Partial()
    for batch, start in enumerate(range(0, n, BATCH_SIZE)):
        size = min(BATCH_SIZE, n - start)
        vals, codes, visits, deaths = _trap_batch(cum, durations, size,
                                                 _rng(cfg.seed, worker, batch), cfg.path_cap)
        part.add_batch(vals, codes, visits, deaths)
    return part


# ---------------------------------------------------------------- drivers


def _run(worker_fn, ls: Landscape, cfg: SimConfig) -> SurvivalEstimate:
    jobs = [(ls.intervals, ls.wall, cfg, w, n)
            for w, n in enumerate(_shares(cfg.n_paths, cfg.worker_count)) if n]
    if cfg.worker_count == 1 or len(jobs) == 1:
        parts = [worker_fn(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=len(jobs)) as pool:
            parts = list(pool.map(worker_fn, jobs))  # map keeps worker order
    total = _Partial()
    for part in parts:
        total.merge(part)
    return _finish(total, cfg)


def simulate_site(ls: Landscape, cfg: SimConfig) -> SurvivalEstimate:
    wall = ls.require_wall()
    if wall > MAX_SITE_SPAN:
        raise BudgetExceeded(f"span {wall} too large for site-level simulation; use trap mode")
    return _run(_site_worker, ls, cfg)


def simulate_traplevel(ls: Landscape, cfg: SimConfig) -> SurvivalEstimate:
    ls.require_wall()
    return _run(_trap_worker, ls, cfg)


def simulate(ls: Landscape, cfg: SimConfig) -> SurvivalEstimate:
    return simulate_site(ls, cfg) if cfg.mode == "site" else simulate_traplevel(ls, cfg)


# ---------------------------------------------------------------- replay


@dataclass(frozen=True)
class ReplayResult:
    valid: bool
    tau: int | None
    ended_by: str | None
    error: str | None = None

    def to_json(self) -> dict:
        return {"valid": self.valid, "tau": self.tau, "ended_by": self.ended_by, "error": self.error}


def replay(traj: Sequence, ls: Landscape) -> ReplayResult:
    """Check an explicit path step by step and report its survival time."""
    try:
        sites, ended = check_trajectory(traj, ls)
    except ValidationError as exc:
        return ReplayResult(False, None, None, str(exc))
    tau = len(sites) if ended == "death" else len(sites) - 1
    return ReplayResult(True, tau, ended)
