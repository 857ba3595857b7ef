"""Experiment drivers behind the command line: single runs, rank sweeps, bound checks."""
from __future__ import annotations

import csv
import time
from dataclasses import dataclass

from .cur import assemble_cur, cur_error, error_constants, verify_bound
from .errors import RankError
from .samplers import RANDOMIZED, SamplerConfig, select, tdeim
from .tsvd import spectral_singular_values, truncated_tsvd

CSV_FIELDS = ("method", "rank", "trial", "seed", "error", "eta_p", "eta_q", "wall_seconds")
TOTAL_FIELD = "wall_seconds_total"


@dataclass
class ExperimentRecord:
    method: str
    rank: int
    trial: int
    seed: int | None
    error: float
    eta_p: float
    eta_q: float
    wall_seconds: float
    wall_seconds_total: float

    def row(self, with_total=False):
        vals = [
            self.method,
            self.rank,
            self.trial,
            "" if self.seed is None else self.seed,
            repr(float(self.error)),
            repr(float(self.eta_p)),
            repr(float(self.eta_q)),
            f"{self.wall_seconds:.6f}",
        ]
        if with_total:
            vals.append(f"{self.wall_seconds_total:.6f}")
        return vals


def header(with_total=False):
    return list(CSV_FIELDS) + ([TOTAL_FIELD] if with_total else [])


class BasisCache:
    """Truncated t-SVD bases of one tensor keyed by rank, with their build times."""

    def __init__(self, x, svd_method="auto"):
        self.x = x
        self.svd_method = svd_method
        self._store = {}

    def get(self, rank):
        if rank not in self._store:
            t0 = time.perf_counter()
            factors = truncated_tsvd(self.x, rank, method=self.svd_method)
            self._store[rank] = (factors, time.perf_counter() - t0)
        return self._store[rank]


def check_rank(x, rank, extended_rank=None):
    bound = min(x.shape[0], x.shape[1])
    if not 1 <= rank <= bound:
        raise RankError(f"rank {rank} outside [1, {bound}] for a tensor of shape {x.shape}")
    if extended_rank is not None and not rank <= extended_rank <= bound:
        raise RankError(f"extended rank {extended_rank} outside [{rank}, {bound}]")


def run_approx(x, method, rank, extended_rank=None, middle="optimal", seed=None, trial=0, cache=None):
    """One CUR approximation with the named sampler.

    For ``htdeim`` the basis has tubal rank ``rank`` and ``extended_rank``
    slices are sampled; the record's rank is the number of sampled slices.
    """
    check_rank(x, rank, extended_rank if method == "htdeim" else None)
    config = SamplerConfig(method, rank, extended_rank, seed if method in RANDOMIZED else None)
    cache = cache or BasisCache(x)
    factors, basis_seconds = cache.get(rank)
    t0 = time.perf_counter()
    p, q = select(config, factors.U, factors.V)
    model = assemble_cur(x, p, q, middle)
    seconds = time.perf_counter() - t0
    err = cur_error(x, model)
    consts = error_constants(factors.U, p, factors.V, q, strict=False)
    return ExperimentRecord(
        method=method,
        rank=config.n_indices,
        trial=trial,
        seed=config.seed,
        error=err,
        eta_p=consts.eta_p,
        eta_q=consts.eta_q,
        wall_seconds=seconds,
        wall_seconds_total=seconds + basis_seconds,
    )


def sweep(x, methods, rank_min, rank_max, trials=1, seed=0, middle="optimal", htdeim_basis_rank=None):
    """Yield one record per (method, rank, trial); deterministic methods run once per rank.

    Randomized trials use seed ``seed + trial``.  For ``htdeim`` each swept
    rank is the number of sampled slices and the basis rank is
    ``min(htdeim_basis_rank, rank)`` (default: a third of the swept rank,
    at least 1).
    """
    if not methods:
        raise ValueError("no methods given")
    if rank_min > rank_max:
        raise RankError(f"rank range {rank_min}..{rank_max} is empty")
    check_rank(x, rank_min)
    check_rank(x, rank_max)
    cache = BasisCache(x)
    for method in methods:
        SamplerConfig(method, 1, 1)  # validates the name
        for rank in range(rank_min, rank_max + 1):
            runs = range(trials) if method in RANDOMIZED else range(1)
            for trial in runs:
                trial_seed = seed + trial if method in RANDOMIZED else None
                if method == "htdeim":
                    base = htdeim_basis_rank or max(1, rank // 3)
                    yield run_approx(x, method, min(base, rank), rank, middle, None, trial, cache)
                else:
                    yield run_approx(x, method, rank, None, middle, trial_seed, trial, cache)


def write_records(records, stream, with_total=False, write_header=True):
    """Write records as CSV, flushing after each row so partial sweeps survive a failure."""
    writer = csv.writer(stream, lineterminator="\n")
    if write_header:
        writer.writerow(header(with_total))
        stream.flush()
    for rec in records:
        writer.writerow(rec.row(with_total))
        stream.flush()


def run_verify(x, rank, middle="optimal"):
    """TDEIM selection at ``rank`` followed by the error-bound check."""
    check_rank(x, rank)
    factors = truncated_tsvd(x, rank)
    p, q = tdeim(factors.U), tdeim(factors.V)
    model = assemble_cur(x, p, q, middle)
    consts = error_constants(factors.U, p, factors.V, q)
    report = verify_bound(x, model, consts, rank=rank, basis_u=factors.U, sigma=spectral_singular_values(x))
    return p, q, report

