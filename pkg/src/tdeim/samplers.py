"""Slice index selection: DEIM, tubal DEIM, hybrid TDEIM and the baselines.

Indices are 0-based throughout the library; :attr:`IndexSet.one_based`
gives the 1-based labels used in reports.  Randomized samplers draw from
numpy's PCG64 generator (``numpy.random.default_rng(seed)``), so a seed
gives the same indices on every platform.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import DegeneracyError, RankError, SamplingError
from .tensor import (
    EPS,
    as_tensor3,
    check_indices,
    fft_mode3,
    mirror_slices,
    n_unique_slices,
)
from .tsvd import LeverageScores, tubal_leverage

METHODS = ("tdeim", "htdeim", "top_leverage", "leverage_sampling", "uniform")
RANDOMIZED = ("leverage_sampling", "uniform")

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class IndexSet:
    """Ordered distinct slice indices in ``[0, bound)``."""

    indices: tuple
    bound: int

    def __post_init__(self):
        idx = check_indices(self.indices, self.bound)
        object.__setattr__(self, "indices", tuple(int(i) for i in idx))

    def __len__(self):
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def __getitem__(self, k):
        return self.indices[k]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.indices, dtype=dtype or np.int64)

    @property
    def one_based(self):
        return tuple(i + 1 for i in self.indices)


@dataclass(frozen=True)
class SamplerConfig:
    method: str
    rank: int
    extended_rank: int | None = None
    seed: int | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; choose from {', '.join(METHODS)}")
        if self.rank < 1:
            raise RankError(f"rank must be >= 1, got {self.rank}")
        if self.extended_rank is not None and self.extended_rank < self.rank:
            raise RankError(f"extended rank {self.extended_rank} is below rank {self.rank}")
        if self.method == "htdeim" and self.extended_rank is None:
            raise RankError("htdeim needs an extended rank")

    @property
    def n_indices(self):
        if self.method == "htdeim":
            return self.extended_rank
        return self.rank


def _argmax(values):
    # np.argmax returns the first maximum, i.e. ties go to the smallest index.
    return int(np.argmax(values))


def deim_matrix(basis):
    """DEIM row selection for an ``I1 x R`` basis with independent columns."""
    U = np.asarray(basis, dtype=np.float64)
    if U.ndim == 1:
        U = U[:, None]
    n, r = U.shape
    if r > n:
        raise RankError(f"cannot pick {r} rows from {n}")
    s = [_argmax(np.abs(U[:, 0]))]
    for j in range(1, r):
        A = U[s, :j]
        if np.linalg.cond(A) >= 1.0 / (EPS * j):
            raise DegeneracyError(f"interpolation matrix singular at step {j + 1}", step=j + 1)
        c = np.linalg.solve(A, U[s, j])
        res = np.abs(U[:, j] - U[:, :j] @ c)
        if res.max() <= 1e-12 * max(np.linalg.norm(U[:, j]), np.finfo(float).tiny):
            raise DegeneracyError(f"residual vanishes at step {j + 1}: column {j + 1} is dependent", step=j + 1)
        s.append(_argmax(res))
    return IndexSet(tuple(s), n)


class _TubalDeim:
    """Spectral-domain state of a TDEIM run over one basis tensor.

    Spectral slices whose interpolation block ``U_hat_i[s, :j]`` is
    numerically singular (typical when ``X_hat_i`` has rank below ``R``)
    are solved in the least-squares sense when ``on_singular="lstsq"``.
    The run only fails when the residual lateral slice vanishes, i.e. the
    basis is not of full tubal rank.  ``on_singular="raise"`` fails on the
    first singular block instead.
    """

    def __init__(self, basis, on_singular="lstsq"):
        basis = as_tensor3(basis, "basis")
        self.n1, self.rank, self.n3 = basis.shape
        if self.rank > self.n1:
            raise RankError(f"cannot pick {self.rank} slices from {self.n1}")
        if on_singular not in ("lstsq", "raise"):
            raise ValueError(f"on_singular must be 'lstsq' or 'raise', got {on_singular!r}")
        self.on_singular = on_singular
        self.basis = basis
        self.real = not np.iscomplexobj(basis)
        uh = fft_mode3(basis).slices
        self.count = n_unique_slices(self.n3) if self.real else self.n3
        self.uh = uh[: self.count]
        self.singular = []

    def _to_spatial(self, half):
        """Back-transform stacked spectral columns ``(count, I1)`` to tubes ``(I1, I3)``."""
        full = mirror_slices(half[:, :, None], self.n3)[:, :, 0] if self.real else half
        tubes = np.fft.ifft(full, axis=0).T
        return tubes.real if self.real else tubes

    def residual(self, s, j):
        """Residual lateral slice ``j`` after interpolating on rows ``s``, as ``(I1, I3)`` tubes."""
        A = self.uh[:, s, :j]
        b = self.uh[:, s, j]
        limit = 1.0 / (EPS * j)
        c = np.empty((self.count, j), dtype=np.complex128)
        for i in range(self.count):
            cond = np.linalg.cond(A[i])
            if np.isfinite(cond) and cond < limit:
                c[i] = np.linalg.solve(A[i], b[i])
                continue
            if self.on_singular == "raise":
                raise DegeneracyError(
                    f"spectral slice {i + 1} of U(s, 1:{j}, :) is singular at step {j + 1}",
                    step=j + 1,
                    slice_index=i + 1,
                )
            self.singular.append((j + 1, i + 1))
            c[i] = np.linalg.lstsq(A[i], b[i], rcond=None)[0]
        res = self.uh[:, :, j] - np.einsum("kij,kj->ki", self.uh[:, :, :j], c)
        return self._to_spatial(res)

    def run(self):
        first = self.basis[:, 0, :]
        s = [_argmax(np.linalg.norm(first, axis=1))]
        residuals = [first]
        for j in range(1, self.rank):
            res = self.residual(s, j)
            residuals.append(res)
            norms = np.linalg.norm(res, axis=1)
            scale = np.linalg.norm(self.basis[:, j, :])
            # Sampled rows interpolate exactly; masking only matters in singular slices.
            norms[s] = -1.0
            if norms.max() <= 1e-12 * max(scale, np.finfo(float).tiny):
                raise DegeneracyError(
                    f"residual vanishes at step {j + 1}: lateral slice {j + 1} of the basis "
                    "depends on the previous ones",
                    step=j + 1,
                )
            s.append(_argmax(norms))
        if self.singular:
            log.debug("TDEIM used least squares in %d singular (step, slice) blocks", len(self.singular))
        return s, np.stack(residuals, axis=1)


def tdeim(basis, on_singular="lstsq"):
    """Tubal DEIM selection of ``R`` horizontal slices from an ``I1 x R x I3`` basis.

    For lateral slices pass the right basis ``V``.  See :class:`_TubalDeim`
    for ``on_singular``.
    """
    s, _ = _TubalDeim(basis, on_singular).run()
    return IndexSet(tuple(s), basis.shape[0])


def tdeim_residuals(basis, on_singular="lstsq"):
    """TDEIM indices together with the ``I1 x R x I3`` tensor of residual lateral slices.

    Lateral slice ``j`` of the residual tensor is the residual that picked
    index ``j``; slice 0 is the first basis slice itself.
    """
    s, res = _TubalDeim(basis, on_singular).run()
    return IndexSet(tuple(s), basis.shape[0]), res


def _hybrid_one_side(basis, rank, extended_rank):
    basis = as_tensor3(basis, "basis")[:, :rank]
    n = basis.shape[0]
    if extended_rank > n:
        raise RankError(f"extended rank {extended_rank} exceeds dimension {n}")
    s, res = tdeim_residuals(basis)
    scores = tubal_leverage(res).scores.copy()
    taken = np.zeros(n, dtype=bool)
    taken[list(s)] = True
    rest = np.flatnonzero(~taken)
    order = rest[np.argsort(-scores[rest], kind="stable")]
    extra = order[: extended_rank - rank]
    return IndexSet(tuple(s) + tuple(int(i) for i in extra), n)


def htdeim(basis_u, basis_v, rank, extended_rank):
    """Hybrid TDEIM: ``rank`` indices by TDEIM, the next ``extended_rank - rank`` by
    the largest tubal leverage scores of the TDEIM residual tensor.

    Returns ``(horizontal, lateral)`` index sets of length ``extended_rank``.
    """
    basis_u = as_tensor3(basis_u, "basis_u")
    basis_v = as_tensor3(basis_v, "basis_v")
    bound = min(basis_u.shape[0], basis_v.shape[0])
    if not 1 <= rank <= extended_rank:
        raise RankError(f"need 1 <= rank <= extended rank, got {rank}, {extended_rank}")
    if extended_rank > bound:
        raise RankError(f"extended rank {extended_rank} exceeds min(I1, I2) = {bound}")
    if basis_u.shape[1] < rank or basis_v.shape[1] < rank:
        raise RankError(f"bases have fewer than {rank} lateral slices")
    return (
        _hybrid_one_side(basis_u, rank, extended_rank),
        _hybrid_one_side(basis_v, rank, extended_rank),
    )


def top_leverage(scores, rank):
    """Indices of the ``rank`` largest scores, ties to the smaller index."""
    values = scores.scores if isinstance(scores, LeverageScores) else np.asarray(scores, float)
    if rank > len(values):
        raise RankError(f"cannot take {rank} of {len(values)} scores")
    order = np.argsort(-values, kind="stable")[:rank]
    return IndexSet(tuple(int(i) for i in order), len(values))


def leverage_sample(scores, rank, seed):
    """Draw ``rank`` distinct indices, each draw proportional to the remaining scores.

    ``seed`` is an integer or an existing ``numpy.random.Generator``.
    """
    values = scores.scores if isinstance(scores, LeverageScores) else np.asarray(scores, float)
    weights = np.clip(np.asarray(values, dtype=np.float64), 0.0, None)
    if rank > np.count_nonzero(weights > 0):
        raise SamplingError(
            f"only {np.count_nonzero(weights > 0)} indices have positive probability, need {rank}"
        )
    rng = np.random.default_rng(seed)
    weights = weights.copy()
    picked = []
    for _ in range(rank):
        cdf = np.cumsum(weights)
        k = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
        k = min(k, len(weights) - 1)
        while weights[k] == 0:
            # Only reachable through rounding at the top of the cdf.
            k -= 1
        picked.append(k)
        weights[k] = 0.0
    return IndexSet(tuple(picked), len(values))


def uniform_sample(bound, rank, seed):
    if rank > bound:
        raise RankError(f"cannot draw {rank} distinct indices from {bound}")
    rng = np.random.default_rng(seed)
    picked = rng.choice(bound, size=rank, replace=False)
    return IndexSet(tuple(int(i) for i in picked), bound)


def select(config, basis_u, basis_v):
    """Run the sampler named by ``config`` on both sides.

    ``basis_u`` (``I1 x R x I3``) yields horizontal indices ``p`` and
    ``basis_v`` (``I2 x R x I3``) lateral indices ``q``.  Randomized methods
    draw ``p`` then ``q`` from a single generator seeded with ``config.seed``.
    """
    method, rank = config.method, config.rank
    basis_u = as_tensor3(basis_u, "basis_u")[:, :rank]
    basis_v = as_tensor3(basis_v, "basis_v")[:, :rank]
    if method == "tdeim":
        return tdeim(basis_u), tdeim(basis_v)
    if method == "htdeim":
        return htdeim(basis_u, basis_v, rank, config.extended_rank)
    lu, lv = tubal_leverage(basis_u), tubal_leverage(basis_v)
    if method == "top_leverage":
        return top_leverage(lu, rank), top_leverage(lv, rank)
    rng = np.random.default_rng(config.seed)
    if method == "leverage_sampling":
        return leverage_sample(lu, rank, rng), leverage_sample(lv, rank, rng)
    return (
        uniform_sample(basis_u.shape[0], rank, rng),
        uniform_sample(basis_v.shape[0], rank, rng),
    )
