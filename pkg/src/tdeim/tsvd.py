"""Truncated t-SVD and tubal leverage scores."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse.linalg import ArpackNoConvergence, svds

from .errors import RankError
from .tensor import (
    SpectralTensor,
    as_tensor3,
    fft_mode3,
    ifft_mode3,
    mirror_slices,
    n_unique_slices,
)


@dataclass(frozen=True)
class TSvdFactors:
    """``X ~ U * S * V^T`` with ``U: I1 x R x I3``, ``S: R x R x I3``, ``V: I2 x R x I3``."""

    U: np.ndarray
    S: np.ndarray
    V: np.ndarray
    rank: int


@dataclass(frozen=True)
class LeverageScores:
    scores: np.ndarray
    rank: int

    @property
    def probabilities(self):
        return self.scores / self.rank

    def __len__(self):
        return len(self.scores)


def fix_phases(u, vh):
    """Rotate each singular pair so the largest-magnitude entry of ``u`` is real positive.

    ``u`` is ``m x k`` and ``vh`` is ``k x n``; both are modified in place.
    Ties in magnitude go to the smallest row index.
    """
    rows = np.argmax(np.abs(u), axis=0)
    lead = u[rows, np.arange(u.shape[1])]
    mag = np.abs(lead)
    phase = np.where(mag > 0, lead / np.where(mag > 0, mag, 1.0), 1.0)
    u *= np.conj(phase)[None, :]
    vh *= phase[:, None]
    return u, vh


LANCZOS_MIN_DIM = 128
ORTHO_TOL = 1e-10


def choose_svd_method(shape, rank):
    """``"lanczos"`` for large slices with a small target rank, else ``"lapack"``."""
    small = min(shape)
    if small >= LANCZOS_MIN_DIM and 3 * rank < small:
        return "lanczos"
    return "lapack"


def _slice_svd(mat, rank, real, method):
    a = mat.real if real else mat
    u = None
    if method == "lanczos" and rank < min(a.shape):
        try:
            # Fixed start vector keeps ARPACK deterministic.
            u, s, vh = svds(a, k=rank, v0=np.ones(min(a.shape), dtype=a.dtype), tol=0)
        except ArpackNoConvergence:
            u = None
        else:
            order = np.argsort(-s, kind="stable")
            u, s, vh = u[:, order], s[order], vh[order]
            # ARPACK can return non-orthogonal vectors for (numerically) zero singular values.
            eye = np.eye(rank)
            if (np.linalg.norm(u.conj().T @ u - eye) > ORTHO_TOL
                    or np.linalg.norm(vh @ vh.conj().T - eye) > ORTHO_TOL):
                u = None
    if u is None:
        u, s, vh = np.linalg.svd(a, full_matrices=False)
    u = np.array(u[:, :rank], dtype=np.complex128)
    vh = np.array(vh[:rank], dtype=np.complex128)
    fix_phases(u, vh)
    return u, s[:rank], vh


def spectral_svd(xh, rank, method="auto"):
    """Per-slice truncated SVD of a spectral tensor.

    Returns ``(U_hat, s, V_hat)`` stacks with shapes ``(I3, I1, R)``,
    ``(I3, R)`` and ``(I3, I2, R)`` such that slice ``i`` is approximated by
    ``U_hat[i] @ diag(s[i]) @ V_hat[i].conj().T``.
    """
    sl = xh.slices
    n3, n1, n2 = sl.shape
    real = xh.real_origin
    count = n_unique_slices(n3) if real else n3
    uh = np.empty((count, n1, rank), dtype=np.complex128)
    vhat = np.empty((count, n2, rank), dtype=np.complex128)
    sv = np.empty((count, rank))
    if method == "auto":
        method = choose_svd_method((n1, n2), rank)
    for i in range(count):
        # Slice 0 and, for even I3, the Nyquist slice are real for real input.
        real_slice = real and (i == 0 or 2 * i == n3)
        u, s, vh = _slice_svd(sl[i], rank, real_slice, method)
        uh[i] = u
        sv[i] = s
        vhat[i] = vh.conj().T
    if real:
        uh = mirror_slices(uh, n3)
        vhat = mirror_slices(vhat, n3)
        sv = np.concatenate([sv, sv[1:n3 - count + 1][::-1]], axis=0)
    return uh, sv, vhat


def truncated_tsvd(x, rank, method="auto"):
    """Leading ``rank`` singular lateral slices of ``x`` and the f-diagonal core.

    ``method`` picks the per-slice solver: ``"lapack"`` computes a full thin
    SVD and truncates, ``"lanczos"`` runs ARPACK for just the leading
    ``rank`` triplets so the cost grows with the rank.  ``"auto"`` uses
    Lanczos for slices at least 128 wide when ``3 * rank`` is below the
    smaller slice dimension.
    """
    x = as_tensor3(x)
    n1, n2, n3 = x.shape
    if not 1 <= rank <= min(n1, n2):
        raise RankError(f"rank must lie in [1, {min(n1, n2)}], got {rank}")
    xh = fft_mode3(x)
    uh, sv, vhat = spectral_svd(xh, rank, method)
    sh = np.zeros((n3, rank, rank), dtype=np.complex128)
    idx = np.arange(rank)
    sh[:, idx, idx] = sv
    real = xh.real_origin
    return TSvdFactors(
        U=ifft_mode3(SpectralTensor(uh, real)),
        S=ifft_mode3(SpectralTensor(sh, real)),
        V=ifft_mode3(SpectralTensor(vhat, real)),
        rank=rank,
    )


def spectral_singular_values(x):
    """All singular values of every spectral slice, shape ``(I3, min(I1, I2))``."""
    xh = fft_mode3(x)
    n3 = xh.slices.shape[0]
    if not xh.real_origin:
        return np.linalg.svd(xh.slices, compute_uv=False)
    h = n_unique_slices(n3)
    half = np.linalg.svd(xh.slices[:h], compute_uv=False)
    return np.concatenate([half, half[1:n3 - h + 1][::-1]], axis=0)


def tail_energy(sigma, rank):
    """``sum_i sum_{t > rank} sigma_t^i ** 2`` for a ``(I3, k)`` singular-value stack."""
    return float(np.sum(np.asarray(sigma)[:, rank:] ** 2))


def tubal_leverage(basis):
    """Squared Frobenius norms of the horizontal slices of an orthogonal basis."""
    basis = as_tensor3(basis)
    scores = np.einsum("irk,irk->i", basis, basis)
    return LeverageScores(scores=scores, rank=basis.shape[1])
