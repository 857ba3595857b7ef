"""Tubal CUR assembly, interpolatory projectors and error-bound checks."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegeneracyError, TensorShapeError
from .tensor import (
    EPS,
    SpectralTensor,
    as_tensor3,
    check_indices,
    fft_mode3,
    fro_norm,
    ifft_mode3,
    mirror_slices,
    n_unique_slices,
    slice_horizontal,
    slice_lateral,
    slicewise,
    tpinv,
    tproduct,
    truncated_svd_slices,
)
from .tsvd import spectral_singular_values, tail_energy

MIDDLE_VARIANTS = ("optimal", "intersection")
NEAR_SINGULAR = 1e-12
EXPLICIT_INVERSE_MAX_RANK = 64


@dataclass
class CurModel:
    c: np.ndarray
    u_mid: np.ndarray
    r: np.ndarray
    p: tuple
    q: tuple
    middle_variant: str = "optimal"
    warnings: list = field(default_factory=list)
    spectral_factors: tuple | None = field(default=None, repr=False)

    def reconstruct(self, factored=False):
        """``C * U * R`` as an explicit t-product of the stored factors.

        With ``factored`` the optimal variant is evaluated as ``Q_C W Q_R^H``
        per spectral slice instead (see :func:`_optimal_parts`).  Both equal
        ``C * U * R`` in exact arithmetic, but when ``C`` or ``R`` is ill
        conditioned the explicit product carries the rounding that a user
        multiplying the three factors would see, while the factored form
        gives the error of the underlying projection.
        """
        if not factored or self.spectral_factors is None:
            return tproduct(tproduct(self.c, self.u_mid), self.r)
        qc, core, qr = self.spectral_factors
        real = not np.iscomplexobj(self.c) and not np.iscomplexobj(self.r)
        out = slicewise(lambda a, w, b: a @ w @ np.conj(np.swapaxes(b, 1, 2)), qc, core, qr, real_origin=real)
        return ifft_mode3(SpectralTensor(out, real_origin=real))


@dataclass(frozen=True)
class ErrorConstants:
    eta_p: float
    eta_q: float


@dataclass(frozen=True)
class BoundReport:
    lhs: float
    rhs: float
    passed: bool
    eta_p: float
    eta_q: float
    tail: float
    projector_lhs: float | None = None
    projector_rhs: float | None = None
    projector_passed: bool | None = None
    warnings: tuple = ()


class InterpolatoryProjector:
    """Oblique projector ``U * (S^T * U)^-1 * S^T`` onto the range of ``U``.

    ``S`` selects the horizontal slices in ``indices``.  Applying it to ``G``
    reproduces ``G[indices]`` exactly on those slices.
    """

    def __init__(self, basis, indices):
        basis = as_tensor3(basis, "basis")
        n1, r, n3 = basis.shape
        idx = check_indices(indices, n1)
        if idx.size != r:
            raise TensorShapeError(f"need {r} indices for a rank-{r} basis, got {idx.size}")
        self.basis = basis
        self.indices = idx
        self.n3 = n3
        self.real = not np.iscomplexobj(basis)
        self._uh = fft_mode3(basis).slices
        sub = self._uh[:, idx, :]
        count = n_unique_slices(n3) if self.real else n3
        limit = 1.0 / (EPS * max(r, 1))
        for i in range(count):
            cond = np.linalg.cond(sub[i])
            if not np.isfinite(cond) or cond >= limit:
                raise DegeneracyError(
                    f"U(s, :, :) is singular in spectral slice {i + 1}", slice_index=i + 1
                )
        self._inv = slicewise(np.linalg.inv, sub, real_origin=self.real)

    def apply(self, g):
        g = as_tensor3(g, "g")
        if g.shape[0] != self.basis.shape[0] or g.shape[2] != self.n3:
            raise TensorShapeError(f"projector for {self.basis.shape} cannot act on {g.shape}")
        gh = fft_mode3(g[self.indices]).slices
        real = self.real and not np.iscomplexobj(g)
        out = slicewise(lambda u, w, x: u @ (w @ x), self._uh, self._inv, gh, real_origin=real)
        return ifft_mode3(SpectralTensor(out, real_origin=real))

    __call__ = apply

    def as_tensor(self):
        """The projector itself as an ``I1 x I1 x I3`` tensor."""
        n1 = self.basis.shape[0]
        eye = np.zeros((n1, n1, self.n3))
        eye[:, :, 0] = np.eye(n1)
        return self.apply(eye)


def build_projector(basis, indices):
    return InterpolatoryProjector(basis, indices)


def cur_middle_optimal(x, c, r):
    """``pinv(C) * X * pinv(R)``."""
    return _optimal_parts(x, c, r)[0]


def _optimal_parts(x, c, r):
    """Optimal middle tensor plus the spectral factors ``(Q_C, W, Q_R)`` of ``C * U * R``.

    Per spectral slice, with thin SVDs ``C = Uc Sc Vc^H`` and ``R = Ur Sr Vr^H``
    truncated as in :func:`tpinv`, ``Q_C`` is ``Uc`` and ``Q_R`` is ``Vr`` with
    the dropped columns zeroed and ``W = Q_C^H X Q_R``.  Then
    ``U = Vc Sc^-1 W Sr^-1 Ur^H``.
    """
    x, c, r = as_tensor3(x), as_tensor3(c, "c"), as_tensor3(r, "r")
    real = not (np.iscomplexobj(x) or np.iscomplexobj(c) or np.iscomplexobj(r))
    n3 = x.shape[2]
    xh = fft_mode3(x).slices
    xh = xh[: n_unique_slices(n3)] if real else xh
    uc, sc, vhc, kc = truncated_svd_slices(fft_mode3(c).slices, real)
    ur, sr, vhr, kr = truncated_svd_slices(fft_mode3(r).slices, real)
    qc = uc * kc[:, None, :]
    qr = np.conj(np.swapaxes(vhr, 1, 2)) * kr[:, None, :]
    core = np.conj(np.swapaxes(qc, 1, 2)) @ xh @ qr
    inv_c = np.where(kc, 1.0 / np.where(kc, sc, 1.0), 0.0)
    inv_r = np.where(kr, 1.0 / np.where(kr, sr, 1.0), 0.0)
    mid = (
        np.conj(np.swapaxes(vhc, 1, 2))
        @ (inv_c[:, :, None] * core * inv_r[:, None, :])
        @ np.conj(np.swapaxes(ur, 1, 2))
    )
    if real:
        mid, qc, core, qr = (mirror_slices(a, n3) for a in (mid, qc, core, qr))
    return ifft_mode3(SpectralTensor(mid, real_origin=real)), (qc, core, qr)


def _intersection_warning(w):
    wh = fft_mode3(w).slices
    s = np.linalg.svd(wh, compute_uv=False)
    smax = s.max() if s.size else 0.0
    if smax == 0.0:
        return "intersection tensor is zero"
    worst = s.min(axis=1)
    bad = np.flatnonzero(worst < NEAR_SINGULAR * smax)
    if bad.size:
        return (
            "intersection nearly singular in spectral slices "
            f"{', '.join(str(i + 1) for i in bad[:10])}; pseudoinverse truncation applied"
        )
    return None


def cur_middle_intersection(x, p, q):
    """``pinv(X[p][:, q])``, the interpolating middle tensor."""
    x = as_tensor3(x)
    w = slice_lateral(slice_horizontal(x, p), q)
    return tpinv(w)


def assemble_cur(x, p, q, middle="optimal"):
    """Build the tubal CUR model ``X[:, q] * U * X[p]``."""
    x = as_tensor3(x)
    if middle not in MIDDLE_VARIANTS:
        raise ValueError(f"unknown middle variant {middle!r}")
    c = slice_lateral(x, q)
    r = slice_horizontal(x, p)
    warnings = []
    factors = None
    if middle == "optimal":
        u_mid, factors = _optimal_parts(x, c, r)
    else:
        u_mid = cur_middle_intersection(x, p, q)
        msg = _intersection_warning(slice_lateral(r, q))
        if msg:
            warnings.append(msg)
    return CurModel(
        c=c,
        u_mid=u_mid,
        r=r,
        p=tuple(int(i) for i in p),
        q=tuple(int(i) for i in q),
        middle_variant=middle,
        warnings=warnings,
        spectral_factors=factors,
    )


def cur_error(x, model, factored=False):
    """Absolute Frobenius error ``||X - C * U * R||_F``; see :meth:`CurModel.reconstruct`."""
    x = as_tensor3(x)
    approx = model.reconstruct(factored)
    if approx.shape != x.shape:
        raise TensorShapeError(f"model reconstructs {approx.shape}, tensor is {x.shape}")
    return fro_norm(x - approx)


def _inverse_norm_sq(blocks):
    """``max_i ||inv(B_i)||_2^2`` over a stack of selected basis rows.

    Square blocks up to rank 64 are inverted explicitly; larger or
    rectangular blocks use ``1 / sigma_min``.  Returns ``inf`` for a
    singular block.
    """
    n3, k, r = blocks.shape
    worst = 0.0
    for i in range(n3):
        b = blocks[i]
        s = np.linalg.svd(b, compute_uv=False)
        if k < r or s[r - 1] <= EPS * max(k, r) * s[0]:
            return np.inf
        if k == r and r <= EXPLICIT_INVERSE_MAX_RANK:
            val = np.linalg.norm(np.linalg.inv(b), 2) ** 2
        else:
            val = 1.0 / s[r - 1] ** 2
        worst = max(worst, float(val))
    return worst


def error_constants(basis_u, p, basis_v, q, strict=True):
    """Error constants ``eta_p`` and ``eta_q`` of a horizontal/lateral selection.

    ``eta_p = max_i ||inv(U_hat_i[p, :])||_2^2 / I3`` and likewise for ``V``
    and ``q``.  The selection tensor's spectral slices are all the same real
    selection matrix, so ``S_hat_i^T U_hat_i`` is just a row gather.  With
    ``strict`` a singular block raises :class:`DegeneracyError`; otherwise the
    constant is reported as ``inf``.
    """
    basis_u = as_tensor3(basis_u, "basis_u")
    basis_v = as_tensor3(basis_v, "basis_v")
    n3 = basis_u.shape[2]
    pi = check_indices(p, basis_u.shape[0])
    qi = check_indices(q, basis_v.shape[0])
    uh = fft_mode3(basis_u).slices
    vh = fft_mode3(basis_v).slices
    count = n_unique_slices(n3)
    eta_p = _inverse_norm_sq(uh[:count, pi, :]) / n3
    eta_q = _inverse_norm_sq(vh[:count, qi, :]) / n3
    if strict and not (np.isfinite(eta_p) and np.isfinite(eta_q)):
        side = "horizontal" if not np.isfinite(eta_p) else "lateral"
        raise DegeneracyError(f"{side} selection gives a singular submatrix; error constant is infinite")
    return ErrorConstants(eta_p=eta_p, eta_q=eta_q)


def verify_bound(x, model, constants, rank=None, basis_u=None, sigma=None):
    """Evaluate both sides of the tubal CUR error bound.

    ``||X - C*U*R||_F^2 <= (eta_p + eta_q) * sum_i sum_{t>R} (sigma_t^i)^2``
    where ``sigma_t^i`` are the singular values of spectral slice ``i`` of
    ``X``.  When ``basis_u`` is given, the projector bound
    ``||X - P*X||_F^2 <= eta_p * tail`` is checked as well.  ``sigma`` may
    carry precomputed per-slice singular values.  Both checks allow a
    relative slack of ``1e-8`` plus an absolute rounding floor of
    ``(max(I1, I2, I3) * eps * ||X||_F) ** 2``, so exact-rank inputs where
    both sides are pure rounding still pass.
    """
    x = as_tensor3(x)
    rank = len(model.p) if rank is None else rank
    if sigma is None:
        sigma = spectral_singular_values(x)
    tail = tail_energy(sigma, rank)
    lhs = cur_error(x, model) ** 2
    rhs = (constants.eta_p + constants.eta_q) * tail
    floor = (max(x.shape) * EPS * fro_norm(x)) ** 2
    passed = bool(lhs <= rhs * (1 + 1e-8) + floor)
    proj = {}
    if basis_u is not None:
        proj_op = build_projector(as_tensor3(basis_u)[:, :rank], model.p[:rank])
        plhs = fro_norm(x - proj_op.apply(x)) ** 2
        prhs = constants.eta_p * tail
        proj = dict(projector_lhs=plhs, projector_rhs=prhs, projector_passed=bool(plhs <= prhs * (1 + 1e-8) + floor))
    return BoundReport(
        lhs=lhs,
        rhs=rhs,
        passed=passed,
        eta_p=constants.eta_p,
        eta_q=constants.eta_q,
        tail=tail,
        warnings=tuple(model.warnings),
        **proj,
    )
