"""Third-order tensors and the t-product algebra.

A tensor is a plain ``float64`` ndarray of shape ``(I1, I2, I3)``.  The
frontal slices live on the last axis, so ``x[:, :, k]`` is frontal slice
``k`` and ``x[i, j, :]`` is a tube.  Element ``(i, j, k)`` sits at linear
position ``i + j*I1 + k*I1*I2`` of the column-major buffer, which is what the
file format and the matrix reshape use.

All products are evaluated in the Fourier domain along mode 3 with the
unnormalized forward DFT.  For real operands only the first
``I3 // 2 + 1`` spectral slices are computed; the rest are filled in as
complex conjugates.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import IndexSetError, SingularSliceError, SymmetryError, TensorShapeError

EPS = np.finfo(np.float64).eps
IMAG_RESIDUE_TOL = 1e-8


def as_tensor3(x, name="tensor"):
    """Return ``x`` as a real float64 array of order 3, raising on anything else."""
    arr = np.asarray(x)
    if arr.ndim != 3:
        raise TensorShapeError(f"{name} must be third order, got shape {arr.shape}")
    if any(d < 1 for d in arr.shape):
        raise TensorShapeError(f"{name} has an empty mode: {arr.shape}")
    if np.iscomplexobj(arr):
        return arr.astype(np.complex128, copy=False)
    return arr.astype(np.float64, copy=False)


def n_unique_slices(n3):
    """Number of spectral slices that determine a real tensor, ceil((I3+1)/2)."""
    return n3 // 2 + 1


def mirror_slices(half, n3):
    """Complete a stack of leading spectral slices by conjugate symmetry.

    ``half`` has shape ``(h, m, n)`` with ``h = n_unique_slices(n3)``.  Slice
    ``i`` (0-based, ``i >= h``) becomes ``conj(half[n3 - i])``.  Slice 0 and,
    for even ``n3``, slice ``n3 // 2`` are self-conjugate, so their imaginary
    rounding noise is dropped.
    """
    h = n_unique_slices(n3)
    if half.shape[0] != h:
        raise TensorShapeError(f"expected {h} leading slices, got {half.shape[0]}")
    full = np.empty((n3,) + half.shape[1:], dtype=np.complex128)
    full[:h] = half
    full[0].imag = 0.0
    if n3 % 2 == 0:
        full[n3 // 2].imag = 0.0
    for i in range(h, n3):
        full[i] = np.conj(half[n3 - i])
    return full


@dataclass(frozen=True)
class SpectralTensor:
    """Mode-3 DFT of a tensor, stored slice-first as ``(I3, I1, I2)``."""

    slices: np.ndarray
    real_origin: bool = True

    @property
    def dims(self):
        n3, n1, n2 = self.slices.shape
        return (n1, n2, n3)

    def __getitem__(self, i):
        return self.slices[i]

    def is_conjugate_symmetric(self, rtol=1e-12):
        sl = self.slices
        n3 = sl.shape[0]
        scale = max(np.linalg.norm(sl), 1.0)
        if np.linalg.norm(sl[0].imag) > rtol * scale:
            return False
        for i in range(1, n3):
            if np.linalg.norm(sl[i] - np.conj(sl[n3 - i])) > rtol * scale:
                return False
        return True


def fft_mode3(x):
    """Unnormalized DFT of every tube."""
    x = as_tensor3(x)
    slices = np.moveaxis(np.fft.fft(x, axis=2), 2, 0)
    return SpectralTensor(np.ascontiguousarray(slices), real_origin=not np.iscomplexobj(x))


def ifft_mode3(xh):
    """Inverse of :func:`fft_mode3`, scaled by ``1/I3``.

    When ``xh.real_origin`` is set the result is real; an imaginary part larger
    than ``1e-8`` relative to the result raises :class:`SymmetryError`.
    """
    if not isinstance(xh, SpectralTensor):
        xh = SpectralTensor(np.asarray(xh, dtype=np.complex128), real_origin=True)
    out = np.moveaxis(np.fft.ifft(xh.slices, axis=0), 0, 2)
    if not xh.real_origin:
        return out
    imag = np.linalg.norm(out.imag)
    total = np.linalg.norm(out)
    if imag > IMAG_RESIDUE_TOL * max(total, np.finfo(float).tiny):
        raise SymmetryError(
            f"imaginary residue {imag:.3e} (relative {imag / total:.3e}) after inverse DFT; "
            "spectral slices are not conjugate symmetric"
        )
    return np.ascontiguousarray(out.real)


def slicewise(func, *operands, real_origin=True):
    """Apply ``func`` to matching spectral slices and return the full stack.

    ``operands`` are ``(I3, m, n)`` complex arrays.  With ``real_origin`` only
    the leading ``I3 // 2 + 1`` slices are evaluated and the rest mirrored.
    ``func`` receives one batch of slices per operand and must be batched
    over the leading axis.
    """
    n3 = operands[0].shape[0]
    if not real_origin:
        return np.asarray(func(*operands), dtype=np.complex128)
    h = n_unique_slices(n3)
    half = np.asarray(func(*(op[:h] for op in operands)), dtype=np.complex128)
    return mirror_slices(half, n3)


def _check_product_shapes(x, y):
    if x.shape[1] != y.shape[0]:
        raise TensorShapeError(f"inner modes differ: {x.shape} * {y.shape}")
    if x.shape[2] != y.shape[2]:
        raise TensorShapeError(f"third modes differ: {x.shape} * {y.shape}")


def tproduct(x, y, fast=True):
    """t-product ``x * y`` of an ``I1 x I2 x I3`` and an ``I2 x I4 x I3`` tensor.

    With ``fast`` (the default) and real operands the conjugate-symmetry
    shortcut is used; ``fast=False`` multiplies every spectral slice.
    """
    x = as_tensor3(x, "x")
    y = as_tensor3(y, "y")
    _check_product_shapes(x, y)
    xh = fft_mode3(x)
    yh = fft_mode3(y)
    real = xh.real_origin and yh.real_origin
    ch = slicewise(np.matmul, xh.slices, yh.slices, real_origin=real and fast)
    out = ifft_mode3(SpectralTensor(ch, real_origin=real))
    return out


def circ(x):
    """Block-circulant matrix of size ``I1*I3 x I2*I3`` built from the frontal slices."""
    x = as_tensor3(x)
    n1, n2, n3 = x.shape
    out = np.zeros((n1 * n3, n2 * n3), dtype=x.dtype)
    for r in range(n3):
        for c in range(n3):
            out[r * n1:(r + 1) * n1, c * n2:(c + 1) * n2] = x[:, :, (r - c) % n3]
    return out


def unfold(x):
    """Stack the frontal slices vertically."""
    x = as_tensor3(x)
    n1, n2, n3 = x.shape
    return np.concatenate([x[:, :, k] for k in range(n3)], axis=0)


def fold(mat, shape):
    n1, n2, n3 = shape
    return np.stack([mat[k * n1:(k + 1) * n1] for k in range(n3)], axis=2)


def tproduct_oracle(x, y):
    """Reference t-product ``fold(circ(x) @ unfold(y))``; quadratic in I3, for testing."""
    x = as_tensor3(x, "x")
    y = as_tensor3(y, "y")
    _check_product_shapes(x, y)
    return fold(circ(x) @ unfold(y), (x.shape[0], y.shape[1], x.shape[2]))


def ttranspose(x):
    """Tensor transpose: transpose each frontal slice and reverse slices 2..I3."""
    x = as_tensor3(x)
    order = [0] + list(range(x.shape[2] - 1, 0, -1))
    return np.ascontiguousarray(np.transpose(x[:, :, order], (1, 0, 2)))


def identity_tensor(n, n3):
    if n < 1 or n3 < 1:
        raise TensorShapeError(f"identity tensor needs positive sizes, got n={n}, I3={n3}")
    out = np.zeros((n, n, n3))
    out[:, :, 0] = np.eye(n)
    return out


def tinverse(x):
    """Tensor inverse computed by inverting each spectral slice.

    Raises :class:`SingularSliceError` if a slice has condition number at or
    above ``1/(eps*n)``.
    """
    x = as_tensor3(x)
    n1, n2, n3 = x.shape
    if n1 != n2:
        raise TensorShapeError(f"inverse needs square frontal slices, got {x.shape}")
    xh = fft_mode3(x)
    h = n_unique_slices(n3) if xh.real_origin else n3
    limit = 1.0 / (EPS * n1)
    for i in range(h):
        cond = np.linalg.cond(xh.slices[i])
        if not np.isfinite(cond) or cond >= limit:
            raise SingularSliceError(
                f"spectral slice {i + 1} is singular (condition number {cond:.3e})",
                slice_index=i + 1,
            )
    inv = slicewise(np.linalg.inv, xh.slices, real_origin=xh.real_origin)
    return ifft_mode3(SpectralTensor(inv, real_origin=xh.real_origin))


def truncated_svd_slices(slices, real_origin=True, tol=None):
    """Thin SVD of the distinct spectral slices with negligible singular values flagged.

    Returns ``(u, s, vh, keep)`` for the leading ``I3 // 2 + 1`` slices when
    ``real_origin`` is set, otherwise for all of them.  ``keep`` marks
    singular values above ``tol``, which defaults to
    ``max(I1, I2) * eps * sigma_max`` with ``sigma_max`` the largest singular
    value over all slices, i.e. the spectral norm of ``circ(X)``.
    """
    n3, m, n = slices.shape
    work = slices[: n_unique_slices(n3)] if real_origin else slices
    u, s, vh = np.linalg.svd(work, full_matrices=False)
    if tol is None:
        smax = s.max() if s.size else 0.0
        tol = max(m, n) * EPS * smax
    return u, s, vh, s > tol


def pinv_slices(slices, real_origin=True, tol=None):
    """Pseudoinverse of every spectral slice, truncated as in :func:`truncated_svd_slices`."""
    n3 = slices.shape[0]
    u, s, vh, keep = truncated_svd_slices(slices, real_origin, tol)
    s_inv = np.where(keep, 1.0 / np.where(keep, s, 1.0), 0.0)
    out = np.conj(np.swapaxes(vh, 1, 2)) * s_inv[:, None, :] @ np.conj(np.swapaxes(u, 1, 2))
    if real_origin:
        out = mirror_slices(out, n3)
    return out


def tpinv(x, tol=None):
    """Moore-Penrose pseudoinverse under the t-product, ``I2 x I1 x I3``."""
    x = as_tensor3(x)
    xh = fft_mode3(x)
    ph = pinv_slices(xh.slices, real_origin=xh.real_origin, tol=tol)
    return ifft_mode3(SpectralTensor(ph, real_origin=xh.real_origin))


def fro_norm(x):
    return float(np.linalg.norm(np.asarray(x).ravel()))


def fro_norm_fourier(x):
    """Frobenius norm evaluated as ``sqrt(sum_i ||X_hat_i||_F^2 / I3)``."""
    xh = fft_mode3(x)
    n3 = xh.slices.shape[0]
    return float(np.sqrt(np.sum(np.abs(xh.slices) ** 2) / n3))


def check_indices(indices, bound, what="index"):
    """Validate 0-based slice indices and return them as an integer array."""
    idx = np.asarray(list(indices), dtype=np.int64).ravel()
    if idx.size and (idx.min() < 0 or idx.max() >= bound):
        raise IndexSetError(f"{what} out of range [0, {bound}): {idx.tolist()}")
    if np.unique(idx).size != idx.size:
        raise IndexSetError(f"duplicate {what}: {idx.tolist()}")
    return idx


def slice_horizontal(x, s):
    """Horizontal slices ``x[s, :, :]``."""
    x = as_tensor3(x)
    return x[check_indices(s, x.shape[0], "horizontal index")]


def slice_lateral(x, q):
    """Lateral slices ``x[:, q, :]``."""
    x = as_tensor3(x)
    return x[:, check_indices(q, x.shape[1], "lateral index")]


def selection_tensor(n, indices, n3):
    """Lateral slices of the identity tensor picked by ``indices``, ``n x |s| x I3``."""
    idx = check_indices(indices, n, "selection index")
    return identity_tensor(n, n3)[:, idx, :]
