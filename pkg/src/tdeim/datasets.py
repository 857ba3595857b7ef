"""Test tensors and the T3D1 tensor file format.

T3D1 layout: the ASCII magic ``T3D1``, three little-endian uint64 dims
``(I1, I2, I3)``, then ``I1*I2*I3`` little-endian float64 values in
column-major order.
"""
from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .errors import FormatError, NonFiniteError, TensorShapeError
from .tensor import as_tensor3

MAGIC = b"T3D1"
_HEADER = np.dtype([("magic", "S4"), ("dims", "<u8", (3,))])


def gen_synthetic(p, dims):
    """Tensor with entries ``(i**p + j**p + k**p) ** (-1/p)`` over 1-based indices."""
    if not p > 0:
        raise ValueError(f"p must be positive, got {p}")
    n1, n2, n3 = dims
    i = np.arange(1, n1 + 1, dtype=np.float64)[:, None, None]
    j = np.arange(1, n2 + 1, dtype=np.float64)[None, :, None]
    k = np.arange(1, n3 + 1, dtype=np.float64)[None, None, :]
    return (i**p + j**p + k**p) ** (-1.0 / p)


def exponential(x, y):
    return -np.exp(-0.5 * (x**2 + y**2))


def rastrigin(x, y):
    return 20 + x**2 + y**2 - 10 * (np.cos(2 * np.pi * x) + np.cos(2 * np.pi * y))


def booth(x, y):
    return (x + 2 * y - 7) ** 2 + (2 * x + y - 5) ** 2


def booth_literal(x, y):
    """Booth variant with the second term left unsquared."""
    return (x + 2 * y - 7) ** 2 + (2 * x + y - 5)


def matyas(x, y):
    return 0.26 * (x**2 + y**2) - 0.48 * x * y


def easom(x, y):
    return -np.cos(x) * np.cos(y) * np.exp(-((x - np.pi) ** 2 + (y - np.pi) ** 2))


FUNCTIONS = {
    "exponential": exponential,
    "rastrigin": rastrigin,
    "booth": booth,
    "matyas": matyas,
    "easom": easom,
}


GRID_MODES = ("integer", "linspace")


@dataclass(frozen=True)
class FunctionSpec:
    """A test function sampled on a ``grid x grid`` mesh and folded into a tensor.

    ``grid_mode="integer"`` samples ``x = 1, 2, ..., grid`` (unit spacing,
    the upper end of ``domain``); ``"linspace"`` samples ``grid`` evenly
    spaced points covering ``domain`` including both ends.
    """

    name: str
    domain: tuple = (0.0, 1000.0)
    grid: int = 1000
    tensor_shape: tuple = (100, 100, 100)
    booth_literal: bool = False
    grid_mode: str = "integer"

    def __post_init__(self):
        if self.name not in FUNCTIONS:
            raise ValueError(f"unknown function {self.name!r}; choose from {', '.join(FUNCTIONS)}")
        if self.grid_mode not in GRID_MODES:
            raise ValueError(f"grid_mode must be one of {', '.join(GRID_MODES)}, got {self.grid_mode!r}")
        if int(np.prod(self.tensor_shape)) != self.grid**2:
            raise TensorShapeError(f"a {self.grid}x{self.grid} grid cannot fill {self.tensor_shape}")

    @property
    def func(self):
        if self.name == "booth" and self.booth_literal:
            return booth_literal
        return FUNCTIONS[self.name]


def grid_points(spec):
    lo, hi = spec.domain
    if spec.grid_mode == "linspace":
        return np.linspace(lo, hi, spec.grid)
    return np.arange(hi - spec.grid + 1, hi + 1, dtype=np.float64)


def function_matrix(spec):
    """Evaluate ``spec.func`` on the sample grid; rows follow ``x``, columns ``y``."""
    pts = grid_points(spec)
    return spec.func(pts[:, None], pts[None, :])


def gen_function_tensor(spec):
    """``grid x grid`` function samples folded column-major into ``spec.tensor_shape``."""
    if isinstance(spec, str):
        spec = FunctionSpec(spec)
    return reshape_mat_to_tensor(function_matrix(spec), spec.tensor_shape)


def reshape_mat_to_tensor(m, dims):
    """Column-major relabeling of a matrix as an ``I1 x I2 x I3`` tensor."""
    m = np.asarray(m, dtype=np.float64)
    if m.size != int(np.prod(dims)):
        raise TensorShapeError(f"cannot reshape {m.shape} into {tuple(dims)}")
    return np.reshape(m, tuple(dims), order="F")


def reshape_tensor_to_mat(x, shape):
    x = np.asarray(x, dtype=np.float64)
    if x.size != int(np.prod(shape)):
        raise TensorShapeError(f"cannot reshape {x.shape} into {tuple(shape)}")
    return np.reshape(x, tuple(shape), order="F")


def write_tensor(path, x):
    x = as_tensor3(x)
    if np.iscomplexobj(x):
        raise FormatError("T3D1 stores real tensors only")
    if not np.all(np.isfinite(x)):
        raise NonFiniteError("refusing to write a tensor with NaN or Inf entries")
    header = np.zeros((), dtype=_HEADER)
    header["magic"] = MAGIC
    header["dims"] = x.shape
    with open(path, "wb") as fh:
        fh.write(header.tobytes())
        fh.write(np.asarray(x, dtype="<f8").tobytes(order="F"))


def read_tensor(path):
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _HEADER.itemsize:
        raise FormatError(f"{os.fspath(path)}: file too short for a T3D1 header")
    header = np.frombuffer(raw, dtype=_HEADER, count=1)[0]
    if header["magic"] != MAGIC:
        raise FormatError(f"{os.fspath(path)}: bad magic {bytes(raw[:4])!r}, expected {MAGIC!r}")
    dims = tuple(int(d) for d in header["dims"])
    if any(d < 1 for d in dims):
        raise FormatError(f"{os.fspath(path)}: invalid dims {dims}")
    count = dims[0] * dims[1] * dims[2]
    payload = len(raw) - _HEADER.itemsize
    if payload != 8 * count:
        raise FormatError(
            f"{os.fspath(path)}: payload has {payload} bytes, dims {dims} need {8 * count}"
        )
    data = np.frombuffer(raw, dtype="<f8", offset=_HEADER.itemsize)
    if not np.all(np.isfinite(data)):
        raise NonFiniteError(f"{os.fspath(path)}: payload contains NaN or Inf")
    return np.array(data.reshape(dims, order="F"), dtype=np.float64)
