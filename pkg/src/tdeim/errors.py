"""Exception hierarchy shared by all tdeim modules."""


class TdeimError(Exception):
    """Base class for library errors."""


class TensorShapeError(TdeimError, ValueError):
    """Operands have incompatible or invalid dimensions."""


class SymmetryError(TdeimError, ValueError):
    """A spectral tensor claimed conjugate symmetry but did not invert to a real tensor."""


class SingularSliceError(TdeimError, ValueError):
    """A Fourier-domain frontal slice is numerically singular.

    ``slice_index`` is 1-based to match how slices are reported to users.
    """

    def __init__(self, message, slice_index=None):
        super().__init__(message)
        self.slice_index = slice_index


class DegeneracyError(TdeimError, ValueError):
    """An index-selection step hit a singular interpolation submatrix.

    ``step`` is the 1-based sampler iteration where it happened.
    """

    def __init__(self, message, step=None, slice_index=None):
        super().__init__(message)
        self.step = step
        self.slice_index = slice_index


class IndexSetError(TdeimError, IndexError):
    """Slice indices are out of range or repeated."""


class RankError(TdeimError, ValueError):
    """Requested rank is outside the admissible range."""


class SamplingError(TdeimError, ValueError):
    """Not enough positive-probability indices to draw from."""


class FormatError(TdeimError, ValueError):
    """A tensor file is malformed."""


class NonFiniteError(FormatError):
    """A tensor payload contains NaN or Inf."""
