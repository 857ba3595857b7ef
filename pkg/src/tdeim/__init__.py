"""Tubal (t-product) tensor algebra and tubal DEIM slice selection for CUR approximation."""
from .cur import (
    BoundReport,
    CurModel,
    ErrorConstants,
    InterpolatoryProjector,
    assemble_cur,
    build_projector,
    cur_error,
    cur_middle_intersection,
    cur_middle_optimal,
    error_constants,
    verify_bound,
)
from .datasets import (
    FunctionSpec,
    function_matrix,
    gen_function_tensor,
    gen_synthetic,
    read_tensor,
    reshape_mat_to_tensor,
    write_tensor,
)
from .errors import (
    DegeneracyError,
    FormatError,
    IndexSetError,
    NonFiniteError,
    RankError,
    SamplingError,
    SingularSliceError,
    SymmetryError,
    TdeimError,
    TensorShapeError,
)
from .samplers import (
    IndexSet,
    SamplerConfig,
    deim_matrix,
    htdeim,
    leverage_sample,
    select,
    tdeim,
    tdeim_residuals,
    top_leverage,
    uniform_sample,
)
from .tensor import (
    SpectralTensor,
    fft_mode3,
    fro_norm,
    fro_norm_fourier,
    identity_tensor,
    ifft_mode3,
    slice_horizontal,
    slice_lateral,
    tinverse,
    tpinv,
    tproduct,
    tproduct_oracle,
    ttranspose,
)
from .tsvd import LeverageScores, TSvdFactors, spectral_singular_values, truncated_tsvd, tubal_leverage

__version__ = "0.1.0"
