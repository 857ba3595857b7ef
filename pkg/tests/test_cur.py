import numpy as np
import pytest

from conftest import random_basis, random_low_rank
from tdeim.cur import (
    CurModel,
    InterpolatoryProjector,
    assemble_cur,
    cur_error,
    cur_middle_intersection,
    error_constants,
    verify_bound,
)
from tdeim.datasets import gen_synthetic
from tdeim.errors import DegeneracyError, TensorShapeError
from tdeim.samplers import SamplerConfig, select, tdeim
from tdeim.tensor import (
    fro_norm,
    identity_tensor,
    slice_horizontal,
    slice_lateral,
    tinverse,
    tproduct,
    tproduct_oracle,
)
from tdeim.tsvd import truncated_tsvd

SAMPLERS = ["tdeim", "top_leverage", "leverage_sampling", "uniform"]


def test_projector_identity_basis(rng):
    u = identity_tensor(5, 3)[:, :2]
    proj = InterpolatoryProjector(u, [0, 1])
    g = rng.standard_normal((5, 4, 3))
    out = proj(g)
    # Exact up to the rounding of one FFT round trip.
    assert np.abs(out[[0, 1]] - g[[0, 1]]).max() < 1e-14
    assert np.abs(out[2:]).max() < 1e-14


def test_projector_matches_oracle_composition(rng):
    u = random_basis(rng, 8, 3, 4)
    s = list(tdeim(u).indices)
    g = rng.standard_normal((8, 5, 4))
    # U * inv(S^T U) * S^T G through the block-circulant product.
    ref = tproduct_oracle(u, tproduct_oracle(tinverse(u[s]), g[s]))
    out = InterpolatoryProjector(u, s).apply(g)
    assert np.abs(out - ref).max() < 1e-10
    assert np.abs(out[s] - g[s]).max() < 1e-10
    p = InterpolatoryProjector(u, s).as_tensor()
    assert np.abs(tproduct(p, p) - p).max() < 1e-10


def test_projector_errors(rng):
    u = np.zeros((3, 1, 2))
    u[0, 0] = [1.0, 1.0]
    u[1, 0] = [1.0, -1.0]
    with pytest.raises(DegeneracyError) as err:
        InterpolatoryProjector(u, [0])
    assert err.value.slice_index == 2
    with pytest.raises(TensorShapeError):
        InterpolatoryProjector(u, [0, 1])


@pytest.mark.parametrize("middle", ["optimal", "intersection"])
def test_exact_recovery(rng, middle):
    x = random_low_rank(rng, (12, 10, 4), 3)
    f = truncated_tsvd(x, 3)
    p, q = tdeim(f.U), tdeim(f.V)
    model = assemble_cur(x, p, q, middle)
    assert cur_error(x, model) <= 1e-6 * fro_norm(x)
    assert model.c.shape == (12, 3, 4) and model.r.shape == (3, 10, 4)


def test_identity_matrix_case():
    x = np.eye(3)[:, :, None]
    model = assemble_cur(x, [0, 1, 2], [0, 1, 2])
    assert np.allclose(model.u_mid[:, :, 0], np.eye(3))


def test_optimal_middle_definition(rng):
    from tdeim.tensor import tpinv

    x = rng.standard_normal((9, 7, 5))
    model = assemble_cur(x, [0, 2, 4], [1, 3, 5])
    ref = tproduct(tproduct(tpinv(model.c), x), tpinv(model.r))
    assert np.allclose(model.u_mid, ref, atol=1e-12)
    assert np.allclose(model.reconstruct(), model.reconstruct(factored=True), atol=1e-12)


def test_factored_error_on_ill_conditioned_selection():
    # A smooth tensor makes uniform C and R nearly rank deficient in many slices.
    x = gen_synthetic(3, (40, 50, 40))
    f = truncated_tsvd(x, 12)
    p, q = select(SamplerConfig("uniform", 12, seed=3), f.U, f.V)
    model = assemble_cur(x, p, q)
    assert cur_error(x, model, factored=True) <= fro_norm(x)
    assert cur_error(x, model, factored=True) <= cur_error(x, model) * (1 + 1e-6)


def test_intersection_interpolates(rng):
    x = rng.standard_normal((10, 8, 4))
    full = assemble_cur(x, range(10), range(8), "intersection")
    assert fro_norm(x - full.reconstruct()) <= 1e-8 * fro_norm(x)
    f = truncated_tsvd(x, 4)
    p, q = tdeim(f.U), tdeim(f.V)
    w = x - assemble_cur(x, p, q, "intersection").reconstruct()
    tol = 1e-8 * fro_norm(x)
    assert np.abs(w[list(p)]).max() <= tol
    assert np.abs(w[:, list(q)]).max() <= tol


def test_intersection_warning(rng):
    x = random_low_rank(rng, (8, 8, 3), 2)
    model = assemble_cur(x, [0, 1, 2], [0, 1, 2], "intersection")
    assert model.warnings and "nearly singular" in model.warnings[0]
    assert cur_middle_intersection(x, [0, 1, 2], [0, 1, 2]).shape == (3, 3, 3)
    with pytest.raises(ValueError):
        assemble_cur(x, [0], [0], "skeleton")


def test_cur_error_zero_middle(rng):
    x = rng.standard_normal((4, 3, 2))
    c, r = slice_lateral(x, [0]), slice_horizontal(x, [1])
    model = CurModel(c=c, u_mid=np.zeros((1, 1, 2)), r=r, p=(1,), q=(0,))
    assert cur_error(x, model) == pytest.approx(fro_norm(x))


def test_error_constants_identity():
    u = identity_tensor(4, 3)[:, :2]
    consts = error_constants(u, [0, 1], u, [0, 1])
    assert consts.eta_p == pytest.approx(1 / 3) and consts.eta_q == pytest.approx(1 / 3)


def test_error_constants_matrix_case(rng):
    q, _ = np.linalg.qr(rng.standard_normal((7, 3)))
    p = [0, 3, 5]
    ref = np.linalg.norm(np.linalg.inv(q[p]), 2) ** 2
    consts = error_constants(q[:, :, None], p, q[:, :, None], p)
    assert consts.eta_p == pytest.approx(ref, rel=1e-12)


def test_error_constants_singular():
    u = np.zeros((3, 1, 2))
    u[0, 0] = [1.0, 1.0]
    u[1, 0] = [1.0, -1.0]
    with pytest.raises(DegeneracyError):
        error_constants(u, [0], u, [1])
    loose = error_constants(u, [0], u, [1], strict=False)
    assert np.isinf(loose.eta_p) and np.isinf(loose.eta_q)


def test_error_constants_finite_on_synthetic():
    x = gen_synthetic(3, (30, 40, 30))
    for r in range(1, 16):
        f = truncated_tsvd(x, r)
        c = error_constants(f.U, tdeim(f.U), f.V, tdeim(f.V))
        # Orthonormal spectral slices give ||inv(U_hat_i[p])|| >= 1.
        assert 1 / 30 - 1e-12 <= c.eta_p < np.inf and 1 / 30 - 1e-12 <= c.eta_q < np.inf


def test_bound_exact_rank(rng):
    x = random_low_rank(rng, (9, 8, 3), 2)
    f = truncated_tsvd(x, 2)
    p, q = tdeim(f.U), tdeim(f.V)
    rep = verify_bound(x, assemble_cur(x, p, q), error_constants(f.U, p, f.V, q), basis_u=f.U)
    assert rep.lhs < 1e-20 and rep.passed and rep.projector_passed


@pytest.mark.parametrize("method", SAMPLERS)
def test_bound_holds_for_samplers(rng, method):
    for shape, r in (((10, 8, 4), 3), ((12, 10, 5), 4)):
        x = rng.standard_normal(shape)
        f = truncated_tsvd(x, r)
        p, q = select(SamplerConfig(method, r, seed=5), f.U, f.V)
        rep = verify_bound(x, assemble_cur(x, p, q), error_constants(f.U, p, f.V, q), basis_u=f.U)
        assert rep.passed and rep.projector_passed, rep
