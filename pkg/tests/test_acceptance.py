"""Acceptance criteria 1-10, one test each; every test records a pass/fail line."""
import time

import numpy as np

from conftest import random_basis, random_low_rank, record
from tdeim.cur import InterpolatoryProjector, assemble_cur, cur_error, error_constants, verify_bound
from tdeim.datasets import gen_function_tensor, gen_synthetic
from tdeim.experiments import BasisCache, run_approx
from tdeim.samplers import SamplerConfig, deim_matrix, htdeim, leverage_sample, select, tdeim
from tdeim.tensor import (
    fft_mode3,
    fro_norm,
    fro_norm_fourier,
    slice_horizontal,
    slice_lateral,
    tproduct,
    tproduct_oracle,
)
from tdeim.tsvd import spectral_singular_values, truncated_tsvd, tubal_leverage


def test_criterion_01_oracle_equivalence():
    rng = np.random.default_rng(1)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(50):
        n1, n2, n4, n3 = rng.integers(1, 7, size=4)
        x = rng.standard_normal((n1, n2, n3))
        y = rng.standard_normal((n2, n4, n3))
        ref = tproduct_oracle(x, y)
        worst = max(worst, fro_norm(tproduct(x, y) - ref) / fro_norm(ref))
    secs = time.perf_counter() - t0
    ok = worst <= 1e-10 and secs < 5
    record(1, ok, f"max rel err {worst:.2e} <= 1e-10, {secs:.2f} s < 5 s")
    assert ok


def test_criterion_02_frobenius_fourier_identity():
    rng = np.random.default_rng(2)
    worst = 0.0
    for _ in range(50):
        x = rng.standard_normal(tuple(rng.integers(1, 9, size=3)))
        worst = max(worst, abs(fro_norm_fourier(x) - fro_norm(x)) / fro_norm(x))
    ok = worst <= 1e-10
    record(2, ok, f"max rel gap {worst:.2e} <= 1e-10")
    assert ok


def test_criterion_03_exact_recovery():
    rng = np.random.default_rng(3)
    t0 = time.perf_counter()
    worst = {"optimal": 0.0, "intersection": 0.0}
    for _ in range(20):
        x = random_low_rank(rng, (30, 25, 8), 5)
        f = truncated_tsvd(x, 5)
        p, q = tdeim(f.U), tdeim(f.V)
        w = slice_lateral(slice_horizontal(x, p), q)
        s = np.linalg.svd(fft_mode3(w).slices, compute_uv=False)
        assert s.min() > 1e-10 * s.max(), "intersection not full rank"
        for middle in worst:
            rel = cur_error(x, assemble_cur(x, p, q, middle)) / fro_norm(x)
            worst[middle] = max(worst[middle], rel)
    secs = time.perf_counter() - t0
    ok = max(worst.values()) <= 1e-6 and secs < 10
    record(3, ok, f"optimal {worst['optimal']:.2e}, intersection {worst['intersection']:.2e} <= 1e-6, "
                  f"{secs:.2f} s < 10 s")
    assert ok


def test_criterion_04_cur_error_bound():
    rng = np.random.default_rng(4)
    t0 = time.perf_counter()
    checked = skipped = failed = 0
    worst = 0.0
    for trial in range(100):
        n1, n2 = rng.integers(2, 21, size=2)
        n3 = int(rng.integers(1, 7))
        # R below min(I1, I2) keeps the tail positive; at full rank both sides are rounding.
        r = int(rng.integers(1, min(n1 - 1, n2 - 1, 6) + 1))
        x = rng.standard_normal((n1, n2, n3))
        f = truncated_tsvd(x, r)
        sigma = spectral_singular_values(x)
        for method in ("tdeim", "top_leverage", "leverage_sampling", "uniform"):
            p, q = select(SamplerConfig(method, r, seed=trial), f.U, f.V)
            consts = error_constants(f.U, p, f.V, q, strict=False)
            if not (np.isfinite(consts.eta_p) and np.isfinite(consts.eta_q)):
                skipped += 1
                continue
            rep = verify_bound(x, assemble_cur(x, p, q), consts, rank=r, sigma=sigma)
            checked += 1
            worst = max(worst, rep.lhs / rep.rhs)
            failed += not rep.lhs <= rep.rhs * (1 + 1e-8)
    secs = time.perf_counter() - t0
    ok = failed == 0 and checked > 0 and secs < 30
    record(4, ok, f"{checked} checked, {skipped} degenerate skipped, {failed} violations, "
                  f"max lhs/rhs {worst:.3f}, {secs:.1f} s < 30 s")
    assert ok


def test_criterion_05_projector_properties():
    rng = np.random.default_rng(5)
    worst_keep = worst_idem = 0.0
    for _ in range(50):
        n1, n3 = int(rng.integers(4, 10)), int(rng.integers(1, 6))
        r = int(rng.integers(1, min(n1, 4) + 1))
        u = random_basis(rng, n1, r, n3)
        s = list(tdeim(u).indices)
        proj = InterpolatoryProjector(u, s)
        g = rng.standard_normal((n1, 3, n3))
        pg = proj(g)
        worst_keep = max(worst_keep, np.abs(pg[s] - g[s]).max())
        worst_idem = max(worst_idem, np.abs(proj(pg) - pg).max())
    ok = worst_keep <= 1e-10 and worst_idem <= 1e-10
    record(5, ok, f"preservation {worst_keep:.2e}, idempotence {worst_idem:.2e} <= 1e-10")
    assert ok


def test_criterion_06_tdeim_reduces_to_deim():
    rng = np.random.default_rng(6)
    mismatches = 0
    for _ in range(30):
        n = int(rng.integers(3, 30))
        r = int(rng.integers(1, n + 1))
        m = rng.standard_normal((n, n + 2))
        u = np.linalg.svd(m, full_matrices=False)[0][:, :r]
        mismatches += tdeim(u[:, :, None]).indices != deim_matrix(u).indices
    ok = mismatches == 0
    record(6, ok, f"{mismatches} of 30 index sequences differ")
    assert ok


PUBLISHED = {
    "exponential": 2.35e-16,
    "rastrigin": 4.13e-05,
    "booth": 2.10e-04,
    "matyas": 4.09e-07,
    "easom": 7.16e-17,
}


def test_criterion_07_function_tensors():
    t0 = time.perf_counter()
    ratios = {}
    for name, ref in PUBLISHED.items():
        x = gen_function_tensor(name)
        ratios[name] = run_approx(x, "tdeim", 10).error / ref
    secs = time.perf_counter() - t0
    ok = all(0.1 <= v <= 10 for v in ratios.values()) and secs < 120
    detail = ", ".join(f"{k} x{v:.2f}" for k, v in ratios.items())
    record(7, ok, f"error / published in [0.1, 10]: {detail}; {secs:.1f} s < 120 s")
    assert ok


def test_criterion_08_synthetic_sweep():
    t0 = time.perf_counter()
    x = gen_synthetic(3, (150, 200, 150))
    cache = BasisCache(x)
    errs = [run_approx(x, "tdeim", r, cache=cache).error for r in range(1, 16)]
    uniform = [run_approx(x, "uniform", 15, seed=s, cache=cache).error for s in range(20)]
    secs = time.perf_counter() - t0
    mono = all(b <= a for a, b in zip(errs, errs[1:]))
    med = float(np.median(uniform))
    ok = mono and errs[-1] <= med and secs < 180
    record(8, ok, f"non-increasing {mono}, TDEIM R=15 {errs[-1]:.3e} <= uniform median {med:.3e}, "
                  f"{secs:.1f} s < 180 s")
    assert ok


def _best_total(x, method, rank, extended_rank=None, repeats=3):
    best = None
    for _ in range(repeats):
        rec = run_approx(x, method, rank, extended_rank, cache=BasisCache(x))
        if best is None or rec.wall_seconds_total < best.wall_seconds_total:
            best = rec
    return best


def test_criterion_09_htdeim():
    rng = np.random.default_rng(9)
    t0 = time.perf_counter()
    same = True
    for _ in range(10):
        u, v = random_basis(rng, 12, 4, 3), random_basis(rng, 10, 4, 3)
        same &= htdeim(u, v, 4, 4) == (tdeim(u), tdeim(v))
    x = gen_synthetic(3, (150, 200, 150))
    h = _best_total(x, "htdeim", 5, 15)
    d = _best_total(x, "tdeim", 15)
    secs = time.perf_counter() - t0
    f5, f15 = truncated_tsvd(x, 5), truncated_tsvd(x, 15)
    proj_h = cur_error(x, assemble_cur(x, *htdeim(f5.U, f5.V, 5, 15)), factored=True)
    proj_d = cur_error(x, assemble_cur(x, tdeim(f15.U), tdeim(f15.V)), factored=True)
    faster = h.wall_seconds_total <= d.wall_seconds_total
    close = h.error <= 2 * d.error
    ok = same and faster and close and secs < 180
    record(9, ok, f"R'=R identical {same}; total time HTDEIM {h.wall_seconds_total:.3f} s <= TDEIM "
                  f"{d.wall_seconds_total:.3f} s {faster}; error HTDEIM {h.error:.3e} <= 2 x TDEIM "
                  f"{d.error:.3e} {close} (factored evaluation {proj_h:.3e} vs {proj_d:.3e}); {secs:.1f} s < 180 s")
    assert ok


def test_criterion_10_leverage_scores():
    rng = np.random.default_rng(10)
    worst = 0.0
    for _ in range(30):
        n1, n2, n3 = rng.integers(2, 12, size=3)
        r = int(rng.integers(1, min(n1, n2) + 1))
        f = truncated_tsvd(rng.standard_normal((n1, n2, n3)), r)
        for basis in (f.U, f.V):
            worst = max(worst, abs(tubal_leverage(basis).scores.sum() - r))
    # Rank-2 basis with two horizontal slices: scores (1.5, 0.5), P = (0.75, 0.25).
    u = np.zeros((2, 2, 2))
    u[0, 0, 0] = 1.0
    u[0, 1, 0] = np.sqrt(0.5)
    u[1, 1, 0] = np.sqrt(0.5)
    lev = tubal_leverage(u)
    gen = np.random.default_rng(10)
    draws = np.array([leverage_sample(lev, 1, gen).indices[0] for _ in range(100_000)])
    freq = np.bincount(draws, minlength=2) / draws.size
    gap = float(np.abs(freq - lev.probabilities).max())
    ok = worst <= 1e-8 and gap <= 0.01
    record(10, ok, f"max |sum l_i - R| {worst:.2e} <= 1e-8, marginal gap {gap:.4f} <= 0.01")
    assert ok
