"""Property tests for the module invariants (hypothesis drives seeds, sizes and scalars)."""

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from speclab.approx import borel_caratheodory_check, calculus_transfer_check, approx_root
from speclab.linalg import general_eigenvalues, hermitian_eig, operator_norm, svd_values
from speclab.matfun import b_n, holder_mccarthy_check, log_abs_power_form, power_sequence
from speclab.graded import graded_power, graded_svd
from speclab.linalg import schur_frame
from speclab.opzoo import scaled, truncate, zoo
from speclab.riesz import riesz_origin_disc, separating_radii
from speclab.spectra import nayak_limit, spectral_projection_below

PROPS = settings(max_examples=25, deadline=None)
seeds = st.integers(0, 2**32 - 1)
dims = st.integers(1, 7)


def cmat(seed, n, m=None):
    rng = np.random.default_rng(seed)
    m = n if m is None else m
    return rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))


def unitary(seed, n):
    q, _ = np.linalg.qr(cmat(seed, n))
    return q


def psd(seed, n):
    x = cmat(seed, n)
    return x @ x.conj().T


def unit(seed, n):
    x = np.random.default_rng(seed + 1).standard_normal(n) + 0j
    return x / np.linalg.norm(x)


# ---- linalg-core ----------------------------------------------------------


@PROPS
@given(seeds, dims)
def test_decomposition_residuals(seed, n):
    s = psd(seed, n) - psd(seed + 7, n)
    dec = hermitian_eig(s)
    assert dec.orthogonality_residual() <= 1e-10
    assert np.linalg.norm(dec.reconstruct() - s, 2) <= 1e-10 * max(np.linalg.norm(s, 2), 1e-300)
    assert np.all(np.diff(dec.values) >= 0)


@PROPS
@given(seeds, dims, st.integers(1, 7))
def test_svd_unitary_invariance(seed, n, m):
    a = cmat(seed, n, m)
    u, w = unitary(seed + 1, n), unitary(seed + 2, m)
    assert np.allclose(svd_values(u @ a @ w), svd_values(a), atol=1e-9)


@PROPS
@given(seeds, dims)
def test_eigen_moduli_adjoint(seed, n):
    a = cmat(seed, n)
    s1, s2 = general_eigenvalues(a), general_eigenvalues(a.conj().T)
    assert np.allclose(s1.moduli(), s2.moduli(), atol=s1.tol_cluster)
    mods = [e.modulus for e in s1.entries]
    assert all(b <= a_ for a_, b in zip(mods, mods[1:]))
    assert sum(e.multiplicity for e in s1.entries) == n


@PROPS
@given(seeds, dims)
def test_norm_submultiplicative(seed, n):
    a, b = cmat(seed, n), cmat(seed + 3, n)
    assert operator_norm(a @ b) <= operator_norm(a) * operator_norm(b) + 1e-10


# ---- matfun ---------------------------------------------------------------


@PROPS
@given(seeds, dims, st.floats(0.01, 100.0), st.integers(1, 80))
def test_scaling_equivariance(seed, n, c, k):
    a = 0.9 * cmat(seed, n) / np.linalg.norm(cmat(seed, n), 2)
    lhs = b_n(c * a, k).B_n
    rhs = c * b_n(a, k).B_n
    assert np.linalg.norm(lhs - rhs, 2) <= 1e-9 * c * np.linalg.norm(a, 2)


@PROPS
@given(seeds, dims, st.integers(1, 40))
def test_quadratic_form_inequality(seed, n, k):
    # <B_n x, x> <= <|A^n| x, x>^(1/n), the Hoelder-McCarthy bound with r = 1/n
    a = cmat(seed, n)
    x = unit(seed, n)
    rec = b_n(a, k)
    lhs = float(np.real(np.vdot(x, rec.B_n @ x)))
    frame_x = rec.frame.to_frame(x)
    rhs = np.exp(log_abs_power_form(rec.log_singular_values, rec.frame_vectors, frame_x) / k)
    assert lhs <= rhs * (1 + 1e-8) + 1e-300


@PROPS
@given(seeds, dims, st.integers(1, 60))
def test_norm_is_top_root(seed, n, k):
    a = 0.9 * cmat(seed, n) / np.linalg.norm(cmat(seed, n), 2)
    rec = b_n(a, k)
    top = np.linalg.norm(np.linalg.matrix_power(a, k), 2) ** (1 / k)
    assert abs(np.linalg.norm(rec.B_n, 2) - top) <= 1e-9 * max(top, 1e-300)
    assert np.linalg.norm(rec.B_n, 2) <= np.linalg.norm(a, 2) + 1e-8


@PROPS
@given(seeds, dims, st.integers(1, 64))
def test_normal_sequence_constant(seed, n, k):
    u = unitary(seed, n)
    lam = cmat(seed + 5, n, 1)[:, 0] * 0.3
    a = u @ np.diag(lam) @ u.conj().T
    rec = b_n(a, k)
    ref = u @ np.diag(np.abs(lam)) @ u.conj().T
    assert np.linalg.norm(rec.B_n - ref, 2) <= 1e-9


@PROPS
@given(seeds, st.integers(1, 6), st.floats(0.01, 0.99))
def test_holder_mccarthy(seed, n, r):
    res = holder_mccarthy_check(psd(seed, n), unit(seed, n), r)
    assert res.holds


# ---- graded kernels -------------------------------------------------------


@PROPS
@given(seeds, dims, st.integers(0, 30))
def test_graded_power_matches_dense(seed, n, k):
    t = np.triu(cmat(seed, n)) * 0.5
    ref = np.linalg.matrix_power(t, k)
    got = graded_power(t, k).dense()
    assert np.linalg.norm(got - ref) <= 1e-12 * max(np.linalg.norm(ref), 1e-300) + 1e-300


@PROPS
@given(seeds, dims)
def test_graded_svd_orthogonal(seed, n):
    f = schur_frame(cmat(seed, n))
    log_sv, v = graded_svd(graded_power(f.triangular, 3))
    assert np.allclose(v.conj().T @ v, np.eye(n), atol=1e-12)
    assert np.all(np.diff(log_sv) <= 0)


# ---- spectra --------------------------------------------------------------


@PROPS
@given(seeds, dims, st.floats(0.0, 3.0), st.floats(0.0, 3.0))
def test_projection_nesting(seed, n, r1, r2):
    t = psd(seed, n) / n
    lo, hi = min(r1, r2), max(r1, r2)
    p, _ = spectral_projection_below(t, lo)
    q, _ = spectral_projection_below(t, hi)
    assert np.min(np.linalg.eigvalsh(q - p)) >= -1e-9


@PROPS
@given(seeds, st.integers(1, 5), st.floats(0.1, 5.0))
def test_nayak_scaling(seed, n, c):
    a = 0.9 * cmat(seed, n) / np.linalg.norm(cmat(seed, n), 2)
    e1 = nayak_limit(a, 64).eigenvalues
    e2 = nayak_limit(c * a, 64).eigenvalues
    assert np.allclose(e2, c * e1, rtol=1e-8, atol=1e-12)


@PROPS
@given(seeds, st.integers(1, 6), st.integers(1, 50))
def test_yamamoto_consistency(seed, n, k):
    a = cmat(seed, n)
    rec = power_sequence(a, [k])[0]
    eig = np.sort(np.linalg.eigvalsh(rec.B_n))[::-1]
    assert np.allclose(eig, rec.eigenvalues, rtol=1e-8, atol=1e-8 * rec.eigenvalues[0])


# ---- riesz ----------------------------------------------------------------


@settings(max_examples=15, deadline=None)
@given(seeds, st.integers(2, 6))
def test_riesz_complementary_rank(seed, n):
    rng = np.random.default_rng(seed)
    mods = np.sort(rng.uniform(0.05, 0.95, n))[::-1]
    if n > 1 and np.min(-np.diff(mods)) < 0.05:
        mods = np.linspace(0.9, 0.1, n)
    lam = mods * np.exp(1j * rng.uniform(-np.pi, np.pi, n))
    q = np.eye(n) + 0.2 * cmat(seed, n) / np.sqrt(n)
    a = q @ np.diag(lam) @ np.linalg.inv(q)
    for k, r in enumerate(separating_radii(np.diag(lam))):
        res = riesz_origin_disc(a, r, samples=1, n_window=(8, 16))
        comp = np.eye(n) - res.P
        assert res.rank + int(np.sum(np.linalg.svd(comp, compute_uv=False) > 0.5)) == n
        assert res.rank == n - k - 1
        assert res.refinement_change <= 1e-8


# ---- analysis-approx --------------------------------------------------------


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False), min_size=1, max_size=21),
    st.floats(0.05, 3.9),
    st.floats(0.01, 1.0),
)
def test_borel_caratheodory_universal(coef, r, gap):
    R = min(4.0, r + gap)
    if R <= r:
        return
    assert borel_caratheodory_check(coef, r, R, 64).holds


_SQRT = approx_root(1, 1.0, 0.1)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0.0, 1.0), min_size=1, max_size=8))
def test_calculus_exact_on_diagonals(values):
    res = calculus_transfer_check(np.diag(values), _SQRT, 1)
    pointwise = max(abs(np.sqrt(v) - _SQRT(v)) for v in values)
    assert abs(res.residual - pointwise) <= 1e-12
    assert res.holds


# ---- opzoo ----------------------------------------------------------------


@settings(max_examples=20, deadline=None)
@given(st.sampled_from([g for g in zoo() if g.family is None]), st.integers(1, 12), st.integers(0, 12))
def test_truncation_consistency(gen, m, extra):
    s = scaled(gen)
    assert np.array_equal(truncate(s, m), truncate(s, m + extra)[:m, :m])
