import numpy as np
import pytest

from speclab.errors import EigenvalueOnContour, QuadratureNotConverged
from speclab.riesz import riesz_origin_disc, riesz_projection, separating_radii
from suites import direct_sum, jordan


def similar(rng, core):
    n = core.shape[0]
    q = np.eye(n) + 0.3 * (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(n)
    return q @ core @ np.linalg.inv(q)


def test_rank_counts_enclosed_eigenvalues():
    res = riesz_projection(np.diag([0.9, 0.5, 0.5, 0.1]), 0.0, 0.7)
    assert res.rank == 3 and res.accepted


def test_whole_spectrum_gives_identity():
    res = riesz_projection(jordan(0.5, 3), 0.5, 0.1)
    assert res.rank == 3
    assert np.allclose(res.P, np.eye(3), atol=1e-12)


def test_construct_then_recover_jordan():
    rng = np.random.default_rng(0)
    a = similar(rng, direct_sum(jordan(0.8, 2), np.diag([0.2, 0.1])))
    res = riesz_projection(a, 0.8, 0.05)
    assert res.rank == 2
    assert res.idempotency_residual <= 1e-8 and res.commutation_residual <= 1e-8
    assert res.refinement_change <= 1e-8


def test_origin_disc_examples():
    res = riesz_origin_disc(np.diag([0.9, 0.3]), 0.5)
    assert res.rank == 1
    assert all(abs(v - 0.3) <= 1e-9 for v in res.decay_values)
    assert riesz_origin_disc(np.diag([0.9, 0.3]), 0.1).rank == 0
    res = riesz_origin_disc(direct_sum(jordan(0.6, 2), [[0.2]]), 0.4)
    assert res.rank == 1
    assert all(abs(v - 0.2) <= 1e-9 for v in res.decay_values)
    assert all(v < 0.4 for v in res.decay_values)


def test_eigenvalue_on_contour():
    with pytest.raises(EigenvalueOnContour):
        riesz_projection(np.diag([0.5, 0.1]), 0.0, 0.5)


def test_quadrature_cap():
    # an eigenvalue 1.1e-6 off the circle passes the margin but needs huge node counts
    with pytest.raises(QuadratureNotConverged):
        riesz_projection(np.diag([0.5 + 2e-6, 0.1]), 0.0, 0.5)


def test_bad_arguments():
    with pytest.raises(ValueError):
        riesz_projection(np.eye(2), 0.0, -1.0)
    with pytest.raises(ValueError):
        riesz_projection(np.eye(2), 0.0, 2.0, nodes=8)


def test_normal_gives_orthogonal_projection():
    rng = np.random.default_rng(3)
    q, _ = np.linalg.qr(rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5)))
    a = q @ np.diag([0.9, 0.7j, -0.4, 0.2, 0.05]) @ q.conj().T
    res = riesz_origin_disc(a, 0.5)
    assert np.linalg.norm(res.P - res.P.conj().T, 2) <= 1e-8
    assert res.rank == 3


def test_disjoint_circles_sum_to_identity():
    rng = np.random.default_rng(4)
    a = similar(rng, direct_sum(jordan(0.8, 2), np.diag([-0.5, 0.2j, 0.1])))
    total = sum(riesz_projection(a, lam, 0.05).P for lam in (0.8, -0.5, 0.2j, 0.1))
    assert np.linalg.norm(total - np.eye(5), 2) <= 1e-7


def test_complementary_ranks():
    rng = np.random.default_rng(5)
    a = similar(rng, np.diag([0.9, 0.6, 0.3, 0.3, 0.1]))
    res = riesz_origin_disc(a, 0.45)
    comp = np.eye(5) - res.P
    comp_rank = int(np.sum(np.linalg.svd(comp, compute_uv=False) > 0.5))
    assert res.rank + comp_rank == 5


def test_separating_radii():
    radii = separating_radii(np.diag([0.9, 0.4, 0.4, 0.1]))
    assert radii == pytest.approx([0.6, 0.2, 0.05])
