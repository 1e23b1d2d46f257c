"""Tests for entanglement and distillability classifiers."""

import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from distilkit.criteria import (
    Region,
    _rainbow_generators,
    hyperplane_value,
    is_ppt,
    isotropic_region,
    isotropic_schmidt_number,
    one_copy_dual_planes,
    rainbow_entangled,
    rainbow_one_distillability,
    rainbow_region,
    rainbow_separable_certificate,
    rainbow_witness_closed_form,
    rainbow_witness_trace,
    sr2_expectation,
    uuvvf_one_distillability,
    uuvvf_region,
    werner_one_distillable_dual,
    werner_region,
    werner_sr2_boundary,
)
from distilkit.families import (
    CoordinateVector,
    InvalidParameters,
    canonical_vectors,
    pair_ket,
    rainbow,
    rainbow_top_delta,
    rainbow_top_line,
    random_density,
    uuvvf,
    werner,
)
from distilkit.operators import DenseOperator, PureVector, elementary_operators
from distilkit.sampling import derive_rng

GRID = [Fraction(k, 20) for k in range(-10, 11)]


def _grid_states(d=3):
    for e, dl in itertools.product(GRID, GRID):
        try:
            uuvvf(d, e, dl)
        except InvalidParameters:
            continue
        yield e, dl


def test_is_ppt_examples():
    rng = derive_rng(1)
    a = random_density(2, 2, rng).matrix
    prod = DenseOperator(np.kron(a[:2, :2] / np.trace(a[:2, :2]), np.eye(3) / 3), 2, 3)
    assert is_ppt(prod)
    assert not is_ppt(werner(3, -0.5).dense())
    assert is_ppt(werner(3, -0.2).dense())


def test_sr2_bell_on_werner():
    psi = canonical_vectors("werner_sr2", d=3)
    for beta in (-0.8, -0.5, -0.2, 0.4):
        val = sr2_expectation(psi, werner(3, beta).dense())
        assert val == pytest.approx((1 + 2 * beta) / (9 + 3 * beta), abs=1e-14)


def test_sr2_structured_and_dense_agree():
    s = uuvvf(3, -0.2, 0.1)
    for kind in ("psi_A", "psi_B", "psi_C"):
        psi = canonical_vectors(kind, d=3)
        assert sr2_expectation(psi, s) == pytest.approx(sr2_expectation(psi, s.dense()), abs=1e-12)


@pytest.mark.parametrize("eps", [-0.3, -0.17, -0.16, 0.0, 0.2])
def test_psi_b_sign(eps):
    s = uuvvf(3, eps, 0.1)
    val = sr2_expectation(canonical_vectors("psi_B", d=3), s)
    assert np.sign(val) == np.sign(eps + 1 / 6)


def test_sr2_rejects_rank_three():
    with pytest.raises(ValueError, match="Schmidt rank"):
        sr2_expectation(PureVector.normalize(np.eye(3).ravel(), 3, 3), werner(3, 0.0).dense())


def test_sr2_nonnegative_on_ppt_states():
    rng = derive_rng(4)
    psi = canonical_vectors("werner_sr2", d=3)
    seen = 0
    while seen < 20:
        rho = random_density(3, 3, rng)
        if is_ppt(rho):
            seen += 1
            assert sr2_expectation(psi, rho) >= -1e-10


def test_sign_polynomials_match_dense_expectations():
    rng = derive_rng(7)
    for _ in range(10):
        e, dl = rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4)
        try:
            s = uuvvf(3, e, dl)
        except InvalidParameters:
            continue
        poly = uuvvf_one_distillability(3, e, dl)
        for kind in ("psi_A", "psi_B", "psi_C"):
            val = sr2_expectation(canonical_vectors(kind, d=3), s.dense())
            assert np.sign(val) == np.sign(poly[kind]) or abs(val) < 1e-12


def test_uuvvf_region_examples():
    assert uuvvf_region(3, -0.3, 0.2).label == Region.ONE_DISTILLABLE
    v = uuvvf_region(3, -0.02, 0.0)
    assert v.label == Region.ONE_UNDISTILLABLE
    assert v.certificate("undistillable_1") == pytest.approx(1 / 9 - 0.08)
    assert uuvvf_region(3, 0.01, 0.01).label == Region.SEPARABLE


def test_uuvvf_region_exact_arithmetic():
    v = uuvvf_region(3, Fraction(-1, 6), Fraction(1, 10))
    # psi_B vanishes exactly at the boundary, so it cannot fire
    assert v.certificate("psi_B") == 0.0
    assert v.label != Region.ONE_DISTILLABLE or v.certificate("psi_A") < 0 or v.certificate("psi_C") < 0


def test_grid_one_distillable_points_have_negative_vector():
    for e, dl in _grid_states():
        v = uuvvf_region(3, e, dl)
        rho = uuvvf(3, float(e), float(dl)).dense()
        if v.label == Region.ONE_DISTILLABLE:
            vals = [sr2_expectation(canonical_vectors(k, d=3), rho) for k in ("psi_A", "psi_B", "psi_C")]
            assert min(vals) < -1e-12
        if v.label == Region.SEPARABLE:
            assert is_ppt(rho)


def test_grid_labels_consistent():
    for e, dl in _grid_states():
        v = uuvvf_region(3, e, dl)
        one = min(v.certificate(k) for k in ("psi_A", "psi_B", "psi_C")) < 0
        und = max(v.certificate(k) for k in ("undistillable_1", "undistillable_2")) >= 0
        assert not (one and und), (e, dl)


def test_werner_region_and_boundary():
    assert werner_region(3, -0.6).label == Region.ONE_DISTILLABLE
    assert werner_region(3, -0.6).certificate("1+2beta") == pytest.approx(-0.2)
    assert werner_region(3, -0.4).label == Region.ONE_UNDISTILLABLE
    assert werner_region(3, 0.1).label == Region.SEPARABLE
    for d in (3, 4, 5):
        assert abs(werner_sr2_boundary(d) + 0.5) < 1e-9


@pytest.mark.parametrize("alpha,k", [(2, 1), (10, 2), (100, 3)])
def test_isotropic_schmidt_number_examples(alpha, k):
    assert isotropic_schmidt_number(3, alpha) == k


@given(st.integers(3, 6), st.floats(-1, 200), st.floats(-1, 200))
@settings(max_examples=100, deadline=None)
def test_isotropic_schmidt_number_monotone(d, a1, a2):
    lo, hi = sorted((a1, a2))
    assert isotropic_schmidt_number(d, lo) <= isotropic_schmidt_number(d, hi)


def test_isotropic_region_threshold():
    assert isotropic_region(3, 3.0).label == Region.SEPARABLE
    assert isotropic_region(3, 3.5).label == Region.ONE_DISTILLABLE


@pytest.mark.parametrize("d,alpha", [(3, 15.0), (4, 14.0), (5, 15.0)])
def test_werner_dual_threshold(d, alpha):
    t = werner_one_distillable_dual(d)
    assert t.alpha == pytest.approx(alpha)
    assert abs(t.beta + 0.5) < 1e-9


def test_werner_dual_needs_d3():
    with pytest.raises(ValueError):
        werner_one_distillable_dual(2)


def test_rainbow_witness_examples():
    ent, cert = rainbow_entangled(3, 4, 0.01, 0.2)
    assert ent
    assert cert["witness_closed_form"] == pytest.approx(-1.05)
    ent, cert = rainbow_entangled(3, 4, 0.01, 0.05)
    assert not ent
    assert cert["witness_closed_form"] == pytest.approx(0.75)
    assert rainbow_entangled(3, 4, -0.01, 0.1)[0]


@pytest.mark.parametrize("m,d", [(3, 4), (3, 5), (4, 5)])
def test_rainbow_witness_sign_grid(m, d):
    for e, dl in itertools.product(np.linspace(-0.3, 0.5, 9), repeat=2):
        try:
            s = rainbow(m, d, e, dl)
        except InvalidParameters:
            continue
        closed = rainbow_witness_closed_form(m, d, e, dl)
        dense = rainbow_witness_trace(s, dense=True)
        assert np.sign(round(closed, 12)) == np.sign(round(dense, 12))


def test_rainbow_vectors_match_dense():
    m, d = 3, 4
    for e, dl in [(-0.3, 0.1), (-0.1, 0.05), (0.05, -0.2)]:
        s = rainbow(m, d, e, dl)
        vals = rainbow_one_distillability(m, d, e, dl)
        for k, name in ((1, "vector_1"), (2, "vector_2")):
            val = sr2_expectation(canonical_vectors(f"rainbow_{k}", m=m, d=d), s)
            assert np.sign(val) == np.sign(vals[name])


def test_rainbow_generators_are_realised_by_product_states():
    m, d = 3, 4
    om, od = elementary_operators(m), elementary_operators(d)
    obs = [np.kron(om.flip, od.identity), np.kron(om.identity, od.flip), np.kron(om.flip, od.flip)]

    def point(alpha, beta):
        # alpha, beta live on C^m (x) C^d; the pair-of-pairs ordering is (m_A, m_B, d_A, d_B)
        v = np.einsum("ij,kl->ikjl", alpha, beta).reshape(-1)
        rho = np.outer(v, v.conj())
        return [np.real(np.trace(o @ rho)) for o in obs]

    def basis(i, j):
        x = np.zeros((m, d))
        x[i, j] = 1
        return x

    got = [point(basis(0, 0), basis(0, 0)), point(basis(0, 0), basis(0, 1)),
           point(basis(0, 0), basis(1, 0)), point(basis(0, 0), basis(1, 1))]
    for r in range(1, m + 1):
        a = sum(basis(i, i) for i in range(r)) / np.sqrt(r)
        got.append(point(a, a))
    np.testing.assert_allclose(np.array(got), _rainbow_generators(m), atol=1e-12)


def test_rainbow_separable_certificate():
    w = rainbow_separable_certificate(3, 4, 0.3, rainbow_top_delta(3, 4, 0.3))
    assert w is not None and abs(w.sum() - 1) < 1e-9 and np.all(w >= -1e-12)
    assert rainbow_separable_certificate(3, 4, 0.01, 0.2) is None


def test_rainbow_top_line_label_order():
    m, d = 3, 4
    lo, hi = rainbow_top_line(m, d)
    labels = []
    for e in np.linspace(lo, hi, 301):
        lab = rainbow_region(m, d, e, rainbow_top_delta(m, d, e)).label
        if not labels or labels[-1] != lab:
            labels.append(lab)
    assert labels == [
        Region.ONE_DISTILLABLE,
        Region.TWO_DISTILLABLE,
        Region.ASYMPTOTIC,
        Region.UNKNOWN,
        Region.PPT_ENTANGLED,
        Region.SEPARABLE,
    ]


def test_hyperplane_examples():
    c = CoordinateVector(("x1", "x2"), [0.5, 0.0], "tilde")
    assert hyperplane_value(c, 2, 3, dual=False) == pytest.approx(0.0, abs=1e-15)
    n, eps = 3, 0.01
    c = CoordinateVector(("x1", "x2", "x3"), [1 / n + eps * (1 - 1 / n), eps, eps], "tilde")
    assert abs(hyperplane_value(c, n, 4, dual=False)) < 1e-15
    z = CoordinateVector(("x0", "x1", "x2"), [0.0, 0.0, 0.0])
    assert hyperplane_value(z, 2, 3, dual=True) == 0.0


def test_hyperplane_rejects_label_mismatch():
    with pytest.raises(ValueError, match="needs labels"):
        hyperplane_value(CoordinateVector(("x1",), [0.1]), 2, 3, dual=False)


def test_one_copy_dual_planes_origin_inside():
    for d in (3, 4, 5):
        assert all(v > 0 for v in one_copy_dual_planes(d, 0.0, 0.0, 0.0).values())


def test_pair_ket_layout():
    v = pair_ket([2, 3], [[(1, 0), (2, 1)]])
    # A digits (1, 2), B digits (0, 1): A index 1*3+2 = 5, B index 0*3+1 = 1
    assert v.amplitudes[5 * 6 + 1] == 1
