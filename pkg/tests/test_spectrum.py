import dataclasses

import numpy as np
import pytest

from helpers import corpus, nearest_distance, trig_fourier_spectrum
from qeslab.diffop import DegreeProfile, MatrixDiffOp
from qeslab.errors import NotCertified
from qeslab.models import (
    QuarticParams,
    SexticParams,
    WType,
    build,
    quartic_operator,
    trig_operator,
    trig_qes_params,
)
from qeslab.numkernel import eig_via_charpoly, multiset_distance
from qeslab.qescert import certify
from qeslab.spectrum import algebraic_spectrum, build_basis, count_real, matrix_rep


def spectrum_of(params, realness_tol=1e-8):
    op, prof = build(params)
    return algebraic_spectrum(op, certify(op, prof), prof, realness_tol)


def gaps(ev):
    ev = np.sort_complex(np.asarray(ev))
    return ev - ev[0]


@pytest.mark.parametrize("wtype", list(WType))
@pytest.mark.parametrize("n,M,rho", [(1, 0.5, 0.3), (1, 2.0, 0.8), (2, 1.0, 0.6), (2, 3.0, 0.3)])
def test_trig_eigenvalues_in_fourier_spectrum(wtype, n, M, rho):
    p = trig_qes_params(n, M, rho, 1.0, wtype)
    res = spectrum_of(p)
    assert nearest_distance(res.eigenvalues, trig_fourier_spectrum(p)) < 1e-8


@pytest.mark.parametrize("M,rho", [(0.0, 0.5), (0.5, 0.9), (2.0, 0.7), (3.0, 0.3)])
def test_n1_gap_law(M, rho):
    ev = spectrum_of(trig_qes_params(1, M, rho, 1.0)).eigenvalues
    want = 4 * np.sqrt(complex(1 - rho**2 * (M - 1) ** 2))
    assert abs(abs(ev[1] - ev[0]) - abs(want)) < 1e-9


@pytest.mark.parametrize("M", [0.0, 2.0, 3.0])
def test_n1_turns_complex_past_threshold(M):
    rho_c = 1 / abs(M - 1)
    assert spectrum_of(trig_qes_params(1, M, 0.95 * rho_c, 1.0)).real_count == 2
    assert spectrum_of(trig_qes_params(1, M, 1.05 * rho_c, 1.0)).real_count == 0


@pytest.mark.parametrize("M,rho", [(1.0, 0.4), (3.0, 0.3), (3.0, 0.45)])
def test_n2_absolute_values_with_offset(M, rho):
    # additive constant a = M**2 reproduces the closed forms exactly
    ev = spectrum_of(trig_qes_params(2, M, rho, 1.0, a=M**2)).eigenvalues
    if M == 1.0:
        s = np.sqrt(1 - rho**2)
        want = [4 + rho**2, 4 + rho**2, 8 + rho**2 + 8 * s, 8 + rho**2 - 8 * s]
    else:
        s9, s1 = np.sqrt(9 - 4 * rho**2), np.sqrt(1 - 4 * rho**2)
        want = [10 + rho**2 + 2 * s9, 10 + rho**2 - 2 * s9, 2 + rho**2 + 2 * s1, 2 + rho**2 - 2 * s1]
    assert multiset_distance(ev, want) < 1e-9


def test_n2_m1_real_count_above_one():
    assert spectrum_of(trig_qes_params(2, 1.0, 1.5, 1.0)).real_count == 2


def test_shift_covariance():
    p = trig_qes_params(2, 0.7, 0.4, 1.0)
    op, prof = trig_operator(p)
    cert = certify(op, prof)
    base = algebraic_spectrum(op, cert, prof).eigenvalues
    c = 2.5 - 1.25j
    shifted = algebraic_spectrum(op.shifted(c), certify(op.shifted(c), prof), prof).eigenvalues
    assert multiset_distance(shifted, base + c) < 1e-10


def test_matrix_rep_shift_is_exact():
    p = trig_qes_params(2, 0.7, 0.4, 1.0)
    op, prof = trig_operator(p)
    basis = build_basis(certify(op, prof), prof)
    X, _ = matrix_rep(op, basis)
    Y, _ = matrix_rep(op.shifted(3.0), basis)
    np.testing.assert_allclose(Y - X, 3.0 * np.eye(X.shape[0]), atol=1e-10)


def test_identity_matrix_rep():
    prof = DegreeProfile(2, 1)
    op = MatrixDiffOp.identity()
    basis = build_basis(certify(op, prof), prof)
    X, res = matrix_rep(op, basis)
    np.testing.assert_allclose(X, np.eye(basis.dimension), atol=1e-14)
    assert res == 0.0


def test_basis_order_independence():
    op, prof = trig_operator(trig_qes_params(2, 1.3, 0.5, 1.0, WType.III))
    basis = build_basis(certify(op, prof), prof)
    X, _ = matrix_rep(op, basis)
    rng = np.random.default_rng(0)
    Y, _ = matrix_rep(op, basis.permuted(rng.permutation(basis.dimension)))
    assert multiset_distance(np.linalg.eigvals(X), np.linalg.eigvals(Y)) < 1e-10


@pytest.mark.parametrize("label,params", corpus(), ids=[c[0] for c in corpus()])
def test_dimension_and_closure(label, params):
    op, prof = build(params)
    cert = certify(op, prof)
    res = algebraic_spectrum(op, cert, prof)
    expected = prof.d1 + prof.d2 + (2 if cert.rank_M1 == 0 else 1)
    assert res.eigenvalues.size == expected
    assert res.closure_residual < 1e-8


@pytest.mark.parametrize("label,params", corpus(), ids=[c[0] for c in corpus()])
def test_lapack_and_charpoly_routes_agree(label, params):
    op, prof = build(params)
    basis = build_basis(certify(op, prof), prof)
    X, _ = matrix_rep(op, basis)
    assert multiset_distance(np.linalg.eigvals(X), eig_via_charpoly(X)) < 1e-7


def test_trig_type_i_n2_dimension_four():
    op, prof = trig_operator(trig_qes_params(2, 1.0, 0.5, 1.0))
    assert build_basis(certify(op, prof), prof).dimension == 4


def test_quartic_dimension_two_n():
    for n in (2, 3):
        op, prof = quartic_operator(QuarticParams(n, 1.0, 1.0))
        assert build_basis(certify(op, prof), prof).dimension == 2 * n


def test_sextic_top_vector_ratio():
    op, prof = build(SexticParams(3, 1.0, 0.5))
    basis = build_basis(certify(op, prof), prof)
    a, b = basis.locked_ratio
    assert abs(a / b - 1.5) < 1e-12
    assert basis.dimension == 6


def test_not_certified_raises():
    p = trig_qes_params(1, 0.5, 0.3, 1.0)
    op, prof = trig_operator(dataclasses.replace(p, m_tilde=p.m_tilde + 0.2))
    with pytest.raises(NotCertified):
        build_basis(certify(op, prof), prof)


def test_count_real_uses_relative_tolerance():
    assert count_real([1e6 + 1e-3j, 1 + 1e-3j, 2.0], 1e-8) == 2


def test_result_to_dict():
    doc = spectrum_of(trig_qes_params(1, 0.5, 0.3, 1.0)).to_dict()
    assert set(doc) == {"eigenvalues", "real_count", "closure_residual"}
    assert len(doc["eigenvalues"]) == 2
