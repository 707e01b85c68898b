import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from opentoda import (
    CoincidentPoles,
    DomainViolation,
    JacobiMatrix,
    NotInRatNPrime,
    PoleEvaluation,
    SpectralData,
    direct_transform,
    from_moments,
    gammas,
    inverse_transform,
    inverse_transform_stieltjes,
    moments,
    numerator_poly,
    pq_polynomials,
    validate,
    weyl_eval,
    weyl_rat,
)

from conftest import random_jacobi, random_spectral


def test_direct_transform_worked(worked):
    S = direct_transform(worked)
    np.testing.assert_allclose(S.z, [-1.0, 1.0], atol=1e-14)
    np.testing.assert_allclose(S.rho, [0.5, 0.5], atol=1e-14)


def test_spectral_data_validation():
    with pytest.raises(CoincidentPoles):
        SpectralData(z=np.array([1.0, -1.0]), rho=np.array([0.5, 0.5]))
    with pytest.raises(CoincidentPoles):
        SpectralData(z=np.array([1.0, 1.0]), rho=np.array([0.5, 0.5]))
    with pytest.raises(DomainViolation):
        SpectralData(z=np.array([-1.0, 1.0]), rho=np.array([0.5]))
    with pytest.raises(DomainViolation):
        SpectralData(z=np.array([-1.0, np.inf]), rho=np.array([0.5, 0.5]))
    # sign-indefinite residues are legal at construction; they only lose
    # membership in the normalized class
    S = SpectralData(z=np.array([-1.0, 1.0]), rho=np.array([0.5, -0.5]))
    report = validate(S.z, S.rho)
    assert report["ratN"] and not report["ratNprime"]


def test_roundtrip_small(rng):
    for n in (1, 2, 3, 5, 8):
        J = random_jacobi(rng, n)
        back = inverse_transform(direct_transform(J))
        scale = 1.0 + np.max(np.abs(J.to_dense()))
        np.testing.assert_allclose(back.v, J.v, atol=1e-11 * scale)
        np.testing.assert_allclose(back.c, J.c, atol=1e-11 * scale)


@settings(deadline=None, max_examples=30)
@given(
    n=st.integers(min_value=1, max_value=6),
    seed=st.integers(min_value=0, max_value=2**32 - 1),
)
def test_roundtrip_property(n, seed):
    J = random_jacobi(np.random.default_rng(seed), n)
    back = inverse_transform(direct_transform(J))
    scale = 1.0 + np.max(np.abs(J.to_dense()))
    assert np.max(np.abs(back.v - J.v)) <= 1e-10 * scale
    if n > 1:
        assert np.max(np.abs(back.c - J.c)) <= 1e-10 * scale


def test_stieltjes_matches_lanczos(rng):
    for n in (1, 2, 4, 6):
        S = random_spectral(rng, n)
        J1 = inverse_transform(S)
        J2 = inverse_transform_stieltjes(S)
        np.testing.assert_allclose(J2.v, J1.v, atol=1e-8)
        np.testing.assert_allclose(J2.c, J1.c, atol=1e-8)


def test_inverse_requires_normalized():
    S = SpectralData(z=np.array([-1.0, 1.0]), rho=np.array([0.5, 0.6]))
    with pytest.raises(NotInRatNPrime):
        inverse_transform(S)
    with pytest.raises(NotInRatNPrime):
        inverse_transform_stieltjes(S)


def test_weyl_three_routes(rng):
    # pole sum, rational num/den form, and -Q_N/P_N from the reconstructed
    # matrix must agree away from the poles
    for n in (2, 4, 7):
        S = random_spectral(rng, n)
        J = inverse_transform(S)
        R = weyl_rat(S)
        for x in (-7.3, -0.013, 4.21, 11.0):
            a = weyl_eval(S, x)
            b = R(x)
            P, Q = pq_polynomials(J, x)
            c = -Q[n] / P[n]
            assert abs(a - b) <= 1e-8 * abs(a)
            assert abs(a - c) <= 1e-8 * abs(a)


def test_weyl_eval_pole():
    S = SpectralData(z=np.array([-1.0, 1.0]), rho=np.array([0.5, 0.5]))
    with pytest.raises(PoleEvaluation):
        weyl_eval(S, 1.0)


def test_numerator_poly_worked(worked):
    S = direct_transform(worked)
    # rho_0 (z - z_1) + rho_1 (z - z_0) = z
    np.testing.assert_allclose(numerator_poly(S), [0.0, 1.0], atol=1e-14)


def test_gammas_interlace(rng):
    S = random_spectral(rng, 5, min_gap=0.2)
    g, q0 = gammas(S)
    assert q0 == pytest.approx(1.0, abs=1e-12)
    assert g.size == 4
    assert np.all(S.z[:-1] < g) and np.all(g < S.z[1:])


def test_gammas_single_pole():
    g, q0 = gammas(SpectralData(z=np.array([2.0]), rho=np.array([1.0])))
    assert g.size == 0
    assert q0 == 1.0


def test_moments_and_recovery(rng):
    S = random_spectral(rng, 3, min_gap=0.3)
    s = moments(S, 6)
    np.testing.assert_allclose(s, [np.sum(S.rho * S.z**m) for m in range(6)], rtol=1e-13)
    back = from_moments(s, 3)
    np.testing.assert_allclose(back.z, S.z, atol=1e-7)
    np.testing.assert_allclose(back.rho, S.rho, atol=1e-7)


def test_serialization_roundtrip(rng):
    S = random_spectral(rng, 4)
    back = SpectralData.from_dict(S.as_dict())
    np.testing.assert_array_equal(back.z, S.z)
    np.testing.assert_array_equal(back.rho, S.rho)
    J = random_jacobi(rng, 3)
    backJ = JacobiMatrix.from_dict(J.as_dict())
    np.testing.assert_array_equal(backJ.v, J.v)
    np.testing.assert_array_equal(backJ.c, J.c)
