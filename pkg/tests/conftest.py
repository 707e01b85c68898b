"""Shared generators and the quadrature oracle used across the test suite."""

import numpy as np
import pytest

from opentoda import JacobiMatrix, SpectralData, weyl_eval


@pytest.fixture
def rng():
    return np.random.default_rng(20260822)


@pytest.fixture
def worked():
    # two sites at rest with unit coupling: z = (-1, 1), rho = (1/2, 1/2)
    return JacobiMatrix(v=np.zeros(2), c=np.array([1.0]))


def random_jacobi(rng, n):
    v = rng.uniform(-3.0, 3.0, n)
    c = rng.uniform(0.1, 3.0, max(n - 1, 0))
    return JacobiMatrix(v=v, c=c)


def random_spectral(rng, n, positive=False, min_gap=0.05, rho_floor=0.0):
    lo, hi = (0.5, 6.0) if positive else (-3.0, 3.0)
    while True:
        z = np.sort(rng.uniform(lo, hi, n))
        if n == 1 or float(np.min(np.diff(z))) >= min_gap:
            break
    while True:
        rho = rng.dirichlet(np.ones(n))
        if float(np.min(rho)) >= rho_floor:
            break
    return SpectralData(z=z, rho=rho)


def contour_bracket(S, p, q, power, restricted=False, points=64):
    """Quadrature evaluation of the contour bracket, independent of the
    residue algebra.

    Clockwise circles around each pole, radius a tenth of the distance to
    the nearest other singularity; the periodic trapezoid rule converges
    geometrically, so 64 points reach machine precision at these radii.
    """
    chi_p = weyl_eval(S, p)
    chi_q = weyl_eval(S, q)
    q0 = float(np.sum(S.rho))
    theta = 2.0 * np.pi * np.arange(points) / points
    phase = np.exp(-1j * theta)
    total = 0.0 + 0.0j
    for k in range(S.n):
        gaps = [abs(S.z[k] - S.z[m]) for m in range(S.n) if m != k]
        r = 0.1 * min(gaps + [abs(S.z[k] - p), abs(S.z[k] - q)])
        zc = S.z[k] + r * phase
        g = zc**power * weyl_eval(S, zc) * (chi_p - chi_q) / ((zc - p) * (zc - q))
        if restricted:
            g = g - (
                zc**power
                * weyl_eval(S, zc)
                * (1.0 / (zc - p) - 1.0 / (zc - q))
                * chi_p
                * chi_q
                / q0
            )
        # clockwise parametrization z = z_k + r e^{-i theta}
        total += -(r / points) * np.sum(g * phase)
    assert abs(total.imag) < 1e-10
    return float(total.real)
