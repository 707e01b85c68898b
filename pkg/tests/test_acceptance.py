"""Acceptance gate: ten numbered end-to-end properties at fixed tolerances.

Each test prints a single pass/fail line so the whole gate reads as a
checklist under pytest -s. Seeds are pinned; the full file targets well
under a minute.
"""

import numpy as np
import pytest

from conftest import random_jacobi, random_spectral
from opentoda import (
    FlowSpec,
    JacobiMatrix,
    Observable,
    PhasePoint,
    SpectralData,
    action_angle_map,
    action_sum,
    analytic_bracket,
    bracket_terms,
    casimir_residual,
    closed_form_bracket,
    direct_transform,
    dirac_restrict,
    evolve,
    exact_flow,
    fd_gradient,
    flaschka,
    gamma_pi_map,
    gammas,
    hamiltonian_field,
    inverse_transform,
    iy_map,
    jacobi_residual,
    neg_log_mass,
    pi0_cv,
    pi1_cv,
    pi2_cv,
    pq_polynomials,
    restricted_bracket,
    spectral_field,
    verify_canonical,
    weyl_eval,
    zrho_pack,
    zrho_restricted_tensor,
    zrho_tensor,
    WeightFn,
    cv_pack,
)

ONE = WeightFn.power(0)
Z = WeightFn.power(1)


def report(tag, worst, tol):
    status = "PASS" if worst <= tol else "FAIL"
    print(f"{tag}: {status}  worst={worst:.3e}  tol={tol:.1e}")
    assert worst <= tol, f"{tag}: worst residual {worst:.3e} exceeds {tol:.1e}"


def test_ac01_round_trip():
    rng = np.random.default_rng(101)
    worst = 0.0
    for trial in range(200):
        n = 1 + trial % 8
        J = random_jacobi(rng, n)
        back = inverse_transform(direct_transform(J))
        A = J.to_dense()
        err = np.linalg.norm(back.to_dense() - A, np.inf)
        worst = max(worst, err / (1.0 + np.linalg.norm(A, np.inf)))
    report("AC1 round trip (200 matrices, N in 1..8)", worst, 1e-10)


def test_ac02_spectral_representation():
    rng = np.random.default_rng(102)
    worst_mass = 0.0
    worst_chi = 0.0
    for trial in range(60):
        n = 2 + trial % 6
        J = random_jacobi(rng, n)
        S = direct_transform(J)
        assert np.all(S.rho > 0)
        worst_mass = max(worst_mass, abs(float(np.sum(S.rho)) - 1.0))
        g, q0 = gammas(S)
        assert np.all(S.z[:-1] < g) and np.all(g < S.z[1:])
        # three routes to the same function, compared pairwise off the poles
        x = rng.uniform(-6.0, 6.0, size=5)
        keep = np.abs(x[:, None] - S.z[None, :]).min(axis=1) > 0.3
        x = x[keep]
        if x.size == 0:
            continue
        a = weyl_eval(S, x)
        P, Q = pq_polynomials(J, x)
        b = -Q[n] / P[n]
        c = np.array(
            [q0 * np.prod(g - xi) / np.prod(S.z - xi) for xi in x]
        )
        scale = np.maximum.reduce([np.abs(a), np.abs(b), np.abs(c), np.ones_like(a)])
        for u, v in ((a, b), (a, c), (b, c)):
            worst_chi = max(worst_chi, float(np.max(np.abs(u - v) / scale)))
    report("AC2a spectral class (rho > 0, unit mass, interlacing)", worst_mass, 1e-10)
    report("AC2b Weyl function, three routes pairwise", worst_chi, 1e-8)


def sample_points(rng, S):
    # keep evaluation points away from the poles so the closed forms are
    # compared at full precision, not through cancellation noise
    while True:
        p, q = rng.uniform(-8.0, 8.0, size=2)
        d = np.abs(S.z - p).min(), np.abs(S.z - q).min()
        if abs(p - q) > 0.5 and min(d) > 0.5:
            return p, q


def test_ac03_closed_forms_and_infinity_residue():
    rng = np.random.default_rng(103)
    worst = 0.0
    worst_ext = 0.0
    biggest_corr = 0.0
    for trial in range(50):
        n = 2 + trial % 4
        S = random_spectral(rng, n, rho_floor=1e-2)
        p, q = sample_points(rng, S)
        for f in (ONE, Z):
            for restricted in (False, True):
                got = float(np.sum(bracket_terms(S, p, q, f, restricted=restricted)))
                want = closed_form_bracket(S, p, q, f, restricted=restricted)
                worst = max(worst, abs(got - want) / (1.0 + abs(want)))
        # f = z^2: the plain exterior form misses the residue at infinity;
        # adding q0 (chi(p) - chi(q)) closes the gap exactly
        chi_p, chi_q = weyl_eval(S, p), weyl_eval(S, q)
        exterior = (p**2 * chi_p - q**2 * chi_q) * (chi_p - chi_q) / (p - q)
        corr = float(np.sum(S.rho)) * (chi_p - chi_q)
        got2 = analytic_bracket(S, p, q, WeightFn.power(2))
        worst_ext = max(worst_ext, abs(got2 - (exterior + corr)) / (1.0 + abs(got2)))
        biggest_corr = max(biggest_corr, abs(corr))
    report("AC3a closed forms f=1, z (50 states, both variants)", worst, 1e-12)
    report("AC3b f=z^2 exterior + infinity residue", worst_ext, 1e-12)
    print(f"AC3c infinity residue nonzero for f=z^2: max |corr| = {biggest_corr:.3e}")
    assert biggest_corr > 1e-6


def test_ac04_jacobi_identity():
    rng = np.random.default_rng(104)
    powers = [0, 1, 2, 3]
    worst = 0.0
    for trial in range(100):
        n = 2 + trial % 4
        f = WeightFn.power(powers[trial % 4])
        S = random_spectral(rng, n, rho_floor=1e-2)
        x = zrho_pack(S)
        for P in (zrho_tensor(f, n), zrho_restricted_tensor(f, n)):
            worst = max(worst, jacobi_residual(P, x))
    report("AC4a Jacobi identity (both tensors, f=z^0..z^3)", worst, 1e-6)

    # negative control: one corrupted entry must be caught loudly
    base = zrho_tensor(Z, 3)

    def broken(x):
        T = base.tensor(x)
        T[0, 1] += 0.05
        T[1, 0] -= 0.05
        return T

    from opentoda import PoissonStructure
    from opentoda.brackets import zrho_chart

    bad = PoissonStructure(chart=zrho_chart(3), name="broken", tensor_fn=broken)
    S = random_spectral(rng, 3, rho_floor=1e-2)
    res = jacobi_residual(bad, zrho_pack(S))
    print(f"AC4b negative control residual = {res:.3e} (must exceed 1e-3)")
    assert res > 1e-3


def test_ac05_dirac_reduction():
    rng = np.random.default_rng(105)
    worst = 0.0
    worst_pair = 0.0
    for trial in range(30):
        n = 2 + trial % 4
        m = trial % 3
        f = WeightFn.power(m)
        S = random_spectral(rng, n, positive=m >= 1, rho_floor=1e-2)
        x = zrho_pack(S)
        base = zrho_tensor(f, n)
        phi1, phi2 = action_sum(f, n), neg_log_mass(n)
        D = dirac_restrict(base, phi1, phi2)
        worst = max(
            worst,
            float(np.max(np.abs(D.tensor(x) - zrho_restricted_tensor(f, n).tensor(x)))),
        )
        pair = float(phi1.gradient(x) @ base.tensor(x) @ phi2.gradient(x))
        worst_pair = max(worst_pair, abs(pair - 1.0))
    report("AC5a dirac_restrict matches the closed-form tensor", worst, 1e-10)
    report("AC5b constraint pairing {Phi1, Phi2} = 1", worst_pair, 1e-9)


def test_ac06_hierarchy_degeneracy():
    rng = np.random.default_rng(106)
    worst = 0.0
    for trial in range(50):
        n = 2 + trial % 4
        J = random_jacobi(rng, n)
        for k in (1, 2, 3):
            fields = [
                np.concatenate(hamiltonian_field(J, k, p))
                for p in range(min(k, 2) + 1)
            ]
            scale = max(1.0, max(float(np.max(np.abs(g))) for g in fields))
            for g in fields[1:]:
                worst = max(worst, float(np.max(np.abs(g - fields[0]))) / scale)
    report("AC6 hamiltonian_field p-degeneracy (k <= 3)", worst, 1e-10)


def test_ac07_flow_equivalence():
    rng = np.random.default_rng(107)
    worst_alg = 0.0
    for trial in range(40):
        n = 2 + trial % 4
        k = 1 + trial % 3
        p = trial % (min(k, 2) + 1)
        S = random_spectral(rng, n, positive=p >= 1, rho_floor=1e-2)
        x = zrho_pack(S)
        grad = np.concatenate([S.z ** (k - p), np.zeros(n)])
        got = zrho_restricted_tensor(WeightFn.power(p), n).tensor(x) @ grad
        want = np.concatenate(spectral_field(S, k))
        worst_alg = max(worst_alg, float(np.max(np.abs(got - want))))
    report("AC7a restricted tensor gradient flow = hierarchy ODE", worst_alg, 1e-13)

    worst_flow = 0.0
    worst_drift = 0.0
    for seed in (1, 2):
        rng2 = np.random.default_rng(170 + seed)
        S = random_spectral(rng2, 3, rho_floor=5e-2)
        J = inverse_transform(S)
        spec = FlowSpec(k=1, method="rk4-lax", t_final=5.0, dt=1e-3)
        traj = evolve(J, spec, record_every=1000)
        worst_drift = max(worst_drift, float(np.max(traj.spectrum_drift)))
        end = traj.final_state
        got = direct_transform(JacobiMatrix(v=end[:3], c=end[3:]))
        want = exact_flow(S, 1, 5.0)
        worst_flow = max(
            worst_flow,
            float(np.max(np.abs(got.z - want.z))),
            float(np.max(np.abs(got.rho - want.rho))),
        )
    report("AC7b RK4 Lax flow vs exact flow at t=5", worst_flow, 1e-7)
    report("AC7c eigenvalue drift along the Lax flow", worst_drift, 1e-8)


def test_ac08_casimirs():
    rng = np.random.default_rng(108)
    worst = 0.0
    for trial in range(25):
        n = 2 + trial % 4
        J = random_jacobi(rng, n)
        x = cv_pack(J)

        def tr_fn(xx):
            return float(np.sum(xx[:n]))

        def det_fn(xx):
            return float(np.linalg.det(JacobiMatrix(v=xx[:n], c=xx[n:]).to_dense()))

        def trinv_fn(xx):
            return float(
                np.trace(np.linalg.inv(JacobiMatrix(v=xx[:n], c=xx[n:]).to_dense()))
            )

        worst = max(worst, casimir_residual(pi0_cv(n), Observable(tr_fn), x))
        # det L is affine in each v and quadratic in each c: a wide step is
        # truncation-free and beats the cancellation floor
        det_obs = Observable(det_fn, grad=lambda xx: fd_gradient(det_fn, xx, step=1e-2))
        worst = max(worst, casimir_residual(pi1_cv(n), det_obs, x))
        shifted = cv_pack(JacobiMatrix(v=J.v + 10.0, c=J.c))
        worst = max(worst, casimir_residual(pi2_cv(n), Observable(trinv_fn), shifted))

        m = trial % 3
        f = WeightFn.power(m)
        S = random_spectral(rng, n, positive=m >= 1, rho_floor=1e-2)
        xs = zrho_pack(S)
        R = zrho_restricted_tensor(f, n)
        worst = max(worst, casimir_residual(R, action_sum(f, n), xs))
        worst = max(worst, casimir_residual(R, neg_log_mass(n), xs))
    report("AC8 Casimir residuals (pi0, pi1, pi2, restricted pair)", worst, 1e-9)


def test_ac09_darboux_charts():
    rng = np.random.default_rng(109)
    worst = 0.0
    for trial in range(8):
        n = 2 + trial % 3
        # chart Jacobians go through central differences; keep the states away
        # from pole collisions and vanishing residues
        for f, positive in ((ONE, False), (Z, True)):
            S = random_spectral(rng, n, positive=positive, min_gap=0.4, rho_floor=0.05)
            x = zrho_pack(S)
            r = verify_canonical(iy_map(f, n), zrho_tensor(f, n), x)
            worst = max(worst, r["max_deviation"])
        S = random_spectral(rng, n, min_gap=0.4, rho_floor=0.05)
        x = zrho_pack(S)
        r = verify_canonical(action_angle_map(ONE, n), zrho_restricted_tensor(ONE, n), x)
        worst = max(worst, r["max_deviation"])
        r = verify_canonical(gamma_pi_map(n), zrho_tensor(ONE, n), x)
        worst = max(worst, r["max_deviation"])
    report("AC9 Darboux charts (I-y, action-angle, gamma-pi)", worst, 1e-6)


def test_ac10_worked_example():
    J = flaschka(PhasePoint(q=np.zeros(2), p=np.zeros(2)))
    S = direct_transform(J)
    g, q0 = gammas(S)
    errs = [
        float(np.max(np.abs(S.z - [-1.0, 1.0]))),
        float(np.max(np.abs(S.rho - [0.5, 0.5]))),
        abs(g[0]),
        abs(q0 - 1.0),
        abs(analytic_bracket(S, 2.0, 3.0, ONE) - (-49.0 / 576.0)),
        abs(restricted_bracket(S, 2.0, 3.0, ONE) - (-7.0 / 576.0)),
        float(np.max(np.abs(exact_flow(S, 1, np.log(2.0)).rho - [0.2, 0.8]))),
    ]
    report("AC10 pinned two-site worked example", max(errs), 1e-12)
