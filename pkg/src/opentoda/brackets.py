"""Poisson structures in the three coordinate charts, evaluable as
antisymmetric tensors at a state, plus the generic verification machinery
(Jacobi residual, pushforward, Casimir test, Dirac reduction).

Flat state layouts:
  QP    x = (q_0..q_{N-1}, p_0..p_{N-1})          dimension 2N
  CV    x = (v_0..v_{N-1}, c_0..c_{N-2})          dimension 2N-1
  ZRHO  x = (z_0..z_{N-1}, rho_0..rho_{N-1})      dimension 2N

Every tensor is assembled by filling one orientation of each coordinate pair
and antisymmetrizing, so antisymmetry is exact by construction.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import (
    CoincidentPoints,
    CoincidentPoles,
    ConstraintBracketNotUnit,
    DomainViolation,
)
from .spectral import weyl_eval

# central-difference step scale: machine epsilon to the one-third power
FD_STEP = 2.220446049250313e-16 ** (1.0 / 3.0)


@dataclass(frozen=True)
class Chart:
    name: str
    dimension: int


def qp_chart(n):
    return Chart("QP", 2 * n)


def cv_chart(n):
    return Chart("CV", 2 * n - 1)


def zrho_chart(n):
    return Chart("ZRHO", 2 * n)


def cv_pack(J):
    """Flatten a Jacobi matrix into the CV state vector."""
    return np.concatenate([J.v, J.c])


def cv_unpack(x, n):
    return np.asarray(x[:n]), np.asarray(x[n:])


def zrho_pack(S):
    return np.concatenate([S.z, S.rho])


def zrho_unpack(x, n):
    return np.asarray(x[:n]), np.asarray(x[n:])


class WeightFn:
    """The weight f(z) parametrizing a bracket family.

    Either a nonnegative power of z or a user-supplied entire function; the
    power forms carry closed-form antiderivatives F with F'(z) = 1/f(z),
    used by the action coordinates and the constraint functions.
    """

    __slots__ = ("kind", "power_n", "_fn", "_F")

    def __init__(self, kind, power_n=None, fn=None, F=None):
        self.kind = kind
        self.power_n = power_n
        self._fn = fn
        self._F = F

    @classmethod
    def power(cls, n):
        if n < 0:
            raise DomainViolation("power must be >= 0")
        return cls("power", power_n=int(n))

    @classmethod
    def custom(cls, fn, antiderivative=None):
        return cls("custom", fn=fn, F=antiderivative)

    def __call__(self, z):
        if self.kind == "power":
            return np.asarray(z) ** self.power_n if self.power_n else np.ones_like(np.asarray(z, dtype=float))
        return self._fn(z)

    def antiderivative(self, z):
        """F(z) with F' = 1/f.

        For f = z^n with n >= 1 the domain is z > 0; the integration constant
        is a gauge with no effect on any bracket.
        """
        z = np.asarray(z, dtype=float)
        if self.kind == "custom":
            if self._F is None:
                raise DomainViolation("custom weight has no antiderivative attached")
            return self._F(z)
        n = self.power_n
        if n == 0:
            return z + 0.0
        if np.any(z <= 0):
            raise DomainViolation("antiderivative of 1/z^n needs z > 0")
        if n == 1:
            return np.log(z)
        return -1.0 / ((n - 1) * z ** (n - 1))

    @property
    def label(self):
        if self.kind == "power":
            return "1" if self.power_n == 0 else ("z" if self.power_n == 1 else f"z^{self.power_n}")
        return "custom"

    def __repr__(self):
        return f"WeightFn({self.label})"


class Observable:
    """Scalar function of a flat state, with gradient (analytic or FD)."""

    __slots__ = ("_fn", "_grad")

    def __init__(self, fn, grad=None):
        self._fn = fn
        self._grad = grad

    def value(self, x):
        return self._fn(np.asarray(x, dtype=float))

    def gradient(self, x):
        x = np.asarray(x, dtype=float)
        if self._grad is not None:
            return np.asarray(self._grad(x), dtype=float)
        return fd_gradient(self._fn, x)


@dataclass(frozen=True)
class PoissonStructure:
    """A chart tag plus an antisymmetric tensor-valued function of the state."""

    chart: Chart
    name: str
    tensor_fn: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    f: Optional[WeightFn] = None
    restricted: bool = False

    def tensor(self, x):
        return self.tensor_fn(np.asarray(x, dtype=float))

    def bracket(self, obs1, obs2, x):
        """{obs1, obs2} at x via gradients against the tensor."""
        x = np.asarray(x, dtype=float)
        return float(obs1.gradient(x) @ self.tensor(x) @ obs2.gradient(x))


# ---------------------------------------------------------------------------
# finite differences

def fd_gradient(fn, x, step=FD_STEP):
    x = np.asarray(x, dtype=float)
    g = np.empty(x.size)
    for l in range(x.size):
        h = step * (1.0 + abs(x[l]))
        xp = x.copy()
        xm = x.copy()
        xp[l] += h
        xm[l] -= h
        g[l] = (fn(xp) - fn(xm)) / (2.0 * h)
    return g


def fd_jacobian(fn, x):
    x = np.asarray(x, dtype=float)
    y0 = np.asarray(fn(x), dtype=float)
    J = np.empty((y0.size, x.size))
    for l in range(x.size):
        h = FD_STEP * (1.0 + abs(x[l]))
        xp = x.copy()
        xm = x.copy()
        xp[l] += h
        xm[l] -= h
        J[:, l] = (np.asarray(fn(xp), dtype=float) - np.asarray(fn(xm), dtype=float)) / (2.0 * h)
    return J


# ---------------------------------------------------------------------------
# closed-form tensors in the q-p and c-v charts

def pi0_qp(n):
    """Canonical bracket: {q_k, p_k} = 1, everything else zero."""
    d = 2 * n
    M = np.zeros((d, d))
    for k in range(n):
        M[k, n + k] = 1.0
    T = M - M.T

    def tensor(x):
        return T.copy()

    return PoissonStructure(chart=qp_chart(n), name="pi0_qp", tensor_fn=tensor)


def pi0_cv(n):
    """Image of the canonical bracket under the Flaschka map:
    {c_k, v_k} = -c_k/2, {c_k, v_{k+1}} = +c_k/2."""
    if n < 2:
        raise DomainViolation("need N >= 2 in the c-v chart")
    d = 2 * n - 1

    def tensor(x):
        v, c = cv_unpack(x, n)
        M = np.zeros((d, d))
        for k in range(n - 1):
            M[n + k, k] = -0.5 * c[k]
            M[n + k, k + 1] = 0.5 * c[k]
        return M - M.T

    return PoissonStructure(chart=cv_chart(n), name="pi0_cv", tensor_fn=tensor)


def pi1_cv(n):
    """Quadratic bracket of the hierarchy, normalized so that pairing with
    tr L generates the first Toda flow exactly:
    {c_k, c_{k+1}} = c_k c_{k+1}/4, {c_k, v_k} = -c_k v_k/2,
    {c_k, v_{k+1}} = c_k v_{k+1}/2, {v_k, v_{k+1}} = c_k^2."""
    if n < 2:
        raise DomainViolation("need N >= 2 in the c-v chart")
    d = 2 * n - 1

    def tensor(x):
        v, c = cv_unpack(x, n)
        M = np.zeros((d, d))
        for k in range(n - 1):
            M[n + k, k] = -0.5 * c[k] * v[k]
            M[n + k, k + 1] = 0.5 * c[k] * v[k + 1]
            M[k, k + 1] = c[k] ** 2
            if k + 1 < n - 1:
                M[n + k, n + k + 1] = 0.25 * c[k] * c[k + 1]
        return M - M.T

    return PoissonStructure(chart=cv_chart(n), name="pi1_cv", tensor_fn=tensor)


def pi2_cv(n):
    """Cubic bracket of the hierarchy, normalized like pi1_cv:
    {c_k, c_{k+1}} = c_k c_{k+1} v_{k+1}/2,
    {c_k, v_k} = -(c_k v_k^2 + c_k^3)/2,
    {c_k, v_{k+1}} = (c_k v_{k+1}^2 + c_k^3)/2,
    {c_k, v_{k+2}} = c_k c_{k+1}^2/2, {c_{k+1}, v_k} = -c_k^2 c_{k+1}/2,
    {v_k, v_{k+1}} = c_k^2 (v_k + v_{k+1})."""
    if n < 2:
        raise DomainViolation("need N >= 2 in the c-v chart")
    d = 2 * n - 1

    def tensor(x):
        v, c = cv_unpack(x, n)
        M = np.zeros((d, d))
        for k in range(n - 1):
            M[n + k, k] = -0.5 * (c[k] * v[k] ** 2 + c[k] ** 3)
            M[n + k, k + 1] = 0.5 * (c[k] * v[k + 1] ** 2 + c[k] ** 3)
            M[k, k + 1] = c[k] ** 2 * (v[k] + v[k + 1])
            if k + 1 < n - 1:
                M[n + k, n + k + 1] = 0.5 * c[k] * c[k + 1] * v[k + 1]
            if k + 2 <= n - 1:
                M[n + k, k + 2] = 0.5 * c[k] * c[k + 1] ** 2
            if k + 1 <= n - 2:
                M[n + k + 1, k] = -0.5 * c[k] ** 2 * c[k + 1]
        return M - M.T

    return PoissonStructure(chart=cv_chart(n), name="pi2_cv", tensor_fn=tensor)


# ---------------------------------------------------------------------------
# contour bracket as residue sums

def _check_points(S, p, q):
    if p == q:
        raise CoincidentPoints("p and q must be distinct")
    if np.any(S.z == p) or np.any(S.z == q):
        raise CoincidentPoints("p and q must avoid the poles")


def bracket_terms(S, p, q, f, restricted=False):
    """Per-pole contributions to the contour bracket at (p, q).

    Each term is the clockwise residue at one pole; summing them gives the
    bracket. The restricted variant subtracts the third-kind-differential
    correction weighted by chi(p)chi(q)/q0.
    """
    _check_points(S, p, q)
    chi_p = weyl_eval(S, p)
    chi_q = weyl_eval(S, q)
    fz = f(S.z)
    terms = S.rho * fz * (chi_p - chi_q) / ((S.z - p) * (S.z - q))
    if restricted:
        q0 = float(np.sum(S.rho))
        corr = S.rho * fz * (1.0 / (S.z - p) - 1.0 / (S.z - q)) * chi_p * chi_q / q0
        terms = terms - corr
    return terms


def analytic_bracket(S, p, q, f):
    """{chi(p), chi(q)} for the weight f as a sum of clockwise residues."""
    return np.sum(bracket_terms(S, p, q, f, restricted=False))


def restricted_bracket(S, p, q, f):
    """The bracket restricted to the normalized class, as residue sums of the
    corrected differential."""
    return np.sum(bracket_terms(S, p, q, f, restricted=True))


def closed_form_bracket(S, p, q, f, restricted=False):
    """Quadratic-algebra closed forms, available for f = 1 and f = z.

    Unrestricted: f=1 gives (chi(p)-chi(q))^2/(p-q); f=z gives
    (p chi(p) - q chi(q))(chi(p)-chi(q))/(p-q). The restricted forms replace
    the second factor by (chi(p)-chi(q))/(p-q) - chi(p)chi(q)/q0.
    """
    if f.kind != "power" or f.power_n not in (0, 1):
        raise DomainViolation("closed forms exist for f = 1 and f = z only")
    _check_points(S, p, q)
    chi_p = weyl_eval(S, p)
    chi_q = weyl_eval(S, q)
    lead = (chi_p - chi_q) if f.power_n == 0 else (p * chi_p - q * chi_q)
    second = (chi_p - chi_q) / (p - q)
    if restricted:
        second = second - chi_p * chi_q / float(np.sum(S.rho))
    return lead * second


# ---------------------------------------------------------------------------
# z-rho tensors

def _pairwise_dz(z):
    dz = z[None, :] - z[:, None]
    off = ~np.eye(z.size, dtype=bool)
    if z.size > 1 and np.any(dz[off] == 0):
        raise CoincidentPoles("tensor needs distinct poles")
    return dz


def zrho_tensor(f, n):
    """Unrestricted bracket in z-rho coordinates:
    {rho_k, z_n} = rho_k f(z_n) delta, {z, z} = 0,
    {rho_k, rho_m} = (f(z_k)+f(z_m)) rho_k rho_m/(z_m - z_k) off-diagonal."""

    def tensor(x):
        z, rho = zrho_unpack(x, n)
        dz = _pairwise_dz(z)
        fz = np.asarray(f(z), dtype=float)
        M = np.zeros((2 * n, 2 * n))
        M[n + np.arange(n), np.arange(n)] = rho * fz
        with np.errstate(divide="ignore", invalid="ignore"):
            B = (fz[:, None] + fz[None, :]) * np.outer(rho, rho) / dz
        B[np.eye(n, dtype=bool)] = 0.0
        M[n:, n:] = np.triu(B, 1)
        return M - M.T

    return PoissonStructure(chart=zrho_chart(n), name="zrho", tensor_fn=tensor, f=f)


def zrho_restricted_tensor(f, n):
    """Bracket restricted to the normalized class, in z-rho coordinates.

    The z-z block stays zero; the rho-z block picks up -f(z_m) rho_k rho_m/q0,
    and the rho-rho block the antisymmetric correction built from the row sums
    S_k = sum_{m != k} (f(z_k)+f(z_m)) rho_m/(z_m - z_k):
    {rho_k, rho_m}' = {rho_k, rho_m} + rho_k rho_m (S_m - S_k)/q0.
    This is exactly the Dirac reduction of zrho_tensor by the constraint pair
    (action_sum, neg_log_mass), in closed form.
    """

    def tensor(x):
        z, rho = zrho_unpack(x, n)
        dz = _pairwise_dz(z)
        fz = np.asarray(f(z), dtype=float)
        q0 = float(np.sum(rho))
        M = np.zeros((2 * n, 2 * n))
        M[n:, :n] = np.diag(rho * fz) - np.outer(rho, rho * fz) / q0
        fsum = fz[:, None] + fz[None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            B = fsum * np.outer(rho, rho) / dz
            G = fsum * rho[None, :] / dz
        eye = np.eye(n, dtype=bool)
        B[eye] = 0.0
        G[eye] = 0.0
        Srow = G.sum(axis=1)
        B = B + np.outer(rho, rho) * (Srow[None, :] - Srow[:, None]) / q0
        M[n:, n:] = np.triu(B, 1)
        return M - M.T

    return PoissonStructure(
        chart=zrho_chart(n), name="zrho_restricted", tensor_fn=tensor, f=f, restricted=True
    )


# ---------------------------------------------------------------------------
# constraints and Dirac reduction

def action_sum(f, n):
    """Observable sum_k F(z_k) on the z-rho chart, F' = 1/f."""

    def value(x):
        z, _ = zrho_unpack(x, n)
        return float(np.sum(f.antiderivative(z)))

    def grad(x):
        z, _ = zrho_unpack(x, n)
        g = np.zeros(2 * n)
        g[:n] = 1.0 / np.asarray(f(z), dtype=float)
        return g

    return Observable(value, grad)


def neg_log_mass(n):
    """Observable -log(sum rho) on the z-rho chart; vanishes on normalized data."""

    def value(x):
        _, rho = zrho_unpack(x, n)
        return -float(np.log(np.sum(rho)))

    def grad(x):
        _, rho = zrho_unpack(x, n)
        g = np.zeros(2 * n)
        g[n:] = -1.0 / float(np.sum(rho))
        return g

    return Observable(value, grad)


def dirac_restrict(base, phi1, phi2, tol=1e-8):
    """Dirac reduction of a Poisson structure by a second-class pair.

    {F, G}' = {F, G} + ({Phi2, G}{F, Phi1} - {Phi1, G}{F, Phi2})/{Phi1, Phi2},
    realized on tensors as T + (w u^T - u w^T)/c with u = T grad(Phi1),
    w = T grad(Phi2), c = {Phi1, Phi2}. Raises ConstraintBracketNotUnit when
    |c - 1| > tol at the evaluation state.
    """

    def tensor(x):
        T = base.tensor(x)
        g1 = phi1.gradient(x)
        g2 = phi2.gradient(x)
        u = T @ g1
        w = T @ g2
        c = float(g1 @ w)
        if abs(c - 1.0) > tol:
            raise ConstraintBracketNotUnit(f"{{Phi1, Phi2}} = {c!r}")
        return T + (np.outer(w, u) - np.outer(u, w)) / c

    return PoissonStructure(
        chart=base.chart,
        name=base.name + "_dirac",
        tensor_fn=tensor,
        f=base.f,
        restricted=True,
    )


# ---------------------------------------------------------------------------
# verification machinery

def jacobi_residual(P, state, triples=None):
    """Largest cyclic-sum residual of the Jacobi identity at a state.

    Central finite differences for the tensor derivatives; the residual
    R_ijk = sum_cyc sum_l (d pi_ij/dx_l) pi_lk vanishes for a true Poisson
    tensor up to FD noise (~1e-8 at unit scale). Returns the max over the
    given index triples, or over all when triples is None.
    """
    x = np.asarray(state, dtype=float)
    d = x.size
    T0 = P.tensor(x)
    dT = np.empty((d, d, d))
    for l in range(d):
        h = FD_STEP * (1.0 + abs(x[l]))
        xp = x.copy()
        xm = x.copy()
        xp[l] += h
        xm[l] -= h
        dT[l] = (P.tensor(xp) - P.tensor(xm)) / (2.0 * h)
    A = np.einsum("lij,lk->ijk", dT, T0)
    R = A + A.transpose(1, 2, 0) + A.transpose(2, 0, 1)
    if triples is None:
        return float(np.max(np.abs(R)))
    return float(max(abs(R[i, j, k]) for (i, j, k) in triples))


def pushforward(P, map_fn, state):
    """Tensor of P pushed through a differentiable chart map at a state.

    J pi J^T with the Jacobian J of map_fn by central differences; the result
    lives at map_fn(state) in the target chart.
    """
    J = fd_jacobian(map_fn, state)
    return J @ P.tensor(state) @ J.T


def casimir_residual(P, phi, state):
    """Max-norm of the tensor applied to the gradient of a candidate Casimir."""
    x = np.asarray(state, dtype=float)
    return float(np.max(np.abs(P.tensor(x) @ phi.gradient(x))))
