"""General Heun equation: local series, hypergeometric expansions, termination.

The equation with singular points ``a1, a2, a3`` (and infinity) reads::

    u'' + (g/(z-a1) + d/(z-a2) + e/(z-a3)) u'
        + (alpha*beta*z - q) / ((z-a1)(z-a2)(z-a3)) u = 0,

with ``g + d + e = alpha + beta + 1``. The affine map
``zeta = (z - a1)/(a2 - a1)`` carries it to canonical position ``0, 1, a``
with ``a = (a3 - a1)/(a2 - a1)`` and accessory parameter
``q_c = (q - alpha*beta*a1)/(a2 - a1)``.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
from numpy.polynomial import Polynomial

from .errors import (
    CoincidentSingularities,
    IndicialDegenerate,
    NoConvergence,
    OutsideDisk,
    TerminationPrecondition,
    PreconditionPNnonzero,
    RecurrenceBreakdown,
    ValidationError,
)
from .special import gauss_2f1

FUCHS_TOL = 1e-12
GAMMA0_CHOICES = ("gamma", "alpha", "beta")


@dataclass(frozen=True)
class AffineMap:
    """``zeta = (z - shift) / scale``."""

    shift: complex
    scale: complex

    def forward(self, z):
        return (np.asarray(z) - self.shift) / self.scale

    def inverse(self, zeta):
        return self.shift + self.scale * np.asarray(zeta)


@dataclass(frozen=True)
class HeunParams:
    """Parameters of a general Heun equation in general position.

    The Fuchs relation ``gamma + delta + epsilon = alpha + beta + 1`` is
    enforced on construction.
    """

    a1: complex
    a2: complex
    a3: complex
    q: complex
    alpha: complex
    beta: complex
    gamma: complex
    delta: complex
    epsilon: complex

    def __post_init__(self):
        pts = (self.a1, self.a2, self.a3)
        for i in range(3):
            for j in range(i + 1, 3):
                if abs(complex(pts[i]) - complex(pts[j])) == 0:
                    raise CoincidentSingularities(f"singular points {pts} are not distinct")
        lhs = complex(self.gamma) + complex(self.delta) + complex(self.epsilon)
        rhs = complex(self.alpha) + complex(self.beta) + 1
        if abs(lhs - rhs) > FUCHS_TOL * max(1.0, abs(lhs), abs(rhs)):
            raise ValidationError(
                f"Fuchs relation violated: gamma+delta+epsilon - (alpha+beta+1) = {lhs - rhs}")

    @classmethod
    def canonical(cls, a, q, alpha, beta, gamma, delta, epsilon=None):
        """Build the canonical form ``0, 1, a``; ``epsilon`` defaults to the
        value fixed by the Fuchs relation."""
        if epsilon is None:
            epsilon = alpha + beta + 1 - gamma - delta
        return cls(0, 1, a, q, alpha, beta, gamma, delta, epsilon)

    @property
    def a(self) -> complex:
        """Position of the third singularity after the canonical map."""
        return (complex(self.a3) - complex(self.a1)) / (complex(self.a2) - complex(self.a1))

    @property
    def is_canonical(self) -> bool:
        return self.a1 == 0 and self.a2 == 1

    def with_q(self, q) -> "HeunParams":
        return replace(self, q=q)

    def coefficients(self, z):
        """Return ``f(z)``, ``f'(z)`` and ``g(z)`` of ``u'' + f u' + g u = 0``."""
        z = np.asarray(z, dtype=complex)
        d1, d2, d3 = z - self.a1, z - self.a2, z - self.a3
        f = self.gamma / d1 + self.delta / d2 + self.epsilon / d3
        df = -(self.gamma / d1**2 + self.delta / d2**2 + self.epsilon / d3**2)
        g = (self.alpha * self.beta * z - self.q) / (d1 * d2 * d3)
        return f, df, g

    def residual(self, z, u, du, d2u):
        """Left-hand side of the equation for supplied derivatives."""
        f, _, g = self.coefficients(z)
        return d2u + f * du + g * u


def to_canonical(p: HeunParams) -> tuple[HeunParams, AffineMap]:
    """Map ``p`` to canonical position and return the map used."""
    scale = complex(p.a2) - complex(p.a1)
    amap = AffineMap(complex(p.a1), scale)
    qc = (complex(p.q) - complex(p.alpha) * complex(p.beta) * complex(p.a1)) / scale
    cp = HeunParams(0, 1, p.a, qc, p.alpha, p.beta, p.gamma, p.delta, p.epsilon)
    return cp, amap


def _from_canonical_q(p: HeunParams, qc: complex) -> complex:
    scale = complex(p.a2) - complex(p.a1)
    return qc * scale + complex(p.alpha) * complex(p.beta) * complex(p.a1)


# -- Frobenius series about z = 0 -------------------------------------------------

def _frobenius_rpq(p: HeunParams, mu: complex):
    a, al, be = p.a, complex(p.alpha), complex(p.beta)
    g, d, e = complex(p.gamma), complex(p.delta), complex(p.epsilon)

    def R(n):
        return a * (mu + n) * (mu + n - 1 + g)

    def Qfree(n):
        return -(mu + n) * ((mu + n - 1 + g + d + e) * (1 + a) - a * e - d)

    def P(n):
        return (mu + n + al) * (mu + n + be)

    return R, Qfree, P


@dataclass(frozen=True)
class SeriesSolution:
    """Coefficients of a local series ``z**mu * sum c_n z**n``."""

    mu: complex
    coeffs: np.ndarray
    n_used: int
    tail_estimate: float


def _check_exponent(p: HeunParams, mu) -> complex:
    mu = complex(mu)
    g = complex(p.gamma)
    if abs(mu) > 1e-14 and abs(mu - (1 - g)) > 1e-12 * max(1.0, abs(g)):
        raise ValidationError(f"mu = {mu} is not an exponent at 0 (expected 0 or {1 - g})")
    return mu


def frobenius_eval(p: HeunParams, mu, z, tol: float = 1e-14, max_terms: int = 10_000):
    """Frobenius solution ``z**mu * sum c_n z**n`` of the Heun equation.

    Parameters
    ----------
    p : HeunParams
        Equation; mapped to canonical form internally, so ``z`` is in the
        original variable and the expansion is about ``p.a1``.
    mu : complex
        Exponent at the expansion point, ``0`` or ``1 - gamma``.
    z : complex or array_like
        Evaluation points, strictly inside the disk reaching the nearest
        other singularity.
    tol : float
        Relative size of the last three terms at which summation stops.

    Returns
    -------
    value : complex or ndarray
    series : SeriesSolution
    """
    cp, amap = to_canonical(p)
    mu = _check_exponent(cp, mu)
    zeta = np.asarray(amap.forward(z), dtype=complex)
    radius = min(1.0, abs(cp.a))
    if np.any(np.abs(zeta) >= radius):
        raise OutsideDisk(f"|zeta| must be < {radius}, got max {np.max(np.abs(zeta))}")
    R, Qfree, P = _frobenius_rpq(cp, mu)
    q = complex(cp.q)
    coeffs = [1.0 + 0j]
    total = np.ones_like(zeta)
    zpow = np.ones_like(zeta)
    c_prev2, c_prev = 0j, 1.0 + 0j
    small = 0
    ratios: list[float] = []
    last = np.zeros(zeta.shape)
    for n in range(1, max_terms + 1):
        rn = R(n)
        if abs(rn) < 1e-13 * max(1.0, abs(cp.a) * n * n):
            raise IndicialDegenerate(f"recurrence denominator vanishes at n = {n}")
        qn1 = Qfree(n - 1) - q
        cn = -(qn1 * c_prev + (P(n - 2) * c_prev2 if n >= 2 else 0)) / rn
        coeffs.append(cn)
        zpow = zpow * zeta
        term = cn * zpow
        total = total + term
        mag = np.abs(term)
        if np.any(last > 0):
            ratios.append(float(np.max(np.where(last > 0, mag / np.where(last > 0, last, 1), 0))))
        last = mag
        if np.all(mag <= tol * np.maximum(np.abs(total), 1e-300)):
            small += 1
            if small >= 3:
                break
        else:
            small = 0
        c_prev2, c_prev = c_prev, cn
    else:
        raise NoConvergence(f"Frobenius series not converged after {max_terms} terms")
    rbar = float(np.mean(ratios[-3:])) if ratios else 0.0
    tail = float(np.max(last)) * rbar / (1 - rbar) if rbar < 1 else float("inf")
    value = total if mu == 0 else total * zeta**mu
    series = SeriesSolution(mu, np.array(coeffs), len(coeffs), tail)
    if np.ndim(z) == 0:
        value = complex(value)
    return value, series


def frobenius_derivative(p: HeunParams, series: SeriesSolution, z):
    """First and second derivatives in ``z`` of a Frobenius solution with
    ``mu = 0`` from its coefficients."""
    cp, amap = to_canonical(p)
    zeta = np.asarray(amap.forward(z), dtype=complex)
    c = series.coeffs
    n = np.arange(len(c))
    d1 = np.polynomial.polynomial.polyval(zeta, c[1:] * n[1:])
    d2 = np.polynomial.polynomial.polyval(zeta, c[2:] * n[2:] * (n[2:] - 1))
    return d1 / amap.scale, d2 / amap.scale**2


# -- continuation by re-expansion at regular points -----------------------------

def _canonical_polys(cp: HeunParams):
    """``Pi``, ``S`` and ``W`` with ``Pi u'' + S u' + W u = 0`` in canonical
    position, as ascending coefficient arrays in ``zeta``."""
    a = complex(cp.a)
    Pi = Polynomial([0, 1]) * Polynomial([-1, 1]) * Polynomial([-a, 1])
    S = (cp.gamma * Polynomial([-1, 1]) * Polynomial([-a, 1])
         + cp.delta * Polynomial([0, 1]) * Polynomial([-a, 1])
         + cp.epsilon * Polynomial([0, 1]) * Polynomial([-1, 1]))
    W = Polynomial([-cp.q, cp.alpha * cp.beta])
    return Pi, S, W


def _taylor_step(polys, zc, u, du, t, tol: float, max_terms: int):
    """Advance ``(u, u')`` from ``zc`` to ``zc + t`` with the Taylor series
    of the equation at the regular points ``zc`` (arrays)."""
    Pi, S, W = polys
    p = [Pi(zc), Pi.deriv(1)(zc), Pi.deriv(2)(zc) / 2, np.ones_like(zc)]
    s = [S(zc), S.deriv(1)(zc), S.deriv(2)(zc) / 2 * np.ones_like(zc)]
    w = [W(zc), W.deriv(1)(zc) * np.ones_like(zc)]
    h_prev, h0, h1 = np.zeros_like(u), u, du
    val = h0 + h1 * t
    der = h1.copy()
    tpow = t.copy()
    small = 0
    for n in range(max_terms):
        h2 = -((p[1] * (n + 1) * n + s[0] * (n + 1)) * h1
               + (p[2] * n * (n - 1) + s[1] * n + w[0]) * h0
               + (p[3] * (n - 1) * (n - 2) + s[2] * (n - 1) + w[1]) * h_prev) / (p[0] * (n + 2) * (n + 1))
        der = der + (n + 2) * h2 * tpow
        tpow = tpow * t
        term = h2 * tpow
        val = val + term
        if np.all(np.abs(term) <= tol * np.maximum(np.abs(val), 1e-300)):
            small += 1
            if small >= 2:
                return val, der
        else:
            small = 0
        h_prev, h0, h1 = h0, h1, h2
    raise NoConvergence("Taylor re-expansion did not converge")


def heun_continue(cp: HeunParams, zeta0, u0, du0, zeta1, tol: float = 1e-15,
                  max_terms: int = 400):
    """Carry a solution of the canonical equation from ``zeta0`` to ``zeta1``
    along straight segments avoiding no singular point.

    Each step is kept below half the distance to the nearest singular
    point and below the inverse local wavenumber, so the Taylor sums do
    not cancel.

    Returns
    -------
    u, du : ndarray
        Value and ``zeta``-derivative at ``zeta1``.
    """
    zeta0 = np.asarray(zeta0, dtype=complex)
    zeta1 = np.asarray(zeta1, dtype=complex)
    polys = _canonical_polys(cp)
    Pi, S, W = polys
    sing = np.array([0, 1, complex(cp.a)])
    frac = np.linspace(0, 1, 33)[:, None]
    path = zeta0 + frac * (zeta1 - zeta0)
    dist = np.min(np.abs(path[..., None] - sing), axis=-1)
    if np.any(dist == 0):
        raise OutsideDisk("continuation path meets a singular point")
    pv = Pi(path)
    k = np.sqrt(np.abs(W(path) / pv)) + np.abs(S(path) / pv)
    allowed = np.min(np.minimum(0.5 * dist, 1.0 / np.maximum(k, 1e-300)), axis=0)
    steps = int(np.max(np.ceil(np.abs(zeta1 - zeta0) / allowed))) if zeta0.size else 0
    u = np.asarray(u0, dtype=complex).copy()
    du = np.asarray(du0, dtype=complex).copy()
    t = (zeta1 - zeta0) / max(steps, 1)
    zc = zeta0.copy()
    for _ in range(steps):
        u, du = _taylor_step(polys, zc, u, du, t, tol, max_terms)
        zc = zc + t
    return u, du


def heun_eval(p: HeunParams, z, tol: float = 1e-14, max_loss: float = 10.0):
    """Analytic solution ``H`` with ``H(a1) = 1`` at points of the disk
    about ``a1``.

    The Frobenius sum is used where its terms exceed the result by less
    than ``max_loss``; elsewhere the sum is taken at a nearer point of the
    same ray and the solution is carried outward by ``heun_continue``.
    """
    cp, amap = to_canonical(p)
    val, series = frobenius_eval(p, 0, z, tol=tol)
    c = series.coeffs
    zeta = np.atleast_1d(np.asarray(amap.forward(z), dtype=complex))
    out = np.atleast_1d(np.asarray(val, dtype=complex)).copy()
    absc = np.abs(c)
    P = np.polynomial.polynomial

    def loss(w):
        return P.polyval(np.abs(w), absc) / np.maximum(np.abs(P.polyval(w, c)), 1e-300)

    bad = loss(zeta) > max_loss
    if np.any(bad):
        zb = zeta[bad]
        start = np.zeros_like(zb)
        pending = np.ones(zb.shape, dtype=bool)
        for shrink in 0.85 ** np.arange(1, 120):
            cand = zb * shrink
            ok = pending & (loss(cand) <= max_loss)
            start[ok] = cand[ok]
            pending &= ~ok
            if not pending.any():
                break
        u0 = P.polyval(start, c)
        du0 = P.polyval(start, c[1:] * np.arange(1, len(c)))
        u, _ = heun_continue(cp, start, u0, du0, zb, tol=min(tol, 1e-15))
        out[bad] = u
    out = out.reshape(np.shape(z))
    return out if out.ndim else complex(out)


# -- expansion in hypergeometric functions ---------------------------------------

def _nonpos_integer(w: complex) -> bool:
    return abs(w.imag) < 1e-13 and abs(w.real - round(w.real)) < 1e-13 and round(w.real) <= 0


def _gamma0_value(p: HeunParams, gamma0: str) -> complex:
    if gamma0 not in GAMMA0_CHOICES:
        raise ValidationError(f"gamma0 must be one of {GAMMA0_CHOICES}, got {gamma0!r}")
    return complex(getattr(p, gamma0))


def _hypexp_rpq(p: HeunParams, g0: complex):
    a, al, be = p.a, complex(p.alpha), complex(p.beta)
    g, e = complex(p.gamma), complex(p.epsilon)

    def R(n):
        return a * (g - g0 + n) * (al - g0 + n) * (be - g0 + n) / (g0 - n)

    def Qfree(n):
        return ((1 - a) * (e + g - g0 + n) * (g0 - n - 1)
                + a * (g - g0 + n) * (al + be - g0 + n) + al * be * a)

    def P(n):
        return (a - 1) * (e + g - g0 + n) * (g0 - n - 1)

    return R, Qfree, P


@dataclass(frozen=True)
class HypergeometricExpansion:
    """Coefficients of ``sum c_n 2F1(alpha, beta; gamma0 - n; z)``."""

    gamma0: str
    gamma0_value: complex
    coeffs: np.ndarray
    n_terms: int
    defect: float


def hypergeometric_expansion(p: HeunParams, gamma0: str = "gamma", tol: float = 1e-14,
                             max_terms: int = 2000) -> HypergeometricExpansion:
    """Coefficients of the expansion of a canonical Heun solution in
    ``2F1(alpha, beta; gamma0 - n; z)``.

    Summation stops at ``N`` once both boundary terms of the truncation
    defect, ``R_{N+1} c_{N+1}`` and ``P_N c_N``, fall below ``tol`` times
    the largest recurrence term seen. The defect of a truncated sum is
    ``-R_{N+1} c_{N+1} F_N + P_N c_N F_{N+1}``, so a sum that never meets
    this test does not converge to a solution and ``NoConvergence`` is
    raised. In practice this happens unless the expansion terminates.
    """
    cp, _ = to_canonical(p)
    g0 = _gamma0_value(cp, gamma0)
    if _nonpos_integer(g0):
        raise RecurrenceBreakdown(f"gamma0 = {g0} is a non-positive integer")
    R, Qfree, P = _hypexp_rpq(cp, g0)
    q = complex(cp.q)
    coeffs = [1.0 + 0j]
    ref = abs(Qfree(0) - q)
    c_prev2, c_prev = 0j, 1.0 + 0j
    for n in range(1, max_terms + 1):
        # R_n c_n follows from the recurrence without dividing by R_n
        qterm = (Qfree(n - 1) - q) * c_prev
        rc = -(qterm + (P(n - 2) * c_prev2 if n >= 2 else 0))
        ref = max(ref, abs(rc), abs(qterm))
        defect = max(abs(rc), abs(P(n - 1) * c_prev))
        if defect <= tol * ref:
            return HypergeometricExpansion(gamma0, g0, np.array(coeffs), len(coeffs),
                                           defect / ref if ref else 0.0)
        if _nonpos_integer(g0 - n):
            raise RecurrenceBreakdown(f"gamma0 - n is a non-positive integer at n = {n}")
        rn = R(n)
        if abs(rn) < 1e-300:
            raise RecurrenceBreakdown(f"R_{n} vanishes")
        cn = rc / rn
        coeffs.append(cn)
        c_prev2, c_prev = c_prev, cn
    raise NoConvergence(
        "hypergeometric expansion does not terminate: the truncation defect "
        f"stays above tol after {max_terms} terms")


def hypergeometric_expansion_eval(p: HeunParams, gamma0: str, z, tol: float = 1e-14,
                                  normalize: bool = True, side: int = 1):
    """Evaluate the terminating hypergeometric expansion at ``z``.

    ``z`` is in the original variable of ``p``. With ``normalize`` the sum
    is scaled to equal 1 at ``p.a1``. ``side`` selects the limit used for
    canonical arguments on the cut ``[1, inf)``.
    """
    cp, amap = to_canonical(p)
    exp = hypergeometric_expansion(p, gamma0, tol)
    al, be, g0 = complex(cp.alpha), complex(cp.beta), exp.gamma0_value
    zeta = np.atleast_1d(np.asarray(amap.forward(z), dtype=complex))
    out = np.empty(zeta.shape, dtype=complex)
    for i, w in enumerate(zeta.flat):
        out.flat[i] = sum(c * gauss_2f1(al, be, g0 - n, w, tol=1e-15, side=side)
                          for n, c in enumerate(exp.coeffs))
    if normalize:
        norm = complex(np.sum(exp.coeffs))
        if abs(norm) < 1e-300:
            raise NoConvergence("expansion vanishes at the expansion point; cannot normalize")
        out = out / norm
    return complex(out[0]) if np.ndim(z) == 0 else out.reshape(np.shape(z))


# -- termination -------------------------------------------------------------------

@dataclass(frozen=True)
class TerminationRoot:
    """An accessory parameter for which a series terminates.

    ``q`` is in the convention of the equation passed in, ``q_canonical``
    after the canonical map; ``coeffs`` are ``c_0..c_N`` at that root.
    """

    q: complex
    q_canonical: complex
    coeffs: np.ndarray


def _continuant(R: Callable, Qfree: Callable, P: Callable, N: int, q: complex):
    """Value and q-derivative of the termination determinant, plus the
    coefficient vector, by running the recurrence at numeric ``q``."""
    c = [1.0 + 0j]
    dc = [0j]
    for n in range(1, N + 1):
        qn = Qfree(n - 1) - q
        pn = P(n - 2) if n >= 2 else 0
        cm2 = c[n - 2] if n >= 2 else 0
        dcm2 = dc[n - 2] if n >= 2 else 0
        rn = R(n)
        c.append(-(qn * c[n - 1] + pn * cm2) / rn)
        dc.append(-(qn * dc[n - 1] - c[n - 1] + pn * dcm2) / rn)
    qn = Qfree(N) - q
    pn = P(N - 1) if N >= 1 else 0
    f = qn * c[N] + pn * (c[N - 1] if N >= 1 else 0)
    df = qn * dc[N] - c[N] + pn * (dc[N - 1] if N >= 1 else 0)
    return f, df, np.array(c)


def _termination_roots(R, Qfree, P, N: int) -> list[tuple[complex, np.ndarray]]:
    qv = Polynomial([0, 1])
    polys = [Polynomial([1.0 + 0j])]
    for n in range(1, N + 1):
        nxt = (Qfree(n - 1) - qv) * polys[n - 1]
        if n >= 2:
            nxt = nxt + P(n - 2) * polys[n - 2]
        polys.append(-nxt / R(n))
    det = (Qfree(N) - qv) * polys[N]
    if N >= 1:
        det = det + P(N - 1) * polys[N - 1]
    roots = det.roots() if N >= 1 else np.array([Qfree(0)])
    out = []
    for r in np.atleast_1d(roots):
        r = complex(r)
        for _ in range(20):
            f, df, _c = _continuant(R, Qfree, P, N, r)
            if df == 0:
                break
            step = f / df
            r -= step
            if abs(step) <= 1e-15 * max(1.0, abs(r)):
                break
        _, _, coeffs = _continuant(R, Qfree, P, N, r)
        out.append((r, coeffs))
    return out


def frobenius_termination(p: HeunParams, mu, N: int) -> list[TerminationRoot]:
    """Accessory parameters that truncate the Frobenius series to degree ``N``.

    Requires ``mu + alpha = -N`` or ``mu + beta = -N``, so that ``P_N``
    vanishes; the ``N + 1`` roots of the tridiagonal determinant are
    returned.
    """
    if int(N) != N or N < 0:
        raise ValidationError(f"N must be a non-negative integer, got {N}")
    N = int(N)
    cp, _ = to_canonical(p)
    mu = _check_exponent(cp, mu)
    R, Qfree, P = _frobenius_rpq(cp, mu)
    if abs(P(N)) > 1e-10 * max(1.0, abs(mu + N) ** 2):
        raise PreconditionPNnonzero(
            f"P_N = {P(N)} is nonzero: need mu + alpha = -N or mu + beta = -N")
    return [TerminationRoot(_from_canonical_q(p, qc), qc, c)
            for qc, c in _termination_roots(R, Qfree, P, N)]


def hypergeom_termination(p: HeunParams, gamma0: str, N: int) -> list[TerminationRoot]:
    """Accessory parameters that truncate the hypergeometric expansion.

    Requires ``epsilon + gamma - gamma0 = -N`` so that ``P_N`` vanishes.
    """
    if int(N) != N or N < 0:
        raise ValidationError(f"N must be a non-negative integer, got {N}")
    N = int(N)
    cp, _ = to_canonical(p)
    g0 = _gamma0_value(cp, gamma0)
    lhs = complex(cp.epsilon) + complex(cp.gamma) - g0
    if abs(lhs + N) > 1e-10 * max(1.0, N):
        raise TerminationPrecondition(f"epsilon + gamma - gamma0 = {lhs}, expected {-N}")
    R, Qfree, P = _hypexp_rpq(cp, g0)
    return [TerminationRoot(_from_canonical_q(p, qc), qc, c)
            for qc, c in _termination_roots(R, Qfree, P, N)]
