"""Gauss hypergeometric function and Jacobi elliptic sine.

``gauss_2f1`` sums the Maclaurin series when ``|z| <= 0.8`` and otherwise
maps ``z`` by one of the standard linear transformations (Pfaff,
``1 - z``, ``1/z``, ``1/(1 - z)``, ``1 - 1/z``), picking the one with the
smallest transformed argument whose connection coefficients are finite.
Arguments on the cut ``[1, inf)`` need an explicit side of approach.

``jacobi_sn`` uses the descending Landen (AGM) scheme in the *parameter*
convention, ``sn(u | 0) = sin u`` and ``sn(u | 1) = tanh u``.
"""
from __future__ import annotations

import cmath
import math

import numpy as np
from scipy.special import gamma as _gamma
from scipy.special import rgamma as _rgamma

from .errors import ArgumentOnCut, NoConvergence, ParameterOutOfRange, PoleAtGamma

MAX_TERMS = 10_000
SERIES_RADIUS = 0.8
# transformed arguments beyond this modulus converge too slowly to be useful
MAX_TRANSFORMED_RADIUS = 0.975
# connection coefficients lose ~log10(1/dist) digits near integer differences
DEGENERATE_EPS = 1e-6


def _near_int(x: complex, eps: float = 1e-12) -> bool:
    return abs(x.imag) < eps and abs(x.real - round(x.real)) < eps


def _nonpos_int(x: complex) -> bool:
    return _near_int(x) and round(x.real) <= 0


def _degenerate(x: complex) -> bool:
    return abs(x.imag) < DEGENERATE_EPS and abs(x.real - round(x.real)) < DEGENERATE_EPS


def hyp2f1_series(a, b, c, z, tol=1e-15, max_terms=MAX_TERMS) -> complex:
    """Plain Maclaurin sum of 2F1.

    Stops once three consecutive terms are each below ``tol * |sum|`` or
    the series terminates.
    """
    a, b, c, z = complex(a), complex(b), complex(c), complex(z)
    if _nonpos_int(c) and not _terminates_before(a, b, c):
        raise PoleAtGamma(f"c = {c} is a non-positive integer")
    s = t = 1.0 + 0j
    small = 0
    for k in range(max_terms):
        t *= (a + k) * (b + k) / ((c + k) * (k + 1)) * z
        s += t
        if t == 0:
            return s
        if abs(t) <= tol * abs(s):
            small += 1
            if small == 3:
                return s
        else:
            small = 0
    raise NoConvergence(f"2F1 series did not converge in {max_terms} terms (z = {z})")


def _polynomial(a, b, c, z) -> complex:
    """Terminating 2F1: the sum up to the first vanishing numerator."""
    degree = min(-round(p.real) for p in (a, b) if _nonpos_int(p))
    s = t = 1.0 + 0j
    for k in range(degree):
        t *= (a + k) * (b + k) / ((c + k) * (k + 1)) * z
        s += t
    return s


def _terminates_before(a, b, c) -> bool:
    # numerator hits zero strictly before the denominator does
    nc = -round(c.real)
    for p in (a, b):
        if _nonpos_int(p) and -round(p.real) < nc:
            return True
    return False


def _cpow(base: complex, s: complex, side: int) -> complex:
    """``base**s`` on the principal branch.

    A negative real ``base`` is read as the limit from below the real axis
    when ``side = +1`` (which is what ``-z`` and ``1 - z`` become when ``z``
    approaches the cut from above) and from above when ``side = -1``.
    """
    if base.imag == 0 and base.real < 0 and side:
        return cmath.exp(s * complex(math.log(-base.real), -math.pi * side))
    return cmath.exp(s * cmath.log(base))


def _pfaff(a, b, c, z, tol, side):
    w = z / (z - 1)
    return _cpow(1 - z, -a, side) * hyp2f1_series(a, c - b, c, w, tol)


def _one_minus_z(a, b, c, z, tol, side, w=None):
    s = c - a - b
    if _degenerate(s):
        return None
    if w is None:
        w = 1 - z
    g = _gamma(c)
    t1 = g * _gamma(s) * _rgamma(c - a) * _rgamma(c - b)
    t2 = g * _gamma(-s) * _rgamma(a) * _rgamma(b)
    out = t1 * hyp2f1_series(a, b, 1 - s, w, tol) if t1 != 0 else 0
    if t2 != 0:
        out += t2 * _cpow(w, s, side) * hyp2f1_series(c - a, c - b, s + 1, w, tol)
    return out


def _inverse_z(a, b, c, z, tol, side):
    if _degenerate(a - b):
        return None
    w = 1 / z
    g = _gamma(c)
    t1 = g * _gamma(b - a) * _rgamma(b) * _rgamma(c - a)
    t2 = g * _gamma(a - b) * _rgamma(a) * _rgamma(c - b)
    out = 0j
    if t1 != 0:
        out += t1 * _cpow(-z, -a, side) * hyp2f1_series(a, a - c + 1, a - b + 1, w, tol)
    if t2 != 0:
        out += t2 * _cpow(-z, -b, side) * hyp2f1_series(b, b - c + 1, b - a + 1, w, tol)
    return out


def _inverse_one_minus_z(a, b, c, z, tol, side):
    if _degenerate(a - b):
        return None
    w = 1 / (1 - z)
    g = _gamma(c)
    t1 = g * _gamma(b - a) * _rgamma(b) * _rgamma(c - a)
    t2 = g * _gamma(a - b) * _rgamma(a) * _rgamma(c - b)
    out = 0j
    if t1 != 0:
        out += t1 * _cpow(1 - z, -a, side) * hyp2f1_series(a, c - b, a - b + 1, w, tol)
    if t2 != 0:
        out += t2 * _cpow(1 - z, -b, side) * hyp2f1_series(b, c - a, b - a + 1, w, tol)
    return out


def _one_minus_inverse_z(a, b, c, z, tol, side):
    s = c - a - b
    if _degenerate(s):
        return None
    w = 1 - 1 / z
    g = _gamma(c)
    t1 = g * _gamma(s) * _rgamma(c - a) * _rgamma(c - b)
    t2 = g * _gamma(-s) * _rgamma(a) * _rgamma(b)
    out = 0j
    if t1 != 0:
        out += t1 * _cpow(z, -a, side) * hyp2f1_series(a, a - c + 1, 1 - s, w, tol)
    if t2 != 0:
        out += (t2 * _cpow(1 - z, s, side) * _cpow(z, a - c, side)
                * hyp2f1_series(c - a, 1 - a, s + 1, w, tol))
    return out


_TRANSFORMS = (
    (lambda z: z / (z - 1), _pfaff, False),
    (lambda z: 1 - z, _one_minus_z, True),
    (lambda z: 1 / z, _inverse_z, True),
    (lambda z: 1 / (1 - z), _inverse_one_minus_z, True),
    (lambda z: 1 - 1 / z, _one_minus_inverse_z, True),
)


def gauss_2f1(a, b, c, z, tol: float = 1e-15, side: int = 0, *,
              one_minus_z: complex | None = None) -> complex:
    """Gauss hypergeometric function ``2F1(a, b; c; z)``.

    Parameters
    ----------
    a, b, c : complex
        Parameters; ``c`` must not be a non-positive integer.
    z : complex
        Argument.
    tol : float
        Relative truncation tolerance for every series summed.
    side : {0, 1, -1}
        For real ``z >= 1`` (the branch cut) with a non-terminating series,
        evaluate the limit from above (``+1``) or below (``-1``) the axis.
        With the default ``0`` such arguments raise ``ArgumentOnCut``.
    one_minus_z : complex, optional
        ``1 - z`` computed by the caller without cancellation. Used by the
        expansion about ``z = 1`` when ``z`` is close to 1.

    Raises
    ------
    PoleAtGamma, ArgumentOnCut, NoConvergence
    """
    a, b, c, z = complex(a), complex(b), complex(c), complex(z)
    terminating = _nonpos_int(a) or _nonpos_int(b)
    if _nonpos_int(c) and not (terminating and _terminates_before(a, b, c)):
        raise PoleAtGamma(f"c = {c} is a non-positive integer")
    if z == 0:
        return 1.0 + 0j
    if terminating:
        return _polynomial(a, b, c, z)
    on_cut = z.imag == 0 and z.real >= 1
    if on_cut and not side:
        raise ArgumentOnCut(f"z = {z.real} lies on the branch cut [1, inf)")
    if z == 1:
        s = c - a - b
        if s.real <= 0:
            raise NoConvergence("2F1 diverges at z = 1 when Re(c - a - b) <= 0")
        return complex(_gamma(c) * _gamma(s) * _rgamma(c - a) * _rgamma(c - b))
    if abs(z) <= SERIES_RADIUS:
        return hyp2f1_series(a, b, c, z, tol)
    if one_minus_z is not None and abs(one_minus_z) <= SERIES_RADIUS:
        out = _one_minus_z(a, b, c, z, tol, side if on_cut else 0, complex(one_minus_z))
        if out is not None:
            return complex(out)

    candidates = []
    for arg, fn, _ in _TRANSFORMS:
        if on_cut and fn is _pfaff:
            continue
        candidates.append((abs(arg(z)), fn))
    candidates.sort(key=lambda item: item[0])
    for radius, fn in candidates:
        if radius > MAX_TRANSFORMED_RADIUS:
            break
        out = fn(a, b, c, z, tol, side if on_cut else 0)
        if out is not None:
            return complex(out)
    if not on_cut:
        # neighbourhood of exp(+-i pi/3), where every map keeps |w| near 1
        return _continue_along_ray(a, b, c, z, tol)
    raise NoConvergence(
        f"no usable transformation for 2F1({a}, {b}; {c}; {z}); "
        "parameters are at or near a logarithmic case")


def _series_with_derivative(a, b, c, z, tol):
    return hyp2f1_series(a, b, c, z, tol), a * b / c * hyp2f1_series(a + 1, b + 1, c + 1, z, tol)


def _continue_along_ray(a, b, c, z, tol):
    """Taylor-step the hypergeometric equation from ``0.7 z/|z|`` out to ``z``."""
    z0 = 0.7 * z / abs(z)
    f, df = _series_with_derivative(a, b, c, z0, tol)
    ab, s1 = a * b, a + b + 1
    while z0 != z:
        radius = min(abs(z0), abs(1 - z0))
        step = z - z0
        if abs(step) > 0.5 * radius:
            step *= 0.5 * radius / abs(step)
        p0, p1 = z0 * (1 - z0), 1 - 2 * z0
        q0 = c - s1 * z0
        # Taylor coefficients of F about z0
        fn, fn1 = f, df
        val, der = f + df * step, df
        tp = step
        for n in range(MAX_TERMS):
            fn2 = -((p1 * n + q0) * (n + 1) * fn1 + (-n * (n - 1) - s1 * n - ab) * fn) / (
                p0 * (n + 2) * (n + 1))
            der += (n + 2) * fn2 * tp
            tp *= step
            term = fn2 * tp
            val += term
            fn, fn1 = fn1, fn2
            if abs(term) <= tol * abs(val) and abs(fn2 * tp) <= tol * max(abs(der), 1e-300):
                break
        else:
            raise NoConvergence("2F1 continuation did not converge")
        z0 = z if abs(z - z0 - step) < 1e-15 else z0 + step
        f, df = val, der
    return f


# -- elliptic -------------------------------------------------------------------

def agm(a: float, b: float, tol: float = 1e-16) -> float:
    """Arithmetic-geometric mean of two non-negative reals."""
    for _ in range(64):
        if abs(a - b) <= tol * abs(a):
            break
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return a


def ellipk(m: float) -> float:
    """Complete elliptic integral of the first kind, ``K(m)``, ``0 <= m < 1``."""
    if not 0 <= m < 1:
        raise ParameterOutOfRange(f"K(m) needs 0 <= m < 1, got {m}")
    return math.pi / (2 * agm(1.0, math.sqrt(1 - m)))


def carlson_rf(x, y, z, tol: float = 1e-3):
    """Carlson's symmetric integral ``R_F(x, y, z)`` by duplication.

    Vectorized over numpy arrays; arguments must be non-negative with at
    most one zero.
    """
    x, y, z = (np.asarray(t, dtype=float).copy() for t in np.broadcast_arrays(x, y, z))
    for _ in range(200):
        mu = (x + y + z) / 3
        dx, dy, dz = (mu - x) / mu, (mu - y) / mu, (mu - z) / mu
        if max(np.max(np.abs(dx)), np.max(np.abs(dy)), np.max(np.abs(dz))) < tol:
            break
        sx, sy, sz = np.sqrt(x), np.sqrt(y), np.sqrt(z)
        lam = sx * (sy + sz) + sy * sz
        x, y, z = 0.25 * (x + lam), 0.25 * (y + lam), 0.25 * (z + lam)
    e2 = dx * dy - dz * dz
    e3 = dx * dy * dz
    return (1 + (e2 / 24 - 0.1 - 3 * e3 / 44) * e2 + e3 / 14) / np.sqrt(mu)


def ellipf(phi, m: float):
    """Incomplete elliptic integral ``F(phi | m)`` for ``|phi| <= pi/2``."""
    if not 0 <= m <= 1:
        raise ParameterOutOfRange(f"F(phi|m) needs 0 <= m <= 1, got {m}")
    phi = np.asarray(phi, dtype=float)
    s, c = np.sin(phi), np.cos(phi)
    out = s * carlson_rf(c * c, 1 - m * s * s, 1.0)
    return out if out.ndim else float(out)


def jacobi_sn(u, m: float, tol: float = 1e-16):
    """Jacobi elliptic sine ``sn(u | m)`` for real ``u`` and ``0 <= m <= 1``.

    Descending Landen transformation: an AGM sequence from ``(1, sqrt(1-m))``
    followed by the backward amplitude recursion. Odd in ``u`` by
    construction.
    """
    if not 0 <= m <= 1:
        raise ParameterOutOfRange(f"sn(u|m) needs 0 <= m <= 1, got {m}")
    u = np.asarray(u, dtype=float)
    sign = np.sign(u)
    au = np.abs(u)
    if m == 1:
        out = np.tanh(au)
    else:
        aa, cc = [1.0], [math.sqrt(m)]
        b = math.sqrt(1 - m)
        while abs(cc[-1]) > tol and len(aa) < 64:
            a_prev = aa[-1]
            aa.append(0.5 * (a_prev + b))
            cc.append(0.5 * (a_prev - b))
            b = math.sqrt(a_prev * b)
        n = len(aa) - 1
        phi = (2.0 ** n) * aa[n] * au
        for k in range(n, 0, -1):
            phi = 0.5 * (phi + np.arcsin(cc[k] / aa[k] * np.sin(phi)))
        out = np.sin(phi)
    out = sign * out
    return out if out.ndim else float(out)
