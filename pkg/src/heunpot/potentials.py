"""Potentials reducible to the general Heun equation.

A potential is fixed by an exponent triad ``(m1, m2, m3)``, three real
singular points ``a_i``, the numerator coefficients ``v_0..v_4`` and the
coordinate constants ``sigma, x0``. With

    r(z) = sigma**2 * prod_i (z - a_i)**(2 - 2 m_i) = r_0 + ... + r_4 z**4,

the potential is ``V(z) = v(z) / r(z)`` and the coordinate ``x`` obeys
``dz/dx = rho(z) = prod_i (z - a_i)**m_i / sigma``. On the real line only
intervals where ``rho`` is real are usable; half-integer exponents are
grouped under a single square root so that ``rho`` is real wherever the
product of their factors is positive.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    BadSpecFile,
    BranchViolation,
    CoincidentSingularities,
    InversionFailure,
    NonIntegerExponent,
    OutOfBranch,
    ParameterOutOfRange,
    PoleAtZ,
    ValidationError,
)
from .special import ellipf, ellipk, jacobi_sn
from .triads import Triad, canonical_classes, canonical_order, class_number

EXPLICIT_CLASSES = (3, 7, 9, 10, 11)


@dataclass(frozen=True)
class PotentialSpec:
    """A member of the general Heun potential family.

    Parameters
    ----------
    triad : Triad
        Exponents ``m_i`` attached to ``a_i``.
    a : tuple of 3 floats
        Distinct real singular points.
    v : tuple of 5 floats
        Numerator coefficients ``v_0..v_4`` of ``V = v(z)/r(z)``.
    sigma, x0 : float
        Scale and origin of the coordinate ``x``.
    hbar, mass : float
        Physical constants; only ``kappa = 2 mass / hbar**2`` enters.
    """

    triad: Triad
    a: tuple
    v: tuple
    sigma: float = 1.0
    x0: float = 0.0
    hbar: float = 1.0
    mass: float = 1.0

    def __post_init__(self):
        if not isinstance(self.triad, Triad):
            object.__setattr__(self, "triad", Triad(*self.triad))
        object.__setattr__(self, "a", tuple(self.a))
        object.__setattr__(self, "v", tuple(self.v))
        if len(self.a) != 3:
            raise ValidationError("a needs exactly three singular points")
        if len(self.v) != 5:
            raise ValidationError("v needs exactly five coefficients v_0..v_4")
        a1, a2, a3 = self.a
        if a1 == a2 or a1 == a3 or a2 == a3:
            raise CoincidentSingularities(f"singular points {self.a} are not distinct")
        if self.sigma == 0:
            raise ParameterOutOfRange("sigma must be nonzero")
        if not (self.hbar > 0 and self.mass > 0):
            raise ParameterOutOfRange("hbar and mass must be positive")
        vals = [*self.a, *self.v, self.sigma, self.x0, self.hbar, self.mass]
        if not all(math.isfinite(float(t)) for t in vals):
            raise ParameterOutOfRange("spec values must be finite")

    @property
    def kappa(self) -> float:
        return 2 * self.mass / self.hbar**2

    @property
    def m(self) -> tuple:
        return self.triad.m

    @property
    def table_coefficients(self) -> tuple:
        """``V_k = v_k / sigma**2``, the coefficients of ``V`` times the
        integer-power denominator."""
        return tuple(vk / self.sigma**2 for vk in self.v)

    @classmethod
    def from_table(cls, triad, a, V, sigma=1.0, x0=0.0, hbar=1.0, mass=1.0):
        """Build a spec from ``V_k = v_k / sigma**2``."""
        return cls(triad, a, tuple(sigma**2 * vk for vk in V), sigma, x0, hbar, mass)

    def permuted(self, order: Sequence[int]) -> "PotentialSpec":
        """Relabel the singular points: new label ``i`` is old ``order[i]``."""
        order = tuple(order)
        return PotentialSpec(self.triad.permute(order), tuple(self.a[i] for i in order),
                             self.v, self.sigma, self.x0, self.hbar, self.mass)

    def canonical(self) -> tuple["PotentialSpec", tuple]:
        """Relabel so that exponents are in descending order."""
        order = canonical_order(self.triad)
        return self.permuted(order), order

    def to_dict(self) -> dict:
        return {
            "triad": list(self.triad.doubled),
            "a": [float(t) for t in self.a],
            "v": [float(t) for t in self.v],
            "sigma": float(self.sigma),
            "x0": float(self.x0),
            "hbar": float(self.hbar),
            "mass": float(self.mass),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PotentialSpec":
        """Inverse of ``to_dict``. The triad may be given as doubled
        integers under ``"triad"`` or as half-integers under ``"m"``."""
        try:
            if "triad" in d:
                doubled = [float(t) for t in d["triad"]]
                if any(t != int(t) for t in doubled):
                    raise ValueError(f"doubled triad entries must be integers: {d['triad']}")
                triad = Triad(*(int(t) for t in doubled))
            else:
                triad = Triad.from_exponents(*(float(t) for t in d["m"]))
            args = (tuple(float(t) for t in d["a"]), tuple(float(t) for t in d["v"]),
                    float(d.get("sigma", 1.0)), float(d.get("x0", 0.0)),
                    float(d.get("hbar", 1.0)), float(d.get("mass", 1.0)))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ValidationError):
                raise
            raise BadSpecFile(f"malformed potential spec: {exc}") from exc
        return cls(triad, *args)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "PotentialSpec":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise BadSpecFile(f"spec is not valid JSON: {exc}") from exc
        if not isinstance(d, dict):
            raise BadSpecFile("spec JSON must be an object")
        return cls.from_dict(d)


# -- polynomials ------------------------------------------------------------------

def _poly_mul(p: list, q: list) -> list:
    out = [0] * (len(p) + len(q) - 1)
    for i, pi in enumerate(p):
        for j, qj in enumerate(q):
            out[i + j] += pi * qj
    return out


def build_r_poly(spec: PotentialSpec) -> tuple:
    """Coefficients ``r_0..r_4`` of ``sigma**2 prod (z - a_i)**(2 - 2 m_i)``.

    Pure Python arithmetic, so ``Fraction`` inputs give exact results.
    """
    poly = [spec.sigma**2]
    for d, ai in zip(spec.triad.doubled, spec.a):
        power = 2 - d
        if power < 0:
            raise NonIntegerExponent(f"2 - 2m = {power} is negative")
        for _ in range(power):
            poly = _poly_mul(poly, [-ai, 1])
    poly += [0] * (5 - len(poly))
    return tuple(poly)


@dataclass(frozen=True)
class RationalPotential:
    """``V(z) = v(z) / r(z)`` with explicit numerator and denominator."""

    r: tuple
    v: tuple

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        num = np.polynomial.polynomial.polyval(z, np.array(self.v, dtype=float))
        den = np.polynomial.polynomial.polyval(z, np.array(self.r, dtype=float))
        if np.any(den == 0):
            raise PoleAtZ("r(z) vanishes at a requested point")
        return num / den


def rational_potential(spec: PotentialSpec) -> RationalPotential:
    return RationalPotential(build_r_poly(spec), spec.v)


def potential_value(spec: PotentialSpec, z):
    """``V(z) = v(z) / r(z)``; raises ``PoleAtZ`` where ``r(z) = 0``."""
    z = np.asarray(z, dtype=float)
    num = np.polynomial.polynomial.polyval(z, np.array(spec.v, dtype=float))
    den = np.full(z.shape, float(spec.sigma) ** 2)
    for d, ai in zip(spec.triad.doubled, spec.a):
        den = den * (z - ai) ** (2 - d)
    if np.any(den == 0):
        raise PoleAtZ("r(z) vanishes at a requested point")
    out = num / den
    return out if out.ndim else float(out)


# -- rho and admissible intervals -----------------------------------------------

def _half_product(spec: PotentialSpec, z):
    out = np.ones_like(z)
    for d, ai in zip(spec.triad.doubled, spec.a):
        if d % 2:
            out = out * (z - ai)
    return out


def admissible_intervals(spec: PotentialSpec) -> list[tuple[float, float]]:
    """Open real intervals between singular points on which ``rho`` is real."""
    s = sorted(float(t) for t in spec.a)
    edges = [-math.inf, *s, math.inf]
    out = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        probe = _probe(lo, hi)
        if _half_product(spec, np.array(probe)) > 0:
            out.append((lo, hi))
    return out


def _probe(lo: float, hi: float) -> float:
    if math.isinf(lo) and math.isinf(hi):
        return 0.0
    if math.isinf(lo):
        return hi - 1.0
    if math.isinf(hi):
        return lo + 1.0
    return 0.5 * (lo + hi)


def interval_of(spec: PotentialSpec, z: float) -> tuple[float, float]:
    """Admissible interval containing ``z``."""
    for lo, hi in admissible_intervals(spec):
        if lo < z < hi:
            return lo, hi
    raise BranchViolation(f"z = {z} is not inside an admissible interval")


def _resolve_interval(spec: PotentialSpec, interval) -> tuple[float, float]:
    ivs = admissible_intervals(spec)
    if interval is None:
        return ivs[-1]
    if isinstance(interval, (int, np.integer)):
        try:
            return ivs[int(interval)]
        except IndexError as exc:
            raise OutOfBranch(f"only {len(ivs)} admissible intervals") from exc
    lo, hi = float(interval[0]), float(interval[1])
    for iv in ivs:
        if iv == (lo, hi):
            return iv
    raise OutOfBranch(f"interval {interval} is not admissible; admissible: {ivs}")


def rho(spec: PotentialSpec, z):
    """``dz/dx`` at real ``z`` inside an admissible interval."""
    z = np.asarray(z, dtype=float)
    half = _half_product(spec, z)
    if np.any(half <= 0):
        raise BranchViolation("rho is not real at a requested point")
    out = np.sqrt(half) / spec.sigma
    for d, ai in zip(spec.triad.doubled, spec.a):
        out = out * (z - ai) ** ((d - (d % 2)) // 2)
    return out if out.ndim else float(out)


# -- x(z): real antiderivatives of 1/prod (z-a_i)^m_i ----------------------------

def _I(s, b):
    """Antiderivative of ``1/(s**2 - b)``."""
    if b > 0:
        r = math.sqrt(b)
        return np.log(np.abs(s - r) / (s + r)) / (2 * r)
    r = math.sqrt(-b)
    return np.arctan(s / r) / r


def _L(z, b1, b2):
    """Antiderivative of ``1/sqrt((z-b1)(z-b2))`` outside ``[b1, b2]``."""
    root = np.sqrt((z - b1) * (z - b2))
    p = 2 * z - b1 - b2
    with np.errstate(divide="ignore"):
        mag = np.where(p > 0, 2 * root + p, (b1 - b2) ** 2 / (2 * root - p))
    return np.log(mag)


def _J(z, c, b1, b2):
    """Antiderivative of ``1/((z-c) sqrt((z-b1)(z-b2)))``."""
    t = 1 / (z - c)
    A = (c - b1) * (c - b2)
    B = 2 * c - b1 - b2
    W = np.maximum(A * t * t + B * t + 1, 0.0)
    if A > 0:
        ra = math.sqrt(A)
        p = 2 * A * t + B
        sw = 2 * ra * np.sqrt(W)
        # 4AW - p**2 = 4A - B**2 removes the cancellation when p < 0
        with np.errstate(divide="ignore"):
            mag = np.where(p >= 0, sw + p, np.abs(4 * A - B * B) / (sw - p))
        K = np.log(mag) / ra
    else:
        arg = (2 * A * t + B) / math.sqrt(B * B - 4 * A)
        K = -np.arcsin(np.clip(arg, -1, 1)) / math.sqrt(-A)
    return -np.sign(t) * K


def _elliptic_G(a, z):
    lo, mid, hi = sorted(a)
    m = (mid - lo) / (hi - lo)
    out = np.empty_like(z)
    upper = z > hi
    lower = (z > lo) & (z < mid)
    if np.any(~(upper | lower)):
        raise BranchViolation("z outside the admissible intervals of the elliptic class")
    if np.any(upper):
        A = hi - lo
        phi = np.arcsin(np.sqrt(A / (z[upper] - lo)))
        out[upper] = -2 * ellipf(phi, m) / math.sqrt(A)
    if np.any(lower):
        B = mid - lo
        phi = np.arcsin(np.sqrt(np.clip((z[lower] - lo) / B, 0, 1)))
        out[lower] = 2 * ellipf(phi, m) / math.sqrt(hi - lo)
    return out


def _G(cls: int, a: tuple, z):
    a1, a2, a3 = (float(t) for t in a)
    if cls == 1:
        return sum(np.log(np.abs(z - ai)) / math.prod(ai - aj for aj in a if aj != ai)
                   for ai in (a1, a2, a3))
    if cls in (2, 4):
        s = np.sqrt(z - a3)
        b1, b2 = a1 - a3, a2 - a3
        if cls == 2:
            return 2 * (_I(s, b1) - _I(s, b2)) / (b1 - b2)
        return 2 * (b1 * _I(s, b1) - b2 * _I(s, b2)) / (b1 - b2)
    if cls == 3:
        return (np.log(np.abs(z - a1)) - np.log(np.abs(z - a2))) / (a1 - a2)
    if cls == 5:
        return ((a1 - a3) * np.log(np.abs(z - a1))
                - (a2 - a3) * np.log(np.abs(z - a2))) / (a1 - a2)
    if cls == 6:
        return _J(z, a1, a2, a3)
    if cls == 7:
        return 2 * _I(np.sqrt(z - a2), a1 - a2)
    if cls == 8:
        return _L(z, a2, a3) + (a1 - a3) * _J(z, a1, a2, a3)
    if cls == 9:
        return np.log(np.abs(z - a1))
    if cls == 10:
        return _elliptic_G((a1, a2, a3), z)
    if cls == 11:
        return _L(z, a1, a2)
    raise ValidationError(f"unknown class {cls}")


def x_of_z(spec: PotentialSpec, z):
    """Coordinate ``x = x0 + sigma * G(z)`` with ``G' = 1/prod (z-a_i)**m_i``.

    ``z`` must lie in admissible intervals. The additive constant of ``G``
    is fixed per class; the closed-form inverses in ``z_of_x`` use the same
    constant.
    """
    cspec, _ = spec.canonical()
    z = np.asarray(z, dtype=float)
    _check_admissible(cspec, z)
    g = _G(class_number(cspec.triad), cspec.a, np.atleast_1d(z)).reshape(z.shape)
    out = spec.x0 + spec.sigma * g
    return out if out.ndim else float(out)


def _check_admissible(spec, z):
    if np.any(_half_product(spec, z) <= 0) or np.any(np.isin(z, np.array(spec.a, float))):
        raise BranchViolation("z is outside the admissible intervals")


# -- z(x) ------------------------------------------------------------------------

def _in(z, lo, hi):
    return np.all((z > lo) & (z < hi))


def _closed_inverse(cls, a, lo, hi, x, spec):
    """Explicit ``z(x)`` on ``(lo, hi)``; ``None`` when the class has none."""
    a1, a2, a3 = (float(t) for t in a)
    sig, x0 = spec.sigma, spec.x0
    t = (x - x0) / sig
    probe = _probe(lo, hi)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        if cls == 9:
            return a1 + math.copysign(1.0, probe - a1) * np.exp(t)
        if cls == 3:
            s = math.copysign(1.0, (probe - a1) / (probe - a2))
            e = np.exp((a1 - a2) * t)
            return (a1 - s * a2 * e) / (1 - s * e)
        if cls == 7:
            y = t / 2
            b = a1 - a2
            if b > 0:
                rb = math.sqrt(b)
                if probe < a1:
                    if np.any(y > 0):
                        raise OutOfBranch("x beyond the image of the interval")
                    return a2 + b * np.tanh(rb * y) ** 2
                if np.any(y >= 0):
                    raise OutOfBranch("x beyond the image of the interval")
                return a2 + b / np.tanh(rb * y) ** 2
            rb = math.sqrt(-b)
            if np.any((y < 0) | (rb * y >= math.pi / 2)):
                raise OutOfBranch("x beyond the image of the interval")
            return a2 - b * np.tan(rb * y) ** 2
        if cls == 11:
            w = np.exp(t)
            d2 = (a2 - a1) ** 2
            if probe > max(a1, a2):
                return 0.5 * (a1 + a2) + w / 4 + d2 / (4 * w)
            return 0.5 * (a1 + a2) - w / 4 - d2 / (4 * w)
        if cls == 10:
            s_lo, s_mid, s_hi = sorted((a1, a2, a3))
            m = (s_mid - s_lo) / (s_hi - s_lo)
            K = ellipk(m)
            if probe > s_hi:
                A = s_hi - s_lo
                u = math.sqrt(A) * (x0 - x) / (2 * sig)
                if np.any((u <= 0) | (u > K * (1 + 1e-15))):
                    raise OutOfBranch("x beyond the image of the interval")
                return s_lo + A / jacobi_sn(u, m) ** 2
            u = math.sqrt(s_hi - s_lo) * (x - x0) / (2 * sig)
            if np.any((u <= 0) | (u >= K)):
                raise OutOfBranch("x beyond the image of the interval")
            return s_lo + (s_mid - s_lo) * jacobi_sn(u, m) ** 2
    return None


def _param(lo, hi, t):
    """Map ``t in (0, 1)`` onto the interval ``(lo, hi)``."""
    if math.isinf(lo) and math.isinf(hi):
        return np.tan(math.pi * (t - 0.5))
    if math.isinf(hi):
        return lo + t / (1 - t)
    if math.isinf(lo):
        return hi - (1 - t) / t
    return lo + (hi - lo) * t


_T_EDGE = 1e-14


def x_image(spec: PotentialSpec, interval=None) -> tuple[float, float]:
    """Approximate image ``(x_min, x_max)`` of an admissible interval."""
    lo, hi = _resolve_interval(spec, interval)
    ends = x_of_z(spec, _param(lo, hi, np.array([_T_EDGE, 1 - _T_EDGE])))
    return float(np.min(ends)), float(np.max(ends))


def _numeric_inverse(spec, lo, hi, x):
    def xt(t):
        return x_of_z(spec, _param(lo, hi, t))

    t_lo, t_hi = _T_EDGE, 1 - _T_EDGE
    x_lo, x_hi = xt(t_lo), xt(t_hi)
    increasing = x_hi > x_lo
    lo_x, hi_x = min(x_lo, x_hi), max(x_lo, x_hi)
    if np.any((x < lo_x) | (x > hi_x)):
        raise OutOfBranch(f"x outside the image [{lo_x}, {hi_x}] of the interval")
    ta = np.full(x.shape, t_lo)
    tb = np.full(x.shape, t_hi)
    for _ in range(60):
        tm = 0.5 * (ta + tb)
        below = (xt(tm) < x) == increasing
        ta = np.where(below, tm, ta)
        tb = np.where(below, tb, tm)
    z = _param(lo, hi, 0.5 * (ta + tb))
    for _ in range(3):
        step = (x_of_z(spec, z) - x) * rho(spec, z)
        z_new = z - step
        ok = (z_new > lo) & (z_new < hi)
        z = np.where(ok, z_new, z)
    if np.any(np.abs(x_of_z(spec, z) - x) > 1e-8 * np.maximum(1.0, np.abs(x))):
        raise InversionFailure("z(x) did not converge")
    return z


def z_of_x(spec: PotentialSpec, x, interval=None):
    """Invert ``x(z)`` on one admissible interval.

    Parameters
    ----------
    spec : PotentialSpec
    x : float or array_like
    interval : None, int or (lo, hi)
        Admissible interval to invert on; ``None`` picks the rightmost one
        and an integer indexes ``admissible_intervals(spec)``.

    Raises
    ------
    OutOfBranch
        If some ``x`` is not the image of a point of the interval.
    """
    lo, hi = _resolve_interval(spec, interval)
    xa = np.asarray(x, dtype=float)
    flat = np.atleast_1d(xa).ravel()
    cspec, _ = spec.canonical()
    cls = class_number(cspec.triad)
    z = _closed_inverse(cls, cspec.a, lo, hi, flat, spec) if cls in EXPLICIT_CLASSES else None
    if z is None:
        z = _numeric_inverse(spec, lo, hi, flat)
    z = np.asarray(z, dtype=float)
    if not (np.all(np.isfinite(z)) and _in(z, lo, hi)):
        raise OutOfBranch(f"x maps outside the interval ({lo}, {hi})")
    z = z.reshape(xa.shape)
    return z if z.ndim else float(z)


def potential_x(spec: PotentialSpec, x, interval=None):
    """``V`` as a function of ``x`` on one admissible interval."""
    return potential_value(spec, z_of_x(spec, x, interval))


# -- catalog -------------------------------------------------------------------

_TRANSFORMS = {
    1: "(x - x0)/sigma = sum_i ln|z - a_i| / prod_{j != i} (a_i - a_j)",
    2: "(x - x0)/sigma = 2 [I(s, a1 - a3) - I(s, a2 - a3)] / (a1 - a2), s = sqrt(z - a3)",
    3: "z = (a1 - a2 e^t) / (1 - e^t), t = (a1 - a2)(x - x0)/sigma",
    4: "(x - x0)/sigma = 2 [(a1 - a3) I(s, a1 - a3) - (a2 - a3) I(s, a2 - a3)] / (a1 - a2), "
       "s = sqrt(z - a3)",
    5: "(x - x0)/sigma = [(a1 - a3) ln|z - a1| - (a2 - a3) ln|z - a2|] / (a1 - a2)",
    6: "(x - x0)/sigma = J(z; a1, a2, a3)",
    7: "z = a2 + (a1 - a2) tanh^2(sqrt(a1 - a2)(x - x0)/(2 sigma))",
    8: "(x - x0)/sigma = ln|2 sqrt((z - a2)(z - a3)) + 2z - a2 - a3| + (a1 - a3) J(z; a1, a2, a3)",
    9: "z = a1 + e^((x - x0)/sigma)",
    10: "z = a1 + (a2 - a1) / sn^2(sqrt(a2 - a1)(x0 - x)/(2 sigma) | (a3 - a1)/(a2 - a1))",
    11: "z = a1 + (e^((x - x0)/(2 sigma)) + (a2 - a1) e^(-(x - x0)/(2 sigma)))^2 / 4",
}

_NOTES = ("I(s, b) = int ds/(s^2 - b); "
          "J(z; c, b1, b2) = int dz/((z - c) sqrt((z - b1)(z - b2)))")


def _denominator_text(t: Triad) -> str:
    parts = []
    for i, d in enumerate(t.doubled, start=1):
        p = 2 - d
        if p == 1:
            parts.append(f"(z - a{i})")
        elif p > 1:
            parts.append(f"(z - a{i})^{p}")
    return " ".join(parts) if parts else "1"


@dataclass(frozen=True)
class CatalogRow:
    number: int
    triad: Triad
    potential: str
    transformation: str
    explicit: bool
    template: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "number": self.number,
            "triad": self.triad.label(),
            "potential": self.potential,
            "transformation": self.transformation,
            "explicit_z_of_x": self.explicit,
            "template": self.template,
        }


def catalog() -> list[CatalogRow]:
    """The eleven independent potential classes with template specs."""
    rows = []
    for n, t in enumerate(canonical_classes(), start=1):
        num = "V0 + V1 z + V2 z^2 + V3 z^3 + V4 z^4"
        den = _denominator_text(t)
        pot = num if den == "1" else f"({num}) / ({den})"
        template = PotentialSpec(t, (0.0, 1.0, 2.0), (0.0,) * 5).to_dict()
        rows.append(CatalogRow(n, t, pot, _TRANSFORMS[n], n in EXPLICIT_CLASSES, template))
    return rows


catalog_notes = _NOTES

