"""Solutions of the Schrodinger equation for general Heun potentials.

With ``psi = prod_i |z - a_i|**alpha_i * H(z)`` the Schrodinger equation
for ``V = v(z)/r(z)`` becomes the general Heun equation for ``H``. The
exponents solve

    alpha_i**2 + (m_i - 1) alpha_i + K_i = 0,
    K_i = kappa (E r(a_i) - v(a_i)) / prod_{j != i} (a_i - a_j)**2,

and the Heun parameters follow from the exponents, the triad and the
leading coefficients of ``r`` and ``v`` (see ``heun_params``).
"""
from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass, field
import numpy as np

from .errors import GammaDegenerate, OutsideDisk, UnsupportedTriad, ValidationError
from .heun import (
    HeunParams,
    heun_eval,
    hypergeometric_expansion_eval,
    to_canonical,
)
from .potentials import (
    PotentialSpec,
    admissible_intervals,
    build_r_poly,
    potential_value,
    rho,
    x_image,
    x_of_z,
    z_of_x,
)
from .special import gauss_2f1
from .triads import Triad

SCHEMES = ("frobenius", "hypexp", "auto", "2f1")


def _parse_signs(signs) -> tuple[int, int, int]:
    if isinstance(signs, str):
        if len(signs) != 3 or any(c not in "+-" for c in signs):
            raise ValidationError(f"signs must be three of '+'/'-', got {signs!r}")
        return tuple(1 if c == "+" else -1 for c in signs)
    out = tuple(int(s) for s in signs)
    if len(out) != 3 or any(s not in (1, -1) for s in out):
        raise ValidationError(f"signs must be three of +1/-1, got {signs!r}")
    return out


def signs_label(signs) -> str:
    return "".join("+" if s > 0 else "-" for s in _parse_signs(signs))


@dataclass(frozen=True)
class ExponentSet:
    """Prefactor exponents ``alpha_1..3`` and the root choices made."""

    alphas: tuple
    signs: tuple
    degenerate: tuple

    @property
    def label(self) -> str:
        return signs_label(self.signs)


def _float_m(spec: PotentialSpec) -> tuple:
    return tuple(d / 2 for d in spec.triad.doubled)


def _k_values(spec: PotentialSpec, E: float) -> tuple:
    r = build_r_poly(spec)
    a = [float(t) for t in spec.a]
    out = []
    for i in range(3):
        ai = a[i]
        r_at = sum(float(rk) * ai**k for k, rk in enumerate(r))
        v_at = sum(float(vk) * ai**k for k, vk in enumerate(spec.v))
        den = math.prod((ai - a[j]) ** 2 for j in range(3) if j != i)
        out.append(spec.kappa * (E * r_at - v_at) / den)
    return tuple(out)


def exponent_set(spec: PotentialSpec, E: float, signs="+++") -> ExponentSet:
    """Exponents for one choice of square-root signs.

    ``+`` picks ``alpha_i = ((1 - m_i) + sqrt(disc_i)) / 2``.
    """
    signs = _parse_signs(signs)
    m = _float_m(spec)
    alphas, degenerate = [], []
    for mi, Ki, s in zip(m, _k_values(spec, E), signs):
        disc = complex((mi - 1) ** 2 - 4 * Ki)
        root = cmath.sqrt(disc)
        alphas.append(((1 - mi) + s * root) / 2)
        degenerate.append(abs(root) < 1e-12)
    return ExponentSet(tuple(alphas), signs, tuple(degenerate))


def exponents(spec: PotentialSpec, E: float) -> list[ExponentSet]:
    """All eight sign choices, ``+++`` first."""
    return [exponent_set(spec, E, s) for s in itertools.product((1, -1), repeat=3)]


def heun_params(spec: PotentialSpec, E: float, exps: ExponentSet) -> HeunParams:
    """Heun parameters (general position, singularities ``spec.a``)."""
    m = _float_m(spec)
    a = tuple(float(t) for t in spec.a)
    al = exps.alphas
    r = tuple(float(t) for t in build_r_poly(spec))
    v = tuple(float(t) for t in spec.v)
    kap = spec.kappa
    S, M = sum(al), sum(m)
    gam, dlt, eps = (2 * al[i] + m[i] for i in range(3))
    ab = S * S + S * (M - 1) + kap * (E * r[4] - v[4])
    total = gam + dlt + eps - 1
    root = cmath.sqrt(total * total - 4 * ab)
    alpha, beta = (total - root) / 2, (total + root) / 2
    if alpha.real > beta.real:
        alpha, beta = beta, alpha
    sa = sum(a)
    q = 0j
    for i in range(3):
        rest = S - al[i]
        mrest = M - m[i]
        q += a[i] * (rest * (rest + mrest - 1) - al[i] * (al[i] + m[i] - 1))
    q -= kap * (E * (r[3] + sa * r[4]) - (v[3] + sa * v[4]))
    return HeunParams(a[0], a[1], a[2], q, alpha, beta, gam, dlt, eps)


# -- wavefunctions ------------------------------------------------------------

@dataclass(frozen=True)
class Wavefunction:
    """``psi(z) = prod |z - a_i|**alpha_i H(z)`` with ``H(a_1) = 1``.

    ``spec`` is relabelled so that the expansion point is ``a_1``; ``order``
    records the relabelling relative to the spec passed by the caller.
    """

    spec: PotentialSpec
    energy: float
    exps: ExponentSet
    heun: HeunParams
    scheme: str
    interval: tuple
    order: tuple = (0, 1, 2)
    gamma0: str = "gamma"
    tol: float = 1e-14

    @property
    def kappa(self) -> float:
        return self.spec.kappa

    @property
    def center(self) -> float:
        return float(self.spec.a[0])

    def heun_value(self, z):
        z = np.asarray(z, dtype=float)
        if self.scheme == "frobenius":
            return heun_eval(self.heun, z, tol=self.tol)
        if self.scheme == "hypexp":
            return hypergeometric_expansion_eval(self.heun, self.gamma0, z, tol=self.tol)
        if self.scheme == "2f1":
            cp, amap = to_canonical(self.heun)
            zeta = np.atleast_1d(amap.forward(z)).real
            out = np.array([gauss_2f1(cp.alpha, cp.beta, cp.gamma, w, side=1) for w in zeta])
            return out.reshape(z.shape) if z.ndim else complex(out[0])
        # auto
        cp, amap = to_canonical(self.heun)
        if np.all(np.abs(amap.forward(z)) < min(1.0, abs(cp.a))):
            return heun_eval(self.heun, z, tol=self.tol)
        try:
            return hypergeometric_expansion_eval(self.heun, self.gamma0, z, tol=self.tol)
        except Exception as exc:
            raise OutsideDisk("points outside the Frobenius disk and the hypergeometric "
                              "expansion does not terminate") from exc

    def psi_z(self, z):
        z = np.asarray(z, dtype=float)
        pref = np.ones(z.shape, dtype=complex)
        for ai, al in zip(self.spec.a, self.exps.alphas):
            pref = pref * np.abs(z - float(ai)) ** al
        return pref * self.heun_value(z)

    def z_of_x(self, x):
        return z_of_x(self.spec, x, self.interval)

    def __call__(self, x):
        return self.psi_z(self.z_of_x(x))

    def potential_x(self, x):
        return potential_value(self.spec, self.z_of_x(x))

    def x_limits(self) -> tuple:
        """Image of the interval in ``x`` (may be infinite)."""
        return x_image(self.spec, self.interval)

    def length_scale(self, x):
        """Local ``x`` scale on which ``psi`` varies: the distance to the
        nearest singular point over ``|dz/dx|``, shrunk by large exponents."""
        z = np.asarray(self.z_of_x(x), dtype=float)
        out = np.full(z.shape, np.inf)
        for ai, al in zip(self.spec.a, self.exps.alphas):
            out = np.minimum(out, np.abs(z - float(ai)) / max(1.0, abs(al)))
        return out / np.abs(rho(self.spec, z))


def _default_interval(spec: PotentialSpec, center: float) -> tuple:
    ivs = admissible_intervals(spec)
    adjacent = [iv for iv in ivs if center in iv]
    if adjacent:
        return adjacent[-1]
    return ivs[-1]


def build_wavefunction(spec: PotentialSpec, E: float, signs="+++", scheme: str = "frobenius",
                       *, center: int | None = None, interval=None, gamma0: str = "gamma",
                       tol: float = 1e-14) -> Wavefunction:
    """Solution of the Schrodinger equation for one sign choice.

    Parameters
    ----------
    spec : PotentialSpec
    E : float
        Energy.
    signs : str or sequence of +-1
        Root choice for each exponent, in the labels of ``spec``.
    scheme : {"frobenius", "hypexp", "auto", "2f1"}
        How ``H`` is evaluated. ``"2f1"`` is valid only when the equation
        reduces to the hypergeometric one (``epsilon = 0``, ``q = a alpha beta``).
    center : int, optional
        Index of the singular point the local expansion is built around.
        Defaults to the first one that bounds an admissible interval.
    interval : tuple, optional
        Admissible interval used for ``x -> z``; defaults to one adjacent to
        the center.
    gamma0 : {"gamma", "alpha", "beta"}
        Lower parameter of the hypergeometric expansion (``scheme="hypexp"``).
    tol : float
        Relative truncation tolerance of the series.
    """
    if scheme not in SCHEMES:
        raise ValidationError(f"scheme must be one of {SCHEMES}, got {scheme!r}")
    if center is None:
        ends = {e for iv in admissible_intervals(spec) for e in iv}
        center = next((i for i in range(3) if float(spec.a[i]) in ends), 0)
    if center not in (0, 1, 2):
        raise ValidationError("center must be 0, 1 or 2")
    signs = _parse_signs(signs)
    order = (center, *(i for i in range(3) if i != center))
    s2 = spec.permuted(order)
    exps = exponent_set(s2, E, tuple(signs[i] for i in order))
    hp = heun_params(s2, E, exps)
    if interval is None:
        interval = _default_interval(s2, float(s2.a[0]))
    else:
        interval = tuple(interval)
    return Wavefunction(s2, E, exps, hp, scheme, interval, order, gamma0, tol)


def interior_grid(wf: Wavefunction, n: int = 200, near: float = 0.1, far: float = 0.5,
                  max_ratio: float = 100.0):
    """Uniform ``x`` grid inside the admissible interval next to the center.

    The grid maps into ``z`` between ``near`` and ``far`` times the distance
    from the center to the nearest other singularity. Within that segment
    it covers the longest stretch where ``|V - E| <= max_ratio |E|``, so
    that a residual measured against ``E psi`` stays resolvable by
    difference quotients; the whole segment is used if there is none.
    """
    c = wf.center
    R = min(abs(c - float(t)) for t in wf.spec.a[1:])
    lo, hi = wf.interval
    direction = 1.0 if lo >= c else -1.0
    z = c + direction * R * np.linspace(near, far, 401)
    ok = np.abs(potential_value(wf.spec, z) - wf.energy) <= max_ratio * abs(wf.energy)
    if np.any(ok):
        # longest run of admissible samples
        edges = np.flatnonzero(np.diff(np.r_[0, ok.astype(int), 0]))
        starts, stops = edges[::2], edges[1::2]
        k = int(np.argmax(stops - starts))
        i, j = starts[k], stops[k] - 1
        if j > i:
            z = z[[i, j]]
    xa, xb = float(x_of_z(wf.spec, z[0])), float(x_of_z(wf.spec, z[-1]))
    return np.linspace(*sorted((xa, xb)), n)


# -- one-term hypergeometric reductions ----------------------------------------

@dataclass(frozen=True)
class CipReport:
    """Outcome of the search for a one-term hypergeometric reduction."""

    is_reducible: bool
    signs: tuple
    eps_residual: float
    q_residual: float
    residuals: dict = field(default_factory=dict)
    wavefunction: Wavefunction | None = None


def cip_reduction_check(spec: PotentialSpec, E: float, tol: float = 1e-9) -> CipReport:
    """Look for a sign choice giving ``epsilon = 0`` and ``q = a alpha beta``
    in canonical position, where ``H`` reduces to ``2F1(alpha, beta; gamma; z)``."""
    best = None
    residuals = {}
    for exps in exponents(spec, E):
        hp = heun_params(spec, E, exps)
        cp, _ = to_canonical(hp)
        scale = max(1.0, abs(cp.alpha * cp.beta * cp.a))
        er = abs(cp.epsilon)
        qr = abs(cp.q - cp.a * cp.alpha * cp.beta) / scale
        residuals[exps.label] = (er, qr)
        if best is None or max(er, qr) < max(best[1], best[2]):
            best = (exps, er, qr)
    exps, er, qr = best
    ok = er < tol and qr < tol
    wf = build_wavefunction(spec, E, exps.signs, "2f1") if ok else None
    return CipReport(ok, exps.signs, er, qr, residuals, wf)


def _table2_terms(key: tuple, a: float) -> tuple:
    """Energy-scale parts of ``V0, V1`` in units of ``hbar**2 / (m sigma**2)``."""
    if key == (2, 2, -1):
        return (a - 1) * (7 * a - 1) * a * a / 32, 3 * (1 - a) * (2 * a - 1) * a / 16
    if key == (2, 2, -2):
        return (a - 1) * (5 * a - 1) * a * a / 8, (1 - a) * (2 * a - 1) * a / 2
    if key == (2, 1, -1):
        return (a - 1) * (9 * a - 1) * a * a / 32, (1 - a) * (7 * a - 3) * a / 16
    raise UnsupportedTriad(f"no one-term reduction restrictions for {key}")


def table2_restrict(triad, a: float, V2: float, V3: float, V4: float,
                    sigma: float = 1.0, hbar: float = 1.0, mass: float = 1.0) -> tuple:
    """``(V0, V1)`` that make the canonical potential ``a = (0, 1, a)`` of a
    conditionally integrable class reduce to a single ``2F1``."""
    key = triad.doubled if isinstance(triad, Triad) else Triad(*triad).doubled
    t0, t1 = _table2_terms(key, a)
    c = hbar**2 / (mass * sigma**2)
    V0 = t0 * c + a * a * (V2 + a * (2 * V3 + 3 * a * V4))
    V1 = t1 * c - a * (2 * V2 + a * (3 * V3 + 4 * a * V4))
    return V0, V1


def table2_spec(triad: Triad, a: float, V2: float, V3: float, V4: float, sigma: float = 1.0,
                x0: float = 0.0, hbar: float = 1.0, mass: float = 1.0) -> PotentialSpec:
    """Canonical spec ``a = (0, 1, a)`` with restricted ``V0, V1``."""
    V0, V1 = table2_restrict(triad, a, V2, V3, V4, sigma, hbar, mass)
    return PotentialSpec.from_table(triad, (0.0, 1.0, a), (V0, V1, V2, V3, V4),
                                    sigma, x0, hbar, mass)


# -- two-term closed form ------------------------------------------------------

@dataclass(frozen=True)
class ClosedForm:
    """Potential ``V0 + V1/z + k V3**2/z**2 + V3/z**3`` with
    ``z = sqrt(1 + exp(2 (x - x0)/sigma))`` and ``k = 2 m sigma**2/hbar**2``,
    solvable by a combination of two ``2F1``."""

    V0: float
    V1: float
    V3: float
    sigma: float = 1.0
    x0: float = 0.0
    hbar: float = 1.0
    mass: float = 1.0

    @property
    def kappa(self) -> float:
        return 2 * self.mass / self.hbar**2

    @property
    def V2(self) -> float:
        return self.kappa * self.sigma**2 * self.V3**2

    @property
    def kappa_s2_v3(self) -> float:
        return self.kappa * self.sigma**2 * self.V3

    def z(self, x):
        x = np.asarray(x, dtype=float)
        return np.sqrt(1 + np.exp(2 * (x - self.x0) / self.sigma))

    def z_minus_one(self, x):
        """``z - 1`` without cancellation for large negative ``x``."""
        e = np.exp(2 * (np.asarray(x, dtype=float) - self.x0) / self.sigma)
        return e / (1 + np.sqrt(1 + e))

    def potential_z(self, z):
        z = np.asarray(z, dtype=float)
        return self.V0 + self.V1 / z + self.V2 / z**2 + self.V3 / z**3

    def potential_x(self, x):
        return self.potential_z(self.z(x))

    def to_spec(self) -> PotentialSpec:
        """The same potential as a member of the ``(1, 1, -1)`` class."""
        s2 = self.sigma**2
        v = (0.0, s2 * self.V3, s2 * self.V2, s2 * self.V1, s2 * self.V0)
        return PotentialSpec(Triad(2, 2, -2), (-1.0, 1.0, 0.0), v, self.sigma, self.x0,
                             self.hbar, self.mass)

    def parameters(self, E: float, signs="+++") -> dict:
        s0, s1, s2 = _parse_signs(signs)
        ks2 = self.kappa * self.sigma**2
        a0 = s0 * cmath.sqrt(-ks2 * (E - self.V0))
        shift = self.V1 + self.V3
        a1 = s1 * cmath.sqrt(-ks2 / 4 * (E - self.V0 + shift - ks2 * self.V3**2))
        a2 = s2 * cmath.sqrt(-ks2 / 4 * (E - self.V0 - shift - ks2 * self.V3**2))
        return {"alpha0": a0, "alpha1": a1, "alpha2": a2,
                "alpha": a1 + a2 - a0, "beta": a1 + a2 + a0, "gamma": 1 + 2 * a1}

    def wavefunction(self, E: float, signs="+++") -> "ClosedFormWavefunction":
        p = self.parameters(E, signs)
        g1 = p["gamma"] - 1
        if abs(g1) < 1e-12 or (abs(g1.imag) < 1e-12 and g1.real < 0
                               and abs(g1.real - round(g1.real)) < 1e-12):
            raise GammaDegenerate(f"gamma - 1 = {g1} is a non-positive integer")
        return ClosedFormWavefunction(self, E, _parse_signs(signs), p)


@dataclass(frozen=True)
class ClosedFormWavefunction:
    """``psi = (z+1)**alpha1 (z-1)**alpha2 u(z)`` with ``u`` a sum of two
    ``2F1`` at ``(z+1)/2``, evaluated on the upper side of the cut."""

    potential: ClosedForm
    energy: float
    signs: tuple
    params: dict
    scheme: str = "closed-form-two-F1"

    @property
    def kappa(self) -> float:
        return self.potential.kappa

    def potential_x(self, x):
        return self.potential.potential_x(x)

    def u(self, z, zm1=None):
        """``2F1(alpha-1, beta; gamma-1; w) + c(z) 2F1(alpha, beta+1; gamma; w)``
        with ``c(z) = (alpha2 - alpha1 + beta z - k V3) / (2 (gamma - 1))``.

        Two contiguous relations turn this into
        ``2F1(alpha, beta; gamma-1; w) + c' 2F1(alpha, beta+1; gamma; w)``
        with constant ``c' = c(z) - beta z / (2 (gamma - 1)) - beta / (2 (gamma - 1))``,
        which avoids the cancellation of the ``z``-dependent form at large ``z``.
        """
        p = self.params
        al, be, ga = p["alpha"], p["beta"], p["gamma"]
        c = (p["alpha2"] - p["alpha1"] - self.potential.kappa_s2_v3 - be) / (2 * (ga - 1))
        z = np.asarray(z, dtype=float)
        zm1 = z - 1 if zm1 is None else np.asarray(zm1, dtype=float)
        out = np.empty(z.shape, dtype=complex)
        for i, (zz, dz) in enumerate(zip(z.flat, zm1.flat)):
            w = (zz + 1) / 2
            out.flat[i] = (gauss_2f1(al, be, ga - 1, w, side=1, one_minus_z=-dz / 2)
                           + c * gauss_2f1(al, be + 1, ga, w, side=1, one_minus_z=-dz / 2))
        return out if out.ndim else complex(out)

    def psi_z(self, z, zm1=None):
        z = np.asarray(z, dtype=float)
        zm1 = z - 1 if zm1 is None else np.asarray(zm1, dtype=float)
        p = self.params
        return (z + 1) ** p["alpha1"] * zm1 ** p["alpha2"] * self.u(z, zm1)

    def __call__(self, x):
        zm1 = self.potential.z_minus_one(x)
        return self.psi_z(1 + zm1, zm1)


def step_potential(x, V0: float, V1: float, sigma: float = 1.0, x0: float = 0.0):
    """``V0 + V1 / sqrt(1 + exp(2 (x - x0)/sigma))``, the ``V3 = 0`` member."""
    x = np.asarray(x, dtype=float)
    return V0 + V1 / np.sqrt(1 + np.exp(2 * (x - x0) / sigma))


def exponential_pair_potential(x, A: float, hbar: float = 1.0, mass: float = 1.0):
    """``(A**2 e**x/(e**x + 1) + A e**(x/2)/(e**x + 1)**1.5) hbar**2 / (2 mass)``."""
    x = np.asarray(x, dtype=float)
    ex = np.exp(x)
    return (A * A * ex / (ex + 1) + A * np.exp(x / 2) / (ex + 1) ** 1.5) * hbar**2 / (2 * mass)


FIG2_V3 = {"a": -1.05, "b": -1.0, "c": -0.9, "d": -0.85}


def fig2_grid() -> np.ndarray:
    return (np.arange(400) - 200) / 50


def fig2_data() -> dict:
    """Potential curves for ``V0 = x0 = 0``, ``V1 = -1``, unit constants and
    ``V3`` in ``FIG2_V3``, on ``x_k = (k - 200)/50``."""
    x = fig2_grid()
    return {"x": x, "curves": {k: ClosedForm(0.0, -1.0, v3).potential_x(x)
                               for k, v3 in FIG2_V3.items()}}
