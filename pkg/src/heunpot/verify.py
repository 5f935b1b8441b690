"""Independent checks of constructed wavefunctions.

* ``schrodinger_residual`` applies ``-psi'' + kappa (V - E) psi`` with a
  sixth-order central difference stencil.
* ``ode_integrate`` is an adaptive Dormand-Prince 5(4) integrator for the
  Schrodinger equation, used as an oracle.
* ``bose_consistency_check`` confirms that the Heun invariant, the
  coordinate map and the potential satisfy
  ``rho**2 I(z) + {z, x}/2 = kappa (E - V)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DerivativeBreakdown, GridTooCoarse, NoConvergence, StepUnderflow
from .potentials import (
    PotentialSpec,
    interval_of,
    potential_value,
    potential_x,
    x_of_z,
)
from .solutions import exponent_set, heun_params


@lru_cache(maxsize=None)
def fd_weights(offsets: tuple, order: int) -> np.ndarray:
    """Finite-difference weights for the ``order``-th derivative at 0 on
    integer ``offsets`` (unit spacing), from the Taylor moment system."""
    k = np.asarray(offsets, dtype=float)
    n = len(k)
    A = np.vander(k, n, increasing=True).T
    b = np.zeros(n)
    b[order] = float(np.prod(np.arange(1, order + 1)))
    return np.linalg.solve(A, b)


_O7 = tuple(range(-3, 4))
_O9 = tuple(range(-4, 5))


def derivative(f, x, order: int, h: float):
    """Sixth-order central difference of a vectorized ``f`` at points ``x``."""
    offs = _O7 if order <= 2 else _O9
    w = fd_weights(offs, order)
    x = np.asarray(x, dtype=float)
    pts = x[..., None] + h * np.asarray(offs, dtype=float)
    vals = np.asarray(f(pts.ravel())).reshape(pts.shape)
    return vals @ w / h**order


# -- residual --------------------------------------------------------------------

@dataclass(frozen=True)
class ResidualReport:
    """Pointwise residual of the Schrodinger equation on a grid.

    ``relative`` is ``|residual| / scale`` with ``scale = max |kappa E psi|``
    (or ``max |kappa V psi|`` when ``E = 0``).
    """

    grid: np.ndarray
    residuals: np.ndarray
    relative: np.ndarray
    scale: float
    h: np.ndarray

    @property
    def max_rel_residual(self) -> float:
        return float(np.max(self.relative))

    def passed(self, threshold: float = 1e-7) -> bool:
        return self.max_rel_residual < threshold


def _default_step(psi, grid) -> np.ndarray:
    """Per-point stencil spacing, shrunk near branch points and where
    ``psi`` varies quickly."""
    span = float(np.ptp(grid)) if len(grid) > 1 else 1.0
    h = np.full(grid.shape, min(1e-2, span / 50) if span > 0 else 1e-2)
    limits = getattr(psi, "x_limits", None)
    if limits is not None:
        lo, hi = limits()
        room = np.minimum(grid - lo, hi - grid)
        h = np.minimum(h, room / 30)
    scale = getattr(psi, "length_scale", None)
    if scale is not None:
        h = np.minimum(h, 0.02 * scale(grid))
    return h


def schrodinger_residual(psi, grid, h=None) -> ResidualReport:
    """Residual of ``-psi'' + kappa (V - E) psi`` on ``grid``.

    ``psi`` is a wavefunction object: callable in ``x`` and exposing
    ``energy``, ``kappa`` and ``potential_x``. ``h`` is the stencil spacing,
    a scalar or one value per grid point; by default it adapts to the
    distance from branch points.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.size < 2:
        raise GridTooCoarse("need at least two grid points")
    h = _default_step(psi, grid) if h is None else np.broadcast_to(np.asarray(h, float), grid.shape)
    if not np.all(h > 0):
        raise GridTooCoarse("grid leaves no room for the difference stencil")
    E, kap = psi.energy, psi.kappa
    w = fd_weights(_O7, 2)
    pts = grid[:, None] + h[:, None] * np.asarray(_O7, dtype=float)
    vals = np.asarray(psi(pts.ravel())).reshape(pts.shape)
    d2 = vals @ w / h**2
    p0 = vals[:, len(_O7) // 2]
    V = np.asarray(psi.potential_x(grid))
    res = -d2 + kap * (V - E) * p0
    scale = float(np.max(np.abs(kap * E * p0)))
    if scale == 0:
        scale = float(np.max(np.abs(kap * V * p0)))
    if scale == 0:
        scale = float(np.max(np.abs(p0))) or 1.0
    return ResidualReport(grid, res, np.abs(res) / scale, scale, h)


# -- ODE oracle ------------------------------------------------------------------

_C = np.array([0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1, 1])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0])
_B4 = np.array([5179 / 57600, 0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4


@dataclass(frozen=True)
class OdeSolution:
    x: np.ndarray
    psi: np.ndarray
    dpsi: np.ndarray
    n_steps: int
    n_rejected: int


def _potential_callable(system, interval):
    if isinstance(system, PotentialSpec):
        return lambda x: potential_x(system, x, interval), system.kappa
    return system.potential_x, system.kappa


def ode_integrate(system, E: float, x_start: float, x_end: float, psi0: complex,
                  dpsi0: complex, tol: float = 1e-10, samples=None, interval=None,
                  h0: float | None = None, fixed_step: float | None = None,
                  max_steps: int = 1_000_000) -> OdeSolution:
    """Integrate ``psi'' = kappa (V(x) - E) psi`` from ``x_start`` to ``x_end``.

    Parameters
    ----------
    system : PotentialSpec or object with ``potential_x`` and ``kappa``
    E : float
    x_start, x_end : float
        Integration may run in either direction.
    psi0, dpsi0 : complex
        Initial value and slope at ``x_start``.
    tol : float
        Relative tolerance of the embedded error estimate.
    samples : array_like, optional
        Points where the solution is recorded. Steps are shortened to land
        on them exactly. Defaults to the two end points.
    fixed_step : float, optional
        Take uniform steps of this size without error control.

    Returns
    -------
    OdeSolution
    """
    V, kap = _potential_callable(system, interval)
    direction = 1.0 if x_end >= x_start else -1.0
    if samples is None:
        samples = np.array([x_start, x_end])
    samples = np.asarray(samples, dtype=float)
    order = np.argsort(direction * samples, kind="stable")
    targets = samples[order]

    def f(x, y):
        return np.array([y[1], kap * (float(V(x)) - E) * y[0]])

    y = np.array([psi0, dpsi0], dtype=complex)
    x = float(x_start)
    atol = tol * max(abs(psi0), abs(dpsi0), 1e-300)
    span = abs(x_end - x_start)
    h = fixed_step if fixed_step else (h0 or min(1e-2, span / 10 if span else 1e-2))
    out_psi = np.empty(len(targets), dtype=complex)
    out_dpsi = np.empty(len(targets), dtype=complex)
    i = 0
    while i < len(targets) and direction * (targets[i] - x) <= 0:
        out_psi[i], out_dpsi[i] = y
        i += 1
    k1 = f(x, y)
    steps = rejected = 0
    while i < len(targets):
        if steps >= max_steps:
            raise NoConvergence(f"ODE integration exceeded {max_steps} steps")
        hit = False
        step = h
        if direction * (targets[i] - x) <= step * (1 + 1e-12):
            step = abs(targets[i] - x)
            hit = True
        hs = direction * step
        ks = [k1]
        for s in range(1, 7):
            ys = y + hs * sum(a * k for a, k in zip(_A[s], ks))
            ks.append(f(x + _C[s] * hs, ys))
        y_new = y + hs * sum(b * k for b, k in zip(_B5, ks))
        if fixed_step:
            err = 0.0
        else:
            e = hs * sum(c * k for c, k in zip(_E, ks))
            sc = atol + tol * np.maximum(np.abs(y), np.abs(y_new))
            err = float(np.sqrt(np.mean(np.abs(e / sc) ** 2)))
        if err <= 1.0:
            x = targets[i] if hit else x + hs
            y = y_new
            k1 = ks[6]
            steps += 1
            while i < len(targets) and direction * (targets[i] - x) <= 0:
                out_psi[i], out_dpsi[i] = y
                i += 1
            if not fixed_step and not hit:
                h = step * min(5.0, max(0.2, 0.9 * err ** -0.2 if err > 0 else 5.0))
        else:
            rejected += 1
            h = step * max(0.2, 0.9 * err ** -0.2)
            if h < 1e-14 * max(1.0, abs(x)):
                raise StepUnderflow(f"step size underflow at x = {x}")
    inv = np.empty_like(order)
    inv[order] = np.arange(len(order))
    return OdeSolution(samples, out_psi[inv], out_dpsi[inv], steps, rejected)


# -- Schwarzian and invariant consistency ------------------------------------------

def schwarzian(zmap, x, h: float = 1e-2):
    """``{z, x} = z'''/z' - 1.5 (z''/z')**2`` by sixth-order differences."""
    x = np.asarray(x, dtype=float)
    d1 = derivative(zmap, x, 1, h)
    d2 = derivative(zmap, x, 2, h)
    d3 = derivative(zmap, x, 3, h)
    if np.any(d1 == 0) or not np.all(np.isfinite(d1 * d2 * d3)):
        raise DerivativeBreakdown("z'(x) vanishes or derivatives are not finite")
    out = d3 / d1 - 1.5 * (d2 / d1) ** 2
    return out if out.ndim else float(out)


def bose_consistency_check(spec: PotentialSpec, E: float, z_points, signs="+++",
                           h: float | None = None) -> float:
    """Largest mismatch of ``rho**2 I(z) + {z, x}/2`` against
    ``kappa (E - V(z))`` over ``z_points``, relative to the largest of 1
    and the three terms.

    ``I = g - f'/2 - f**2/4`` is the invariant of ``u'' + f u' + g u = 0``
    built from the Heun parameters of ``spec`` at energy ``E``. The
    Schwarzian is taken from differences of ``x(z)`` through
    ``{z, x} = -{x, z} / x'(z)**2``, and ``rho = 1/x'(z)`` from the same
    differences, so neither relies on the formula for ``rho``.
    """
    hp = heun_params(spec, E, exponent_set(spec, E, signs))
    worst = 0.0
    for z in np.atleast_1d(np.asarray(z_points, dtype=float)):
        interval_of(spec, float(z))
        dist = min(abs(z - float(a)) for a in spec.a)
        step = h if h is not None else 0.02 * dist
        xmap = lambda zz: x_of_z(spec, zz)
        S_xz = schwarzian(xmap, z, step)
        dxdz = float(derivative(xmap, z, 1, step))
        S = -S_xz / dxdz**2
        r = 1 / dxdz
        f, df, g = hp.coefficients(z)
        inv = g - df / 2 - f * f / 4
        lhs = r * r * inv + S / 2
        rhs = spec.kappa * (E - potential_value(spec, z))
        ref = max(1.0, abs(rhs), abs(r * r * inv), abs(S / 2))
        worst = max(worst, abs(complex(lhs) - rhs) / ref)
    return worst
