"""Schrodinger potentials solvable through the general Heun function."""
from .errors import HeunError, NumericalError, ValidationError
from .heun import (
    HeunParams,
    SeriesSolution,
    frobenius_eval,
    frobenius_termination,
    hypergeom_termination,
    hypergeometric_expansion,
    hypergeometric_expansion_eval,
)
from .potentials import (
    PotentialSpec,
    admissible_intervals,
    build_r_poly,
    catalog,
    potential_value,
    rho,
    x_of_z,
    z_of_x,
)
from .solutions import (
    ClosedForm,
    Wavefunction,
    build_wavefunction,
    cip_reduction_check,
    exponents,
    fig2_data,
    table2_restrict,
)
from .special import ellipk, gauss_2f1, hyp2f1_series, jacobi_sn
from .triads import Triad, canonical_classes, canonical_order, enumerate_triads
from .verify import bose_consistency_check, ode_integrate, schrodinger_residual

__version__ = "0.1.0"

__all__ = [
    "ClosedForm",
    "HeunError",
    "HeunParams",
    "NumericalError",
    "PotentialSpec",
    "SeriesSolution",
    "Triad",
    "ValidationError",
    "Wavefunction",
    "admissible_intervals",
    "bose_consistency_check",
    "build_r_poly",
    "build_wavefunction",
    "canonical_classes",
    "canonical_order",
    "catalog",
    "cip_reduction_check",
    "ellipk",
    "enumerate_triads",
    "exponents",
    "fig2_data",
    "frobenius_eval",
    "frobenius_termination",
    "gauss_2f1",
    "hyp2f1_series",
    "hypergeom_termination",
    "hypergeometric_expansion",
    "hypergeometric_expansion_eval",
    "jacobi_sn",
    "ode_integrate",
    "potential_value",
    "rho",
    "schrodinger_residual",
    "table2_restrict",
    "x_of_z",
    "z_of_x",
]
