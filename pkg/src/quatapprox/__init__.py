"""Hurwitz-quaternion arithmetic and Diophantine approximation experiments.

The package is organised around five layers:

* :mod:`quatapprox.hurwitz` — exact arithmetic in the Hurwitz order
  (division with remainder, gcd, enumeration by norm, separation bounds).
* :mod:`quatapprox.lattice` — vectorised enumeration/scan engines shared by
  everything that searches over denominators.
* :mod:`quatapprox.approx` — Dirichlet-type searches, approximation
  constants, and the nested-hypercube construction of badly approximable
  points.
* :mod:`quatapprox.resonant` — resonant sets R_q, near-resonant volumes and
  the local ubiquity check.
* :mod:`quatapprox.metrical` — critical sums, the eta/rho/varpi schedule and
  its property suite, coverage estimates, cover-sum exponent scans and the
  simultaneous R^4 comparison.

The command line entry point lives in :mod:`quatapprox.cli`.
"""

from .approx import (
    Approximant,
    BadConstructionConfig,
    BadConstructionResult,
    construct_badly_approximable,
    dirichlet_search,
    good_approximants,
    markov_constants,
    run_bad_construction,
)
from .errors import InternalInvariantError, PropertyFailure, ValidationError
from .hurwitz import (
    ENUM_NORM_LIMIT,
    MAX_DOUBLED_COORD,
    OMEGA,
    ONE,
    UNITS,
    ZERO,
    HurwitzInt,
    HurwitzRational,
    RationalQuaternion,
    RealQuaternion,
    canonical_associate_left,
    canonical_associate_right,
    div_rem_left,
    div_rem_right,
    enumerate_by_norm,
    exact_right_div,
    fractional_part,
    gcd_left,
    gcd_right,
    is_prime,
    lipschitz_count_formula,
    nearest_hurwitz_doubled,
    separation_gap,
    to_rational,
)
from .lattice import (
    class_representatives,
    class_representatives_range,
    scan_min,
    scan_reps,
)
from .metrical import (
    ApproxFunction,
    DimensionFunction,
    EtaSchedule,
    build_eta,
    compare_sums,
    cover_sum_exponent,
    coverage_sweep,
    critical_sum,
    embedding_check,
    euler_maclaurin_tail,
    measure_estimate,
    rho_properties,
    simultaneous_dirichlet,
)
from .resonant import (
    RESONANT_NORM_LIMIT,
    count_resonant,
    enumerate_resonant,
    exclusion_mass,
    near_resonant_volume,
    separation_audit,
    ubiquity_check,
)

__version__ = "0.1.0"

__all__ = [
    "ENUM_NORM_LIMIT",
    "MAX_DOUBLED_COORD",
    "OMEGA",
    "ONE",
    "RESONANT_NORM_LIMIT",
    "UNITS",
    "ZERO",
    "Approximant",
    "ApproxFunction",
    "BadConstructionConfig",
    "BadConstructionResult",
    "DimensionFunction",
    "EtaSchedule",
    "HurwitzInt",
    "HurwitzRational",
    "InternalInvariantError",
    "PropertyFailure",
    "RationalQuaternion",
    "RealQuaternion",
    "ValidationError",
    "build_eta",
    "canonical_associate_left",
    "canonical_associate_right",
    "class_representatives",
    "class_representatives_range",
    "compare_sums",
    "construct_badly_approximable",
    "count_resonant",
    "cover_sum_exponent",
    "coverage_sweep",
    "critical_sum",
    "euler_maclaurin_tail",
    "dirichlet_search",
    "div_rem_left",
    "div_rem_right",
    "embedding_check",
    "enumerate_by_norm",
    "enumerate_resonant",
    "exact_right_div",
    "exclusion_mass",
    "fractional_part",
    "gcd_left",
    "gcd_right",
    "good_approximants",
    "is_prime",
    "lipschitz_count_formula",
    "markov_constants",
    "measure_estimate",
    "near_resonant_volume",
    "nearest_hurwitz_doubled",
    "rho_properties",
    "run_bad_construction",
    "scan_min",
    "scan_reps",
    "separation_audit",
    "separation_gap",
    "simultaneous_dirichlet",
    "to_rational",
    "ubiquity_check",
    "__version__",
]
