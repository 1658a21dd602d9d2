"""Numerical toolkit for the Bezout equation sum_k g_k f_k = 1 on the unit
disc, for analytic data whose first n derivatives are bounded (or extend
continuously to the circle or to an open arc set).

Submodules:

* ``series``   -- truncated Taylor / boundary representations, the angular
  derivative D, and the algebra norms;
* ``grid``     -- polar quadrature, the discrete dbar operator, the solid
  Cauchy transform, Green's formula and the Littlewood-Paley identity;
* ``corona``   -- the constructive pipeline phi -> Phi -> Psi -> g with
  analytic projection and Neumann refinement;
* ``carleson`` -- Carleson box norms and embedding constants for log-weighted
  derivative measures;
* ``extend``   -- approximate holomorphic extension across boundary arcs;
* ``cli``      -- the ``coronakit`` command-line interface.
"""

from .series import (
    MEAN_VALUE_CONSTANT,
    AnalyticVectorFunction,
    BoundaryVectorFunction,
    NormReport,
    algebra_norm,
    angular_derivative,
    boundary_trace,
    compose,
    dl_norm,
    dot,
)
from .grid import (
    DiscField,
    PolarGrid,
    cauchy_transform,
    dbar,
    ddz,
    green_rhs,
    h2_norm,
    integrate,
    littlewood_paley_norm,
    make_grid,
)
from .corona import (
    AugmentedData,
    CoronaData,
    CoronaSolution,
    RefinementError,
    UncertifiableDataError,
    assemble_solution,
    augment,
    certify_min_modulus,
    correction_rhs,
    dbar_phi,
    phi_field,
    refine_neumann,
    solve_corona,
    solve_correction,
)
from .carleson import (
    CarlesonReport,
    MeasureSamples,
    box_norm,
    default_test_family,
    embedding_const,
    log_weight_measure,
    uchiyama_bound,
)
from .extend import (
    ArcBox,
    ArcSpec,
    BudgetError,
    ExtensionResult,
    approximate_extension,
    correction_h,
    multi_arc_extension,
    radial_extension,
)

__version__ = "0.1.0"
