"""Lattice realization of Euclidean space as the delta-function subset of the
space of Schwartz distributions, with Gaussian integration over that space."""

from .borchers import (
    BorchersElement,
    State,
    gaussian_state,
    involution,
    positivity_check,
    product,
    state_eval,
)
from .correlation import correlation_deriv, correlation_mc, correlation_mc_many, correlation_wick, mean_pairing
from .deformation import (
    DeformedFunction,
    InjectionField,
    commutator,
    commutator_pairing,
    coordinate_commutation,
    deform,
    deform_state,
    quantum_point,
)
from .delta import (
    ProbeFamily,
    delta_add,
    delta_scale,
    dirac_measure_embed,
    embed_delta,
    translation_invariance_check,
    weakstar_semidist,
)
from .gaussian import (
    CovarianceForm,
    GaussianMeasure,
    bochner_check,
    hellinger_affinity,
    mc_charfun,
    riesz_embed,
    trace_diagnostic,
    translate_quasi_invariance,
)
from .grid import Distribution, Grid, Point, TestFunction, bump, inner, interpolate, pair, plateau, tensor
from .measure import (
    Measure,
    PointMeasureField,
    density_to_distribution,
    field_integral,
    integrate_against_measure,
)

__version__ = "0.1.0"
