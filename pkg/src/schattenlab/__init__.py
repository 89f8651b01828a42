"""Numerical laboratory for composition operators of the unit disc.

Construct symbols (polynomials, scaled rotations, outer functions with
prescribed boundary decay), then interrogate them: boundary level sets and
pull-back measures, truncated-matrix spectra and Schatten partial sums,
closed-form integral criteria with divergence diagnostics, and Fourier-side
capacities of contact sets.
"""

from .boundary_sets import (BoundarySet, cantor_set_matching_measure,
                            make_cantor_set, make_generalized_cantor_set,
                            neighborhood_measure)
from .capacity import (CircleMeasure, alpha_energy, capacity_estimate,
                       capacity_test_integral, equilibrium_measure,
                       kernel_equivalence_checks, project_to_simplex,
                       weak_type_check)
from .counting import (CountingMeasureReport, LueckingSums, Region,
                       counting_measure, counting_measure_by_roots,
                       luecking_sums, nevanlinna_counting)
from .criteria import (CriterionResult, conjugate_function,
                       conjugate_minorant, conjugate_sandwich_fit,
                       hilbert_transform, levelset_integral,
                       one_point_criteria, outer_boundary_argument,
                       weight_contact_integral)
from .levelsets import (DyadicGrid, LevelSetProfile, boundary_trace,
                        compactness_diagnostic, level_set_profile,
                        pullback_box_measures)
from .operators import (AtomicMeasure, CompositionMatrix,
                        HilbertSchmidtNorm, PullbackCountingMeasure,
                        SchattenPartial, SpaceParams, SpectralReport,
                        berezin_schatten_integral, berezin_transform,
                        composition_matrix, hilbert_schmidt_norm,
                        hs_norm_series, schatten_partial, singular_values,
                        toeplitz_matrix)
from .symbols import (OuterSymbol, PolynomialSymbol, ScaledRotationSymbol,
                      Symbol)
from .weights import WeightFunction, admissibility_report, make_weight

__all__ = [name for name in dir() if not name.startswith("_")]
