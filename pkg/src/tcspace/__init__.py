"""Exact test-configuration geometry: weighted flags, Tits distances and toric invariants."""

from .errors import (AlmostTrivial, AlmostTrivialImage, DuplicateAbscissa, FitUnstable,
                     InputError, MathError, ParseError, TCSpaceError, UnreachablePoint,
                     UnverifiedFit, ValidationError, ZeroB0, ZeroNorm, ZeroVector,
                     ZeroWeightVector)
from .exact import FitPolynomial, QuadExt, floor_quad, interpolate, leading_coefficient
from .flags import (ApartmentPoint, TrivialFlag, WeightedFlag, canonical_form, common_apartment,
                    flag_from_weights, is_adapted, is_equivalent, tits_cosine, tits_distance,
                    weight_of_vector)
from .linalg import Subspace
from .testbed import (MonomialConfig, NormConvention, ToricPolarization, chow_paper,
                      df_classical, induced_weight, is_almost_trivial, l2_norm_sq, sections,
                      weight_polynomials)
from .direct_system import ConfigPoint, d_infinity, iota, retraction, segre
from .filtrations import (FiltrationKind, FiltrationSpec, approximant, cauchy_table,
                          filtration_l2, trace_chain_check)

__version__ = "0.1.0"
