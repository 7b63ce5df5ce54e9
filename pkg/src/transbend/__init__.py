"""Isometric bendings of surfaces of translation ``x(u, v) = a(u) + b(v)``."""

from .bend import (BendingFamily, SignChoice, bianchi_bending, bianchi_family, bianchi_interval,
                   crease_events, flatness_predicates, koko_bending, koko_family, koko_interval,
                   triangle_gaps)
from .cone import ConeBasis, QuadricCone, classify_cone, fit_cone, jacobi_eigh, mirror_basis
from .curves import (CurveSpec, SampledCurve, VectorSeries, arc_length_reparam,
                     cumulative_cross_integral, sample_curve, tangent_set, total_length)
from .errors import (BasisConstructionError, DegenerateSurfaceError, GridMismatchError,
                     HypothesisError, InconsistentVelocityError, InvalidSpecError,
                     ParameterRangeError, SingularCurveError, TransbendError)
from .infbend import (RotationField, VelocityField, cone_infinitesimal, cone_rotation_closed_form,
                      perp_planes_infinitesimal, planar_normal_infinitesimal, rotation_field,
                      two_slope_infinitesimal, universal_infinitesimal)
from .surface import (FundamentalForms, QuadMesh, TranslationSurface, assemble_surface, export_obj,
                      fundamental_forms, to_quad_mesh)
from .verify import (BurgersVector, IsometryReport, burgers_vector, discrete_checks,
                     doubly_ruled_residual, metric_deviation, second_form_rates, strain_residual)

__version__ = "0.1.0"
