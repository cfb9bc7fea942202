"""Characteristic ODEs of the 2D Euler adjoint: coefficient algebra, curve tracing
through discrete fields, and compatibility-integral verification."""
from .analytic import (GammaSamples, Profile, StripeField, emit_stripe_grid, gamma_along,
                       stripe_adjoint, verify_3d_streamtrace_identity)
from .compat import CompatReport, k_integrals, write_report
from .errors import AdjcharError
from .field import FieldGrid, FunctionField, SamplePoint, load_field, sample, save_field
from .forms import (CharDirections, FormResidual, characteristic_directions, characteristic_residual,
                    form_matrix, numeric_rank, streamtrace_residuals)
from .gas import (AIR, ConservState2, ConservState3, GasModel, Primitive2, prandtl_meyer,
                  primitive_from_conservative, riemann_invariants)
from .jacobians import (CoeffTable, Direction, characteristic_determinant, coefficient_table,
                        coefficient_table_factored, jacobian_transpose_2d, jacobian_transpose_3d,
                        left_eigenvectors)
from .tracer import Curve, Termination, TraceConfig, resample_adjoint_rates, trace

__version__ = "0.1.0"
