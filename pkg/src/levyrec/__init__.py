"""Recurrence and transience of planar Levy and Levy-type processes with radial symbols."""
from ._accel import NUMBA_ENABLED, backend_name, configure_threads
from .asymptotics import AsymptoticFit, Decision, DecisionBands, GridSpec, fit_asymptote, fit_samples
from .core import (ORIGIN, DeclaredTail, EnvelopeSelector, FinitePart, LevyTriplet2D, ParamField, ProcessFamily,
                   RadialDensity, ball_tail, cumulative_tail_integral, cumulative_tail_integral_at,
                   cumulative_tail_integral_direct, eval_symbol, halfplane_tail, quasi_unimodality_certificate,
                   radial_symbol_profile, strip_mass, truncated_second_moment)
from .criteria import (INCONCLUSIVE, RECURRENT, TRANSIENT, ClassificationReport, CriteriaConfig, Verdict,
                       classify_by_tails, classify_chung_fuchs, classify_regvar, classify_sufficient_p5, reconcile)
from .errors import (ConfigError, FitError, LevyRecError, ModelError, QuadratureError, TruncationError,
                     UnsupportedModelError)
from .families import (annulus, brownian, gamma_constant, grid_family, log_power, power_tail, stable, stable_like,
                       subordinated, with_rings)
from .montecarlo import (OccupationEstimate, SimConfig, estimate_ball_probability, fit_return_exponent,
                         simulate_levy_path, simulate_stable_like_path)
from .transforms import (IDENTITY, PlaneRotation, linear_transform, perturbation_equivalent, rotate_family,
                         tail_dominates, transfer_classification)

__version__ = "0.1.0"
