"""Numerical checks of the interval-expansion machinery for the lily-pad system."""
from .assumption import (Assumption41Certificate, check_assumption41, default_samples,
                         eta_flow_batch, theta_cap_for_slide)
from .fields import (ETA, L1, R1, R2, R3, R4, REGION_NAMES, DominationCertificate, closure_masks,
                     eta, region_of, scaled_margin_exact, verify_domination, xi)
from .flow import FlowError, FlowPath, NoIntersection, flow_xi, phi_theta, ray_hit
from .geometry import (FlowGeometry, plateau_floor, plateau_gain, rate_condition,
                       ratio_condition_exact, shoulder_window)
from .lemmas import (DominanceCheck, ShoulderCheck, admissible_deltas, check_lemma44,
                     check_lemma45, f_hat, f_shifted, heat_kernel, heat_step, shoulder_zones)
from .trotter import (StarCertificate, TrotterResult, UpperCheck, condition_star_check,
                      default_upper_levels, rd_solution, separable_solution, trotter_run,
                      upper_check)

__all__ = [name for name in dir() if not name.startswith("_")]
