"""Mean-field reaction-diffusion systems and their finite-difference solver."""
from .profiles import bump_f0, bump_h, gaussian
from .solver import InstabilityError, PdeField, evolve, ode_solution, stability_limit, step_rd
from .systems import (COMPONENTS, MONITORED, NoRootsError, ReactionSpec, System, contact_root,
                      reaction, rhs_contact, rhs_individual, rhs_sys9, rhs_sys10, rhs_sys11,
                      rhs_sys12, sys10_fixed_points, sys11_roots, sys12_coefficients,
                      upper_equilibrium, wave_integral_closed_form, wave_integral_criterion)
