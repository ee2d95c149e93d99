"""Two-sex interacting particle systems on finite tori."""
from .engine import (AbsorbingState, CoupledPair, CouplingViolation, DensitySeries, IpsState, ReplicaBatch,
                     final_states, make_rng, run_coupled, run_until, simulate_replicas, step_event)
from .rates import (StateSpaceTooLarge, birth_rate, birth_rate_g1, birth_rate_g2,
                    decoupled_contact_rates, death_rate, decode, encode, exact_generator_matrix,
                    max_flip_rate, neighbour_counts, total_rate, zeta_generator_matrix,
                    zeta_projection, zeta_rates)
from .torus import (FEMALE, MALE, IpsParams, Lattice, Model, SiteState, Stirring, as_flat,
                    config_leq, full_config, lattice, lattice_for, random_config)
from .experiments import (DecayResult, ExtinctionResult, HydroResult, extinction_bound,
                          extinction_experiment, hydrodynamic_check, mean_field_profile, sinusoid,
                          upper_invariant_decay)
