"""vartherm: simulation of finite-dimensional thermodynamic systems and a 1D
multicomponent Navier-Stokes-Fourier fluid, with first-law and second-law
verification built into every trajectory."""

from .diagnostics import (DiagnosticsReport, assemble_report,
                          detailed_energy_balance, equilibrium_summary,
                          first_law_residual, internal_entropy_production,
                          second_law_check)
from .eos import GAS_CONSTANT, IdealGasEOS, MolarState, mixture_properties
from .evolution import (FluxSnapshot, StateRate, rhs_nonsimple_heat,
                        rhs_nonsimple_heat_mass, rhs_open, rhs_reaction,
                        rhs_simple, rhs_simple_diffusion, solve_accelerations)
from .general_form import (abstract_energy_balance, abstract_system,
                           constraint_residual, multiplier_recovery,
                           trajectory_constraint_residuals,
                           trajectory_multipliers)
from .integrators import IntegratorConfig
from .lagrangian import (LagrangianModel, chemical_potential, energy,
                         temperature)
from .models import (Scenario, make_adiabatic_piston, make_membrane,
                     make_open_piston, make_piston, make_reaction_cell,
                     make_two_compartment, validate_scenario)
from .nsf1d import (Fluid1DState, FluidEOS, FluidScenario, FluidSpecies,
                    TransportCoefficients, fluid_diagnostics, linear_fluxes,
                    make_nsf_scenario, nsf_rhs, run_fluid)
from .phenomenology import PhenomenologyModel, constant_phenomenology
from .reactions import ReactionNetwork, affinity, lavoisier_check
from .simulate import (Trajectory, run_scenario, step_adaptive,
                       step_implicit_midpoint, step_rk4)
from .state import (HeatSourceSpec, PortSpec, SystemTopology, ThermoState)

__version__ = "0.1.0"
