"""Adiabatic transfer of motional squeezing into collective spin squeezing.

A trapped-ion chain coupled to one motional mode through the Tavis-Cummings
interaction converts a squeezed phonon state into an entangled spin-motion
state. The package provides the sector-resolved Hamiltonian, time evolution
(pure and with collective dephasing), exact and asymptotic quantum Fisher
information, and spin-squeezing figures of merit.
"""
from .analytics import qfi, qfi_asymptotic, qfi_closed_form, qfi_direct_sum, qfi_max_leading, qfi_saturation
from .basis import enumerate_sector, enumerate_sector_inhomogeneous, sector_dim
from .config import ScenarioConfig, load_config
from .dynamics import (FIG2_PULSES, FIG4_PULSES, BlockDensityMatrix, DephasingSpec, IntegratorSettings,
                       PulseSchedule, evolve_lindblad, evolve_schrodinger, target_fidelity)
from .errors import (ArgumentError, CapacityError, ConfigError, IntegratorError, MeanSpinDirectionError,
                     NumericalError, UnsupportedInputError)
from .hamiltonian import CouplingSpec, ModeProfile, breathing_mode_profile, build_breathing_sector, build_tc_sector
from .metrology import apply_rotation_z, qfi_mixed, qfi_pure, report, spin_moments, squeezing_parameter
from .states import (DisplacementSpec, PureState, SqueezeSpec, adiabatic_target_populations, boson_amplitudes,
                     initial_product_state, squeezed_amplitudes)
from .sweep import run_scenario

__version__ = "0.1.0"
