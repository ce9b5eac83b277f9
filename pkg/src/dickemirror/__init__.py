"""Finite-J and thermodynamic-limit simulation of a Dicke cavity with a vibrating mirror."""

from .exceptions import (
    BasisError,
    ConvergenceError,
    CutoffError,
    DickeMirrorError,
    DimensionError,
    DomainError,
    EnergyDriftError,
    PhaseError,
    StateError,
)
from .hilbert import (
    CompositeBasis,
    FockMode,
    Operator,
    SpinSector,
    embed,
    fock_annihilation,
    spin_operators,
)
from .model import (
    ModelParams,
    PhysicalCavityParams,
    build_dicke,
    build_full,
    build_hp,
    build_mirror_driven,
    build_normal_phase,
    build_superradiant,
    derive_couplings,
    eta_zero_position,
)
from .spectra import EigenResult, dense_spectrum, ground_state, lanczos
from .states import DensityMatrix, PureState
from .dynamics import (
    TimeSeries,
    analytic_occupation,
    evolve,
    expectation,
    occupation_trajectory,
    reduce_to_mirror,
    von_neumann_entropy,
)
from .semiclassical import (
    ClassicalState,
    classical_energy,
    coherent_coordinates,
    eom_rhs,
    fixed_points,
    forced_oscillator_drive,
    integrate,
)

__version__ = "0.1.0"
