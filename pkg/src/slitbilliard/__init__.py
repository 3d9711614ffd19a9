"""Wave-packet dynamics in two-slit billiards.

Finite-difference propagation of a Gaussian packet through hard-wall
billiards with two slits on the lower side, plus the screen observables
and post-processing used to study when interference fringes survive.
"""

from .grid import (
    ConfigurationError,
    GridSpec,
    StructuralError,
    make_grid,
    mirror_x,
    norm_squared,
)
from .geometry import (
    PotentialField,
    RightTriangle,
    SinaiRing,
    SlitSpec,
    Square,
    TriangleArc,
    billiard_mask,
    build_absorber,
    build_billiard,
    carve_slits,
    potential_symmetry_defect,
)
from .packet import PacketSpec, gaussian_packet, packet_symmetry_defect
from .propagator import (
    EvolutionState,
    NumericalInstability,
    StepperConfig,
    apply_hamiltonian,
    evolve,
    stability_report,
    step,
)

from .experiment import (
    ExperimentConfig,
    load_config,
    recipe,
    reduced,
    run_experiment,
    run_one_slit_pair,
    simulate,
    validate_config,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigurationError", "GridSpec", "StructuralError", "make_grid", "mirror_x", "norm_squared",
    "PotentialField", "RightTriangle", "SinaiRing", "SlitSpec", "Square", "TriangleArc",
    "billiard_mask", "build_absorber", "build_billiard", "carve_slits",
    "potential_symmetry_defect", "PacketSpec", "gaussian_packet", "packet_symmetry_defect",
    "EvolutionState", "NumericalInstability", "StepperConfig", "apply_hamiltonian", "evolve",
    "stability_report", "step", "ExperimentConfig", "load_config", "recipe", "reduced",
    "run_experiment", "run_one_slit_pair", "simulate", "validate_config",
]
