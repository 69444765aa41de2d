"""Equivariant Gromov-Hausdorff tooling for finite group actions."""

from .action_geometry import (
    action_pseudometric,
    action_seminorm,
    covering_multiplicity,
    is_net,
    metric_regime,
    minimal_net,
)
from .epgh import (
    ApproximationTriple,
    epgh_distance,
    epgh_estimate,
    epsilon_grid,
    find_triple,
    search_approximation,
    verify_approximation,
)
from .groups import (
    cyclic_group,
    dihedral_group,
    gamma_r,
    isometry_group,
    orbit_space,
    validate_action,
    validate_group,
)
from .lie import BumpPartition, ComConfig, ContinuifiedMap, KarcherMean, geodesic_distance, karcher_mean, rot2
from .metric import FiniteMetricSpace, ball, circle_space, gh_distance_bruteforce, validate_space
from .scenarios import gen_circle, gen_collapsing_torus, run_sequence
from .smoothing import (
    FiniteTarget,
    RotationTarget,
    check_monomorphism,
    homomorphism_defect,
    kernel,
    kernel_orbit_diameter,
    snap_to_homomorphism,
)

__version__ = "0.1.0"
