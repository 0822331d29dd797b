"""Layered sphere packings of S^3 with average kissing number tending to 666/53,
and the shell-area upper bound 8 + 4 sqrt 3 for finite ball packings in R^3."""

from .construction import (
    LIMIT_K,
    build_d600,
    build_pn,
    build_sigma,
    layer_tallies,
    verify_d600_properties,
    verify_layer_interface,
    verify_separation_claim,
)
from .geometry import (
    ConformalMapS3,
    EuclideanBall,
    SphericalBall,
    SphericalSphere,
    angular_distance,
    apply_conformal_to_ball,
    invert_point_in_sphere,
    stereographic_project,
)
from .io import load_packing, report_convergence, save_packing
from .packing import (
    NerveGraph,
    Packing,
    build_nerve,
    check_nerve_condition,
    packing_stats,
    project_packing,
    validate_packing,
)
from .shell import (
    ShellParams,
    cap_area_fraction,
    kissing_pair_fraction,
    optimize_rho,
    pair_sum,
    shell_certificate,
)

__version__ = "0.1.0"
