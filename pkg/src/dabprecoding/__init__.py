"""Distortion-aware linear precoding for multiuser MISO downlinks with nonlinear PAs."""

from .channel import (
    ChannelSet,
    GeometryConfig,
    LinkBudget,
    array_response,
    db_to_linear,
    dbm_to_watts,
    draw_channels,
    fixed_channels,
    noise_power,
)
from .config import PatternConfig, SweepConfig, load_config
from .errors import (
    ConfigError,
    DabError,
    DegenerateChannelError,
    InvalidInputError,
    ProjectionInfeasibleError,
    SingularChannelError,
)
from .harness import run_convergence, run_pattern, run_sweep
from .metrics import PatternPoint, SindrBreakdown, radiation_pattern, sindr, sum_rate
from .optimizer import (
    AscentTrace,
    DabResult,
    OptimizerOptions,
    dab_precoder,
    gamma_matrix,
    multi_init_dab,
    sum_rate_gradient,
    upsilon_matrix,
)
from .pa import (
    DEFAULT_PA,
    PaParams,
    apply_pa,
    bussgang_gain,
    distortion_covariance,
    expected_output_power,
    sample_distortion,
)
from .precoding import mrt, project_power, zf

__version__ = "0.1.0"
