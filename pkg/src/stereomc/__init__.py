"""Sphere-projected MCMC: random-walk and bouncy-particle samplers with tuning theory."""

from .errors import (
    ClockError,
    DegenerateCase,
    DegenerateDraw,
    DegenerateGradient,
    DegenerateProposal,
    DegenerateSeries,
    DimensionMismatch,
    DomainError,
    EmptyTrace,
    InsufficientPath,
    PoleError,
    SchemaError,
    StereoError,
    UnsupportedFamily,
)
from .geometry import (
    EPS_POLE,
    ProjectionConfig,
    SpherePoint,
    log_jacobian,
    log_target_sphere,
    north_pole,
    south_pole,
    sp_forward,
    sp_inverse,
    star_norm_sq,
    tangent_grad_log_target,
)
from .rng import RngStream
from .targets import (
    MarginalModel,
    scale_mixture_marginal,
    scaled_t_roughness,
    TargetModel,
    c_nu,
    c_nu_ratio,
    ergodicity_class,
    g_k,
    gaussian,
    gaussian_marginal,
    product_iid,
    student_t,
    student_t_marginal,
)
from .sps import RwmConfig, Trace, run_chain, rwm_step, rsps_step, sps_propose, sps_step, gsps_step
from .sbps import (
    ClockSettings,
    EventPath,
    PhaseState,
    SbpsConfig,
    bounce_intensity,
    bps_run,
    discretize_path,
    first_arrival_inversion,
    first_arrivals_inversion,
    first_arrival_thinning,
    flow,
    refresh_velocity,
    reflect_velocity,
    sbps_run,
    simulate_bounce_time,
)
from .diagnostics import (
    DiagnosticsReport,
    acceptance_rate,
    acf,
    batch_means_se,
    esjd,
    esjd_per_coordinate,
    ess_batch_means,
    ess_per_switch,
    observable_values,
)
from .theory import (
    TuningReport,
    argmax_esjd,
    clt_mean_var,
    diffusion_speed,
    ell_from_h,
    esjd_limit,
    expected_accept,
    h_from_ell,
    latitude_approx,
    optimal_tuning,
    transient_step_size,
)

__version__ = "0.1.0"
