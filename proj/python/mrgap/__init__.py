"""Manifold reconstruction from noisy point clouds."""

from ._core import (
    GpHyperParams,
    InputError,
    NumericalError,
    Trace,
    add_gaussian_noise,
    denoise,
    estimate_dimension,
    gen_cassini,
    gen_circle,
    gen_ellipsoid,
    gen_plane,
    gen_torus,
    gp_predict,
    grmse,
    interpolate,
    load_csv,
    load_trace,
    local_covariance,
    local_frame,
    log_marginal,
    log_marginal_gradient,
    save_csv,
    set_thread_count,
    thread_count,
)

__all__ = [
    "GpHyperParams",
    "InputError",
    "NumericalError",
    "Trace",
    "add_gaussian_noise",
    "denoise",
    "estimate_dimension",
    "gen_cassini",
    "gen_circle",
    "gen_ellipsoid",
    "gen_plane",
    "gen_torus",
    "gp_predict",
    "grmse",
    "interpolate",
    "load_csv",
    "load_trace",
    "local_covariance",
    "local_frame",
    "log_marginal",
    "log_marginal_gradient",
    "save_csv",
    "set_thread_count",
    "thread_count",
]
