"""Fully implicit/explicit polynomial block integrators."""

from ._core import (
    DegenerateInterpolation,
    EigenSolverFailure,
    FimexError,
    Grid,
    InvalidArgument,
    LinearSolveFailure,
    MethodTableau,
    NewtonDivergence,
    PoleError,
    RegionScan,
    UnsupportedOrder,
    __version__,
    amplification,
    amplification_radius,
    build_propagator,
    expected_order,
    fit_order,
    integrate,
    integrate_dahlquist,
    integrate_kdv,
    integrate_vdp,
    log_spaced_steps,
    quad_weights,
    radau_nodes,
    region_S,
    region_S_hat,
    region_S_tilde,
    spectral_radius,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
