"""Austen plots: sensitivity analysis for unobserved confounding."""

from ._core import (
    AustenError,
    DegenerateDataError,
    InputError,
    PredictionFrame,
    bias,
    bias_contour,
    calibrate,
    delta_from_r2,
    digamma,
    r2_par,
    render_svg,
    run_cli,
    tau_hat,
    trigamma,
)

__all__ = [
    "AustenError",
    "DegenerateDataError",
    "InputError",
    "PredictionFrame",
    "bias",
    "bias_contour",
    "calibrate",
    "delta_from_r2",
    "digamma",
    "r2_par",
    "render_svg",
    "run_cli",
    "tau_hat",
    "trigamma",
]
