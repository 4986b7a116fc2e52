"""
N-width laboratory: snapshot sets, width measurements and decay fits.
"""

from .rates import DecayFit, fit_subexponential_decay, greedy_rate_from_width, loglog_slope
from .snapshots import SnapshotSet, psi_function, psi_in_manifold_check
from .widths import (
    NWidthReport,
    advection_lower_bound,
    advection_nwidth_demo,
    advection_parametric_demo,
    measure_widths,
    thermal_contrast,
)

__all__ = [
    "DecayFit",
    "fit_subexponential_decay",
    "greedy_rate_from_width",
    "loglog_slope",
    "SnapshotSet",
    "psi_function",
    "psi_in_manifold_check",
    "NWidthReport",
    "advection_lower_bound",
    "advection_nwidth_demo",
    "advection_parametric_demo",
    "measure_widths",
    "thermal_contrast",
]
