"""Adaptive mode selection for multiuser MISO cognitive networks with
limited (purchased) interference-CSI feedback."""

from .closed_form import (SystemConfig, UtilityGrid, exp_integral_e1, i1, i2,
                          interference_bound, power_cap, power_cap_delayed,
                          sinr_cdf, sinr_pdf, utility, utility_grid, utility_relaxed)
from .optimizer import (OptResult, RegimeThresholds, optimize_exhaustive,
                        optimize_relaxed, select_asymptotic_regime)

__all__ = [
    "SystemConfig", "UtilityGrid", "exp_integral_e1", "i1", "i2",
    "interference_bound", "power_cap", "power_cap_delayed", "sinr_cdf", "sinr_pdf",
    "utility", "utility_grid", "utility_relaxed",
    "OptResult", "RegimeThresholds", "optimize_exhaustive", "optimize_relaxed",
    "select_asymptotic_regime",
]

__version__ = "0.1.0"
