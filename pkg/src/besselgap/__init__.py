"""Gap probabilities of the Bessel point process on a union of intervals.

Direct Fredholm determinants (``fredholm``) are compared with large-r
expansions (``asym``) built from a hyperelliptic surface (``surface``), its
theta function (``theta``), Abel map (``abel``) and the linear flow on the
Jacobian torus (``flow``).
"""
from .surface import Configuration, SurfaceData, build_surface, validate
from .theta import ThetaEvaluator
from .abel import AbelMap, endpoint_half_periods
from .flow import Flow, classify_flow
from .asym import Regime, build_expansion, fit_constant, predict_log_F
from .fredholm import log_det

__all__ = [
    "AbelMap", "Configuration", "Flow", "Regime", "SurfaceData", "ThetaEvaluator",
    "build_expansion", "build_surface", "classify_flow", "endpoint_half_periods",
    "fit_constant", "log_det", "predict_log_F", "validate",
]
