"""diskflow: global analysis of planar polynomial ODE systems via Poincare
compactification, with the endemic SIR model as the built-in benchmark."""

from .poly2 import Poly2, parse_poly, U1, U2, PLANE
from .field import (PlanarField, Equilibrium, EigenPair, eigen, classify,
                    find_equilibria, make_equilibrium)
from .compact import (ChartField, DiskPoint, to_chart, infinity_equilibria,
                      plane_to_disk, chart_to_disk)
from .cmf import CmfReduction, reduce, reduce_chart_infinity, verdict_to_flow_direction
from .flow import (Trajectory, LyapunovReport, DecayFit, integrate,
                   trace_on_disk, lyapunov_check, fit_decay)
from .sir import SirParams, SirAnalysis, make_field, analyze, lyapunov, reconstruct_r
from .render import PortraitSpec, render_portrait, ring_seeds

__version__ = "0.1.0"

__all__ = [
    "Poly2", "parse_poly", "U1", "U2", "PLANE",
    "PlanarField", "Equilibrium", "EigenPair", "eigen", "classify",
    "find_equilibria", "make_equilibrium",
    "ChartField", "DiskPoint", "to_chart", "infinity_equilibria",
    "plane_to_disk", "chart_to_disk",
    "CmfReduction", "reduce", "reduce_chart_infinity", "verdict_to_flow_direction",
    "Trajectory", "LyapunovReport", "DecayFit", "integrate", "trace_on_disk",
    "lyapunov_check", "fit_decay",
    "SirParams", "SirAnalysis", "make_field", "analyze", "lyapunov",
    "reconstruct_r",
    "PortraitSpec", "render_portrait", "ring_seeds",
]
