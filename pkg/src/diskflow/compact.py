"""Poincare compactification of planar polynomial fields.

The plane is embedded onto the upper hemisphere of the unit sphere; infinity
becomes the equator circle.  Charts U1 (toward +v0 infinity) and U2 (toward
+v1 infinity) carry desingularized polynomial dynamics in coordinates
(lam, x), where lam = 0 is the equator.  Only the upper hemisphere and the
U-charts are supported: the models of interest live in the first quadrant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .field import PlanarField, Equilibrium, make_equilibrium
from .poly2 import Poly2, U1, U2, PLANE


@dataclass(frozen=True)
class ChartField:
    """Desingularized dynamics on a chart: polynomials in (lam, x).

    ``lam_dot``/``x_dot`` are the tau-derivatives after multiplying the raw
    chart field by lam**rescale_power; lam divides lam_dot by construction,
    so {lam = 0} is invariant.
    """

    chart: str
    lam_dot: Poly2
    x_dot: Poly2
    rescale_power: int
    source_degree: int

    def as_planar_field(self) -> PlanarField:
        """The chart dynamics as a planar field over (lam, x)."""
        return PlanarField(self.lam_dot, self.x_dot)

    def to_json_dict(self) -> dict:
        return {
            "chart": self.chart,
            "lam_dot": self.lam_dot.term_strings(),
            "x_dot": self.x_dot.term_strings(),
            "lam_dot_str": str(self.lam_dot),
            "x_dot_str": str(self.x_dot),
            "rescale_power": self.rescale_power,
            "source_degree": self.source_degree,
        }


@dataclass(frozen=True)
class DiskPoint:
    """Coordinates on the closed Poincare disk; the boundary is infinity."""

    u: float
    v: float

    def __post_init__(self):
        if self.u * self.u + self.v * self.v > 1.0 + 1e-12:
            raise ValueError(f"point ({self.u}, {self.v}) lies outside the disk")

    @property
    def at_infinity(self) -> bool:
        return abs(self.u * self.u + self.v * self.v - 1.0) <= 1e-12


def to_chart(f: PlanarField, chart: str) -> ChartField:
    """Transform a planar field of degree d to chart U1 or U2.

    For U2 the chart coordinates are (lam, x) = (1/v1, v0/v1); the chain
    rule gives lam' = -lam^2 q and x' = lam p - x lam q, and multiplying by
    lam**(d-1) clears all denominators.  U1 is symmetric with the roles of
    the two plane variables swapped.  Orbits on {lam > 0} are preserved with
    their time orientation (positive rescaling factor).
    """
    if chart == PLANE:
        raise ValueError("PLANE is the identity chart; nothing to transform")
    if chart not in (U1, U2):
        raise ValueError(f"unsupported chart {chart!r} (V-charts and the lower "
                         "hemisphere are not implemented)")
    if f.is_zero:
        raise ValueError("cannot compactify the zero field")
    d = f.degree
    pt = f.p.compactify_numerator(d, chart)
    qt = f.q.compactify_numerator(d, chart)
    lam = Poly2.var(0, ("lam", "x"))
    x = Poly2.var(1, ("lam", "x"))
    if chart == U2:
        lam_dot = -(lam * qt)
        x_dot = pt - x * qt
    else:
        lam_dot = -(lam * pt)
        x_dot = qt - x * pt
    return ChartField(chart=chart, lam_dot=lam_dot, x_dot=x_dot,
                      rescale_power=d - 1, source_degree=d)


def infinity_equilibria(cf: ChartField, x_max: float = 1e6) -> list[Equilibrium]:
    """Equilibria on the invariant line {lam = 0, x >= 0} of a chart field.

    Roots of x_dot(0, x) are found via the companion matrix of the monic
    polynomial; roots with |imag| < 1e-9 and x >= -1e-12 are kept, then
    polished and classified with the planar-field machinery.
    """
    # Restrict x_dot to lam = 0: a univariate polynomial in x.
    coeffs: dict[int, Fraction] = {}
    for (i, j), c in cf.x_dot.terms.items():
        if i == 0:
            coeffs[j] = c
    if not coeffs:
        # x_dot vanishes identically on the line: every point is an
        # equilibrium of the restricted flow; report only the corner (0,0).
        roots = [0.0]
    else:
        deg = max(coeffs)
        poly = np.zeros(deg + 1)
        for j, c in coeffs.items():
            poly[deg - j] = float(c)
        if deg == 0:
            roots = []
        else:
            rts = np.roots(poly)  # companion-matrix eigenvalues
            roots = sorted({round(float(r.real), 12) for r in rts
                            if abs(r.imag) < 1e-9 and r.real >= -1e-12
                            and r.real <= x_max})
    pf = cf.as_planar_field()
    out = []
    for x in roots:
        x = max(x, 0.0)
        exact = None
        # A root at the origin is exact by the invariance of {lam=0}.
        if x == 0.0 and cf.x_dot.eval((Fraction(0), Fraction(0))) == 0:
            exact = (Fraction(0), Fraction(0))
        out.append(make_equilibrium(pf, (0.0, x), exact=exact, chart=cf.chart))
    return out


def plane_to_disk(s: float, i: float) -> DiskPoint:
    """Central projection of a plane point onto the Poincare disk."""
    delta = math.sqrt(s * s + i * i + 1.0)
    return DiskPoint(s / delta, i / delta)


def chart_point_to_plane(lam: float, x: float, chart: str) -> tuple[float, float]:
    """Invert the chart projection for lam > 0."""
    if lam <= 0:
        raise ValueError("chart points with lam <= 0 have no finite preimage")
    if chart == U2:
        return (x / lam, 1.0 / lam)
    if chart == U1:
        return (1.0 / lam, x / lam)
    raise ValueError(f"unsupported chart {chart!r}")


def plane_point_to_chart(s: float, i: float, chart: str) -> tuple[float, float]:
    """Chart coordinates (lam, x) of a plane point."""
    if chart == U2:
        if i <= 0:
            raise ValueError("U2 requires v1 > 0")
        return (1.0 / i, s / i)
    if chart == U1:
        if s <= 0:
            raise ValueError("U1 requires v0 > 0")
        return (1.0 / s, i / s)
    raise ValueError(f"unsupported chart {chart!r}")


def chart_to_disk(pt: tuple[float, float], chart: str) -> DiskPoint:
    """Map a chart point (lam, x), lam >= 0, to the Poincare disk.

    lam = 0 lands exactly on the boundary circle.
    """
    lam, x = float(pt[0]), float(pt[1])
    if lam < 0:
        raise ValueError("chart points must have lam >= 0")
    n = math.sqrt(1.0 + x * x + lam * lam)
    if chart == U2:
        # Sphere point (x, 1, lam)/n; drop the vertical component.
        return DiskPoint(x / n, 1.0 / n)
    if chart == U1:
        return DiskPoint(1.0 / n, x / n)
    if chart == PLANE:
        return plane_to_disk(lam, x)
    raise ValueError(f"unsupported chart {chart!r}")


def point_to_disk(point: tuple[float, float], chart: str) -> DiskPoint:
    """Disk coordinates of a point given in any supported chart."""
    if chart == PLANE:
        return plane_to_disk(point[0], point[1])
    return chart_to_disk(point, chart)
