"""The SIR endemic model with births and deaths as a first-class object.

Model (susceptible S, infectious I; the recovered pool R decouples):

    dS/dt = A - beta*S*I - mu*S
    dI/dt = beta*S*I - q*I - mu*I
    dR/dt = q*I - mu*R

All four constants are strictly positive.  The basic reproduction number
R0 = A*beta / (mu*(q + mu)) is kept as an exact rational so the critical
boundary R0 = 1 is decidable, which is exactly where the center-manifold
analysis applies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping, Optional

from .field import PlanarField
from .flow import Trajectory
from .poly2 import Poly2, _as_fraction

SUBCRITICAL = "subcritical"
CRITICAL = "critical"
SUPERCRITICAL = "supercritical"

ENDEMIC_V = "endemic-V"
DISEASE_FREE_V = "disease-free-V"


@dataclass(frozen=True)
class SirParams:
    A: Fraction
    beta: Fraction
    mu: Fraction
    q: Fraction

    def __post_init__(self):
        for name in ("A", "beta", "mu", "q"):
            value = _as_fraction(getattr(self, name))
            object.__setattr__(self, name, value)
            if value <= 0:
                raise ValueError(f"parameter {name} must be strictly positive, "
                                 f"got {value}")

    @classmethod
    def from_mapping(cls, m: Mapping[str, object]) -> "SirParams":
        try:
            return cls(A=m["A"], beta=m["beta"], mu=m["mu"], q=m["q"])  # type: ignore[arg-type]
        except KeyError as e:
            raise ValueError(f"missing SIR parameter {e.args[0]!r}") from None

    def to_json_dict(self) -> dict:
        return {k: str(getattr(self, k)) for k in ("A", "beta", "mu", "q")}


@dataclass(frozen=True)
class SirAnalysis:
    r0: Fraction
    regime: str
    e0: tuple[Fraction, Fraction]
    e_star: Optional[tuple[Fraction, Fraction]]
    predicted_rate: Optional[Fraction]    # exponent of the subcritical decay
    predicted_slope: Optional[Fraction]   # reciprocal-law slope at criticality

    def to_json_dict(self) -> dict:
        return {
            "r0": str(self.r0),
            "regime": self.regime,
            "e0": [str(c) for c in self.e0],
            "e_star": None if self.e_star is None else [str(c) for c in self.e_star],
            "predicted_rate": None if self.predicted_rate is None else str(self.predicted_rate),
            "predicted_slope": None if self.predicted_slope is None else str(self.predicted_slope),
        }


def make_field(p: SirParams) -> PlanarField:
    """dS/dt = A - beta*S*I - mu*S, dI/dt = beta*S*I - (q+mu)*I, degree 2."""
    S = Poly2.var(0)
    I = Poly2.var(1)
    P = Poly2.const(p.A) - p.beta * S * I - p.mu * S
    Q = p.beta * S * I - (p.q + p.mu) * I
    return PlanarField(P, Q)


def analyze(p: SirParams) -> SirAnalysis:
    r0 = p.A * p.beta / (p.mu * (p.q + p.mu))
    if r0 < 1:
        regime = SUBCRITICAL
    elif r0 == 1:
        regime = CRITICAL
    else:
        regime = SUPERCRITICAL
    e0 = (p.A / p.mu, Fraction(0))
    e_star = None
    if r0 > 1:
        e_star = ((p.q + p.mu) / p.beta, p.mu / p.beta * (r0 - 1))
    predicted_rate = None
    predicted_slope = None
    if r0 < 1:
        predicted_rate = (p.q + p.mu) * (r0 - 1)
    if r0 == 1:
        predicted_slope = p.A * p.beta ** 2 / p.mu ** 2
    return SirAnalysis(r0=r0, regime=regime, e0=e0, e_star=e_star,
                       predicted_rate=predicted_rate,
                       predicted_slope=predicted_slope)


@dataclass(frozen=True)
class LyapunovFunction:
    """An evaluable Lyapunov-function descriptor with its domain."""

    function_id: str
    fn: Callable[[float, float], float]
    domain: str  # human-readable domain description

    def __call__(self, s: float, i: float) -> float:
        return self.fn(s, i)


def lyapunov(p: SirParams, which: Optional[str] = None) -> LyapunovFunction:
    """The regime-appropriate Lyapunov function.

    Supercritical: V = S - S* - S* log(S/S*) + I - I* - I* log(I/I*) on
    {S > 0, I > 0}, zero at the endemic equilibrium.  For R0 <= 1 the
    Volterra-type function V = S - A/mu - (A/mu) log(mu S / A) + I on
    {S > 0, I >= 0} is used; it is nonincreasing along solutions whenever
    R0 <= 1 and vanishes at the disease-free equilibrium.
    """
    an = analyze(p)
    if which is None:
        which = ENDEMIC_V if an.regime == SUPERCRITICAL else DISEASE_FREE_V
    if which == ENDEMIC_V:
        if an.e_star is None:
            raise ValueError("endemic-V requires R0 > 1 (E* does not exist)")
        s_star, i_star = float(an.e_star[0]), float(an.e_star[1])

        def v_endemic(s: float, i: float) -> float:
            if s <= 0 or i <= 0:
                raise ValueError(f"endemic-V undefined at (S, I) = ({s}, {i})")
            return (s - s_star - s_star * math.log(s / s_star)
                    + i - i_star - i_star * math.log(i / i_star))

        return LyapunovFunction(ENDEMIC_V, v_endemic, "{S > 0, I > 0}")
    if which == DISEASE_FREE_V:
        s0 = float(an.e0[0])

        def v_disease_free(s: float, i: float) -> float:
            if s <= 0:
                raise ValueError(f"disease-free-V undefined at S = {s}")
            return s - s0 - s0 * math.log(s / s0) + i

        return LyapunovFunction(DISEASE_FREE_V, v_disease_free, "{S > 0, I >= 0}")
    raise ValueError(f"unknown Lyapunov function id {which!r}")


def reconstruct_r(traj: Trajectory, p: SirParams, r0_init: float) -> list[tuple[float, float]]:
    """Recover R(t) along a trajectory from dR/dt = q*I - mu*R.

    Between consecutive samples I(t) is interpolated linearly and the linear
    scalar ODE solved exactly by the integrating factor, so no third ODE
    dimension is ever integrated.
    """
    if r0_init < 0:
        raise ValueError("initial recovered population must be nonnegative")
    mu = float(p.mu)
    q = float(p.q)
    pts = traj.plane_points()
    ts = traj.times()
    out = [(ts[0], float(r0_init))]
    r = float(r0_init)
    for k in range(1, len(pts)):
        dt = ts[k] - ts[k - 1]
        i0, i1 = pts[k - 1][1], pts[k][1]
        if dt <= 0:
            continue
        c = (i1 - i0) / dt
        # r(dt) = e^{-mu dt} r0 + q * int_0^dt (i0 + c u) e^{-mu (dt-u)} du
        emd = math.exp(-mu * dt)
        if mu * dt > 1e-8:
            j0 = (1.0 - emd) / mu                      # int e^{-mu(dt-u)} du
            j1 = (dt - j0) / mu                        # int u e^{-mu(dt-u)} du
        else:
            # Series forms, stable for tiny mu*dt.
            j0 = dt * (1.0 - mu * dt / 2.0 + (mu * dt) ** 2 / 6.0)
            j1 = dt * dt * (0.5 - mu * dt / 6.0 + (mu * dt) ** 2 / 24.0)
        r = emd * r + q * (i0 * j0 + c * j1)
        out.append((ts[k], r))
    return out
