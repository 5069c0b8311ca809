"""Numerical trajectories: adaptive Runge-Kutta integration in plane and
chart coordinates, Lyapunov-function monotonicity checks, and tail fitting
of decay rates."""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Callable, Optional, Sequence

import numpy as np

from .compact import (ChartField, chart_point_to_plane, plane_point_to_chart,
                      point_to_disk, to_chart)
from .field import PlanarField
from .poly2 import PLANE, U1, U2

CONVERGED = "converged-to"
LEFT_REGION = "left-region"
TIME_EXHAUSTED = "time-exhausted"
STEP_UNDERFLOW = "step-underflow"

#: Plane -> chart handoff radius, with hysteresis on the way back so a
#: trajectory hovering near the threshold cannot chatter between charts.
RHO_SWITCH = 10.0
RHO_RETURN = 8.0


@dataclass(frozen=True)
class Sample:
    t: float                      # original time (approximate on chart legs)
    point: tuple[float, float]    # native coordinates of `chart`
    chart: str

    def plane_point(self) -> Optional[tuple[float, float]]:
        if self.chart == PLANE:
            return self.point
        if self.point[0] > 0:
            return chart_point_to_plane(self.point[0], self.point[1], self.chart)
        return None


@dataclass(frozen=True)
class Terminal:
    kind: str
    point: Optional[tuple[float, float]] = None  # plane coords for CONVERGED


@dataclass
class Trajectory:
    samples: list[Sample]
    terminal: Terminal
    time_approximate: bool = False  # True once any chart leg accumulated time

    def times(self) -> list[float]:
        return [s.t for s in self.samples]

    def plane_points(self) -> list[tuple[float, float]]:
        pts = []
        for s in self.samples:
            p = s.plane_point()
            if p is not None:
                pts.append(p)
        return pts

    def component(self, index: int) -> list[float]:
        return [p[index] for p in self.plane_points()]

    def disk_points(self) -> list[tuple[float, float]]:
        out = []
        for s in self.samples:
            d = point_to_disk(s.point, s.chart)
            out.append((d.u, d.v))
        return out

    def rows(self) -> list[tuple]:
        """CSV rows (t, S, I, chart, u, v); S/I empty on boundary points."""
        out = []
        for s in self.samples:
            p = s.plane_point()
            d = point_to_disk(s.point, s.chart)
            out.append((s.t, p[0] if p else None, p[1] if p else None,
                        s.chart, d.u, d.v))
        return out


# Dormand-Prince 5(4) tableau: fifth-order propagation, embedded
# fourth-order error estimate, FSAL.
_DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_DP_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_DP_E = tuple(b5 - b4 for b5, b4 in zip(
    _DP_B5,
    (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40)))


def _step(rhs, a, b, h, k1):
    """One Dormand-Prince step; returns (a1, b1, err, k_last)."""
    ka = [k1[0]]
    kb = [k1[1]]
    for row in _DP_A[1:]:
        sa = a + h * sum(c * ka[i] for i, c in enumerate(row))
        sb = b + h * sum(c * kb[i] for i, c in enumerate(row))
        da, db = rhs(sa, sb)
        ka.append(da)
        kb.append(db)
    a1 = a + h * sum(c * ka[i] for i, c in enumerate(_DP_B5))
    b1 = b + h * sum(c * kb[i] for i, c in enumerate(_DP_B5))
    ea = h * sum(c * ka[i] for i, c in enumerate(_DP_E))
    eb = h * sum(c * kb[i] for i, c in enumerate(_DP_E))
    return a1, b1, (ea, eb), (ka[6], kb[6])


def _integrate_rhs(rhs, start, t_max, tol, *,
                   region=None, stop=None, t0=0.0, max_step=None,
                   convergence=True):
    """Core adaptive loop over a float RHS.

    ``stop(a, b)`` may end the leg early (returns a reason string or None);
    ``region`` is an optional bounding rectangle (x0, x1, y0, y1).
    Mixed absolute/relative error norm: err_i / (tol * (1 + |y_i|)).
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    a, b = float(start[0]), float(start[1])
    t = t0
    samples = [(t, a, b)]
    k1 = rhs(a, b)
    fnorm = math.hypot(*k1)
    h = min(0.01, t_max / 100.0) if fnorm == 0 else min(
        0.1, tol ** 0.2 / (fnorm + 1e-30), t_max / 10.0)
    h = max(h, 1e-12)
    stagnant = 0
    reason = TIME_EXHAUSTED
    stop_payload = None
    while t < t_max - 1e-15:
        h = min(h, t_max - t)
        if max_step is not None:
            h = min(h, max_step)
        a1, b1, (ea, eb), klast = _step(rhs, a, b, h, k1)
        if not (math.isfinite(a1) and math.isfinite(b1)):
            h /= 2.0
            if h < 1e-14:
                reason = STEP_UNDERFLOW
                break
            continue
        err = max(abs(ea) / (tol * (1.0 + abs(a1))),
                  abs(eb) / (tol * (1.0 + abs(b1))))
        if err <= 1.0:
            disp = math.hypot(a1 - a, b1 - b)
            t += h
            a, b, k1 = a1, b1, klast
            samples.append((t, a, b))
            if region is not None and not (region[0] <= a <= region[1]
                                           and region[2] <= b <= region[3]):
                reason = LEFT_REGION
                break
            if stop is not None:
                why = stop(a, b)
                if why is not None:
                    reason, stop_payload = "stopped", why
                    break
            if convergence:
                # Converged: tiny vector field plus ten consecutive steps of
                # negligible displacement.  The thresholds scale with the
                # step controller's own error floor (~tol per step); the
                # 1e-10/1e-12 floors dominate once tol <= ~4e-12.
                conv_scale = 25.0 * tol * (1.0 + math.hypot(a, b))
                if (math.hypot(*k1) < max(1e-10, conv_scale)
                        and disp < max(1e-12, conv_scale)):
                    stagnant += 1
                    if stagnant >= 10:
                        reason = CONVERGED
                        break
                else:
                    stagnant = 0
        # Standard fifth-order step-size update, clamped.
        factor = 0.9 * (1.0 / err) ** 0.2 if err > 0 else 5.0
        h *= min(5.0, max(0.2, factor))
        if h < 1e-14:
            reason = STEP_UNDERFLOW
            break
    return samples, reason, stop_payload


def integrate(f: PlanarField, start, t_max: float, tol: float = 1e-9,
              region=None, max_step: float | None = None) -> Trajectory:
    """Adaptive Dormand-Prince integration of a planar field.

    Terminates at t_max, on convergence to an equilibrium, on leaving
    ``region``, or on step underflow.  ``max_step`` caps the step size when
    dense output is wanted (e.g. for tail fitting).
    """
    rhs = f.fast_callable()
    raw, reason, _ = _integrate_rhs(rhs, start, t_max, tol, region=region,
                                    max_step=max_step)
    samples = [Sample(t, (a, b), PLANE) for t, a, b in raw]
    if reason == CONVERGED:
        term = Terminal(CONVERGED, samples[-1].point)
    else:
        term = Terminal(reason)
    return Trajectory(samples, term)


def trace_on_disk(f: PlanarField, start, t_max: float, tol: float = 1e-9,
                  tau_budget: float = 1e4) -> Trajectory:
    """Integrate globally, switching to a compactified chart near infinity.

    Plane legs run while ||(v0, v1)|| < RHO_SWITCH; beyond that the dynamics
    continue on chart U1 (v0-dominant) or U2 (v1-dominant) in desingularized
    time tau, returning to the plane once the radius drops below RHO_RETURN.
    Original time on chart legs is accumulated via dt = lam**(d-1) dtau and
    is approximate there.
    """
    d = f.degree
    rhs_plane = f.fast_callable()
    chart_fields = {U1: to_chart(f, U1), U2: to_chart(f, U2)}
    chart_rhs = {c: cf.as_planar_field().fast_callable()
                 for c, cf in chart_fields.items()}

    samples: list[Sample] = []
    t = 0.0
    a, b = float(start[0]), float(start[1])
    chart = PLANE
    approx_time = False
    terminal = Terminal(TIME_EXHAUSTED)
    tau_used = 0.0

    for _ in range(64):  # hysteresis guarantees few switches in practice
        if chart == PLANE:
            def stop_plane(x, y):
                return "far" if math.hypot(x, y) >= RHO_SWITCH else None

            raw, reason, why = _integrate_rhs(
                rhs_plane, (a, b), t_max, tol, t0=t, stop=stop_plane)
            samples.extend(Sample(tt, (x, y), PLANE) for tt, x, y in raw)
            t, a, b = raw[-1]
            if reason == "stopped":
                chart = U1 if a >= b else U2
                lam, x = plane_point_to_chart(a, b, chart)
                a, b = lam, x
                continue
            if reason == CONVERGED:
                terminal = Terminal(CONVERGED, (a, b))
            else:
                terminal = Terminal(reason)
            break
        else:
            cf = chart_fields[chart]
            rhs = chart_rhs[chart]

            def stop_chart(lam, x):
                if lam <= 0:
                    return "boundary"
                s, i = chart_point_to_plane(lam, x, chart)
                if math.hypot(s, i) <= RHO_RETURN:
                    return "near"
                return None

            # Chart legs run in rescaled time; accumulate approximate t.
            raw, reason, why = _integrate_rhs(
                rhs, (a, b), tau_used + (tau_budget - tau_used), tol,
                t0=tau_used, stop=stop_chart, convergence=False)
            approx_time = True
            prev_tau, prev_lam = raw[0][0], raw[0][1]
            leg = []
            for tau, lam, x in raw[1:]:
                dtau = tau - prev_tau
                lam_mid = 0.5 * (abs(lam) + abs(prev_lam))
                t += lam_mid ** (d - 1) * dtau
                prev_tau, prev_lam = tau, lam
                leg.append(Sample(t, (max(lam, 0.0), x), chart))
            samples.extend(leg)
            tau_used = raw[-1][0]
            a, b = raw[-1][1], raw[-1][2]
            if reason == "stopped" and why == "near":
                s, i = chart_point_to_plane(a, b, chart)
                a, b = s, i
                chart = PLANE
                if t >= t_max:
                    terminal = Terminal(TIME_EXHAUSTED)
                    break
                continue
            if reason == "stopped" and why == "boundary":
                terminal = Terminal(LEFT_REGION)
            else:
                terminal = Terminal(reason if reason != "stopped" else TIME_EXHAUSTED)
            break
    traj = Trajectory(samples, terminal, time_approximate=approx_time)
    return traj


@dataclass(frozen=True)
class LyapunovReport:
    function_id: str
    max_increase: float
    final_value: float
    monotone: bool


def lyapunov_check(traj: Trajectory, V: Callable[[float, float], float],
                   function_id: str) -> LyapunovReport:
    """Evaluate V along the plane samples and report monotonicity.

    Raises if any sample leaves the domain of V (log of a nonpositive
    quantity surfaces as a ValueError here).
    """
    pts = traj.plane_points()
    if not pts:
        raise ValueError("trajectory has no plane samples")
    values = [V(s, i) for (s, i) in pts]
    tol_v = 1e-8 * (1.0 + abs(values[0]))
    max_inc = 0.0
    for prev, cur in zip(values, values[1:]):
        max_inc = max(max_inc, cur - prev)
    return LyapunovReport(function_id=function_id, max_increase=max_inc,
                          final_value=values[-1], monotone=max_inc <= tol_v)


EXPONENTIAL = "exponential"
ALGEBRAIC_RECIPROCAL = "algebraic-reciprocal"


@dataclass(frozen=True)
class DecayFit:
    model: str
    rate_or_slope: float
    r_squared: float
    window: tuple[float, float]


def fit_decay(traj: Trajectory, component: int, model: str,
              window_fraction: float = 0.5) -> DecayFit:
    """Fit the tail of one component.

    ``exponential`` fits log y linearly in t (rate = slope);
    ``algebraic-reciprocal`` fits 1/y linearly in t.  The window is the last
    ``window_fraction`` of the sampled time span, which needs at least 10
    samples; the component must stay positive there.
    """
    ts = np.array(traj.times())
    ys = np.array(traj.component(component))
    if len(ts) != len(ys):
        raise ValueError("trajectory contains boundary samples; fit in the plane")
    t_cut = ts[0] + (1.0 - window_fraction) * (ts[-1] - ts[0])
    mask = ts >= t_cut
    if mask.sum() < 10:
        raise ValueError(f"only {int(mask.sum())} samples in the fit window; "
                         "need at least 10")
    tw, yw = ts[mask], ys[mask]
    if np.any(yw <= 0):
        raise ValueError("component is not positive on the fit window")
    if model == EXPONENTIAL:
        target = np.log(yw)
    elif model == ALGEBRAIC_RECIPROCAL:
        target = 1.0 / yw
    else:
        raise ValueError(f"unknown decay model {model!r}")
    slope, intercept = np.polyfit(tw, target, 1)
    pred = slope * tw + intercept
    ss_res = float(np.sum((target - pred) ** 2))
    ss_tot = float(np.sum((target - np.mean(target)) ** 2))
    r2 = 1.0 if ss_tot == 0 else max(0.0, 1.0 - ss_res / ss_tot)
    return DecayFit(model=model, rate_or_slope=float(slope),
                    r_squared=min(r2, 1.0), window=(float(tw[0]), float(tw[-1])))
