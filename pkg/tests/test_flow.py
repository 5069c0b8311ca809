import math
from fractions import Fraction

import pytest

from diskflow.flow import (
    ALGEBRAIC_RECIPROCAL,
    CONVERGED,
    EXPONENTIAL,
    LEFT_REGION,
    TIME_EXHAUSTED,
    fit_decay,
    integrate,
    lyapunov_check,
    trace_on_disk,
)
from diskflow.field import PlanarField
from diskflow.poly2 import PLANE, Poly2, U1, U2
from diskflow.sir import SirParams, lyapunov, make_field

S = Poly2.var(0)
I = Poly2.var(1)


def sir(a, b, m, qq):
    return SirParams(Fraction(a), Fraction(b), Fraction(m), Fraction(qq))


class TestIntegrate:
    def test_linear_decay_matches_exponential(self):
        # S' = -S, I' = -2I has the closed form (e^-t, 2 e^-2t).
        f = PlanarField(-S, -2 * I)
        traj = integrate(f, (1.0, 2.0), t_max=3.0, tol=1e-11)
        t_end = traj.samples[-1].t
        s_end, i_end = traj.samples[-1].point
        assert s_end == pytest.approx(math.exp(-t_end), abs=1e-9)
        assert i_end == pytest.approx(2 * math.exp(-2 * t_end), abs=1e-9)

    def test_harmonic_oscillator_energy(self):
        # S' = I, I' = -S preserves S^2 + I^2.
        f = PlanarField(I, -S)
        traj = integrate(f, (1.0, 0.0), t_max=20.0, tol=1e-11)
        assert traj.terminal.kind == TIME_EXHAUSTED
        for s in traj.samples:
            a, b = s.point
            assert a * a + b * b == pytest.approx(1.0, abs=1e-8)

    def test_converges_to_sink(self):
        f = make_field(sir(1, 3, 1, 1))
        traj = integrate(f, (0.5, 0.5), t_max=500.0)
        assert traj.terminal.kind == CONVERGED
        assert traj.terminal.point == pytest.approx((2 / 3, 1 / 6), abs=1e-6)

    def test_leaves_region(self):
        f = PlanarField(S, Poly2.zero())  # blows up along S
        traj = integrate(f, (1.0, 0.0), t_max=100.0, region=(0.0, 5.0, -1.0, 1.0))
        assert traj.terminal.kind == LEFT_REGION
        assert traj.samples[-1].t < 100.0

    def test_max_step_densifies(self):
        f = make_field(sir(1, 1, 1, 1))
        coarse = integrate(f, (0.5, 0.5), t_max=40.0)
        dense = integrate(f, (0.5, 0.5), t_max=40.0, max_step=0.1)
        assert len(dense.samples) > len(coarse.samples)
        assert max(b.t - a.t for a, b in
                   zip(dense.samples, dense.samples[1:])) <= 0.1 + 1e-12

    def test_monotone_time(self):
        f = make_field(sir(2, 5, 1, 3))
        traj = integrate(f, (1.0, 1.0), t_max=50.0)
        ts = traj.times()
        assert all(b > a for a, b in zip(ts, ts[1:]))


class TestTraceOnDisk:
    def test_far_start_switches_charts_and_converges(self):
        f = make_field(sir(1, 3, 1, 1))
        traj = trace_on_disk(f, (50.0, 50.0), t_max=500.0)
        charts = {s.chart for s in traj.samples}
        assert PLANE in charts and (charts & {U1, U2})
        assert traj.terminal.kind == CONVERGED
        assert traj.terminal.point == pytest.approx((2 / 3, 1 / 6), abs=1e-6)
        assert traj.time_approximate

    def test_near_start_stays_in_plane(self):
        f = make_field(sir(1, 3, 1, 1))
        traj = trace_on_disk(f, (0.5, 0.5), t_max=500.0)
        assert {s.chart for s in traj.samples} == {PLANE}
        assert not traj.time_approximate

    def test_disk_points_inside_disk(self):
        f = make_field(sir(1, 3, 1, 1))
        traj = trace_on_disk(f, (40.0, 5.0), t_max=500.0)
        for u, v in traj.disk_points():
            assert u * u + v * v <= 1.0 + 1e-12


class TestLyapunov:
    def test_endemic_monotone(self):
        p = sir(1, 3, 1, 1)
        traj = integrate(make_field(p), (0.5, 0.5), t_max=200.0)
        rep = lyapunov_check(traj, lyapunov(p, "endemic-V"), "endemic-V")
        assert rep.monotone
        assert rep.final_value == pytest.approx(0.0, abs=1e-8)

    def test_disease_free_monotone_subcritical(self):
        p = sir(1, 1, 1, 1)
        traj = integrate(make_field(p), (0.9, 0.5), t_max=200.0)
        rep = lyapunov_check(traj, lyapunov(p, "disease-free-V"),
                             "disease-free-V")
        assert rep.monotone

    def test_not_monotone_for_wrong_function(self):
        p = sir(1, 3, 1, 1)
        traj = integrate(make_field(p), (0.5, 0.5), t_max=200.0)
        rep = lyapunov_check(traj, lambda s, i: -s, "negated-S")
        assert not rep.monotone


class TestFitDecay:
    def test_exponential_exact_system(self):
        f = PlanarField(-S, -2 * I)
        traj = integrate(f, (1.0, 2.0), t_max=8.0, tol=1e-11, max_step=0.05)
        fit = fit_decay(traj, 1, EXPONENTIAL)
        assert fit.rate_or_slope == pytest.approx(-2.0, rel=1e-6)
        assert fit.r_squared > 0.999999

    def test_reciprocal_exact_system(self):
        # I' = -4 I^2 gives 1/I = 1/I0 + 4t exactly.
        f = PlanarField(Poly2.zero(), -4 * I * I)
        traj = integrate(f, (0.0, 1.0), t_max=50.0, tol=1e-11, max_step=0.25)
        fit = fit_decay(traj, 1, ALGEBRAIC_RECIPROCAL)
        assert fit.rate_or_slope == pytest.approx(4.0, rel=1e-6)
        assert fit.r_squared > 0.999999

    def test_rejects_nonpositive_window(self):
        f = PlanarField(I, -S)
        traj = integrate(f, (1.0, 0.0), t_max=20.0, max_step=0.1)
        with pytest.raises(ValueError):
            fit_decay(traj, 0, EXPONENTIAL)

    def test_rejects_sparse_window(self):
        f = PlanarField(-S, -I)
        traj = integrate(f, (1.0, 1.0), t_max=0.5, tol=1e-3)
        with pytest.raises(ValueError):
            fit_decay(traj, 0, EXPONENTIAL)
