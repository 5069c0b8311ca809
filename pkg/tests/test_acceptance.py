"""End-to-end acceptance checks, one per numbered criterion.

Each test prints a single ``[ACCEPTANCE] criterion N ...: PASS/FAIL`` line so
the suite output doubles as a checklist.  Run with ``pytest -s`` to see the
lines for passing criteria too.
"""

import math
import random
from contextlib import contextmanager
from fractions import Fraction

import pytest

from diskflow.cli import main as cli_main
from diskflow.cmf import AWAY, reduce, reduce_chart_infinity, verdict_to_flow_direction
from diskflow.compact import to_chart
from diskflow.field import (
    NONHYP_SEMISIMPLE_ZERO,
    SADDLE,
    SINK,
    PlanarField,
    make_equilibrium,
)
from diskflow.flow import (
    ALGEBRAIC_RECIPROCAL,
    CONVERGED,
    EXPONENTIAL,
    TIME_EXHAUSTED,
    fit_decay,
    integrate,
    trace_on_disk,
)
from diskflow.poly2 import Poly2, U1, U2
from diskflow.sir import (
    CRITICAL,
    DISEASE_FREE_V,
    ENDEMIC_V,
    SUBCRITICAL,
    SUPERCRITICAL,
    SirParams,
    analyze,
    lyapunov,
    make_field,
)
from conftest import random_positive_rational

LAM = Poly2.var(0, ("lam", "x"))
X = Poly2.var(1, ("lam", "x"))


@contextmanager
def criterion(number, name):
    try:
        yield
    except BaseException:
        print(f"[ACCEPTANCE] criterion {number} ({name}): FAIL")
        raise
    print(f"[ACCEPTANCE] criterion {number} ({name}): PASS")


def random_params(rng):
    return SirParams(*(random_positive_rational(rng) for _ in range(4)))


def critical_from(rng):
    a = random_positive_rational(rng)
    m = random_positive_rational(rng)
    qq = random_positive_rational(rng)
    return SirParams(a, m * (qq + m) / a, m, qq)


# --- criteria 4 and 5 share the trajectory batches -------------------------

REGIME_RUNS = (
    (SUPERCRITICAL, SirParams(Fraction(1), Fraction(3), Fraction(1), Fraction(1))),
    (SUBCRITICAL, SirParams(Fraction(1), Fraction(1), Fraction(1), Fraction(1))),
    (CRITICAL, SirParams(Fraction(1), Fraction(400), Fraction(1), Fraction(399))),
)


@pytest.fixture(scope="module")
def regime_trajectories():
    rng = random.Random(52)
    batches = {}
    for regime, p in REGIME_RUNS:
        f = make_field(p)
        an = analyze(p)
        target = an.e_star if regime == SUPERCRITICAL else an.e0
        target = (float(target[0]), float(target[1]))
        trajs = []
        for _ in range(100):
            start = (rng.uniform(0.05, 4.0), rng.uniform(0.01, 3.0))
            trajs.append(trace_on_disk(f, start, t_max=500.0))
        batches[regime] = (p, target, trajs)
    return batches


def test_criterion_1_chart_transform_exactness():
    rng = random.Random(101)
    with criterion(1, "chart-transform exactness"):
        for _ in range(20):
            p = random_params(rng)
            A, beta, mu, q = p.A, p.beta, p.mu, p.q
            u2 = to_chart(make_field(p), U2)
            assert u2.lam_dot == -beta * X * LAM + (q + mu) * LAM ** 2
            assert u2.x_dot == (A * LAM ** 2 - beta * X - beta * X ** 2
                                + q * X * LAM)
            u1 = to_chart(make_field(p), U1)
            assert u1.lam_dot == -A * LAM ** 3 + beta * X * LAM + mu * LAM ** 2
            assert u1.x_dot == (-A * X * LAM ** 2 + beta * X + beta * X ** 2
                                - q * X * LAM)


def test_criterion_2_center_manifold_exactness():
    rng = random.Random(202)
    with criterion(2, "center-manifold exactness"):
        for _ in range(20):
            p = critical_from(rng)
            f = make_field(p)
            r = reduce(f, (p.A / p.mu, Fraction(0)), order=3)
            assert r.graph_in_variable(1)[0] == -p.A * p.beta / p.mu ** 2
            assert r.reduced_in_variable(1)[0] == -p.A * p.beta ** 2 / p.mu ** 2
        for _ in range(20):
            p = random_params(rng)
            r = reduce_chart_infinity(to_chart(make_field(p), U2), order=3)
            assert r.graph_in_variable(0)[1] == p.A / p.beta
            reduced = r.reduced_in_variable(0)
            assert reduced[0] == p.q + p.mu and reduced[1] == -p.A


def test_criterion_3_regime_trichotomy():
    rng = random.Random(303)
    with criterion(3, "regime trichotomy"):
        seen = set()
        for k in range(100):
            p = critical_from(rng) if k % 3 == 0 else random_params(rng)
            an = analyze(p)
            e0 = make_equilibrium(make_field(p), an.e0, exact=an.e0)
            if an.r0 < 1:
                expected = SINK
            elif an.r0 > 1:
                expected = SADDLE
            else:
                expected = NONHYP_SEMISIMPLE_ZERO
            assert e0.classification == expected
            seen.add(an.regime)
        assert seen == {SUBCRITICAL, CRITICAL, SUPERCRITICAL}


def test_criterion_4_global_convergence(regime_trajectories):
    with criterion(4, "global convergence by t=500"):
        for regime, (p, target, trajs) in regime_trajectories.items():
            for traj in trajs:
                assert traj.terminal.kind in (CONVERGED, TIME_EXHAUSTED)
                last = traj.plane_points()[-1]
                dist = math.hypot(last[0] - target[0], last[1] - target[1])
                assert dist <= 1e-5, (regime, dist)
                # no escape toward the disk boundary
                assert all(u * u + v * v < 1.0 - 1e-9
                           for u, v in traj.disk_points())


def test_criterion_5_lyapunov_monotonicity(regime_trajectories):
    with criterion(5, "Lyapunov monotonicity"):
        for regime, (p, _target, trajs) in regime_trajectories.items():
            which = ENDEMIC_V if regime == SUPERCRITICAL else DISEASE_FREE_V
            V = lyapunov(p, which)
            for traj in trajs:
                vals = [V(s, i) for s, i in traj.plane_points()]
                max_inc = max((b - a for a, b in zip(vals, vals[1:])),
                              default=0.0)
                assert max_inc <= 1e-8, (regime, max_inc)


def test_criterion_6_asymptotic_rates():
    subcritical_sets = [(1, 1, 1, 1), (2, 1, 1, 3), (1, 1, 2, 1)]
    critical_sets = [(1, 2, 1, 1), (1, 3, 1, 2), (4, 1, 1, 3)]
    with criterion(6, "asymptotic decay rates"):
        for quad in subcritical_sets:
            p = SirParams(*(Fraction(c) for c in quad))
            an = analyze(p)
            assert an.regime == SUBCRITICAL
            predicted = float((p.q + p.mu) * (an.r0 - 1))
            traj = integrate(make_field(p), (3.0, 0.5), t_max=60.0,
                             max_step=60.0 / 400)
            fit = fit_decay(traj, 1, EXPONENTIAL)
            assert abs(fit.rate_or_slope - predicted) <= 0.02 * abs(predicted)
            assert fit.r_squared > 0.999
        for quad in critical_sets:
            p = SirParams(*(Fraction(c) for c in quad))
            an = analyze(p)
            assert an.regime == CRITICAL
            predicted = float(p.A * p.beta ** 2 / p.mu ** 2)
            traj = integrate(make_field(p), (3.0, 0.5), t_max=200.0,
                             max_step=200.0 / 400)
            fit = fit_decay(traj, 1, ALGEBRAIC_RECIPROCAL)
            assert abs(fit.rate_or_slope - predicted) <= 0.05 * abs(predicted)
            assert fit.r_squared > 0.999


def test_criterion_7_infinity_verdicts():
    rng = random.Random(707)
    with criterion(7, "infinity verdicts"):
        draws = [random_params(rng) for _ in range(20)]
        for p in draws:
            f = make_field(p)
            r2 = reduce_chart_infinity(to_chart(f, U2))
            r1 = reduce_chart_infinity(to_chart(f, U1))
            assert verdict_to_flow_direction(r2, side=1, var_index=0) == AWAY
            assert verdict_to_flow_direction(r1, side=1, var_index=0) == AWAY
        # corroborate: lam grows along chart trajectories started near the
        # boundary equilibrium (on the approximate center manifold for U2,
        # on the invariant axis x = 0 for U1).
        lam0 = 1e-3
        for p in draws[:10]:
            f = make_field(p)
            cf2 = to_chart(f, U2)
            r2 = reduce_chart_infinity(cf2, order=4)
            graph = r2.graph_in_variable(0)
            x0 = sum(float(c) * lam0 ** (k + 1) for k, c in enumerate(graph))
            t_max = 800.0 / float(p.q + p.mu)
            traj = integrate(cf2.as_planar_field(), (lam0, x0), t_max=t_max,
                             region=(-1.0, 1.0, -10.0, 10.0))
            assert traj.samples[-1].point[0] > 1.2 * lam0
            cf1 = to_chart(f, U1)
            traj = integrate(cf1.as_planar_field(), (lam0, 0.0),
                             t_max=800.0 / float(p.mu),
                             region=(-1.0, 1.0, -10.0, 10.0))
            assert traj.samples[-1].point[0] > 1.2 * lam0


def test_criterion_8_pushforward_identity():
    rng = random.Random(808)
    with criterion(8, "exact pushforward identity"):
        p = make_field(random_params(rng))
        fields = [p]
        for _ in range(3):
            terms_p = {(rng.randint(0, 2), rng.randint(0, 1)):
                       random_positive_rational(rng) for _ in range(4)}
            terms_q = {(rng.randint(0, 1), rng.randint(0, 2)):
                       -random_positive_rational(rng) for _ in range(4)}
            fields.append(PlanarField(Poly2(terms_p), Poly2(terms_q)))
        for f in fields:
            d = f.degree
            for chart in (U1, U2):
                cf = to_chart(f, chart)
                for _ in range(25):
                    s = random_positive_rational(rng)
                    i = random_positive_rational(rng)
                    pv, qv = f.p.eval((s, i)), f.q.eval((s, i))
                    if chart == U2:
                        lam, x = 1 / i, s / i
                        lam_dt = -qv / i ** 2
                        x_dt = pv / i - s * qv / i ** 2
                    else:
                        lam, x = 1 / s, i / s
                        lam_dt = -pv / s ** 2
                        x_dt = qv / s - i * pv / s ** 2
                    scale = lam ** (d - 1)
                    assert cf.lam_dot.eval((lam, x)) == scale * lam_dt
                    assert cf.x_dot.eval((lam, x)) == scale * x_dt


def test_criterion_9_portrait_determinism(tmp_path, capsys):
    with criterion(9, "portrait determinism"):
        outputs = []
        for sub in ("first", "second"):
            d = tmp_path / sub
            d.mkdir()
            code = cli_main([
                "portrait", "--A", "1", "--beta", "3", "--mu", "1", "--q", "1",
                "--seed-ring", "6", "--radius", "0.5", "--t-max", "80",
                "--svg", str(d / "p.svg"), "--json", str(d / "p.json"),
            ])
            capsys.readouterr()
            assert code == 0
            outputs.append(((d / "p.svg").read_bytes(),
                            (d / "p.json").read_bytes()))
        assert outputs[0] == outputs[1]
