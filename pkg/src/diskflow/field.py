"""Planar polynomial vector fields: equilibria, Jacobians, classification."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .poly2 import Poly2

SINK = "sink"
SOURCE = "source"
SADDLE = "saddle"
CENTER_LINEAR = "center-linear"
NONHYP_SEMISIMPLE_ZERO = "nonhyperbolic-semisimple-zero"
NONHYP_OTHER = "nonhyperbolic-other"

HYPERBOLIC_TYPES = {SINK, SOURCE, SADDLE}


@dataclass(frozen=True)
class PlanarField:
    """A pair of polynomials (p, q) defining dv0/dt = p, dv1/dt = q."""

    p: Poly2
    q: Poly2

    @property
    def varnames(self) -> tuple[str, str]:
        return self.p.varnames

    @property
    def degree(self) -> int:
        degs = [d for d in (self.p.degree, self.q.degree) if d is not None]
        if not degs:
            raise ValueError("the zero field has no degree")
        return max(degs)

    @property
    def is_zero(self) -> bool:
        return self.p.is_zero and self.q.is_zero

    def eval(self, point):
        return (self.p.eval(point), self.q.eval(point))

    def jacobian(self, point):
        """2x2 matrix of partials at the point; exact for rational points."""
        return ((self.p.diff(0).eval(point), self.p.diff(1).eval(point)),
                (self.q.diff(0).eval(point), self.q.diff(1).eval(point)))

    def coeff_l1(self) -> Fraction:
        return self.p.coeff_l1() + self.q.coeff_l1()

    def fast_callable(self):
        """Build a float-specialized RHS closure (used by the integrator)."""
        pt = [(i, j, float(c)) for (i, j), c in self.p.sorted_terms()]
        qt = [(i, j, float(c)) for (i, j), c in self.q.sorted_terms()]

        def rhs(a: float, b: float) -> tuple[float, float]:
            dp = 0.0
            for i, j, c in pt:
                dp += c * a**i * b**j
            dq = 0.0
            for i, j, c in qt:
                dq += c * a**i * b**j
            return dp, dq

        return rhs


@dataclass(frozen=True)
class EigenPair:
    value: complex
    vector: tuple[complex, complex]
    generalized: bool = False  # vector is generalized (defective J)


@dataclass(frozen=True)
class Equilibrium:
    location: tuple[float, float]
    jacobian: tuple[tuple[float, float], tuple[float, float]]
    eigen: tuple[EigenPair, EigenPair]
    classification: str
    hyperbolic: bool
    exact_location: Optional[tuple[Fraction, Fraction]] = None
    chart: Optional[str] = None

    @property
    def eigenvalues(self) -> tuple[complex, complex]:
        return (self.eigen[0].value, self.eigen[1].value)

    def to_json_dict(self) -> dict:
        d = {
            "location": list(self.location),
            "jacobian": [list(r) for r in self.jacobian],
            "eigenvalues": [[e.value.real, e.value.imag] for e in self.eigen],
            "classification": self.classification,
            "hyperbolic": self.hyperbolic,
        }
        if self.exact_location is not None:
            d["exact_location"] = [str(c) for c in self.exact_location]
        if self.chart is not None:
            d["chart"] = self.chart
        return d


def _normalize_eigvec(v: tuple[complex, complex]) -> tuple[complex, complex]:
    """Unit Euclidean norm, first component of nonnegligible modulus rotated
    to the positive real axis (deterministic convention)."""
    n = math.hypot(abs(v[0]), abs(v[1]))
    if n == 0:
        return (0j, 0j)
    v = (v[0] / n, v[1] / n)
    lead = v[0] if abs(v[0]) > 1e-12 else v[1]
    phase = lead / abs(lead)
    return (v[0] / phase, v[1] / phase)


def eigen(J) -> tuple[EigenPair, EigenPair]:
    """Eigenpairs of a 2x2 matrix via the stable quadratic formula.

    Eigenvalues are roots of z^2 - tr z + det; the larger-magnitude root is
    computed first and the other recovered from the product to avoid
    cancellation.  Results are ordered by (real part, imag part).
    """
    (a, b), (c, d) = ((float(J[0][0]), float(J[0][1])),
                      (float(J[1][0]), float(J[1][1])))
    tr = a + d
    det = a * d - b * c
    disc = tr * tr - 4.0 * det
    if disc >= 0.0:
        s = math.sqrt(disc)
        big = (tr + math.copysign(s, tr)) / 2.0
        if big == 0.0:
            l1, l2 = complex(0.0), complex(0.0)
        else:
            l1, l2 = complex(big), complex(det / big)
    else:
        s = math.sqrt(-disc)
        l1 = complex(tr / 2.0, s / 2.0)
        l2 = complex(tr / 2.0, -s / 2.0)

    scale = max(abs(a), abs(b), abs(c), abs(d), 1.0)
    repeated = abs(l1 - l2) <= 1e-12 * scale

    def vec_for(lam: complex) -> tuple[tuple[complex, complex], bool]:
        # Nullspace of (J - lam I): take the row of larger norm.
        r1 = (a - lam, complex(b))
        r2 = (complex(c), d - lam)
        n1 = abs(r1[0]) + abs(r1[1])
        n2 = abs(r2[0]) + abs(r2[1])
        row = r1 if n1 >= n2 else r2
        if max(n1, n2) <= 1e-14 * scale:
            # J is (numerically) lam * I: every vector is an eigenvector.
            return ((1.0 + 0j, 0j), False)
        v = (-row[1], row[0])
        return (v, False)

    v1, g1 = vec_for(l1)
    if repeated:
        # Check for a defective matrix: rank of (J - lam I) is 1, so only
        # one eigendirection exists; flag the second vector as generalized.
        r_norm = abs(a - l1) + abs(b) + abs(c) + abs(d - l1)
        if r_norm > 1e-12 * scale:
            # Generalized vector: solve (J - lam I) w = v1.
            M = np.array([[a - l1, b], [c, d - l1]], dtype=complex)
            w, *_ = np.linalg.lstsq(M, np.array(v1, dtype=complex), rcond=None)
            v2, g2 = (complex(w[0]), complex(w[1])), True
        else:
            v2, g2 = (0j, 1.0 + 0j), False
    else:
        v2, g2 = vec_for(l2)

    pairs = [EigenPair(l1, _normalize_eigvec(v1), g1),
             EigenPair(l2, _normalize_eigvec(v2), g2)]
    pairs.sort(key=lambda e: (e.value.real, e.value.imag))
    return (pairs[0], pairs[1])


def hyperbolicity_tolerance(eigenvalues: Sequence[complex]) -> float:
    scale = max((abs(l) for l in eigenvalues), default=0.0)
    return 1e-9 * (1.0 + scale)


def classify(eigenvalues: Sequence[complex]) -> str:
    """Linear type from a pair of eigenvalues.

    The hyperbolicity tolerance scales with the spectral size, so the type
    is invariant under positive time rescaling.
    """
    l1, l2 = complex(eigenvalues[0]), complex(eigenvalues[1])
    eps = hyperbolicity_tolerance((l1, l2))
    re1, re2 = l1.real, l2.real
    if re1 < -eps and re2 < -eps:
        return SINK
    if re1 > eps and re2 > eps:
        return SOURCE
    if (re1 < -eps and re2 > eps) or (re1 > eps and re2 < -eps):
        return SADDLE
    zeroish = [abs(l) <= eps and abs(l.imag) <= eps for l in (l1, l2)]
    if zeroish.count(True) == 1:
        other = l2 if zeroish[0] else l1
        if abs(other.real) > eps:
            return NONHYP_SEMISIMPLE_ZERO
        return NONHYP_OTHER
    if abs(re1) <= eps and abs(re2) <= eps and abs(l1.imag) > eps and abs(l2.imag) > eps:
        return CENTER_LINEAR
    return NONHYP_OTHER


def make_equilibrium(f: PlanarField, location, exact=None, chart=None) -> Equilibrium:
    """Package a root of the field with its linearization data.

    Raises ``ValueError`` if the point is not a root of the field to
    within the coefficient-scaled residual tolerance.
    """
    pt = (float(location[0]), float(location[1]))
    res = f.fast_callable()(pt[0], pt[1])
    if math.hypot(res[0], res[1]) > equilibrium_residual_tolerance(f):
        raise ValueError(f"point {pt} is not an equilibrium of the field")
    J = f.jacobian(exact if exact is not None else pt)
    Jf = ((float(J[0][0]), float(J[0][1])), (float(J[1][0]), float(J[1][1])))
    pairs = eigen(Jf)
    cls = classify((pairs[0].value, pairs[1].value))
    return Equilibrium(location=pt, jacobian=Jf, eigen=pairs,
                       classification=cls, hyperbolic=cls in HYPERBOLIC_TYPES,
                       exact_location=exact, chart=chart)


def equilibrium_residual_tolerance(f: PlanarField) -> float:
    return 1e-10 * (1.0 + float(f.coeff_l1()))


def find_equilibria(f: PlanarField, region: tuple[float, float, float, float],
                    seeds: int = 30, max_iter: int = 50,
                    candidates: Sequence[tuple[float, float]] = ()) -> list[Equilibrium]:
    """Newton iteration from a seed grid over ``region`` = (x0, x1, y0, y1).

    Non-converging seeds are dropped silently; converged points are
    deduplicated within 1e-7 and must satisfy the residual tolerance.
    Closed-form ``candidates`` are injected as extra seeds and polished.
    """
    x0, x1, y0, y1 = region
    if not (x1 > x0 and y1 > y0):
        raise ValueError("region must be a nonempty rectangle")
    rhs = f.fast_callable()
    eps_eq = equilibrium_residual_tolerance(f)

    jac_polys = (f.p.diff(0), f.p.diff(1), f.q.diff(0), f.q.diff(1))
    jac_terms = [[(i, j, float(c)) for (i, j), c in p.sorted_terms()]
                 for p in jac_polys]

    def jac(a: float, b: float):
        vals = []
        for terms in jac_terms:
            v = 0.0
            for i, j, c in terms:
                v += c * a**i * b**j
            vals.append(v)
        return np.array([[vals[0], vals[1]], [vals[2], vals[3]]])

    seed_pts = list(candidates)
    for ii in range(seeds):
        for jj in range(seeds):
            seed_pts.append((x0 + (x1 - x0) * (ii + 0.5) / seeds,
                             y0 + (y1 - y0) * (jj + 0.5) / seeds))

    found: list[tuple[float, float]] = []
    span = max(x1 - x0, y1 - y0)
    for sx, sy in seed_pts:
        a, b = float(sx), float(sy)
        res = math.hypot(*rhs(a, b))
        ok = False
        for _ in range(max_iter):
            F = np.array(rhs(a, b))
            J = jac(a, b)
            try:
                step = np.linalg.solve(J, -F)
            except np.linalg.LinAlgError:
                break
            if not np.all(np.isfinite(step)):
                break
            # Damped update: halve the step while the residual increases.
            t = 1.0
            for _ in range(30):
                na, nb = a + t * step[0], b + t * step[1]
                nres = math.hypot(*rhs(na, nb))
                if nres <= res or nres < eps_eq:
                    break
                t /= 2.0
            else:
                break
            a, b, res = na, nb, nres
            if res < eps_eq:
                ok = True
                break
        if not ok or not (math.isfinite(a) and math.isfinite(b)):
            continue
        # Keep roots inside (a slightly inflated copy of) the region.
        pad = 1e-6 * (1.0 + span)
        if not (x0 - pad <= a <= x1 + pad and y0 - pad <= b <= y1 + pad):
            continue
        if all(math.hypot(a - u, b - v) > 1e-7 for u, v in found):
            found.append((a, b))

    found.sort()
    return [make_equilibrium(f, pt) for pt in found]
