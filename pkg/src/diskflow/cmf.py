"""Center-manifold reduction at a {negative, zero} (or {positive, zero})
equilibrium of a planar polynomial field, in exact rational arithmetic.

The equilibrium is shifted to the origin and the field rewritten in the
eigenbasis (Ut, Vt) of its Jacobian, where Ut is the hyperbolic direction
and Vt the center direction.  The graph Ut = h(Vt) = sum_k h_k Vt^k is
determined order by order from the invariance condition

    F(h(Vt), Vt) = h'(Vt) * G(h(Vt), Vt),

where (F, G) are the transformed field components.  The formal series is
unique even though the center manifold itself is not: all center manifolds
at the point share this Taylor expansion.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .compact import ChartField
from .field import PlanarField
from .poly2 import Poly2

ATTRACTING = "attracting-side"
REPELLING = "repelling-side"
DEGENERATE = "degenerate-to-order-K"

TOWARD = "toward-equilibrium"
AWAY = "away-from-equilibrium"
UNDETERMINED = "undetermined"


# -- univariate series helpers (dense coefficient lists, index = power) -------

def _ser_trunc(a: list[Fraction], K: int) -> list[Fraction]:
    out = a[:K + 1]
    return out + [Fraction(0)] * (K + 1 - len(out))

def _ser_add(a, b, K):
    a, b = _ser_trunc(a, K), _ser_trunc(b, K)
    return [x + y for x, y in zip(a, b)]

def _ser_mul(a, b, K):
    out = [Fraction(0)] * (K + 1)
    for i, x in enumerate(a[:K + 1]):
        if x == 0:
            continue
        for j, y in enumerate(b[:K + 1 - i]):
            if y != 0:
                out[i + j] += x * y
    return out

def _ser_pow(a, n, K):
    out = [Fraction(1)] + [Fraction(0)] * K
    for _ in range(n):
        out = _ser_mul(out, a, K)
    return out

def _ser_compose(outer, inner, K):
    """outer(inner(w)) truncated at order K; inner must have zero constant."""
    if inner and inner[0] != 0:
        raise ValueError("inner series must have zero constant term")
    out = [Fraction(0)] * (K + 1)
    power = [Fraction(1)] + [Fraction(0)] * K
    for k, c in enumerate(outer[:K + 1]):
        if k > 0:
            power = _ser_mul(power, inner, K)
        if c != 0:
            out = _ser_add(out, [c * p for p in power], K)
    return out

def _ser_revert(a, K):
    """Series reversion: given w = a(v), a[0]=0, a[1] != 0, return v(w)."""
    a = _ser_trunc(a, K)
    if a[0] != 0 or a[1] == 0:
        raise ValueError("reversion needs a[0] = 0 and a[1] != 0")
    b = [Fraction(0), 1 / a[1]] + [Fraction(0)] * (K - 1)
    for k in range(2, K + 1):
        # Coefficient of w^k in a(b(w)) must vanish; it is linear in b[k]
        # with factor a[1].
        comp = _ser_compose(a, b, k)
        b[k] = -comp[k] / a[1]
    return _ser_trunc(b, K)


def _poly_on_graph(p: Poly2, h: list[Fraction], K: int) -> list[Fraction]:
    """Restrict a Poly2 in (Ut, Vt) to the graph Ut = h(Vt), as a series."""
    out = [Fraction(0)] * (K + 1)
    vt = [Fraction(0), Fraction(1)] + [Fraction(0)] * (K - 1)
    for (i, j), c in p.sorted_terms():
        if j > K:
            continue
        term = _ser_pow(h, i, K)
        term = _ser_mul(term, _ser_pow(vt, j, K), K)
        out = _ser_add(out, [c * t for t in term], K)
    return out


@dataclass(frozen=True)
class CmfReduction:
    """Result of a center-manifold reduction.

    ``h_coeffs``/``reduced_coeffs`` are the eigenbasis series coefficients
    h_2..h_K and c_2..c_K; conversions to physically named variables go
    through :meth:`graph_in_variable` and :meth:`reduced_in_variable`.
    """

    equilibrium: tuple[Fraction, Fraction]
    eigenbasis: tuple[tuple[Fraction, Fraction], tuple[Fraction, Fraction]]  # rows of T
    nonzero_eigenvalue: Fraction
    h_coeffs: tuple[Fraction, ...]        # h_2 .. h_K
    reduced_coeffs: tuple[Fraction, ...]  # c_2 .. c_K
    order: int
    stability_verdict: str
    hyperbolic_side_unstable: bool = False  # True for the {+, 0} spectrum

    @property
    def h_series(self) -> list[Fraction]:
        return [Fraction(0), Fraction(0), *self.h_coeffs]

    @property
    def reduced_series(self) -> list[Fraction]:
        return [Fraction(0), Fraction(0), *self.reduced_coeffs]

    def _center_param_series(self, var_index: int) -> list[Fraction]:
        """Series of (coordinate var_index - equilibrium) in powers of Vt."""
        K = self.order
        T = self.eigenbasis
        h = self.h_series
        # coordinate = T[idx][0] * Ut + T[idx][1] * Vt with Ut = h(Vt)
        s = [T[var_index][0] * c for c in h]
        s[1] += T[var_index][1]
        return _ser_trunc(s, K)

    def graph_in_variable(self, var_index: int) -> list[Fraction]:
        """Series of the *other* coordinate offset in powers of
        (coordinate var_index - equilibrium), from power 1 up to order K."""
        K = self.order
        w_of_v = self._center_param_series(var_index)
        if w_of_v[1] == 0:
            raise ValueError("chosen variable is not transverse to the center "
                             "direction; cannot parameterize the graph by it")
        v_of_w = _ser_revert(w_of_v, K)
        other = self._center_param_series(1 - var_index)
        return _ser_compose(other, v_of_w, K)[1:]

    def reduced_in_variable(self, var_index: int) -> list[Fraction]:
        """Coefficients d_2..d_K of d(coordinate)/dt = sum d_k (coord-eq)^k."""
        K = self.order
        w_of_v = self._center_param_series(var_index)
        if w_of_v[1] == 0:
            raise ValueError("chosen variable is not transverse to the center "
                             "direction")
        # dw/dt = (d w/d Vt) * Vt' with Vt' = reduced series.
        dw_dv = [k * c for k, c in enumerate(w_of_v)][1:] + [Fraction(0)]
        wdot_of_v = _ser_mul(dw_dv, self.reduced_series, K)
        v_of_w = _ser_revert(w_of_v, K)
        return _ser_compose(wdot_of_v, v_of_w, K)[2:]

    def to_json_dict(self) -> dict:
        return {
            "equilibrium": [str(c) for c in self.equilibrium],
            "eigenbasis": [[str(c) for c in row] for row in self.eigenbasis],
            "nonzero_eigenvalue": str(self.nonzero_eigenvalue),
            "h_coeffs": [str(c) for c in self.h_coeffs],
            "reduced_coeffs": [str(c) for c in self.reduced_coeffs],
            "order": self.order,
            "stability_verdict": self.stability_verdict,
            "hyperbolic_side_unstable": self.hyperbolic_side_unstable,
            "note": ("the formal series is shared by every center manifold "
                     "at this equilibrium (the manifold itself is not unique)"),
        }


def _rational_jacobian(f: PlanarField, at) -> tuple[tuple[Fraction, ...], ...]:
    at = (Fraction(at[0]), Fraction(at[1]))
    J = f.jacobian(at)
    return ((Fraction(J[0][0]), Fraction(J[0][1])),
            (Fraction(J[1][0]), Fraction(J[1][1])))


def _nullvector(M) -> tuple[Fraction, Fraction]:
    """A nonzero rational kernel vector of a singular 2x2 rational matrix."""
    for a, b in (M[0], M[1]):
        if a != 0 or b != 0:
            return (-b, a)
    raise ValueError("matrix is zero; kernel is not one-dimensional")


def _normalize(v: tuple[Fraction, Fraction]) -> tuple[Fraction, Fraction]:
    lead = v[0] if v[0] != 0 else v[1]
    return (v[0] / lead, v[1] / lead)


def _reduce_core(f: PlanarField, at, order: int,
                 allow_unstable: bool) -> CmfReduction:
    if not (2 <= order <= 10):
        raise ValueError("order must be between 2 and 10")
    at = (Fraction(at[0]), Fraction(at[1]))
    fx = f.eval(at)
    if fx != (0, 0):
        raise ValueError(f"{tuple(map(str, at))} is not an equilibrium: field = "
                         f"({fx[0]}, {fx[1]})")
    J = _rational_jacobian(f, at)
    det = J[0][0] * J[1][1] - J[0][1] * J[1][0]
    tr = J[0][0] + J[1][1]
    if det != 0:
        raise ValueError("Jacobian determinant is nonzero: no zero eigenvalue")
    if tr == 0:
        raise ValueError("double zero eigenvalue: the zero eigenvalue is not "
                         "paired with a hyperbolic one")
    if tr > 0 and not allow_unstable:
        raise ValueError("nonzero eigenvalue is positive ({+, 0} spectrum); "
                         "only the {-, 0} case is reduced here")

    # Eigenvectors: kernel of (J - tr*I) for the nonzero eigenvalue (det = 0
    # means the eigenvalues are exactly {tr, 0}), kernel of J for zero.
    v_hyp = _normalize(_nullvector(((J[0][0] - tr, J[0][1]),
                                    (J[1][0], J[1][1] - tr))))
    v_zero = _normalize(_nullvector(J))
    T = ((v_hyp[0], v_zero[0]), (v_hyp[1], v_zero[1]))
    detT = T[0][0] * T[1][1] - T[0][1] * T[1][0]
    if detT == 0:
        raise ValueError("zero eigenvalue is not semisimple")
    Tinv = ((T[1][1] / detT, -T[0][1] / detT),
            (-T[1][0] / detT, T[0][0] / detT))

    # Shift the equilibrium to the origin and change to the eigenbasis:
    # (v0, v1) = at + T (Ut, Vt).
    ut = Poly2.var(0, ("Ut", "Vt"))
    vt = Poly2.var(1, ("Ut", "Vt"))
    sub0 = Poly2.const(at[0], ("Ut", "Vt")) + T[0][0] * ut + T[0][1] * vt
    sub1 = Poly2.const(at[1], ("Ut", "Vt")) + T[1][0] * ut + T[1][1] * vt
    p_t = f.p.substitute(sub0, sub1)
    q_t = f.q.substitute(sub0, sub1)
    F = Tinv[0][0] * p_t + Tinv[0][1] * q_t  # dUt/dt
    G = Tinv[1][0] * p_t + Tinv[1][1] * q_t  # dVt/dt
    # Sanity: the linear parts must be tr*Ut and 0.
    assert F.coeff(0, 0) == 0 and G.coeff(0, 0) == 0
    assert F.coeff(1, 0) == tr and F.coeff(0, 1) == 0
    assert G.coeff(1, 0) == 0 and G.coeff(0, 1) == 0

    K = order
    h = [Fraction(0)] * (K + 1)
    for k in range(2, K + 1):
        # Residual E(Vt) = F(h, Vt) - h'(Vt) G(h, Vt); its Vt^k coefficient
        # is tr*h_k plus terms in lower-order h only.
        F_on = _poly_on_graph(F, h, k)
        hprime = [m * c for m, c in enumerate(h)][1:] + [Fraction(0)]
        G_on = _poly_on_graph(G, h, k)
        E = _ser_add(F_on, [-c for c in _ser_mul(hprime, G_on, k)], k)
        h[k] = -E[k] / tr

    # Verify the invariance equation through order K, exactly.
    F_on = _poly_on_graph(F, h, K)
    hprime = [m * c for m, c in enumerate(h)][1:] + [Fraction(0)]
    G_on = _poly_on_graph(G, h, K)
    residual = _ser_add(F_on, [-c for c in _ser_mul(hprime, G_on, K)], K)
    if any(c != 0 for c in residual):
        raise AssertionError(f"invariance residual not zero through order {K}: "
                             f"{[str(c) for c in residual]}")

    reduced = G_on  # dVt/dt on the manifold
    assert reduced[0] == 0 and reduced[1] == 0

    verdict = DEGENERATE
    if tr > 0:
        verdict = REPELLING
    else:
        for k in range(2, K + 1):
            if reduced[k] != 0:
                if k % 2 == 1:
                    verdict = ATTRACTING if reduced[k] < 0 else REPELLING
                else:
                    # One-sided: label by the behavior on the Vt > 0 side.
                    verdict = ATTRACTING if reduced[k] < 0 else REPELLING
                break

    return CmfReduction(
        equilibrium=at,
        eigenbasis=T,
        nonzero_eigenvalue=tr,
        h_coeffs=tuple(h[2:]),
        reduced_coeffs=tuple(reduced[2:]),
        order=K,
        stability_verdict=verdict,
        hyperbolic_side_unstable=tr > 0,
    )


def reduce(f: PlanarField, at, order: int = 4) -> CmfReduction:
    """Center-manifold reduction at a rational equilibrium with exact
    eigenvalues {negative rational, 0} (checked via det = 0, trace < 0)."""
    return _reduce_core(f, at, order, allow_unstable=False)


def reduce_chart_infinity(cf: ChartField, order: int = 4) -> CmfReduction:
    """Reduction at the infinity equilibrium (lam, x) = (0, 0) of a chart.

    The {+, 0} spectrum (hyperbolic direction unstable) is accepted here and
    flagged: the reduction still runs along the center direction, but the
    verdict is forced to repelling-side by the unstable eigenvalue.
    """
    pf = cf.as_planar_field()
    return _reduce_core(pf, (Fraction(0), Fraction(0)), order,
                        allow_unstable=True)


def verdict_to_flow_direction(r: CmfReduction, side: int = 1,
                              var_index: int = 0) -> str:
    """Sign analysis of the reduced dynamics on one physical side.

    ``var_index`` names the coordinate used as the center parameter (0 for
    lam on charts, 1 for the second plane variable at a finite equilibrium);
    ``side`` is +1 for the physically meaningful positive side.
    """
    if side not in (1, -1):
        raise ValueError("side must be +1 or -1")
    if r.hyperbolic_side_unstable:
        return AWAY
    coeffs = r.reduced_in_variable(var_index)
    for k, c in enumerate(coeffs, start=2):
        if c != 0:
            rate = c * side ** k  # sign of d(coord)/dt at small coord = side*eps
            return TOWARD if rate * side < 0 else AWAY
    return UNDETERMINED
