"""Exact sparse bivariate polynomials over the rationals.

A polynomial in two variables is stored as a dict mapping exponent pairs
``(i, j)`` to nonzero ``Fraction`` coefficients.  All symbolic work in this
package (chart transforms, Jacobians, center-manifold coefficient matching)
runs on these exact polynomials; floats only appear downstream in the
numerical flow code.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable, Mapping, Union

Coeff = Union[int, str, Fraction]

#: Chart identifiers.  U1 covers the +S direction at infinity (S = 1/lam,
#: I = x/lam); U2 covers the +I direction (S = x/lam, I = 1/lam); PLANE is
#: the identity chart in the original coordinates.
U1 = "U1"
U2 = "U2"
PLANE = "PLANE"


def _as_fraction(c: Coeff) -> Fraction:
    """Coerce an int, Fraction, 'n/m' string, or decimal string exactly."""
    if isinstance(c, Fraction):
        return c
    if isinstance(c, int):
        return Fraction(c)
    if isinstance(c, float):
        raise TypeError("float coefficients are not exact; pass a string or Fraction")
    return Fraction(str(c))


class Poly2:
    """Immutable sparse polynomial in two named variables.

    Zero-coefficient terms are never stored; the zero polynomial has an
    empty term map and ``degree is None``.
    """

    __slots__ = ("terms", "varnames", "_hash")

    def __init__(self, terms: Mapping[tuple[int, int], Coeff] | None = None,
                 varnames: tuple[str, str] = ("S", "I")):
        clean: dict[tuple[int, int], Fraction] = {}
        for (i, j), c in (terms or {}).items():
            if i < 0 or j < 0:
                raise ValueError(f"negative exponent in term ({i}, {j})")
            f = _as_fraction(c)
            if f != 0:
                clean[(int(i), int(j))] = f
        object.__setattr__(self, "terms", clean)
        object.__setattr__(self, "varnames", tuple(varnames))
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, name, value):
        raise AttributeError("Poly2 is immutable")

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls, varnames=("S", "I")) -> "Poly2":
        return cls({}, varnames)

    @classmethod
    def const(cls, c: Coeff, varnames=("S", "I")) -> "Poly2":
        return cls({(0, 0): c}, varnames)

    @classmethod
    def var(cls, index: int, varnames=("S", "I")) -> "Poly2":
        if index not in (0, 1):
            raise ValueError("variable index must be 0 or 1")
        return cls({(1, 0) if index == 0 else (0, 1): 1}, varnames)

    # -- basic queries -------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def degree(self) -> int | None:
        """Total degree, or None for the zero polynomial."""
        if not self.terms:
            return None
        return max(i + j for i, j in self.terms)

    def coeff(self, i: int, j: int) -> Fraction:
        return self.terms.get((i, j), Fraction(0))

    def coeff_l1(self) -> Fraction:
        return sum((abs(c) for c in self.terms.values()), Fraction(0))

    def sorted_terms(self) -> list[tuple[tuple[int, int], Fraction]]:
        """Terms in lexicographic exponent order (canonical display order)."""
        return sorted(self.terms.items())

    # -- ring operations -----------------------------------------------------

    def __add__(self, other: "Poly2 | Coeff") -> "Poly2":
        other = self._coerce(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            s = out.get(e, Fraction(0)) + c
            if s == 0:
                out.pop(e, None)
            else:
                out[e] = s
        return Poly2(out, self.varnames)

    __radd__ = __add__

    def __neg__(self) -> "Poly2":
        return Poly2({e: -c for e, c in self.terms.items()}, self.varnames)

    def __sub__(self, other: "Poly2 | Coeff") -> "Poly2":
        return self + (-self._coerce(other))

    def __rsub__(self, other: Coeff) -> "Poly2":
        return self._coerce(other) - self

    def __mul__(self, other: "Poly2 | Coeff") -> "Poly2":
        other = self._coerce(other)
        out: dict[tuple[int, int], Fraction] = {}
        for (i1, j1), c1 in self.terms.items():
            for (i2, j2), c2 in other.terms.items():
                e = (i1 + i2, j1 + j2)
                s = out.get(e, Fraction(0)) + c1 * c2
                if s == 0:
                    out.pop(e, None)
                else:
                    out[e] = s
        return Poly2(out, self.varnames)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "Poly2":
        if not isinstance(n, int) or n < 0:
            raise ValueError("exponent must be a nonnegative integer")
        result = Poly2.const(1, self.varnames)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def _coerce(self, other) -> "Poly2":
        if isinstance(other, Poly2):
            return other
        return Poly2.const(other, self.varnames)

    # -- calculus / evaluation -----------------------------------------------

    def diff(self, var: int) -> "Poly2":
        """Formal partial derivative with respect to variable 0 or 1."""
        if var not in (0, 1):
            raise ValueError("var must be 0 or 1")
        out: dict[tuple[int, int], Fraction] = {}
        for (i, j), c in self.terms.items():
            if var == 0 and i > 0:
                out[(i - 1, j)] = c * i
            elif var == 1 and j > 0:
                out[(i, j - 1)] = c * j
        return Poly2(out, self.varnames)

    def eval(self, point):
        """Evaluate at a pair; exact when both coordinates are rational."""
        a, b = point
        # Horner in the first variable over coefficients that are
        # polynomials in the second.
        by_i: dict[int, dict[int, Fraction]] = {}
        for (i, j), c in self.terms.items():
            by_i.setdefault(i, {})[j] = c
        total = 0
        for i in sorted(by_i, reverse=True):
            inner = 0
            for j in sorted(by_i[i], reverse=True):
                # Horner in b would skip gaps; powers are small here.
                inner = inner + by_i[i][j] * b ** j
            total = total + inner * a ** i
        return total

    def substitute(self, px: "Poly2", py: "Poly2") -> "Poly2":
        """Compose: replace variable 0 by px and variable 1 by py."""
        out = Poly2.zero(px.varnames)
        for (i, j), c in self.terms.items():
            out = out + Poly2.const(c, px.varnames) * px ** i * py ** j
        return out

    # -- compactification ----------------------------------------------------

    def compactify_numerator(self, d: int, chart: str) -> "Poly2":
        """Clear denominators of the chart substitution.

        For chart U2 substitute (v0, v1) = (x/lam, 1/lam); for U1 substitute
        (v0, v1) = (1/lam, x/lam); then multiply by lam**d.  The result is a
        polynomial in (lam, x), exact.  Requires d >= total degree.
        """
        if chart not in (U1, U2):
            raise ValueError(f"chart must be U1 or U2, got {chart!r}")
        deg = self.degree
        if deg is not None and d < deg:
            raise ValueError(f"clearing power d={d} is below the degree {deg}")
        out: dict[tuple[int, int], Fraction] = {}
        for (i, j), c in self.terms.items():
            xpow = i if chart == U2 else j
            e = (d - i - j, xpow)  # (lam exponent, x exponent)
            out[e] = out.get(e, Fraction(0)) + c
        return Poly2(out, ("lam", "x"))

    # -- display / equality ----------------------------------------------------

    def __eq__(self, other) -> bool:
        if not isinstance(other, Poly2):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            object.__setattr__(self, "_hash", hash(frozenset(self.terms.items())))
        return self._hash

    def __repr__(self) -> str:
        return f"Poly2({self!s})"

    def __str__(self) -> str:
        if self.is_zero:
            return "0"
        va, vb = self.varnames
        parts = []
        for (i, j), c in self.sorted_terms():
            mono = "*".join(
                [f"{v}^{e}" if e > 1 else v
                 for v, e in ((va, i), (vb, j)) if e > 0])
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append(f"-{mono}")
            else:
                parts.append(f"{c}*{mono}")
        s = " + ".join(parts).replace("+ -", "- ")
        return s

    def term_strings(self) -> list[str]:
        """Canonical ['coeff', i, j] triples as strings, for JSON reports."""
        return [f"{c} {i} {j}" for (i, j), c in self.sorted_terms()]


# -- parsing ------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+\.\d+|\d+)|([A-Za-z_][A-Za-z_0-9]*)|(\*\*|[-+*/^()]))")


def parse_poly(text: str, varnames: tuple[str, str] = ("S", "I"),
               params: Mapping[str, Coeff] | None = None) -> Poly2:
    """Parse expressions like ``"3/2*S^2*I - mu*S"`` into a Poly2.

    Named symbols other than the two variables must appear in ``params`` and
    are substituted exactly before construction.  Division is only allowed
    by a constant.
    """
    params = {k: _as_fraction(v) for k, v in (params or {}).items()}
    tokens: list[str] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ValueError(f"cannot tokenize polynomial at: {text[pos:]!r}")
        tokens.append(m.group(1) or m.group(2) or m.group(3))
        pos = m.end()
    tokens.append("<end>")
    idx = 0

    def peek() -> str:
        return tokens[idx]

    def take() -> str:
        nonlocal idx
        t = tokens[idx]
        idx += 1
        return t

    def parse_expr() -> Poly2:
        node = parse_term()
        while peek() in ("+", "-"):
            op = take()
            rhs = parse_term()
            node = node + rhs if op == "+" else node - rhs
        return node

    def parse_term() -> Poly2:
        node = parse_power()
        while peek() in ("*", "/"):
            op = take()
            rhs = parse_power()
            if op == "*":
                node = node * rhs
            else:
                if rhs.degree not in (0, None) or rhs.is_zero:
                    raise ValueError("division only by a nonzero constant")
                node = node * Poly2.const(1 / rhs.coeff(0, 0), varnames)
        return node

    def parse_power() -> Poly2:
        base = parse_atom()
        if peek() in ("^", "**"):
            take()
            exp = take()
            if not exp.isdigit():
                raise ValueError("exponent must be a nonnegative integer")
            return base ** int(exp)
        return base

    def parse_atom() -> Poly2:
        t = take()
        if t == "(":
            node = parse_expr()
            if take() != ")":
                raise ValueError("unbalanced parenthesis")
            return node
        if t == "-":
            return -parse_atom()
        if t == "+":
            return parse_atom()
        if re.fullmatch(r"\d+\.\d+|\d+", t):
            return Poly2.const(t, varnames)
        if t == varnames[0]:
            return Poly2.var(0, varnames)
        if t == varnames[1]:
            return Poly2.var(1, varnames)
        if t in params:
            return Poly2.const(params[t], varnames)
        raise ValueError(f"unknown symbol {t!r} (not a variable or parameter)")

    result = parse_expr()
    if peek() != "<end>":
        raise ValueError(f"trailing input after polynomial: {tokens[idx:-1]}")
    return result
