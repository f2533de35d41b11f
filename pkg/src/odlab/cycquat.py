"""Exact arithmetic over cyclotomic integers, conjugate-closed polynomials and
quaternion-valued polynomials.

Elements of Z[zeta_L] are stored as integer vectors of length ``L`` reduced
modulo the L-th cyclotomic polynomial, so equality is a plain vector compare.
Polynomials are sparse maps ``Monomial -> CycCoeff`` in the symbols
``x_l`` and ``x_l^*``; a quaternion polynomial is ``a + b*j`` with ``a``, ``b``
such polynomials.

The only noncommutative rule is ``j * z = conj(z) * j`` for any complex
coefficient or monomial ``z``, where ``conj`` maps ``zeta -> zeta^-1`` and
swaps ``x_l <-> x_l^*``.
"""
from __future__ import annotations

import cmath
import math
from functools import lru_cache
from typing import Iterable, Mapping

import numpy as np

__all__ = [
    "CycCoeff",
    "Monomial",
    "CPolynomial",
    "QPolynomial",
    "QArray",
    "cyclotomic_poly",
    "reduction_matrix",
    "cyc_reduce",
    "qmul",
    "qconj",
    "qeval",
    "monomial",
    "mono_conj",
    "mono_mul",
    "mono_fold",
    "UNIT_TOL",
]

UNIT_TOL = 1e-12


# ---------------------------------------------------------------------------
# cyclotomic integers
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def cyclotomic_poly(order: int) -> tuple[int, ...]:
    """Coefficients of Phi_order, constant term first."""
    from sympy import Poly, cyclotomic_poly as _phi, symbols

    x = symbols("x")
    coeffs = Poly(_phi(order, x), x).all_coeffs()
    return tuple(int(c) for c in reversed(coeffs))


@lru_cache(maxsize=None)
def reduction_matrix(order: int) -> np.ndarray:
    """Integer ``L x L`` matrix ``R`` with ``v @ R`` the canonical form of ``v``.

    Row ``t`` holds the coefficients of ``zeta^t mod Phi_L``; columns at and
    beyond ``phi(L)`` are zero, so ``R`` is an idempotent projection.
    """
    phi = cyclotomic_poly(order)
    deg = len(phi) - 1
    red = np.zeros((order, order), dtype=np.int64)
    for t in range(order):
        poly = [0] * (t + 1)
        poly[t] = 1
        # Phi_L is monic, so long division stays in the integers
        for top in range(t, deg - 1, -1):
            c = poly[top]
            if c:
                for s, p in enumerate(phi):
                    poly[top - deg + s] -= c * p
        for s in range(min(deg, t + 1)):
            red[t, s] = poly[s]
    red.setflags(write=False)
    return red


def cyc_reduce(raw: Iterable[int], order: int) -> "CycCoeff":
    """Canonical element of Z[zeta_order] for the raw coefficient vector ``raw``.

    ``raw[t]`` is the multiple of ``zeta^t``; entries past ``order`` wrap
    around since ``zeta^order = 1``.
    """
    if order < 1:
        raise ValueError("root order must be positive")
    vec = [0] * order
    for t, c in enumerate(raw):
        vec[t % order] += int(c)
    return CycCoeff(order, _reduce_vec(vec, order))


def _reduce_vec(vec: list[int], order: int) -> tuple[int, ...]:
    red = reduction_matrix(order)
    out = [0] * order
    for t, c in enumerate(vec):
        if c:
            row = red[t]
            for s in range(order):
                if row[s]:
                    out[s] += c * int(row[s])
    return tuple(out)


@lru_cache(maxsize=None)
def _root_table(order: int) -> dict[tuple[int, ...], tuple[int, int]]:
    """Canonical vectors of the roots of unity ``sign * zeta^t`` in Z[zeta_L]."""
    table: dict[tuple[int, ...], tuple[int, int]] = {}
    for sign in (1, -1):
        for t in range(order):
            vec = [0] * order
            vec[t] = sign
            key = _reduce_vec(vec, order)
            table.setdefault(key, (sign, t))
    return table


class CycCoeff:
    """Element of Z[zeta_L] in canonical (reduced) form.  Immutable."""

    __slots__ = ("order", "coeffs", "_hash")

    def __init__(self, order: int, coeffs: tuple[int, ...]):
        # callers guarantee ``coeffs`` is already reduced
        self.order = order
        self.coeffs = coeffs
        self._hash = None

    # constructors -------------------------------------------------------
    @classmethod
    def integer(cls, value: int, order: int = 4) -> CycCoeff:
        vec = [0] * order
        vec[0] = int(value)
        return cls(order, tuple(vec))

    @classmethod
    def root(cls, t: int, order: int = 4) -> CycCoeff:
        """``zeta_order ** t``."""
        vec = [0] * order
        vec[t % order] = 1
        return cls(order, _reduce_vec(vec, order))

    @classmethod
    def imag_unit(cls, order: int = 4) -> CycCoeff:
        if order % 4:
            raise ValueError(f"i is not in Z[zeta_{order}]")
        return cls.root(order // 4, order)

    # structure ------------------------------------------------------------
    def lift(self, order: int) -> CycCoeff:
        if order == self.order:
            return self
        if order % self.order:
            raise ValueError(f"cannot lift order {self.order} to {order}")
        step = order // self.order
        vec = [0] * order
        for t, c in enumerate(self.coeffs):
            vec[t * step] = c
        return CycCoeff(order, _reduce_vec(vec, order))

    def _common(self, other: CycCoeff) -> tuple[CycCoeff, CycCoeff]:
        if self.order == other.order:
            return self, other
        order = math.lcm(self.order, other.order)
        return self.lift(order), other.lift(order)

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def is_integer(self) -> bool:
        return not any(self.coeffs[1:])

    def as_integer(self) -> int:
        if not self.is_integer():
            raise ValueError(f"{self!r} is not a rational integer")
        return self.coeffs[0]

    def as_root(self) -> tuple[int, int] | None:
        """``(sign, t)`` with ``self == sign * zeta^t``, or None."""
        return _root_table(self.order).get(self.coeffs)

    def conj(self) -> CycCoeff:
        L = self.order
        vec = [0] * L
        for t, c in enumerate(self.coeffs):
            vec[(-t) % L] += c
        return CycCoeff(L, _reduce_vec(vec, L))

    def norm2(self) -> CycCoeff:
        return self * self.conj()

    def to_complex(self) -> complex:
        L = self.order
        return sum(c * cmath.exp(2j * math.pi * t / L) for t, c in enumerate(self.coeffs) if c)

    # arithmetic -------------------------------------------------------------
    def __add__(self, other: CycCoeff | int) -> CycCoeff:
        if isinstance(other, int):
            other = CycCoeff.integer(other, self.order)
        a, b = self._common(other)
        return CycCoeff(a.order, tuple(x + y for x, y in zip(a.coeffs, b.coeffs)))

    __radd__ = __add__

    def __neg__(self) -> CycCoeff:
        return CycCoeff(self.order, tuple(-c for c in self.coeffs))

    def __sub__(self, other: CycCoeff | int) -> CycCoeff:
        return self + (-other)

    def __rsub__(self, other: int) -> CycCoeff:
        return (-self) + other

    def __mul__(self, other: CycCoeff | int) -> CycCoeff:
        if isinstance(other, int):
            return CycCoeff(self.order, tuple(c * other for c in self.coeffs))
        a, b = self._common(other)
        L = a.order
        vec = [0] * L
        for s, x in enumerate(a.coeffs):
            if x:
                for t, y in enumerate(b.coeffs):
                    if y:
                        vec[(s + t) % L] += x * y
        return CycCoeff(L, _reduce_vec(vec, L))

    __rmul__ = __mul__

    def exact_div(self, k: int) -> CycCoeff:
        if any(c % k for c in self.coeffs):
            raise ArithmeticError(f"{self!r} is not divisible by {k}")
        return CycCoeff(self.order, tuple(c // k for c in self.coeffs))

    def __eq__(self, other: object) -> bool:
        if isinstance(other, int):
            other = CycCoeff.integer(other, self.order)
        if not isinstance(other, CycCoeff):
            return NotImplemented
        a, b = self._common(other)
        return a.coeffs == b.coeffs

    def __hash__(self) -> int:
        # equal values of different orders must collide, so hash the complex value
        if self._hash is None:
            v = self.to_complex()
            self._hash = hash((round(v.real, 9), round(v.imag, 9)))
        return self._hash

    def __repr__(self) -> str:
        return f"CycCoeff({self.order}, {list(self.coeffs)})"


# ---------------------------------------------------------------------------
# monomials
# ---------------------------------------------------------------------------

# A monomial is a sorted tuple of (name, deg_x, deg_xstar) with no all-zero
# entries; () is the unit monomial.
Monomial = tuple


def monomial(*factors: tuple[str, int, int] | str) -> Monomial:
    """Build a monomial from names (``"x"``, ``"x*"``) or ``(name, d, d*)``."""
    acc: dict[str, list[int]] = {}
    for f in factors:
        if isinstance(f, str):
            name, conj = (f[:-1], True) if f.endswith("*") else (f, False)
            d = acc.setdefault(name, [0, 0])
            d[1 if conj else 0] += 1
        else:
            name, a, b = f
            d = acc.setdefault(name, [0, 0])
            d[0] += a
            d[1] += b
    return tuple(sorted((n, a, b) for n, (a, b) in acc.items() if a or b))


def mono_mul(m1: Monomial, m2: Monomial) -> Monomial:
    if not m1:
        return m2
    if not m2:
        return m1
    acc = {n: [a, b] for n, a, b in m1}
    for n, a, b in m2:
        d = acc.setdefault(n, [0, 0])
        d[0] += a
        d[1] += b
    return tuple(sorted((n, a, b) for n, (a, b) in acc.items()))


def mono_conj(m: Monomial) -> Monomial:
    return tuple((n, b, a) for n, a, b in m)


def mono_fold(m: Monomial, real: frozenset[str] | set[str]) -> Monomial:
    """Identify ``x^*`` with ``x`` for the real variables."""
    if not real or not any(n in real and b for n, _, b in m):
        return m
    return tuple((n, a + b, 0) if n in real else (n, a, b) for n, a, b in m)


def mono_degree(m: Monomial) -> int:
    return sum(a + b for _, a, b in m)


def mono_eval(m: Monomial, values: Mapping[str, complex]) -> complex:
    out = 1 + 0j
    for n, a, b in m:
        try:
            v = values[n]
        except KeyError:
            raise KeyError(f"variable {n!r} is not assigned") from None
        out *= v**a * v.conjugate() ** b
    return out


def mono_str(m: Monomial) -> str:
    parts = []
    for n, a, b in m:
        if a:
            parts.append(n if a == 1 else f"{n}^{a}")
        if b:
            parts.append(f"{n}^*" if b == 1 else f"{n}^*^{b}")
    return "*".join(parts)


# ---------------------------------------------------------------------------
# complex polynomials
# ---------------------------------------------------------------------------

class CPolynomial:
    """Sparse polynomial over Z[zeta_L] in the commuting symbols x_l, x_l^*."""

    __slots__ = ("order", "terms")

    def __init__(self, terms: Mapping[Monomial, CycCoeff] | None = None, order: int = 4):
        terms = dict(terms or {})
        for c in terms.values():
            order = math.lcm(order, c.order)
        self.order = order
        self.terms = {m: c.lift(order) for m, c in terms.items() if not c.is_zero()}

    @classmethod
    def const(cls, c: CycCoeff | int, order: int = 4) -> CPolynomial:
        if isinstance(c, int):
            c = CycCoeff.integer(c, order)
        return cls({(): c}, order)

    @classmethod
    def var(cls, name: str, conj: bool = False, order: int = 4) -> CPolynomial:
        return cls({monomial(name + ("*" if conj else "")): CycCoeff.integer(1, order)}, order)

    def lift(self, order: int) -> CPolynomial:
        if order == self.order:
            return self
        return CPolynomial({m: c.lift(order) for m, c in self.terms.items()}, order)

    def is_zero(self) -> bool:
        return not self.terms

    def variables(self) -> set[str]:
        return {n for m in self.terms for n, _, _ in m}

    def conj(self) -> CPolynomial:
        return CPolynomial({mono_conj(m): c.conj() for m, c in self.terms.items()}, self.order)

    def fold(self, real: frozenset[str] | set[str]) -> CPolynomial:
        if not real:
            return self
        out: dict[Monomial, CycCoeff] = {}
        for m, c in self.terms.items():
            k = mono_fold(m, real)
            out[k] = out[k] + c if k in out else c
        return CPolynomial(out, self.order)

    def __add__(self, other: CPolynomial) -> CPolynomial:
        order = math.lcm(self.order, other.order)
        out = {m: c.lift(order) for m, c in self.terms.items()}
        for m, c in other.terms.items():
            c = c.lift(order)
            out[m] = out[m] + c if m in out else c
        return CPolynomial(out, order)

    def __neg__(self) -> CPolynomial:
        return CPolynomial({m: -c for m, c in self.terms.items()}, self.order)

    def __sub__(self, other: CPolynomial) -> CPolynomial:
        return self + (-other)

    def __mul__(self, other: CPolynomial | CycCoeff | int) -> CPolynomial:
        if isinstance(other, (int, CycCoeff)):
            return CPolynomial({m: c * other for m, c in self.terms.items()}, self.order)
        order = math.lcm(self.order, other.order)
        out: dict[Monomial, CycCoeff] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = mono_mul(m1, m2)
                c = c1 * c2
                out[m] = out[m] + c if m in out else c
        return CPolynomial(out, order)

    __rmul__ = __mul__

    def evaluate(self, values: Mapping[str, complex]) -> complex:
        return sum((c.to_complex() * mono_eval(m, values) for m, c in self.terms.items()), 0j)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CPolynomial):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self) -> int:
        return hash(frozenset(self.terms.items()))

    def __repr__(self) -> str:
        if not self.terms:
            return "CPolynomial(0)"
        body = " + ".join(f"{c.coeffs}*{mono_str(m) or '1'}" for m, c in sorted(self.terms.items()))
        return f"CPolynomial[L={self.order}]({body})"


# ---------------------------------------------------------------------------
# quaternion polynomials
# ---------------------------------------------------------------------------

class QPolynomial:
    """``a + b*j`` with ``a``, ``b`` complex polynomials."""

    __slots__ = ("a", "b")

    def __init__(self, a: CPolynomial | None = None, b: CPolynomial | None = None):
        a = a if a is not None else CPolynomial()
        b = b if b is not None else CPolynomial()
        order = math.lcm(a.order, b.order)
        if not b.is_zero() and order % 4:
            raise ValueError("a nonzero j-part needs i in the coefficient ring (4 | L)")
        self.a = a.lift(order)
        self.b = b.lift(order)

    @property
    def order(self) -> int:
        return self.a.order

    # constructors ---------------------------------------------------------
    @classmethod
    def const(cls, c: CycCoeff | int, order: int = 4) -> QPolynomial:
        return cls(CPolynomial.const(c, order))

    @classmethod
    def unit(cls, name: str, order: int = 4) -> QPolynomial:
        """One of the quaternion units ``1, i, j, k``."""
        one = CycCoeff.integer(1, order)
        if name == "1":
            return cls(CPolynomial({(): one}, order))
        i = CycCoeff.imag_unit(order)
        if name == "i":
            return cls(CPolynomial({(): i}, order))
        if name == "j":
            return cls(None, CPolynomial({(): one}, order))
        if name == "k":
            return cls(None, CPolynomial({(): i}, order))
        raise ValueError(f"unknown quaternion unit {name!r}")

    @classmethod
    def var(cls, name: str, conj: bool = False, order: int = 4) -> QPolynomial:
        return cls(CPolynomial.var(name, conj, order))

    def lift(self, order: int) -> QPolynomial:
        return QPolynomial(self.a.lift(order), self.b.lift(order))

    def is_zero(self) -> bool:
        return self.a.is_zero() and self.b.is_zero()

    def is_complex(self) -> bool:
        return self.b.is_zero()

    def variables(self) -> set[str]:
        return self.a.variables() | self.b.variables()

    def fold(self, real) -> QPolynomial:
        return QPolynomial(self.a.fold(real), self.b.fold(real))

    def nterms(self) -> int:
        return len(self.a.terms) + len(self.b.terms)

    # algebra --------------------------------------------------------------
    def conj(self) -> QPolynomial:
        return QPolynomial(self.a.conj(), -self.b)

    def __add__(self, other: QPolynomial) -> QPolynomial:
        return QPolynomial(self.a + other.a, self.b + other.b)

    def __neg__(self) -> QPolynomial:
        return QPolynomial(-self.a, -self.b)

    def __sub__(self, other: QPolynomial) -> QPolynomial:
        return self + (-other)

    def __mul__(self, other: QPolynomial | CycCoeff | int) -> QPolynomial:
        if isinstance(other, (int, CycCoeff)):
            other = QPolynomial.const(other, self.order)
        a1, b1, a2, b2 = self.a, self.b, other.a, other.b
        return QPolynomial(a1 * a2 - b1 * b2.conj(), a1 * b2 + b1 * a2.conj())

    def __rmul__(self, other: CycCoeff | int) -> QPolynomial:
        return QPolynomial.const(other, self.order) * self

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, QPolynomial):
            return NotImplemented
        return self.a == other.a and self.b == other.b

    def __hash__(self) -> int:
        return hash((self.a, self.b))

    def evaluate(self, values: Mapping[str, complex]) -> tuple[complex, complex]:
        return self.a.evaluate(values), self.b.evaluate(values)

    def __repr__(self) -> str:
        from .matfile import render_entry

        return f"QPolynomial({render_entry(self)!r}, L={self.order})"


def qmul(p: QPolynomial, q: QPolynomial) -> QPolynomial:
    return p * q


def qconj(p: QPolynomial) -> QPolynomial:
    return p.conj()


def qeval(
    p: QPolynomial,
    assignment: Mapping[str, complex],
    *,
    enforce_unit: bool = True,
) -> tuple[complex, complex]:
    """Numeric value ``(z, w)`` of ``p`` meaning ``z + w*j``.

    With ``enforce_unit`` every assigned value used by ``p`` must have modulus
    one within ``UNIT_TOL``.
    """
    missing = sorted(p.variables() - set(assignment))
    if missing:
        raise KeyError(f"variable {missing[0]!r} is not assigned")
    values = {n: complex(v) for n, v in assignment.items()}
    if enforce_unit:
        for n in p.variables():
            if abs(abs(values[n]) - 1.0) > UNIT_TOL:
                raise ValueError(f"variable {n!r} = {values[n]} is not of unit modulus")
    return p.evaluate(values)


# ---------------------------------------------------------------------------
# numeric quaternion arrays
# ---------------------------------------------------------------------------

class QArray:
    """Numeric quaternion array ``z + w*j`` with complex ndarrays ``z``, ``w``."""

    __slots__ = ("z", "w")

    def __init__(self, z, w=None):
        self.z = np.asarray(z, dtype=complex)
        self.w = np.zeros_like(self.z) if w is None else np.asarray(w, dtype=complex)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.z.shape

    def ctranspose(self) -> QArray:
        return QArray(self.z.conj().T, -self.w.T)

    @property
    def H(self) -> QArray:
        return self.ctranspose()

    def __matmul__(self, other: QArray) -> QArray:
        z1, w1, z2, w2 = self.z, self.w, other.z, other.w
        return QArray(z1 @ z2 - w1 @ w2.conj(), z1 @ w2 + w1 @ z2.conj())

    def __mul__(self, scalar: float) -> QArray:
        return QArray(self.z * scalar, self.w * scalar)

    __rmul__ = __mul__

    def __sub__(self, other: QArray) -> QArray:
        return QArray(self.z - other.z, self.w - other.w)

    def __add__(self, other: QArray) -> QArray:
        return QArray(self.z + other.z, self.w + other.w)

    def __getitem__(self, idx) -> QArray:
        return QArray(self.z[idx], self.w[idx])

    def abs(self) -> np.ndarray:
        return np.sqrt(np.abs(self.z) ** 2 + np.abs(self.w) ** 2)

    def __repr__(self) -> str:
        return f"QArray(shape={self.shape})"
