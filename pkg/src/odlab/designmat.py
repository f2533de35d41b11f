"""Matrices over quaternion polynomials and the design verifier.

A :class:`DesignMatrix` stores its entries densely, one integer array per
``(part, monomial)`` pair (see :mod:`odlab._dense`), so products of order-144
designs stay exact and fast.  Entries are materialised as
:class:`~odlab.cycquat.QPolynomial` on demand.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import _dense as dn
from .cycquat import (
    CPolynomial,
    CycCoeff,
    Monomial,
    QArray,
    QPolynomial,
    UNIT_TOL,
    mono_eval,
    mono_fold,
    mono_str,
)

__all__ = [
    "Var",
    "DesignMatrix",
    "DesignCertificate",
    "EntryAlphabetReport",
    "CertificationError",
    "DivisionError",
    "ctranspose",
    "matmul",
    "kron",
    "dsum",
    "circ_blocks",
    "certify",
    "entry_alphabet",
    "is_amicable",
    "butson_check",
    "ButsonResult",
]


@dataclass(frozen=True)
class Var:
    name: str
    real: bool = False


def merge_registries(*regs: Sequence[Var]) -> tuple[Var, ...]:
    out: dict[str, Var] = {}
    for reg in regs:
        for v in reg:
            old = out.get(v.name)
            if old is None:
                out[v.name] = v
            elif old.real != v.real:
                raise ValueError(f"variable {v.name!r} is declared both real and complex")
    return tuple(out.values())


def _as_registry(variables) -> tuple[Var, ...]:
    if variables is None:
        return ()
    out = []
    for v in variables:
        if isinstance(v, Var):
            out.append(v)
        elif isinstance(v, tuple):
            out.append(Var(*v))
        else:
            out.append(Var(str(v)))
    return merge_registries(out)


class DivisionError(ArithmeticError):
    pass


class DesignMatrix:
    """Immutable rectangular matrix of quaternion polynomials.

    ``a`` and ``b`` map monomials to ``(rows, cols, L)`` integer arrays for the
    complex part and the j-part respectively.  Variables listed as real in
    the registry satisfy ``x^* = x``; their monomials are kept folded.
    """

    __slots__ = ("shape", "order", "registry", "a", "b", "_real")

    def __init__(self, shape, order, registry, a, b, *, canonical=False):
        self.shape = (int(shape[0]), int(shape[1]))
        self.order = int(order)
        if self.order % 4:
            raise ValueError("root order must be a multiple of 4")
        self.registry = _as_registry(registry)
        self._real = frozenset(v.name for v in self.registry if v.real)
        if not canonical:
            a = dn.clean(dn.fold(a, self._real), self.order)
            b = dn.clean(dn.fold(b, self._real), self.order)
        self.a = a
        self.b = b
        names = {v.name for v in self.registry}
        for m in list(a) + list(b):
            for n, _, _ in m:
                if n not in names:
                    raise ValueError(f"variable {n!r} missing from registry")

    # construction ---------------------------------------------------------
    @classmethod
    def zeros(cls, rows: int, cols: int, order: int = 4, registry=()) -> DesignMatrix:
        return cls((rows, cols), order, registry, {}, {}, canonical=True)

    @classmethod
    def identity(cls, n: int, order: int = 4, registry=()) -> DesignMatrix:
        arr = np.zeros((n, n, order), dtype=np.int64)
        arr[np.arange(n), np.arange(n), 0] = 1
        return cls((n, n), order, registry, {(): arr}, {})

    @classmethod
    def from_int(cls, values, order: int = 4, registry=()) -> DesignMatrix:
        vals = np.asarray(values, dtype=np.int64)
        if vals.ndim != 2:
            raise ValueError("expected a 2-d integer array")
        arr = np.zeros(vals.shape + (order,), dtype=np.int64)
        arr[..., 0] = vals
        return cls(vals.shape, order, registry, {(): arr}, {})

    @classmethod
    def from_log(cls, logs, m: int, order: int | None = None) -> DesignMatrix:
        """Matrix of roots of unity ``zeta_m ** logs[r][c]``."""
        logs = np.asarray(logs, dtype=np.int64)
        order = order or math.lcm(4, m)
        if order % m:
            raise ValueError(f"root order {order} does not contain {m}-th roots")
        arr = np.zeros(logs.shape + (order,), dtype=np.int64)
        step = order // m
        r, c = np.indices(logs.shape)
        arr[r, c, (logs % m) * step] = 1
        return cls(logs.shape, order, (), {(): arr}, {})

    @classmethod
    def from_entries(
        cls,
        rows: Sequence[Sequence[QPolynomial | int]],
        registry=None,
        real: Iterable[str] = (),
        order: int | None = None,
    ) -> DesignMatrix:
        rows = [list(r) for r in rows]
        nr = len(rows)
        nc = len(rows[0]) if nr else 0
        if any(len(r) != nc for r in rows):
            raise ValueError("ragged rows")
        ents = [[e if isinstance(e, QPolynomial) else QPolynomial.const(int(e)) for e in r] for r in rows]
        L = math.lcm(4, *(e.order for r in ents for e in r)) if nr and nc else 4
        if order is not None:
            L = math.lcm(L, order)
        if registry is None:
            seen: list[str] = []
            for r in ents:
                for e in r:
                    for n in sorted(e.variables()):
                        if n not in seen:
                            seen.append(n)
            real = set(real)
            registry = [Var(n, n in real) for n in seen]
        a: dict = {}
        b: dict = {}
        for i, r in enumerate(ents):
            for j, e in enumerate(r):
                e = e.lift(L)
                for part, poly in ((a, e.a), (b, e.b)):
                    for m, c in poly.terms.items():
                        arr = part.get(m)
                        if arr is None:
                            arr = part[m] = np.zeros((nr, nc, L), dtype=object)
                            arr[...] = 0
                        arr[i, j] = np.array(c.coeffs, dtype=object)
        a = {m: _shrink(v) for m, v in a.items()}
        b = {m: _shrink(v) for m, v in b.items()}
        return cls((nr, nc), L, registry, a, b)

    # access -----------------------------------------------------------------
    @property
    def rows(self) -> int:
        return self.shape[0]

    @property
    def cols(self) -> int:
        return self.shape[1]

    @property
    def real_vars(self) -> frozenset[str]:
        return self._real

    @property
    def variable_names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.registry)

    def is_square(self) -> bool:
        return self.rows == self.cols

    def entry(self, r: int, c: int) -> QPolynomial:
        L = self.order
        parts = []
        for part in (self.a, self.b):
            terms = {}
            for m, arr in part.items():
                vec = arr[r, c]
                if vec.any():
                    terms[m] = CycCoeff(L, tuple(int(x) for x in vec))
            parts.append(CPolynomial(terms, L))
        return QPolynomial(*parts)

    def __getitem__(self, idx):
        r, c = idx
        if isinstance(r, slice) or isinstance(c, slice):
            rr = range(*r.indices(self.rows)) if isinstance(r, slice) else [r]
            cc = range(*c.indices(self.cols)) if isinstance(c, slice) else [c]
            return self.submatrix(list(rr), list(cc))
        return self.entry(r, c)

    def entries(self) -> list[list[QPolynomial]]:
        return [[self.entry(r, c) for c in range(self.cols)] for r in range(self.rows)]

    def is_zero(self) -> bool:
        return not self.a and not self.b

    def is_variable_free(self) -> bool:
        return all(m == () for m in list(self.a) + list(self.b))

    def has_j_part(self) -> bool:
        return bool(self.b)

    def variables(self) -> set[str]:
        return {n for m in list(self.a) + list(self.b) for n, _, _ in m}

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DesignMatrix):
            return NotImplemented
        if self.shape != other.shape:
            return False
        x, y = _align(self, other)
        return _cmat_equal(x.a, y.a) and _cmat_equal(x.b, y.b)

    __hash__ = None

    def __repr__(self) -> str:
        return f"DesignMatrix({self.rows}x{self.cols}, L={self.order}, vars={list(self.variable_names)})"

    # structural operations --------------------------------------------------
    def with_registry(self, registry) -> DesignMatrix:
        reg = merge_registries(self.registry, _as_registry(registry))
        return DesignMatrix(self.shape, self.order, reg, self.a, self.b)

    def lift(self, order: int) -> DesignMatrix:
        if order == self.order:
            return self
        return DesignMatrix(
            self.shape,
            order,
            self.registry,
            dn.lift(self.a, self.order, order),
            dn.lift(self.b, self.order, order),
            canonical=True,
        )

    def transpose(self) -> DesignMatrix:
        return DesignMatrix(
            (self.cols, self.rows), self.order, self.registry, dn.transpose(self.a), dn.transpose(self.b), canonical=True
        )

    def ctranspose(self) -> DesignMatrix:
        # (a + b j)^* = conj(a) - b j, entrywise, then transpose
        a = dn.transpose(dn.cconj(self.a, self.order, self._real))
        b = dn.transpose(dn.neg(self.b))
        return DesignMatrix((self.cols, self.rows), self.order, self.registry, dn.clean(a, self.order), b, canonical=True)

    @property
    def H(self) -> DesignMatrix:
        return self.ctranspose()

    def __neg__(self) -> DesignMatrix:
        return DesignMatrix(self.shape, self.order, self.registry, dn.neg(self.a), dn.neg(self.b), canonical=True)

    def __add__(self, other: DesignMatrix) -> DesignMatrix:
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")
        x, y = _align(self, other)
        return DesignMatrix(self.shape, x.order, x.registry, dn.add(x.a, y.a), dn.add(x.b, y.b))

    def __sub__(self, other: DesignMatrix) -> DesignMatrix:
        return self + (-other)

    def __matmul__(self, other: DesignMatrix) -> DesignMatrix:
        return matmul(self, other)

    def scale(self, c: QPolynomial | int, side: str = "left") -> DesignMatrix:
        """``c * X`` (side="left") or ``X * c`` entrywise."""
        if isinstance(c, int):
            return DesignMatrix(
                self.shape, self.order, self.registry,
                {m: v * c for m, v in self.a.items()}, {m: v * c for m, v in self.b.items()},
            )
        one = DesignMatrix.from_entries([[c]])
        if side == "left":
            return kron(one, self)
        return kron(self, one)

    def __mul__(self, c) -> DesignMatrix:
        return self.scale(c, "right")

    def __rmul__(self, c) -> DesignMatrix:
        return self.scale(c, "left")

    def submatrix(self, rows: Sequence[int] | None = None, cols: Sequence[int] | None = None) -> DesignMatrix:
        ri = np.arange(self.rows) if rows is None else np.asarray(rows, dtype=np.intp)
        ci = np.arange(self.cols) if cols is None else np.asarray(cols, dtype=np.intp)
        sel = lambda arr: arr[np.ix_(ri, ci)]  # noqa: E731
        return DesignMatrix(
            (len(ri), len(ci)), self.order, self.registry, dn.map_arrays(self.a, sel), dn.map_arrays(self.b, sel)
        )

    def row(self, r: int) -> DesignMatrix:
        return self.submatrix([r], None)

    def diagonal(self) -> list[QPolynomial]:
        return [self.entry(i, i) for i in range(min(self.shape))]

    def evaluate(self, assignment: Mapping[str, complex], *, enforce_unit: bool = True) -> QArray:
        """Numeric quaternion matrix at ``assignment``.

        Real variables must receive real values; with ``enforce_unit`` every
        value must have modulus one within ``UNIT_TOL``.
        """
        values = {}
        for v in self.registry:
            if v.name not in assignment:
                if v.name in self.variables():
                    raise KeyError(f"variable {v.name!r} is not assigned")
                continue
            x = complex(assignment[v.name])
            if enforce_unit and abs(abs(x) - 1.0) > UNIT_TOL:
                raise ValueError(f"variable {v.name!r} = {x} is not of unit modulus")
            if v.real and abs(x.imag) > UNIT_TOL:
                raise ValueError(f"real variable {v.name!r} assigned non-real value {x}")
            values[v.name] = x
        missing = self.variables() - set(values)
        if missing:
            raise KeyError(f"variable {sorted(missing)[0]!r} is not assigned")
        L = self.order
        roots = np.exp(2j * np.pi * np.arange(L) / L)
        out = []
        for part in (self.a, self.b):
            acc = np.zeros(self.shape, dtype=complex)
            for m, arr in part.items():
                acc += (arr.astype(np.float64) @ roots) * mono_eval(m, values)
            out.append(acc)
        return QArray(out[0], out[1])

    def specialize(self, values: Mapping[str, int]) -> DesignMatrix:
        """Exact substitution ``x -> +-1`` for the named variables."""
        drop = {}
        for name, v in values.items():
            if v not in (1, -1):
                raise ValueError(f"exact specialization needs +-1, got {name}={v}")
            drop[name] = v
        parts = []
        for part in (self.a, self.b):
            out: dict = {}
            for m, arr in part.items():
                sign = 1
                keep = []
                for n, d, ds in m:
                    if n in drop:
                        sign *= drop[n] ** (d + ds)
                    else:
                        keep.append((n, d, ds))
                k = tuple(keep)
                out[k] = out[k] + sign * arr if k in out else sign * arr
            parts.append(out)
        reg = [v for v in self.registry if v.name not in drop]
        return DesignMatrix(self.shape, self.order, reg, parts[0], parts[1])

    def div_int(self, k: int) -> DesignMatrix:
        """Entrywise exact division by a nonzero rational integer."""
        if k == 0:
            raise DivisionError("division by zero")
        parts = [
            {m: _exact_int_div(arr, k, self.shape, self.order) for m, arr in part.items()}
            for part in (self.a, self.b)
        ]
        return DesignMatrix(self.shape, self.order, self.registry, parts[0], parts[1], canonical=True)

    def exact_div(self, sigma: CPolynomial) -> DesignMatrix:
        """Variable-free ``K`` with ``self == K * sigma`` entrywise.

        ``sigma`` must have positive rational-integer coefficients.
        """
        sig = sigma.fold(self._real)
        if sig.is_zero():
            raise DivisionError("division by zero")
        terms = sorted(sig.terms.items())
        m0, c0 = terms[0]
        s0 = c0.as_integer()
        L = self.order
        qa = {(): _exact_int_div(self.a.get(m0), s0, self.shape, L)} if m0 in self.a else {}
        qb = {(): _exact_int_div(self.b.get(m0), s0, self.shape, L)} if m0 in self.b else {}
        quotient = DesignMatrix(self.shape, L, (), qa, qb)
        back = quotient.with_registry(self.registry).scale_poly(sig)
        if back != self:
            diff = self - back
            pos = diff.first_nonzero()
            raise DivisionError(f"entry {pos} is not a constant multiple of sigma")
        return quotient

    def scale_poly(self, poly: CPolynomial) -> DesignMatrix:
        """Entrywise product with the central (complex, conjugation-free) ``poly``."""
        reg = merge_registries(self.registry, [Var(n, n in self._real) for n in sorted(poly.variables())])
        L = math.lcm(self.order, poly.order)
        x = self.lift(L)
        pm = {}
        for m, c in poly.lift(L).terms.items():
            arr = np.zeros((1, 1, L), dtype=np.int64)
            arr[0, 0] = c.coeffs
            pm[m] = arr
        a = dn.product(x.a, pm, "kron", L, self._real)
        b = dn.product(x.b, pm, "kron", L, self._real)
        return DesignMatrix(self.shape, L, reg, a, b)

    def first_nonzero(self) -> tuple[int, int] | None:
        best = None
        for arr in list(self.a.values()) + list(self.b.values()):
            nz = np.argwhere(arr.any(axis=-1))
            if len(nz):
                cand = tuple(int(v) for v in nz[0])
                if best is None or cand < best:
                    best = cand
        return best

    def nonzero_mask(self) -> np.ndarray:
        mask = np.zeros(self.shape, dtype=bool)
        for arr in list(self.a.values()) + list(self.b.values()):
            mask |= arr.any(axis=-1)
        return mask


def _shrink(arr: np.ndarray) -> np.ndarray:
    try:
        if dn.maxabs(arr) < 2**62:
            return arr.astype(np.int64)
    except OverflowError:
        pass
    return arr


def _exact_int_div(arr, k, shape, L):
    if arr.dtype == object:
        if any(int(v) % k for v in arr.flat):
            raise DivisionError(f"coefficients not divisible by {k}")
        out = np.empty(arr.shape, dtype=object)
        for idx in np.ndindex(arr.shape):
            out[idx] = int(arr[idx]) // k
        return out
    if np.any(arr % k):
        raise DivisionError(f"coefficients not divisible by {k}")
    return arr // k


def _cmat_equal(p, q) -> bool:
    if set(p) != set(q):
        return False
    return all(np.array_equal(p[m], q[m]) for m in p)


def _align(x: DesignMatrix, y: DesignMatrix) -> tuple[DesignMatrix, DesignMatrix]:
    L = math.lcm(x.order, y.order)
    reg = merge_registries(x.registry, y.registry)
    x = x.lift(L)
    y = y.lift(L)
    if reg != x.registry:
        x = DesignMatrix(x.shape, L, reg, x.a, x.b)
    if reg != y.registry:
        y = DesignMatrix(y.shape, L, reg, y.a, y.b)
    return x, y


# ---------------------------------------------------------------------------
# products and block assembly
# ---------------------------------------------------------------------------

def _qproduct(x: DesignMatrix, y: DesignMatrix, kind: str, shape) -> DesignMatrix:
    x, y = _align(x, y)
    L = x.order
    real = x.real_vars
    # (a1 + b1 j)(a2 + b2 j) = (a1 a2 - b1 conj(b2)) + (a1 b2 + b1 conj(a2)) j
    ca2 = dn.cconj(y.a, L, real)
    cb2 = dn.cconj(y.b, L, real)
    pa = dn.add(dn.product(x.a, y.a, kind, L, real), dn.product(x.b, cb2, kind, L, real), -1)
    pb = dn.add(dn.product(x.a, y.b, kind, L, real), dn.product(x.b, ca2, kind, L, real))
    return DesignMatrix(shape, L, x.registry, pa, pb)


def matmul(x: DesignMatrix, y: DesignMatrix) -> DesignMatrix:
    if x.cols != y.rows:
        raise ValueError(f"dimension mismatch: {x.shape} @ {y.shape}")
    return _qproduct(x, y, "matmul", (x.rows, y.cols))


def ctranspose(x: DesignMatrix) -> DesignMatrix:
    return x.ctranspose()


def kron(x: DesignMatrix, y: DesignMatrix) -> DesignMatrix:
    """Kronecker product; entry products keep ``x`` on the left."""
    return _qproduct(x, y, "kron", (x.rows * y.rows, x.cols * y.cols))


def block(blocks: Sequence[Sequence[DesignMatrix]]) -> DesignMatrix:
    """Assemble a block matrix; every block row must share heights, etc."""
    heights = [row[0].rows for row in blocks]
    widths = [b.cols for b in blocks[0]]
    for row, h in zip(blocks, heights):
        if len(row) != len(widths):
            raise ValueError("ragged block rows")
        for b, w in zip(row, widths):
            if b.shape != (h, w):
                raise ValueError(f"block shape {b.shape} does not fit ({h}, {w})")
    flat = [b for row in blocks for b in row]
    L = math.lcm(*(b.order for b in flat))
    reg = merge_registries(*(b.registry for b in flat))
    flat = [b.lift(L) for b in flat]
    R, C = sum(heights), sum(widths)
    parts = []
    for attr in ("a", "b"):
        keys = {m for b in flat for m in getattr(b, attr)}
        out = {}
        for m in keys:
            dtype = object if any(getattr(b, attr).get(m, np.zeros(1, np.int64)).dtype == object for b in flat) else np.int64
            arr = np.zeros((R, C, L), dtype=dtype)
            r0 = 0
            for bi, row in enumerate(blocks):
                c0 = 0
                for bj in range(len(widths)):
                    blk = flat[bi * len(widths) + bj]
                    src = getattr(blk, attr).get(m)
                    if src is not None:
                        arr[r0 : r0 + heights[bi], c0 : c0 + widths[bj]] = src
                    c0 += widths[bj]
                r0 += heights[bi]
            out[m] = arr
        parts.append(out)
    return DesignMatrix((R, C), L, reg, parts[0], parts[1])


def hstack(mats: Sequence[DesignMatrix]) -> DesignMatrix:
    return block([list(mats)])


def vstack(mats: Sequence[DesignMatrix]) -> DesignMatrix:
    return block([[m] for m in mats])


def dsum(x: DesignMatrix, y: DesignMatrix) -> DesignMatrix:
    return block([[x, DesignMatrix.zeros(x.rows, y.cols)], [DesignMatrix.zeros(y.rows, x.cols), y]])


def circ_blocks(blocks: Sequence[DesignMatrix]) -> DesignMatrix:
    """Block circulant: block row ``r`` is the generator shifted right by ``r``.

    Block ``(r, c)`` is ``blocks[(c - r) % len(blocks)]``.
    """
    if not blocks:
        raise ValueError("empty block list")
    shape = blocks[0].shape
    if shape[0] != shape[1] or any(b.shape != shape for b in blocks):
        raise ValueError("circ_blocks needs square blocks of equal size")
    k = len(blocks)
    return block([[blocks[(c - r) % k] for c in range(k)] for r in range(k)])


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------

class CertificationError(Exception):
    """Raised when a matrix is not a design; ``code`` names the failure."""

    def __init__(self, code: str, message: str, position: tuple[int, int] | None = None):
        super().__init__(f"{code}: {message}")
        self.code = code
        self.position = position


@dataclass(frozen=True)
class EntryAlphabetReport:
    """Which entry alphabets the nonzero entries fit.

    ``od`` -- coefficients in {+-1} on real variables;
    ``cod`` -- coefficients in {+-1, +-i};
    ``qod`` -- coefficients in {+-1, +-i, +-j, +-k};
    ``roots`` -- every entry a complex root of unity (no variables);
    ``qunits`` -- every entry in {+-1, +-i, +-j, +-k} (no variables);
    ``restricted`` -- single terms whose coefficient is any complex root of
    unity, optionally followed by j.
    """

    od: bool
    cod: bool
    qod: bool
    roots: bool
    qunits: bool
    has_zero: bool
    root_orders: tuple[int, ...] = ()
    bad_position: tuple[int, int] | None = None
    restricted: bool = False


def _elem_order(t: int, sign: int, L: int) -> int:
    # multiplicative order of sign * zeta_L^t
    if sign < 0:
        t = (t + L // 2) % L
    return L // math.gcd(t, L)


def entry_alphabet(x: DesignMatrix) -> EntryAlphabetReport:
    L = x.order
    quarter = L // 4
    od = cod = qod = roots = qunits = restricted = True
    orders: set[int] = set()
    bad = None
    counts = np.zeros(x.shape, dtype=np.int64)
    for arr in list(x.a.values()) + list(x.b.values()):
        counts += arr.any(axis=-1)
    has_zero = bool((counts == 0).any())
    if (counts > 1).any():
        pos = tuple(int(v) for v in np.argwhere(counts > 1)[0])
        return EntryAlphabetReport(False, False, False, False, False, has_zero, (), pos)
    for part_name, part in (("a", x.a), ("b", x.b)):
        for m, arr in part.items():
            deg = sum(p + q for _, p, q in m)
            if deg > 1:
                od = cod = qod = restricted = False
                bad = bad or tuple(int(v) for v in np.argwhere(arr.any(axis=-1))[0])
            if m:
                roots = qunits = False
                if any(q for _, _, q in m) or any(n not in x.real_vars for n, _, _ in m):
                    od = False
            vecs = arr.reshape(-1, L)
            nz = vecs.any(axis=1)
            for vec in {tuple(int(c) for c in v) for v in vecs[nz]}:
                rt = CycCoeff(L, vec).as_root()
                if rt is None:
                    od = cod = qod = roots = qunits = restricted = False
                    if bad is None:
                        idx = np.flatnonzero(nz & (vecs == np.array(vec)).all(axis=1))[0]
                        bad = divmod(int(idx), x.cols)
                    continue
                sign, t = rt
                quarter_turn = t % quarter == 0
                if part_name == "b":
                    od = cod = False
                    roots = False
                    if not quarter_turn:
                        qod = qunits = False
                else:
                    orders.add(_elem_order(t, sign, L))
                    if not quarter_turn:
                        od = cod = qod = qunits = False
                    elif (t // quarter) % 2:
                        od = False
    return EntryAlphabetReport(od, cod, qod, roots, qunits, has_zero, tuple(sorted(orders)), bad, restricted)


@dataclass(frozen=True)
class DesignCertificate:
    cls: str
    n: int
    stype: tuple[int, ...]
    sigma: CPolynomial
    full: bool
    variables: tuple[str, ...] = ()
    butson_m: int | None = None
    restricted: bool = False

    @property
    def weight(self) -> int:
        return sum(self.stype) if self.stype else self.sigma_constant

    @property
    def sigma_constant(self) -> int:
        c = self.sigma.terms.get(())
        return c.as_integer() if c is not None else 0

    def label(self) -> str:
        if self.cls in ("OD", "COD", "QOD"):
            body = f"{self.cls}({self.n};{','.join(str(s) for s in self.stype)})"
        elif self.cls == "BUTSON":
            body = f"BH({self.n},{self.butson_m})"
        elif self.cls == "WEIGHING":
            body = f"W({self.n},{self.sigma_constant})"
        elif self.cls == "HADAMARD":
            body = f"H({self.n})"
        elif self.cls == "QHADAMARD":
            body = f"QH({self.n})"
        else:
            body = self.cls
        return body + (" full" if self.full else "")

    def __str__(self) -> str:
        return self.label()

    def to_dict(self) -> dict:
        from .matfile import render_entry

        return {
            "class": self.cls,
            "label": self.label(),
            "order": self.n,
            "type": list(self.stype),
            "sigma": render_entry(QPolynomial(self.sigma)),
            "full": self.full,
            "variables": list(self.variables),
            "butson_m": self.butson_m,
            "restricted": self.restricted,
        }


def _sigma_poly(x: DesignMatrix, gram: DesignMatrix) -> CPolynomial:
    if gram.b:
        diag_b = [m for m, arr in gram.b.items() if np.diagonal(arr[..., :]).any()]
        if diag_b:
            raise CertificationError("INHOMOGENEOUS_DIAGONAL", "diagonal has a j-part", (0, 0))
    return gram.entry(0, 0).a


def certify(x: DesignMatrix) -> DesignCertificate:
    """Verify ``X X^* = sigma I`` exactly and classify the design.

    Raises :class:`CertificationError` with code ``NOT_ORTHOGONAL``,
    ``INHOMOGENEOUS_DIAGONAL`` or ``BAD_ALPHABET``.
    """
    if not x.is_square():
        raise ValueError(f"certify needs a square matrix, got {x.shape}")
    n = x.rows
    alpha = entry_alphabet(x)
    gram = x @ x.H
    off = np.zeros((n, n), dtype=bool)
    eye = np.eye(n, dtype=bool)
    for arr in list(gram.a.values()) + list(gram.b.values()):
        off |= arr.any(axis=-1) & ~eye
    if off.any():
        pos = tuple(int(v) for v in np.argwhere(off)[0])
        raise CertificationError("NOT_ORTHOGONAL", f"(X X^*)[{pos[0]},{pos[1]}] != 0", pos)
    for part in (gram.a, gram.b):
        for m, arr in part.items():
            diag = arr[np.arange(n), np.arange(n)]
            if not (diag == diag[0]).all():
                i = int(np.flatnonzero((diag != diag[0]).any(axis=1))[0])
                raise CertificationError("INHOMOGENEOUS_DIAGONAL", f"diagonal entry {i} differs from entry 0", (i, i))
    if gram.b:
        raise CertificationError("INHOMOGENEOUS_DIAGONAL", "diagonal has a j-part", (0, 0))
    sigma = gram.entry(0, 0).a if n else CPolynomial()

    if x.is_variable_free():
        if not sigma.terms or set(sigma.terms) != {()}:
            raise CertificationError("INHOMOGENEOUS_DIAGONAL", "sigma is not a rational integer", (0, 0))
        w = sigma.terms[()].as_integer() if sigma.terms[()].is_integer() else None
        if w is None or w <= 0:
            raise CertificationError("INHOMOGENEOUS_DIAGONAL", "sigma is not a positive integer", (0, 0))
        full = w == n
        if alpha.has_zero or not full:
            if not (alpha.qunits or alpha.roots or alpha.has_zero):
                raise CertificationError("BAD_ALPHABET", "entries are not units", alpha.bad_position)
            return DesignCertificate("WEIGHING", n, (), sigma, full)
        if alpha.od or (alpha.roots and alpha.root_orders and max(alpha.root_orders) <= 2):
            return DesignCertificate("HADAMARD", n, (), sigma, True, butson_m=2)
        if alpha.roots:
            m = math.lcm(*alpha.root_orders)
            return DesignCertificate("BUTSON", n, (), sigma, True, butson_m=m)
        if alpha.qunits:
            return DesignCertificate("QHADAMARD", n, (), sigma, True)
        raise CertificationError("BAD_ALPHABET", "entries are not roots of unity or quaternion units", alpha.bad_position)

    if not (alpha.qod or alpha.restricted):
        raise CertificationError("BAD_ALPHABET", "entries outside {0, +-e x, +-e x^*}", alpha.bad_position)
    names = list(x.variable_names)
    stype = []
    seen = set()
    for m, c in sigma.terms.items():
        if len(m) != 1:
            raise CertificationError("INHOMOGENEOUS_DIAGONAL", f"sigma has a cross term {mono_str(m)}", (0, 0))
        name, d, ds = m[0]
        ok = (d, ds) == (2, 0) if name in x.real_vars else (d, ds) == (1, 1)
        if not ok or not c.is_integer() or c.as_integer() <= 0:
            raise CertificationError("INHOMOGENEOUS_DIAGONAL", f"sigma term {mono_str(m)} is not s|x|^2", (0, 0))
        seen.add(name)
    used = [nm for nm in names if nm in seen]
    for nm in used:
        key = ((nm, 2, 0),) if nm in x.real_vars else ((nm, 1, 1),)
        stype.append(sigma.terms[key].as_integer())
    if x.variables() - seen:
        missing = sorted(x.variables() - seen)[0]
        raise CertificationError("INHOMOGENEOUS_DIAGONAL", f"variable {missing} absent from sigma", (0, 0))
    cls = "OD" if alpha.od else "COD" if alpha.cod else "QOD"
    return DesignCertificate(
        cls, n, tuple(stype), sigma, sum(stype) == n, tuple(used), restricted=not alpha.qod
    )


def is_amicable(x: DesignMatrix, y: DesignMatrix) -> bool:
    """True iff ``X Y^* == Y X^*``."""
    if x.shape != y.shape or not x.is_square():
        raise ValueError(f"shape mismatch {x.shape} vs {y.shape}")
    return (x @ y.H) == (y @ x.H)


@dataclass(frozen=True)
class ButsonResult:
    ok: bool
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


def butson_check(h: DesignMatrix, m: int) -> ButsonResult:
    """BH(n, m) test: every entry an m-th root of unity and ``H H^* = n I``."""
    if not h.is_square():
        return ButsonResult(False, "not square")
    if not h.is_variable_free():
        return ButsonResult(False, "matrix has variables")
    if h.b:
        return ButsonResult(False, "entries have a j-part")
    L = math.lcm(h.order, m)
    h = h.lift(L)
    arr = h.a.get(())
    if arr is None:
        return ButsonResult(False, "zero matrix")
    step = L // m
    allowed = {CycCoeff.root(t * step, L).coeffs for t in range(m)}
    vecs = arr.reshape(-1, L)
    for idx, v in enumerate(vecs):
        if tuple(int(c) for c in v) not in allowed:
            r, c = divmod(idx, h.cols)
            return ButsonResult(False, f"entry ({r},{c}) is not an {m}-th root of unity")
    n = h.rows
    if h @ h.H != DesignMatrix.identity(n, L) .scale(n):
        return ButsonResult(False, "H H^* != n I")
    return ButsonResult(True, f"BH({n},{m})")
