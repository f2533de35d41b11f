"""Design constructions: Paley cores, the recursive unfaithful families, the
auxiliary-matrix machinery and the order-4n^2 doubling with its unbiased
companion."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .cycquat import CPolynomial, CycCoeff, QPolynomial
from .designmat import (
    CertificationError,
    DesignCertificate,
    DesignMatrix,
    DivisionError,
    Var,
    block,
    certify,
    circ_blocks,
    hstack,
    kron,
    vstack,
)

__all__ = [
    "ConferencePair",
    "paley_conference",
    "ja_family",
    "x_family",
    "cd_family",
    "y_family",
    "aux_matrices",
    "small_aux",
    "autocorrelation",
    "barker_check",
    "golay_check",
    "golay_from_barker",
    "DoublingResult",
    "doubling",
    "unbiased_pair",
    "hadamard_catalog",
    "HADAMARD_ORDERS",
    "BH33_LOG",
]

BH33_LOG = ((0, 0, 0), (0, 1, 2), (0, 2, 1))
_H2 = ((1, 1), (1, -1))


def _is_prime(q: int) -> bool:
    return q >= 2 and all(q % p for p in range(2, math.isqrt(q) + 1))


def _var(name: str, registry: Sequence[str], real: bool = True) -> DesignMatrix:
    """1x1 matrix ``[[name]]`` carrying the full ordered registry."""
    return DesignMatrix.from_entries([[QPolynomial.var(name)]], registry=[Var(v, real) for v in registry])


def _ones(r: int, c: int | None = None) -> DesignMatrix:
    return DesignMatrix.from_int(np.ones((r, r if c is None else c), dtype=np.int64))


def _eye(n: int) -> DesignMatrix:
    return DesignMatrix.identity(n)


# ---------------------------------------------------------------------------
# conference matrices and the recursive families
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConferencePair:
    S: DesignMatrix
    Q: DesignMatrix
    kind: str
    q: int


def paley_conference(q: int) -> ConferencePair:
    """Paley conference matrix ``S`` with core ``Q[a][b] = chi(b - a)``.

    Only primes are supported.  ``q = 3 mod 4`` gives a skew pair,
    ``q = 1 mod 4`` a symmetric one.
    """
    if q % 2 == 0 or not _is_prime(q):
        raise ValueError(f"q = {q} is not an odd prime")
    squares = {(x * x) % q for x in range(1, q)}
    chi = np.array([0] + [1 if t in squares else -1 for t in range(1, q)], dtype=np.int64)
    idx = np.arange(q)
    core = chi[(idx[None, :] - idx[:, None]) % q]
    skew = q % 4 == 3
    s = np.zeros((q + 1, q + 1), dtype=np.int64)
    s[0, 1:] = 1
    s[1:, 0] = -1 if skew else 1
    s[1:, 1:] = core
    return ConferencePair(DesignMatrix.from_int(s), DesignMatrix.from_int(core), "skew" if skew else "symmetric", q)


def ja_family(q: int, m: int, a: str = "a", b: str = "b") -> tuple[DesignMatrix, DesignMatrix]:
    """The pair ``(J_m, A_m)`` over the skew core of order ``q``."""
    pair = paley_conference(q)
    if pair.kind != "skew":
        raise ValueError(f"q = {q} has no skew core (need q = 3 mod 4)")
    J, A = _var(a, (a, b)), _var(b, (a, b))
    for _ in range(m):
        J, A = kron(_ones(q), A), kron(_eye(q), J) + kron(pair.Q, A)
    return J, A


def x_family(q: int, m: int, a: str = "a", b: str = "b") -> DesignMatrix:
    """``I_{q+1} (x) J_m + S (x) A_m``, an OD(q^m(q+1); q^m, q^(m+1))."""
    pair = paley_conference(q)
    J, A = ja_family(q, m, a, b)
    return kron(_eye(q + 1), J) + kron(pair.S, A)


def cd_family(q: int, m: int, a: str = "a", b: str = "b") -> tuple[DesignMatrix, DesignMatrix]:
    """The pair ``(C_m, D_m)`` over the symmetric core of order ``q``."""
    pair = paley_conference(q)
    if pair.kind != "symmetric":
        raise ValueError(f"q = {q} has no symmetric core (need q = 1 mod 4)")
    i = DesignMatrix.from_entries([[QPolynomial.unit("i")]])
    C, D = _var(a, (a, b)), _var(b, (a, b))
    for _ in range(m):
        C, D = kron(_ones(q), D), kron(_eye(q), C) + kron(kron(i, pair.Q), D)
    return C, D


def y_family(q: int, m: int, a: str = "a", b: str = "b") -> DesignMatrix:
    """``i I_{q+1} (x) C_m + S (x) D_m``, a COD(q^m(q+1); q^m, q^(m+1))."""
    pair = paley_conference(q)
    C, D = cd_family(q, m, a, b)
    i = DesignMatrix.from_entries([[QPolynomial.unit("i")]])
    return kron(kron(i, _eye(q + 1)), C) + kron(pair.S, D)


# ---------------------------------------------------------------------------
# auxiliary matrices, Barker sequences and Golay pairs
# ---------------------------------------------------------------------------

def _require_hadamard(h: DesignMatrix) -> DesignCertificate:
    cert = certify(h)
    if cert.cls not in ("HADAMARD", "QHADAMARD", "BUTSON"):
        raise CertificationError("BAD_ALPHABET", f"expected a Hadamard-type matrix, got {cert.label()}")
    return cert


def _require_full(x: DesignMatrix) -> DesignCertificate:
    cert = certify(x)
    if not cert.full:
        raise CertificationError("INHOMOGENEOUS_DIAGONAL", f"design {cert.label()} is not full")
    return cert


def small_aux(h: DesignMatrix) -> list[DesignMatrix]:
    """``c_i = h_i^* h_i`` for the rows ``h_i`` of ``h``."""
    return [h.row(i).H @ h.row(i) for i in range(h.rows)]


def aux_matrices(h: DesignMatrix, x: DesignMatrix, *, check: bool = True) -> list[DesignMatrix]:
    """``C_i = h_i^* r_i`` for the rows of a Hadamard ``h`` and a full design ``x``."""
    if h.shape != x.shape or not h.is_square():
        raise ValueError(f"order mismatch: {h.shape} vs {x.shape}")
    if check:
        _require_hadamard(h)
        _require_full(x)
    return [h.row(i).H @ x.row(i) for i in range(h.rows)]


def autocorrelation(seq: Sequence[DesignMatrix], k: int) -> DesignMatrix:
    """Aperiodic ``N(k) = sum_i C_{i+k} C_i^*``."""
    n = len(seq)
    shape = seq[0].shape
    if any(s.shape != shape for s in seq):
        raise ValueError("sequence elements must share one shape")
    acc = DesignMatrix.zeros(shape[0], shape[0])
    for i in range(n - k):
        acc = acc + seq[i + k] @ seq[i].H
    return acc


def barker_check(seq: Sequence[DesignMatrix]) -> bool:
    """All aperiodic autocorrelations at shifts ``1..n-1`` vanish."""
    if not seq:
        raise ValueError("empty sequence")
    return all(autocorrelation(seq, k).is_zero() for k in range(1, len(seq)))


def golay_check(a: Sequence[DesignMatrix], b: Sequence[DesignMatrix]) -> bool:
    """``N_A(k) + N_B(k) = 0`` for every shift ``1 <= k < n``."""
    if len(a) != len(b) or not a:
        raise ValueError("Golay pair sequences must be nonempty and of equal length")
    if any(s.shape != a[0].shape for s in list(a) + list(b)):
        raise ValueError("sequence elements must share one shape")
    return all((autocorrelation(a, k) + autocorrelation(b, k)).is_zero() for k in range(1, len(a)))


def golay_from_barker(seq: Sequence[DesignMatrix]) -> tuple[list[DesignMatrix], list[DesignMatrix]]:
    """``(C_0..C_{n-1}, C_{n-1}..C_1)`` and ``(C_0..C_{n-1}, -C_{n-1}..-C_1)``."""
    seq = list(seq)
    tail = seq[1:][::-1]
    return seq + tail, seq + [-c for c in tail]


# ---------------------------------------------------------------------------
# the doubling construction
# ---------------------------------------------------------------------------

@dataclass
class DoublingResult:
    """Blocks of ``[[G, F, -F], [E, A, B], [-E, B, A]]``.

    ``G`` is 2n x 2n, ``F`` is 2n x (2n-1)n, ``E`` is (2n-1)n x 2n and ``A``,
    ``B`` are (2n-1)n square; the three block rows have heights 2n,
    (2n-1)n, (2n-1)n and together tile 4n^2.
    """

    X4: DesignMatrix
    G: DesignMatrix
    E: DesignMatrix
    F: DesignMatrix
    A: DesignMatrix
    B: DesignMatrix
    n: int
    sigma: CPolynomial
    H: DesignMatrix | None = None
    X: DesignMatrix | None = None
    C: list[DesignMatrix] = field(default_factory=list)

    @property
    def order(self) -> int:
        return 4 * self.n * self.n

    @property
    def sizes(self) -> tuple[int, int, int]:
        n = self.n
        return 2 * n, (2 * n - 1) * n, (2 * n - 1) * n

    def block_rows(self) -> tuple[range, range, range]:
        p, q, r = self.sizes
        return range(0, p), range(p, p + q), range(p + q, p + q + r)

    @classmethod
    def from_matrix(cls, x4: DesignMatrix, sigma: CPolynomial | None = None) -> DoublingResult:
        """Slice a matrix already laid out as the doubling block form."""
        n2 = x4.rows
        n = math.isqrt(n2 // 4)
        if 4 * n * n != n2 or not x4.is_square():
            raise ValueError(f"order {x4.shape} is not of the form 4n^2")
        p, q = 2 * n, (2 * n - 1) * n
        s1, s2, s3 = range(0, p), range(p, p + q), range(p + q, n2)
        sub = lambda r, c: x4.submatrix(list(r), list(c))  # noqa: E731
        if sigma is None:
            sig_x = certify(x4).sigma
            sigma = CPolynomial({m: c.exact_div(4 * n) for m, c in sig_x.terms.items()}, sig_x.order)
        return cls(x4, sub(s1, s1), sub(s2, s1), sub(s1, s2), sub(s2, s2), sub(s2, s3), n, sigma)


def doubling(x: DesignMatrix, h: DesignMatrix, *, check: bool = True) -> DoublingResult:
    """The order-4n^2 design built from a full design ``x`` and Hadamard ``h``."""
    if x.shape != h.shape or not x.is_square():
        raise ValueError(f"order mismatch: {x.shape} vs {h.shape}")
    n = x.rows
    if check:
        _require_hadamard(h)
        xc = _require_full(x)
        sigma = xc.sigma
    else:
        sigma = (x.row(0) @ x.row(0).H).entry(0, 0).a
    h2 = DesignMatrix.from_int(_H2)
    hh, xx = kron(h2, h), kron(h2, x)
    hrow = lambda i: h.row(i)  # noqa: E731
    hhrow = lambda i: hh.row(i)  # noqa: E731
    xrow = lambda i: x.row(i)  # noqa: E731
    xxrow = lambda i: xx.row(i)  # noqa: E731

    C = [hrow(i).H @ xrow(i) for i in range(n)]
    E = vstack([hrow(0).H @ xxrow(i) for i in range(1, 2 * n)])
    F = hstack([hhrow(i).H @ xrow(0) for i in range(1, 2 * n)])
    G = hhrow(0).H @ xxrow(0)
    sym, anti = golay_from_barker(C)
    A = circ_blocks(sym)
    B = circ_blocks(anti)
    X4 = block([[G, F, -F], [E, A, B], [-E, B, A]])
    return DoublingResult(X4, G, E, F, A, B, n, sigma, h, x, C)


def unbiased_pair(d: DoublingResult, mode: str = "columns") -> tuple[DesignMatrix, DesignMatrix]:
    """Companion ``Y`` of the doubled design and the matrix ``K``.

    ``mode="columns"``: ``X = [U V]`` with ``V`` the last block column,
    ``Y = [U -V]`` and ``K = X Y^* / (2 sigma)``.
    ``mode="rows"``: ``X`` is split by its last block row,
    ``Y = [U; -V]`` and ``K = X^* Y / (2 sigma)``.
    """
    x = d.X4
    _, _, last = d.block_rows()
    first = list(range(last.start))
    last = list(last)
    if mode == "columns":
        U, V = x.submatrix(None, first), x.submatrix(None, last)
        Y = hstack([U, -V])
        prod = x @ Y.H
    elif mode == "rows":
        U, V = x.submatrix(first, None), x.submatrix(last, None)
        Y = vstack([U, -V])
        prod = x.H @ Y
    else:
        raise ValueError(f"unknown mode {mode!r}")
    two_sigma = d.sigma * 2
    try:
        K = prod.exact_div(two_sigma)
    except DivisionError as exc:
        raise DivisionError(f"DIVISION_FAILS: {exc}") from None
    return Y, K


# ---------------------------------------------------------------------------
# Hadamard catalog
# ---------------------------------------------------------------------------

HADAMARD_ORDERS = (1, 2, 3, 4, 6, 8, 12, 16)


def _sylvester(k: int) -> np.ndarray:
    h = np.ones((1, 1), dtype=np.int64)
    for _ in range(k):
        h = np.kron(np.array(_H2), h)
    return h


def hadamard_catalog(n: int) -> DesignMatrix:
    """A fixed (complex) Hadamard matrix of order ``n``.

    Orders 3 and 6 are Butson matrices over the 3rd and 6th roots of unity
    (``F_2 (x) F_3`` for 6); order 12 is the Paley matrix ``I + S`` for q = 11.
    """
    if n == 1:
        return DesignMatrix.from_int([[1]])
    if n in (2, 4, 8, 16):
        return DesignMatrix.from_int(_sylvester(int(math.log2(n))))
    if n == 3:
        return DesignMatrix.from_log(BH33_LOG, 3, 12)
    if n == 6:
        return kron(DesignMatrix.from_int(_H2), DesignMatrix.from_log(BH33_LOG, 3, 12))
    if n == 12:
        s = paley_conference(11).S
        return _eye(12) + s
    raise ValueError(f"no catalog Hadamard matrix of order {n}; supported: {HADAMARD_ORDERS}")
