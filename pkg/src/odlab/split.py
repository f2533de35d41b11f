"""Balanced-splittability classification of row submatrices.

For a row subset ``X_1`` of a full design the Gram ``X_1^* X_1`` is formed
exactly and each off-diagonal cell is matched against three shapes:

* monomial  -- a single term ``+-eps c m`` (``eps`` a quaternion unit);
* hermitian -- ``sum t_l |x_l|^2`` with nonnegative ``t_l`` summing to the
  number of rows;
* sigma     -- ``+-eps c sigma`` for the primitive weight polynomial sigma.

The constants ``c`` are compared up to sign, the units ``1, i`` and complex
conjugation; at most two classes may occur.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

from .cycquat import CPolynomial, CycCoeff, QPolynomial
from .designmat import DesignMatrix, certify

__all__ = [
    "STABLE",
    "UNSTABLE",
    "UNFAITHFUL_UNSTABLE",
    "NOT_SPLIT",
    "SplitReport",
    "classify_split",
    "classify_gram",
    "canonical_splits",
    "classify_canonical",
    "enumerate_splits",
    "EnumerationResult",
    "primitive_sigma",
]

STABLE = "STABLE"
UNSTABLE = "UNSTABLE"
UNFAITHFUL_UNSTABLE = "UNFAITHFUL_UNSTABLE"
NOT_SPLIT = "NOT_SPLIT"

_MAX_WITNESSES = 3


@dataclass
class SplitReport:
    category: str
    m: int
    alpha: QPolynomial | None = None
    beta: QPolynomial | None = None
    rows: tuple[int, ...] = ()
    witnesses: dict[str, list[tuple[tuple[int, int], str]]] = field(default_factory=dict)
    all_hermitian: bool = False
    abs_equal: bool | None = None
    reason: str = ""

    @property
    def faithful(self) -> bool:
        return self.category in (STABLE, UNSTABLE)

    def to_dict(self) -> dict:
        from .matfile import render_entry

        return {
            "category": self.category,
            "m": self.m,
            "rows": list(self.rows),
            "alpha": render_entry(self.alpha) if self.alpha is not None else None,
            "beta": render_entry(self.beta) if self.beta is not None else None,
            "faithful": self.faithful,
            "abs_equal": self.abs_equal,
            "all_hermitian": self.all_hermitian,
            "witnesses": {k: [{"pos": list(p), "entry": s} for p, s in v] for k, v in self.witnesses.items()},
            "reason": self.reason,
        }


def primitive_sigma(sigma: CPolynomial) -> CPolynomial:
    """``sigma`` divided by the gcd of its integer coefficients."""
    ints = [c.as_integer() for c in sigma.terms.values()]
    g = reduce(math.gcd, ints, 0) or 1
    return CPolynomial({m: c.exact_div(g) for m, c in sigma.terms.items()}, sigma.order)


# ---------------------------------------------------------------------------
# constant classes
# ---------------------------------------------------------------------------

def _units(L: int) -> list[CycCoeff]:
    return [CycCoeff.root(0, L), CycCoeff.imag_unit(L)]


def _const_class(ra: tuple[int, ...] | None, rb: tuple[int, ...] | None, L: int):
    """``(key, sign)`` of the constant ``ra + rb j`` modulo units and conj."""
    if ra is not None and rb is not None:
        # a genuinely quaternion constant: only the overall sign is free
        pos = (ra, rb)
        neg = (tuple(-v for v in ra), tuple(-v for v in rb))
        key = max(pos, neg)
        return ("q",) + key, 1 if key == pos else -1
    g = CycCoeff(L, ra if ra is not None else rb)
    forms = [s * u for s in (g, g.conj()) for u in _units(L)]
    cands = forms + [-f for f in forms]
    key = max(c.coeffs for c in cands)
    sign = 1 if any(f.coeffs == key for f in forms) else -1
    return ("c", key), sign


def _class_value(key, L: int) -> QPolynomial:
    if key[0] == "q":
        return QPolynomial(CPolynomial.const(CycCoeff(L, key[1]), L), CPolynomial.const(CycCoeff(L, key[2]), L))
    return QPolynomial(CPolynomial.const(CycCoeff(L, key[1]), L))


# ---------------------------------------------------------------------------
# cell-wise matching
# ---------------------------------------------------------------------------

def _is_square_mono(m, real) -> bool:
    if len(m) != 1:
        return False
    name, d, ds = m[0]
    return (d, ds) == ((2, 0) if name in real else (1, 1))


def _cells(gram: DesignMatrix):
    """Flattened ``(part, monomial, array[N, L])`` triples for the cells."""
    N = gram.rows * gram.cols
    L = gram.order
    out = []
    for tag, part in (("a", gram.a), ("b", gram.b)):
        for m in sorted(part):
            out.append((tag, m, np.asarray(part[m]).reshape(N, L)))
    return out


def _match_sigma(cells, sigma: CPolynomial, N: int, L: int):
    """Per-cell constants ``rho`` with ``cell == rho * sigma`` (or None)."""
    ok = np.ones(N, dtype=bool)
    terms = sorted(sigma.terms.items())
    m0, c0 = terms[0]
    s0 = c0.as_integer()
    rho = {}
    for tag in ("a", "b"):
        arrs = {m: arr for t, m, arr in cells if t == tag}
        base = arrs.get(m0)
        if base is None:
            # rho = 0 on this part, so the whole part must vanish
            for arr in arrs.values():
                ok &= ~arr.any(axis=1)
            rho[tag] = np.zeros((N, L), dtype=np.int64)
            continue
        ok &= ~(base % s0).any(axis=1)
        r = base // s0
        for m, arr in arrs.items():
            coef = sigma.terms.get(m)
            want = r * coef.as_integer() if coef is not None else 0
            ok &= ~(arr != want).any(axis=1) if coef is not None else ~arr.any(axis=1)
        for m, c in terms:
            if m not in arrs:
                ok &= ~r.any(axis=1)
        rho[tag] = r
    return ok, rho


def classify_gram(
    gram: DesignMatrix,
    m: int,
    sigma: CPolynomial | None,
    real: Iterable[str] = (),
    rows: Sequence[int] = (),
) -> SplitReport:
    """Classify the off-diagonal cells of a Gram matrix of an ``m``-row split."""
    from .matfile import render_entry

    real = frozenset(real)
    n = gram.rows
    N = n * n
    L = gram.order
    off = ~np.eye(n, dtype=bool).reshape(N)
    cells = _cells(gram)
    nz = [arr.any(axis=1) for _, _, arr in cells]
    counts = np.sum(nz, axis=0) if nz else np.zeros(N, dtype=np.int64)
    report = SplitReport(NOT_SPLIT, m, rows=tuple(rows))
    if n < 2:
        report.reason = "fewer than two columns"
        return report
    if (counts[off] == 0).any():
        pos = divmod(int(np.flatnonzero(off & (counts == 0))[0]), n)
        report.reason = f"zero off-diagonal entry at {pos}"
        return report

    def witness(kind: str, mask: np.ndarray) -> None:
        idx = np.flatnonzero(mask & off)[:_MAX_WITNESSES]
        report.witnesses[kind] = [
            (divmod(int(i), n), render_entry(gram.entry(*divmod(int(i), n)))) for i in idx
        ]

    def summarise(keys_signs: dict, category: str) -> SplitReport | None:
        classes: dict = {}
        for key, sign in keys_signs:
            classes.setdefault(key, set()).add(sign)
        if len(classes) > 2:
            report.reason = f"{len(classes)} distinct constants"
            return None
        keys = sorted(classes)
        report.category = category
        if len(keys) == 1:
            k = keys[0]
            val = _class_value(k, L)
            signs = classes[k]
            report.alpha = val if 1 in signs else -val
            report.beta = -val if signs == {1, -1} else None
        elif len(keys) == 2:
            vals = [_class_value(k, L) for k in keys]
            report.alpha = vals[0] if 1 in classes[keys[0]] else -vals[0]
            report.beta = vals[1] if 1 in classes[keys[1]] else -vals[1]
        if report.alpha is not None:
            b = report.beta if report.beta is not None else report.alpha
            na = report.alpha * report.alpha.conj()
            nb = b * b.conj()
            report.abs_equal = na == nb
        return report

    def const_keys(pairs: Iterable[tuple]) -> set:
        return {_const_class(ra, rb, L) for ra, rb in pairs}

    # stable: every off-diagonal is +-eps c sigma
    if sigma is not None and not sigma.is_zero():
        sig = sigma.lift(L) if sigma.order != L else sigma
        ok, rho = _match_sigma(cells, sig, N, L)
        if ok[off].all():
            ra, rb = rho["a"][off], rho["b"][off]
            pairs = set()
            for va, vb in zip(map(tuple, ra.tolist()), map(tuple, rb.tolist())):
                pairs.add((va if any(va) else None, vb if any(vb) else None))
            witness("sigma", ok)
            if summarise(const_keys(pairs), STABLE) is not None:
                return report
            report.category = NOT_SPLIT
            report.witnesses.clear()

    # single-term cells
    mono = counts == 1
    herm = np.ones(N, dtype=bool)
    herm_sum = np.zeros(N, dtype=np.int64)
    for (tag, mon, arr), z in zip(cells, nz):
        if tag == "b" or not _is_square_mono(mon, real):
            herm &= ~z
        else:
            herm &= ~z | (~arr[:, 1:].any(axis=1) & (arr[:, 0] > 0))
            herm_sum = herm_sum + np.where(z, arr[:, 0], 0).astype(np.int64)
    herm &= herm_sum == m

    def mono_pairs(mask: np.ndarray) -> set:
        pairs = set()
        for (tag, _, arr), z in zip(cells, nz):
            sel = mask & z
            if sel.any():
                for v in {tuple(x) for x in arr[sel].tolist()}:
                    pairs.add((v, None) if tag == "a" else (None, v))
        return pairs

    if mono[off].all():
        witness("monomial", mono)
        if summarise(const_keys(mono_pairs(off)), UNSTABLE) is not None:
            return report
        report.category = NOT_SPLIT
        report.witnesses.clear()
        return report

    if (mono | herm)[off].all() and herm[off].any():
        rest = off & ~herm
        witness("hermitian", herm)
        witness("monomial", rest)
        if not rest.any():
            report.category = UNFAITHFUL_UNSTABLE
            report.all_hermitian = True
            report.reason = "every off-diagonal entry is hermitian"
            return report
        if summarise(const_keys(mono_pairs(rest)), UNFAITHFUL_UNSTABLE) is not None:
            return report
        report.category = NOT_SPLIT
        report.witnesses.clear()
        return report

    bad = off & ~(mono | herm)
    pos = divmod(int(np.flatnonzero(bad)[0]), n) if bad.any() else None
    report.reason = f"entry {pos} matches no split shape" if pos else "no split shape matches"
    return report


def classify_split(x: DesignMatrix, rows: Sequence[int], sigma: CPolynomial | None = None) -> SplitReport:
    """Classify the row submatrix ``x[rows, :]``.

    ``sigma`` is the weight polynomial for the stable test; by default the
    primitive part of the certified weight of ``x``.
    """
    rows = list(rows)
    if not rows or len(rows) >= x.rows or len(set(rows)) != len(rows):
        raise ValueError("rows must be a nonempty proper subset of distinct indices")
    if sigma is None:
        sigma = primitive_sigma(certify(x).sigma)
    x1 = x.submatrix(rows, None)
    gram = x1.H @ x1
    return classify_gram(gram, len(rows), sigma, x.real_vars, rows)


# ---------------------------------------------------------------------------
# canonical splits of the doubled design
# ---------------------------------------------------------------------------

def canonical_splits(d) -> dict[str, list[list[int]]]:
    """Row subsets of ``X`` (horizontal) and of ``X^*`` (vertical)."""
    _, second, third = d.block_rows()
    return {"horizontal": [list(second), list(third)], "vertical": [list(second), list(third)]}


def classify_canonical(d) -> dict[str, list[SplitReport]]:
    splits = canonical_splits(d)
    sigma = d.sigma
    xh = d.X4.H
    return {
        "horizontal": [classify_split(d.X4, r, sigma) for r in splits["horizontal"]],
        "vertical": [classify_split(xh, r, sigma) for r in splits["vertical"]],
    }


@dataclass
class EnumerationResult:
    reports: list[SplitReport]
    examined: int
    total: int
    partial: bool


def enumerate_splits(x: DesignMatrix, m: int, limit: int | None = 10000) -> EnumerationResult:
    """Classify row subsets of size ``m`` in lexicographic order.

    At most ``limit`` subsets are examined; ``partial`` is set when the budget
    ran out before all were seen.
    """
    n = x.rows
    if not 1 <= m < n:
        raise ValueError(f"subset size must satisfy 1 <= m < {n}")
    sigma = primitive_sigma(certify(x).sigma)
    total = math.comb(n, m)
    found = []
    examined = 0
    for rows in itertools.combinations(range(n), m):
        if limit is not None and examined >= limit:
            break
        examined += 1
        rep = classify_split(x, rows, sigma)
        if rep.category != NOT_SPLIT:
            found.append(rep)
    return EnumerationResult(found, examined, total, examined < total)
