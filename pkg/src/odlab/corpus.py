"""The shipped corpus of printed matrices and the runner that re-derives them.

Every file is checked three ways: its SHA-256 against ``MANIFEST.sha256``,
render/parse round-trip, and an entrywise diff against the matrix rebuilt by
the constructions.  A diff that is not exact is analysed for sign patterns
and row/column permutations instead of being reported as a bare failure.
"""
from __future__ import annotations

import hashlib
import os
import re
from dataclasses import dataclass, field
from functools import cached_property
from importlib import resources
from pathlib import Path
from typing import Callable

from .construct import DoublingResult, doubling, hadamard_catalog, unbiased_pair
from .designmat import CertificationError, DesignMatrix, _align, certify
from .matfile import MatrixFile, ParseError, _cell_strings, parse_matrix, render_matrix

__all__ = [
    "CORPUS_ENV",
    "CorpusEntry",
    "Comparison",
    "corpus_dir",
    "load_manifest",
    "load",
    "compare",
    "check_corpus",
    "ENTRIES",
]

CORPUS_ENV = "ODLAB_CORPUS"


def corpus_dir(path: str | os.PathLike | None = None) -> Path:
    """Explicit ``path``, else ``$ODLAB_CORPUS``, else the packaged corpus."""
    if path is not None:
        return Path(path)
    env = os.environ.get(CORPUS_ENV)
    if env:
        return Path(env)
    return Path(str(resources.files("odlab") / "corpus"))


def load_manifest(root: Path) -> dict[str, str]:
    out = {}
    for line in (root / "MANIFEST.sha256").read_text(encoding="utf-8").splitlines():
        if line.strip():
            digest, name = line.split(None, 1)
            out[name.strip()] = digest
    return out


def load(name: str, root: str | os.PathLike | None = None) -> MatrixFile:
    return parse_matrix((corpus_dir(root) / f"{name}.mat").read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# entrywise comparison
# ---------------------------------------------------------------------------

def _label(cell: str) -> str:
    if cell == "0":
        return "0"
    names = sorted({t for t in _words(cell) if t not in ("i", "j", "k", "w")})
    return "*".join(names) if names else "const"


def _words(cell: str) -> list[str]:
    return re.findall(r"[A-Za-z_][A-Za-z0-9_]*", cell)


def _signed_perm(src: list[tuple[str, ...]], neg: list[tuple[str, ...]], dst: list[tuple[str, ...]]):
    """For each ``dst[i]`` find an unused ``src[j]`` equal to it or to its negation."""
    used: set[int] = set()
    perm, signs = [], []
    for row in dst:
        for j in range(len(src)):
            if j in used:
                continue
            if src[j] == row:
                s = 1
            elif neg[j] == row:
                s = -1
            else:
                continue
            used.add(j)
            perm.append(j)
            signs.append(s)
            break
        else:
            return None
    return perm, signs


@dataclass
class Comparison:
    exact: bool
    cells: int
    differing: list[tuple[int, int]]
    negated: int
    by_label: dict[str, dict[str, int]]
    notes: list[str] = field(default_factory=list)
    row_signs: list[int] | None = None
    col_signs: list[int] | None = None
    row_perm: list[int] | None = None
    col_perm: list[int] | None = None
    equivalent: bool = False

    def to_dict(self) -> dict:
        return {
            "exact": self.exact,
            "equivalent": self.equivalent,
            "cells": self.cells,
            "differing": len(self.differing),
            "differing_cells": [list(p) for p in self.differing],
            "negated": self.negated,
            "by_label": self.by_label,
            "row_signs": self.row_signs,
            "col_signs": self.col_signs,
            "row_perm": self.row_perm,
            "col_perm": self.col_perm,
            "notes": self.notes,
        }


def compare(derived: DesignMatrix, printed: DesignMatrix) -> Comparison:
    """Entrywise diff of ``printed`` against ``derived``.

    Cells are tallied per variable label of the derived entry as identical,
    negated or other.  When the matrices differ, three equivalences are
    tried: ``printed = D_r derived D_c`` with sign diagonals, a signed row
    permutation, and a signed column permutation.
    """
    if derived.shape != printed.shape:
        return Comparison(False, 0, [], 0, {}, [f"shape {printed.shape} != derived {derived.shape}"])
    x, p = _align(derived, printed)
    xs, ns, ps = _cell_strings(x), _cell_strings(-x), _cell_strings(p)
    R, C = x.shape
    differing, negated = [], 0
    by_label: dict[str, dict[str, int]] = {}
    printed_neg: dict[str, int] = {}
    for r in range(R):
        for c in range(C):
            lab = _label(xs[r][c])
            tally = by_label.setdefault(lab, {"identical": 0, "negated": 0, "other": 0})
            if ps[r][c].startswith("-"):
                printed_neg[lab] = printed_neg.get(lab, 0) + 1
            if ps[r][c] == xs[r][c]:
                tally["identical"] += 1
                continue
            differing.append((r, c))
            if ps[r][c] == ns[r][c]:
                tally["negated"] += 1
                negated += 1
            else:
                tally["other"] += 1
    cmp = Comparison(not differing, R * C, differing, negated, by_label)
    if cmp.exact:
        cmp.equivalent = True
        return cmp

    for lab, tally in sorted(by_label.items()):
        total = sum(tally.values())
        if lab in ("0",) or not total:
            continue
        parts = [f"{v} {k}" for k, v in tally.items() if v]
        note = f"{lab}-cells: " + ", ".join(parts)
        if printed_neg.get(lab, 0) == total and tally["negated"]:
            note += f"; every printed {lab}-cell carries a minus sign"
        cmp.notes.append(note)

    if negated == len(differing):
        r0 = next((r for r in range(R) if any(xs[r][c] != "0" for c in range(C))), None)
        if r0 is not None:
            col = [1] * C
            for c in range(C):
                if xs[r0][c] != "0" and ps[r0][c] != xs[r0][c]:
                    col[c] = -1
            row = [1] * R
            ok = True
            for r in range(R):
                c0 = next((c for c in range(C) if xs[r][c] != "0"), None)
                if c0 is None:
                    continue
                row[r] = col[c0] * (1 if ps[r][c0] == xs[r][c0] else -1)
                for c in range(C):
                    if xs[r][c] == "0":
                        continue
                    want = row[r] * col[c]
                    if (ps[r][c] == xs[r][c]) != (want == 1):
                        ok = False
                        break
                if not ok:
                    break
            if ok:
                cmp.row_signs, cmp.col_signs = row, col
                cmp.equivalent = True
                cmp.notes.append("printed = D_r * derived * D_c for sign diagonals D_r, D_c")

    if not cmp.equivalent:
        rows = [tuple(r) for r in xs]
        found = _signed_perm(rows, [tuple(r) for r in ns], [tuple(r) for r in ps])
        if found:
            cmp.row_perm, cmp.row_signs = found
            cmp.equivalent = True
            cmp.notes.append("printed row i = sign[i] * derived row perm[i]")
    if not cmp.equivalent:
        cols = [tuple(xs[r][c] for r in range(R)) for c in range(C)]
        ncols = [tuple(ns[r][c] for r in range(R)) for c in range(C)]
        pcols = [tuple(ps[r][c] for r in range(R)) for c in range(C)]
        found = _signed_perm(cols, ncols, pcols)
        if found:
            cmp.col_perm, cmp.col_signs = found
            cmp.equivalent = True
            cmp.notes.append("printed column j = sign[j] * derived column perm[j]")
    return cmp


# ---------------------------------------------------------------------------
# the corpus table
# ---------------------------------------------------------------------------

class _Context:
    """Lazily built constructions shared by the corpus entries."""

    def __init__(self, root: Path):
        self.root = root

    def base(self, name: str) -> DesignMatrix:
        return load(name, self.root).matrix

    @cached_property
    def od16(self) -> DoublingResult:
        return doubling(self.base("od2"), hadamard_catalog(2))

    @cached_property
    def cod16(self) -> DoublingResult:
        return doubling(self.base("cod2"), hadamard_catalog(2))

    @cached_property
    def qod16(self) -> DoublingResult:
        return doubling(self.base("qod2"), hadamard_catalog(2))

    @cached_property
    def bh36(self) -> DoublingResult:
        bh3 = self.base("bh3")
        return doubling(bh3, bh3)

    @cached_property
    def hgram16(self) -> DesignMatrix:
        d = self.qod16
        h = d.X4.submatrix(list(d.block_rows()[1]), None)
        return (h.H @ h).div_int(2)


def _vgram16(ctx: _Context) -> DesignMatrix:
    d = ctx.od16
    v = d.X4.submatrix(None, list(d.block_rows()[1]))
    return (v @ v.H).exact_div(d.sigma)


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    description: str
    derive: Callable[[_Context], DesignMatrix] | None = None
    expect: str | None = None
    design: bool = True


ENTRIES: tuple[CorpusEntry, ...] = (
    CorpusEntry("od2", "real base design", expect="OD(2;1,1) full"),
    CorpusEntry("cod2", "complex base design", expect="COD(2;1,1) full"),
    CorpusEntry("qod2", "quaternion base design", expect="QOD(2;1,1) full"),
    CorpusEntry("od16", "doubling of od2 with H2", lambda c: c.od16.X4, "OD(16;8,8) full"),
    CorpusEntry("cod16", "doubling of cod2 with H2", lambda c: c.cod16.X4, "COD(16;8,8) full"),
    CorpusEntry("qod16", "doubling of qod2 with H2", lambda c: c.qod16.X4, "QOD(16;8,8) full"),
    CorpusEntry("vgram16", "(1/sigma) V V^* for the od16 vertical frame", _vgram16, design=False),
    CorpusEntry("hgram16", "(1/2) H^* H for the qod16 horizontal frame", lambda c: c.hgram16, design=False),
    CorpusEntry(
        "qgram16", "hgram16 at a = b = 1", lambda c: c.hgram16.specialize({"a": 1, "b": 1}), design=False
    ),
    CorpusEntry("bh3", "Butson base matrix", expect="BH(3,3) full"),
    CorpusEntry("bh36", "doubling of bh3 with itself", lambda c: c.bh36.X4, "BH(36,6) full"),
    CorpusEntry("qod6", "order-6 quaternion base design", expect="QOD(6;1,5) full"),
    CorpusEntry("had16", "K of the unbiased pair for od16", lambda c: unbiased_pair(c.od16, "columns")[1], "H(16) full"),
    CorpusEntry("bh36k", "K of the unbiased pair for bh36", lambda c: unbiased_pair(c.bh36, "rows")[1], "BH(36,6) full"),
)


def _label_or_error(x: DesignMatrix) -> str:
    try:
        return certify(x).label()
    except CertificationError as exc:
        pos = f" at {exc.position}" if exc.position is not None else ""
        return f"{exc.code}{pos}"


@dataclass
class CorpusResult:
    name: str
    description: str
    checksum_ok: bool
    roundtrip_ok: bool
    status: str
    printed_certificate: str | None = None
    derived_certificate: str | None = None
    comparison: Comparison | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        """Integrity holds and the print agrees with the derivation (exactly or up to equivalence)."""
        return self.checksum_ok and self.roundtrip_ok and self.status in ("exact", "equivalent", "certified")

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "description": self.description,
            "checksum_ok": self.checksum_ok,
            "roundtrip_ok": self.roundtrip_ok,
            "status": self.status,
            "printed_certificate": self.printed_certificate,
            "derived_certificate": self.derived_certificate,
            "comparison": self.comparison.to_dict() if self.comparison else None,
            "error": self.error,
        }


def _check_one(entry: CorpusEntry, ctx: _Context, manifest: dict[str, str]) -> CorpusResult:
    path = ctx.root / f"{entry.name}.mat"
    raw = path.read_bytes()
    checksum_ok = manifest.get(path.name) == hashlib.sha256(raw).hexdigest()
    text = raw.decode("utf-8")
    try:
        mf = parse_matrix(text)
    except ParseError as exc:
        return CorpusResult(entry.name, entry.description, checksum_ok, False, "error", error=f"ParseError: {exc}")
    again = render_matrix(mf.matrix, mf.extra.get("class", mf.cls), mf.fmt, mf.log_base)
    roundtrip_ok = again == text and parse_matrix(again).matrix == mf.matrix
    res = CorpusResult(entry.name, entry.description, checksum_ok, roundtrip_ok, "unchecked")
    if entry.design:
        res.printed_certificate = _label_or_error(mf.matrix)
    try:
        if entry.derive is None:
            res.derived_certificate = res.printed_certificate
            res.status = "certified" if res.printed_certificate == entry.expect else "mismatch"
            return res
        derived = entry.derive(ctx)
        if entry.design:
            res.derived_certificate = _label_or_error(derived)
        cmp = compare(derived, mf.matrix)
        res.comparison = cmp
        if cmp.exact:
            res.status = "exact"
        elif cmp.equivalent:
            res.status = "equivalent"
        else:
            res.status = "mismatch"
            if entry.design and res.derived_certificate == entry.expect and res.printed_certificate != entry.expect:
                cmp.notes.append(
                    f"printed matrix fails certification ({res.printed_certificate}); signed permutations "
                    "preserve X X^* = sigma I, so no such equivalence to the derived design exists"
                )
    except Exception as exc:  # reported, not raised: the runner covers the whole corpus
        res.status = "error"
        res.error = f"{type(exc).__name__}: {exc}"
    return res


def check_corpus(root: str | os.PathLike | None = None, names: list[str] | None = None) -> list[CorpusResult]:
    """Run every corpus entry (or those in ``names``) in table order."""
    root = corpus_dir(root)
    manifest = load_manifest(root)
    ctx = _Context(root)
    todo = [e for e in ENTRIES if names is None or e.name in names]
    if names:
        unknown = set(names) - {e.name for e in ENTRIES}
        if unknown:
            raise KeyError(f"unknown corpus entries: {sorted(unknown)}")
    return [_check_one(e, ctx, manifest) for e in todo]
