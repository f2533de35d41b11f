"""Text serialization of design matrices.

A matrix file is UTF-8 text::

    odlab-matrix 1
    class: OD
    shape: 2 2
    root-order: 4
    variables: x(real) y(real)
    format: terms
    data:
     x  y
    -y  x

Entries are whitespace separated.  With ``format: terms`` an entry follows ::

    entry  := 0 | [sign] term ((+|-) term)*
    term   := factor (* factor)*
    factor := INT | i | j | k | w[^INT] | NAME[^*][^INT]

where the factors of a term form an ordered quaternion product, ``w`` is
``zeta_L`` and ``NAME^*`` is the conjugate symbol.  With ``format: log m``
every entry is an integer ``t`` meaning ``zeta_m^t``.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .cycquat import CycCoeff, Monomial, QPolynomial, _root_table, mono_str
from .designmat import DesignMatrix, Var

__all__ = [
    "MatrixFile",
    "ParseError",
    "parse_matrix",
    "render_matrix",
    "render_entry",
    "read_matrix",
    "write_matrix",
    "log_matrix",
]

MAGIC = "odlab-matrix"
VERSION = 1
RESERVED = {"i", "j", "k", "w"}


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(f"line {line}, column {col}: {message}" if line else message)
        self.line = line
        self.col = col


@dataclass
class MatrixFile:
    matrix: DesignMatrix
    cls: str = "NONE"
    fmt: str = "terms"
    log_base: int | None = None
    extra: dict[str, str] = field(default_factory=dict)


# ---------------------------------------------------------------------------
# rendering
# ---------------------------------------------------------------------------

def _unit_token(t: int, L: int) -> tuple[int, str]:
    """Render ``zeta_L^t`` as ``(sign, token)``; token '' means 1."""
    t %= L
    if t == 0:
        return 1, ""
    if 2 * t == L:
        return -1, ""
    q = L // 4
    if t == q:
        return 1, "i"
    if t == 3 * q:
        return -1, "i"
    if t > L // 2:
        return -1, f"w^{t - L // 2}" if t - L // 2 != 1 else "w"
    return 1, f"w^{t}" if t != 1 else "w"


def _term_pieces(vec, mono: Monomial, jpart: bool, L: int) -> list[tuple[int, str]]:
    """Signed term strings for ``c * mono`` (times j when ``jpart``)."""
    vec = tuple(int(v) for v in vec)
    rt = _root_table(L).get(vec)
    slots = [rt] if rt is not None else [(c, t) for t, c in enumerate(vec) if c]
    ms = mono_str(mono)
    out = []
    for c, t in slots:
        sign, tok = _unit_token(t, L)
        if c < 0:
            sign = -sign
        factors = [str(abs(c))] if abs(c) != 1 else []
        if not jpart:
            factors += [f for f in (ms, tok) if f]
        elif tok == "i":
            # i*m*j = m*k
            factors += [f for f in (ms, "k") if f]
        else:
            factors += [f for f in (tok, ms, "j") if f]
        out.append((sign, "*".join(factors) or "1"))
    return out


def _join(pieces: list[tuple[int, str]]) -> str:
    if not pieces:
        return "0"
    s = ""
    for idx, (sign, body) in enumerate(pieces):
        if idx == 0:
            s += ("-" if sign < 0 else "") + body
        else:
            s += ("-" if sign < 0 else "+") + body
    return s


def render_entry(p: QPolynomial) -> str:
    L = p.order
    pieces = []
    for part, jpart in ((p.a, False), (p.b, True)):
        for m in sorted(part.terms):
            pieces += _term_pieces(part.terms[m].coeffs, m, jpart, L)
    return _join(pieces)


def _cell_strings(x: DesignMatrix) -> list[list[str]]:
    cells: list[list[list[tuple[int, str]]]] = [[[] for _ in range(x.cols)] for _ in range(x.rows)]
    L = x.order
    for part, jpart in ((x.a, False), (x.b, True)):
        for m in sorted(part):
            arr = part[m]
            for r, c in np.argwhere(arr.any(axis=-1)):
                cells[r][c] += _term_pieces(arr[r, c], m, jpart, L)
    return [[_join(cell) for cell in row] for row in cells]


def log_matrix(x: DesignMatrix, m: int) -> np.ndarray:
    """Exponents ``t`` with ``x[r, c] = zeta_m^t``; raises if impossible."""
    if not x.is_variable_free() or x.b:
        raise ValueError("log format needs a variable-free complex matrix")
    L = math.lcm(x.order, m)
    x = x.lift(L)
    arr = x.a.get(())
    if arr is None:
        raise ValueError("zero matrix has no logarithm")
    table = _root_table(L)
    step = L // m
    out = np.zeros(x.shape, dtype=np.int64)
    for r in range(x.rows):
        for c in range(x.cols):
            rt = table.get(tuple(int(v) for v in arr[r, c]))
            if rt is None:
                raise ValueError(f"entry ({r},{c}) is not a root of unity")
            sign, t = rt
            if sign < 0:
                t += L // 2
            t %= L
            if t % step:
                raise ValueError(f"entry ({r},{c}) is not an {m}-th root of unity")
            out[r, c] = t // step
    return out


def _align(rows: list[list[str]]) -> str:
    if not rows:
        return ""
    width = max(len(s) for row in rows for s in row)
    return "\n".join(" ".join(s.rjust(width) for s in row).rstrip() for row in rows) + "\n"


def render_matrix(x: DesignMatrix, cls: str = "NONE", fmt: str = "terms", log_base: int | None = None) -> str:
    head = [
        f"{MAGIC} {VERSION}",
        f"class: {cls}",
        f"shape: {x.rows} {x.cols}",
        f"root-order: {x.order if fmt == 'terms' else math.lcm(x.order, log_base or 1)}",
        "variables:" + "".join(f" {v.name}(real)" if v.real else f" {v.name}" for v in x.registry),
    ]
    if fmt == "log":
        if not log_base:
            raise ValueError("log format needs a base")
        logs = log_matrix(x, log_base)
        head.append(f"format: log {log_base}")
        body = _align([[str(int(t)) for t in row] for row in logs])
    else:
        head.append("format: terms")
        body = _align(_cell_strings(x))
    return "\n".join(head) + "\ndata:\n" + body


def write_matrix(path, x: DesignMatrix, cls: str = "NONE", fmt: str = "terms", log_base: int | None = None) -> None:
    Path(path).write_text(render_matrix(x, cls, fmt, log_base), encoding="utf-8")


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

_TOKEN = re.compile(
    r"(?P<int>\d+)"
    r"|(?P<w>w)(?:\^(?P<wexp>\d+))?(?![A-Za-z0-9_])"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*)(?P<star>\^\*)?(?:\^(?P<exp>\d+))?"
)


def _parse_term(text: str, L: int, real: frozenset[str], line: int, col: int):
    """Return ``(int_coeff, root_t, monomial_dict, jpart)`` for one term."""
    scale = 1
    t = 0
    mono: dict[str, list[int]] = {}
    in_j = False
    q = L // 4
    idx = 0
    n = len(text)
    expect_factor = True
    while idx < n:
        if not expect_factor:
            if text[idx] != "*":
                raise ParseError(f"expected '*' in {text!r}", line, col + idx)
            idx += 1
            expect_factor = True
            continue
        mt = _TOKEN.match(text, idx)
        if not mt or mt.end() == idx:
            raise ParseError(f"bad factor in {text!r}", line, col + idx)
        idx = mt.end()
        expect_factor = False
        if mt.group("int"):
            scale *= int(mt.group("int"))
            continue
        if mt.group("w"):
            e = int(mt.group("wexp")) if mt.group("wexp") else 1
            t += -e if in_j else e
            continue
        name = mt.group("name")
        if name == "i":
            t += -q if in_j else q
        elif name == "j":
            if in_j:
                scale = -scale
            in_j = not in_j
        elif name == "k":
            # k = i*j
            t += -q if in_j else q
            if in_j:
                scale = -scale
            in_j = not in_j
        else:
            star = bool(mt.group("star"))
            e = int(mt.group("exp")) if mt.group("exp") else 1
            if in_j:
                star = not star
            if name in real:
                star = False
            d = mono.setdefault(name, [0, 0])
            d[1 if star else 0] += e
    if expect_factor:
        raise ParseError(f"dangling '*' in {text!r}", line, col + n)
    return scale, t % L, mono, in_j


def _split_terms(entry: str, line: int, col: int) -> list[tuple[int, str, int]]:
    out = []
    i = 0
    sign = 1
    if entry[:1] in "+-":
        sign = -1 if entry[0] == "-" else 1
        i = 1
    start = i
    while i <= len(entry):
        if i == len(entry) or (entry[i] in "+-" and i > start):
            body = entry[start:i]
            if not body:
                raise ParseError(f"empty term in {entry!r}", line, col + i)
            out.append((sign, body, col + start))
            if i < len(entry):
                sign = -1 if entry[i] == "-" else 1
            start = i + 1
        i += 1
    return out


def parse_matrix(text: str) -> MatrixFile:
    lines = text.splitlines()
    if not lines or not lines[0].startswith(MAGIC):
        raise ParseError(f"missing '{MAGIC}' header", 1, 1)
    try:
        version = int(lines[0].split()[1])
    except (IndexError, ValueError):
        raise ParseError("bad version", 1, len(MAGIC) + 2) from None
    if version != VERSION:
        raise ParseError(f"unsupported version {version}", 1, len(MAGIC) + 2)
    header: dict[str, str] = {}
    where: dict[str, int] = {}
    data_at = None
    for ln, raw in enumerate(lines[1:], start=2):
        if raw.strip() == "data:":
            data_at = ln
            break
        if not raw.strip() or raw.lstrip().startswith("#"):
            continue
        if ":" not in raw:
            raise ParseError(f"expected 'key: value', got {raw!r}", ln, 1)
        key, val = raw.split(":", 1)
        header[key.strip()] = val.strip()
        where[key.strip()] = ln
    if data_at is None:
        raise ParseError("missing 'data:' section", len(lines), 1)
    for key in ("shape", "root-order", "format"):
        if key not in header:
            raise ParseError(f"missing header field {key!r}", data_at, 1)
    try:
        rows, cols = (int(v) for v in header["shape"].split())
    except ValueError:
        raise ParseError(f"bad shape {header['shape']!r}", where["shape"], 1) from None
    try:
        L = int(header["root-order"])
    except ValueError:
        raise ParseError(f"bad root order {header['root-order']!r}", where["root-order"], 1) from None
    registry = []
    for tok in header.get("variables", "").split():
        real = tok.endswith("(real)")
        name = tok[: -len("(real)")] if real else tok
        if name in RESERVED or not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", name):
            raise ParseError(f"bad variable name {name!r}", where["variables"], 1)
        registry.append(Var(name, real))
    realset = frozenset(v.name for v in registry if v.real)
    names = {v.name for v in registry}
    fmt_parts = header["format"].split()
    body = [(ln, raw) for ln, raw in enumerate(lines[data_at:], start=data_at + 1) if raw.strip()]
    if len(body) != rows:
        raise ParseError(f"expected {rows} data rows, found {len(body)}", data_at, 1)

    if fmt_parts[0] == "log":
        try:
            m = int(fmt_parts[1])
        except (IndexError, ValueError):
            raise ParseError(f"bad format {header['format']!r}", where["format"], 1) from None
        logs = []
        for ln, raw in body:
            vals = raw.split()
            if len(vals) != cols:
                raise ParseError(f"expected {cols} entries, found {len(vals)}", ln, 1)
            try:
                logs.append([int(v) for v in vals])
            except ValueError:
                bad = next(mt for mt in re.finditer(r"\S+", raw) if not re.fullmatch(r"-?\d+", mt.group()))
                raise ParseError(f"bad log entry {bad.group()!r}", ln, bad.start() + 1) from None
        x = DesignMatrix.from_log(logs, m, L)
        return MatrixFile(x, header.get("class", "NONE"), "log", m, header)
    if fmt_parts[0] != "terms":
        raise ParseError(f"unknown format {header['format']!r}", data_at - 1, 1)

    a: dict = {}
    b: dict = {}
    for r, (ln, raw) in enumerate(body):
        cells = [(mt.group(), mt.start() + 1) for mt in re.finditer(r"\S+", raw)]
        if len(cells) != cols:
            raise ParseError(f"expected {cols} entries, found {len(cells)}", ln, 1)
        for c, (entry, col) in enumerate(cells):
            if entry == "0":
                continue
            for sign, term, tcol in _split_terms(entry, ln, col):
                scale, t, mono, jpart = _parse_term(term, L, realset, ln, tcol)
                unknown = set(mono) - names
                if unknown:
                    raise ParseError(f"undeclared variable {sorted(unknown)[0]!r}", ln, tcol)
                key = tuple(sorted((n, d, ds) for n, (d, ds) in mono.items() if d or ds))
                part = b if jpart else a
                arr = part.get(key)
                if arr is None:
                    arr = part[key] = np.zeros((rows, cols, L), dtype=np.int64)
                arr[r, c, t] += sign * scale
    x = DesignMatrix((rows, cols), L, registry, a, b)
    return MatrixFile(x, header.get("class", "NONE"), "terms", None, header)


def read_matrix(path) -> MatrixFile:
    return parse_matrix(Path(path).read_text(encoding="utf-8"))
