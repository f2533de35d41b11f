"""``odlab`` command-line front end.

Text output is aligned tables; ``--format json`` emits one JSON document per
invocation carrying ``"schema": "odlab/1"``.  Failures exit nonzero with an
``error`` object (code, message and position where known).
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

from .construct import (
    DoublingResult,
    doubling,
    hadamard_catalog,
    unbiased_pair,
    x_family,
    y_family,
)
from .corpus import check_corpus, corpus_dir, load
from .designmat import CertificationError, DesignCertificate, DesignMatrix, DivisionError, certify
from .frames import Assignment, analyze_frame, dgs_report, frame_from_split
from .matfile import MatrixFile, ParseError, read_matrix, render_matrix
from .split import classify_canonical, classify_split

SCHEMA = "odlab/1"

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_INPUT = 2

_FIELD = {"OD": "real", "HADAMARD": "real", "WEIGHING": "real", "COD": "complex", "BUTSON": "complex"}


class CliError(Exception):
    def __init__(self, code: str, message: str, status: int = EXIT_FAIL, **where):
        super().__init__(message)
        self.code = code
        self.status = status
        self.where = where


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def _read(path: str) -> MatrixFile:
    try:
        return read_matrix(path)
    except FileNotFoundError:
        raise CliError("FILE_NOT_FOUND", f"no such file: {path}", EXIT_INPUT) from None
    except ParseError as exc:
        raise CliError("PARSE_ERROR", str(exc), EXIT_INPUT, line=exc.line, column=exc.col) from None


def _certify(x: DesignMatrix) -> DesignCertificate:
    try:
        return certify(x)
    except CertificationError as exc:
        pos = list(exc.position) if exc.position is not None else None
        raise CliError(exc.code, str(exc), position=pos) from None


def _matrix_source(source: str) -> DesignMatrix:
    """A corpus name (``od2``, ``bh3``, ...) or a path to a matrix file."""
    if Path(source).exists():
        return _read(source).matrix
    try:
        return load(source).matrix
    except FileNotFoundError:
        raise CliError("FILE_NOT_FOUND", f"{source!r} is neither a file nor a corpus entry", EXIT_INPUT) from None


def _hadamard_source(source: str | None, n: int) -> DesignMatrix:
    if source is None:
        source = str(n)
    if source.isdigit():
        try:
            return hadamard_catalog(int(source))
        except ValueError as exc:
            raise CliError("NO_HADAMARD", str(exc)) from None
    return _matrix_source(source)


def _render(x: DesignMatrix, cert: DesignCertificate) -> str:
    if cert.cls == "BUTSON" and cert.butson_m and cert.butson_m > 2:
        return render_matrix(x, cert.cls, "log", cert.butson_m)
    return render_matrix(x, cert.cls)


def _parse_rows(text: str, limit: int) -> list[int]:
    rows: list[int] = []
    for part in filter(None, (p.strip() for p in text.split(","))):
        lo, sep, hi = part.partition("-")
        try:
            rows.extend(range(int(lo), int(hi) + 1) if sep else [int(lo)])
        except ValueError:
            raise CliError("BAD_ROWS", f"cannot parse row list {text!r}", EXIT_INPUT) from None
    if not rows or any(r < 0 or r >= limit for r in rows) or len(set(rows)) != len(rows):
        raise CliError("BAD_ROWS", f"row list {text!r} must name distinct rows in 0..{limit - 1}", EXIT_INPUT)
    return rows


def _doubling_view(x: DesignMatrix) -> DoublingResult:
    # certify first so a non-design reports its failing cell
    if x.is_square():
        _certify(x)
    try:
        return DoublingResult.from_matrix(x)
    except ValueError as exc:
        raise CliError("NOT_DOUBLING_LAYOUT", str(exc)) from None


def _table(rows: list[list[str]], head: list[str]) -> str:
    cells = [head] + rows
    widths = [max(len(r[i]) for r in cells) for i in range(len(head))]
    fmt = lambda r: "  ".join(s.ljust(w) for s, w in zip(r, widths)).rstrip()  # noqa: E731
    return "\n".join([fmt(head), fmt(["-" * w for w in widths])] + [fmt(r) for r in rows])


def _write_outputs(out: str | None, files: dict[str, str]) -> list[str]:
    if out is None:
        return []
    written = []
    for suffix, text in files.items():
        path = Path(out + suffix)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
        written.append(str(path))
    return written


def _cert_json(cert: DesignCertificate) -> str:
    return json.dumps({"schema": SCHEMA, "certificate": cert.to_dict()}, indent=2, sort_keys=True) + "\n"


def _strip_mat(out: str | None) -> str | None:
    return out[:-4] if out and out.endswith(".mat") else out


# ---------------------------------------------------------------------------
# commands: each returns (json payload, text rendering)
# ---------------------------------------------------------------------------

def cmd_construct(args) -> tuple[dict, str]:
    fam = args.family
    if fam == "unbiased":
        return _unbiased(args.input, args.mode, args.out)
    try:
        if fam == "xfam":
            x = x_family(args.q, args.m)
        elif fam == "yfam":
            x = y_family(args.q, args.m)
        elif fam == "catalog":
            x = hadamard_catalog(args.n)
        else:
            base = _matrix_source(args.base)
            x = doubling(base, _hadamard_source(args.hadamard, base.rows)).X4
    except CertificationError as exc:
        raise CliError(exc.code, str(exc)) from None
    except (ValueError, DivisionError) as exc:
        raise CliError("CONSTRUCTION_FAILED", str(exc)) from None
    cert = _certify(x)
    text = _render(x, cert)
    stem = _strip_mat(args.out)
    written = _write_outputs(stem, {".mat": text, ".cert.json": _cert_json(cert)})
    payload = {"certificate": cert.to_dict(), "files": written}
    if not written:
        payload["matrix"] = text
    human = (text if not written else "") + cert.label()
    if written:
        human += "\n" + "\n".join(f"wrote {p}" for p in written)
    return payload, human


def _unbiased(path: str, mode: str, out: str | None) -> tuple[dict, str]:
    x = _read(path).matrix
    d = _doubling_view(x)
    if mode == "auto":
        mode = "rows" if x.is_variable_free() else "columns"
    try:
        Y, K = unbiased_pair(d, mode)
    except DivisionError as exc:
        raise CliError("DIVISION_FAILS", str(exc)) from None
    cert_k = _certify(K)
    ytext = render_matrix(Y, "NONE")
    ktext = _render(K, cert_k)
    stem = _strip_mat(out)
    written = _write_outputs(stem, {".Y.mat": ytext, ".K.mat": ktext, ".K.cert.json": _cert_json(cert_k)})
    payload = {"mode": mode, "certificate": cert_k.to_dict(), "files": written}
    if not written:
        payload["Y"] = ytext
        payload["K"] = ktext
    human = f"mode: {mode}\nK: {cert_k.label()}"
    if written:
        human += "\n" + "\n".join(f"wrote {p}" for p in written)
    else:
        human = ktext + human
    return payload, human


def cmd_unbiased(args) -> tuple[dict, str]:
    return _unbiased(args.input, args.mode, args.out)


def cmd_verify(args) -> tuple[dict, str]:
    mf = _read(args.file)
    cert = _certify(mf.matrix)
    return {"file": args.file, "certificate": cert.to_dict()}, cert.label()


def _split_rows(rep) -> list[str]:
    d = rep.to_dict()
    return [d["category"], str(d["m"]), d["alpha"] or "-", d["beta"] or "-", str(d["abs_equal"])]


def cmd_split(args) -> tuple[dict, str]:
    x = _read(args.file).matrix
    head = ["split", "category", "m", "alpha", "beta", "|alpha|=|beta|"]
    if args.canonical:
        d = _doubling_view(x)
        reps = classify_canonical(d)
        payload = {"file": args.file, "splits": {k: [r.to_dict() for r in v] for k, v in reps.items()}}
        rows = [[f"{k}[{i}]"] + _split_rows(r) for k, v in reps.items() for i, r in enumerate(v)]
        return payload, _table(rows, head)
    rows_sel = _parse_rows(args.rows, x.rows)
    rep = classify_split(x, rows_sel)
    return {"file": args.file, "split": rep.to_dict()}, _table([["rows"] + _split_rows(rep)], head)


def cmd_etf(args) -> tuple[dict, str]:
    mf = _read(args.file)
    x = mf.matrix
    sel = args.rows
    sigma = None
    if sel in ("horizontal", "vertical"):
        d = _doubling_view(x)
        sigma = d.sigma
        rows = list(d.block_rows()[1])
        if sel == "vertical":
            x = x.H
    else:
        rows = _parse_rows(sel, x.rows)
    if args.seed is not None:
        asn = Assignment.random(x, args.seed)
    elif args.assign:
        try:
            asn = Assignment.parse(args.assign)
        except ValueError as exc:
            raise CliError("BAD_ASSIGNMENT", str(exc), EXIT_INPUT) from None
    else:
        asn = Assignment.ones(x)
    try:
        v = frame_from_split(x, rows, asn, check=not args.no_check, sigma=sigma)
    except KeyError as exc:
        raise CliError("BAD_ASSIGNMENT", f"no value for variable {exc.args[0]!r}", EXIT_INPUT) from None
    except ValueError as exc:
        raise CliError("NOT_FAITHFUL", str(exc)) from None
    rep = analyze_frame(v)
    cls = mf.extra.get("class", mf.cls)
    field = _FIELD.get(cls, "quaternion")
    dgs = dgs_report(rep.d, rep.N, field)
    payload = {
        "file": args.file,
        "rows": rows,
        "assignment": {k: [v.real, v.imag] for k, v in sorted(asn.values.items())},
        "frame": rep.to_dict(),
        "dgs": dgs.__dict__,
    }
    lines = [
        ("d x N", f"{rep.d} x {rep.N}"),
        ("frame constant", f"{rep.frame_constant:.6g}"),
        ("tight", f"{rep.tight} (residual {rep.tight_residual:.2e})"),
        ("equiangular", f"{rep.equiangular} (angle {rep.angle:.6g}, deviation {rep.equiangular_deviation:.2e})"),
        ("co1 sum", f"{rep.co1_sum:.6f}"),
        ("co2 sum", f"{rep.co2_sum:.6f}"),
        ("co scale", f"{rep.co_scale:.6g}"),
        ("complex liftable", str(rep.complex_liftable)),
        (f"DGS bound ({field})", f"{dgs.bound} (meets: {dgs.meets}, violates: {dgs.violates}; external formula)"),
    ]
    width = max(len(k) for k, _ in lines)
    return payload, "\n".join(f"{k.ljust(width)}  {v}" for k, v in lines)


def cmd_corpus_check(args) -> tuple[dict, str]:
    root = corpus_dir(args.dir)
    try:
        results = check_corpus(root, args.only or None)
    except FileNotFoundError as exc:
        raise CliError("FILE_NOT_FOUND", str(exc), EXIT_INPUT) from None
    except KeyError as exc:
        raise CliError("UNKNOWN_ENTRY", str(exc.args[0]), EXIT_INPUT) from None
    payload = {"corpus": str(root), "results": [r.to_dict() for r in results]}
    rows = []
    for r in results:
        cmp = r.comparison
        diff = "-" if cmp is None else f"{len(cmp.differing)}/{cmp.cells}"
        rows.append([
            r.name,
            "ok" if r.checksum_ok else "BAD",
            "ok" if r.roundtrip_ok else "BAD",
            r.status,
            diff,
            r.printed_certificate or "-",
            r.derived_certificate or "-",
        ])
    text = _table(rows, ["entry", "sha256", "roundtrip", "status", "diff", "printed", "derived"])
    details = []
    for r in results:
        if r.error:
            details.append(f"{r.name}: {r.error}")
        if r.comparison and not r.comparison.exact:
            for note in r.comparison.notes:
                details.append(f"{r.name}: {note}")
            cells = ", ".join(f"({a},{b})" for a, b in r.comparison.differing[:40])
            more = "" if len(r.comparison.differing) <= 40 else ", ..."
            details.append(f"{r.name}: differing cells {cells}{more}")
    if details:
        text += "\n\n" + "\n".join(details)
    payload["ok"] = all(r.checksum_ok and r.roundtrip_ok and r.status != "error" for r in results)
    if not payload["ok"]:
        raise _Partial(payload, text)
    return payload, text


class _Partial(Exception):
    """A command that produced a full report but must exit nonzero."""

    def __init__(self, payload: dict, text: str):
        super().__init__("corpus integrity failure")
        self.payload = payload
        self.text = text


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentParser(add_help=False)
    fmt.add_argument("--format", choices=("text", "json"), default=argparse.SUPPRESS, help="output format")

    p = argparse.ArgumentParser(prog="odlab", description="Quaternion orthogonal designs and their frames.")
    p.add_argument("--format", choices=("text", "json"), default="text", help="output format (default text)")
    sub = p.add_subparsers(dest="command", required=True)

    con = sub.add_parser("construct", parents=[fmt], help="build a design and certify it")
    fam = con.add_subparsers(dest="family", required=True)
    for name, helptext in (("xfam", "real family from a Paley core"), ("yfam", "complex family from a Paley core")):
        f = fam.add_parser(name, parents=[fmt], help=helptext)
        f.add_argument("--q", type=int, required=True, help="prime q = 3 (mod 4) for xfam, 1 (mod 4) for yfam")
        f.add_argument("--m", type=int, required=True, help="number of conference blocks (0 or 1)")
        f.add_argument("--out", help="output path (matrix at OUT, certificate at OUT.cert.json)")
    f = fam.add_parser("doubling", parents=[fmt], help="doubling of a full design with a Hadamard matrix")
    f.add_argument("--base", required=True, help="corpus name (od2, cod2, qod2, bh3, qod6) or matrix file")
    f.add_argument("--hadamard", help="catalog order or matrix file (default: catalog of the base order)")
    f.add_argument("--out")
    f = fam.add_parser("unbiased", parents=[fmt], help="unbiased companion Y and product K")
    f.add_argument("--input", required=True)
    f.add_argument("--mode", choices=("auto", "columns", "rows"), default="auto")
    f.add_argument("--out", help="output prefix (writes OUT.Y.mat, OUT.K.mat, OUT.K.cert.json)")
    f = fam.add_parser("catalog", parents=[fmt], help="catalog Hadamard matrix")
    f.add_argument("--n", type=int, required=True)
    f.add_argument("--out")
    con.set_defaults(func=cmd_construct)

    v = sub.add_parser("verify", parents=[fmt], help="certify a matrix file")
    v.add_argument("file")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("split", parents=[fmt], help="classify a row split")
    s.add_argument("file")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--rows", help="comma separated rows or ranges, 0-based (e.g. 0,1,2 or 4-9)")
    g.add_argument("--canonical", action="store_true", help="the horizontal and vertical splits of a doubled design")
    s.set_defaults(func=cmd_split)

    e = sub.add_parser("etf", parents=[fmt], help="frame statistics of a split")
    e.add_argument("file")
    e.add_argument("--rows", required=True, help="horizontal, vertical, or a row list")
    e.add_argument("--assign", help="variable values, e.g. a=1,b=-1 (default: all ones)")
    e.add_argument("--seed", type=int, help="random unit assignment from this seed")
    e.add_argument("--no-check", action="store_true", help="skip the faithful-split precondition")
    e.set_defaults(func=cmd_etf)

    u = sub.add_parser("unbiased", parents=[fmt], help="same as 'construct unbiased'")
    u.add_argument("input")
    u.add_argument("--mode", choices=("auto", "columns", "rows"), default="auto")
    u.add_argument("--out")
    u.set_defaults(func=cmd_unbiased)

    c = sub.add_parser("corpus-check", parents=[fmt], help="re-derive and diff the shipped corpus")
    c.add_argument("--dir", help="corpus directory (default: $ODLAB_CORPUS or the packaged corpus)")
    c.add_argument("--only", nargs="*", help="restrict to these entries")
    c.set_defaults(func=cmd_corpus_check)
    return p


def _emit(fmt: str, payload: dict, text: str, stream) -> None:
    if fmt == "json":
        stream.write(json.dumps({"schema": SCHEMA, **payload}, indent=2, sort_keys=True) + "\n")
    else:
        stream.write(text.rstrip("\n") + "\n")


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    fmt = args.format
    try:
        payload, text = args.func(args)
    except _Partial as part:
        _emit(fmt, part.payload, part.text, sys.stdout)
        return EXIT_FAIL
    except CliError as err:
        body = {"code": err.code, "message": str(err), **err.where}
        if fmt == "json":
            _emit(fmt, {"error": body}, "", sys.stdout)
        else:
            loc = "".join(f" {k}={v}" for k, v in err.where.items() if v is not None)
            sys.stderr.write(f"error: {err.code}: {err}{loc}\n")
        return err.status
    _emit(fmt, payload, text, sys.stdout)
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
