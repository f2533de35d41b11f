from __future__ import annotations

import hashlib
import shutil

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from odlab import DesignMatrix, certify
from odlab.construct import doubling, hadamard_catalog
from odlab.corpus import ENTRIES, check_corpus, compare, corpus_dir, load, load_manifest

CORPUS = corpus_dir()


@pytest.fixture(scope="module")
def results():
    return {r.name: r for r in check_corpus()}


def test_manifest_covers_corpus():
    manifest = load_manifest(CORPUS)
    assert set(manifest) == {f"{e.name}.mat" for e in ENTRIES}
    for name, digest in manifest.items():
        assert hashlib.sha256((CORPUS / name).read_bytes()).hexdigest() == digest


def test_every_entry_is_intact(results):
    assert all(r.checksum_ok and r.roundtrip_ok for r in results.values())
    assert all(r.status != "error" for r in results.values())


@pytest.mark.parametrize("name", ["od2", "cod2", "qod2", "bh3", "qod6"])
def test_base_designs_certified(results, name):
    r = results[name]
    assert r.status == "certified"
    assert r.printed_certificate == next(e.expect for e in ENTRIES if e.name == name)


@pytest.mark.parametrize("name", ["cod16", "qod16", "bh36", "vgram16", "hgram16", "qgram16", "bh36k"])
def test_derived_entries_match_exactly(results, name):
    r = results[name]
    assert r.status == "exact" and r.comparison.exact and not r.comparison.differing


def test_od16_print_has_sign_error(results):
    r = results["od16"]
    assert r.status == "mismatch"
    assert r.derived_certificate == "OD(16;8,8) full"
    assert r.printed_certificate == "NOT_ORTHOGONAL at (0, 1)"
    cmp = r.comparison
    assert len(cmp.differing) == 80 and cmp.negated == 80
    assert cmp.by_label["y"]["negated"] == 80 and cmp.by_label["x"]["negated"] == 0
    assert any("every printed y-cell carries a minus sign" in n for n in cmp.notes)
    assert any("no such equivalence" in n for n in cmp.notes)


def test_had16_print_is_not_hadamard(results):
    r = results["had16"]
    assert r.status == "mismatch"
    assert r.derived_certificate == "H(16) full"
    assert r.printed_certificate.startswith("NOT_ORTHOGONAL")
    assert r.comparison.negated == 24 == len(r.comparison.differing)


def test_only_and_unknown_names():
    assert [r.name for r in check_corpus(names=["bh3"])] == ["bh3"]
    with pytest.raises(KeyError):
        check_corpus(names=["nonesuch"])


def test_load_and_env(monkeypatch, tmp_path):
    assert load("od2").cls == "OD"
    shutil.copytree(CORPUS, tmp_path / "c")
    monkeypatch.setenv("ODLAB_CORPUS", str(tmp_path / "c"))
    assert corpus_dir() == tmp_path / "c"


def test_corrupt_file_is_reported_not_raised(tmp_path):
    root = tmp_path / "c"
    shutil.copytree(CORPUS, root)
    (root / "od2.mat").write_text("garbage\n")
    (r,) = check_corpus(root, ["od2"])
    assert r.status == "error" and not r.checksum_ok and "ParseError" in r.error


# ---------------------------------------------------------------------------
# compare() on synthetic inputs
# ---------------------------------------------------------------------------

def _signs(draw_bits, n):
    return np.array([1 if b else -1 for b in draw_bits[:n]])


def _diag(signs):
    return DesignMatrix.from_int(np.diag(signs))


def _reconstruct(x, cmp):
    """Apply the equivalence reported by compare() to the derived matrix."""
    if cmp.row_perm is not None:
        return _diag(cmp.row_signs) @ x.submatrix(cmp.row_perm, None)
    if cmp.col_perm is not None:
        return x.submatrix(None, cmp.col_perm) @ _diag(cmp.col_signs)
    return _diag(cmp.row_signs) @ x @ _diag(cmp.col_signs)


@settings(max_examples=20, deadline=None)
@given(st.lists(st.booleans(), min_size=16, max_size=16), st.lists(st.booleans(), min_size=16, max_size=16))
def test_sign_diagonal_equivalence_is_found(rb, cb):
    x = doubling(load("cod2").matrix, hadamard_catalog(2)).X4
    printed = _diag(_signs(rb, 16)) @ x @ _diag(_signs(cb, 16))
    cmp = compare(x, printed)
    assert cmp.equivalent
    if not cmp.exact:
        assert _reconstruct(x, cmp) == printed
    # equivalence preserves the certificate
    assert certify(printed).label() == certify(x).label()


@settings(max_examples=20, deadline=None)
@given(st.permutations(range(16)))
def test_row_permutation_equivalence_is_found(perm):
    x = doubling(load("qod2").matrix, hadamard_catalog(2)).X4
    printed = x.submatrix(list(perm), None)
    cmp = compare(x, printed)
    assert cmp.equivalent
    if not cmp.exact:
        assert _reconstruct(x, cmp) == printed


def test_unrelated_matrices_are_not_equivalent():
    x = load("od2").matrix
    y = DesignMatrix.from_entries([[x.entry(0, 0), x.entry(0, 0)], [x.entry(1, 0), x.entry(1, 1)]], registry=x.registry)
    cmp = compare(x, y)
    assert not cmp.exact and not cmp.equivalent
    assert cmp.differing == [(0, 1)]
    assert compare(x, DesignMatrix.identity(3)).notes[0].startswith("shape")
