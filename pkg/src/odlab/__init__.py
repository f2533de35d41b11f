"""Exact construction and verification of orthogonal designs over the reals,
complexes and quaternions."""
from __future__ import annotations

from .cycquat import CPolynomial, CycCoeff, QArray, QPolynomial, cyc_reduce, qconj, qeval, qmul
from .designmat import (
    CertificationError,
    DesignCertificate,
    DesignMatrix,
    Var,
    butson_check,
    certify,
    circ_blocks,
    ctranspose,
    dsum,
    is_amicable,
    kron,
    matmul,
)

__version__ = "0.1.0"
