"""Numeric frame analysis: tightness, equiangularity, the Co_1/Co_2 lifting
test and absolute-bound reporting."""
from __future__ import annotations

import cmath
import math
import random as _random
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .cycquat import QArray, UNIT_TOL
from .designmat import DesignMatrix
from .split import classify_split

__all__ = [
    "Assignment",
    "FrameReport",
    "DGSReport",
    "frame_from_split",
    "analyze_frame",
    "co_split",
    "complex_embed",
    "dgs_report",
    "TIGHT_TOL",
]

TIGHT_TOL = 1e-9


@dataclass(frozen=True)
class Assignment:
    """Values for the variables of a design; unit modulus by default."""

    values: Mapping[str, complex]
    enforce_unit: bool = True

    def __post_init__(self) -> None:
        vals = {k: complex(v) for k, v in self.values.items()}
        object.__setattr__(self, "values", vals)
        if self.enforce_unit:
            for k, v in vals.items():
                if abs(abs(v) - 1.0) > UNIT_TOL:
                    raise ValueError(f"variable {k!r} = {v} is not of unit modulus")

    @classmethod
    def ones(cls, x: DesignMatrix) -> Assignment:
        return cls({v.name: 1.0 for v in x.registry})

    @classmethod
    def random(cls, x: DesignMatrix, rng: _random.Random | int | None = None) -> Assignment:
        """Random unit values: +-1 for real variables, e^{i theta} otherwise."""
        if not isinstance(rng, _random.Random):
            rng = _random.Random(rng)
        vals = {}
        for v in x.registry:
            if v.real:
                vals[v.name] = rng.choice((1.0, -1.0))
            else:
                vals[v.name] = cmath.exp(2j * math.pi * rng.random())
        return cls(vals)

    @classmethod
    def parse(cls, text: str) -> Assignment:
        """``"a=1,b=-1,x=0.6+0.8j"``."""
        vals = {}
        for part in filter(None, (p.strip() for p in text.split(","))):
            name, _, val = part.partition("=")
            vals[name.strip()] = complex(val.strip().replace("i", "j")) if val.strip() else 1.0
        return cls(vals)


@dataclass
class FrameReport:
    d: int
    N: int
    frame_constant: float
    tight: bool
    tight_residual: float
    equiangular: bool
    angle: float
    equiangular_deviation: float
    co1_sum: float
    co2_sum: float
    co_scale: float
    complex_liftable: bool
    gram: QArray | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items() if k != "gram"}


def _as_qarray(v) -> QArray:
    return v if isinstance(v, QArray) else QArray(np.asarray(v, dtype=complex))


def frame_from_split(
    x: DesignMatrix,
    rows: Sequence[int],
    asn: Assignment,
    *,
    check: bool = True,
    sigma=None,
) -> QArray:
    """Columns of ``x[rows, :]`` evaluated at ``asn``.

    With ``check`` the split must be faithful with ``|alpha| = |beta|``.
    """
    if check:
        rep = classify_split(x, rows, sigma)
        if not rep.faithful:
            raise ValueError(f"split is {rep.category}, not faithful")
        if not rep.abs_equal:
            raise ValueError("split constants have |alpha| != |beta|")
    return x.submatrix(list(rows), None).evaluate(asn.values, enforce_unit=asn.enforce_unit)


def analyze_frame(v, *, co_scale: float | None = None, tol: float = TIGHT_TOL) -> FrameReport:
    """Frame statistics for the columns of ``v`` (a d x N quaternion array).

    The Co sums are taken over the Gram divided by ``co_scale``; by default
    that is the common off-diagonal magnitude of an equiangular frame (and 1
    otherwise), so they read off the normalized Gram.  Whether the two sums
    agree does not depend on the scale.
    """
    v = _as_qarray(v)
    d, N = v.shape
    norms2 = (np.abs(v.z) ** 2 + np.abs(v.w) ** 2).sum(axis=0)
    if (norms2 <= 0).any():
        raise ValueError(f"column {int(np.flatnonzero(norms2 <= 0)[0])} is zero")
    A = float(norms2.sum() / d)
    gram = v.H @ v
    P = gram * (1.0 / A)
    resid = float((P @ P - P).abs().max())
    absg = gram.abs()
    off = ~np.eye(N, dtype=bool)
    if N > 1:
        cos = absg[off] / np.sqrt(np.outer(norms2, norms2))[off]
        angle = float(cos.mean())
        dev = float(cos.max() - cos.min())
        mags = absg[off]
    else:
        angle = dev = 0.0
        mags = np.zeros(0)
    equi = dev <= tol if N > 1 else True
    if co_scale is None:
        co_scale = float(mags.mean()) if equi and len(mags) and mags.mean() > tol else 1.0
    z = gram.z / co_scale
    w = gram.w / co_scale
    co1 = float((np.abs(z) ** 2).sum())
    co2 = float((np.abs(w) ** 2).sum())
    liftable = abs(co1 - co2) <= 1e-6 * max(1.0, co1, co2)
    return FrameReport(d, N, A, resid <= tol, resid, equi, angle, dev, co1, co2, co_scale, liftable, gram)


def co_split(q) -> tuple[complex, complex]:
    """``(Co_1(q), Co_2(q)) = (z, conj(w))`` for ``q = z + w j``."""
    if isinstance(q, QArray):
        return q.z, np.conj(q.w)
    z, w = q
    return complex(z), complex(w).conjugate()


def complex_embed(v) -> np.ndarray:
    """Stack ``z`` over ``conj(w)``: a d x N quaternion array becomes 2d x N."""
    v = _as_qarray(v)
    return np.concatenate([v.z, np.conj(v.w)], axis=0)


@dataclass(frozen=True)
class DGSReport:
    d: int
    N: int
    field: str
    bound: int
    meets: bool
    violates: bool
    note: str = (
        "absolute bound for equiangular lines: d(d+1)/2 (real), d^2 (complex), "
        "d(2d-1) (quaternion); standard formula supplied externally"
    )


def dgs_report(d: int, N: int, field: str) -> DGSReport:
    if d < 1 or N < 1:
        raise ValueError("d and N must be positive")
    bounds = {"real": d * (d + 1) // 2, "complex": d * d, "quaternion": d * (2 * d - 1)}
    try:
        bound = bounds[field]
    except KeyError:
        raise ValueError(f"field must be one of {sorted(bounds)}") from None
    return DGSReport(d, N, field, bound, N == bound, N > bound)
