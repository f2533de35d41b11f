"""Dense exact kernel for matrices over Z[zeta_L][x, x^*].

A complex polynomial matrix is a dict ``Monomial -> ndarray`` where each
array has shape ``(rows, cols, L)``; slot ``t`` of the last axis holds the
integer multiple of ``zeta^t``.  Products are cyclic convolutions in that axis
(arithmetic in Z[C_L], which maps homomorphically onto Z[zeta_L]) followed by
one reduction modulo Phi_L.

Integer kernels run in float64 whenever an a-priori bound keeps every partial
sum below 2**52 (so BLAS is exact), in int64 below 2**62, and otherwise in
Python integers (object arrays).
"""
from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .cycquat import Monomial, mono_conj, mono_fold, mono_mul, reduction_matrix

CMat = dict  # Monomial -> ndarray(rows, cols, L)

_F64_EXACT = 2**52
_I64_SAFE = 2**62


def maxabs(arr: np.ndarray) -> int:
    if arr.size == 0:
        return 0
    if arr.dtype == object:
        return max(abs(int(v)) for v in arr.flat)
    return int(np.abs(arr).max())


def reduce(arr: np.ndarray, order: int) -> np.ndarray:
    red = reduction_matrix(order)
    if arr.dtype != object:
        bound = maxabs(arr) * order * int(np.abs(red).max())
        if bound < _I64_SAFE:
            return arr @ red
        arr = arr.astype(object)
    return arr.dot(red.astype(object))


def clean(mat: CMat, order: int) -> CMat:
    """Reduce every array and drop the all-zero ones."""
    out = {}
    for m, arr in mat.items():
        arr = reduce(arr, order)
        if arr.any():
            arr.setflags(write=False)
            out[m] = arr
    return out


def conj_slots(arr: np.ndarray, order: int) -> np.ndarray:
    """Apply ``zeta -> zeta^-1`` to every coefficient vector (then reduce)."""
    perm = [(-t) % order for t in range(order)]
    out = np.zeros_like(arr)
    out[..., perm] = arr
    return reduce(out, order)


def cconj(mat: CMat, order: int, real=frozenset()) -> CMat:
    """Entrywise complex conjugate (no transpose)."""
    out: CMat = {}
    for m, arr in mat.items():
        k = mono_fold(mono_conj(m), real)
        c = conj_slots(arr, order)
        out[k] = out[k] + c if k in out else c
    return out


def add(p: CMat, q: CMat, sign: int = 1) -> CMat:
    out = dict(p)
    for m, arr in q.items():
        if m in out:
            out[m] = out[m] + sign * arr
        else:
            out[m] = sign * arr
    return out


def neg(p: CMat) -> CMat:
    return {m: -arr for m, arr in p.items()}


def _nonzero_slots(arr: np.ndarray) -> list[int]:
    flat = arr.reshape(-1, arr.shape[-1])
    return [int(t) for t in np.flatnonzero(flat.any(axis=0))]


def _mm(a: np.ndarray, b: np.ndarray, mode: str) -> np.ndarray:
    if mode == "float":
        return np.rint(a.astype(np.float64) @ b.astype(np.float64)).astype(np.int64)
    return a @ b


def product(
    p: CMat,
    q: CMat,
    kind: str,
    order: int,
    real=frozenset(),
) -> CMat:
    """Bilinear product of two complex polynomial matrices.

    ``kind`` is ``"matmul"``, ``"kron"`` or ``"hadamard"`` (entrywise).
    The result is reduced and free of zero arrays.
    """
    if not p or not q:
        return {}
    any_arr_p = next(iter(p.values()))
    any_arr_q = next(iter(q.values()))
    if kind == "matmul":
        inner = any_arr_p.shape[1]
        shape = (any_arr_p.shape[0], any_arr_q.shape[1])
    elif kind == "kron":
        inner = 1
        shape = (any_arr_p.shape[0] * any_arr_q.shape[0], any_arr_p.shape[1] * any_arr_q.shape[1])
    elif kind == "hadamard":
        inner = 1
        shape = any_arr_p.shape[:2]
    else:
        raise ValueError(kind)

    slots_p = {m: _nonzero_slots(a) for m, a in p.items()}
    slots_q = {m: _nonzero_slots(a) for m, a in q.items()}
    bound = (
        sum(maxabs(a) * len(slots_p[m]) for m, a in p.items())
        * sum(maxabs(a) * len(slots_q[m]) for m, a in q.items())
        * max(inner, 1)
    )
    if bound < _F64_EXACT:
        dtype, mode = np.int64, "float"
    elif bound < _I64_SAFE:
        dtype, mode = np.int64, "int"
    else:
        dtype, mode = object, "object"

    op: Callable[[np.ndarray, np.ndarray], np.ndarray]
    if kind == "matmul":
        op = lambda a, b: _mm(a, b, mode)  # noqa: E731
    elif kind == "kron":
        op = np.kron
    else:
        op = np.multiply

    out: CMat = {}
    for m1, a in p.items():
        if dtype is object:
            a = a.astype(object)
        for m2, b in q.items():
            if dtype is object:
                b = b.astype(object)
            m = mono_fold(mono_mul(m1, m2), real)
            acc = out.get(m)
            if acc is None:
                acc = out[m] = np.zeros(shape + (order,), dtype=dtype)
                if dtype is object:
                    acc[...] = 0
            for s in slots_p[m1]:
                for t in slots_q[m2]:
                    acc[..., (s + t) % order] += op(a[..., s], b[..., t])
    return clean(out, order)


def lift(mat: CMat, old: int, new: int) -> CMat:
    if old == new:
        return mat
    if new % old:
        raise ValueError(f"cannot lift root order {old} to {new}")
    step = new // old
    out = {}
    for m, arr in mat.items():
        big = np.zeros(arr.shape[:-1] + (new,), dtype=arr.dtype)
        if arr.dtype == object:
            big[...] = 0
        big[..., ::step] = arr
        out[m] = big
    return clean(out, new)


def fold(mat: CMat, real) -> CMat:
    if not real:
        return mat
    out: CMat = {}
    for m, arr in mat.items():
        k = mono_fold(m, real)
        out[k] = out[k] + arr if k in out else arr
    return out


def common_order(*orders: int) -> int:
    return math.lcm(*orders)


def transpose(mat: CMat) -> CMat:
    return {m: arr.transpose(1, 0, 2) for m, arr in mat.items()}


def map_arrays(mat: CMat, fn) -> CMat:
    return {m: fn(arr) for m, arr in mat.items()}


def keys_sorted(mat: CMat) -> list[Monomial]:
    return sorted(mat)
