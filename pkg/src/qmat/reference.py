"""Plain numpy semantics for every matrix operation, used as test oracles.

All functions take and return ``I x J`` float arrays in ``read_matrix`` units
(entries of the loaded, normalized matrix) and never touch a state vector.
"""
from __future__ import annotations

import math

import numpy as np

from .arith import Selector


def reverse(m: np.ndarray, sel: Selector = Selector()) -> np.ndarray:
    out = np.array(m, dtype=float)
    if sel.kind == "whole":
        return out[::-1, ::-1].copy()
    if sel.kind == "row":
        out[sel.row] = out[sel.row, ::-1]
    elif sel.kind == "col":
        out[:, sel.col] = out[::-1, sel.col]
    else:
        raise ValueError("reverse has no entry form")
    return out


def swap_columns(m: np.ndarray, i: int, j: int, row: int | None = None) -> np.ndarray:
    out = np.array(m, dtype=float)
    rows = slice(None) if row is None else row
    a = out[rows, i].copy()
    out[rows, i] = out[rows, j]
    out[rows, j] = a
    return out


def cyclic_shift(m: np.ndarray, direction: str, sel: Selector = Selector()) -> np.ndarray:
    step = -1 if direction == "left" else 1
    out = np.array(m, dtype=float)
    if sel.kind == "whole":
        return np.roll(out, step, axis=1)
    if sel.kind == "row":
        out[sel.row] = np.roll(out[sel.row], step)
    else:
        out[:, sel.col] = np.roll(out[:, sel.col], step)
    return out


def pairwise_sum_diff(m: np.ndarray, axis: str = "rows") -> np.ndarray:
    a = np.array(m, dtype=float)
    if axis == "cols":
        return pairwise_sum_diff(a.T).T
    out = np.empty_like(a)
    out[0::2] = (a[0::2] + a[1::2]) / math.sqrt(2)
    out[1::2] = (a[0::2] - a[1::2]) / math.sqrt(2)
    return out


def walsh_matrix(n: int) -> np.ndarray:
    """Normalized Walsh-Hadamard matrix of size ``2**n`` in natural order."""
    idx = np.arange(1 << n)
    parity = np.vectorize(lambda v: bin(v).count("1") & 1)(idx[:, None] & idx[None, :])
    return (1.0 - 2.0 * parity) / math.sqrt(1 << n)


def reduce_rows(m: np.ndarray) -> np.ndarray:
    a = np.array(m, dtype=float)
    return a @ walsh_matrix(a.shape[1].bit_length() - 1)


def reduce_cols(m: np.ndarray) -> np.ndarray:
    a = np.array(m, dtype=float)
    return walsh_matrix(a.shape[0].bit_length() - 1) @ a


def scale(m: np.ndarray, alpha: float, sel: Selector = Selector()) -> np.ndarray:
    out = np.array(m, dtype=float)
    if sel.kind == "whole":
        return out * alpha
    if sel.kind == "row":
        out[sel.row] *= alpha
    elif sel.kind == "col":
        out[:, sel.col] *= alpha
    else:
        out[sel.row, sel.col] *= alpha
    return out


def multiply(f: np.ndarray, g: np.ndarray, n_rows: int = 1) -> np.ndarray:
    prod = np.asarray(f, dtype=float) * np.asarray(g, dtype=float)
    return np.tile(prod, (n_rows, 1))


def scalar_product(f: np.ndarray, g: np.ndarray) -> float:
    f = np.asarray(f, dtype=float)
    return float(np.dot(f, g) / math.sqrt(f.size))


def pivot_swap(values, pos: int) -> np.ndarray:
    out = np.array(values, dtype=float)
    out[[pos, -1]] = out[[-1, pos]]
    return out
