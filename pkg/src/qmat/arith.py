"""Arithmetic on quantum matrices.

Each operation exists twice: a ``*_circuit`` builder that returns the gate
list, and a function of ``(state, layout, ...)`` that applies it in place and
records any amplitude rescaling in the state's normalization ledger.  The gate
alphabet is X, H and RY with arbitrary controls; rows or columns are selected
by masking their address to all ones and then controlling on that register.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DimensionError, RangeError
from .matrix import MaskPlan, RegisterLayout, embed_angle, init_uniform
from .sim import Circuit, GateOp, StateVector, h, ry, x

_SQRT1_2 = 1.0 / math.sqrt(2.0)


@dataclass(frozen=True)
class Selector:
    """Which part of the matrix an operation acts on.

    ``Selector()`` is the whole matrix, ``Selector(row=i)`` a single row,
    ``Selector(col=j)`` a single column, and both together a single entry.
    """

    row: int | None = None
    col: int | None = None

    @classmethod
    def whole(cls) -> "Selector":
        return cls()

    @property
    def kind(self) -> str:
        if self.row is None and self.col is None:
            return "whole"
        if self.col is None:
            return "row"
        if self.row is None:
            return "col"
        return "entry"

    def validate(self, layout: RegisterLayout) -> None:
        if self.row is not None:
            layout.check_row(self.row)
        if self.col is not None:
            layout.check_col(self.col)

    def mask_plan(self, layout: RegisterLayout) -> MaskPlan:
        return MaskPlan.build(layout, self.row, self.col)

    def controls(self, layout: RegisterLayout) -> tuple[int, ...]:
        """Qubits that must read all ones once the mask is applied."""
        out: tuple[int, ...] = ()
        if self.row is not None:
            out += layout.row_qubits
        if self.col is not None:
            out += layout.col_qubits
        return out


def _masked(layout: RegisterLayout, sel: Selector, body: list[GateOp],
            label: str) -> Circuit:
    sel.validate(layout)
    plan = sel.mask_plan(layout).gates
    ctrl = sel.controls(layout)
    circ = Circuit(layout.n_qubits, label=label)
    circ.extend(plan)
    circ.extend(g.with_controls(ctrl) for g in body)
    circ.extend(plan)
    return circ


def _run(state: StateVector, circ: Circuit) -> StateVector:
    if state.n_qubits != circ.n_qubits:
        raise DimensionError(
            f"layout needs {circ.n_qubits} qubits, state has {state.n_qubits}")
    return circ.apply(state)


# -- reorderings ---------------------------------------------------------------

def reverse_circuit(layout: RegisterLayout, sel: Selector = Selector()) -> Circuit:
    kind = sel.kind
    if kind == "whole":
        body = [x(q) for q in layout.row_qubits + layout.col_qubits]
    elif kind == "row":
        body = [x(q) for q in layout.col_qubits]
    elif kind == "col":
        body = [x(q) for q in layout.row_qubits]
    else:
        raise ValueError("reverse needs a row, a column or the whole matrix, not an entry")
    return _masked(layout, sel, body, "reverse")


def reverse(state: StateVector, layout: RegisterLayout,
            sel: Selector = Selector()) -> StateVector:
    """Reverse the selected row (or column); the whole matrix flips both indices."""
    return _run(state, reverse_circuit(layout, sel))


def _mcx_on_col_bit(layout: RegisterLayout, b: int) -> GateOp:
    others = [q for k, q in enumerate(layout.col_qubits) if k != b]
    return x(layout.col_qubits[b], others)


def _flip_perm(J: int, b: int, controlled: bool):
    """Index map of X on column bit ``b``, optionally controlled on all other bits."""
    mask = 1 << b
    rest = (J - 1) ^ mask

    def f(idx: int) -> int:
        if controlled and (idx & rest) != rest:
            return idx
        return idx ^ mask
    return f


def pivot_gates(layout: RegisterLayout, pos: int) -> list[GateOp]:
    """Gate sequence exchanging column ``pos`` with the pivot ``J - 1``.

    Walks the column bits from the most significant down.  At every bit where
    the element still sits in the lower block, a multi-controlled X brings the
    pivot's neighbour into that block; if this already lands the element on the
    pivot we stop, otherwise an X moves the element into the upper block.
    Finally every gate except the last one is undone in reverse order.
    """
    layout.check_col(pos)
    J, n = layout.J, layout.n_cols
    pivot = J - 1
    forward: list[GateOp] = []
    cur = pos
    for b in reversed(range(n)):
        if cur == pivot:
            break
        if (cur >> b) & 1:
            continue
        forward.append(_mcx_on_col_bit(layout, b))
        cur = _flip_perm(J, b, True)(cur)
        if cur == pivot:
            break
        forward.append(x(layout.col_qubits[b]))
        cur ^= 1 << b
    if not forward:
        return []
    undo = [g.inverse() for g in reversed(forward[:-1])]
    return forward + undo


def swap_with_pivot_circuit(layout: RegisterLayout, pos: int,
                            row: int | None = None) -> Circuit:
    return _masked(layout, Selector(row=row), pivot_gates(layout, pos), "swap_with_pivot")


def swap_with_pivot(state: StateVector, layout: RegisterLayout, pos: int,
                    row: int | None = None) -> StateVector:
    """Exchange column ``pos`` with the last column, in one row or in all rows."""
    return _run(state, swap_with_pivot_circuit(layout, pos, row))


def swap_elements_circuit(layout: RegisterLayout, i: int, j: int,
                          row: int | None = None) -> Circuit:
    layout.check_col(i)
    layout.check_col(j)
    circ = Circuit(layout.n_qubits, label="swap_elements")
    if i == j:
        return circ
    pivot = layout.J - 1
    if pivot in (i, j):
        return circ.extend(swap_with_pivot_circuit(layout, i + j - pivot, row).gates)
    for k in (j, i, j):
        circ.extend(swap_with_pivot_circuit(layout, k, row).gates)
    return circ


def swap_elements(state: StateVector, layout: RegisterLayout, i: int, j: int,
                  row: int | None = None) -> StateVector:
    """Exchange columns ``i`` and ``j`` through three pivot swaps."""
    return _run(state, swap_elements_circuit(layout, i, j, row))


def increment_gates(qubits: tuple[int, ...]) -> list[GateOp]:
    """|k> -> |k + 1 mod 2^n> on a little-endian register."""
    return [x(qubits[b], qubits[:b]) for b in reversed(range(len(qubits)))]


def cyclic_shift_circuit(layout: RegisterLayout, direction: str,
                         sel: Selector = Selector()) -> Circuit:
    if direction not in ("left", "right"):
        raise ValueError(f"direction must be 'left' or 'right', got {direction!r}")
    kind = sel.kind
    if kind in ("whole", "row"):
        reg = layout.col_qubits
    elif kind == "col":
        reg = layout.row_qubits
    else:
        raise ValueError("cyclic_shift cannot act on a single entry")
    body = increment_gates(reg)
    if direction == "left":
        body = [g.inverse() for g in reversed(body)]
    return _masked(layout, sel, body, f"cyclic_shift_{direction}")


def cyclic_shift(state: StateVector, layout: RegisterLayout, direction: str,
                 sel: Selector = Selector()) -> StateVector:
    """Rotate the selected rows (or column) by one place.

    ``left`` gives ``out[j] = in[(j + 1) % J]``; ``right`` is its inverse.
    """
    return _run(state, cyclic_shift_circuit(layout, direction, sel))


# -- sums and reductions ---------------------------------------------------------

def _axis_register(layout: RegisterLayout, axis: str) -> tuple[int, ...]:
    if axis == "rows":
        return layout.row_qubits
    if axis == "cols":
        return layout.col_qubits
    raise ValueError(f"axis must be 'rows' or 'cols', got {axis!r}")


def pairwise_sum_diff(state: StateVector, layout: RegisterLayout,
                      axis: str = "rows") -> StateVector:
    """Hadamard on the lowest row qubit: rows ``2i`` and ``2i+1`` become
    ``(a + b)/sqrt(2)`` and ``(a - b)/sqrt(2)``.  ``axis="cols"`` pairs columns.
    """
    reg = _axis_register(layout, axis)
    if not reg:
        raise DimensionError(f"no {axis[:-1]} register to pair up")
    _run(state, Circuit(layout.n_qubits, [h(reg[0])], label="pairwise_sum_diff"))
    state.ledger.record("pairwise_sum_diff", _SQRT1_2, f"H on {axis} qubit {reg[0]}")
    return state


def _reduce(state: StateVector, layout: RegisterLayout, reg: tuple[int, ...],
            label: str) -> StateVector:
    circ = Circuit(layout.n_qubits, [h(q) for q in sorted(reg)], label=label)
    _run(state, circ)
    if reg:
        state.ledger.record(label, 2.0 ** (-len(reg) / 2), f"Walsh-Hadamard on {len(reg)} qubits")
    return state


def reduce_rows(state: StateVector, layout: RegisterLayout) -> StateVector:
    """Sum every row into its column 0 (scaled by ``1/sqrt(J)``).

    The other columns hold the remaining Walsh-Hadamard coefficients.
    """
    return _reduce(state, layout, layout.col_qubits, "reduce_rows")


def reduce_cols(state: StateVector, layout: RegisterLayout) -> StateVector:
    """Sum every column into its row 0 (scaled by ``1/sqrt(I)``)."""
    return _reduce(state, layout, layout.row_qubits, "reduce_cols")


# -- products ------------------------------------------------------------------

def _need_mul(layout: RegisterLayout) -> int:
    if layout.mul is None:
        raise DimensionError("operation needs a layout with a mul flag qubit")
    return layout.mul


def scale_circuit(layout: RegisterLayout, alpha: float,
                  sel: Selector = Selector()) -> Circuit:
    mul = _need_mul(layout)
    if not 0.0 <= alpha <= 1.0:
        raise RangeError(f"alpha must lie in [0, 1], got {alpha}")
    return _masked(layout, sel, [ry(mul, embed_angle(alpha))], "scale_by_constant")


def scale_by_constant(state: StateVector, layout: RegisterLayout, alpha: float,
                      sel: Selector = Selector()) -> StateVector:
    """Multiply the selected part of the ``mul = 0`` sector by ``alpha``."""
    return _run(state, scale_circuit(layout, alpha, sel))


def multiply_arrays(oracle_f, oracle_g, layout: RegisterLayout) -> StateVector:
    """Elementwise product of two arrays, found in the ``aux = 0, mul = 0`` sector.

    Loads ``f`` on ``aux``, swaps ``aux`` with ``mul`` and loads ``g`` on the
    fresh ``aux``.  Every row of the layout carries the same product.
    """
    mul = _need_mul(layout)
    for o in (oracle_f, oracle_g):
        if o.n_cols != layout.J:
            raise DimensionError(f"oracle {o.name!r} has {o.n_cols} entries, layout J={layout.J}")
    state = init_uniform(layout)
    a = layout.aux
    oracle_f.apply(state, a, layout.col_qubits)
    swap = Circuit(layout.n_qubits, [x(mul, [a]), x(a, [mul]), x(mul, [a])], label="swap_flags")
    swap.apply(state)
    oracle_g.apply(state, a, layout.col_qubits)
    state.ledger.record_norm(f"oracle:{oracle_f.name}", oracle_f.scale)
    state.ledger.record_norm(f"oracle:{oracle_g.name}", oracle_g.scale)
    return state


def square_array(oracle_f, layout: RegisterLayout) -> StateVector:
    return multiply_arrays(oracle_f, oracle_f, layout)


def scalar_product(oracle_f, oracle_g, layout: RegisterLayout) -> StateVector:
    """Product followed by a row reduction: column 0 holds ``<f, g>/sqrt(J)``."""
    state = multiply_arrays(oracle_f, oracle_g, layout)
    return reduce_rows(state, layout)
