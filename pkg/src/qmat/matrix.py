"""Quantum matrices: register layout, masking, loaders and a read-back helper.

A quantum matrix stores entry ``(i, j)`` of a classical ``I x J`` array in the
amplitude of ``|0>_aux |i>_rows |j>_cols``.  The default layout puts the column
register on the lowest qubits, then the rows, then the flag qubit ``aux`` and,
when present, the multiplication flag ``mul``; every register is little-endian.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import AddressError, DimensionError, RangeError
from .sim import Circuit, GateOp, StateVector, apply, h, new_state, ry, x


@dataclass(frozen=True)
class RegisterLayout:
    aux: int
    row_qubits: tuple[int, ...]
    col_qubits: tuple[int, ...]
    mul: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "row_qubits", tuple(int(q) for q in self.row_qubits))
        object.__setattr__(self, "col_qubits", tuple(int(q) for q in self.col_qubits))
        used = [self.aux, *self.row_qubits, *self.col_qubits]
        if self.mul is not None:
            used.append(self.mul)
        if len(set(used)) != len(used):
            raise ValueError(f"register qubits must be distinct, got {used}")
        if sorted(used) != list(range(len(used))):
            raise ValueError(f"register qubits must cover 0..{len(used) - 1}, got {used}")

    @classmethod
    def standard(cls, n_rows: int, n_cols: int, mul: bool = False) -> "RegisterLayout":
        """Columns on qubits ``0..n_J-1``, rows above them, then ``aux`` and ``mul``."""
        if n_rows < 0 or n_cols < 0:
            raise ValueError("register sizes must be non-negative")
        cols = tuple(range(n_cols))
        rows = tuple(range(n_cols, n_cols + n_rows))
        aux = n_cols + n_rows
        return cls(aux, rows, cols, aux + 1 if mul else None)

    @property
    def n_rows(self) -> int:
        return len(self.row_qubits)

    @property
    def n_cols(self) -> int:
        return len(self.col_qubits)

    @property
    def I(self) -> int:  # noqa: E743 - matrix dimension names
        return 1 << self.n_rows

    @property
    def J(self) -> int:
        return 1 << self.n_cols

    @property
    def n_qubits(self) -> int:
        return 1 + (self.mul is not None) + self.n_rows + self.n_cols

    def check_row(self, i: int) -> None:
        if not 0 <= i < self.I:
            raise AddressError(f"row {i} out of range for I={self.I}")

    def check_col(self, j: int) -> None:
        if not 0 <= j < self.J:
            raise AddressError(f"column {j} out of range for J={self.J}")

    def row_pattern(self, i: int) -> dict[int, int]:
        self.check_row(i)
        return {q: (i >> b) & 1 for b, q in enumerate(self.row_qubits)}

    def col_pattern(self, j: int) -> dict[int, int]:
        self.check_col(j)
        return {q: (j >> b) & 1 for b, q in enumerate(self.col_qubits)}

    def entry_pattern(self, i: int, j: int, aux: int = 0, mul: int = 0) -> dict[int, int]:
        out = {self.aux: aux, **self.row_pattern(i), **self.col_pattern(j)}
        if self.mul is not None:
            out[self.mul] = mul
        return out

    def sector_indices(self, aux: int = 0, mul: int = 0) -> np.ndarray:
        """``I x J`` array of basis indices of the ``(aux, mul)`` sector."""
        i = np.arange(self.I)[:, None]
        j = np.arange(self.J)[None, :]
        idx = np.zeros((self.I, self.J), dtype=np.int64) + (aux << self.aux)
        if self.mul is not None:
            idx += mul << self.mul
        for b, q in enumerate(self.row_qubits):
            idx += ((i >> b) & 1) << q
        for b, q in enumerate(self.col_qubits):
            idx += ((j >> b) & 1) << q
        return idx


@dataclass(frozen=True)
class ClassicalMatrix:
    """A finite real ``I x J`` array with its infinity norm."""

    values: np.ndarray

    def __post_init__(self):
        arr = np.array(self.values, dtype=float)
        if arr.ndim == 1:
            arr = arr[None, :]
        if arr.ndim != 2 or arr.size == 0:
            raise DimensionError(f"expected a non-empty 2-D array, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("matrix entries must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]

    @property
    def inf_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    @property
    def scale(self) -> float:
        """Divisor used when loading; 1 for the all-zero matrix."""
        n = self.inf_norm
        return n if n > 0.0 else 1.0

    @property
    def normalized(self) -> np.ndarray:
        return self.values / self.scale

    def tolist(self) -> list[list[float]]:
        return self.values.tolist()

    @classmethod
    def from_csv(cls, path) -> "ClassicalMatrix":
        """Row-major CSV; a first line whose first token is not numeric is a header."""
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
        if rows and not _is_number(rows[0][0]):
            rows = rows[1:]
        if not rows:
            raise DimensionError(f"{path}: no numeric rows")
        width = len(rows[0])
        if any(len(r) != width for r in rows):
            raise DimensionError(f"{path}: ragged rows")
        try:
            data = [[float(c) for c in r] for r in rows]
        except ValueError as exc:
            raise ValueError(f"{path}: {exc}") from None
        return cls(np.array(data))

    @classmethod
    def from_json(cls, path) -> "ClassicalMatrix":
        data = json.loads(Path(path).read_text())
        if isinstance(data, dict):
            data = data.get("matrix", data.get("values"))
        return cls(np.array(data, dtype=float))

    @classmethod
    def load(cls, path) -> "ClassicalMatrix":
        suffix = Path(path).suffix.lower()
        if suffix == ".json":
            return cls.from_json(path)
        return cls.from_csv(path)


def _is_number(token: str) -> bool:
    try:
        float(token)
    except ValueError:
        return False
    return True


def layout_for(matrix: ClassicalMatrix, mul: bool = False) -> RegisterLayout:
    """Standard layout sized to ``matrix``; both dimensions must be powers of two."""
    n_rows = _log2_exact(matrix.rows, "row count")
    n_cols = _log2_exact(matrix.cols, "column count")
    return RegisterLayout.standard(n_rows, n_cols, mul=mul)


def _log2_exact(n: int, what: str) -> int:
    if n < 1 or n & (n - 1):
        raise DimensionError(f"{what} must be a power of two, got {n}")
    return n.bit_length() - 1


@dataclass(frozen=True)
class MaskPlan:
    """X gates that turn a chosen row/column address into all ones."""

    gates: tuple[GateOp, ...]

    @classmethod
    def build(cls, layout: RegisterLayout, i: int | None = None,
              j: int | None = None) -> "MaskPlan":
        gates = []
        if i is not None:
            gates += [x(q) for q, bit in layout.row_pattern(i).items() if bit == 0]
        if j is not None:
            gates += [x(q) for q, bit in layout.col_pattern(j).items() if bit == 0]
        return cls(tuple(gates))

    def __len__(self) -> int:
        return len(self.gates)

    def apply(self, state: StateVector) -> StateVector:
        for g in self.gates:
            apply(state, g)
        return state


def mask(state: StateVector, layout: RegisterLayout, i: int | None = None,
         j: int | None = None) -> StateVector:
    with state.stats.scope("mask"):
        return MaskPlan.build(layout, i, j).apply(state)


def _check_layout(state: StateVector, layout: RegisterLayout) -> None:
    if state.n_qubits != layout.n_qubits:
        raise DimensionError(
            f"layout needs {layout.n_qubits} qubits, state has {state.n_qubits}")


def uniform_circuit(layout: RegisterLayout) -> Circuit:
    gates = [h(q) for q in sorted(layout.row_qubits + layout.col_qubits)]
    return Circuit(layout.n_qubits, gates, label="init_uniform")


def init_uniform(layout: RegisterLayout) -> StateVector:
    """Uniform superposition over all ``(i, j)`` with the flag qubits at 0."""
    state = new_state(layout.n_qubits)
    return uniform_circuit(layout).apply(state)


def embed_angle(value: float) -> float:
    """RY angle whose cosine-half equals ``value`` in [-1, 1]."""
    return 2.0 * math.acos(min(1.0, max(-1.0, float(value))))


def pointwise_circuit(layout: RegisterLayout, f: ClassicalMatrix) -> Circuit:
    """Mask, rotate the flag qubit, unmask, for every entry of ``f``."""
    if (f.rows, f.cols) != (layout.I, layout.J):
        raise DimensionError(
            f"matrix is {f.rows}x{f.cols} but layout holds {layout.I}x{layout.J}")
    controls = layout.row_qubits + layout.col_qubits
    circ = Circuit(layout.n_qubits, label="load_pointwise")
    for i, row in enumerate(f.normalized):
        for j, value in enumerate(row):
            plan = MaskPlan.build(layout, i, j).gates
            circ.extend(plan)
            circ.append(ry(layout.aux, embed_angle(value), controls, clean_target=True))
            circ.extend(plan)
    return circ


def load_pointwise(state: StateVector, layout: RegisterLayout, f) -> StateVector:
    """Embed ``f / ||f||_inf`` into the ``aux = 0`` amplitudes of a uniform state."""
    f = f if isinstance(f, ClassicalMatrix) else ClassicalMatrix(f)
    _check_layout(state, layout)
    pointwise_circuit(layout, f).apply(state)
    state.ledger.record_norm("load_pointwise", f.scale)
    return state


def constant_row_circuit(layout: RegisterLayout, i: int, c: float) -> Circuit:
    if not -1.0 <= c <= 1.0:
        raise RangeError(f"constant must lie in [-1, 1], got {c}")
    plan = MaskPlan.build(layout, i=i).gates
    circ = Circuit(layout.n_qubits, label="load_constant_row")
    circ.extend(plan)
    circ.append(ry(layout.aux, embed_angle(c), layout.row_qubits, clean_target=True))
    circ.extend(plan)
    return circ


def load_constant_row(state: StateVector, layout: RegisterLayout, i: int,
                      c: float) -> StateVector:
    """Scale row ``i`` of an untouched uniform matrix to the constant ``c``.

    Only the row register is masked and used as control, so the cost does not
    depend on the number of columns.
    """
    _check_layout(state, layout)
    return constant_row_circuit(layout, i, c).apply(state)


def read_matrix(state: StateVector, layout: RegisterLayout) -> ClassicalMatrix:
    """Debug extractor: the ``aux = 0`` (and ``mul = 0``) amplitudes times sqrt(IJ).

    This reads the state vector directly and has no measurement counterpart;
    it exists to check the simulation against classical references.  Signs are
    preserved.
    """
    _check_layout(state, layout)
    sector = state.amps[layout.sector_indices()]
    return ClassicalMatrix(sector.real * math.sqrt(layout.I * layout.J))


def read_row(state: StateVector, layout: RegisterLayout, i: int) -> np.ndarray:
    layout.check_row(i)
    return read_matrix(state, layout).values[i].copy()


def as_matrix(values: Sequence | np.ndarray | ClassicalMatrix) -> ClassicalMatrix:
    return values if isinstance(values, ClassicalMatrix) else ClassicalMatrix(values)
