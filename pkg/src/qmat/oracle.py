"""Array oracles and the shift constructions built on them.

An oracle for ``f`` maps ``|0>_flag |j>`` to
``f_j |0>_flag |j> + sqrt(1 - f_j^2) |1>_flag |j>``.  The shift helpers put
``f`` on one row of a small quantum matrix and a constant (or a staircase of
constants) on another, then combine the rows with Hadamards so that a single
marked sector holds ``f - s`` up to a known scale.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, RangeError
from .matrix import RegisterLayout, constant_row_circuit, embed_angle, init_uniform
from .sim import Circuit, GateOp, GateStats, StateVector, h, ry, x


@dataclass(frozen=True)
class Oracle:
    """Pointwise loader of a 1-D array onto a flag qubit.

    ``values`` are the embedded numbers (all in [-1, 1]); ``scale`` is the
    classical factor they were divided by, so ``values * scale`` is the source.
    """

    name: str
    values: np.ndarray
    scale: float = 1.0

    def __post_init__(self):
        vals = np.array(self.values, dtype=float).ravel()
        if vals.size == 0:
            raise ValueError("oracle needs a non-empty array")
        if not np.all(np.isfinite(vals)):
            raise ValueError("oracle values must be finite")
        if np.max(np.abs(vals)) > 1.0 + 1e-12:
            raise RangeError("oracle values must lie in [-1, 1]")
        n = vals.size
        if n & (n - 1):
            raise DimensionError(f"oracle length must be a power of two, got {n}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", np.clip(vals, -1.0, 1.0))

    @property
    def n_cols(self) -> int:
        return self.values.size

    @property
    def n_qubits(self) -> int:
        return self.n_cols.bit_length() - 1

    def gates(self, flag: int, col_qubits, controls=None) -> list[GateOp]:
        col_qubits = tuple(col_qubits)
        if len(col_qubits) != self.n_qubits:
            raise DimensionError(
                f"oracle over {self.n_cols} entries needs {self.n_qubits} column qubits")
        out: list[GateOp] = []
        for j, value in enumerate(self.values):
            flips = [x(q) for b, q in enumerate(col_qubits) if not (j >> b) & 1]
            rot = ry(flag, embed_angle(value), col_qubits, clean_target=True)
            if controls:
                rot = rot.with_controls(controls)
            out += flips + [rot] + flips
        return out

    def circuit(self, n_qubits: int, flag: int, col_qubits, controls=None) -> Circuit:
        return Circuit(n_qubits, self.gates(flag, col_qubits, controls), label=f"oracle:{self.name}")

    def apply(self, state: StateVector, flag: int, col_qubits, controls=None) -> StateVector:
        return self.circuit(state.n_qubits, flag, col_qubits, controls).apply(state)

    def apply_inverse(self, state: StateVector, flag: int, col_qubits,
                      controls=None) -> StateVector:
        return self.circuit(state.n_qubits, flag, col_qubits, controls).inverse().apply(state)

    def gate_cost(self) -> GateStats:
        n = self.n_qubits + 1
        return self.circuit(n, self.n_qubits, range(self.n_qubits)).stats()

    def to_dict(self) -> dict:
        return {"name": self.name, "values": self.values.tolist(), "scale": self.scale}

    @classmethod
    def from_dict(cls, data: dict) -> "Oracle":
        return cls(data["name"], np.asarray(data["values"], dtype=float),
                   float(data.get("scale", 1.0)))


def oracle_from_array(f, name: str = "f", normalize: bool = False) -> Oracle:
    """Wrap an array as an oracle.

    By default the values are embedded as given and must already lie in
    [-1, 1].  With ``normalize=True`` they are divided by their infinity norm
    first (an all-zero array keeps scale 1).
    """
    arr = np.asarray(f, dtype=float).ravel()
    if arr.size == 0:
        raise ValueError("oracle needs a non-empty array")
    if not normalize:
        if np.max(np.abs(arr)) > 1.0:
            raise RangeError("values exceed 1 in magnitude; pass normalize=True")
        return Oracle(name, arr, 1.0)
    norm = float(np.max(np.abs(arr)))
    scale = norm if norm > 0 else 1.0
    return Oracle(name, arr / scale, scale)


@dataclass(frozen=True)
class ShiftSpec:
    s: float
    levels: int = 1
    ratio: float | None = None

    def __post_init__(self):
        if self.levels < 1:
            raise ValueError(f"levels must be >= 1, got {self.levels}")
        if not -1.0 <= self.s <= 1.0:
            raise RangeError(f"shift must lie in [-1, 1], got {self.s}")

    def step_sizes(self) -> list[float]:
        """Constants loaded at each level.

        Level ``k`` uses ``s * ratio**(k - 1)``.  The default ratio is 2/3 for
        up to two levels and 1/2 beyond, where 1/2 is what keeps the steps on a
        straight line.  A ratio that lets a later level outweigh an earlier one
        would break the monotone staircase and is rejected.
        """
        ratio = self.ratio
        if ratio is None:
            ratio = 2.0 / 3.0 if self.levels <= 2 else 0.5
        steps = [self.s * ratio ** k for k in range(self.levels)]
        for k in range(self.levels):
            if abs(steps[k]) + 1e-15 < sum(abs(v) for v in steps[k + 1:]):
                raise ValueError(
                    f"ratio {ratio} gives a non-monotone staircase at level {k + 1}")
        return steps


@dataclass
class ShiftResult:
    """State plus the metadata needed to read the shifted array back.

    ``sector(name)`` returns amplitudes times ``sqrt(J)`` on the marked
    pattern; multiplied by ``1/scale`` they equal ``f + offsets``.
    """

    state: StateVector
    layout: RegisterLayout
    f: np.ndarray
    scale: float
    sectors: dict[str, dict[int, int]]
    offsets: dict[str, np.ndarray]
    steps: list[float] = field(default_factory=list)

    def sector(self, name: str = "diff") -> np.ndarray:
        pattern = self.sectors[name]
        lay = self.layout
        idx = sum(bit << q for q, bit in pattern.items())
        cols = np.arange(lay.J)
        for b, q in enumerate(lay.col_qubits):
            idx = idx + (((cols >> b) & 1) << q)
        return self.state.amps[idx].real * math.sqrt(lay.J)

    def target(self, name: str = "diff") -> np.ndarray:
        return self.scale * (self.f + self.offsets[name])

    def to_dict(self) -> dict:
        return {
            "scale": self.scale,
            "steps": list(self.steps),
            "sectors": {
                name: {
                    "pattern": {str(q): b for q, b in sorted(pat.items())},
                    "values": self.sector(name).tolist(),
                    "target": self.target(name).tolist(),
                }
                for name, pat in sorted(self.sectors.items())
            },
            "ledger": self.state.ledger.as_dict(),
        }


def _shift_state(oracle: Oracle, n_rows: int) -> tuple[StateVector, RegisterLayout]:
    layout = RegisterLayout.standard(n_rows, oracle.n_qubits)
    state = init_uniform(layout)
    row0 = {q: 0 for q in layout.row_qubits}
    oracle.apply(state, layout.aux, layout.col_qubits, row0)
    return state, layout


def constant_shift(oracle: Oracle, s: float) -> ShiftResult:
    """``f`` on row 0, ``s`` on row 1, then a Hadamard on the row qubit.

    Row 1 (``diff``) then holds ``(f - s)/2`` and row 0 (``sum``) ``(f + s)/2``.
    """
    cfg = ShiftSpec(s, 1)
    state, layout = _shift_state(oracle, 1)
    r = layout.row_qubits[0]
    constant_row_circuit(layout, 1, s).apply(state)
    Circuit(layout.n_qubits, [h(r)], label="combine_rows").apply(state)
    state.ledger.record("constant_shift", 0.5, f"shift by {s:.17g}")
    state.ledger.record_norm(f"oracle:{oracle.name}", oracle.scale)
    a = layout.aux
    J = layout.J
    return ShiftResult(
        state, layout, oracle.values.copy(), 0.5,
        sectors={"diff": {a: 0, r: 1}, "sum": {a: 0, r: 0}},
        offsets={"diff": np.full(J, -s), "sum": np.full(J, s)},
        steps=[cfg.s],
    )


def staircase_offsets(J: int, steps: list[float]) -> np.ndarray:
    """Offset added to ``f_j`` by a staircase with the given level constants.

    Level ``k`` (1-based) adds ``+steps[k-1]`` where column bit ``n_J - k`` is
    set and subtracts it otherwise.
    """
    n = J.bit_length() - 1
    j = np.arange(J)
    out = np.zeros(J)
    for k, sk in enumerate(steps, start=1):
        bit = (j >> (n - k)) & 1
        out += np.where(bit == 1, sk, -sk)
    return out


def linear_shift(oracle: Oracle, s: float, levels: int = 1,
                 ratio: float | None = None) -> ShiftResult:
    """Staircase approximation of ``f_j - s + (slope) j`` over ``levels`` levels.

    Uses ``levels`` row qubits.  Level ``k`` loads its constant on the row whose
    lowest ``k`` bits are set, folds it into the previous level's result with a
    Hadamard, and uses column bit ``n_J - k`` to choose between the difference
    and the sum.  The result sits on the all-ones row with scale ``2**-levels``.
    """
    cfg = ShiftSpec(s, levels, ratio)
    steps = cfg.step_sizes()
    n_cols = oracle.n_qubits
    if n_cols < levels:
        raise DimensionError(f"{levels} levels need at least {levels} column qubits, got {n_cols}")
    state, layout = _shift_state(oracle, levels)
    rows = layout.row_qubits
    for k in range(1, levels + 1):
        c = steps[k - 1] * 2.0 ** (-(k - 1) / 2)
        if abs(c) > 1.0:
            raise RangeError(f"amplitude overflow: level {k} constant {c:.6g} exceeds 1")
        row_index = (1 << k) - 1
        constant_row_circuit(layout, row_index, c).apply(state)
        ctrl = [(rows[m], 1) for m in range(k - 1)] + [(rows[m], 0) for m in range(k, levels)]
        target = rows[k - 1]
        col_bit = layout.col_qubits[n_cols - k]
        Circuit(layout.n_qubits, [h(target, ctrl), x(target, ctrl + [(col_bit, 1)])],
                label=f"staircase_level_{k}").apply(state)
    scale = 2.0 ** (-levels)
    state.ledger.record("linear_shift", scale, f"{levels} staircase levels")
    state.ledger.record_norm(f"oracle:{oracle.name}", oracle.scale)
    pattern = {layout.aux: 0, **{q: 1 for q in rows}}
    return ShiftResult(
        state, layout, oracle.values.copy(), scale,
        sectors={"diff": pattern},
        offsets={"diff": staircase_offsets(layout.J, steps)},
        steps=steps,
    )


def step_shift(oracle: Oracle, s: float) -> ShiftResult:
    """``f - s`` on the lower half of the columns and ``f + s`` on the upper half."""
    return linear_shift(oracle, s, 1)
