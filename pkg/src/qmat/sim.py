"""Dense state-vector engine.

Qubit ``q`` is bit ``q`` of the basis index (qubit 0 is the least significant
bit).  Gates are applied semantically: a multi-controlled gate updates exactly
the amplitude pairs whose control bits match, through numpy views of the state
reshaped as a ``(2,) * n`` tensor.  Resource counts are kept separately in
:class:`GateStats`, which books every controlled gate at the cost of a standard
decomposition.
"""
from __future__ import annotations

import math
import os
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .errors import AddressError, CapacityError, DimensionError, InconsistencyError
from .ledger import NormLedger

DEFAULT_MAX_QUBITS = 24
CLEAN_TOL = 1e-12

GATE_KINDS = ("X", "H", "RY", "Z")
_SQRT1_2 = 1.0 / math.sqrt(2.0)


def max_qubits() -> int:
    """Capacity bound, overridable through ``QMAT_MAX_QUBITS``."""
    raw = os.environ.get("QMAT_MAX_QUBITS")
    if raw is None:
        return DEFAULT_MAX_QUBITS
    try:
        value = int(raw)
    except ValueError:
        raise CapacityError(f"QMAT_MAX_QUBITS must be an integer, got {raw!r}") from None
    if value < 1:
        raise CapacityError(f"QMAT_MAX_QUBITS must be >= 1, got {value}")
    return value


def _controls_tuple(controls) -> tuple[tuple[int, int], ...]:
    if controls is None:
        return ()
    if isinstance(controls, Mapping):
        items = controls.items()
    else:
        items = []
        for c in controls:
            if isinstance(c, tuple):
                items.append(c)
            else:
                items.append((c, 1))
    out = {}
    for q, bit in items:
        q, bit = int(q), int(bit)
        if bit not in (0, 1):
            raise ValueError(f"control polarity must be 0 or 1, got {bit}")
        if out.get(q, bit) != bit:
            raise ValueError(f"qubit {q} controlled with both polarities")
        out[q] = bit
    return tuple(sorted(out.items()))


@dataclass(frozen=True)
class GateOp:
    """One primitive gate.

    ``controls`` holds ``(qubit, polarity)`` pairs; polarity 0 means the gate
    fires when that qubit is 0.  ``clean_target`` asserts that the target is
    |0> on every branch the gate acts on; it lets a controlled ``RY`` be booked
    with one multi-controlled NOT instead of two, and is checked at run time.
    """

    kind: str
    target: int
    controls: tuple[tuple[int, int], ...] = ()
    angle: float = 0.0
    clean_target: bool = False

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        object.__setattr__(self, "controls", _controls_tuple(self.controls))
        if any(q == self.target for q, _ in self.controls):
            raise ValueError(f"target {self.target} also listed as a control")
        if not math.isfinite(self.angle):
            raise ValueError("rotation angle must be finite")
        if self.clean_target and self.kind != "RY":
            raise ValueError("clean_target only applies to RY")

    @property
    def qubits(self) -> list[int]:
        return [self.target] + [q for q, _ in self.controls]

    def inverse(self) -> "GateOp":
        if self.kind == "RY":
            return GateOp("RY", self.target, self.controls, -self.angle)
        return self

    def with_controls(self, extra) -> "GateOp":
        merged = dict(self.controls)
        for q, bit in _controls_tuple(extra):
            if q == self.target:
                raise ValueError(f"cannot control gate on its own target {q}")
            if merged.get(q, bit) != bit:
                raise ValueError(f"qubit {q} controlled with both polarities")
            merged[q] = bit
        return GateOp(self.kind, self.target, tuple(merged.items()), self.angle,
                      self.clean_target)


def x(target: int, controls=None) -> GateOp:
    return GateOp("X", target, controls)


def h(target: int, controls=None) -> GateOp:
    return GateOp("H", target, controls)


def ry(target: int, angle: float, controls=None, clean_target: bool = False) -> GateOp:
    return GateOp("RY", target, controls, float(angle), clean_target)


def z(target: int, controls=None) -> GateOp:
    return GateOp("Z", target, controls)


COUNT_FIELDS = (
    "x_count",
    "h_count",
    "ry_count",
    "cnot_count",
    "multi_controlled_count",
    "toffoli_count",
)


def _mcx_cost(n_controls: int) -> dict[str, int]:
    if n_controls == 0:
        return {"x_count": 1}
    if n_controls == 1:
        return {"cnot_count": 1}
    return {"multi_controlled_count": 1, "toffoli_count": 2 * n_controls - 3}


def gate_cost(gate: GateOp) -> dict[str, int]:
    """Decomposition cost of one gate.

    Every control on 0 adds an X before and after.  A gate with ``c`` controls
    is built around an X with ``c`` controls (a CNOT for ``c == 1``, otherwise a
    multi-controlled X worth ``2c - 3`` Toffolis):

    * ``RY``: two single-qubit rotations and two controlled X, or one when the
      target is known clean;
    * ``H``: two rotations around one controlled X;
    * ``Z``: two Hadamards around one controlled X.
    """
    cost = dict.fromkeys(COUNT_FIELDS, 0)

    def add(part):
        for key, value in part.items():
            cost[key] += value

    c = len(gate.controls)
    cost["x_count"] += 2 * sum(1 for _, bit in gate.controls if bit == 0)
    if gate.kind == "X":
        add(_mcx_cost(c))
    elif c == 0:
        if gate.kind == "H":
            cost["h_count"] += 1
        elif gate.kind == "RY":
            cost["ry_count"] += 1
        else:  # Z = H X H
            cost["h_count"] += 2
            cost["x_count"] += 1
    elif gate.kind == "RY":
        cost["ry_count"] += 2
        for _ in range(1 if gate.clean_target else 2):
            add(_mcx_cost(c))
    elif gate.kind == "H":
        cost["ry_count"] += 2
        add(_mcx_cost(c))
    else:
        cost["h_count"] += 2
        add(_mcx_cost(c))
    return cost


@dataclass
class GateStats:
    """Cumulative gate counts plus a per-label breakdown.

    Counts only grow; :meth:`reset` is the one way to clear them.
    """

    x_count: int = 0
    h_count: int = 0
    ry_count: int = 0
    cnot_count: int = 0
    multi_controlled_count: int = 0
    toffoli_count: int = 0
    by_label: dict[str, dict[str, int]] = field(default_factory=dict)
    _scope: list[str] = field(default_factory=list, repr=False, compare=False)

    def _add(self, cost: Mapping[str, int], times: int = 1) -> None:
        label = "/".join(self._scope) if self._scope else None
        bucket = None
        if label is not None:
            bucket = self.by_label.setdefault(label, dict.fromkeys(COUNT_FIELDS, 0))
        for key in COUNT_FIELDS:
            inc = cost.get(key, 0) * times
            setattr(self, key, getattr(self, key) + inc)
            if bucket is not None:
                bucket[key] += inc

    def record(self, gate: GateOp, times: int = 1) -> None:
        self._add(gate_cost(gate), times)

    def merge(self, other: "GateStats", times: int = 1) -> None:
        """Add ``times`` copies of ``other``'s totals under the current scope."""
        self._add(other.totals(), times)

    @contextmanager
    def scope(self, label: str | None):
        if label is None:
            yield self
            return
        self._scope.append(label)
        try:
            yield self
        finally:
            self._scope.pop()

    @property
    def cnot_equivalent(self) -> int:
        """CNOT count with each Toffoli expanded to six CNOTs."""
        return self.cnot_count + 6 * self.toffoli_count

    @property
    def total_gates(self) -> int:
        return (self.x_count + self.h_count + self.ry_count + self.cnot_count
                + self.multi_controlled_count)

    def totals(self) -> dict[str, int]:
        return {key: getattr(self, key) for key in COUNT_FIELDS}

    def delta(self, before: Mapping[str, int]) -> dict[str, int]:
        return {key: getattr(self, key) - before[key] for key in COUNT_FIELDS}

    def copy(self) -> "GateStats":
        out = GateStats(**self.totals())
        out.by_label = {k: dict(v) for k, v in self.by_label.items()}
        return out

    def reset(self) -> None:
        for key in COUNT_FIELDS:
            setattr(self, key, 0)
        self.by_label.clear()

    def as_dict(self) -> dict:
        out = self.totals()
        out["cnot_equivalent"] = self.cnot_equivalent
        out["by_label"] = {k: dict(v) for k, v in sorted(self.by_label.items())}
        return out


@dataclass
class StateVector:
    n_qubits: int
    amps: np.ndarray
    stats: GateStats = field(default_factory=GateStats)
    ledger: NormLedger = field(default_factory=NormLedger)

    def __post_init__(self):
        if self.amps.shape != (1 << self.n_qubits,):
            raise DimensionError(
                f"amplitude array of shape {self.amps.shape} does not match "
                f"{self.n_qubits} qubits")

    @property
    def norm_sq(self) -> float:
        return float(np.vdot(self.amps, self.amps).real)

    def copy(self) -> "StateVector":
        return StateVector(self.n_qubits, self.amps.copy(), self.stats.copy(),
                           self.ledger.copy())

    def check_norm(self, tol: float = 1e-10) -> None:
        err = abs(self.norm_sq - 1.0)
        if not err < tol:
            raise InconsistencyError(f"state norm drifted by {err:.3e} (tolerance {tol:g})")
        if not np.all(np.isfinite(self.amps)):
            raise InconsistencyError("state contains non-finite amplitudes")


def new_state(n_qubits: int, limit: int | None = None) -> StateVector:
    cap = max_qubits() if limit is None else limit
    if not 1 <= n_qubits <= cap:
        raise CapacityError(f"n_qubits must be in [1, {cap}], got {n_qubits}")
    amps = np.zeros(1 << n_qubits, dtype=np.complex128)
    amps[0] = 1.0
    return StateVector(n_qubits, amps)


def basis_state(n_qubits: int, index: int) -> StateVector:
    state = new_state(n_qubits)
    if not 0 <= index < (1 << n_qubits):
        raise AddressError(f"basis index {index} out of range for {n_qubits} qubits")
    state.amps[0] = 0.0
    state.amps[index] = 1.0
    return state


def _check_qubits(qubits: Iterable[int], n: int) -> None:
    for q in qubits:
        if not 0 <= q < n:
            raise AddressError(f"qubit {q} out of range for {n} qubits")


def _apply_kernel(amps: np.ndarray, n: int, gate: GateOp, check_clean: bool = True) -> None:
    # leading axis 0 of the tensor is qubit n-1; trailing axes are batch columns
    psi = amps.reshape((2,) * n + amps.shape[1:])
    index = [slice(None)] * n
    # length-1 slices keep views even when every axis is fixed
    for q, bit in gate.controls:
        index[n - 1 - q] = slice(bit, bit + 1)
    ax = n - 1 - gate.target
    index[ax] = slice(0, 1)
    a = psi[tuple(index)]
    index[ax] = slice(1, 2)
    b = psi[tuple(index)]
    kind = gate.kind
    if kind == "X":
        tmp = a.copy()
        a[...] = b
        b[...] = tmp
    elif kind == "Z":
        b *= -1.0
    elif kind == "H":
        a0 = a.copy()
        a[...] = (a0 + b) * _SQRT1_2
        b[...] = (a0 - b) * _SQRT1_2
    else:
        if gate.clean_target and check_clean:
            leak = float(np.max(np.abs(b))) if b.size else 0.0
            if leak > CLEAN_TOL:
                raise InconsistencyError(
                    f"RY on qubit {gate.target} declared a clean target but the "
                    f"|1> branch holds amplitude {leak:.3e}")
        c = math.cos(gate.angle / 2.0)
        s = math.sin(gate.angle / 2.0)
        a0 = a.copy()
        a[...] = c * a0 - s * b
        b[...] = s * a0 + c * b


def apply(state: StateVector, gate: GateOp) -> StateVector:
    """Apply ``gate`` in place and return ``state``."""
    _check_qubits(gate.qubits, state.n_qubits)
    _apply_kernel(state.amps, state.n_qubits, gate)
    state.stats.record(gate)
    return state


def walsh_hadamard(state: StateVector, qubits: Iterable[int]) -> StateVector:
    qubits = list(qubits)
    if len(set(qubits)) != len(qubits):
        raise ValueError(f"qubits must be distinct, got {qubits}")
    for q in sorted(qubits):
        apply(state, h(q))
    return state


def _pattern_index(pattern: Mapping[int, int], n: int) -> tuple:
    _check_qubits(pattern, n)
    index = [slice(None)] * n
    for q, bit in pattern.items():
        if bit not in (0, 1):
            raise ValueError(f"pattern bit for qubit {q} must be 0 or 1, got {bit}")
        index[n - 1 - q] = int(bit)
    return tuple(index)


def probability_of(state: StateVector, pattern: Mapping[int, int]) -> float:
    """Probability that measuring ``state`` matches ``pattern`` (qubit -> bit)."""
    psi = state.amps.reshape((2,) * state.n_qubits)
    sub = psi[_pattern_index(pattern, state.n_qubits)]
    return float(np.sum(np.abs(sub) ** 2))


def amplitude_of(state: StateVector, pattern: Mapping[int, int]) -> complex:
    """Amplitude of the basis state fully specified by ``pattern``."""
    if len(pattern) != state.n_qubits:
        raise DimensionError("amplitude_of needs a full basis assignment")
    psi = state.amps.reshape((2,) * state.n_qubits)
    return complex(psi[_pattern_index(pattern, state.n_qubits)])


def sample(state: StateVector, shots: int, rng_seed: int) -> dict[int, int]:
    """Measure every qubit ``shots`` times; histogram of basis indices."""
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    probs = np.abs(state.amps) ** 2
    probs = probs / probs.sum()
    counts = np.random.default_rng(rng_seed).multinomial(shots, probs)
    nz = np.flatnonzero(counts)
    return {int(i): int(counts[i]) for i in nz}


def inner_product(a: StateVector, b: StateVector) -> complex:
    if a.n_qubits != b.n_qubits:
        raise DimensionError(f"cannot contract {a.n_qubits}- and {b.n_qubits}-qubit states")
    return complex(np.vdot(a.amps, b.amps))


@dataclass
class Circuit:
    """An ordered gate list on ``n_qubits`` qubits with an optional global sign.

    Gates run in list order.  ``sign`` is a real global phase (+1 or -1).
    """

    n_qubits: int
    gates: list[GateOp] = field(default_factory=list)
    sign: int = 1
    label: str | None = None

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        for g in self.gates:
            _check_qubits(g.qubits, self.n_qubits)

    def append(self, gate: GateOp) -> "Circuit":
        _check_qubits(gate.qubits, self.n_qubits)
        self.gates.append(gate)
        return self

    def extend(self, gates: Iterable[GateOp]) -> "Circuit":
        for g in gates:
            self.append(g)
        return self

    def __add__(self, other: "Circuit") -> "Circuit":
        if other.n_qubits != self.n_qubits:
            raise DimensionError("cannot concatenate circuits of different widths")
        return Circuit(self.n_qubits, self.gates + other.gates, self.sign * other.sign,
                       self.label)

    def __len__(self) -> int:
        return len(self.gates)

    def inverse(self) -> "Circuit":
        gates = [g.inverse() for g in reversed(self.gates)]
        label = f"{self.label}^-1" if self.label else None
        return Circuit(self.n_qubits, gates, self.sign, label)

    def controlled(self, controls) -> "Circuit":
        """Same circuit conditioned on ``controls`` (dict qubit -> polarity)."""
        ctrl = _controls_tuple(controls)
        gates = [g.with_controls(ctrl) for g in self.gates]
        if self.sign == -1:
            if not ctrl:
                return Circuit(self.n_qubits, gates, -1, self.label)
            # a global -1 becomes a phase on the control subspace
            (tq, tbit), rest = ctrl[-1], ctrl[:-1]
            flip = [x(tq)] if tbit == 0 else []
            gates += flip + [z(tq, rest)] + flip
        return Circuit(self.n_qubits, gates, 1, self.label)

    def widened(self, n_qubits: int) -> "Circuit":
        if n_qubits < self.n_qubits:
            raise DimensionError("cannot narrow a circuit")
        return Circuit(n_qubits, list(self.gates), self.sign, self.label)

    def apply(self, state: StateVector) -> StateVector:
        if state.n_qubits != self.n_qubits:
            raise DimensionError(
                f"circuit on {self.n_qubits} qubits applied to a {state.n_qubits}-qubit state")
        with state.stats.scope(self.label):
            for g in self.gates:
                apply(state, g)
        if self.sign == -1:
            state.amps *= -1.0
        return state

    def stats(self) -> GateStats:
        out = GateStats()
        with out.scope(self.label):
            for g in self.gates:
                out.record(g)
        return out

    def unitary(self) -> np.ndarray:
        """Dense matrix of the circuit (column ``k`` is the image of basis state ``k``)."""
        dim = 1 << self.n_qubits
        mat = np.eye(dim, dtype=np.complex128)
        for g in self.gates:
            # clean-target claims hold for the intended input only, not every column
            _apply_kernel(mat, self.n_qubits, g, check_clean=False)
        return mat * self.sign
