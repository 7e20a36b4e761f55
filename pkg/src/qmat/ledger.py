"""Normalization ledger.

Every amplitude-level operation that rescales the stored data (a Hadamard
combining two rows, a Walsh-Hadamard reduction, the infinity-norm used when
loading) appends an entry here, so a value read back from the state vector can
be converted to its classical counterpart without guessing constants.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class LedgerEntry:
    op: str
    factor: float = 1.0
    note: str = ""


@dataclass
class NormLedger:
    """Run-level record of scalar factors.

    ``factor`` is the product of amplitude factors (1/sqrt(2) per combining
    Hadamard and so on); ``data_norm`` is the product of the classical
    normalizations applied before loading.  For a value ``v`` read with
    :func:`qmat.matrix.read_matrix`, the classical quantity is
    ``v * data_norm / factor``.
    """

    entries: list[LedgerEntry] = field(default_factory=list)
    data_norm: float = 1.0

    def record(self, op: str, factor: float = 1.0, note: str = "") -> None:
        if not math.isfinite(factor) or factor == 0.0:
            raise ValueError(f"ledger factor must be finite and nonzero, got {factor}")
        self.entries.append(LedgerEntry(op, float(factor), note))

    def record_norm(self, op: str, norm: float) -> None:
        self.data_norm *= float(norm)
        self.entries.append(LedgerEntry(op, 1.0, f"data scaled by 1/{norm:.17g}"))

    @property
    def factor(self) -> float:
        return math.prod(e.factor for e in self.entries)

    def to_classical(self, values):
        return np.asarray(values) * (self.data_norm / self.factor)

    def copy(self) -> "NormLedger":
        return NormLedger(list(self.entries), self.data_norm)

    def as_dict(self) -> dict:
        return {
            "factor": self.factor,
            "data_norm": self.data_norm,
            "entries": [
                {"op": e.op, "factor": e.factor, "note": e.note} for e in self.entries
            ],
        }
