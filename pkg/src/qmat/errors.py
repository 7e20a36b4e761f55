"""Exception hierarchy shared by every qmat module."""


class QMatError(Exception):
    """Base class for all qmat errors."""


class CapacityError(QMatError, ValueError):
    """Requested register is larger than the simulator allows."""


class AddressError(QMatError, IndexError):
    """A qubit index, row or column address is out of range."""


class DimensionError(QMatError, ValueError):
    """Shapes of states, layouts or arrays do not agree."""


class RangeError(QMatError, ValueError):
    """A numeric parameter lies outside its admissible interval."""


class InconsistencyError(QMatError, RuntimeError):
    """The simulation violated one of its own invariants (norm, ledger, clean ancilla)."""
