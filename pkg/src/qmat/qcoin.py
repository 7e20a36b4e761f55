"""Amplitude read-out by repeated sampling and Grover zoom-in.

The procedure estimates ``a = |<chi|Psi>|`` for a state prepared from the
ground state.  Stage 0 samples the marked pattern directly and turns the hit
frequency into a Chebyshev interval.  Each further stage shifts the amplitude
by the interval's lower bound (so the unknown part is small and non-negative),
amplifies it with ``k`` Grover iterations, samples again, and maps the new
probability interval back to an amplitude interval.
"""
from __future__ import annotations

import dataclasses
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, InconsistencyError, RangeError
from .matrix import ClassicalMatrix, layout_for, pointwise_circuit, uniform_circuit
from .sim import Circuit, GateOp, GateStats, StateVector, h, new_state, probability_of, ry, x, z

AMPLITUDE_FLOOR = 0.05
PROB_TOL = 1e-9
UNITARY_MAX_QUBITS = 10


def _full_pattern(pattern, n_qubits: int, what: str) -> dict[int, int]:
    pat = {int(q): int(b) for q, b in dict(pattern).items()}
    if sorted(pat) != list(range(n_qubits)):
        raise DimensionError(f"{what} must assign every one of the {n_qubits} qubits")
    if any(b not in (0, 1) for b in pat.values()):
        raise ValueError(f"{what} bits must be 0 or 1")
    return pat


@dataclass
class Preparation:
    """A circuit that starts from the ground state and marks pattern ``chi``.

    ``aux`` is the qubit flipped in the reference state ``sigma`` and ``unit``
    converts an amplitude of ``chi`` into the classical quantity of interest.
    """

    circuit: Circuit
    chi: dict[int, int]
    aux: int = 0
    unit: float = 1.0
    label: str = "prepare"

    def __post_init__(self):
        self.chi = _full_pattern(self.chi, self.circuit.n_qubits, "chi pattern")

    @property
    def n_qubits(self) -> int:
        return self.circuit.n_qubits

    @property
    def sigma(self) -> dict[int, int]:
        return {q: int(q == self.aux) for q in range(self.n_qubits)}

    def from_sigma(self) -> Circuit:
        """``O`` with ``O|sigma> = |Psi>``: undo the flag flip, then prepare."""
        gates = [x(self.aux)] + [_unclean(g) for g in self.circuit.gates]
        return Circuit(self.n_qubits, gates, self.circuit.sign, self.label)

    def run(self) -> StateVector:
        return self.circuit.apply(new_state(self.n_qubits))

    def amplitude(self) -> float:
        """Exact signed overlap ``<chi|Psi>`` (simulation only)."""
        state = self.run()
        idx = sum(b << q for q, b in self.chi.items())
        return float(state.amps[idx].real)


def _unclean(g: GateOp) -> GateOp:
    return dataclasses.replace(g, clean_target=False) if g.clean_target else g


def amplitude_preparation(a: float) -> Preparation:
    """One qubit with amplitude ``a`` on ``|0>``."""
    if not -1.0 <= a <= 1.0:
        raise RangeError(f"amplitude must lie in [-1, 1], got {a}")
    circ = Circuit(1, [ry(0, 2.0 * math.acos(a))], label="prepare")
    return Preparation(circ, {0: 0}, aux=0)


def matrix_entry_preparation(f, i: int, j: int) -> Preparation:
    """Load ``f`` as a quantum matrix and mark entry ``(i, j)``.

    The amplitude is ``f_ij / (||f||_inf sqrt(IJ))``; ``unit`` undoes both factors.
    """
    m = f if isinstance(f, ClassicalMatrix) else ClassicalMatrix(f)
    layout = layout_for(m)
    circ = uniform_circuit(layout) + pointwise_circuit(layout, m)
    circ.label = "prepare"
    unit = m.scale * math.sqrt(layout.I * layout.J)
    return Preparation(circ, layout.entry_pattern(i, j), aux=layout.aux, unit=unit)


@dataclass
class ShiftedPreparation:
    """Preparation of ``(a - s)/2`` on ``diff`` with ``(a + s)/2`` on ``sum``."""

    base: Preparation
    s: float
    circuit: Circuit
    sectors: dict[str, dict[int, int]]
    scale: float = 0.5

    def preparation(self, sector: str = "diff") -> Preparation:
        return Preparation(self.circuit, self.sectors[sector], self.base.aux,
                           self.base.unit / self.scale, "prepare_shifted")


def shifted_prepare(prep: Preparation, s: float) -> ShiftedPreparation:
    """Combine ``prep`` with a constant ``s`` through one extra qubit.

    The new qubit ``r`` is put in superposition; on ``r = 0`` the original
    circuit runs, on ``r = 1`` a circuit that places ``s`` on ``chi``.  A final
    Hadamard on ``r`` leaves the difference on ``r = 1``.
    """
    if not -1.0 <= s <= 1.0:
        raise RangeError(f"shift must lie in [-1, 1], got {s}")
    n = prep.n_qubits
    r = n
    circ = Circuit(n + 1, [h(r)], label="prepare_shifted")
    circ.extend(g.with_controls({r: 0}) for g in prep.circuit.gates)
    if prep.circuit.sign == -1:
        circ.extend([x(r), z(r), x(r)])
    const = [x(q, {r: 1}) for q, b in prep.chi.items() if q != prep.aux and b == 1]
    if prep.chi[prep.aux] == 0:
        angle = 2.0 * math.acos(s)
    else:
        angle = 2.0 * math.asin(s)
    const.append(ry(prep.aux, angle, {r: 1}, clean_target=True))
    circ.extend(const)
    circ.append(h(r))
    sectors = {"diff": {**prep.chi, r: 1}, "sum": {**prep.chi, r: 0}}
    return ShiftedPreparation(prep, float(s), circ, sectors)


def reflection_gates(pattern: dict[int, int]) -> list[GateOp]:
    """``1 - 2|p><p|`` as a multi-controlled Z wrapped in X masks."""
    t = max(pattern)
    ctrl = {q: b for q, b in pattern.items() if q != t}
    flip = [x(t)] if pattern[t] == 0 else []
    return flip + [z(t, ctrl)] + flip


def grover_operator(prep: Preparation, chi=None, sigma=None) -> Circuit:
    """Grover iterate whose powers rotate ``<chi|Psi>`` to ``sin((2k+1) theta)``.

    Gates run as ``R_chi``, ``O^-1``, ``R_sigma``, ``O`` with ``O|sigma> = |Psi>``,
    followed by a global sign of -1 that makes the overlap come out positive.
    """
    n = prep.n_qubits
    chi = _full_pattern(prep.chi if chi is None else chi, n, "chi pattern")
    sigma = _full_pattern(prep.sigma if sigma is None else sigma, n, "sigma pattern")
    o = prep.from_sigma()
    gates = reflection_gates(chi) + o.inverse().gates + reflection_gates(sigma) + o.gates
    return Circuit(n, gates, sign=-1, label="grover")


def apply_power(q: Circuit, state: StateVector, k: int) -> StateVector:
    """Apply ``q`` ``k`` times; small registers use a dense matrix power."""
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    if k == 0:
        return state
    if q.n_qubits <= UNITARY_MAX_QUBITS:
        u = np.linalg.matrix_power(q.unitary(), k)
        state.amps[:] = u @ state.amps
        state.stats.merge(q.stats(), k)
    else:
        for _ in range(k):
            q.apply(state)
    return state


def choose_k(theta: float) -> int:
    """Largest ``k >= 0`` with ``(2k + 1) theta <= pi/2``."""
    if not theta > 0.0:
        raise RangeError(f"theta must be positive, got {theta}")
    if theta >= math.pi / 2:
        return 0
    return max(0, math.floor((math.pi / (2.0 * theta) - 1.0) / 2.0 + 1e-12))


def amplification_factor(theta: float, k: int) -> float:
    """``sin^2((2k+1) theta) / sin^2(theta)``, with its limit at ``theta = 0``."""
    kk = 2 * k + 1
    st = math.sin(theta)
    if st == 0.0:
        return float(kk * kk)
    return math.sin(kk * theta) ** 2 / st ** 2


@dataclass(frozen=True)
class ConfidenceInterval:
    """Amplitude interval ``[lower, upper]`` clamped to [0, 1].

    ``mu_tilde`` and ``delta`` are the centre and half-width before clamping.
    """

    mu_tilde: float
    delta: float
    shots: int
    failure_prob: float
    lower: float = field(default=math.nan)
    upper: float = field(default=math.nan)

    def __post_init__(self):
        if not self.delta > 0.0:
            raise ValueError(f"delta must be positive, got {self.delta}")
        if math.isnan(self.lower):
            object.__setattr__(self, "lower", min(1.0, max(0.0, self.mu_tilde - self.delta)))
        if math.isnan(self.upper):
            object.__setattr__(self, "upper", min(1.0, max(0.0, self.mu_tilde + self.delta)))

    @classmethod
    def from_bounds(cls, lower: float, upper: float, shots: int,
                    failure_prob: float) -> "ConfidenceInterval":
        lo = min(1.0, max(0.0, lower))
        hi = min(1.0, max(0.0, upper))
        mid = 0.5 * (lo + hi)
        half = max(0.5 * (hi - lo), 1e-300)
        return cls(mid, half, shots, failure_prob, lo, hi)

    @property
    def half_width(self) -> float:
        return 0.5 * (self.upper - self.lower)

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.upper + self.lower)

    def contains(self, value: float) -> bool:
        return self.lower <= value <= self.upper

    def intersect(self, other: "ConfidenceInterval") -> "ConfidenceInterval":
        lo, hi = max(self.lower, other.lower), min(self.upper, other.upper)
        if lo > hi:
            return other
        return ConfidenceInterval.from_bounds(lo, hi, other.shots, other.failure_prob)

    def as_dict(self) -> dict:
        return {
            "mu_tilde": self.mu_tilde,
            "delta": self.delta,
            "lower": self.lower,
            "upper": self.upper,
            "half_width": self.half_width,
            "shots": self.shots,
            "failure_prob": self.failure_prob,
        }


def chebyshev_halfwidth(shots: int, failure_prob: float) -> float:
    """Probability half-width from Chebyshev with the worst-case variance 1/4."""
    return math.sqrt(1.0 / (4.0 * shots * failure_prob))


def interval_from_counts(counts: int, shots: int, failure_prob: float) -> ConfidenceInterval:
    delta_p = chebyshev_halfwidth(shots, failure_prob)
    if counts == 0:
        # p <= delta_P with the stated confidence, hence a <= sqrt(delta_P)
        return ConfidenceInterval(0.0, math.sqrt(delta_p), shots, failure_prob,
                                  0.0, min(1.0, math.sqrt(delta_p)))
    mu = math.sqrt(counts / shots)
    delta = delta_p / (2.0 * max(mu, AMPLITUDE_FLOOR))
    return ConfidenceInterval(mu, delta, shots, failure_prob)


def _check_state(state: StateVector) -> None:
    state.check_norm(1e-10)


def unamplified_estimate(prep: Preparation, shots: int, rng, failure_prob: float = 0.05,
                         chi=None) -> tuple[ConfidenceInterval, int]:
    """Sample the marked pattern ``shots`` times; returns the interval and the hit count.

    ``rng`` is a numpy ``Generator`` or an integer seed.
    """
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    if not 0.0 < failure_prob < 1.0:
        raise ValueError(f"failure_prob must lie in (0, 1), got {failure_prob}")
    rng = np.random.default_rng(rng)
    state = prep.run()
    _check_state(state)
    p = probability_of(state, prep.chi if chi is None else chi)
    counts = int(rng.binomial(shots, min(1.0, p)))
    return interval_from_counts(counts, shots, failure_prob), counts


@dataclass(frozen=True)
class QCoinConfig:
    shots_per_stage: int = 10_000
    stages: int = 3
    failure_prob: float = 0.05
    seed: int = 0
    max_k: int = 10_000_000
    sign_probe: bool = True

    def __post_init__(self):
        if self.shots_per_stage < 1:
            raise ValueError("shots_per_stage must be >= 1")
        if self.stages < 0:
            raise ValueError("stages must be >= 0")
        if not 0.0 < self.failure_prob < 1.0:
            raise ValueError("failure_prob must lie in (0, 1)")
        if self.max_k < 0:
            raise ValueError("max_k must be >= 0")

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass
class GroverStage:
    k: int
    theta: float
    gamma: float
    theta_planned: float
    gamma_planned: float
    shift: float
    sector: str
    shots: int
    counts: int
    p_hat: float
    prob_halfwidth: float
    interval_before: ConfidenceInterval
    interval_after: ConfidenceInterval

    @property
    def gamma_realized(self) -> float:
        return self.gamma

    def as_dict(self) -> dict:
        return {
            "k": self.k,
            "theta": self.theta,
            "gamma_planned": self.gamma_planned,
            "gamma_realized": self.gamma,
            "theta_planned": self.theta_planned,
            "shift": self.shift,
            "sector": self.sector,
            "shots": self.shots,
            "counts": self.counts,
            "p_hat": self.p_hat,
            "prob_halfwidth": self.prob_halfwidth,
            "mu_tilde": self.interval_after.mu_tilde,
            "delta": self.interval_after.half_width,
            "lower": self.interval_after.lower,
            "upper": self.interval_after.upper,
        }


@dataclass
class EstimationTrace:
    initial: ConfidenceInterval
    initial_counts: int
    stages: list[GroverStage] = field(default_factory=list)
    unit: float = 1.0
    config: QCoinConfig | None = None
    gate_stats: dict = field(default_factory=dict)

    @property
    def final(self) -> ConfidenceInterval:
        return self.stages[-1].interval_after if self.stages else self.initial

    @property
    def estimate(self) -> float:
        return self.final.midpoint

    @property
    def half_width(self) -> float:
        return self.final.half_width

    def half_widths(self) -> list[float]:
        return [self.initial.half_width] + [st.interval_after.half_width for st in self.stages]

    def to_dict(self) -> dict:
        rows = [{
            "stage": 0,
            "k": 0,
            "shots": self.initial.shots,
            "counts": self.initial_counts,
            "mu_tilde": self.initial.mu_tilde,
            "delta": self.initial.delta,
            "lower": self.initial.lower,
            "upper": self.initial.upper,
            "gamma_planned": 1.0,
            "gamma_realized": 1.0,
        }]
        for n, st in enumerate(self.stages, start=1):
            rows.append({"stage": n, **st.as_dict()})
        return {
            "config": self.config.as_dict() if self.config else None,
            "stages": rows,
            "estimate": self.estimate,
            "half_width": self.half_width,
            "lower": self.final.lower,
            "upper": self.final.upper,
            "unit": self.unit,
            "value": self.estimate * self.unit,
            "value_half_width": self.half_width * self.unit,
            "gate_stats": self.gate_stats,
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("stage,half_width\n")
        for n, hw in enumerate(self.half_widths()):
            buf.write(f"{n},{hw:.17g}\n")
        return buf.getvalue()


def _probe_sector(shifted: ShiftedPreparation, shots: int, rng) -> str:
    """Pick the sector holding ``|a| - s`` rather than ``|a| + s``.

    Both sectors are scored with the same uniforms, so swapping their
    probabilities (a sign flip of the amplitude) swaps the two counts exactly.
    """
    state = shifted.preparation("diff").run()
    p_diff = probability_of(state, shifted.sectors["diff"])
    p_sum = probability_of(state, shifted.sectors["sum"])
    u = rng.random(shots)
    c_diff = int(np.count_nonzero(u < p_diff))
    c_sum = int(np.count_nonzero(u < p_sum))
    return "sum" if c_sum < c_diff else "diff"


def _amplified_probability(prep: Preparation, q: Circuit, k: int, stats) -> float:
    state = prep.run()
    apply_power(q, state, k)
    _check_state(state)
    stats.merge(state.stats)
    p = probability_of(state, prep.chi)
    if p > 1.0 + PROB_TOL:
        raise InconsistencyError(f"amplified probability {p:.6g} exceeds 1")
    return min(1.0, p)


def qcoin_estimate(prep: Preparation, config: QCoinConfig = QCoinConfig()) -> EstimationTrace:
    """Run stage 0 plus ``config.stages`` Grover-amplified stages.

    Every amplified stage shifts by the current lower bound ``s``, so the
    marked amplitude becomes ``b = (a - s)/2`` with ``b`` in ``[0, b_hi]``.
    ``k`` is planned from ``b_hi`` so the rotated angle stays within pi/2 and
    the measured probability inverts uniquely.
    """
    seq = np.random.SeedSequence(config.seed)
    main_seq, probe_seq = seq.spawn(2)
    rng = np.random.default_rng(main_seq)
    probe_rng = np.random.default_rng(probe_seq)
    stats = GateStats()
    shots, alpha = config.shots_per_stage, config.failure_prob

    interval, counts0 = unamplified_estimate(prep, shots, rng, alpha)
    trace = EstimationTrace(interval, counts0, unit=prep.unit, config=config)
    for _ in range(config.stages):
        s = interval.lower
        shifted = shifted_prepare(prep, s)
        sector = "diff"
        if config.sign_probe and s > 0.0:
            sector = _probe_sector(shifted, shots, probe_rng)
        sp = shifted.preparation(sector)
        b_hi = max((interval.upper - s) / 2.0, 0.0)
        theta_hi = math.asin(min(1.0, b_hi))
        k = 0 if theta_hi <= 0.0 else min(choose_k(theta_hi), config.max_k)
        kk = 2 * k + 1
        theta_planned = math.asin(min(1.0, b_hi / 2.0))
        gamma_planned = amplification_factor(theta_planned, k)

        q = grover_operator(sp)
        p = _amplified_probability(sp, q, k, stats)
        hits = int(rng.binomial(shots, p))
        p_hat = hits / shots
        delta_p = chebyshev_halfwidth(shots, alpha)
        theta_hat = math.asin(math.sqrt(p_hat)) / kk
        gamma = amplification_factor(theta_hat, k)

        p_lo, p_hi = max(0.0, p_hat - delta_p), min(1.0, p_hat + delta_p)
        th_lo = math.asin(math.sqrt(p_lo)) / kk
        th_hi = math.asin(math.sqrt(p_hi)) / kk
        new = ConfidenceInterval.from_bounds(
            s + 2.0 * math.sin(th_lo), s + 2.0 * math.sin(th_hi), shots, alpha)
        after = interval.intersect(new)
        trace.stages.append(GroverStage(
            k=k, theta=theta_hat, gamma=gamma, theta_planned=theta_planned,
            gamma_planned=gamma_planned, shift=s, sector=sector, shots=shots,
            counts=hits, p_hat=p_hat, prob_halfwidth=delta_p / gamma,
            interval_before=interval, interval_after=after,
        ))
        interval = after
    trace.gate_stats = stats.as_dict()
    return trace


def estimate_many(prep: Preparation, config: QCoinConfig, repeats: int,
                  workers: int = 1) -> list[EstimationTrace]:
    """Independent runs with seeds ``seed, seed + 1, ...``, returned in seed order."""
    configs = [dataclasses.replace(config, seed=config.seed + n) for n in range(repeats)]
    if workers <= 1 or repeats <= 1:
        return [qcoin_estimate(prep, c) for c in configs]
    from concurrent.futures import ProcessPoolExecutor

    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(qcoin_estimate, [prep] * repeats, configs))
