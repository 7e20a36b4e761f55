import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qmat.errors import DimensionError, RangeError
from qmat.qcoin import (
    ConfidenceInterval,
    QCoinConfig,
    amplification_factor,
    amplitude_preparation,
    apply_power,
    choose_k,
    chebyshev_halfwidth,
    estimate_many,
    grover_operator,
    matrix_entry_preparation,
    qcoin_estimate,
    shifted_prepare,
    unamplified_estimate,
)
from qmat.sim import inner_product, new_state, probability_of


def overlap_after(prep, k):
    state = prep.run()
    apply_power(grover_operator(prep), state, k)
    idx = sum(b << q for q, b in prep.chi.items())
    return state.amps[idx].real


def test_choose_k():
    assert choose_k(math.pi / 2) == 0
    assert choose_k(math.pi / 6) == 1
    assert choose_k(0.05) == 15
    with pytest.raises(RangeError):
        choose_k(0.0)


@settings(max_examples=200, deadline=None)
@given(st.floats(1e-6, math.pi / 2))
def test_choose_k_is_largest_admissible(theta):
    k = choose_k(theta)
    assert (2 * k + 1) * theta <= math.pi / 2 + 1e-9
    assert (2 * k + 3) * theta > math.pi / 2 - 1e-9


def test_grover_examples():
    prep = amplitude_preparation(math.sin(math.pi / 6))
    assert overlap_after(prep, 0) == pytest.approx(0.5)
    assert overlap_after(prep, 1) == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_grover_on_matrix_entries(seed):
    rng = np.random.default_rng(seed)
    prep = matrix_entry_preparation(rng.uniform(-1, 1, (2, 4)), int(rng.integers(2)),
                                    int(rng.integers(4)))
    a = prep.amplitude()
    theta = math.asin(a)
    for k in range(6):
        assert abs(overlap_after(prep, k) - math.sin((2 * k + 1) * theta)) < 1e-9


def test_grover_matrix_power_matches_gate_loop():
    prep = amplitude_preparation(0.37)
    q = grover_operator(prep)
    a, b = prep.run(), prep.run()
    apply_power(q, a, 5)
    for _ in range(5):
        q.apply(b)
    assert np.allclose(a.amps, b.amps, atol=1e-12)
    assert a.stats.totals() == b.stats.totals()


def test_grover_rejects_partial_patterns():
    prep = matrix_entry_preparation(np.ones((2, 2)), 0, 0)
    with pytest.raises(DimensionError):
        grover_operator(prep, chi={0: 0})


def test_amplification_factor():
    theta = 0.1
    assert amplification_factor(theta, 3) == pytest.approx(math.sin(0.7) ** 2 / math.sin(0.1) ** 2,
                                                           rel=1e-14)
    assert amplification_factor(0.0, 4) == 81.0
    assert amplification_factor(0.3, 0) == pytest.approx(1.0)


def test_shifted_prepare():
    prep = amplitude_preparation(0.5)
    sp = shifted_prepare(prep, 0.4)
    state = sp.preparation().run()
    idx = lambda pat: sum(b << q for q, b in pat.items())  # noqa: E731
    assert state.amps[idx(sp.sectors["diff"])].real == pytest.approx(0.05)
    assert state.amps[idx(sp.sectors["sum"])].real == pytest.approx(0.45)
    sp0 = shifted_prepare(prep, 0.0)
    assert sp0.preparation().amplitude() == pytest.approx(0.25)
    with pytest.raises(RangeError):
        shifted_prepare(prep, 1.5)


def test_shifted_prepare_on_matrix():
    f = np.array([[0.2, -0.6], [0.9, 0.4]])
    prep = matrix_entry_preparation(f, 1, 0)
    a = prep.amplitude()
    sp = shifted_prepare(prep, 0.3)
    assert sp.preparation("diff").amplitude() == pytest.approx((a - 0.3) / 2, abs=1e-12)
    assert sp.preparation("sum").amplitude() == pytest.approx((a + 0.3) / 2, abs=1e-12)


def test_unamplified_examples():
    ci, counts = unamplified_estimate(amplitude_preparation(1.0), 1000, 1)
    assert counts == 1000 and ci.mu_tilde == 1.0
    ci, counts = unamplified_estimate(amplitude_preparation(0.0), 1000, 1)
    assert counts == 0 and ci.lower == 0.0 and ci.upper > 0
    with pytest.raises(ValueError):
        unamplified_estimate(amplitude_preparation(0.5), 0, 1)


def test_unamplified_coverage():
    prep = amplitude_preparation(0.5)
    rng = np.random.default_rng(11)
    hits = sum(abs(unamplified_estimate(prep, 10_000, rng)[0].mu_tilde - 0.5) < 0.05
               for _ in range(200))
    assert hits >= 190


def test_interval_halfwidth_formula():
    ci, _ = unamplified_estimate(amplitude_preparation(0.5), 10_000, 3, 0.05)
    dp = chebyshev_halfwidth(10_000, 0.05)
    assert ci.delta == pytest.approx(dp / (2 * max(ci.mu_tilde, 0.05)))
    with pytest.raises(ValueError):
        ConfidenceInterval(0.5, 0.0, 10, 0.05)


def test_stages_zero_and_amplitude_zero():
    tr = qcoin_estimate(amplitude_preparation(0.3), QCoinConfig(stages=0, seed=1))
    assert tr.stages == [] and tr.final is tr.initial
    tr = qcoin_estimate(amplitude_preparation(0.0), QCoinConfig(seed=2))
    assert tr.initial.contains(0.0)
    assert all(st.interval_after.contains(0.0) for st in tr.stages)


def test_trace_invariants():
    tr = qcoin_estimate(amplitude_preparation(0.3), QCoinConfig(seed=7))
    widths = tr.half_widths()
    assert all(b < a for a, b in zip(widths, widths[1:]))
    assert tr.half_width < widths[0] / 4
    for stage in tr.stages:
        assert (2 * stage.k + 1) * stage.theta_planned <= math.pi / 2
        assert stage.gamma == pytest.approx(amplification_factor(stage.theta, stage.k), rel=1e-12)
        assert stage.prob_halfwidth == pytest.approx(
            chebyshev_halfwidth(stage.shots, 0.05) / stage.gamma, rel=1e-15)
    d = tr.to_dict()
    assert [row["stage"] for row in d["stages"]] == [0, 1, 2, 3]
    assert tr.to_csv().splitlines()[0] == "stage,half_width"


def numeric_view(trace):
    """Trace dict without the labels that name which sector was measured."""
    d = trace.to_dict()
    d.pop("gate_stats")
    for row in d["stages"]:
        row.pop("sector", None)
    return d


def test_sign_flip_invariance():
    for seed in range(10):
        a = qcoin_estimate(amplitude_preparation(0.3), QCoinConfig(seed=seed))
        b = qcoin_estimate(amplitude_preparation(-0.3), QCoinConfig(seed=seed))
        assert numeric_view(a) == numeric_view(b)
        assert {st.sector for st in b.stages} == {"sum"}


def test_matrix_entry_estimate_units():
    f = np.array([[0.5, -0.25], [1.0, 0.75]])
    prep = matrix_entry_preparation(f, 0, 1)
    tr = qcoin_estimate(prep, QCoinConfig(seed=4))
    assert tr.final.contains(abs(prep.amplitude()))
    assert tr.estimate * tr.unit == pytest.approx(0.25, abs=1e-4)


def test_estimate_many_is_ordered_and_parallel_safe():
    prep = amplitude_preparation(0.4)
    cfg = QCoinConfig(shots_per_stage=2000, stages=2, seed=10)
    serial = [t.to_dict() for t in estimate_many(prep, cfg, 3, workers=1)]
    parallel = [t.to_dict() for t in estimate_many(prep, cfg, 3, workers=2)]
    assert serial == parallel
    assert serial[1] == qcoin_estimate(prep, QCoinConfig(2000, 2, 0.05, 11)).to_dict()


def test_config_validation():
    with pytest.raises(ValueError):
        QCoinConfig(shots_per_stage=0)
    with pytest.raises(ValueError):
        QCoinConfig(failure_prob=1.0)
    with pytest.raises(ValueError):
        QCoinConfig(stages=-1)


def test_overlap_definition():
    prep = amplitude_preparation(0.6)
    chi = new_state(1)
    assert inner_product(chi, prep.run()).real == pytest.approx(0.6)
    assert probability_of(prep.run(), prep.chi) == pytest.approx(0.36)
