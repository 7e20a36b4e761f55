import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qmat import arith, reference
from qmat.arith import Selector
from qmat.errors import DimensionError, RangeError
from qmat.matrix import RegisterLayout, init_uniform, load_pointwise, read_matrix
from qmat.oracle import oracle_from_array
from qmat.sim import apply


def loaded(m, mul=False):
    m = np.atleast_2d(np.asarray(m, dtype=float))
    lay = RegisterLayout.standard(int(math.log2(m.shape[0])), int(math.log2(m.shape[1])), mul=mul)
    s = load_pointwise(init_uniform(lay), lay, m)
    return s, lay, read_matrix(s, lay).values


def random_matrix(rng, shapes=(1, 2, 4, 8)):
    return rng.uniform(-1, 1, (rng.choice(shapes), rng.choice(shapes)))


def test_reverse_row_and_whole():
    s, lay, before = loaded([[0.1, 0.2, 0.3, 0.4], [0.5, 0.6, 0.7, 0.8]])
    arith.reverse(s, lay, Selector(row=0))
    got = read_matrix(s, lay).values
    assert np.allclose(got[0], before[0, ::-1], atol=1e-12)
    assert np.array_equal(got[1], before[1])
    s, lay, before = loaded([[0.1, 0.2], [0.3, 0.4]])
    arith.reverse(s, lay)
    assert np.allclose(read_matrix(s, lay).values, before[::-1, ::-1], atol=1e-12)
    with pytest.raises(ValueError):
        arith.reverse(s, lay, Selector(row=0, col=0))


# each state after one gate of the pivot procedure for J = 8, pos = 0
PIVOT_TRACE = [
    (0, 1, 2, 7, 4, 5, 6, 3),
    (4, 5, 6, 3, 0, 1, 2, 7),
    (4, 5, 6, 3, 0, 7, 2, 1),
    (6, 3, 4, 5, 2, 1, 0, 7),
    (6, 3, 4, 5, 2, 1, 7, 0),
    (4, 5, 6, 3, 7, 0, 2, 1),
    (4, 5, 6, 3, 7, 1, 2, 0),
    (7, 1, 2, 0, 4, 5, 6, 3),
    (7, 1, 2, 3, 4, 5, 6, 0),
]


def test_pivot_intermediate_states():
    f = np.linspace(-0.8, 0.9, 8)
    s, lay, before = loaded(f)
    gates = arith.pivot_gates(lay, 0)
    assert len(gates) == len(PIVOT_TRACE)
    for g, want in zip(gates, PIVOT_TRACE):
        apply(s, g)
        assert np.allclose(read_matrix(s, lay).values[0], before[0, list(want)], atol=1e-12)


@pytest.mark.parametrize("n_j", [1, 2, 3, 4])
def test_pivot_every_position(n_j):
    rng = np.random.default_rng(n_j)
    J = 1 << n_j
    for pos in range(J):
        s, lay, before = loaded(rng.uniform(-1, 1, (2, J)))
        arith.swap_with_pivot(s, lay, pos, row=1)
        want = reference.swap_columns(before, pos, J - 1, row=1)
        assert np.max(np.abs(read_matrix(s, lay).values - want)) < 1e-12
    assert arith.pivot_gates(lay, J - 1) == []


def test_swap_elements():
    s, lay, before = loaded([0.1, 0.2, 0.3, 0.4])
    arith.swap_elements(s, lay, 0, 2)
    assert np.allclose(read_matrix(s, lay).values[0], before[0, [2, 1, 0, 3]], atol=1e-12)
    a = arith.swap_elements_circuit(lay, 1, 3).unitary()
    b = arith.swap_elements_circuit(lay, 3, 1).unitary()
    assert np.allclose(a, b)
    assert len(arith.swap_elements_circuit(lay, 2, 2)) == 0
    for i in range(4):
        for j in range(4):
            s, lay, before = loaded([0.1, 0.2, 0.3, 0.4])
            arith.swap_elements(s, lay, i, j)
            want = reference.swap_columns(before, i, j)
            assert np.max(np.abs(read_matrix(s, lay).values - want)) < 1e-12


def test_cyclic_shift():
    s, lay, before = loaded([0.1, 0.2, 0.3, 0.4])
    arith.cyclic_shift(s, lay, "left")
    assert np.allclose(read_matrix(s, lay).values[0], before[0, [1, 2, 3, 0]], atol=1e-12)
    arith.cyclic_shift(s, lay, "right")
    assert np.allclose(read_matrix(s, lay).values, before, atol=1e-12)
    for _ in range(4):
        arith.cyclic_shift(s, lay, "left")
    assert np.allclose(read_matrix(s, lay).values, before, atol=1e-12)
    with pytest.raises(ValueError):
        arith.cyclic_shift(s, lay, "up")


def test_pairwise_sum_diff():
    s, lay, before = loaded([[0.5, 0.5], [0.5, 0.5]])
    arith.pairwise_sum_diff(s, lay)
    got = read_matrix(s, lay).values
    assert np.allclose(got, [[math.sqrt(2), math.sqrt(2)], [0, 0]], atol=1e-12)
    assert s.ledger.factor == pytest.approx(1 / math.sqrt(2))
    s, lay, _ = loaded([[1, 0], [0, 1]])
    arith.pairwise_sum_diff(s, lay)
    r2 = 1 / math.sqrt(2)
    assert np.allclose(read_matrix(s, lay).values, [[r2, r2], [r2, -r2]], atol=1e-12)
    arith.pairwise_sum_diff(s, lay)
    assert np.allclose(read_matrix(s, lay).values, [[1, 0], [0, 1]], atol=1e-12)
    s, lay, _ = loaded([0.3, 0.4])
    with pytest.raises(DimensionError):
        arith.pairwise_sum_diff(s, lay)


def test_reduce_rows_examples():
    s, lay, _ = loaded([1, 1, 1, 1])
    arith.reduce_rows(s, lay)
    assert read_matrix(s, lay).values[0, 0] == pytest.approx(2.0)
    assert s.ledger.to_classical(read_matrix(s, lay).values)[0, 0] == pytest.approx(4.0)
    s, lay, _ = loaded([1, -1])
    arith.reduce_rows(s, lay)
    assert abs(read_matrix(s, lay).values[0, 0]) < 1e-12


def test_scale_by_constant():
    rng = np.random.default_rng(3)
    m = rng.uniform(-1, 1, (4, 4))
    for alpha in (1.0, 0.0, 0.75):
        s, lay, before = loaded(m, mul=True)
        arith.scale_by_constant(s, lay, alpha, Selector(row=0))
        got = read_matrix(s, lay).values
        assert np.max(np.abs(got - reference.scale(before, alpha, Selector(row=0)))) < 1e-10
        assert np.array_equal(got[1:], before[1:])
    with pytest.raises(RangeError):
        arith.scale_by_constant(s, lay, 1.2)
    s, lay, _ = loaded(m)
    with pytest.raises(DimensionError):
        arith.scale_by_constant(s, lay, 0.5)


def test_products():
    rng = np.random.default_rng(5)
    lay = RegisterLayout.standard(0, 3, mul=True)
    f, g = rng.uniform(-1, 1, 8), rng.uniform(-1, 1, 8)
    of, og = oracle_from_array(f, "f"), oracle_from_array(g, "g")
    s = arith.multiply_arrays(of, og, lay)
    assert np.max(np.abs(read_matrix(s, lay).values[0] - f * g)) < 1e-10
    s = arith.multiply_arrays(of, oracle_from_array(np.ones(8), "one"), lay)
    assert np.max(np.abs(read_matrix(s, lay).values[0] - f)) < 1e-10
    s = arith.square_array(oracle_from_array([0.0, 1.0], "b"), RegisterLayout.standard(0, 1, mul=True))
    assert np.allclose(read_matrix(s, RegisterLayout.standard(0, 1, mul=True)).values, [[0, 1]], atol=1e-12)
    s = arith.scalar_product(oracle_from_array([1, 0]), oracle_from_array([0, 1]),
                             RegisterLayout.standard(0, 1, mul=True))
    assert abs(read_matrix(s, RegisterLayout.standard(0, 1, mul=True)).values[0, 0]) < 1e-12
    s = arith.scalar_product(of, og, lay)
    assert read_matrix(s, lay).values[0, 0] == pytest.approx(f @ g / math.sqrt(8), abs=1e-10)
    assert s.ledger.to_classical(read_matrix(s, lay).values[0, 0]) == pytest.approx(f @ g, abs=1e-9)
    with pytest.raises(DimensionError):
        arith.multiply_arrays(of, og, RegisterLayout.standard(0, 3))


def test_multiply_tracks_norms():
    lay = RegisterLayout.standard(0, 2, mul=True)
    f, g = np.array([2.0, -1, 0.5, 1]), np.array([0.25, 0.5, -0.5, 0.1])
    s = arith.multiply_arrays(oracle_from_array(f, normalize=True),
                              oracle_from_array(g, normalize=True), lay)
    got = s.ledger.to_classical(read_matrix(s, lay).values[0])
    assert np.allclose(got, f * g, atol=1e-10)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_ops_preserve_norm_and_locality(seed):
    rng = np.random.default_rng(seed)
    m = rng.uniform(-1, 1, (4, 8))
    s, lay, before = loaded(m, mul=True)
    row = int(rng.integers(4))
    sel = Selector(row=row)
    arith.reverse(s, lay, sel)
    arith.cyclic_shift(s, lay, "left", sel)
    arith.swap_with_pivot(s, lay, int(rng.integers(8)), row)
    arith.scale_by_constant(s, lay, float(rng.uniform()), sel)
    assert abs(s.norm_sq - 1) < 1e-12
    got = read_matrix(s, lay).values
    others = [r for r in range(4) if r != row]
    assert np.array_equal(got[others], before[others])


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_involutions(seed):
    rng = np.random.default_rng(seed)
    s, lay, _ = loaded(rng.uniform(-1, 1, (4, 4)))
    start = s.amps.copy()
    sel = [Selector(), Selector(row=1), Selector(col=2)][seed % 3]
    arith.reverse(s, lay, sel)
    arith.reverse(s, lay, sel)
    arith.pairwise_sum_diff(s, lay, "cols")
    arith.pairwise_sum_diff(s, lay, "cols")
    assert np.max(np.abs(s.amps - start)) < 1e-12
