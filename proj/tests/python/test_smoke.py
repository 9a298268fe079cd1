import numpy as np
import pytest

import fdcalc


def test_classify_one_two_tree():
    r = fdcalc.classify(4, 0, [[0, 1], [1, 2], [1, 3]])
    assert r["classification"] == "Order1"
    assert r["aut"] == 2
    assert r["variance"] == "2"


def test_classify_cycle_is_negligible():
    r = fdcalc.classify(4, 0, [[0, 1], [1, 2], [2, 3], [3, 0]])
    assert r["classification"] == "Negligible"


def test_double_edge_hangs_off():
    r = fdcalc.classify(2, 0, [[0, 1, 2]])
    assert r["limit"] == "1*R()"


def test_evolve_square_example():
    prog = {"steps": [{"op": "matvec"}, {"op": "pointwise", "poly": [[[0, 2], 1, 1]]}, {"op": "matvec"}]}
    states = fdcalc.evolve(prog)
    assert len(states) == 4
    assert states[3]["second_moment"] == "3"
    assert states[2]["mean"] == "1"


def test_simulate_is_deterministic():
    a = fdcalc.simulate({"preset": "benchmark"}, 200, seed=5)
    b = fdcalc.simulate({"preset": "benchmark"}, 200, seed=5)
    assert len(a["iterates"]) == 6
    for x, y in zip(a["iterates"], b["iterates"]):
        assert np.array_equal(x, y)
    assert abs(np.mean(a["iterates"][2]) - 1.0) < 0.5


def test_bad_config_raises():
    with pytest.raises(ValueError):
        fdcalc.simulate({"preset": "benchmark", "bogus": 1}, 50)


def test_star_and_walk():
    assert fdcalc.star_matching_count(1) == "3"
    lhs, rhs, equal = fdcalc.walk_decomposition(2, 2, 4)
    assert equal and lhs == rhs
