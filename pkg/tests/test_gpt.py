import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nonclassical import gpt
from nonclassical.gpt import FiducialState, GbitTheory, gbit_pure, measure_gbit, mix

from conftest import within_sigmas

PURE = [(m, s) for m in gpt.MEASUREMENTS for s in gpt.OUTCOMES]


@pytest.mark.parametrize(
    "meas, sign, expected",
    [
        ("X", "+", ((1, 0), (0.5, 0.5))),
        ("Z", "-", ((0.5, 0.5), (0, 1))),
        ("X", "-", ((0, 1), (0.5, 0.5))),
        ("Z", "+", ((0.5, 0.5), (1, 0))),
    ],
)
def test_gbit_pure_vectors(meas, sign, expected):
    state = gbit_pure(meas, sign)
    assert state.labels == ("X", "Z")
    assert tuple(dist for _, dist in state.blocks) == expected


@pytest.mark.parametrize("meas, sign", [("Y", "+"), ("X", "0"), ("", "")])
def test_gbit_pure_rejects_unknown_labels(meas, sign):
    with pytest.raises(ValueError):
        gbit_pure(meas, sign)


def test_fiducial_state_invariants():
    with pytest.raises(ValueError):
        FiducialState((("X", (0.6, 0.6)),))
    with pytest.raises(ValueError):
        FiducialState((("X", (1.2, -0.2)),))
    with pytest.raises(ValueError):
        FiducialState((("X", (1.0, 0.0)), ("X", (1.0, 0.0))))


def test_even_mixtures_hit_the_maximally_mixed_state():
    center = FiducialState((("X", (0.5, 0.5)), ("Z", (0.5, 0.5))))
    x_mix = mix([(0.5, gbit_pure("X", "+")), (0.5, gbit_pure("X", "-"))])
    z_mix = mix([(0.5, gbit_pure("Z", "+")), (0.5, gbit_pure("Z", "-"))])
    assert x_mix == center
    assert z_mix == center
    assert x_mix.as_vector().tobytes() == z_mix.as_vector().tobytes()


def test_identity_mix():
    assert mix([(1.0, gbit_pure("X", "+"))]) == gbit_pure("X", "+")


def test_mix_rejects_bad_weights():
    with pytest.raises(ValueError):
        mix([(0.5, gbit_pure("X", "+")), (0.4, gbit_pure("X", "-"))])
    with pytest.raises(ValueError):
        mix([(1.5, gbit_pure("X", "+")), (-0.5, gbit_pure("X", "-"))])
    with pytest.raises(ValueError):
        mix([(0.5, gbit_pure("X", "+")), (0.5, gpt.classical_bit().pure_states["0"])])


weights3 = st.lists(st.floats(0.01, 1.0), min_size=3, max_size=3).map(lambda w: [x / sum(w) for x in w])


@settings(max_examples=200, deadline=None)
@given(w=weights3, picks=st.lists(st.sampled_from(PURE), min_size=3, max_size=3))
def test_mix_commutative_and_associative(w, picks):
    states = [gbit_pure(*p) for p in picks]
    flat = mix(list(zip(w, states))).as_vector()
    swapped = mix([(w[2], states[2]), (w[0], states[0]), (w[1], states[1])]).as_vector()
    inner = mix([(w[0] / (w[0] + w[1]), states[0]), (w[1] / (w[0] + w[1]), states[1])])
    nested = mix([(w[0] + w[1], inner), (w[2], states[2])]).as_vector()
    assert np.max(np.abs(flat - swapped)) <= 1e-12
    assert np.max(np.abs(flat - nested)) <= 1e-12


def test_measure_sharp_block_is_deterministic(rng):
    for _ in range(200):
        outcome, post = measure_gbit(gbit_pure("X", "+"), "X", rng)
        assert outcome == "+"
        assert post == gbit_pure("X", "+")


@pytest.mark.parametrize("meas, sign", PURE)
@pytest.mark.parametrize("probe", gpt.MEASUREMENTS)
def test_measurement_frequencies_match_blocks(meas, sign, probe, rng):
    state = gbit_pure(meas, sign)
    n = 100_000
    hits = sum(measure_gbit(state, probe, rng)[0] == "+" for _ in range(n))
    p = state.block(probe)[0]
    assert within_sigmas(hits / n, p, n)
    if p in (0.0, 1.0):
        assert hits / n == p


def test_sharp_state_frequency_is_exactly_one(rng):
    n = 100_000
    hits = sum(measure_gbit(gbit_pure("Z", "+"), "Z", rng)[0] == "+" for _ in range(n))
    assert hits == n


@pytest.mark.parametrize("meas, sign", PURE)
@pytest.mark.parametrize("probe", gpt.MEASUREMENTS)
def test_measurement_is_repeatable(meas, sign, probe, rng):
    for _ in range(100):
        first, post = measure_gbit(gbit_pure(meas, sign), probe, rng)
        second, _ = measure_gbit(post, probe, rng)
        assert first == second


def test_measure_rejects_unknown_measurement(rng):
    with pytest.raises(ValueError):
        measure_gbit(gbit_pure("X", "+"), "Y", rng)


def test_theory_has_four_pure_states():
    assert len(GbitTheory().pure_states) == 4


def test_nonsimpliciality():
    gbit = GbitTheory()
    assert gpt.verify_nonsimplicial(gbit)
    assert sorted(map(sorted, gpt.minimal_decompositions(gbit))) == [["X+", "X-"], ["Z+", "Z-"]]
    assert not gpt.verify_nonsimplicial(gpt.classical_bit())
    assert not gpt.verify_nonsimplicial(gbit.without("Z+", "Z-"))
    assert gpt.minimal_decompositions(gbit.without("Z+", "Z-")) == [frozenset({"X+", "X-"})]


def test_outcome_table_matches_pure_states():
    table = gpt.outcome_table()
    for i, m in enumerate(gpt.MEASUREMENTS):
        for j, s in enumerate(gpt.OUTCOMES):
            for k, probe in enumerate(gpt.MEASUREMENTS):
                assert table[i, j, k] == gbit_pure(m, s).block(probe)[0]
