import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from photonic_qgan.fock import enumerate_basis
from photonic_qgan.mapping import (
    MappingError,
    MappingSpec,
    available_integers,
    distribution_to_integers,
    distribution_to_patch,
    minmax_normalize,
    outcome_label,
    outcome_table,
    trim_tails,
)
from photonic_qgan.simulator import NoiseModel, OutputDistribution, detect_and_postselect, exact_distribution

from oracles import random_unitary

finite = st.floats(-1e6, 1e6, allow_nan=False)


@pytest.mark.parametrize(
    "detector, lossy, expected", [("pnr", False, 10), ("threshold", False, 7), ("threshold", True, 1)]
)
def test_available_integers_reference_table(detector, lossy, expected):
    spec = MappingSpec(3, 3, detector, lossy, patch_pixels=1)
    assert available_integers(spec) == expected == len(spec.outcomes())


def test_patch_too_large_for_outcome_space():
    with pytest.raises(MappingError, match="fewer than"):
        MappingSpec(3, 3, "pnr", False, patch_pixels=32)
    with pytest.raises(MappingError):
        MappingSpec(2, 3, "threshold", True, patch_pixels=1)


def test_desk_scale_spaces_are_big_enough():
    assert available_integers(MappingSpec(6, 3, patch_pixels=32)) == 56
    assert available_integers(MappingSpec(8, 3, "threshold", True, patch_pixels=32)) == 56


def test_point_mass_maps_to_integer_zero():
    spec = MappingSpec(3, 3, patch_pixels=10)
    v = distribution_to_integers(OutputDistribution(((0, 0, 3),), [1.0]), spec)
    assert v[0] == 1.0 and v[1:].sum() == 0


def test_full_pattern_maps_to_integer_six():
    spec = MappingSpec(3, 3, "threshold", patch_pixels=7)
    d = detect_and_postselect(exact_distribution(np.eye(3), (1, 1, 1)), NoiseModel(detector="threshold"), 3)
    v = distribution_to_integers(d, spec)
    assert v[6] == 1.0 and v.sum() == 1.0


def test_uniform_distribution_maps_to_flat_vector():
    states = enumerate_basis(3, 3).states
    v = distribution_to_integers(OutputDistribution(states, np.full(10, 0.1)), MappingSpec(3, 3, patch_pixels=10))
    np.testing.assert_allclose(v, 0.1)


def test_foreign_outcome_rejected():
    with pytest.raises(MappingError):
        distribution_to_integers(OutputDistribution(((1, 1),), [1.0]), MappingSpec(3, 3, patch_pixels=10))


def test_integer_vector_keeps_mass(rng):
    d = exact_distribution(random_unitary(6, rng), (1, 0, 1, 0, 1, 0))
    v = distribution_to_integers(d, MappingSpec(6, 3))
    assert abs(v.sum() - 1) < 1e-12


def test_trim_examples():
    v = np.arange(10)
    np.testing.assert_array_equal(trim_tails(v, 8), np.arange(1, 9))
    np.testing.assert_array_equal(trim_tails(np.arange(9), 8), np.arange(8))
    np.testing.assert_array_equal(trim_tails(np.arange(8), 8), np.arange(8))
    with pytest.raises(MappingError):
        trim_tails(np.arange(3), 4)


@given(st.integers(1, 80), st.integers(0, 80))
def test_trim_drops_floor_front_ceil_back(target, surplus):
    v = np.arange(target + surplus)
    out = trim_tails(v, target)
    assert len(out) == target
    assert out[0] == surplus // 2
    assert len(v) - 1 - out[-1] == surplus - surplus // 2


def test_minmax_examples():
    np.testing.assert_allclose(minmax_normalize([0.2, 0.5, 0.8]), [0, 0.5, 1], atol=1e-15)
    np.testing.assert_array_equal(minmax_normalize([0.3, 0.3]), [0, 0])


@given(arrays(float, st.integers(2, 40), elements=finite))
def test_minmax_range_and_order(v):
    out = minmax_normalize(v)
    assert np.all((out >= 0) & (out <= 1))
    if v.max() > v.min():
        assert out.min() == 0 and out.max() == 1
        order = np.argsort(v, kind="stable")
        assert np.all(np.diff(out[order]) >= 0)


def test_patch_from_identity_circuit():
    spec = MappingSpec(6, 3)
    d = exact_distribution(np.eye(6), (1, 0, 1, 0, 1, 0))
    patch = distribution_to_patch(d, spec)
    assert patch.shape == (32,)
    assert sorted(patch)[-2:] == [0.0, 1.0]


def test_outcome_labels():
    table = outcome_table(3, 3)
    assert outcome_label(table[0], "pnr") == "|0,0,3>"
    assert outcome_label(outcome_table(3, 3, "threshold")[2], "threshold") == "|0,click,click>"
