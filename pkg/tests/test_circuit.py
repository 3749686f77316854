import numpy as np
import pytest

from photonic_qgan.circuit import (
    BS,
    PS,
    TRAINABLE,
    AnsatzSpec,
    ComponentPlacement,
    ansatz_from_sequence,
    component_unitary,
    compose_unitary,
    encoding_layer,
    layer_unitaries,
    param_count,
    parse_ansatz,
    preset_ansatz,
    variational_layer,
)


def max_unitarity_error(U):
    return np.abs(U @ U.conj().T - np.eye(U.shape[-1])).max()


def test_zero_phase_is_identity():
    U = component_unitary(ComponentPlacement(PS, 1, TRAINABLE, 0), 0.0, 3)
    np.testing.assert_array_equal(U, np.eye(3))


def test_balanced_beam_splitter():
    U = component_unitary(ComponentPlacement(BS, 0, TRAINABLE, 0), np.pi / 4, 2)
    np.testing.assert_allclose(np.abs(U), np.full((2, 2), 1 / np.sqrt(2)), atol=1e-15)


def test_beam_splitter_at_half_pi_swaps_with_phase():
    U = component_unitary(ComponentPlacement(BS, 0, TRAINABLE, 0), np.pi / 2, 2)
    np.testing.assert_allclose(U, [[0, 1j], [1j, 0]], atol=1e-15)


def test_component_mode_out_of_range():
    with pytest.raises(IndexError):
        component_unitary(ComponentPlacement(BS, 2, TRAINABLE, 0), 0.3, 3)
    with pytest.raises(IndexError):
        component_unitary(ComponentPlacement(PS, 3, TRAINABLE, 0), 0.3, 3)


@pytest.mark.parametrize("name", "ABCD")
def test_zero_parameters_give_identity(name):
    a = preset_ansatz(name, 5)
    U = compose_unitary(a, np.zeros(a.n_params), np.zeros(a.noise_dim))
    np.testing.assert_allclose(U, np.eye(5), atol=1e-15)


def test_single_component_composition():
    bs = ComponentPlacement(BS, 0, TRAINABLE, 0)
    from photonic_qgan.circuit import LayerSpec

    a = AnsatzSpec(2, (LayerSpec("V", (bs,)), encoding_layer(2, 0)))
    U = compose_unitary(a, [np.pi / 4], [0.0, 0.0])
    np.testing.assert_allclose(U, component_unitary(bs, np.pi / 4, 2), atol=1e-15)


def test_noise_changes_the_unitary(rng):
    a = preset_ansatz("C", 6)
    theta = rng.uniform(0, 2 * np.pi, a.n_params)
    U1 = compose_unitary(a, theta, rng.standard_normal(a.noise_dim))
    U2 = compose_unitary(a, theta, rng.standard_normal(a.noise_dim))
    assert np.abs(U1 - U2).max() > 1e-6


def test_preset_layouts():
    assert preset_ansatz("A", 4).sequence == "VEV"
    assert preset_ansatz("C", 4).sequence.count("E") == 1
    assert preset_ansatz("B", 4).sequence.count("E") == 3
    assert preset_ansatz("D", 4).sequence.count("E") == 2
    c, d = preset_ansatz("C", 4).sequence, preset_ansatz("D", 4).sequence
    # D = C with one more encoding layer
    assert d.replace("E", "", 1).replace("E", "") == c.replace("E", "")
    assert len(preset_ansatz("B", 4).layers) > len(preset_ansatz("C", 4).layers) > len(preset_ansatz("A", 4).layers)


def test_unknown_preset():
    with pytest.raises(ValueError):
        preset_ansatz("Z", 4)


def test_parse_ansatz_accepts_letters_and_strings():
    assert parse_ansatz("c", 4).preset_name == "C"
    assert parse_ansatz("VEEV", 4).sequence == "VEEV"
    with pytest.raises(ValueError):
        parse_ansatz("VXV", 4)


@pytest.mark.parametrize("m", [2, 3, 4, 7])
def test_layer_slot_counts(m):
    assert len(variational_layer(m, 0).placements) == m + (m - 1)
    assert len(encoding_layer(m, 0).placements) == m


def test_param_count_preset_a():
    assert param_count(preset_ansatz("A", 4)) == (14, 4)


def test_ansatz_needs_both_layer_kinds():
    with pytest.raises(ValueError):
        ansatz_from_sequence("VV", 4)
    with pytest.raises(ValueError):
        ansatz_from_sequence("E", 4)


def test_dimension_mismatch():
    a = preset_ansatz("A", 3)
    with pytest.raises(ValueError):
        compose_unitary(a, np.zeros(a.n_params + 1), np.zeros(a.noise_dim))
    with pytest.raises(ValueError):
        compose_unitary(a, np.zeros(a.n_params), np.zeros(a.noise_dim + 1))


@pytest.mark.parametrize("name", "ABCD")
@pytest.mark.parametrize("m", [2, 5, 8])
def test_unitarity_over_random_draws(name, m):
    rng = np.random.default_rng(hash((name, m)) % 2**32)
    a = preset_ansatz(name, m)
    thetas = rng.uniform(-10, 10, (1000, a.n_params))
    zs = rng.standard_normal((1000, a.noise_dim))
    worst = max(max_unitarity_error(compose_unitary(a, t, z)) for t, z in zip(thetas, zs))
    assert worst < 1e-10


def test_layerwise_composition_agrees(rng):
    a = preset_ansatz("B", 6)
    theta = rng.uniform(0, 2 * np.pi, a.n_params)
    z = rng.standard_normal(a.noise_dim)
    by_layer = np.eye(6, dtype=complex)
    for L in layer_unitaries(a, theta, z):
        by_layer = L @ by_layer
    by_component = np.eye(6, dtype=complex)
    for p in a.placements:
        value = theta[p.slot] if p.source == TRAINABLE else z[p.slot]
        by_component = component_unitary(p, value, 6) @ by_component
    U = compose_unitary(a, theta, z)
    assert np.abs(by_layer - by_component).max() < 1e-12
    assert np.abs(U - by_component).max() < 1e-12


def test_batched_composition_matches_single(rng):
    a = preset_ansatz("D", 5)
    theta = rng.uniform(0, 2 * np.pi, a.n_params)
    zs = rng.standard_normal((3, a.noise_dim))
    stack = compose_unitary(a, theta, zs)
    for U, z in zip(stack, zs):
        np.testing.assert_array_equal(U, compose_unitary(a, theta, z))


def test_composition_is_deterministic(rng):
    a = preset_ansatz("C", 6)
    theta = rng.uniform(0, 2 * np.pi, a.n_params)
    z = rng.standard_normal(a.noise_dim)
    assert compose_unitary(a, theta, z).tobytes() == compose_unitary(a, theta, z).tobytes()


def test_slots_are_unique():
    a = preset_ansatz("B", 6)
    keys = [(p.source, p.slot) for p in a.placements]
    assert len(keys) == len(set(keys))
