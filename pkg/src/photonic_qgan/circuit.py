"""Parametrized linear-optical circuits built from phase shifters and beam splitters.

A circuit is a sequence of layers. Variational layers (``V``) carry
trainable angles; encoding layers (``E``) carry one phase per mode that is
overwritten with a latent noise sample on every call.

Conventions:

* phase shifter on mode j: ``U[j, j] = exp(i*phi)``
* beam splitter on (j, j+1): block ``[[cos t, i sin t], [i sin t, cos t]]``
* the first component in the sequence acts first, so the composed matrix
  is ``U = U_last @ ... @ U_first`` and output amplitudes are ``U @ a_in``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Optional, Sequence

import numpy as np

PS = "ps"
BS = "bs"
TRAINABLE = "theta"
NOISE = "z"


@dataclass(frozen=True)
class ComponentPlacement:
    kind: Literal["ps", "bs"]
    mode: int  # PS target, or the upper mode of a BS pair (mode, mode + 1)
    source: Literal["theta", "z"]
    slot: int


@dataclass(frozen=True)
class LayerSpec:
    kind: Literal["V", "E"]
    placements: tuple[ComponentPlacement, ...]

    def __post_init__(self):
        if self.kind == "E" and any(p.kind != PS for p in self.placements):
            raise ValueError("encoding layers may only contain phase shifters")


@dataclass(frozen=True)
class AnsatzSpec:
    modes: int
    layers: tuple[LayerSpec, ...]
    preset_name: Optional[str] = None

    def __post_init__(self):
        kinds = {layer.kind for layer in self.layers}
        if kinds != {"V", "E"}:
            raise ValueError("an ansatz needs at least one variational and one encoding layer")
        seen = set()
        for p in self.placements:
            if p.kind == BS and not 0 <= p.mode < self.modes - 1:
                raise ValueError(f"beam splitter on ({p.mode}, {p.mode + 1}) outside {self.modes} modes")
            if p.kind == PS and not 0 <= p.mode < self.modes:
                raise ValueError(f"phase shifter on mode {p.mode} outside {self.modes} modes")
            key = (p.source, p.slot)
            if key in seen:
                raise ValueError(f"slot {key} used twice")
            seen.add(key)

    @property
    def placements(self) -> tuple[ComponentPlacement, ...]:
        return tuple(p for layer in self.layers for p in layer.placements)

    @property
    def sequence(self) -> str:
        """Layer string over the alphabet {V, E}, e.g. ``"VVEVV"``."""
        return "".join(layer.kind for layer in self.layers)

    @property
    def n_params(self) -> int:
        return sum(1 for p in self.placements if p.source == TRAINABLE)

    @property
    def noise_dim(self) -> int:
        return sum(1 for p in self.placements if p.source == NOISE)

    def describe(self) -> dict:
        return {"modes": self.modes, "sequence": self.sequence, "preset": self.preset_name}


PRESETS = {
    "A": "VEV",
    "B": "VEVEVEV",
    "C": "VVEVV",
    "D": "VVEVEV",
}


def variational_layer(m: int, first_slot: int) -> LayerSpec:
    """A trainable phase on every mode followed by a two-row brick wall of beam splitters."""
    placements = [ComponentPlacement(PS, j, TRAINABLE, first_slot + j) for j in range(m)]
    slot = first_slot + m
    for start in (0, 1):
        for j in range(start, m - 1, 2):
            placements.append(ComponentPlacement(BS, j, TRAINABLE, slot))
            slot += 1
    return LayerSpec("V", tuple(placements))


def encoding_layer(m: int, first_slot: int) -> LayerSpec:
    return LayerSpec("E", tuple(ComponentPlacement(PS, j, NOISE, first_slot + j) for j in range(m)))


def ansatz_from_sequence(sequence: str, m: int, preset_name: Optional[str] = None) -> AnsatzSpec:
    if m < 2:
        raise ValueError(f"an ansatz needs at least 2 modes, got {m}")
    layers = []
    n_theta = n_z = 0
    for ch in sequence.upper():
        if ch == "V":
            layer = variational_layer(m, n_theta)
            n_theta += len(layer.placements)
        elif ch == "E":
            layer = encoding_layer(m, n_z)
            n_z += m
        else:
            raise ValueError(f"unknown layer kind {ch!r} in {sequence!r}; use V or E")
        layers.append(layer)
    return AnsatzSpec(m, tuple(layers), preset_name or "custom")


def preset_ansatz(name: str, m: int) -> AnsatzSpec:
    """Circuit setups A-D; A and C have one encoding layer, D two, B three."""
    try:
        sequence = PRESETS[name.upper()]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; expected one of {sorted(PRESETS)}") from None
    return ansatz_from_sequence(sequence, m, preset_name=name.upper())


def parse_ansatz(descriptor: str, m: int) -> AnsatzSpec:
    """Accept either a preset letter or an explicit V/E layer string."""
    if descriptor.upper() in PRESETS:
        return preset_ansatz(descriptor, m)
    return ansatz_from_sequence(descriptor, m)


def param_count(ansatz: AnsatzSpec) -> tuple[int, int]:
    """(trainable slots, noise slots)."""
    return ansatz.n_params, ansatz.noise_dim


def component_unitary(c: ComponentPlacement, value: float, m: int) -> np.ndarray:
    if not np.isfinite(value):
        raise ValueError(f"non-finite angle {value}")
    U = np.eye(m, dtype=complex)
    if c.kind == PS:
        if not 0 <= c.mode < m:
            raise IndexError(f"mode {c.mode} out of range for {m} modes")
        U[c.mode, c.mode] = np.exp(1j * value)
    else:
        j = c.mode
        if not 0 <= j < m - 1:
            raise IndexError(f"beam splitter ({j}, {j + 1}) out of range for {m} modes")
        cs, sn = np.cos(value), 1j * np.sin(value)
        U[j : j + 2, j : j + 2] = [[cs, sn], [sn, cs]]
    return U


def compose_unitary(ansatz: AnsatzSpec, params: Sequence[float], z) -> np.ndarray:
    """Multiply all components in order, reading angles from ``params`` and ``z``.

    ``z`` may be a single noise vector or a batch of shape ``(B, noise_dim)``;
    in the latter case a stack of ``B`` unitaries is returned.
    """
    params = np.asarray(params, dtype=float)
    z = np.asarray(z, dtype=float)
    if params.shape != (ansatz.n_params,):
        raise ValueError(f"expected {ansatz.n_params} parameters, got shape {params.shape}")
    batched = z.ndim == 2
    zb = z if batched else z[None, :]
    if zb.ndim != 2 or zb.shape[1] != ansatz.noise_dim:
        raise ValueError(f"expected noise of dimension {ansatz.noise_dim}, got shape {z.shape}")

    m = ansatz.modes
    U = np.broadcast_to(np.eye(m, dtype=complex), (zb.shape[0], m, m)).copy()
    for p in ansatz.placements:
        # left-multiplying by a component only touches its rows
        if p.kind == PS:
            angle = params[p.slot] if p.source == TRAINABLE else zb[:, p.slot]
            U[:, p.mode, :] *= np.reshape(np.exp(1j * angle), (-1, 1))
        else:
            t = params[p.slot]
            cs, sn = np.cos(t), 1j * np.sin(t)
            top = U[:, p.mode, :].copy()
            bottom = U[:, p.mode + 1, :]
            U[:, p.mode, :] = cs * top + sn * bottom
            U[:, p.mode + 1, :] = sn * top + cs * bottom
    return U if batched else U[0]


def layer_unitaries(ansatz: AnsatzSpec, params, z) -> list[np.ndarray]:
    """One dense unitary per layer (reference path for composition checks)."""
    params = np.asarray(params, dtype=float)
    z = np.asarray(z, dtype=float)
    out = []
    for layer in ansatz.layers:
        U = np.eye(ansatz.modes, dtype=complex)
        for p in layer.placements:
            value = params[p.slot] if p.source == TRAINABLE else z[p.slot]
            U = component_unitary(p, value, ansatz.modes) @ U
        out.append(U)
    return out
