"""Patch sub-generators and the full image generator.

A sub-generator runs its circuit once per latent sample, turns the detected
distribution into a patch of pixels and the generator stacks the patches of
all sub-generators top to bottom.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .circuit import AnsatzSpec, compose_unitary
from .mapping import MappingSpec, minmax_normalize, trim_tails
from .simulator import (
    NoiseModel,
    OutputDistribution,
    PostselectionError,
    SeedLike,
    as_generator,
    detection_matrix,
    raw_probs,
)

IMAGE_WIDTH = 8
IMAGE_HEIGHT = 8
IMAGE_PIXELS = IMAGE_WIDTH * IMAGE_HEIGHT


@dataclass
class SubGenerator:
    ansatz: AnsatzSpec
    params: np.ndarray
    input_state: tuple[int, ...]
    mapping: MappingSpec
    noise: NoiseModel = field(default_factory=NoiseModel)
    shots: int = 0  # 0 = exact probabilities

    def __post_init__(self):
        self.params = np.asarray(self.params, dtype=float)
        self.input_state = tuple(int(k) for k in self.input_state)
        if len(self.input_state) != self.ansatz.modes:
            raise ValueError(
                f"input state {self.input_state} has {len(self.input_state)} modes, "
                f"ansatz has {self.ansatz.modes}"
            )
        if self.params.shape != (self.ansatz.n_params,):
            raise ValueError(f"expected {self.ansatz.n_params} parameters, got {self.params.shape}")
        if self.mapping.m != self.ansatz.modes or self.mapping.n != self.n_photons:
            raise ValueError("mapping spec does not match the circuit's modes and photons")
        if self.mapping.detector != self.noise.detector or self.mapping.lossy != self.noise.lossy:
            raise ValueError("mapping spec does not match the detector/loss model")
        if self.shots < 0:
            raise ValueError(f"shots must be >= 0, got {self.shots}")

    @property
    def n_photons(self) -> int:
        return sum(self.input_state)

    @property
    def noise_dim(self) -> int:
        return self.ansatz.noise_dim

    def detected_probs(self, z, params=None, seed: SeedLike = None) -> tuple[np.ndarray, np.ndarray]:
        """Postselected outcome probabilities for a batch of noise vectors.

        Returns ``(probs, kept_fraction)`` with shapes ``(B, K)`` and ``(B,)``;
        columns follow the mapping's canonical outcome order.
        """
        params = self.params if params is None else params
        U = compose_unitary(self.ansatz, params, np.atleast_2d(z))
        raw = raw_probs(U, self.input_state, self.noise.transmission, self.noise.indistinguishability)
        D = detection_matrix(self.ansatz.modes, self.n_photons, self.noise.detector, self.noise.lossy)
        if self.shots:
            rng = as_generator(seed)
            p = np.clip(raw, 0.0, None)
            p /= p.sum(axis=1, keepdims=True)
            counts = np.stack([rng.multinomial(self.shots, row) for row in p])
            kept = counts @ D
            total = self.shots
        else:
            kept = raw @ D
            total = raw.sum(axis=1)
        mass = kept.sum(axis=1)
        if np.any(mass <= 0):
            raise PostselectionError("postselection discarded every outcome")
        return kept / mass[:, None], mass / total

    def distribution(self, z, seed: SeedLike = None) -> OutputDistribution:
        probs, kept = self.detected_probs(np.atleast_2d(z), seed=seed)
        return OutputDistribution(self.mapping.outcomes(), probs[0], float(kept[0]))

    def patches(self, z, params=None, seed: SeedLike = None) -> np.ndarray:
        probs, _ = self.detected_probs(z, params, seed)
        return normalize_rows(trim_tails(probs.T, self.mapping.patch_pixels).T)


def normalize_rows(v: np.ndarray) -> np.ndarray:
    lo = v.min(axis=1, keepdims=True)
    span = v.max(axis=1, keepdims=True) - lo
    flat = span[:, 0] == 0
    out = np.zeros_like(v)
    out[~flat] = (v[~flat] - lo[~flat]) / span[~flat]
    return out


def generate_patch(g: SubGenerator, z, seed: SeedLike = None) -> np.ndarray:
    """Pixels of one patch for a single noise vector."""
    z = np.asarray(z, dtype=float)
    if z.shape != (g.noise_dim,):
        raise ValueError(f"expected noise of dimension {g.noise_dim}, got shape {z.shape}")
    probs, _ = g.detected_probs(z[None, :], seed=seed)
    return minmax_normalize(trim_tails(probs[0], g.mapping.patch_pixels))


@dataclass
class Generator:
    """Sub-generators sharing one circuit structure; patch 0 is the top of the image."""

    sub_generators: list[SubGenerator]
    threads: int = 1

    def __post_init__(self):
        if not self.sub_generators:
            raise ValueError("a generator needs at least one sub-generator")
        first = self.sub_generators[0]
        for g in self.sub_generators[1:]:
            if g.ansatz.sequence != first.ansatz.sequence or g.ansatz.modes != first.ansatz.modes:
                raise ValueError("all sub-generators must share one circuit structure")
        total = sum(g.mapping.patch_pixels for g in self.sub_generators)
        if total != IMAGE_PIXELS:
            raise ValueError(f"patches cover {total} pixels, an image has {IMAGE_PIXELS}")

    @property
    def noise_dim(self) -> int:
        return self.sub_generators[0].noise_dim

    @property
    def n_params(self) -> int:
        return sum(g.ansatz.n_params for g in self.sub_generators)

    @property
    def params(self) -> np.ndarray:
        return np.concatenate([g.params for g in self.sub_generators])

    def split(self, flat) -> list[np.ndarray]:
        flat = np.asarray(flat, dtype=float)
        if flat.shape != (self.n_params,):
            raise ValueError(f"expected {self.n_params} parameters, got shape {flat.shape}")
        bounds = np.cumsum([g.ansatz.n_params for g in self.sub_generators])[:-1]
        return np.split(flat, bounds)

    def with_params(self, flat) -> "Generator":
        subs = [replace(g, params=p) for g, p in zip(self.sub_generators, self.split(flat))]
        return replace(self, sub_generators=subs)

    def generate(self, z_batch, params=None, seed: Optional[int] = None) -> np.ndarray:
        """Images of shape ``(B, 64)``; every sub-generator sees the same noise vector.

        ``seed`` only matters in shot mode; sub-generator ``i`` samples from
        ``default_rng([seed, i])`` so results do not depend on scheduling.
        """
        z_batch = np.atleast_2d(np.asarray(z_batch, dtype=float))
        if z_batch.shape[1] != self.noise_dim:
            raise ValueError(f"expected noise of dimension {self.noise_dim}, got {z_batch.shape[1]}")
        param_list = [g.params for g in self.sub_generators] if params is None else self.split(params)

        def run(i: int) -> np.ndarray:
            shot_seed = None if seed is None else np.random.default_rng([seed, i])
            return self.sub_generators[i].patches(z_batch, param_list[i], shot_seed)

        indices = range(len(self.sub_generators))
        if self.threads > 1:
            with ThreadPoolExecutor(self.threads) as pool:
                patches = list(pool.map(run, indices))
        else:
            patches = [run(i) for i in indices]
        return np.concatenate(patches, axis=1)


def generate_image_batch(gen: Generator, z_batch: Sequence, seed: Optional[int] = None) -> np.ndarray:
    return gen.generate(z_batch, seed=seed)


def sample_noise(rng: np.random.Generator, batch: int, dim: int) -> np.ndarray:
    """Latent samples from the standard normal prior."""
    return rng.standard_normal((batch, dim))


def build_generator(
    ansatz: AnsatzSpec,
    input_state: Sequence[int],
    n_sub: int,
    noise: NoiseModel = NoiseModel(),
    shots: int = 0,
    params: Optional[Sequence[np.ndarray]] = None,
    threads: int = 1,
) -> Generator:
    if n_sub < 1 or IMAGE_PIXELS % n_sub:
        raise ValueError(f"sub-generator count must divide {IMAGE_PIXELS}, got {n_sub}")
    mapping = MappingSpec(
        ansatz.modes, sum(input_state), noise.detector, noise.lossy, IMAGE_PIXELS // n_sub
    )
    if params is None:
        params = [np.zeros(ansatz.n_params) for _ in range(n_sub)]
    subs = [SubGenerator(ansatz, p, tuple(input_state), mapping, noise, shots) for p in params]
    return Generator(subs, threads=threads)
