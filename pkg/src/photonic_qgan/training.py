"""Adversarial training: discriminator ascent steps alternating with SPSA on the generator."""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .data import Dataset, filter_digit, sample_batch
from .discriminator import Discriminator, disc_update, loss_g
from .generator import Generator, sample_noise
from .seeding import derive_rng
from .spsa import NonFiniteObjective, SPSAState, calibrate_gain, pseudo_gradient, spsa_step

log = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi


class TrainingAborted(RuntimeError):
    def __init__(self, message: str, state: "TrainState"):
        super().__init__(message)
        self.state = state


@dataclass(frozen=True)
class TrainingConfig:
    batch_size: int = 4
    disc_lr: float = 0.002
    spsa_steps_per_iter: int = 7
    iterations: int = 1500
    disc_steps: int = 1
    digit: int = 0
    seed: int = 0
    g_min: float = 0.05
    max_init_tries: int = 50
    spsa_c: float = 0.1
    spsa_alpha: float = 0.602
    spsa_gamma: float = 0.101
    spsa_A_fraction: float = 0.1
    spsa_first_step: float = 0.1
    snapshot_every: int = 100
    snapshot_count: int = 4

    def __post_init__(self):
        for name in ("batch_size", "spsa_steps_per_iter", "iterations", "disc_steps",
                     "max_init_tries", "snapshot_every", "snapshot_count"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if not 0 <= self.digit <= 9:
            raise ValueError(f"digit must be in 0..9, got {self.digit}")
        if self.disc_lr < 0 or self.g_min <= 0 or self.spsa_c <= 0 or self.seed < 0:
            raise ValueError("disc_lr >= 0, g_min > 0, spsa_c > 0 and seed >= 0 are required")

    @property
    def total_spsa_steps(self) -> int:
        return self.iterations * self.spsa_steps_per_iter


@dataclass
class LossHistory:
    records: list = field(default_factory=list)  # (iteration, L_G, L_D), raw (negative) values
    snapshots: dict = field(default_factory=dict)  # iteration -> (count, 64) images
    spsa_steps: int = 0
    spsa_evaluations: int = 0
    disc_steps: int = 0

    def __len__(self) -> int:
        return len(self.records)

    @property
    def loss_g(self) -> np.ndarray:
        return np.array([r[1] for r in self.records])

    @property
    def loss_d(self) -> np.ndarray:
        return np.array([r[2] for r in self.records])


@dataclass
class InitResult:
    params: np.ndarray
    grad_norm: float
    tries: int
    exhausted: bool


@dataclass
class TrainState:
    generator: Generator
    discriminator: Discriminator
    spsa: SPSAState
    iteration: int = 0
    history: LossHistory = field(default_factory=LossHistory)
    init: Optional[InitResult] = None


def init_generator_params(
    n_params: int,
    objective: Callable[[np.ndarray], float],
    g_min: float,
    max_tries: int,
    rng: np.random.Generator,
    state: SPSAState,
) -> InitResult:
    """Draw parameters in [0, 2pi) until the first pseudo-gradient reaches ``g_min`` (sup norm).

    Gives up after ``max_tries`` draws and returns the last one, flagged.
    """
    params, g = None, 0.0
    for t in range(1, max_tries + 1):
        params = rng.uniform(0.0, TWO_PI, n_params)
        ghat, _, _ = pseudo_gradient(objective, params, state)
        g = float(np.abs(ghat).max())
        if g >= g_min:
            return InitResult(params, g, t, False)
    log.warning("no initialization reached pseudo-gradient %.3g after %d tries (last %.3g)", g_min, max_tries, g)
    return InitResult(params, g, max_tries, True)


def generator_objective(gen: Generator, disc: Discriminator, z: np.ndarray, shot_seed: Optional[int]):
    """L_G as a function of the flat generator parameters, for a fixed noise batch."""

    def objective(theta: np.ndarray) -> float:
        return loss_g(disc(gen.generate(z, theta, seed=shot_seed)))

    return objective


def _shot_seed(gen: Generator, rng: np.random.Generator) -> Optional[int]:
    seed = int(rng.integers(2**62))
    return seed if any(g.shots for g in gen.sub_generators) else None


def initialize(config: TrainingConfig, gen: Generator, disc: Optional[Discriminator] = None,
               redraw: bool = True) -> TrainState:
    """Fresh discriminator, re-drawn generator parameters and a calibrated SPSA gain.

    With ``redraw=False`` the generator keeps its parameters and only the
    gain is calibrated from their pseudo-gradient.
    """
    root = config.seed
    if disc is None:
        disc = Discriminator.init(derive_rng(root, "init", 0))
    spsa = SPSAState(
        a=1.0,
        c=config.spsa_c,
        A=config.spsa_A_fraction * config.total_spsa_steps,
        alpha=config.spsa_alpha,
        gamma=config.spsa_gamma,
        seed=int(derive_rng(root, "spsa").integers(2**62)),
    )
    noise_rng = derive_rng(root, "init", 1)
    z = sample_noise(noise_rng, config.batch_size, gen.noise_dim)
    objective = generator_objective(gen, disc, z, _shot_seed(gen, noise_rng))
    if redraw:
        init = init_generator_params(
            gen.n_params, objective, config.g_min, config.max_init_tries, derive_rng(root, "init", 2), spsa
        )
    else:
        ghat, _, _ = pseudo_gradient(objective, gen.params, spsa)
        init = InitResult(gen.params, float(np.abs(ghat).max()), 0, False)
    a = calibrate_gain(max(init.grad_norm, config.g_min), spsa.A, spsa.alpha, config.spsa_first_step)
    return TrainState(gen.with_params(init.params), disc, replace(spsa, a=a), init=init)


def _fake_batch(gen: Generator, rng: np.random.Generator, batch: int) -> np.ndarray:
    z = sample_noise(rng, batch, gen.noise_dim)
    return gen.generate(z, seed=_shot_seed(gen, rng))


def train_iteration(config: TrainingConfig, real_data: Dataset, state: TrainState) -> tuple[float, float]:
    """One outer iteration in place; returns (L_G, L_D).

    L_D is the batch value before the (last) discriminator step, L_G the mean
    of the SPSA midpoint estimates over this iteration's generator steps.
    """
    root, it = config.seed, state.iteration
    ld = math.nan
    for j in range(config.disc_steps):
        rng = derive_rng(root, "disc", it, j)
        fake = _fake_batch(state.generator, rng, config.batch_size)
        real = np.stack([s.pixels for s in sample_batch(real_data, config.batch_size, rng)])
        state.discriminator, ld = disc_update(state.discriminator, real, fake, config.disc_lr)
        state.history.disc_steps += 1

    theta = state.generator.params
    estimates = []
    for _ in range(config.spsa_steps_per_iter):
        rng = derive_rng(root, "gen", state.spsa.k)
        z = sample_noise(rng, config.batch_size, state.generator.noise_dim)
        objective = generator_objective(state.generator, state.discriminator, z, _shot_seed(state.generator, rng))
        before = state.spsa.evaluations
        theta, state.spsa, f_mid = spsa_step(objective, theta, state.spsa)
        state.history.spsa_steps += 1
        state.history.spsa_evaluations += state.spsa.evaluations - before
        estimates.append(f_mid)
    # keep phases in [0, 2pi): the circuit is periodic in every parameter
    state.generator = state.generator.with_params(np.mod(theta, TWO_PI))
    return float(np.mean(estimates)), float(ld)


def snapshot_noise(config: TrainingConfig, noise_dim: int) -> np.ndarray:
    return sample_noise(derive_rng(config.seed, "snapshot"), config.snapshot_count, noise_dim)


def train(
    config: TrainingConfig,
    dataset: Dataset,
    gen: Optional[Generator] = None,
    disc: Optional[Discriminator] = None,
    state: Optional[TrainState] = None,
    callback: Optional[Callable[[TrainState], None]] = None,
    stop_at: Optional[int] = None,
) -> TrainState:
    """Run iterations ``state.iteration .. stop_at`` (default ``config.iterations``).

    Pass ``gen`` (and optionally ``disc``) to start fresh, or a ``state``
    restored from a checkpoint to resume; resumed runs reproduce the losses
    of an uninterrupted run exactly.
    """
    real_data = filter_digit(dataset, config.digit)
    if len(real_data) < config.batch_size:
        raise ValueError(f"digit {config.digit} has {len(real_data)} samples, fewer than one batch")
    if state is None:
        if gen is None:
            raise ValueError("need a generator or a state to train")
        state = initialize(config, gen, disc)
    stop = config.iterations if stop_at is None else stop_at
    snap_z = snapshot_noise(config, state.generator.noise_dim)
    while state.iteration < stop:
        try:
            lg, ld = train_iteration(config, real_data, state)
        except NonFiniteObjective as exc:
            raise TrainingAborted(f"non-finite loss at iteration {state.iteration + 1}: {exc}", state) from None
        state.iteration += 1
        if not (math.isfinite(lg) and math.isfinite(ld)):
            raise TrainingAborted(f"non-finite loss at iteration {state.iteration}: L_G={lg}, L_D={ld}", state)
        state.history.records.append((state.iteration, lg, ld))
        if state.iteration % config.snapshot_every == 0 or state.iteration == stop:
            state.history.snapshots[state.iteration] = state.generator.generate(snap_z, seed=config.seed)
        if callback is not None:
            callback(state)
    return state


def moving_average(x, window: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if len(x) < window:
        return np.array([x.mean()]) if len(x) else x
    kernel = np.ones(window) / window
    return np.convolve(x, kernel, mode="valid")


def spsa_to_dict(s: SPSAState) -> dict:
    return asdict(s)


def spsa_from_dict(d: dict) -> SPSAState:
    return SPSAState(**d)
