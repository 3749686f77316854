"""Exact strong simulation of linear-optical circuits on Fock states.

Transition amplitudes come from permanents of submatrices of the circuit
unitary. Photon loss and partial distinguishability are modelled per photon:
each input photon is independently lost (probability ``1 - eta``), kept and
interfering (``eta * x``) or kept but fully distinguishable
(``eta * (1 - x)``). Interfering photons follow the permanent rule;
distinguishable ones scatter classically with probabilities ``|U_ij|^2``.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from math import comb, factorial, prod, sqrt
from typing import Literal, Optional, Union

import numpy as np

from .fock import enumerate_basis, enumerate_patterns, threshold_collapse

Detector = Literal["pnr", "threshold"]
SeedLike = Union[int, np.random.Generator, None]


class PostselectionError(RuntimeError):
    """All probability mass was discarded by postselection."""


@dataclass
class OutputDistribution:
    """Probabilities over detected outcomes (Fock states or click patterns)."""

    support: tuple
    probs: np.ndarray
    kept_fraction: float = 1.0

    def __post_init__(self):
        self.probs = np.asarray(self.probs, dtype=float)
        if len(self.support) != len(self.probs):
            raise ValueError("support and probabilities differ in length")

    def as_dict(self) -> dict:
        return dict(zip(self.support, self.probs.tolist()))

    def prob(self, outcome) -> float:
        try:
            return float(self.probs[self.support.index(tuple(outcome))])
        except ValueError:
            return 0.0

    def total(self) -> float:
        return float(self.probs.sum())


@dataclass(frozen=True)
class NoiseModel:
    transmission: float = 1.0
    indistinguishability: float = 1.0
    detector: Detector = "pnr"

    def __post_init__(self):
        for name in ("transmission", "indistinguishability"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if self.detector not in ("pnr", "threshold"):
            raise ValueError(f"detector must be 'pnr' or 'threshold', got {self.detector!r}")

    @property
    def lossy(self) -> bool:
        return self.transmission < 1.0

    @property
    def ideal(self) -> bool:
        return self.transmission == 1.0 and self.indistinguishability == 1.0


@dataclass
class ShotCounts:
    counts: dict
    shots_requested: int
    shots_kept: int

    def to_distribution(self) -> OutputDistribution:
        support = tuple(self.counts)
        probs = np.array([self.counts[s] for s in support], dtype=float)
        total = probs.sum()
        if total == 0:
            raise PostselectionError("no shots were kept")
        return OutputDistribution(support, probs / total, self.shots_kept / self.shots_requested)


# --- permanents ---------------------------------------------------------------


@lru_cache(maxsize=None)
def _gray_schedule(k: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Column flipped, add/remove sign and subset parity for each Gray-code step."""
    steps = range(1, 1 << k)
    # index of the lowest set bit = column that toggles between consecutive codes
    cols = np.array([(s & -s).bit_length() - 1 for s in steps], dtype=np.intp)
    gray = np.array([s ^ (s >> 1) for s in steps])
    signs = np.where((gray >> cols) & 1, 1.0, -1.0)
    parity = np.array([bin(g).count("1") & 1 for g in gray.tolist()])
    subset_sign = np.where(parity == (k & 1), 1.0, -1.0)
    return cols, signs, subset_sign


def permanent(M) -> complex:
    """Permanent by Ryser's formula with Gray-code subset updates, O(2^k k)."""
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"permanent needs a square matrix, got shape {M.shape}")
    k = M.shape[0]
    if k == 0:
        return complex(1.0)
    cols, signs, subset_sign = _gray_schedule(k)
    M = M.astype(complex)
    row_sums = np.zeros(k, dtype=complex)
    total = 0j
    for c, s, sg in zip(cols.tolist(), signs.tolist(), subset_sign.tolist()):
        if s > 0:
            row_sums += M[:, c]
        else:
            row_sums -= M[:, c]
        total += sg * np.prod(row_sums)
    return complex(total)


def permanents(Ms: np.ndarray) -> np.ndarray:
    """Vectorized Ryser permanent over the leading axes of a ``(..., k, k)`` stack."""
    Ms = np.asarray(Ms, dtype=complex)
    k = Ms.shape[-1]
    if Ms.shape[-2] != k:
        raise ValueError(f"permanents needs square matrices, got shape {Ms.shape}")
    lead = Ms.shape[:-2]
    if k == 0:
        return np.ones(lead, dtype=complex)
    cols, signs, subset_sign = _gray_schedule(k)
    row_sums = np.zeros((*lead, k), dtype=complex)
    total = np.zeros(lead, dtype=complex)
    for c, s, sg in zip(cols.tolist(), signs.tolist(), subset_sign.tolist()):
        if s > 0:
            row_sums += Ms[..., :, c]
        else:
            row_sums -= Ms[..., :, c]
        total += sg * np.prod(row_sums, axis=-1)
    return total


# --- ideal evolution --------------------------------------------------------------


def _mode_list(s) -> np.ndarray:
    return np.repeat(np.arange(len(s)), s).astype(np.intp)


def _check_state(s, m: Optional[int] = None) -> tuple[int, ...]:
    s = tuple(int(k) for k in s)
    if any(k < 0 for k in s):
        raise ValueError(f"negative occupation in {s}")
    if m is not None and len(s) != m:
        raise ValueError(f"state {s} has {len(s)} modes, circuit has {m}")
    return s


def transition_amplitude(U, input_state, output_state) -> complex:
    """<output| U |input> for Fock states of equal photon number."""
    U = np.asarray(U)
    m = U.shape[0]
    inp = _check_state(input_state, m)
    out = _check_state(output_state, m)
    if sum(inp) != sum(out):
        raise ValueError(f"photon number mismatch: {sum(inp)} in, {sum(out)} out")
    sub = U[np.ix_(_mode_list(out), _mode_list(inp))]
    norm = sqrt(prod(factorial(k) for k in out) * prod(factorial(k) for k in inp))
    return permanent(sub) / norm


@lru_cache(maxsize=None)
def _basis_tables(m: int, n: int) -> tuple[tuple, np.ndarray, np.ndarray]:
    basis = enumerate_basis(m, n)
    rows = np.array([_mode_list(s) for s in basis.states], dtype=np.intp).reshape(len(basis), n)
    out_norm = np.array([prod(factorial(k) for k in s) for s in basis.states], dtype=float)
    return basis.states, rows, out_norm


def _exact_probs(U: np.ndarray, inp: tuple[int, ...]) -> np.ndarray:
    """Probabilities over ``enumerate_basis(m, n)``; ``U`` may carry leading batch axes."""
    m = U.shape[-1]
    n = sum(inp)
    _, rows, out_norm = _basis_tables(m, n)
    cols = _mode_list(inp)
    sub = U[..., rows[:, :, None], cols[None, None, :]]  # (..., N, n, n)
    amps = permanents(sub)
    in_norm = prod(factorial(k) for k in inp)
    return np.abs(amps) ** 2 / (out_norm * in_norm)


def exact_distribution(U, input_state) -> OutputDistribution:
    """Exact lossless output distribution over all n-photon states."""
    U = np.asarray(U)
    inp = _check_state(input_state, U.shape[0])
    states, _, _ = _basis_tables(U.shape[0], sum(inp))
    return OutputDistribution(states, _exact_probs(U, inp))


# --- noise channels ---------------------------------------------------------------


@lru_cache(maxsize=None)
def _add_photon_map(m: int, k: int) -> np.ndarray:
    """``out[r, i]`` = rank in the (k+1)-photon basis of state r of the k-photon basis plus one photon in mode i."""
    src = enumerate_basis(m, k)
    dst = enumerate_basis(m, k + 1)
    out = np.empty((len(src), m), dtype=np.intp)
    for r, s in enumerate(src.states):
        for i in range(m):
            t = list(s)
            t[i] += 1
            out[r, i] = dst._index[tuple(t)]
    return out


@lru_cache(maxsize=None)
def _merge_map(m: int, a: int, b: int) -> np.ndarray:
    """``out[r, q]`` = rank of (state r of the a-photon basis) + (state q of the b-photon basis)."""
    A = np.array(enumerate_basis(m, a).states, dtype=np.intp).reshape(-1, m)
    B = np.array(enumerate_basis(m, b).states, dtype=np.intp).reshape(-1, m)
    dst = enumerate_basis(m, a + b)
    summed = A[:, None, :] + B[None, :, :]
    return np.array([[dst._index[tuple(x)] for x in row] for row in summed.tolist()], dtype=np.intp)


@lru_cache(maxsize=None)
def raw_support(m: int, n: int) -> tuple[tuple, tuple[int, ...]]:
    """States with 0..n photons grouped by photon number; also the offset of each group."""
    support = []
    offsets = []
    for k in range(n + 1):
        offsets.append(len(support))
        support.extend(enumerate_basis(m, k).states)
    return tuple(support), tuple(offsets)


def _classical_probs(P: np.ndarray, dis: tuple[int, ...]) -> np.ndarray:
    """Distinguishable photons scattering independently with ``P[..., i, j] = |U_ij|^2``.

    Returns probabilities over the ``sum(dis)``-photon basis, batched over ``P``'s leading axis.
    """
    B, m = P.shape[0], P.shape[-1]
    probs = np.ones((B, 1))
    for k, j in enumerate(_mode_list(dis).tolist()):
        step = _add_photon_map(m, k)
        nxt = np.zeros((B, len(enumerate_basis(m, k + 1))))
        for i in range(m):
            np.add.at(nxt, (slice(None), step[:, i]), probs * P[:, i, j][:, None])
        probs = nxt
    return probs


def _photon_fates(inp: tuple[int, ...], eta: float, x: float):
    """Yield (interfering sub-input, distinguishable sub-input, weight) for every fate split."""
    per_mode = []
    for n_i in inp:
        options = []
        for kept in range(n_i + 1):
            w_kept = comb(n_i, kept) * eta**kept * (1 - eta) ** (n_i - kept)
            if w_kept == 0.0:
                continue
            for coh in range(kept + 1):
                w = w_kept * comb(kept, coh) * x**coh * (1 - x) ** (kept - coh)
                if w > 0.0:
                    options.append((coh, kept - coh, w))
        per_mode.append(options)
    for choice in product(*per_mode):
        yield (
            tuple(c for c, _, _ in choice),
            tuple(d for _, d, _ in choice),
            prod(w for _, _, w in choice),
        )


def raw_probs(U, input_state, transmission: float = 1.0, indistinguishability: float = 1.0) -> np.ndarray:
    """Pre-detection probabilities over ``raw_support(m, n)``.

    ``U`` may be a single unitary or a ``(B, m, m)`` stack; the result has
    shape ``(S,)`` or ``(B, S)`` accordingly.
    """
    U = np.asarray(U)
    batched = U.ndim == 3
    Ub = U if batched else U[None]
    m = Ub.shape[-1]
    inp = _check_state(input_state, m)
    n = sum(inp)
    if not 0.0 <= transmission <= 1.0:
        raise ValueError(f"transmission must lie in [0, 1], got {transmission}")
    if not 0.0 <= indistinguishability <= 1.0:
        raise ValueError(f"indistinguishability must lie in [0, 1], got {indistinguishability}")

    support, offsets = raw_support(m, n)
    out = np.zeros((Ub.shape[0], len(support)))
    P = np.abs(Ub) ** 2 if indistinguishability < 1.0 else None
    coherent: dict = {}
    classical: dict = {}
    for coh, dis, w in _photon_fates(inp, transmission, indistinguishability):
        a, b = sum(coh), sum(dis)
        if coh not in coherent:
            coherent[coh] = _exact_probs(Ub, coh)
        q = coherent[coh]
        off = offsets[a + b]
        if b == 0:
            out[:, off : off + q.shape[1]] += w * q
            continue
        if dis not in classical:
            classical[dis] = _classical_probs(P, dis)
        c = classical[dis]
        target = _merge_map(m, a, b).ravel() + off
        joint = (q[:, :, None] * c[:, None, :]).reshape(Ub.shape[0], -1)
        np.add.at(out, (slice(None), target), w * joint)
    return out if batched else out[0]


def noisy_distribution(U, input_state, transmission: float = 1.0, indistinguishability: float = 1.0) -> OutputDistribution:
    """Mixture over per-photon fates (lost / interfering / distinguishable).

    The support lists every state with 0..n photons, grouped by photon number
    (ascending) and lexicographic inside each group.
    """
    U = np.asarray(U)
    probs = raw_probs(U, input_state, transmission, indistinguishability)
    support, _ = raw_support(U.shape[0], sum(input_state))
    return OutputDistribution(support, probs)


def apply_photon_loss(U, input_state, transmission: float) -> OutputDistribution:
    """Each photon survives independently with probability ``transmission``."""
    return noisy_distribution(U, input_state, transmission=transmission)


def apply_distinguishability(U, input_state, indistinguishability: float) -> OutputDistribution:
    """Each photon interferes with probability ``indistinguishability``, else scatters classically."""
    out = noisy_distribution(U, input_state, indistinguishability=indistinguishability)
    n = sum(input_state)
    keep = [r for r, s in enumerate(out.support) if sum(s) == n]
    return OutputDistribution(tuple(out.support[r] for r in keep), out.probs[keep])


def simulate(U, input_state, noise: NoiseModel) -> OutputDistribution:
    """Raw (pre-detection) distribution under ``noise``."""
    if noise.ideal:
        return exact_distribution(U, input_state)
    return noisy_distribution(U, input_state, noise.transmission, noise.indistinguishability)


# --- detection --------------------------------------------------------------------


def outcome_space(m: int, n: int, detector: Detector, lossy: bool) -> tuple:
    """Outcomes that survive postselection, in canonical integer order."""
    if detector == "pnr":
        return enumerate_basis(m, n).states
    return enumerate_patterns(m, n, lossy)


def detect_and_postselect(dist: OutputDistribution, noise: NoiseModel, n_expected: int) -> OutputDistribution:
    """Apply the detector model and discard outcomes inconsistent with ``n_expected`` photons.

    PNR keeps states carrying exactly ``n_expected`` photons. Threshold
    detection collapses states to click patterns; in a lossless setup every
    non-empty pattern is kept, with loss only patterns of exactly
    ``n_expected`` clicks are (bunched and lossy events are indistinguishable).
    The returned support is the full canonical outcome space.
    """
    if not dist.support:
        raise PostselectionError("empty distribution")
    m = len(dist.support[0])
    space = outcome_space(m, n_expected, noise.detector, noise.lossy)
    index = {o: r for r, o in enumerate(space)}
    kept = np.zeros(len(space))
    for s, p in zip(dist.support, dist.probs):
        key = _detected(s, noise, n_expected)
        if key is not None:
            kept[index[key]] += p
    mass = kept.sum()
    if mass <= 0.0:
        raise PostselectionError("postselection discarded every outcome")
    return OutputDistribution(space, kept / mass, float(mass * dist.kept_fraction))


def _detected(s, noise: NoiseModel, n_expected: int):
    """Outcome reported for raw state ``s``, or None when it is postselected away."""
    if noise.detector == "pnr":
        return tuple(s) if sum(s) == n_expected else None
    pattern = threshold_collapse(s)
    if noise.lossy:
        # fewer clicks than photons sent: bunched or lossy, indistinguishable
        return pattern if sum(pattern) == n_expected else None
    return pattern if sum(s) == n_expected else None


@lru_cache(maxsize=None)
def detection_matrix(m: int, n: int, detector: Detector, lossy: bool) -> np.ndarray:
    """0/1 matrix sending ``raw_support(m, n)`` onto the kept outcome space.

    Row sums are 0 for discarded raw states and 1 otherwise, so
    ``raw @ D`` is the unnormalized postselected distribution.
    """
    support, _ = raw_support(m, n)
    space = outcome_space(m, n, detector, lossy)
    index = {o: r for r, o in enumerate(space)}
    noise = NoiseModel(transmission=0.5 if lossy else 1.0, detector=detector)
    D = np.zeros((len(support), len(space)))
    for r, s in enumerate(support):
        key = _detected(s, noise, n)
        if key is not None:
            D[r, index[key]] = 1.0
    D.setflags(write=False)
    return D


# --- sampling ---------------------------------------------------------------------


def as_generator(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def sample_shots(dist: OutputDistribution, shots: int, seed: SeedLike = None) -> ShotCounts:
    """Multinomial draw of ``shots`` outcomes from ``dist``."""
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    rng = as_generator(seed)
    p = np.clip(dist.probs, 0.0, None)
    p = p / p.sum()
    draws = rng.multinomial(shots, p)
    counts = {s: int(c) for s, c in zip(dist.support, draws) if c}
    return ShotCounts(counts, shots, shots)


def postselect_counts(counts: ShotCounts, noise: NoiseModel, n_expected: int) -> ShotCounts:
    """Detector model applied shot by shot; lossy or unusable shots are dropped."""
    kept: dict = defaultdict(int)
    for s, c in counts.counts.items():
        key = _detected(s, noise, n_expected)
        if key is not None:
            kept[key] += c
    return ShotCounts(dict(kept), counts.shots_requested, int(sum(kept.values())))
