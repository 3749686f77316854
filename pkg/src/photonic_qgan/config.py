"""Run configuration files, shipped presets and model (checkpoint) payloads.

A run config is a JSON object. Keys (defaults in brackets):

    ansatz               preset letter A-D or a V/E layer string ["C"]
    modes                number of optical modes [6]
    input_state          photons per mode [photons spread evenly]
    photons              total photons; must match input_state if both given [3]
    sub_generators       2 or 4 (any divisor of 64) [2]
    detector             "pnr" or "threshold" ["pnr"]
    transmission         per-photon survival probability [1.0]
    indistinguishability probability a photon interferes [1.0]
    shots                measurement shots per circuit run, 0 = exact [0]
    init_params          optional list of parameter lists, one per sub-generator
    output_dir           where run directories are created ["runs"]

plus every field of :class:`TrainingConfig` (batch_size, disc_lr,
spsa_steps_per_iter, iterations, disc_steps, digit, seed, g_min, ...).
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np

from .circuit import AnsatzSpec, parse_ansatz
from .data import ModelFileError, load_model, save_model
from .discriminator import Discriminator
from .generator import IMAGE_PIXELS, Generator, build_generator
from .mapping import MappingError, MappingSpec
from .simulator import NoiseModel
from .training import TrainingConfig, TrainState, spsa_from_dict, spsa_to_dict

PRESET_NAMES = ("ideal", "noisy", "qpu")


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"config field '{field_name}': {message}")
        self.field = field_name


def default_input_state(m: int, n: int) -> tuple[int, ...]:
    """Single photons spread evenly over the modes (bunched only when n > m)."""
    state = [0] * m
    for i in range(n):
        state[(i * m // n) if n <= m else i % m] += 1
    return tuple(state)


_TRAINING_FIELDS = {f.name: f for f in fields(TrainingConfig)}


@dataclass(frozen=True)
class RunConfig:
    training: TrainingConfig = field(default_factory=TrainingConfig)
    ansatz: str = "C"
    modes: int = 6
    input_state: tuple[int, ...] = (1, 0, 1, 0, 1, 0)
    sub_generators: int = 2
    detector: str = "pnr"
    transmission: float = 1.0
    indistinguishability: float = 1.0
    shots: int = 0
    init_params: Optional[tuple[tuple[float, ...], ...]] = None
    output_dir: str = "runs"

    @property
    def photons(self) -> int:
        return sum(self.input_state)

    @property
    def noise(self) -> NoiseModel:
        return NoiseModel(self.transmission, self.indistinguishability, self.detector)

    def ansatz_spec(self) -> AnsatzSpec:
        return parse_ansatz(self.ansatz, self.modes)

    def mapping(self) -> MappingSpec:
        return MappingSpec(self.modes, self.photons, self.detector, self.noise.lossy,
                           IMAGE_PIXELS // self.sub_generators)

    def build_generator(self, threads: int = 1) -> Generator:
        params = None
        if self.init_params is not None:
            params = [np.array(p, dtype=float) for p in self.init_params]
        return build_generator(self.ansatz_spec(), self.input_state, self.sub_generators,
                               self.noise, self.shots, params, threads)

    def to_dict(self) -> dict:
        d = {k: v for k, v in asdict(self).items() if k != "training"}
        d["input_state"] = list(self.input_state)
        if self.init_params is not None:
            d["init_params"] = [list(p) for p in self.init_params]
        else:
            d.pop("init_params")
        d.update(asdict(self.training))
        return d


def _expect(d: dict, key: str, kind, check=None, message: str = ""):
    value = d[key]
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if kind is int and isinstance(value, bool) or not isinstance(value, kind):
        raise ConfigError(key, f"expected {getattr(kind, '__name__', kind)}, got {value!r}")
    if check is not None and not check(value):
        raise ConfigError(key, message or f"invalid value {value!r}")
    return value


def parse_config(d: dict, require_mapping: bool = True) -> RunConfig:
    """Validate a config mapping; every error names the offending field.

    ``require_mapping=False`` skips the patch feasibility check (available
    integers >= patch pixels), for inspection of small circuits.
    """
    if not isinstance(d, dict):
        raise ConfigError("<root>", "config must be a JSON object")
    run_fields = {f.name for f in fields(RunConfig)} - {"training", "input_state"}
    known = run_fields | set(_TRAINING_FIELDS) | {"input_state", "photons", "preset"}
    for key in d:
        if key not in known:
            raise ConfigError(key, "unknown field")

    train_kwargs = {}
    for name, f in _TRAINING_FIELDS.items():
        if name in d:
            kind = float if f.type in ("float", float) else int
            train_kwargs[name] = _expect(d, name, kind)
    try:
        training = TrainingConfig(**train_kwargs)
    except ValueError as exc:
        bad = next((n for n in train_kwargs if n in str(exc)), "training")
        raise ConfigError(bad, str(exc)) from None

    kw = {}
    if "modes" in d:
        kw["modes"] = _expect(d, "modes", int, lambda v: v >= 2, "need at least 2 modes")
    modes = kw.get("modes", 6)
    if "input_state" in d:
        st = d["input_state"]
        if not isinstance(st, list) or not all(isinstance(k, int) and k >= 0 for k in st):
            raise ConfigError("input_state", "expected a list of non-negative integers")
        if len(st) != modes:
            raise ConfigError("input_state", f"has {len(st)} entries but modes = {modes}")
        if sum(st) < 1:
            raise ConfigError("input_state", "needs at least one photon")
        kw["input_state"] = tuple(st)
    n = 3
    if "photons" in d:
        n = _expect(d, "photons", int, lambda v: v >= 1, "need at least one photon")
        if "input_state" in kw and sum(kw["input_state"]) != n:
            raise ConfigError("photons", f"is {n} but input_state carries {sum(kw['input_state'])}")
    kw.setdefault("input_state", default_input_state(modes, n))
    if "ansatz" in d:
        kw["ansatz"] = _expect(d, "ansatz", str)
        try:
            parse_ansatz(kw["ansatz"], modes)
        except ValueError as exc:
            raise ConfigError("ansatz", str(exc)) from None
    if "sub_generators" in d:
        kw["sub_generators"] = _expect(d, "sub_generators", int, lambda v: v >= 1 and IMAGE_PIXELS % v == 0,
                                       f"must divide {IMAGE_PIXELS}")
    if "detector" in d:
        kw["detector"] = _expect(d, "detector", str, lambda v: v in ("pnr", "threshold"),
                                 "must be 'pnr' or 'threshold'")
    for name in ("transmission", "indistinguishability"):
        if name in d:
            kw[name] = _expect(d, name, float, lambda v: 0.0 <= v <= 1.0, "must lie in [0, 1]")
    if "shots" in d:
        kw["shots"] = _expect(d, "shots", int, lambda v: v >= 0, "must be >= 0 (0 = exact)")
    if "output_dir" in d:
        kw["output_dir"] = _expect(d, "output_dir", str)

    cfg = RunConfig(training=training, **kw)

    if "init_params" in d:
        ip = d["init_params"]
        n_params = cfg.ansatz_spec().n_params
        if not isinstance(ip, list) or len(ip) != cfg.sub_generators:
            raise ConfigError("init_params", f"expected {cfg.sub_generators} parameter lists")
        for p in ip:
            if not isinstance(p, list) or len(p) != n_params or not all(isinstance(v, (int, float)) for v in p):
                raise ConfigError("init_params", f"each list needs {n_params} numbers")
        cfg = RunConfig(**{**cfg.__dict__, "init_params": tuple(tuple(float(v) for v in p) for p in ip)})

    if cfg.detector == "threshold" and cfg.noise.lossy and cfg.photons > cfg.modes:
        raise ConfigError("input_state", "lossy threshold detection needs photons <= modes")
    if require_mapping:
        try:
            cfg.mapping()
        except MappingError as exc:
            raise ConfigError("modes", str(exc)) from None
    return cfg


def preset_path(name: str):
    return resources.files("photonic_qgan") / "presets" / f"{name}.json"


def load_config(path_or_preset: str, require_mapping: bool = True, **overrides) -> RunConfig:
    """Read a JSON config file, or one of the shipped presets by name."""
    if path_or_preset in PRESET_NAMES:
        text = preset_path(path_or_preset).read_text(encoding="utf-8")
    else:
        p = Path(path_or_preset)
        if not p.exists():
            raise ConfigError("<file>", f"config file not found: {p}")
        text = p.read_text(encoding="utf-8")
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("<file>", f"invalid JSON ({exc})") from None
    d.pop("preset", None)
    d.update({k: v for k, v in overrides.items() if v is not None})
    return parse_config(d, require_mapping)


# --- model files ------------------------------------------------------------------


def state_payload(config: RunConfig, state: TrainState) -> dict:
    d = state.discriminator
    return {
        "seed": config.training.seed,
        "config": config.to_dict(),
        "ansatz": state.generator.sub_generators[0].ansatz.describe(),
        "iteration": state.iteration,
        "sub_generators": [g.params.tolist() for g in state.generator.sub_generators],
        "discriminator": {"W1": d.W1.tolist(), "b1": d.b1.tolist(), "W2": d.W2.tolist(), "b2": d.b2},
        "spsa": spsa_to_dict(state.spsa),
        "counters": {
            "spsa_steps": state.history.spsa_steps,
            "spsa_evaluations": state.history.spsa_evaluations,
            "disc_steps": state.history.disc_steps,
        },
    }


def save_checkpoint(path, config: RunConfig, state: TrainState) -> None:
    save_model(state_payload(config, state), path)


def load_checkpoint(path, threads: int = 1) -> tuple[RunConfig, TrainState]:
    doc = load_model(path)
    try:
        cfg_dict = dict(doc["config"])
        cfg_dict.pop("init_params", None)
        config = parse_config(cfg_dict)
        gen = config.build_generator(threads)
        gen = gen.with_params(np.concatenate([np.array(p, dtype=float) for p in doc["sub_generators"]]))
        dd = doc["discriminator"]
        disc = Discriminator(np.array(dd["W1"], dtype=float), np.array(dd["b1"], dtype=float),
                             np.array(dd["W2"], dtype=float), float(dd["b2"]))
        state = TrainState(gen, disc, spsa_from_dict(doc["spsa"]), int(doc["iteration"]))
        c = doc.get("counters", {})
        state.history.spsa_steps = c.get("spsa_steps", 0)
        state.history.spsa_evaluations = c.get("spsa_evaluations", 0)
        state.history.disc_steps = c.get("disc_steps", 0)
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFileError(f"{path}: corrupt model file ({exc!r})") from None
    return config, state
