"""Command-line entry point.

    photonic-qgan train  --config {ideal|noisy|qpu|PATH} --data PATH [--seed N] [--threads N]
    photonic-qgan sample --model PATH --count N --seed N --out DIR
    photonic-qgan map    --modes M --photons N --detector {pnr|threshold} [--lossy]
    photonic-qgan dist   --config PATH [--seed N]
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from .circuit import compose_unitary
from .config import ConfigError, load_checkpoint, load_config, save_checkpoint
from .data import DatasetError, ModelFileError, load_dataset, write_loss_csv, write_pgm
from .generator import sample_noise
from .mapping import MappingError, outcome_label, outcome_table
from .seeding import derive_rng
from .simulator import PostselectionError, detect_and_postselect, postselect_counts, sample_shots, simulate
from .training import TrainingAborted, initialize, train

log = logging.getLogger("photonic_qgan")


def _default_threads() -> int:
    return os.cpu_count() or 1


def cmd_train(args) -> int:
    config = load_config(args.config, seed=args.seed)
    dataset = load_dataset(args.data)
    tc = config.training
    run_dir = Path(args.out or config.output_dir) / f"{time.strftime('%Y%m%d-%H%M%S')}-seed{tc.seed}"
    run_dir.mkdir(parents=True, exist_ok=False)
    gen = config.build_generator(args.threads)
    state = initialize(tc, gen, redraw=config.init_params is None)
    if state.init is not None and state.init.exhausted:
        log.warning("initialization exhausted %d tries; continuing with the last draw", tc.max_init_tries)

    written: set[int] = set()

    def progress(st) -> None:
        for it, images in st.history.snapshots.items():
            if it in written:
                continue
            for i, img in enumerate(images):
                write_pgm(img, run_dir / f"snapshot_{it:05d}_{i}.pgm")
            written.add(it)
        if st.iteration % 50 == 0:
            _, lg, ld = st.history.records[-1]
            log.info("iter %d  -L_G=%.4f  L_D=%.4f", st.iteration, -lg, ld)

    status = 0
    try:
        state = train(tc, dataset, state=state, callback=progress)
    except TrainingAborted as exc:
        log.error("%s", exc)
        state, status = exc.state, 3
    write_loss_csv(state.history.records, run_dir / "loss.csv")
    save_checkpoint(run_dir / "model.json", config, state)
    print(run_dir)
    return status


def cmd_sample(args) -> int:
    config, state = load_checkpoint(args.model)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    z = sample_noise(derive_rng(args.seed, "sample"), args.count, state.generator.noise_dim)
    images = state.generator.generate(z, seed=args.seed)
    for i, img in enumerate(images):
        write_pgm(img, out / f"sample_{i:04d}.pgm")
    return 0


def cmd_map(args) -> int:
    detector = args.detector
    table = outcome_table(args.modes, args.photons, detector, args.lossy)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["integer", "outcome"])
    for r, outcome in enumerate(table):
        w.writerow([r, outcome_label(outcome, detector)])
    return 0


def cmd_dist(args) -> int:
    # evaluated directly on the simulator: small inspection circuits need not fill a patch
    config = load_config(args.config, require_mapping=False)
    ansatz, noise = config.ansatz_spec(), config.noise
    params = np.zeros(ansatz.n_params) if config.init_params is None else np.array(config.init_params[0])
    z = sample_noise(derive_rng(args.seed, "sample"), 1, ansatz.noise_dim)[0]
    raw = simulate(compose_unitary(ansatz, params, z), config.input_state, noise)
    if config.shots:
        counts = postselect_counts(sample_shots(raw, config.shots, args.seed), noise, config.photons)
        if counts.shots_kept == 0:
            raise PostselectionError("postselection discarded every shot")
        dist = counts.to_distribution()
    else:
        dist = detect_and_postselect(raw, noise, config.photons)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["outcome", "probability"])
    for outcome, p in zip(dist.support, dist.probs):
        w.writerow([outcome_label(outcome, config.detector), repr(float(p))])
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="photonic-qgan", description=__doc__.splitlines()[0] if __doc__ else None)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a generator/discriminator pair")
    p.add_argument("--config", required=True, help="config file or preset name (ideal, noisy, qpu)")
    p.add_argument("--data", required=True, help="optdigits CSV (optionally .gz)")
    p.add_argument("--seed", type=int, default=None, help="root seed (overrides the config)")
    p.add_argument("--threads", type=int, default=_default_threads())
    p.add_argument("--out", default=None, help="parent directory for the run directory")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("sample", help="generate images from a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--count", type=int, default=16)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("map", help="print the outcome-to-integer table")
    p.add_argument("--modes", type=int, required=True)
    p.add_argument("--photons", type=int, required=True)
    p.add_argument("--detector", choices=("pnr", "threshold"), default="pnr")
    p.add_argument("--lossy", action="store_true")
    p.set_defaults(func=cmd_map)

    p = sub.add_parser("dist", help="print the first sub-generator's detected distribution")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_dist)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (MappingError, DatasetError, ModelFileError, PostselectionError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
