"""Photonic quantum GAN: linear-optical sub-generators against a classical discriminator."""

from .circuit import AnsatzSpec, compose_unitary, param_count, preset_ansatz
from .config import RunConfig, load_config
from .data import Dataset, load_dataset
from .discriminator import Discriminator, disc_update, loss_d, loss_g
from .fock import enumerate_basis, enumerate_patterns, state_index, threshold_collapse
from .generator import Generator, SubGenerator, build_generator, generate_image_batch, generate_patch
from .mapping import MappingSpec, available_integers, distribution_to_integers, minmax_normalize, trim_tails
from .simulator import (
    NoiseModel,
    OutputDistribution,
    apply_distinguishability,
    apply_photon_loss,
    detect_and_postselect,
    exact_distribution,
    permanent,
    sample_shots,
    transition_amplitude,
)
from .spsa import SPSAState, spsa_step
from .training import LossHistory, TrainingConfig, train

__version__ = "0.1.0"
