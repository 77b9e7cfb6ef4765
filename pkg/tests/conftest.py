from __future__ import annotations

import pytest

from hallglove.configio import load_glove_config, load_rom, load_vocabulary
from hallglove.rig import GloveModels


@pytest.fixture(scope="session")
def vocab():
    return load_vocabulary()


@pytest.fixture(scope="session")
def rom():
    return load_rom()


@pytest.fixture(scope="session")
def models():
    return GloveModels()


@pytest.fixture(scope="session")
def quiet_models(models):
    return models.without_noise()


@pytest.fixture(scope="session")
def glove_config():
    return load_glove_config()


@pytest.fixture(scope="session")
def small_dataset(vocab, models):
    """Quick 3-subject, 6-rep dataset for unit-level training tests."""
    from hallglove.dataset import generate_synthetic

    return generate_synthetic(vocab, models, n_subjects=3, reps_per_gesture=6, seed=7)
