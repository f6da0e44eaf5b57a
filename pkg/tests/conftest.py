import time

import numpy as np
import pytest
from hypothesis import settings

from lionet.dataio import build_dataset, split
from lionet.models import LIONetConfig, TrainConfig, build_lionet, train
from lionet.synth import random_corpus, synth

settings.register_profile("lionet", deadline=None, max_examples=50)
settings.load_profile("lionet")

# desk-scale corpus: 16 one-minute sequences (4 trolley), ~9k windows
DESK_CORPUS = dict(n_sequences=24, seed=1, duration=60.0, trolley_fraction=0.5)
DESK_TRAIN = TrainConfig(lr=2e-3, batch_size=32, epochs=12, seed=0, mirror=True, lr_decay=0.75)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def desk_split():
    pairs = [synth(s) for s in random_corpus(**DESK_CORPUS)]
    ds = build_dataset([p[0] for p in pairs], [p[1] for p in pairs])
    return split(ds, 0.8, seed=0)


@pytest.fixture(scope="session")
def desk_model(desk_split):
    """L-IONet(16) trained once per session on the desk corpus, with its
    history and wall-clock training time."""
    train_set, val_set = desk_split
    start = time.perf_counter()
    model, hist = train(build_lionet(LIONetConfig(16), seed=0), train_set, val_set, DESK_TRAIN)
    return model, hist, time.perf_counter() - start
