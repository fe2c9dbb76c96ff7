import logging

import numpy as np
import pytest

from kdesampling.dataset import Dataset, load_fixture


@pytest.fixture(autouse=True)
def _quiet_jitter_warnings():
    logging.getLogger("kdesampling").setLevel(logging.ERROR)


@pytest.fixture(scope="session")
def ecoli():
    return load_fixture("ecoli")


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def make_dataset(n_neg, n_pos, d=2, seed=0):
    r = np.random.default_rng(seed)
    X = np.vstack([r.normal(0, 1, (n_neg, d)), r.normal(2, 1, (n_pos, d))])
    y = np.r_[np.zeros(n_neg, int), np.ones(n_pos, int)]
    return Dataset(X, y)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(RESULTS):
            terminalreporter.write_line(line)
