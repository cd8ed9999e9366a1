import numpy as np
import pytest

from backend.ledger_core import ChainConfig, build_chain


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def small_config():
    return ChainConfig(n=8, m=4, block_bytes=16, hash_width=64, seed=3)


@pytest.fixture
def small_chain(small_config):
    return build_chain(small_config, 5, np.random.default_rng(11))


@pytest.fixture
def chain_24_4():
    config = ChainConfig(n=24, m=4, block_bytes=48, hash_width=64, seed=7)
    return build_chain(config, 6, np.random.default_rng(7))
