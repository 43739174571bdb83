"""Shared fixtures: calibrated receiver configs are expensive, so they are
computed once per session and reused by the harness and acceptance tests."""

from dataclasses import replace

import pytest

import wakesim as ws


@pytest.fixture(scope="session")
def channel():
    return ws.ChannelConfig()


@pytest.fixture(scope="session")
def noiseless_channel():
    return ws.ChannelConfig(noise_figure_db=None)


@pytest.fixture(scope="session")
def calibrated(channel):
    """Default receiver calibrated to p(1|0) = 1e-3 for the three COFs."""
    configs = {}
    for i, cof in enumerate((0.0, 48.2e3, 159e3)):
        cfg = replace(ws.ReceiverConfig(), cof_hz=cof, threshold_v=None)
        threshold = ws.calibrate_threshold(cfg, channel, rng_seed=9000 + i)
        configs[cof] = cfg.with_threshold(threshold)
    return configs


@pytest.fixture(scope="session")
def alphabet():
    return ws.Alphabet(symbols=(720.0, 800.0, 1000.0))
