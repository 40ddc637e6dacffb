import numpy as np
import pytest

from railpower import build_gain_table, reference_config, segment_boundaries


@pytest.fixture(scope="session")
def ref_cfg():
    # Table-style defaults: M=4, N=6, d_l=200 m, v=300 km/h, P_T=40 dBm
    return reference_config()


@pytest.fixture(scope="session")
def ref_sched(ref_cfg):
    return segment_boundaries(ref_cfg)


@pytest.fixture(scope="session")
def ref_table(ref_cfg, ref_sched):
    return build_gain_table(ref_cfg, ref_sched)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240917)
