import numpy as np
import pytest

from quench_qgt.model import r_tilde
from quench_qgt.quench import QuenchProtocol

REFERENCE = [(0.5, 0.1), (1.1, 2.0), (1.5, 0.1), (0.9, 2.0)]


def random_points(rng, n, *, m_range=(0.1, 2.0), t_range=None, min_gap=0.05):
    """(protocol, k[, t]) tuples with both gaps at least ``min_gap``."""
    out = []
    while len(out) < n:
        mi, mf = rng.uniform(*m_range, size=2)
        k = rng.uniform(-np.pi, np.pi)
        proto = QuenchProtocol(mi, mf)
        if min(r_tilde(proto.initial, k), r_tilde(proto.final, k)) < min_gap:
            continue
        if t_range is None:
            out.append((proto, k))
        else:
            out.append((proto, k, rng.uniform(*t_range)))
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(params=REFERENCE, ids=[f"{a}->{b}" for a, b in REFERENCE])
def reference_protocol(request):
    return QuenchProtocol(*request.param)
