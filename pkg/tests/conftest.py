import math

import numpy as np
import pytest

from phreactor import presets
from phreactor.network import parse_network

_S_GAP = 25.0  # s_ref difference; makes ln(k0f/k0b) = delta s_ref / R exactly
CONSISTENT = f"""\
[species]
A cp=70.0 h_ref=0 s_ref=50.0
B cp=70.0 h_ref=-3000.0 s_ref=75.0
[reactions]
A -> B k0f={1e8 * math.exp(_S_GAP / 8.314)!r} Ef=50000 k0b=1e8 Eb=53000
[reactor]
V=0.001 P=1e5 T_ref=300.0 lambda=0.05 R_gas=8.314
[inlet]
T_in=310.0 c_A=1500.0 c_B=500.0
[noise]
rho1=0.1 rho2=5e-7 rho3=0.05
"""


NO_REACTION = """\
[species]
A cp=75.24 h_ref=0 s_ref=50.6
B cp=60.0 h_ref=-4575.0 s_ref=180.2
[reactions]
[reactor]
V=0.001 P=1e5 T_ref=300.0 lambda=0.05808 R_gas=8.314
[inlet]
T_in=310.0 c_A=2000.0 c_B=0.0
[noise]
rho1=0.1 rho2=5e-7 rho3=0.05
"""


@pytest.fixture(scope="session")
def cnet():
    """Network whose Arrhenius pairs satisfy detailed balance exactly."""
    return parse_network(CONSISTENT)


@pytest.fixture(scope="session")
def plain_net():
    """Benchmark species and inlet but no reactions (pure mixing)."""
    return parse_network(NO_REACTION)


def equilibrium_composition(cnet, T, N_B=1.0):
    """Composition with zero reaction affinity at temperature T."""
    RT = cnet.reactor.R_gas * T
    kf = cnet.k0f[0] * math.exp(-cnet.Ef[0] / RT)
    kb = cnet.k0b[0] * math.exp(-cnet.Eb[0] / RT)
    return np.array([N_B * kb / kf, N_B])


@pytest.fixture(scope="session")
def net():
    return presets.benchmark_network()


@pytest.fixture(scope="session")
def sp(net):
    """Setpoint built from the rounded benchmark composition."""
    return presets.benchmark_setpoint(net)


@pytest.fixture(scope="session")
def sp_exact(net):
    """Setpoint with the stationary composition re-solved at (T*, q*)."""
    return presets.benchmark_exact_setpoint(net)


@pytest.fixture(scope="session")
def gains():
    return presets.benchmark_gains()


@pytest.fixture(scope="session")
def x0(net):
    return presets.benchmark_initial_state(net)


def random_states(net, n, rng, T_range=(280.0, 420.0), logN_range=(-2.0, 0.7)):
    """n random (T, N) draws over the physical domain, moles log-uniform."""
    Ts = rng.uniform(*T_range, size=n)
    Ns = 10.0 ** rng.uniform(*logN_range, size=(n, net.n_species))
    return Ts, Ns
