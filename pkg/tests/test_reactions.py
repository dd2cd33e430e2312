import numpy as np
import numpy.testing as npt
import pytest

from vartherm.errors import DimensionMismatchError
from vartherm.reactions import ReactionNetwork, affinity, lavoisier_check


def test_affinity_balanced_stoichiometry_is_zero():
    # A <-> B with equal mu: nu sums to zero along equal potentials
    net = ReactionNetwork(nu_fwd=[[1, 0]], nu_bwd=[[0, 1]], molecular_mass=[1, 1])
    npt.assert_array_equal(affinity(net, [7.0, 7.0]), [0.0])


def test_affinity_isomerization():
    net = ReactionNetwork(nu_fwd=[[1, 0]], nu_bwd=[[0, 1]], molecular_mass=[1, 1])
    npt.assert_allclose(affinity(net, [5.0, 3.0]), [2.0])


def test_affinity_water_formation():
    # 2 H2 + O2 -> 2 H2O with mu = (1, 2, 3)
    net = ReactionNetwork(nu_fwd=[[2, 1, 0]], nu_bwd=[[0, 0, 2]],
                          molecular_mass=[2e-3, 32e-3, 18e-3])
    npt.assert_allclose(affinity(net, [1.0, 2.0, 3.0]), [-2.0])


def test_affinity_length_mismatch():
    net = ReactionNetwork(nu_fwd=[[1, 0]], nu_bwd=[[0, 1]], molecular_mass=[1, 1])
    with pytest.raises(DimensionMismatchError):
        affinity(net, [1.0, 2.0, 3.0])


def test_lavoisier_empty_network():
    net = ReactionNetwork(nu_fwd=np.zeros((0, 2)), nu_bwd=np.zeros((0, 2)),
                          molecular_mass=[1, 1])
    assert lavoisier_check(net)


def test_lavoisier_water():
    # nu = (-2, -1, +2), m = (2, 32, 18) g/mol: -4 - 32 + 36 = 0
    net = ReactionNetwork(nu_fwd=[[2, 1, 0]], nu_bwd=[[0, 0, 2]],
                          molecular_mass=[2.0, 32.0, 18.0])
    assert lavoisier_check(net)


def test_lavoisier_violation():
    net = ReactionNetwork(nu_fwd=[[1, 0]], nu_bwd=[[0, 1]],
                          molecular_mass=[2.0, 3.0])
    assert not lavoisier_check(net)


def test_signed_stoichiometry():
    net = ReactionNetwork(nu_fwd=[[2, 1, 0]], nu_bwd=[[0, 0, 2]],
                          molecular_mass=[1, 1, 1])
    npt.assert_array_equal(net.nu, [[-2, -1, 2]])
