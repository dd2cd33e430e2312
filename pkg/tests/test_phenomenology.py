import numpy as np
import numpy.testing as npt
import pytest

from conftest import linear_lagrangian, state_for
from vartherm.errors import ModelValidationError
from vartherm.evolution import reaction_rates
from vartherm.models import make_reaction_cell, validate_scenario
from vartherm.phenomenology import (constant_phenomenology, mass_action_law,
                                    validate_phenomenology)
from vartherm.reactions import ReactionNetwork
from vartherm.state import SystemTopology, ThermoState


def probe_state(topology):
    return ThermoState.initial(
        topology,
        q=np.ones(topology.n_mech), v=np.zeros(topology.n_mech),
        S=np.full(topology.P, 100.0), N=np.full(topology.K, 1.0))


def test_friction_must_be_psd():
    top = SystemTopology(n_mech=2, P=1, K=0)
    phen = constant_phenomenology(top, friction=[np.array([[1.0, 0.0],
                                                           [0.0, -0.5]])])
    with pytest.raises(ModelValidationError) as err:
        validate_phenomenology(phen, top, probe_state(top))
    assert err.value.field_path == "phenomenology.friction"


def test_antisymmetric_friction_is_admissible():
    # only the symmetric part must be PSD; gyroscopic parts are fine
    top = SystemTopology(n_mech=2, P=1, K=0)
    lam = np.array([[1.0, 3.0], [-3.0, 1.0]])
    phen = constant_phenomenology(top, friction=[lam])
    validate_phenomenology(phen, top, probe_state(top))


def test_diffusion_matrix_must_be_nonnegative():
    top = SystemTopology(n_mech=0, P=1, K=2, compartment_owner=(0, 0))
    phen = constant_phenomenology(top, G=[[0.0, -1.0], [-1.0, 0.0]])
    with pytest.raises(ModelValidationError) as err:
        validate_phenomenology(phen, top, probe_state(top))
    assert err.value.field_path == "phenomenology.G"


def test_coupled_block_must_be_symmetric_psd():
    top = SystemTopology(n_mech=0, P=2, K=2, compartment_owner=(0, 1))
    phen = constant_phenomenology(top, onsager=[[1e-3, 1e-4], [2e-4, 1e-2]])
    with pytest.raises(ModelValidationError) as err:
        validate_phenomenology(phen, top, probe_state(top))
    assert err.value.field_path == "phenomenology.onsager"
    phen = constant_phenomenology(top, onsager=[[1e-3, 1e-2], [1e-2, 1e-3]])
    with pytest.raises(ModelValidationError):
        validate_phenomenology(phen, top, probe_state(top))


def test_noncompliant_models_skip_probes():
    top = SystemTopology(n_mech=0, P=2, K=0)
    phen = constant_phenomenology(top, kappa=-3.0, compliant=False)
    validate_phenomenology(phen, top, probe_state(top))


def test_mass_action_law_rates():
    # A + B -> C with k_f = 2, k_b = 0.5: J = 2 N_A N_B - 0.5 N_C
    net = ReactionNetwork(nu_fwd=[[1, 1, 0]], nu_bwd=[[0, 0, 1]],
                          molecular_mass=[1.0, 2.0, 3.0])
    law = mass_action_law(net, k_fwd=[2.0], k_bwd=[0.5])
    top = SystemTopology(n_mech=0, P=1, K=3, compartment_owner=(0, 0, 0),
                         reactions=net)
    x = ThermoState.initial(top, S=[1.0], N=[0.5, 2.0, 0.2])
    npt.assert_allclose(law(x, np.zeros(1)), [2.0 * 0.5 * 2.0 - 0.5 * 0.2])


def test_mass_action_reaction_cell_runs_and_conserves():
    from vartherm.simulate import run_scenario
    net = ReactionNetwork(nu_fwd=[[1.0, 0.0]], nu_bwd=[[0.0, 1.0]],
                          molecular_mass=[0.03, 0.03])
    law = mass_action_law(net, k_fwd=[0.08], k_bwd=[0.05])
    sc = make_reaction_cell(net=net, reaction_law=law, t_end=10.0)
    validate_scenario(sc)
    traj = run_scenario(sc)
    m = net.molecular_mass
    total = np.array([float(np.dot(m, x.N)) for x in traj.states])
    assert np.max(np.abs(total - total[0])) / total[0] < 1e-12
    # forward excess pushes A toward B until the rates balance
    N_A = np.array([x.N[0] for x in traj.states])
    assert N_A[-1] < N_A[0]
    npt.assert_allclose(N_A[-1] / traj.states[-1].N[1], 0.05 / 0.08, rtol=1e-3)
