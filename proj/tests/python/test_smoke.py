import json

import numpy as np
import pytest

import ccrci


def test_vec_kron_identity():
    rng = np.random.default_rng(3)
    A, X, B = rng.normal(size=(2, 3)), rng.normal(size=(3, 4)), rng.normal(size=(4, 2))
    lhs = ccrci.vec(A @ X @ B)
    rhs = ccrci.kron(B.T, A) @ ccrci.vec(X)
    assert np.allclose(lhs, rhs, atol=1e-12)
    assert np.array_equal(ccrci.unvec(ccrci.vec(X), 3, 4), X)


def test_polytope_and_template():
    box = ccrci.Polytope.symmetric_box(np.array([1.0, 2.0]))
    assert box.contains(np.array([0.5, -1.5]))
    assert ccrci.volume_2d(ccrci.enumerate_vertices(box)) == pytest.approx(8.0)

    C = ccrci.build_circular_template(8)
    t = ccrci.build_cc_machinery(C, np.ones(8))
    assert t.num_vertices == 8
    assert t.configuration_violation(np.ones(8)) <= 1e-12


def test_config_round_trip_and_rejection():
    cfg = ccrci.example_config("van_der_pol")
    text = cfg.to_json()
    assert ccrci.parse_config(text).to_json() == text
    doc = json.loads(text)
    doc["surprise"] = True
    with pytest.raises(ccrci.CcrciError, match="unknown field"):
        ccrci.parse_config(json.dumps(doc))


def test_data_pipeline_small_template():
    cfg = ccrci.example_config("van_der_pol")
    cfg.n_c = 8
    cfg.T = 60
    traj = ccrci.generate_data(cfg)
    assert traj.horizon == 60
    rep = ccrci.excitation_report(ccrci.build_data_matrices(traj), np.eye(2))
    assert rep.ok and rep.required_rank == 6

    res = ccrci.synthesize(cfg, traj, "data")
    assert res.optimal
    sol = res.solution
    assert sol.q.shape == (8,)
    assert sol.volume > 0
    assert ccrci.verify(sol, cfg, traj).passed()
    run = ccrci.simulate(sol, cfg, 0)
    assert run["violations"] == 0
    assert json.loads(sol.to_json("data", 60))["T"] == 60


def test_model_based_example_volume():
    cfg = ccrci.example_config("van_der_pol")
    sol = ccrci.synthesize(cfg, mode="model").solution
    assert sol.volume == pytest.approx(1.62, abs=0.04)
    assert ccrci.verify(sol, cfg).passed()


def test_infeasible_is_a_result_not_an_exception():
    cfg = ccrci.example_config("van_der_pol")
    plant = ccrci.PlantModel()
    plant.A = [2 * np.eye(2), 2 * np.eye(2)]
    plant.B = [np.zeros((2, 1)), np.zeros((2, 1))]
    cfg.plant = plant
    res = ccrci.synthesize(cfg, mode="model")
    assert not res.optimal
    with pytest.raises(ccrci.CcrciError, match="SynthesisInfeasible"):
        res.solution
