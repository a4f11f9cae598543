import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from vqeconv.config import (
    ConfigError,
    ProblemConfig,
    build_hamiltonian,
    build_problem,
    build_state,
    bundled_configs,
    load_config,
)
from vqeconv.landscape import LandscapeProblem, U1EscapeProblem
from vqeconv.linalg import PAULI


def base(**over):
    raw = {"dim": 2, "hamiltonian": {"random_seed": 1}, "ansatz": {"variant": "euler_xyx"}}
    raw.update(over)
    return raw


@pytest.mark.parametrize("name", bundled_configs())
def test_bundled_round_trip_and_build(name):
    cfg = load_config(name)
    again = ProblemConfig.from_dict(json.loads(json.dumps(cfg.to_dict())))
    assert again == cfg
    assert again.to_dict() == cfg.to_dict()
    prob = build_problem(cfg)
    assert isinstance(prob, (LandscapeProblem, U1EscapeProblem))


def test_expected_bundled_configs_exist():
    names = set(bundled_configs())
    assert {"d3_random.json", "u1_escape.json", "gimbal_lock.json"} <= names


def test_pauli_expansion_matches_dense():
    cfg = ProblemConfig.from_dict(base(hamiltonian={"pauli": [
        {"coeff": 0.5, "string": "x"}, {"coeff": -1.0, "string": "Z"}]}))
    assert np.allclose(build_hamiltonian(cfg), 0.5 * PAULI["X"] - PAULI["Z"])
    assert cfg.hamiltonian["pauli"][0]["string"] == "X"


def test_dense_hamiltonian_and_vector_state():
    h = [[[1, 0], [0, 1]], [[0, -1], [-1, 0]]]  # [[1, i], [-i, -1]]
    cfg = ProblemConfig.from_dict(base(hamiltonian={"dense": h}, initial_state=[[3, 0], [0, 4]]))
    assert np.allclose(build_hamiltonian(cfg), [[1, 1j], [-1j, -1]])
    assert np.allclose(build_state(cfg), [0.6, 0.8j])


@pytest.mark.parametrize("raw,where", [
    ({"hamiltonian": {"random_seed": 1}, "ansatz": "poe"}, "config.dim"),
    (base(dim=3, hamiltonian={"pauli": [{"string": "X"}]}, ansatz="poe"), "hamiltonian.pauli"),
    (base(hamiltonian={"pauli": [{"string": "Q"}]}), "hamiltonian.pauli[0].string"),
    (base(hamiltonian={"pauli": [{"string": "X", "coeff": [1, 1]}]}), "hamiltonian.pauli[0].coeff"),
    (base(hamiltonian={"dense": [[[0, 0], [1, 0]], [[0, 0], [0, 0]]]}), "hamiltonian.dense"),
    (base(hamiltonian={"dense": [[1, 0], [0, 1]]}), "hamiltonian.dense"),
    (base(hamiltonian={}), "hamiltonian"),
    (base(initial_state="basis:5"), "initial_state"),
    (base(initial_state="ket0"), "initial_state"),
    (base(initial_state=[[0, 0], [0, 0]]), "initial_state"),
    (base(ansatz={"variant": "qaoa"}), "ansatz.variant"),
    (base(ansatz={"variant": "poe", "colour": 1}), "ansatz"),
    (base(ansatz={"variant": "composite", "radius": -1}), "ansatz.radius"),
    (base(ansatz={"variant": "composite", "scaling": "cube"}), "ansatz.scaling"),
    (base(optimizer={"gamma": -0.1}), "optimizer"),
    (base(optimizer={"stepsize": 0.1}), "optimizer"),
    (base(sampling={"distribution": "sphere"}), "sampling.radius"),
    (base(init={"distribution": "cauchy"}), "init.distribution"),
    (base(theta0=["a"]), "theta0"),
    (base(kind="qpe"), "kind"),
    (base(extra=1), "config"),
])
def test_config_errors_name_the_field(raw, where):
    with pytest.raises(ConfigError) as err:
        ProblemConfig.from_dict(raw)
    assert err.value.where == where


def test_radius_above_certificate_rejected_on_build():
    cfg = ProblemConfig.from_dict(base(ansatz={"variant": "composite", "radius": 10.0}))
    with pytest.raises(ConfigError, match="certified"):
        build_problem(cfg)


def test_json_syntax_error_reports_line(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"dim": 2,\n  "hamiltonian": ,\n}')
    with pytest.raises(ConfigError) as err:
        load_config(p)
    assert err.value.where.endswith(":2:18")


def test_missing_file():
    with pytest.raises(ConfigError, match="no such file"):
        load_config("/nonexistent/definitely_missing.json")


def test_u1_kind_rejects_hamiltonian():
    with pytest.raises(ConfigError):
        ProblemConfig.from_dict({"kind": "u1_escape", "hamiltonian": {"random_seed": 1}})


variant_specs = st.sampled_from([
    {"variant": "sud_gate"},
    {"variant": "poe", "generators": "pauli"},
    {"variant": "cayley"},
    {"variant": "generalized_euler"},
    {"variant": "composite"},
    {"variant": "composite", "v": "poe", "scaling": "box", "radius": 0.3},
    {"variant": "arctan_squashed", "inner": "sud_gate", "radius": 2.0},
])


@given(
    dim=st.sampled_from([2, 4]),
    ham=st.one_of(
        st.integers(0, 1000).map(lambda s: {"random_seed": s}),
        st.just({"pauli": [{"coeff": 1.0, "string": "Z"}]}),
    ),
    ansatz=variant_specs,
    gamma=st.one_of(st.just("auto"), st.floats(1e-3, 1.0)),
    seed=st.integers(0, 2**31),
    stride=st.integers(1, 50),
)
def test_round_trip_property(dim, ham, ansatz, gamma, seed, stride):
    if "pauli" in ham:
        ham = {"pauli": [{"coeff": 1.0, "string": "Z" * (dim.bit_length() - 1)}]}
    raw = {"dim": dim, "hamiltonian": ham, "ansatz": ansatz, "initial_state": "basis:1",
           "optimizer": {"gamma": gamma, "seed": seed, "record_stride": stride}}
    cfg = ProblemConfig.from_dict(raw)
    again = ProblemConfig.from_dict(json.loads(json.dumps(cfg.to_dict())))
    assert again == cfg


def test_bundled_name_without_suffix():
    assert load_config("gimbal_lock") == load_config("gimbal_lock.json")
