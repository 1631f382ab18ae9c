import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import general_model, iid_model, markov_model, random_pmf, random_stochastic, random_unitary
from qdcomp.errors import ContractError, ResourceError
from qdcomp.ensembles import (
    EnsembleModel,
    GeneralLaw,
    IIDLaw,
    MarkovLaw,
    SymbolSet,
    ensemble_state,
    ensemble_state_bruteforce,
    ensemble_state_markov,
    joint_pmf,
    joint_pmf_table,
    markov_entropy_rate,
    require_valid,
    stationary_distribution,
    validate,
)
from qdcomp.modelio import bell_model, trine_model
from qdcomp.numkit import EPS_ENT, Limits, check_density, shannon_entropy, tensor_all, von_neumann_entropy

seeds = st.integers(0, 2**32 - 1)


def test_joint_pmf_examples():
    iid = EnsembleModel(SymbolSet(np.eye(2)), IIDLaw([0.5, 0.5]))
    assert joint_pmf(iid, (0, 1)) == 0.25
    trine = trine_model()
    assert joint_pmf(trine, (0, 0)) == 0.0
    assert abs(joint_pmf(trine, (0, 1)) - 1 / 6) < 1e-15
    with pytest.raises(ContractError):
        joint_pmf(trine, (0, 3))
    with pytest.raises(ContractError):
        joint_pmf(trine, ())


def test_joint_pmf_general_chains_conditionals():
    law = GeneralLaw(2, lambda h: [0.9, 0.1] if h.count(1) == 0 else [0.3, 0.7])
    model = EnsembleModel(SymbolSet(np.eye(2)), law)
    assert abs(joint_pmf(model, (0, 1, 1)) - 0.9 * 0.1 * 0.7) < 1e-15
    table = joint_pmf_table(model, 3)
    assert abs(table.sum() - 1) < 1e-15
    assert abs(table[0b011] - 0.9 * 0.1 * 0.7) < 1e-15


def test_joint_pmf_table_matches_pointwise():
    rng = np.random.default_rng(1)
    model = markov_model(rng, 3, 2)
    table = joint_pmf_table(model, 3)
    for idx, s in enumerate(np.ndindex(3, 3, 3)):
        assert abs(table[idx] - joint_pmf(model, s)) < 1e-15


def test_bruteforce_examples():
    assert np.abs(ensemble_state_bruteforce(trine_model(), 1) - np.eye(2) / 2).max() < 1e-15
    s = np.array([[0.6, 0.8j], [1, 0]])
    det = EnsembleModel(SymbolSet(s), IIDLaw([1.0, 0.0]))
    assert np.abs(ensemble_state_bruteforce(det, 1) - np.outer(s[0], s[0].conj())).max() < 1e-15
    assert np.abs(ensemble_state_bruteforce(bell_model(), 2) - np.eye(4) / 4).max() < 1e-15


def test_bruteforce_caps():
    with pytest.raises(ResourceError) as err:
        ensemble_state_bruteforce(trine_model(), 5, Limits(max_enum=100))
    assert err.value.cap == "max_enum"
    with pytest.raises(ResourceError) as err:
        ensemble_state_bruteforce(trine_model(), 5, Limits(max_dim=16))
    assert err.value.cap == "max_dim"


def test_markov_recursion_examples():
    trine = trine_model()
    assert np.abs(ensemble_state_markov(trine, 1) - ensemble_state_bruteforce(trine, 1)).max() < 1e-15
    assert np.abs(ensemble_state_markov(trine, 3) - ensemble_state_bruteforce(trine, 3)).max() < 1e-10
    assert np.abs(ensemble_state_markov(bell_model(), 5) - np.eye(32) / 32).max() < 1e-15


def test_markov_recursion_rejects_general():
    model = general_model(np.random.default_rng(0), 2, 2)
    with pytest.raises(ContractError):
        ensemble_state_markov(model, 2)
    # the dispatcher falls back to enumeration
    assert np.abs(ensemble_state(model, 2) - ensemble_state_bruteforce(model, 2)).max() == 0


@given(seeds, st.integers(1, 4), st.integers(1, 3), st.integers(1, 4), st.sampled_from(["iid", "markov", "general"]))
@settings(max_examples=40, deadline=None)
def test_ensemble_state_is_density(seed, N, d, k, kind):
    rng = np.random.default_rng(seed)
    d = min(d, N)
    model = {"iid": iid_model, "markov": markov_model, "general": general_model}[kind](rng, N, d)
    check_density(ensemble_state(model, k))


@given(seeds, st.integers(1, 4), st.integers(1, 3), st.integers(1, 5))
@settings(max_examples=30, deadline=None)
def test_markov_recursion_equals_bruteforce(seed, N, d, k):
    rng = np.random.default_rng(seed)
    model = markov_model(rng, N, min(d, N))
    assert np.abs(ensemble_state_markov(model, k) - ensemble_state_bruteforce(model, k)).max() <= 1e-10


@given(seeds, st.integers(1, 4), st.integers(1, 3), st.integers(1, 4))
@settings(max_examples=30, deadline=None)
def test_iid_is_tensor_power(seed, N, d, k):
    rng = np.random.default_rng(seed)
    model = iid_model(rng, N, min(d, N))
    rho1 = ensemble_state(model, 1)
    assert np.abs(ensemble_state(model, k) - tensor_all([rho1] * k)).max() <= 1e-10


@given(seeds, st.integers(1, 4), st.integers(1, 4))
@settings(max_examples=30, deadline=None)
def test_orthonormal_symbols_give_classical_entropy(seed, N, k):
    rng = np.random.default_rng(seed)
    U = random_unitary(rng, N)
    P = random_stochastic(rng, N)
    model = EnsembleModel(SymbolSet(U.T), MarkovLaw(P, stationary_distribution(P)))
    rho = ensemble_state(model, k)
    # diagonal in the product basis of the symbol states
    V = tensor_all([U] * k)
    inner = V.conj().T @ rho @ V
    assert np.abs(inner - np.diag(np.diag(inner))).max() < 1e-10
    assert abs(von_neumann_entropy(rho) - shannon_entropy(joint_pmf_table(model, k))) < EPS_ENT


def test_standard_basis_orthonormal_symbols_diagonal():
    rng = np.random.default_rng(2)
    P = random_stochastic(rng, 3)
    model = EnsembleModel(SymbolSet(np.eye(3)), MarkovLaw(P, stationary_distribution(P)))
    rho = ensemble_state(model, 3)
    assert np.abs(rho - np.diag(np.diag(rho))).max() == 0
    assert np.abs(np.diag(rho).real - joint_pmf_table(model, 3)).max() < 1e-15


def test_validate_trine():
    report = validate(trine_model())
    assert report.ok and report.stationary
    assert report["stationarity"].residual < 1e-12
    assert {c.name for c in report.checks} >= {"normalization", "span", "basis", "pmf", "stochasticity", "compatibility"}


def test_validate_bad_column():
    P = np.array([[0.5, 0.4], [0.5, 0.5]])
    model = EnsembleModel(SymbolSet(np.eye(2)), MarkovLaw(P, [0.5, 0.5]))
    report = validate(model)
    assert not report.ok
    assert not report["stochasticity"].passed
    assert abs(report["stochasticity"].residual - 0.1) < 1e-12
    with pytest.raises(ContractError, match="stochasticity"):
        require_valid(model)


def test_validate_general_compatibility():
    rng = np.random.default_rng(3)
    report = validate(general_model(rng, 3, 2, depth=3))
    assert report.ok
    assert report["compatibility"].residual < 1e-12
    assert "depth 4" in report["compatibility"].detail


def test_validate_flags():
    s = np.array([[1, 0], [1, 0]], dtype=float)
    report = validate(EnsembleModel(SymbolSet(s), IIDLaw([0.5, 0.5])))
    assert not report["span"].passed
    report = validate(EnsembleModel(SymbolSet([[1, 0], [0, 1.1]]), IIDLaw([0.5, 0.5])))
    assert not report["normalization"].passed
    report = validate(EnsembleModel(SymbolSet(np.eye(2)), IIDLaw([0.5, 0.6])))
    assert not report["pmf"].passed
    bad = GeneralLaw(2, lambda h: [0.5, 0.6])
    report = validate(EnsembleModel(SymbolSet(np.eye(2)), bad))
    assert not report["conditionals"].passed


def test_non_stationary_is_warning():
    P = np.array([[0.9, 0.5], [0.1, 0.5]])
    model = EnsembleModel(SymbolSet(np.eye(2)), MarkovLaw(P, [0.5, 0.5]))
    report = validate(model)
    assert report.ok and not report.stationary
    assert report["stationarity"].level == "warning"
    assert abs(report["stationarity"].residual - 0.2) < 1e-12


def test_symbol_set_basis():
    rng = np.random.default_rng(4)
    U = random_unitary(rng, 2)
    s = SymbolSet(np.eye(2), U)
    assert np.abs(s.coefficients() - U.conj()).max() < 1e-15
    with pytest.raises(ContractError):
        SymbolSet(np.eye(2), np.eye(3))
    with pytest.raises(ContractError):
        EnsembleModel(SymbolSet(np.eye(2)), IIDLaw([1.0]))


def test_general_tree_order():
    # order-1 source encoded as a depth-1 tree
    P = np.array([[0.2, 0.7], [0.8, 0.3]])
    tree = {"depth": 1, "p": [0.5, 0.5], "next": {"0": {"p": P[:, 0].tolist()}, "1": {"p": P[:, 1].tolist()}}}
    g = EnsembleModel(SymbolSet(np.eye(2)), GeneralLaw.from_tree(2, tree))
    m = EnsembleModel(SymbolSet(np.eye(2)), MarkovLaw(P, [0.5, 0.5]))
    assert np.abs(joint_pmf_table(g, 5) - joint_pmf_table(m, 5)).max() < 1e-15


def test_markov_entropy_rate_and_stationary():
    P = np.array([[0.9, 0.5], [0.1, 0.5]])
    p = stationary_distribution(P)
    assert np.abs(P @ p - p).max() < 1e-14
    assert np.abs(p - [5 / 6, 1 / 6]).max() < 1e-14
    h = lambda x: -x * np.log2(x) - (1 - x) * np.log2(1 - x)
    assert abs(markov_entropy_rate(P, p) - (5 / 6 * h(0.1) + 1 / 6)) < 1e-14
    # IID law: the rate is the Shannon entropy
    q = random_pmf(np.random.default_rng(0), 4)
    assert abs(markov_entropy_rate(np.repeat(q[:, None], 4, axis=1), q) - shannon_entropy(q)) < 1e-14
