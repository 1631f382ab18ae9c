"""Random model and matrix generators shared by the test modules."""
import itertools

import numpy as np

from qdcomp.ensembles import EnsembleModel, GeneralLaw, IIDLaw, MarkovLaw, SymbolSet, stationary_distribution


def random_states(rng, N, d, real=False):
    """N normalized vectors spanning C^d (requires N >= d)."""
    while True:
        s = rng.normal(size=(N, d))
        if not real:
            s = s + 1j * rng.normal(size=(N, d))
        s = s / np.linalg.norm(s, axis=1, keepdims=True)
        if np.linalg.matrix_rank(s) == d:
            return s


def random_pmf(rng, n, floor=0.0):
    p = rng.random(n) + floor
    return p / p.sum()


def random_stochastic(rng, n, sparse=False):
    P = rng.random((n, n))
    if sparse:
        P = P * (rng.random((n, n)) < 0.6)
        P[rng.integers(n), :] += 0.1
    return P / P.sum(axis=0)


def random_unitary(rng, d):
    q, r = np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_density(rng, dim, rank=None):
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_hermitian(rng, dim):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return a + a.conj().T


def iid_model(rng, N, d):
    return EnsembleModel(SymbolSet(random_states(rng, N, d)), IIDLaw(random_pmf(rng, N)))


def markov_model(rng, N, d, basis=None):
    P = random_stochastic(rng, N)
    return EnsembleModel(SymbolSet(random_states(rng, N, d), basis), MarkovLaw(P, stationary_distribution(P)))


def random_tree(rng, N, depth, zeros=False):
    """Full probability tree to ``depth`` in the model-file layout."""

    def node(level):
        p = random_pmf(rng, N)
        if zeros and N > 1 and rng.random() < 0.3:
            p[rng.integers(N)] = 0.0
            p = p / p.sum()
        out = {"p": p.tolist()}
        if level < depth:
            out["next"] = {str(k): node(level + 1) for k in range(N)}
        return out

    tree = node(0)
    tree["depth"] = depth
    return tree


def general_model(rng, N, d, depth=2, zeros=False):
    law = GeneralLaw.from_tree(N, random_tree(rng, N, depth, zeros))
    return EnsembleModel(SymbolSet(random_states(rng, N, d)), law)


def strings(N, max_len):
    for k in range(max_len + 1):
        yield from itertools.product(range(N), repeat=k)
