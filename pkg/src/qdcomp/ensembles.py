"""Stochastic ensembles of pure symbol states and their density operators.

Symbol indices are 0-based throughout. A stochastic law is anything with
an ``N`` attribute and a ``conditional(history)`` method returning the pmf
of the next symbol given the tuple of previous symbols; ``history == ()``
gives the distribution of the first symbol.
"""
import itertools
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ContractError
from .numkit import DEFAULT_LIMITS, EPS_NORM, EPS_TRACE, tensor

EPS_STAT = 1e-9
EPS_EQ = 1e-10

# strings per chunk in brute-force enumeration, scaled by 1/d^k
_CHUNK_ENTRIES = 1 << 22


@dataclass(frozen=True, eq=False)
class SymbolSet:
    """Symbol states ``|s_n>`` (rows of ``states``) in ``C^d``.

    ``basis`` holds the reference orthonormal basis ``{|e_i>}`` as
    columns; it defaults to the standard basis.
    """

    states: np.ndarray
    basis: Optional[np.ndarray] = None

    def __post_init__(self):
        states = np.atleast_2d(np.asarray(self.states, dtype=complex))
        if states.ndim != 2 or states.shape[0] == 0:
            raise ContractError("states must be an (N, d) array")
        object.__setattr__(self, "states", states)
        d = states.shape[1]
        basis = np.eye(d, dtype=complex) if self.basis is None else np.asarray(self.basis, dtype=complex)
        if basis.shape != (d, d):
            raise ContractError(f"basis must be {d}x{d}, got {basis.shape}")
        object.__setattr__(self, "basis", basis)

    @property
    def N(self):
        return self.states.shape[0]

    @property
    def d(self):
        return self.states.shape[1]

    def coefficients(self):
        """``c[n, i] = <e_i|s_n>``."""
        return self.states @ self.basis.conj()

    def projector(self, n):
        s = self.states[n]
        return np.outer(s, s.conj())

    def norm_residual(self):
        return float(np.max(np.abs(np.sum(np.abs(self.states) ** 2, axis=1) - 1.0)))

    def span_rank(self, tol=1e-9):
        sv = np.linalg.svd(self.states, compute_uv=False)
        return int(np.sum(sv > tol * max(1.0, sv[0]))), float(sv[min(self.N, self.d) - 1])

    def basis_residual(self):
        b = self.basis
        return float(np.max(np.abs(b.conj().T @ b - np.eye(self.d))))


class IIDLaw:
    """Independent, identically distributed symbols with pmf ``p``."""

    kind = "iid"

    def __init__(self, p):
        self.p = np.asarray(p, dtype=float)
        if self.p.ndim != 1 or self.p.size == 0:
            raise ContractError("IID pmf must be a non-empty 1-D array")

    @property
    def N(self):
        return self.p.size

    def conditional(self, history):
        return self.p

    def as_markov(self):
        P = np.repeat(self.p[:, None], self.N, axis=1)
        return MarkovLaw(P, self.p)


class MarkovLaw:
    """Markov law with column-stochastic ``P`` and initial pmf ``p``.

    ``P[i, j]`` is the probability of emitting symbol ``i`` right after
    symbol ``j``, so ``p(n_1..n_k) = p[n_1] * prod P[n_l, n_{l-1}]``.
    """

    kind = "markov"

    def __init__(self, P, p):
        self.P = np.asarray(P, dtype=float)
        self.p = np.asarray(p, dtype=float)
        n = self.p.size
        if self.p.ndim != 1 or n == 0 or self.P.shape != (n, n):
            raise ContractError(f"Markov law needs P of shape ({n}, {n}) matching p")

    @property
    def N(self):
        return self.p.size

    def conditional(self, history):
        if not history:
            return self.p
        return self.P[:, history[-1]]

    def stationarity_residual(self):
        return float(np.max(np.abs(self.P @ self.p - self.p)))

    def as_markov(self):
        return self


class GeneralLaw:
    """Arbitrary process given by a conditional-pmf provider.

    Parameters
    ----------
    N : int
        Alphabet size.
    provider : callable
        ``provider(history) -> pmf`` over the next symbol, where ``history``
        is a tuple of previous 0-based symbols (``()`` for the first one).
        Must return a valid pmf for every history, including histories of
        probability zero.
    tree : dict, optional
        The probability tree the provider was built from, kept for
        serialization (see :func:`GeneralLaw.from_tree`).
    """

    kind = "general"

    def __init__(self, N, provider, tree=None):
        self._N = int(N)
        self.provider = provider
        self.tree = tree

    @property
    def N(self):
        return self._N

    def conditional(self, history):
        q = np.asarray(self.provider(tuple(history)), dtype=float)
        if q.shape != (self._N,):
            raise ContractError(f"conditional for history {history} has shape {q.shape}, expected ({self._N},)")
        return q

    @classmethod
    def from_tree(cls, N, tree):
        """Build a law from a nested probability tree.

        ``tree = {"depth": D, "p": [...], "next": {"0": {"p": [...], "next": {...}}, ...}}``.
        Nodes at history length ``L < D`` list every child in ``next``;
        nodes at level ``D`` have no ``next``. Histories longer than ``D``
        condition on their last ``D`` symbols (an order-``D`` source).
        """
        depth = int(tree["depth"])
        if depth < 0:
            raise ContractError("tree depth must be >= 0")

        def node_for(hist):
            node = tree
            for level, sym in enumerate(hist):
                children = node.get("next") or {}
                key = str(sym)
                if key not in children:
                    path = ",".join(str(h) for h in hist[: level + 1])
                    raise ContractError(f"probability tree has no node for history ({path})")
                node = children[key]
            return node

        def provider(history):
            hist = history[len(history) - depth:] if len(history) > depth else history
            if depth == 0:
                hist = ()
            return node_for(hist)["p"]

        return cls(N, provider, tree=tree)


@dataclass(frozen=True, eq=False)
class EnsembleModel:
    symbols: SymbolSet
    law: object
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if self.law.N != self.symbols.N:
            raise ContractError(f"law has N={self.law.N} but there are {self.symbols.N} symbol states")

    @property
    def N(self):
        return self.symbols.N

    @property
    def d(self):
        return self.symbols.d


def joint_pmf(model, string):
    """Probability of the symbol string ``(n_1, ..., n_k)``."""
    string = tuple(int(x) for x in string)
    if not string:
        raise ContractError("string must have length >= 1")
    for x in string:
        if not 0 <= x < model.N:
            raise ContractError(f"symbol index {x} out of range 0..{model.N - 1}")
    law = model.law
    if isinstance(law, IIDLaw):
        return float(np.prod(law.p[list(string)]))
    if isinstance(law, MarkovLaw):
        prob = law.p[string[0]]
        for prev, nxt in zip(string, string[1:]):
            prob *= law.P[nxt, prev]
        return float(prob)
    prob = 1.0
    for i, x in enumerate(string):
        prob *= law.conditional(string[:i])[x]
    return float(prob)


def joint_pmf_table(model, k, limits=DEFAULT_LIMITS):
    """All ``N**k`` string probabilities in lexicographic order."""
    N = model.N
    limits.check_enum(N**k, f"{N}^{k} symbol strings")
    law = model.law
    if isinstance(law, (IIDLaw, MarkovLaw)):
        m = law.as_markov()
        w = m.p.copy()
        for _ in range(k - 1):
            # w[(prefix, x)] = w[prefix] * P[x, last(prefix)]
            w = (w.reshape(-1, N)[:, :, None] * m.P.T[None, :, :]).reshape(-1)
        return w
    w = np.asarray(law.conditional(()), dtype=float)
    for level in range(1, k):
        prefixes = itertools.product(range(N), repeat=level)
        cond = np.array([law.conditional(h) for h in prefixes])
        w = (w[:, None] * cond).reshape(-1)
    return w


def _product_vectors(states, strings):
    v = states[strings[:, 0]]
    for j in range(1, strings.shape[1]):
        v = (v[:, :, None] * states[strings[:, j]][:, None, :]).reshape(v.shape[0], -1)
    return v


def ensemble_state_bruteforce(model, k, limits=DEFAULT_LIMITS):
    """``rho_{S^k}`` as the explicit sum over all ``N**k`` strings.

    Each string contributes ``p(n_1..n_k) |s_{n_1}...s_{n_k}><...|``;
    strings are processed in lexicographic chunks and summed in that
    fixed order.
    """
    if k < 1:
        raise ContractError("k must be >= 1")
    N, d = model.N, model.d
    limits.check_dim(d**k, f"d^k = {d}^{k}")
    weights = joint_pmf_table(model, k, limits)
    states = model.symbols.states
    D = d**k
    rho = np.zeros((D, D), dtype=complex)
    chunk = max(1, _CHUNK_ENTRIES // D)
    total = N**k
    for start in range(0, total, chunk):
        stop = min(total, start + chunk)
        w = weights[start:stop]
        nz = w != 0
        if not np.any(nz):
            continue
        idx = np.arange(start, stop)[nz]
        strings = np.stack(np.unravel_index(idx, (N,) * k), axis=1)
        v = _product_vectors(states, strings)
        rho += (v.T * w[nz]) @ v.conj()
    return rho


def ensemble_state_markov(model, k, limits=DEFAULT_LIMITS):
    """``rho_{S^k}`` for a Markov (or IID) law by end-symbol recursion.

    ``sigma_m`` collects the strings ending in symbol ``m``;
    ``sigma_m <- (sum_j P[m, j] sigma_j) ⊗ |s_m><s_m|``.
    """
    if k < 1:
        raise ContractError("k must be >= 1")
    if not isinstance(model.law, (IIDLaw, MarkovLaw)):
        raise ContractError("ensemble_state_markov needs a Markov or IID law")
    law = model.law.as_markov()
    limits.check_dim(model.d**k, f"d^k = {model.d}^{k}")
    projs = [model.symbols.projector(m) for m in range(model.N)]
    blocks = [law.p[m] * projs[m] for m in range(model.N)]
    for step in range(1, k):
        mixed = [sum(law.P[m, j] * blocks[j] for j in range(model.N)) for m in range(model.N)]
        if step == k - 1:
            return sum(tensor(mixed[m], projs[m], limits) for m in range(model.N))
        blocks = [tensor(mixed[m], projs[m], limits) for m in range(model.N)]
    return sum(blocks)


def ensemble_state(model, k, limits=DEFAULT_LIMITS):
    """``rho_{S^k}`` by the cheapest exact route for the model's law."""
    if isinstance(model.law, (IIDLaw, MarkovLaw)):
        return ensemble_state_markov(model, k, limits)
    return ensemble_state_bruteforce(model, k, limits)


def markov_entropy_rate(P, p):
    """``-sum_j p_j sum_i P[i, j] log2 P[i, j]`` for a column-stochastic ``P``."""
    P = np.asarray(P, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(P > 0, P * np.log2(np.where(P > 0, P, 1.0)), 0.0)
    return float(-np.sum(terms.sum(axis=0) * np.asarray(p)))


def stationary_distribution(P):
    """A stationary pmf of a column-stochastic matrix (``P p = p``)."""
    P = np.asarray(P, dtype=float)
    n = P.shape[0]
    A = np.vstack([P - np.eye(n), np.ones((1, n))])
    b = np.zeros(n + 1)
    b[-1] = 1.0
    p, *_ = np.linalg.lstsq(A, b, rcond=None)
    p = np.clip(p, 0.0, None)
    return p / p.sum()


# ---------------------------------------------------------------- validation


@dataclass
class Check:
    name: str
    passed: bool
    residual: float
    level: str = "error"
    detail: str = ""


@dataclass
class ValidationReport:
    checks: list

    @property
    def ok(self):
        """True when every error-level check passed (warnings allowed)."""
        return all(c.passed for c in self.checks if c.level == "error")

    @property
    def stationary(self):
        for c in self.checks:
            if c.name == "stationarity":
                return c.passed
        return True

    def failures(self):
        return [c for c in self.checks if not c.passed]

    def __getitem__(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def _pmf_residual(p):
    p = np.asarray(p, dtype=float)
    neg = float(max(0.0, -p.min())) if p.size else 0.0
    return max(abs(float(p.sum()) - 1.0), neg)


def _sample_prefixes(N, depth, max_count, rng):
    for level in range(0, depth):
        if N**level <= max_count:
            yield from itertools.product(range(N), repeat=level)
        else:
            for _ in range(max_count):
                yield tuple(int(x) for x in rng.integers(0, N, size=level))


def validate(model, depth=4, max_prefixes=1024, seed=0, eps_stat=EPS_STAT):
    """Check every model invariant and report residuals.

    Never raises for invalid content; failures are listed in the report.
    """
    sym = model.symbols
    law = model.law
    checks = []
    r = sym.norm_residual()
    checks.append(Check("normalization", r <= EPS_NORM, r))
    rank, smin = sym.span_rank()
    checks.append(Check("span", rank == sym.d, smin, detail=f"rank {rank} of d={sym.d}"))
    r = sym.basis_residual()
    checks.append(Check("basis", r <= EPS_NORM, r))

    if isinstance(law, (IIDLaw, MarkovLaw)):
        r = _pmf_residual(law.p)
        checks.append(Check("pmf", r <= EPS_TRACE, r))
    if isinstance(law, MarkovLaw):
        col = law.P.sum(axis=0)
        r = max(float(np.max(np.abs(col - 1.0))), float(max(0.0, -law.P.min())))
        checks.append(Check("stochasticity", r <= EPS_TRACE, r))
        r = law.stationarity_residual()
        checks.append(Check("stationarity", r <= eps_stat, r, level="warning"))

    # compatibility of the joint pmf family, on sampled prefixes
    rng = np.random.default_rng(seed)
    worst = 0.0
    cond_worst = 0.0
    for prefix in _sample_prefixes(model.N, depth, max_prefixes, rng):
        q = np.asarray(law.conditional(prefix), dtype=float)
        cond_worst = max(cond_worst, _pmf_residual(q))
        if prefix:
            parent = joint_pmf(model, prefix)
            children = sum(joint_pmf(model, prefix + (x,)) for x in range(model.N))
        else:
            parent = 1.0
            children = sum(joint_pmf(model, (x,)) for x in range(model.N))
        worst = max(worst, abs(children - parent))
    if isinstance(law, GeneralLaw):
        checks.append(Check("conditionals", cond_worst <= EPS_TRACE, cond_worst))
    checks.append(Check("compatibility", worst <= EPS_TRACE, worst, detail=f"prefixes to depth {depth}"))
    return ValidationReport(checks)


def require_valid(model, **kwargs):
    """Raise :class:`ContractError` naming every failed error-level check."""
    report = validate(model, **kwargs)
    if not report.ok:
        bad = ", ".join(f"{c.name} (residual {c.residual:.3g})" for c in report.failures() if c.level == "error")
        raise ContractError(f"invalid model: {bad}")
    return report
