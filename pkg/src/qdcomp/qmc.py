"""Quantum dynamical systems, quantum Markov chains and dynamical entropy.

Two systems are built from an :class:`~qdcomp.ensembles.EnsembleModel`:

* :class:`MarkovDynSystem` on ``B(C^N)`` for Markov (and IID) laws;
* :class:`FockDynSystem` on the free Fock space over ``C^N`` for any law,
  truncated to strings of length ``<= depth``.

Operators in ``M_d ⊗ A`` are laid out with the symbol factor first, so the
``(i, j)`` block of size ``dim(A)`` is ``a_ij`` in ``sum |e_i><e_j| ⊗ a_ij``.
"""
import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .codes import optimal_length_from_spectrum
from .ensembles import IIDLaw, MarkovLaw
from .errors import ContractError, ResourceError
from .numkit import (
    DEFAULT_LIMITS,
    EPS_HERM,
    EPS_NORM,
    EPS_PSD,
    EPS_TRACE,
    entropy_from_spectrum,
    hermitian_eigvals,
    partial_trace,
    tensor,
)


class OperationalPartition:
    """Operators ``γ_1..γ_d`` on a carrier space with ``sum γ_i* γ_i = 1``."""

    def __init__(self, elements, tol=EPS_NORM):
        els = [np.asarray(g, dtype=complex) for g in elements]
        if not els:
            raise ContractError("a partition needs at least one element")
        n = els[0].shape[0]
        if any(g.shape != (n, n) for g in els):
            raise ContractError("partition elements must be square and share a shape")
        self.elements = els
        r = self.residual()
        if r > tol:
            raise ContractError(f"not a partition of unity (residual {r:.3g})")

    @property
    def d(self):
        return len(self.elements)

    @property
    def dim(self):
        return self.elements[0].shape[0]

    def residual(self):
        s = sum(g.conj().T @ g for g in self.elements)
        return float(np.max(np.abs(s - np.eye(self.dim))))


def partition_from_symbols(symbols):
    """``γ_i = sum_n <e_i|s_n> |n><n|`` on ``C^N``."""
    c = symbols.coefficients()
    return OperationalPartition([np.diag(c[:, i]) for i in range(symbols.d)])


def transition_expectation(gamma, A):
    """``E_γ([a_ij]) = sum_ij γ_i* a_ij γ_j``."""
    n, d = gamma.dim, gamma.d
    A = np.asarray(A)
    if A.shape != (d * n, d * n):
        raise ContractError(f"operator has shape {A.shape}, expected {(d * n, d * n)}")
    out = np.zeros((n, n), dtype=complex)
    for i, gi in enumerate(gamma.elements):
        for j, gj in enumerate(gamma.elements):
            out += gi.conj().T @ A[i * n:(i + 1) * n, j * n:(j + 1) * n] @ gj
    return out


def lifting_gamma(gamma, sigma):
    """Trace dual of :func:`transition_expectation`: ``[γ_i σ γ_j*]_{ij}``."""
    n, d = gamma.dim, gamma.d
    sigma = np.asarray(sigma)
    if sigma.shape != (n, n):
        raise ContractError(f"state has shape {sigma.shape}, partition acts on C^{n}")
    out = np.zeros((d * n, d * n), dtype=complex)
    for i, gi in enumerate(gamma.elements):
        left = gi @ sigma
        for j, gj in enumerate(gamma.elements):
            out[i * n:(i + 1) * n, j * n:(j + 1) * n] = left @ gj.conj().T
    return out


def _is_diagonal(a, tol=EPS_HERM):
    a = np.asarray(a)
    off = a - np.diag(np.diag(a))
    return float(np.max(np.abs(off), initial=0.0)) <= tol


# ------------------------------------------------------------ Markov system


class MarkovDynSystem:
    """``(B(C^N), Θ, ρ)`` with partition ``γ``.

    ``Θ(|k><l|) = δ_kl sum_i P[k, i] |i><i|`` and ``ρ = diag(p)``, where
    ``P`` is column-stochastic (``P[i, j]`` = probability of ``i`` after ``j``).
    """

    kind = "markov"

    def __init__(self, P, p, gamma, basis=None):
        self.P = np.asarray(P, dtype=float)
        self.p = np.asarray(p, dtype=float)
        self.gamma = gamma
        N = self.p.size
        if self.P.shape != (N, N) or gamma.dim != N:
            raise ContractError("P, p and the partition must all act on C^N")
        self.basis = np.eye(gamma.d, dtype=complex) if basis is None else np.asarray(basis, dtype=complex)

    @classmethod
    def from_model(cls, model):
        if not isinstance(model.law, (IIDLaw, MarkovLaw)):
            raise ContractError("Markov systems need a Markov or IID law")
        law = model.law.as_markov()
        return cls(law.P, law.p, partition_from_symbols(model.symbols), model.symbols.basis)

    @property
    def N(self):
        return self.p.size

    @property
    def d(self):
        return self.gamma.d

    @property
    def rho(self):
        return np.diag(self.p)

    def theta(self, a):
        """``Θ(a)``: diagonal with entries ``sum_k a_kk P[k, i]``."""
        a = np.asarray(a)
        return np.diag(self.P.T @ np.diag(a))

    def theta_dagger(self, sigma):
        """``Θ†(σ)`` for diagonal ``σ``: ``Θ†(|n><n|) = sum_i P[i, n] |i><i|``."""
        sigma = np.asarray(sigma)
        if sigma.shape != (self.N, self.N):
            raise ContractError(f"state has shape {sigma.shape}, expected {(self.N, self.N)}")
        if not _is_diagonal(sigma):
            raise ContractError("Θ† is only defined here on diagonal states")
        return np.diag(self.P @ np.diag(sigma))

    def unitality_residual(self):
        return float(np.max(np.abs(self.theta(np.eye(self.N)) - np.eye(self.N))))

    def expectation(self, A):
        """``E_{γ,Θ} = Θ ∘ E_γ``."""
        return self.theta(transition_expectation(self.gamma, A))

    def _carrier_blocks(self):
        # Y[i][l]: symbol block attached to carrier |l> when lifting |i><i|,
        # i.e. the (l, l) entry of γ_a|i><i|γ_b*, rotated into standard coordinates.
        N = self.N
        g = np.stack(self.gamma.elements)  # (d, N, N)
        Y = [[None] * N for _ in range(N)]
        for i in range(N):
            for l in range(N):
                c = g[:, l, i]
                if not np.any(c):
                    continue
                u = self.basis @ c
                Y[i][l] = np.outer(u, u.conj())
        return Y


def lifting_full_markov(system, sigma):
    """``E†_{γ,Θ}(σ) = E†_γ(Θ†(σ))`` in ``C^d ⊗ C^N`` (e-basis coordinates)."""
    return lifting_gamma(system.gamma, system.theta_dagger(sigma))


# -------------------------------------------------------------- Fock system


class FockDynSystem:
    """Free-Fock-space system for a general stochastic law.

    Diagonal states are dicts ``{string: weight}`` with strings as tuples of
    0-based symbols; ``()`` is the vacuum ``|∅>``. ``Θ(|n><n|) =
    p(final(n)|pruned(n)) |pruned(n)><pruned(n)|`` and ``ρ = |∅><∅|``.
    """

    kind = "fock"

    def __init__(self, law, symbols, depth):
        if law.N != symbols.N:
            raise ContractError("law and symbol set disagree on N")
        self.law = law
        self.symbols = symbols
        self.depth = int(depth)
        self._coef = symbols.coefficients()

    @classmethod
    def from_model(cls, model, depth=8):
        return cls(model.law, model.symbols, depth)

    @property
    def N(self):
        return self.symbols.N

    @property
    def d(self):
        return self.symbols.d

    @property
    def rho(self):
        return {(): 1.0}

    @staticmethod
    def final(string):
        return string[-1] if string else 0

    @staticmethod
    def pruned(string):
        if not string:
            raise ContractError("the vacuum has no pruned string")
        return string[:-1]

    def gamma_coefficients(self, string):
        """``c_i`` with ``γ_i|n> = c_i |n>``, i.e. ``c_i = <e_i|s_final(n)>``."""
        return self._coef[self.final(string)]

    def partition_residual(self, strings):
        return max(abs(float(np.sum(np.abs(self.gamma_coefficients(s)) ** 2)) - 1.0) for s in strings)

    def theta(self, state):
        """``Θ`` on a diagonal operator ``{string: coefficient}``."""
        out = {}
        for s, w in state.items():
            if not s:
                continue
            parent = self.pruned(s)
            out[parent] = out.get(parent, 0.0) + w * self.law.conditional(parent)[self.final(s)]
        return out

    def theta_dagger(self, state):
        """``Θ†(|n><n|) = sum_k p(k|n) |n∘k><n∘k|`` on a diagonal state."""
        out = {}
        for s, w in state.items():
            if len(s) + 1 > self.depth:
                raise ResourceError("depth", self.depth, len(s) + 1, "Fock truncation")
            q = self.law.conditional(s)
            for k in range(self.N):
                child = s + (k,)
                out[child] = out.get(child, 0.0) + w * q[k]
        return out

    def amplitude(self, string):
        """``sum_i c_i |e_i>``; the lifted symbol block is its projector."""
        return self.symbols.basis @ self.gamma_coefficients(string)

    def lifting_gamma(self, state):
        """``E†_γ`` on a diagonal state: ``{string: (weight, symbol block)}``."""
        out = {}
        for s, w in state.items():
            u = self.amplitude(s)
            out[s] = (w, np.outer(u, u.conj()))
        return out

    def lifting_full(self, state):
        return self.lifting_gamma(self.theta_dagger(state))


def lifting_full_fock(system, state):
    """``E†_{γ,Θ}`` on a diagonal Fock state (see :class:`FockDynSystem`)."""
    return system.lifting_full(state)


def system_for_model(model, depth=None):
    """Markov system for Markov/IID laws, Fock system otherwise."""
    if isinstance(model.law, (IIDLaw, MarkovLaw)):
        return MarkovDynSystem.from_model(model)
    return FockDynSystem.from_model(model, depth or 8)


# ------------------------------------------------------ joint correlations


def _iter_markov(system, K, limits):
    N = system.N
    Y = system._carrier_blocks()
    T = [sum((y for y in Y[i] if y is not None), np.zeros((system.d, system.d), dtype=complex)) for i in range(N)]
    # ω_0 = ρ as carrier-diagonal blocks; off-diagonal carrier terms are
    # annihilated by Θ† and by the final partial trace, so they are never kept.
    X = [np.array([[system.p[j]]], dtype=complex) for j in range(N)]
    for k in range(1, K + 1):
        limits.check_dim(system.d**k, f"d^k = {system.d}^{k}")
        Z = []
        for i in range(N):
            z = np.zeros_like(X[0])
            for j in range(N):
                if system.P[i, j] != 0:
                    z += system.P[i, j] * X[j]
            Z.append(z)
        yield sum(tensor(Z[i], T[i], limits) for i in range(N))
        if k < K:
            X = [
                sum((tensor(Z[i], Y[i][l], limits) for i in range(N) if Y[i][l] is not None),
                    np.zeros((system.d**k, system.d**k), dtype=complex))
                for l in range(N)
            ]


def _iter_fock(system, K, limits):
    # Each string carries a rank-one symbol block weight * |v><v|, so only
    # the amplitude v is stored.
    state = {(): (1.0, np.ones(1, dtype=complex))}
    for k in range(1, K + 1):
        limits.check_dim(system.d**k, f"d^k = {system.d}^{k}")
        if k > system.depth:
            raise ResourceError("depth", system.depth, k, "Fock truncation")
        nxt = {}
        for s, (w, v) in state.items():
            for child, cw in system.theta_dagger({s: w}).items():
                if cw == 0:
                    continue
                nxt[child] = (cw, np.kron(v, system.amplitude(child)))
        limits.check_enum(len(nxt), f"strings of length {k}")
        state = nxt
        w = np.array([x[0] for x in state.values()])
        V = np.array([x[1] for x in state.values()])
        yield (V.T * w) @ V.conj()


def iter_joint_correlations(system, K, limits=DEFAULT_LIMITS):
    """Yield ``ρ_1, ..., ρ_K`` one at a time (only one ``ρ_k`` kept in memory)."""
    if K < 1:
        raise ContractError("K must be >= 1")
    if isinstance(system, MarkovDynSystem):
        yield from _iter_markov(system, K, limits)
    elif isinstance(system, FockDynSystem):
        yield from _iter_fock(system, K, limits)
    else:
        raise ContractError(f"unsupported system type {type(system).__name__}")


@dataclass
class JointCorrelations:
    rhos: list
    d: int

    def __getitem__(self, k):
        """``ρ_k`` (1-based)."""
        return self.rhos[k - 1]

    def __len__(self):
        return len(self.rhos)

    def marginal_residual(self):
        """Worst ``|tr_last(ρ_{k+1}) - ρ_k|`` over consecutive pairs."""
        worst = 0.0
        for k in range(1, len(self.rhos)):
            red = partial_trace(self.rhos[k], [self.d] * (k + 1), keep=range(k))
            worst = max(worst, float(np.max(np.abs(red - self.rhos[k - 1]))))
        return worst


def joint_correlations(system, K, limits=DEFAULT_LIMITS):
    return JointCorrelations(list(iter_joint_correlations(system, K, limits)), system.d)


# ------------------------------------------------------- dynamical entropy


@dataclass
class EntropyRow:
    k: int
    S: float
    S_per_k: float
    EL_star_k: Optional[float] = None
    bounds_ok: Optional[bool] = None


@dataclass
class EntropyReport:
    """Finite sequence ``S(ρ_k)/k`` plus a tail estimate of its limsup."""

    rows: list
    tail_window: int = 3
    system: str = ""
    stationary: bool = True
    meta: dict = field(default_factory=dict)

    @property
    def limsup_estimate(self):
        tail = [r.S_per_k for r in self.rows[-self.tail_window:]]
        return max(tail) if tail else float("nan")

    def per_symbol(self):
        return [r.S_per_k for r in self.rows]

    def to_csv(self):
        lines = ["k,S,S_per_k,EL_star_k"]
        for r in self.rows:
            el = "" if r.EL_star_k is None else repr(r.EL_star_k)
            lines.append(f"{r.k},{r.S!r},{r.S_per_k!r},{el}")
        return "\n".join(lines) + "\n"

    def to_dict(self):
        return {
            "system": self.system,
            "stationary": self.stationary,
            "tail_window": self.tail_window,
            "limsup_estimate": self.limsup_estimate,
            "rows": [
                {"k": r.k, "S": r.S, "S_per_k": r.S_per_k, "EL_star_k": r.EL_star_k, "bounds_ok": r.bounds_ok}
                for r in self.rows
            ],
            **self.meta,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2) + "\n"


def spectrum_row(k, rho, with_codes=True):
    """Entropy (and optionally optimal code length) of one ``ρ_k``."""
    w = hermitian_eigvals(rho)
    tr = float(w.sum())
    if abs(tr - 1.0) > EPS_TRACE or (w.size and w[-1] < -EPS_PSD):
        raise ContractError(f"ρ_{k} is not a density matrix (trace {tr!r}, min eigenvalue {w[-1]:.3g})")
    S = entropy_from_spectrum(w)
    row = EntropyRow(k, S, S / k)
    if with_codes:
        el = optimal_length_from_spectrum(w)
        row.EL_star_k = el / k
        row.bounds_ok = bool(S / k - 1e-9 <= el / k < S / k + 1.0 / k)
    return row


def dynamical_entropy(system, K, tail_window=3, with_codes=True, limits=DEFAULT_LIMITS):
    """``S(ρ_k)/k`` for ``k = 1..K`` from the quantum Markov chain of ``system``."""
    rows = [spectrum_row(k, rho, with_codes) for k, rho in enumerate(iter_joint_correlations(system, K, limits), 1)]
    stationary = True
    if isinstance(system, MarkovDynSystem):
        stationary = bool(np.max(np.abs(system.P @ system.p - system.p)) <= 1e-9)
    return EntropyReport(rows, tail_window, system.kind, stationary)
