"""Dense linear algebra and entropy kernel.

Matrices are plain ``numpy`` arrays. Hermitian and density "flags" are
checked on demand by :func:`check_hermitian` and :func:`check_density`
rather than carried around in wrapper types. All logarithms are base 2.
"""
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ContractError, ResourceError

EPS_NORM = 1e-9
EPS_HERM = 1e-9
EPS_TRACE = 1e-9
EPS_PSD = 1e-8
EPS_EIG = 1e-8
EPS_ZERO = 1e-12
EPS_ENT = 1e-7


@dataclass(frozen=True)
class Limits:
    """Hard caps on dense matrix dimension and string enumeration."""

    max_dim: int = 2**13
    max_enum: int = 2_000_000

    def __post_init__(self):
        if self.max_dim < 1 or self.max_enum < 1:
            raise ContractError("caps must be >= 1")

    def check_dim(self, dim, what="matrix"):
        if dim > self.max_dim:
            raise ResourceError("max_dim", self.max_dim, dim, what)

    def check_enum(self, count, what="enumeration"):
        if count > self.max_enum:
            raise ResourceError("max_enum", self.max_enum, count, what)


DEFAULT_LIMITS = Limits()


class EigenDecomposition(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def _as_matrix(a):
    a = np.asarray(a)
    if a.ndim != 2:
        raise ContractError(f"expected a 2-D matrix, got shape {a.shape}")
    return a


def _maybe_real(a):
    # LAPACK's real symmetric path is ~3x faster; take it when exact.
    if np.iscomplexobj(a) and not np.any(a.imag):
        return a.real
    return a


def tensor(a, b, limits=DEFAULT_LIMITS):
    """Kronecker product ``a ⊗ b`` with lexicographic index pairing."""
    a = np.asarray(a)
    b = np.asarray(b)
    shape = tuple(x * y for x, y in zip(np.atleast_2d(a).shape, np.atleast_2d(b).shape))
    for n in shape:
        limits.check_dim(n, "tensor product")
    return np.kron(a, b)


def tensor_all(factors, limits=DEFAULT_LIMITS):
    """Left-to-right Kronecker product of a non-empty sequence."""
    factors = list(factors)
    if not factors:
        raise ContractError("tensor_all needs at least one factor")
    out = np.asarray(factors[0])
    for f in factors[1:]:
        out = tensor(out, f, limits)
    return out


def hermiticity_residual(a):
    a = _as_matrix(a)
    if a.shape[0] != a.shape[1]:
        return np.inf
    return float(np.max(np.abs(a - a.conj().T), initial=0.0))


def check_hermitian(a, tol=EPS_HERM):
    a = _as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise ContractError(f"matrix is not square: {a.shape}")
    r = hermiticity_residual(a)
    if r > tol:
        raise ContractError(f"matrix is not hermitian (residual {r:.3g} > {tol:g})")
    return a


def check_density(rho, trace_tol=EPS_TRACE, psd_tol=EPS_PSD, herm_tol=EPS_HERM):
    """Raise :class:`ContractError` unless ``rho`` is a density matrix.

    Returns the (ascending) eigenvalues, which callers usually want anyway.
    """
    rho = check_hermitian(rho, herm_tol)
    tr = np.trace(rho).real
    if abs(tr - 1.0) > trace_tol:
        raise ContractError(f"trace {tr!r} differs from 1 by more than {trace_tol:g}")
    w = np.linalg.eigvalsh(_maybe_real(rho))
    if w.size and w[0] < -psd_tol:
        raise ContractError(f"matrix is not positive semidefinite (min eigenvalue {w[0]:.3g})")
    return w


def _descending(w):
    # eigh returns ascending order; reversing with a stable key keeps ties
    # in the order LAPACK produced them.
    return np.argsort(-w, kind="stable")


def hermitian_eig(a, tol=EPS_HERM):
    """Full spectral decomposition of a Hermitian matrix.

    Eigenvalues are returned in descending order; eigenvectors are the
    matching columns.
    """
    a = check_hermitian(a, tol)
    w, v = np.linalg.eigh(_maybe_real(a))
    order = _descending(w)
    return EigenDecomposition(w[order], v[:, order])


def hermitian_eigvals(a, tol=EPS_HERM):
    """Eigenvalues only, descending."""
    a = check_hermitian(a, tol)
    w = np.linalg.eigvalsh(_maybe_real(a))
    return w[_descending(w)]


def entropy_from_spectrum(eigenvalues, zero=EPS_ZERO, psd_tol=EPS_PSD):
    w = np.asarray(eigenvalues, dtype=float)
    if w.size and w.min() < -psd_tol:
        raise ContractError(f"negative eigenvalue {w.min():.3g} in a density spectrum")
    w = w[w >= zero]
    s = -float(np.sum(w * np.log2(w)))
    return max(s, 0.0)


def von_neumann_entropy(rho):
    """``S(rho) = -tr(rho log2 rho)`` in qubits."""
    w = check_density(rho)
    return entropy_from_spectrum(w)


def check_pmf(p, tol=EPS_TRACE):
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise ContractError("a pmf must be a non-empty 1-D array")
    if np.any(p < 0) or not np.all(np.isfinite(p)):
        raise ContractError("pmf entries must be finite and non-negative")
    if abs(p.sum() - 1.0) > tol:
        raise ContractError(f"pmf sums to {p.sum()!r}, not 1")
    return p


def shannon_entropy(p):
    """``H(p) = -sum p log2 p`` in bits, with ``0 log 0 = 0``."""
    p = check_pmf(p)
    q = p[p > 0]
    return max(-float(np.sum(q * np.log2(q))), 0.0)


def partial_trace(rho, dims, keep):
    """Trace out every subsystem whose index is not in ``keep``.

    ``dims`` lists the subsystem dimensions in tensor order.
    """
    rho = _as_matrix(rho)
    dims = [int(x) for x in dims]
    n = len(dims)
    total = int(np.prod(dims))
    if rho.shape != (total, total):
        raise ContractError(f"shape {rho.shape} does not match dims {dims}")
    keep = sorted(set(keep))
    traced = [i for i in range(n) if i not in keep]
    t = rho.reshape(dims + dims)
    # trace highest axes first so lower axis numbers stay valid
    for i in sorted(traced, reverse=True):
        m = t.ndim // 2
        t = np.trace(t, axis1=i, axis2=i + m)
    kd = int(np.prod([dims[i] for i in keep])) if keep else 1
    return t.reshape(kd, kd)
