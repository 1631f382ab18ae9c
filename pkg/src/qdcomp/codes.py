"""Classical and quantum lossless codes over the binary alphabet.

A quantum code here always has length eigenstates: ``U = sum_i |psi_i><e_i|``
with each ``|psi_i>`` inside the fixed-length sector ``H_A^{⊗ l_i}``.
Codes built from classical codebooks (c-q schemes) use computational-basis
codewords ``|C(x_i)>``.
"""
import heapq
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .ensembles import ensemble_state
from .errors import ContractError
from .numkit import (
    DEFAULT_LIMITS,
    EPS_NORM,
    EPS_ZERO,
    check_density,
    check_pmf,
    hermitian_eig,
    hermitian_eigvals,
)


def _check_bits(word):
    if not isinstance(word, str) or not word:
        raise ContractError(f"codeword {word!r} must be a non-empty bitstring")
    if set(word) - {"0", "1"}:
        raise ContractError(f"codeword {word!r} has letters outside {{0, 1}}")


@dataclass(frozen=True)
class ClassicalCode:
    """Binary codebook mapping symbol index -> codeword.

    Symbols absent from ``codewords`` (e.g. zero-probability symbols) have
    no codeword.
    """

    codewords: dict

    def __post_init__(self):
        cw = {int(k): v for k, v in dict(self.codewords).items()}
        for w in cw.values():
            _check_bits(w)
        object.__setattr__(self, "codewords", dict(sorted(cw.items())))

    @classmethod
    def from_words(cls, words):
        return cls(dict(enumerate(words)))

    @property
    def words(self):
        return list(self.codewords.values())

    @property
    def lengths(self):
        return {k: len(v) for k, v in self.codewords.items()}

    def length_list(self):
        return [len(v) for v in self.codewords.values()]

    def is_prefix_free(self):
        words = sorted(self.words)
        # in sorted order a prefix sits immediately before some extension of it
        return all(not b.startswith(a) for a, b in zip(words, words[1:]))

    def expected_length(self, p):
        p = np.asarray(p, dtype=float)
        return math.fsum(float(p[i]) * len(w) for i, w in self.codewords.items())

    def encode(self, symbols):
        return "".join(self.codewords[s] for s in symbols)

    def to_json(self):
        return {str(k): v for k, v in self.codewords.items()}

    @classmethod
    def from_json(cls, obj):
        try:
            return cls({int(k): v for k, v in obj.items()})
        except (AttributeError, ValueError) as exc:
            raise ContractError(f"bad classical code JSON: {exc}") from None


def kraft_sum(lengths):
    """``sum_i 2**-l_i``."""
    lengths = [int(x) for x in lengths]
    return math.fsum(2.0**-l for l in lengths)


def kraft_feasible(lengths):
    """Exact Kraft test ``sum 2**-l <= 1`` using rational arithmetic."""
    return sum(Fraction(1, 2**int(l)) for l in lengths) <= 1


def is_uniquely_decodable(code):
    """Sardinas-Patterson test for injectivity of the concatenation map.

    Accepts a :class:`ClassicalCode` or an iterable of codewords. Repeated
    codewords make a code non-injective.
    """
    words = code.words if isinstance(code, ClassicalCode) else list(code)
    for w in words:
        _check_bits(w)
    if len(set(words)) != len(words):
        return False
    cset = set(words)

    def dangling(a_set, b_set):
        out = set()
        for a in a_set:
            for b in b_set:
                if len(b) > len(a) and b.startswith(a):
                    out.add(b[len(a):])
        return out

    current = set()
    for a in cset:
        for b in cset:
            if a != b and b.startswith(a):
                current.add(b[len(a):])
    seen = set()
    while current:
        if current & cset:
            return False
        key = frozenset(current)
        if key in seen:
            return True
        seen.add(key)
        nxt = dangling(cset, current) | dangling(current, cset)
        current = nxt
    return True


def huffman_lengths(p, zero=EPS_ZERO):
    """Huffman codeword lengths; entries with ``p < zero`` get length 0.

    Ties: the two lowest weights merge first; among equal weights leaves
    precede merged nodes, leaves by original index and merged nodes by
    creation order. A single effective symbol gets length 1.
    """
    lengths, _ = _huffman_tree(np.asarray(p, dtype=float), zero)
    return lengths


def _huffman_tree(p, zero):
    support = [i for i in range(p.size) if p[i] >= zero]
    if not support:
        raise ContractError("pmf has no symbol with positive probability")
    lengths = np.zeros(p.size, dtype=int)
    if len(support) == 1:
        return _single(lengths, support[0])
    heap = [(float(p[i]), 0, i, ("leaf", i)) for i in support]
    heapq.heapify(heap)
    created = 0
    while len(heap) > 1:
        w0, _, _, n0 = heapq.heappop(heap)
        w1, _, _, n1 = heapq.heappop(heap)
        heapq.heappush(heap, (w0 + w1, 1, created, ("node", n0, n1)))
        created += 1
    root = heap[0][3]
    words = {}
    stack = [(root, "")]
    while stack:
        node, prefix = stack.pop()
        if node[0] == "leaf":
            words[node[1]] = prefix
        else:
            stack.append((node[2], prefix + "1"))
            stack.append((node[1], prefix + "0"))
    for i, w in words.items():
        lengths[i] = len(w)
    return lengths, words


def _single(lengths, i):
    lengths[i] = 1
    return lengths, {i: "0"}


def huffman(p, zero=EPS_ZERO):
    """Optimal prefix-free code for the pmf ``p``.

    Symbols with ``p < zero`` are left without a codeword.
    """
    p = check_pmf(p)
    _, words = _huffman_tree(p, zero)
    return ClassicalCode(words)


def kraft_converse(lengths):
    """Canonical prefix-free code with exactly the given lengths.

    Lengths are sorted ascending (stable in the symbol index) and
    codewords are assigned by binary counting.
    """
    lengths = [int(x) for x in lengths]
    if any(l < 1 for l in lengths):
        raise ContractError("codeword lengths must be >= 1")
    if not kraft_feasible(lengths):
        raise ContractError(f"lengths {lengths} violate the Kraft inequality (sum {kraft_sum(lengths):g} > 1)")
    order = sorted(range(len(lengths)), key=lambda i: (lengths[i], i))
    words = {}
    value = 0
    prev = 0
    for i in order:
        l = lengths[i]
        value <<= l - prev
        words[i] = format(value, f"0{l}b")
        value += 1
        prev = l
    return ClassicalCode(words)


# ------------------------------------------------------------ quantum codes


def _sector_index(word):
    return int(word, 2)


@dataclass(frozen=True, eq=False)
class QuantumCode:
    """Quantum code with length eigenstates.

    Attributes
    ----------
    basis : ndarray, shape (d, r)
        Columns ``|e_i>`` encoded by the code (``r <= d``; ``r < d`` when
        zero-weight directions are left uncoded).
    codewords : tuple of ndarray
        ``codewords[i]`` is ``|psi_i>``, a vector of length ``2**l_i``.
    """

    basis: np.ndarray
    codewords: tuple

    def __post_init__(self):
        basis = np.asarray(self.basis, dtype=complex)
        if basis.ndim != 2:
            raise ContractError("basis must be a (d, r) matrix")
        cws = tuple(np.asarray(c, dtype=complex).reshape(-1) for c in self.codewords)
        if basis.shape[1] != len(cws):
            raise ContractError(f"{basis.shape[1]} basis vectors but {len(cws)} codewords")
        for c in cws:
            n = c.size
            if n < 2 or n & (n - 1):
                raise ContractError(f"codeword of size {n} is not in a sector H_A^l with l >= 1")
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "codewords", cws)
        if self.orthonormality_residual() > EPS_NORM:
            raise ContractError("codeword states are not orthonormal")

    @classmethod
    def from_bitstrings(cls, words, basis=None):
        words = list(words)
        for w in words:
            _check_bits(w)
        if basis is None:
            basis = np.eye(len(words))
        cws = []
        for w in words:
            v = np.zeros(2 ** len(w))
            v[_sector_index(w)] = 1.0
            cws.append(v)
        return cls(basis, tuple(cws))

    @property
    def d(self):
        return self.basis.shape[0]

    @property
    def lengths(self):
        return [int(c.size).bit_length() - 1 for c in self.codewords]

    @property
    def l_max(self):
        return max(self.lengths)

    def length_counts(self):
        """``d_l``: number of length-``l`` eigenstates."""
        return dict(sorted(Counter(self.lengths).items()))

    def orthonormality_residual(self):
        worst = 0.0
        for i, a in enumerate(self.codewords):
            worst = max(worst, abs(np.vdot(a, a) - 1.0))
            for b in self.codewords[i + 1:]:
                if a.size == b.size:
                    worst = max(worst, abs(np.vdot(a, b)))
        return float(worst)

    def bitstrings(self):
        """Codeword labels when every ``|psi_i>`` is a computational basis state."""
        out = []
        for c, l in zip(self.codewords, self.lengths):
            nz = np.flatnonzero(np.abs(c) > EPS_NORM)
            if nz.size != 1 or abs(abs(c[nz[0]]) - 1.0) > EPS_NORM:
                return None
            out.append(format(int(nz[0]), f"0{l}b"))
        return out

    def isometry(self):
        """Dense ``U`` into ``⊕_{l=0}^{l_max} H_A^{⊗l}``.

        Sector ``l`` starts at row ``2**l - 1``; the total dimension is
        ``2**(l_max+1) - 1``.
        """
        dim = 2 ** (self.l_max + 1) - 1
        U = np.zeros((dim, self.basis.shape[1]), dtype=complex)
        for i, (c, l) in enumerate(zip(self.codewords, self.lengths)):
            off = 2**l - 1
            U[off:off + c.size, i] = c
        return U @ self.basis.conj().T

    def to_json(self):
        words = self.bitstrings()
        if words is None:
            raise ContractError("only computational-basis codewords can be serialized")
        b = self.basis
        return {
            "basis": [[[float(z.real), float(z.imag)] for z in row] for row in b],
            "codewords": [[w, len(w)] for w in words],
        }

    @classmethod
    def from_json(cls, obj):
        try:
            basis = np.array([[complex(re, im) for re, im in row] for row in obj["basis"]])
            words = []
            for w, l in obj["codewords"]:
                if len(w) != int(l):
                    raise ContractError(f"codeword {w!r} does not have length {l}")
                words.append(w)
        except (KeyError, TypeError, ValueError) as exc:
            raise ContractError(f"bad quantum code JSON: {exc}") from None
        return cls.from_bitstrings(words, basis)


def length_observable(l_max):
    """Diagonal of ``Λ = sum_l l Π_l`` on ``⊕_{l=0}^{l_max} H_A^{⊗l}``."""
    if not 0 <= l_max <= 12:
        raise ContractError("dense length observable is limited to l_max <= 12")
    return np.concatenate([np.full(2**l, float(l)) for l in range(l_max + 1)])


def cq_scheme(code, basis=None):
    """Transcribe a uniquely decodable classical code as ``U = sum_i |C(x_i)><e_i|``.

    ``basis`` columns are the ``|e_i>``, matched to the code's symbols in
    index order; defaults to the standard basis of ``C^d`` with ``d`` the
    number of codewords.
    """
    if not is_uniquely_decodable(code):
        raise ContractError("c-q schemes need a uniquely decodable classical code")
    words = code.words
    if basis is None:
        basis = np.eye(len(words))
    basis = np.asarray(basis)
    if basis.shape[1] != len(words):
        raise ContractError(f"basis has {basis.shape[1]} columns for {len(words)} codewords")
    return QuantumCode.from_bitstrings(words, basis)


def quantum_kraft_sum(code):
    """``tr(U† 2^{-Λ} U) = sum_l 2**-l d_l``, computed from the counts."""
    return math.fsum(2.0**-l * n for l, n in code.length_counts().items())


def quantum_kraft_sum_dense(code):
    """Same quantity by materializing ``U`` and ``Λ`` (``l_max <= 12``)."""
    lam = length_observable(code.l_max)
    U = code.isometry()
    return float(np.real(np.trace(U.conj().T @ (2.0**-lam[:, None] * U))))


def _component_weights(code, vec_or_rho, is_rho):
    B = code.basis
    if is_rho:
        rho = vec_or_rho
        w = np.real(np.einsum("ai,ab,bi->i", B.conj(), rho, B))
        outside = np.real(np.trace(rho)) - w.sum()
    else:
        amp = B.conj().T @ vec_or_rho
        w = np.abs(amp) ** 2
        outside = float(np.vdot(vec_or_rho, vec_or_rho).real) - w.sum()
    if outside > 1e-9:
        raise ContractError(f"state has weight {outside:.3g} outside the encoded subspace")
    return w


def codeword_length(code, s):
    """``<ω|Λ|ω>`` for ``|ω> = U|s>``: ``sum_i |<e_i|s>|^2 l_i``."""
    s = np.asarray(s, dtype=complex).reshape(-1)
    if s.size != code.d:
        raise ContractError(f"state has dimension {s.size}, code expects {code.d}")
    nrm = float(np.vdot(s, s).real)
    if abs(nrm - 1.0) > EPS_NORM:
        raise ContractError(f"state is not normalized (norm^2 = {nrm!r})")
    w = _component_weights(code, s, False)
    return math.fsum(float(x) * l for x, l in zip(w, code.lengths))


def average_length(code, rho):
    """``EL(U) = tr(rho U† Λ U) = sum_i <e_i|rho|e_i> l_i``."""
    rho = np.asarray(rho)
    if rho.shape != (code.d, code.d):
        raise ContractError(f"rho has shape {rho.shape}, code expects {code.d}x{code.d}")
    w = _component_weights(code, rho, True)
    return math.fsum(float(x) * l for x, l in zip(w, code.lengths))


def optimal_length_from_spectrum(eigenvalues, zero=EPS_ZERO):
    """``EL* = sum_i λ_i l_i`` with Huffman lengths over the spectrum."""
    lam = np.clip(np.asarray(eigenvalues, dtype=float), 0.0, None)
    lengths = huffman_lengths(lam, zero)
    return math.fsum(float(x) * int(l) for x, l in zip(lam, lengths))


@dataclass(frozen=True, eq=False)
class OptimalCode:
    code: QuantumCode
    length: float
    eigenvalues: np.ndarray


def optimal_code(rho, zero=EPS_ZERO):
    """Optimal quantum code with length eigenstates for the state ``rho``.

    Huffman-codes the spectrum of ``rho`` and transcribes it in the
    eigenbasis; eigen-directions with eigenvalue below ``zero`` are not
    encoded.
    """
    check_density(rho)
    w, v = hermitian_eig(rho)
    keep = np.flatnonzero(w >= zero)
    lam = np.clip(w[keep], 0.0, None)
    classical = huffman(lam / lam.sum())
    code = QuantumCode.from_bitstrings(classical.words, v[:, keep])
    el = math.fsum(float(x) * l for x, l in zip(lam, code.lengths))
    return OptimalCode(code, el, w)


def per_symbol_optimal_length(model, k, limits=DEFAULT_LIMITS):
    """``EL*_k = EL*(rho_{S^k}) / k``."""
    rho = ensemble_state(model, k, limits)
    return optimal_length_from_spectrum(hermitian_eigvals(rho)) / k
