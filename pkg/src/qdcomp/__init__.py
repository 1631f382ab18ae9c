"""Optimal lossless compression of quantum stochastic ensembles.

The optimal average codeword length per symbol of a string of pure
quantum states emitted by a stochastic source is computed two ways:
directly from the ensemble density operators ``rho_{S^k}`` and through
the joint correlations of an associated quantum Markov chain, whose
entropy rate is the dynamical entropy ``h(Θ, ρ, γ)``.
"""
__version__ = "0.1.0"

from .codes import (
    ClassicalCode,
    QuantumCode,
    average_length,
    codeword_length,
    cq_scheme,
    huffman,
    is_uniquely_decodable,
    kraft_converse,
    kraft_sum,
    optimal_code,
    per_symbol_optimal_length,
    quantum_kraft_sum,
)
from .ensembles import (
    EnsembleModel,
    GeneralLaw,
    IIDLaw,
    MarkovLaw,
    SymbolSet,
    ensemble_state,
    ensemble_state_bruteforce,
    ensemble_state_markov,
    joint_pmf,
    validate,
)
from .errors import ContractError, QdcompError, ResourceError
from .numkit import Limits, hermitian_eig, shannon_entropy, tensor, von_neumann_entropy
from .qmc import (
    FockDynSystem,
    MarkovDynSystem,
    dynamical_entropy,
    joint_correlations,
    lifting_full_fock,
    lifting_full_markov,
    lifting_gamma,
)

__all__ = [
    "__version__",
    "ClassicalCode",
    "QuantumCode",
    "average_length",
    "codeword_length",
    "cq_scheme",
    "huffman",
    "is_uniquely_decodable",
    "kraft_converse",
    "kraft_sum",
    "optimal_code",
    "per_symbol_optimal_length",
    "quantum_kraft_sum",
    "EnsembleModel",
    "GeneralLaw",
    "IIDLaw",
    "MarkovLaw",
    "SymbolSet",
    "ensemble_state",
    "ensemble_state_bruteforce",
    "ensemble_state_markov",
    "joint_pmf",
    "validate",
    "FockDynSystem",
    "MarkovDynSystem",
    "dynamical_entropy",
    "joint_correlations",
    "lifting_full_fock",
    "lifting_full_markov",
    "lifting_gamma",
    "ContractError",
    "QdcompError",
    "ResourceError",
    "Limits",
    "hermitian_eig",
    "shannon_entropy",
    "tensor",
    "von_neumann_entropy",
]
