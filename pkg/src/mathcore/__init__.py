from .linalg import ComplexMatrix, ComplexVector, as_complex_matrix, fix_phase, left_pseudo_inverse, principal_eigenvector
from .rng import RandomStream, sample_complex_gaussian, stable_key
from .special import mpsk_sep_exact, q_function

__all__ = [
    "ComplexMatrix",
    "ComplexVector",
    "RandomStream",
    "as_complex_matrix",
    "fix_phase",
    "left_pseudo_inverse",
    "mpsk_sep_exact",
    "principal_eigenvector",
    "q_function",
    "sample_complex_gaussian",
    "stable_key",
]
