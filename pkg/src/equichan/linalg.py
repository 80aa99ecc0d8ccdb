"""Dense complex matrix helpers with explicit tolerances.

Matrices are plain ``numpy.ndarray`` objects of dtype ``complex128``.  Every
spectral test goes through :func:`hermitian_eigenvalues`, which insists on
Hermiticity before calling a Hermitian eigensolver.

Index convention: ``E_ij`` has a single 1 at (row i, col j), 0-indexed.
Tensor products follow ``numpy.kron``, so factor indices combine as
``i * d2 + k``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NotHermitian

__all__ = [
    "Tolerance",
    "DEFAULT_TOL",
    "as_matrix",
    "basis_matrix",
    "hermiticity_residual",
    "hermitian_eigenvalues",
    "is_psd",
    "kron",
    "partial_transpose",
    "partial_trace",
    "max_entangled_projector",
    "swap_operator",
    "matrix_to_json",
    "matrix_from_json",
]


@dataclass(frozen=True)
class Tolerance:
    """Numerical thresholds used by PSD and Hermiticity verdicts.

    Attributes
    ----------
    eig_zero : float
        Eigenvalues ``>= -eig_zero`` count as nonnegative.
    herm_sym : float
        Largest tolerated entry of ``|M - M^dagger|``.
    """

    eig_zero: float = 1e-9
    herm_sym: float = 1e-9

    def __post_init__(self):
        if self.eig_zero < 0 or self.herm_sym < 0:
            raise ValueError("tolerances must be nonnegative")


DEFAULT_TOL = Tolerance()


def as_matrix(M) -> np.ndarray:
    """Return ``M`` as a 2-D complex128 array (no copy when already one)."""
    A = np.asarray(M, dtype=np.complex128)
    if A.ndim != 2:
        raise DimensionMismatch(f"expected a 2-D matrix, got shape {A.shape}")
    return A


def _square(M) -> np.ndarray:
    A = as_matrix(M)
    if A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"matrix must be square, got {A.shape}")
    return A


def basis_matrix(n: int, i: int, j: int) -> np.ndarray:
    """Canonical basis element ``E_ij`` of ``M_n`` (0-indexed)."""
    E = np.zeros((n, n), dtype=np.complex128)
    E[i, j] = 1.0
    return E


def hermiticity_residual(M) -> float:
    """Largest entry of ``|M - M^dagger|``."""
    A = _square(M)
    if A.size == 0:
        return 0.0
    return float(np.max(np.abs(A - A.conj().T)))


def hermitian_eigenvalues(M, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Eigenvalues of a Hermitian matrix in ascending order.

    Parameters
    ----------
    M : array_like
        Square matrix, Hermitian up to ``tol.herm_sym``.
    tol : Tolerance

    Returns
    -------
    numpy.ndarray
        Real eigenvalues with multiplicity, ascending.

    Raises
    ------
    DimensionMismatch
        If ``M`` is not square.
    NotHermitian
        If ``max |M - M^dagger| > tol.herm_sym``.
    """
    A = _square(M)
    res = hermiticity_residual(A)
    if res > tol.herm_sym:
        raise NotHermitian(f"matrix is not Hermitian (max |M - M^dagger| = {res:.3e})")
    return np.linalg.eigvalsh(0.5 * (A + A.conj().T))


def is_psd(M, tol: Tolerance = DEFAULT_TOL) -> tuple[bool, float]:
    """PSD verdict and the smallest eigenvalue.

    The verdict is true iff the smallest eigenvalue is ``>= -tol.eig_zero``.
    """
    ev = hermitian_eigenvalues(M, tol)
    lo = float(ev[0]) if ev.size else 0.0
    return lo >= -tol.eig_zero, lo


def kron(A, B) -> np.ndarray:
    """Kronecker product ``A (x) B``."""
    return np.kron(as_matrix(A), as_matrix(B))


def _check_dims(A: np.ndarray, dims) -> tuple[int, int]:
    d1, d2 = (int(d) for d in dims)
    if d1 < 1 or d2 < 1 or d1 * d2 != A.shape[0]:
        raise DimensionMismatch(f"dims {dims} do not factor a {A.shape[0]}-dimensional matrix")
    return d1, d2


def partial_transpose(M, dims, side: str = "second") -> np.ndarray:
    """Transpose one tensor factor of a bipartite matrix.

    Parameters
    ----------
    M : array_like
        Square matrix of dimension ``d1 * d2``.
    dims : tuple of int
        ``(d1, d2)``.
    side : {"first", "second"}
        Factor whose indices get transposed.
    """
    A = _square(M)
    d1, d2 = _check_dims(A, dims)
    T = A.reshape(d1, d2, d1, d2)
    if side == "second":
        T = T.transpose(0, 3, 2, 1)
    elif side == "first":
        T = T.transpose(2, 1, 0, 3)
    else:
        raise ValueError(f"side must be 'first' or 'second', got {side!r}")
    return np.ascontiguousarray(T).reshape(d1 * d2, d1 * d2)


def partial_trace(M, dims, side: str = "first") -> np.ndarray:
    """Trace out one tensor factor of a bipartite matrix.

    ``side="first"`` returns a ``d2 x d2`` matrix, ``side="second"`` a
    ``d1 x d1`` one.
    """
    A = _square(M)
    d1, d2 = _check_dims(A, dims)
    T = A.reshape(d1, d2, d1, d2)
    if side == "first":
        return np.einsum("ijil->jl", T)
    if side == "second":
        return np.einsum("ijkj->ik", T)
    raise ValueError(f"side must be 'first' or 'second', got {side!r}")


def max_entangled_projector(n: int) -> np.ndarray:
    """Unnormalized ``sum_ij E_ij (x) E_ij``, i.e. ``|v><v|`` with ``v = sum_k e_k (x) e_k``."""
    v = np.eye(n, dtype=np.complex128).reshape(n * n)
    return np.outer(v, v)


def swap_operator(n: int) -> np.ndarray:
    """Swap ``F`` on ``C^n (x) C^n``, ``F(x (x) y) = y (x) x``."""
    F = np.zeros((n * n, n * n), dtype=np.complex128)
    for i in range(n):
        for j in range(n):
            F[j * n + i, i * n + j] = 1.0
    return F


def matrix_to_json(M) -> dict:
    """Encode a matrix as ``{"rows", "cols", "re", "im"}`` with row-major lists."""
    A = as_matrix(M)
    flat = A.reshape(-1)
    return {
        "rows": int(A.shape[0]),
        "cols": int(A.shape[1]),
        "re": [float(x) for x in flat.real],
        "im": [float(x) for x in flat.imag],
    }


def matrix_from_json(obj) -> np.ndarray:
    """Decode the JSON matrix format produced by :func:`matrix_to_json`.

    ``im`` may be omitted for real matrices.
    """
    try:
        rows, cols = int(obj["rows"]), int(obj["cols"])
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj.get("im", np.zeros(re.shape)), dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise DimensionMismatch(f"malformed matrix object: {exc}") from None
    if rows < 1 or cols < 1:
        raise DimensionMismatch("rows and cols must be positive")
    if re.size != rows * cols or im.size != rows * cols:
        raise DimensionMismatch(
            f"expected {rows * cols} entries, got re={re.size}, im={im.size}"
        )
    return (re + 1j * im).reshape(rows, cols)
