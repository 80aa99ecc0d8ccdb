"""Choi matrices: generic construction, closed forms and closed-form spectra.

The Choi matrix of ``Phi`` on ``M_n`` is ``C = sum_ij E_ij (x) Phi(E_ij)``;
block ``(i, j)`` of ``C`` is ``Phi(E_ij)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import (
    DiagonalParams,
    ProductParams,
    UnitaryParams,
    _basis_stack,
    apply,
    channel_dim,
    validate,
)
from .errors import NotUnital
from .linalg import DEFAULT_TOL, Tolerance, hermitian_eigenvalues, hermiticity_residual, max_entangled_projector

__all__ = [
    "ChoiMatrix",
    "ProductSpectrum",
    "choi_generic",
    "choi_u_closed",
    "choi_du_reduced",
    "product_choi_eigs",
    "product_pt_eigs",
    "expand_spectrum",
    "cluster_spectrum",
]


@dataclass(frozen=True, eq=False)
class ChoiMatrix:
    """Choi matrix together with its input/output dimensions."""

    dim_in: int
    dim_out: int
    matrix: np.ndarray

    @property
    def dims(self) -> tuple[int, int]:
        return (self.dim_in, self.dim_out)

    def eigenvalues(self, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
        return hermitian_eigenvalues(self.matrix, tol)

    def is_hermitian(self, atol: float = 1e-12) -> bool:
        return hermiticity_residual(self.matrix) <= atol


def choi_generic(channel, n_in: int | None = None) -> ChoiMatrix:
    """Choi matrix by summing over the canonical basis.

    Parameters
    ----------
    channel : family params or callable
        Callables receive one ``n_in x n_in`` matrix at a time.
    n_in : int, optional
        Required for callables.
    """
    n = channel_dim(channel, n_in)
    basis = _basis_stack(n)
    if isinstance(channel, (UnitaryParams, DiagonalParams, ProductParams)):
        images = apply(channel, basis)
    else:
        images = np.stack([np.asarray(channel(E), dtype=np.complex128) for E in basis])
    m = images.shape[-1]
    T = images.reshape(n, n, m, m).transpose(0, 2, 1, 3)
    return ChoiMatrix(n, m, np.ascontiguousarray(T).reshape(n * m, n * m))


def choi_u_closed(p: UnitaryParams) -> ChoiMatrix:
    """``lam sum_ij E_ij (x) E_ij + ((1 - lam)/n) I`` for a unital U(n) map."""
    if not validate(p).unital:
        raise NotUnital(f"closed form needs sigma = 1, got {p.sigma}")
    n = p.n
    lam = complex(p.lam)
    M = lam * max_entangled_projector(n) + (1 - lam) / n * np.eye(n * n)
    return ChoiMatrix(n, n, M)


def choi_du_reduced(p: DiagonalParams) -> tuple[np.ndarray, np.ndarray]:
    """Scalar part and reduced block of a DU Choi matrix.

    The Choi matrix splits into the 1x1 blocks ``c_ki`` on ``e_i (x) e_k``
    (``i != k``) and the ``n x n`` block on ``span{e_i (x) e_i}`` with
    diagonal ``c_ii`` and off-diagonal ``offdiag[i, j]``.

    Returns
    -------
    offdiag_eigs : (n*n - n,) ndarray
        ``mixing[i, j]`` for ``i != j`` in row-major order.
    reduced : (n, n) ndarray
    """
    n = p.n
    off = ~np.eye(n, dtype=bool)
    reduced = np.array(p.offdiag, dtype=np.complex128)
    reduced[np.diag_indices(n)] = np.diagonal(p.mixing)
    return np.asarray(p.mixing)[off], reduced


@dataclass(frozen=True)
class ProductSpectrum:
    """Eigenvalue families with multiplicities.

    ``pairs`` lists ``(eigenvalue, multiplicity)``; ``conjectured`` marks
    dimensions outside ``{2, 3}`` for either factor.
    """

    pairs: tuple
    conjectured: bool

    def __iter__(self):
        return iter(self.pairs)

    def __len__(self):
        return len(self.pairs)

    def expanded(self) -> np.ndarray:
        return expand_spectrum(self.pairs)


def _num(z):
    z = complex(z)
    return z.real if z.imag == 0 else z


def _product_families(p: ProductParams, t1: tuple, t2: tuple) -> tuple:
    N = p.n1 * p.n2
    l00, l01, l10, l11 = (complex(x) for x in p.lams)
    out = []
    for ta, ma in t1:
        for tb, mb in t2:
            val = (l00 + tb * l01 + ta * l10 + ta * tb * l11) / N
            out.append((_num(val), ma * mb))
    return tuple(out)


def product_choi_eigs(p: ProductParams) -> ProductSpectrum:
    """Closed-form Choi spectrum of a product-equivariant map.

    Eigenvalues are ``(lam00 + t2 lam01 + t1 lam10 + t1 t2 lam11)/(n1 n2)``
    with ``t_i = n_i^2 - 1`` (multiplicity 1) or ``t_i = -1`` (multiplicity
    ``n_i^2 - 1``), listed in the order (1, n1^2-1, n2^2-1,
    (n1^2-1)(n2^2-1)).
    """
    n1, n2 = p.n1, p.n2
    t1 = ((n1 * n1 - 1, 1), (-1, n1 * n1 - 1))
    t2 = ((n2 * n2 - 1, 1), (-1, n2 * n2 - 1))
    fam = _product_families(p, t1, t2)
    # order: (t1 big, t2 big), (t1 -1, t2 big), (t1 big, t2 -1), (both -1)
    pairs = (fam[0], fam[2], fam[1], fam[3])
    return ProductSpectrum(pairs, n1 > 3 or n2 > 3)


def product_pt_eigs(p: ProductParams) -> ProductSpectrum:
    """Closed-form spectrum of the partially transposed Choi matrix.

    Same shape as :func:`product_choi_eigs` with ``t_i = n_i - 1``
    (multiplicity ``n_i(n_i+1)/2``) or ``t_i = -(n_i + 1)`` (multiplicity
    ``n_i(n_i-1)/2``), from the symmetric/antisymmetric split of the swap.
    """
    n1, n2 = p.n1, p.n2
    t1 = ((n1 - 1, n1 * (n1 + 1) // 2), (-(n1 + 1), n1 * (n1 - 1) // 2))
    t2 = ((n2 - 1, n2 * (n2 + 1) // 2), (-(n2 + 1), n2 * (n2 - 1) // 2))
    return ProductSpectrum(_product_families(p, t1, t2), False)


def expand_spectrum(pairs) -> np.ndarray:
    """Sorted eigenvalue list from ``(value, multiplicity)`` pairs (real parts)."""
    vals = [complex(v).real for v, m in pairs for _ in range(m)]
    return np.sort(np.asarray(vals, dtype=float))


def cluster_spectrum(eigs, gap: float = 1e-8) -> list[tuple[float, int]]:
    """Group sorted eigenvalues whose consecutive spacing is ``<= gap``.

    Returns ``(mean value, multiplicity)`` per cluster.
    """
    ev = np.sort(np.asarray(eigs, dtype=float))
    if ev.size == 0:
        return []
    out = []
    start = 0
    for k in range(1, ev.size + 1):
        if k == ev.size or ev[k] - ev[k - 1] > gap:
            out.append((float(ev[start:k].mean()), k - start))
            start = k
    return out
