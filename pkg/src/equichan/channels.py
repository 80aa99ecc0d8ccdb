"""Parameter types, application and projection for the three equivariant families.

* ``U``: maps commuting with every unitary conjugation on ``M_n``,
  ``Phi(X) = ((sigma - lam)/n) tr(X) I + lam X``.
* ``DU``: maps commuting with diagonal-unitary conjugation.  Off-diagonal
  entries are scaled entrywise by ``offdiag`` and the diagonal is mixed by
  ``mixing``.  Convention: ``Phi(E_jj) = sum_k C[k, j] E_kk``, so column ``j``
  of ``C`` is the image of the ``j``-th diagonal projector, unitality means
  every row of ``C`` sums to one, and composition multiplies mixing matrices
  in order.
* ``PROD``: maps commuting with ``U1 (x) U2`` conjugation on
  ``M_n1 (x) M_n2``, ``Phi = sum_ab lam_ab P_a (x) P_b`` where ``P_0`` is the
  trace projection ``X -> tr(X) I/n`` and ``P_1 = id - P_0``.

All ``apply_*`` functions broadcast over leading batch axes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Number
from typing import Callable, Union

import numpy as np

from .errors import DimensionMismatch, EquichanError, FamilyMismatch, UnsupportedFamily

__all__ = [
    "UnitaryParams",
    "DiagonalParams",
    "ProductParams",
    "StructuralFlags",
    "Params",
    "apply",
    "apply_u",
    "apply_du",
    "apply_product",
    "decompose_product",
    "validate",
    "twirl",
    "superoperator",
    "as_callable",
    "channel_dim",
    "params_to_json",
    "params_from_json",
    "STRUCT_ATOL",
]

# Absolute slack for the structural (unital / Hermiticity) checks on float inputs.
# Exact inputs (int, Fraction) are compared exactly.
STRUCT_ATOL = 1e-12


def _check_n(n, name="n") -> int:
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
        raise DimensionMismatch(f"{name} must be an integer, got {n!r}")
    if n < 2:
        raise DimensionMismatch(f"{name} must be >= 2, got {n}")
    return int(n)


def _scalar(x):
    """Keep exact scalars exact, coerce numpy scalars to Python numbers."""
    if isinstance(x, (Fraction, int)) and not isinstance(x, bool):
        return x
    if isinstance(x, np.generic):
        x = x.item()
    if isinstance(x, complex):
        return x if x.imag != 0 else float(x.real)
    if isinstance(x, Number):
        return float(x)
    raise TypeError(f"expected a number, got {x!r}")


def _is_zero(x, atol=STRUCT_ATOL) -> bool:
    if isinstance(x, (Fraction, int)):
        return x == 0
    return abs(x) <= atol


@dataclass(frozen=True)
class UnitaryParams:
    """``Phi(X) = ((sigma - lam)/n) tr(X) I + lam X`` on ``M_n``."""

    n: int
    sigma: complex = 1.0
    lam: complex = 0.0
    family = "U"

    def __post_init__(self):
        object.__setattr__(self, "n", _check_n(self.n))
        object.__setattr__(self, "sigma", _scalar(self.sigma))
        object.__setattr__(self, "lam", _scalar(self.lam))

    @property
    def dim(self) -> int:
        return self.n

    @classmethod
    def identity(cls, n: int) -> "UnitaryParams":
        return cls(n, 1.0, 1.0)


@dataclass(frozen=True, eq=False)
class DiagonalParams:
    """Diagonal-unitary equivariant map.

    Parameters
    ----------
    n : int
    offdiag : (n, n) array_like
        ``offdiag[i, j]`` scales entry ``(i, j)`` for ``i != j``.  The diagonal
        is ignored and stored as zero.
    mixing : (n, n) array_like
        ``mixing[k, j]`` is the weight of ``E_kk`` in ``Phi(E_jj)``.
    """

    n: int
    offdiag: np.ndarray = field(repr=False)
    mixing: np.ndarray = field(repr=False)
    family = "DU"

    def __post_init__(self):
        n = _check_n(self.n)
        L = np.array(self.offdiag, dtype=np.complex128)
        C = np.array(self.mixing, dtype=np.complex128)
        if L.shape != (n, n) or C.shape != (n, n):
            raise DimensionMismatch(f"offdiag and mixing must be {n}x{n}")
        np.fill_diagonal(L, 0.0)
        L.setflags(write=False)
        C.setflags(write=False)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "offdiag", L)
        object.__setattr__(self, "mixing", C)

    @property
    def dim(self) -> int:
        return self.n

    def __eq__(self, other):
        if not isinstance(other, DiagonalParams):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self.offdiag, other.offdiag)
            and np.array_equal(self.mixing, other.mixing)
        )

    def __hash__(self):
        return hash((self.n, self.offdiag.tobytes(), self.mixing.tobytes()))

    def __repr__(self):
        return (
            f"DiagonalParams(n={self.n}, offdiag={self.offdiag.tolist()}, "
            f"mixing={self.mixing.tolist()})"
        )

    @classmethod
    def identity(cls, n: int) -> "DiagonalParams":
        return cls(n, np.ones((n, n)), np.eye(n))

    @classmethod
    def du2(cls, c12, c21, lam) -> "DiagonalParams":
        """Unital Hermiticity-preserving ``DU(2)`` map from its free parameters.

        The mixing matrix is ``[[1 - c12, c12], [c21, 1 - c21]]`` (rows sum to
        one) and ``offdiag = [[., lam], [conj(lam), .]]``.
        """
        lam = complex(lam)
        C = np.array([[1 - c12, c12], [c21, 1 - c21]], dtype=np.complex128)
        L = np.array([[0, lam], [lam.conjugate(), 0]], dtype=np.complex128)
        return cls(2, L, C)

    @classmethod
    def du3_symmetric(cls, p, lam) -> "DiagonalParams":
        """Symmetric ``DU(3)`` map: ``C = p I + (1-p)/2 (J - I)``, ``lam`` above the diagonal."""
        lam = complex(lam)
        C = p * np.eye(3) + 0.5 * (1 - p) * (np.ones((3, 3)) - np.eye(3))
        L = np.full((3, 3), lam, dtype=np.complex128)
        L[np.tril_indices(3, -1)] = lam.conjugate()
        return cls(3, L, C)


@dataclass(frozen=True)
class ProductParams:
    """``Phi = sum_ab lam_ab P_a (x) P_b`` on ``M_n1 (x) M_n2``."""

    n1: int
    n2: int
    lam00: complex = 1.0
    lam01: complex = 0.0
    lam10: complex = 0.0
    lam11: complex = 0.0
    family = "PROD"

    def __post_init__(self):
        object.__setattr__(self, "n1", _check_n(self.n1, "n1"))
        object.__setattr__(self, "n2", _check_n(self.n2, "n2"))
        for name in ("lam00", "lam01", "lam10", "lam11"):
            object.__setattr__(self, name, _scalar(getattr(self, name)))

    @property
    def dim(self) -> int:
        return self.n1 * self.n2

    @property
    def lams(self) -> tuple:
        return (self.lam00, self.lam01, self.lam10, self.lam11)

    @property
    def abcd(self) -> tuple:
        """Constants of the canonical-basis action.

        ``a = (lam00 - lam01 - lam10 + lam11)/(n1 n2)``,
        ``b = (lam01 - lam11)/n1``, ``c = (lam10 - lam11)/n2``, ``d = lam11``.
        """
        l00, l01, l10, l11 = self.lams
        a = (l00 - l01 - l10 + l11) / (self.n1 * self.n2)
        b = (l01 - l11) / self.n1
        c = (l10 - l11) / self.n2
        return a, b, c, l11

    @classmethod
    def identity(cls, n1: int, n2: int) -> "ProductParams":
        return cls(n1, n2, 1.0, 1.0, 1.0, 1.0)


Params = Union[UnitaryParams, DiagonalParams, ProductParams]


@dataclass(frozen=True)
class StructuralFlags:
    unital: bool
    hermiticity_preserving: bool
    details: tuple = ()


def _as_batch(X, N: int) -> np.ndarray:
    A = np.asarray(X, dtype=np.complex128)
    if A.ndim < 2 or A.shape[-2:] != (N, N):
        raise DimensionMismatch(f"expected {N}x{N} input, got shape {A.shape}")
    return A


def apply_u(p: UnitaryParams, X) -> np.ndarray:
    """``((sigma - lam)/n) tr(X) I + lam X``."""
    n = p.n
    A = _as_batch(X, n)
    tr = np.trace(A, axis1=-2, axis2=-1)
    coef = complex(p.sigma - p.lam) / n
    return coef * tr[..., None, None] * np.eye(n) + complex(p.lam) * A


def apply_du(p: DiagonalParams, X) -> np.ndarray:
    """Scale off-diagonal entries by ``offdiag`` and map the diagonal by ``mixing``."""
    n = p.n
    A = _as_batch(X, n)
    out = A * p.offdiag
    d = np.diagonal(A, axis1=-2, axis2=-1)
    idx = np.arange(n)
    out[..., idx, idx] = d @ p.mixing.T
    return out


def decompose_product(X, n1: int, n2: int):
    """Split ``X`` into the four invariant components ``(X00, X01, X10, X11)``.

    ``X00 = tr(X)/(n1 n2) I``, ``X01 = I/n1 (x) (tr_1 X - tr(X)/n2 I)``,
    ``X10 = (tr_2 X - tr(X)/n1 I) (x) I/n2`` and ``X11`` is the remainder
    (traceless in both partial traces).  Broadcasts over leading axes.
    """
    n1 = _check_n(n1, "n1")
    n2 = _check_n(n2, "n2")
    N = n1 * n2
    A = _as_batch(X, N)
    lead = A.shape[:-2]
    T = A.reshape(lead + (n1, n2, n1, n2))
    tr = np.trace(A, axis1=-2, axis2=-1)[..., None, None]
    tr1 = np.einsum("...ijil->...jl", T)  # trace over first factor, n2 x n2
    tr2 = np.einsum("...ijkj->...ik", T)  # trace over second factor, n1 x n1
    I1, I2 = np.eye(n1), np.eye(n2)
    X00 = tr / N * np.eye(N)
    B = tr1 - tr / n2 * I2
    X01 = np.einsum("ik,...jl->...ijkl", I1, B).reshape(lead + (N, N)) / n1
    Acomp = tr2 - tr / n1 * I1
    X10 = np.einsum("...ik,jl->...ijkl", Acomp, I2).reshape(lead + (N, N)) / n2
    X11 = A - X00 - X01 - X10
    return X00, X01, X10, X11


def apply_product(p: ProductParams, X) -> np.ndarray:
    """``sum_ab lam_ab X_ab`` using :func:`decompose_product`."""
    parts = decompose_product(X, p.n1, p.n2)
    return sum(complex(lam) * part for lam, part in zip(p.lams, parts))


def apply(p, X) -> np.ndarray:
    """Apply family parameters or a plain callable to ``X``."""
    if isinstance(p, UnitaryParams):
        return apply_u(p, X)
    if isinstance(p, DiagonalParams):
        return apply_du(p, X)
    if isinstance(p, ProductParams):
        return apply_product(p, X)
    if callable(p):
        return np.asarray(p(X), dtype=np.complex128)
    raise UnsupportedFamily(f"cannot apply object of type {type(p).__name__}")


def as_callable(channel) -> Callable[[np.ndarray], np.ndarray]:
    if isinstance(channel, (UnitaryParams, DiagonalParams, ProductParams)):
        return lambda X: apply(channel, X)
    if callable(channel):
        return channel
    raise UnsupportedFamily(f"not a channel: {type(channel).__name__}")


def channel_dim(channel, n: int | None = None) -> int:
    """Input dimension of a channel; callables need an explicit ``n``."""
    if isinstance(channel, (UnitaryParams, DiagonalParams, ProductParams)):
        if n is not None and n != channel.dim:
            raise DimensionMismatch(f"channel acts on dimension {channel.dim}, not {n}")
        return channel.dim
    if n is None:
        raise DimensionMismatch("dimension must be given for a generic callable")
    return int(n)


def _basis_stack(n: int) -> np.ndarray:
    """All ``E_ij`` as an ``(n*n, n, n)`` stack, index ``i*n + j``."""
    return np.eye(n * n, dtype=np.complex128).reshape(n * n, n, n)


def superoperator(channel, n: int | None = None) -> np.ndarray:
    """Matrix ``S`` with ``vec(Phi(X)) = S @ vec(X)`` for row-major ``vec``."""
    n = channel_dim(channel, n)
    basis = _basis_stack(n)
    if isinstance(channel, (UnitaryParams, DiagonalParams, ProductParams)):
        images = apply(channel, basis)
    else:
        images = np.stack([np.asarray(channel(E), dtype=np.complex128) for E in basis])
    if images.shape[1:] != (n, n):
        raise DimensionMismatch("channel output has the wrong shape")
    return np.ascontiguousarray(images.reshape(n * n, n * n).T)


def validate(params) -> StructuralFlags:
    """Unital and Hermiticity-preserving flags evaluated from the parameters.

    Float parameters are compared with absolute slack ``STRUCT_ATOL``; exact
    parameters (``int``, ``Fraction``) exactly.
    """
    details = []
    if isinstance(params, UnitaryParams):
        s, lam = params.sigma, params.lam
        du = s - 1
        unital = _is_zero(du)
        herm = _is_zero(complex(s).imag) and _is_zero(complex(lam).imag)
        details.append(f"|sigma - 1| = {abs(du):.3e}")
        details.append(f"|Im sigma| = {abs(complex(s).imag):.3e}, |Im lam| = {abs(complex(lam).imag):.3e}")
    elif isinstance(params, DiagonalParams):
        C, L = params.mixing, params.offdiag
        row_dev = float(np.max(np.abs(C.sum(axis=1) - 1)))
        im_c = float(np.max(np.abs(C.imag)))
        off = ~np.eye(params.n, dtype=bool)
        herm_dev = float(np.max(np.abs(L - L.conj().T)[off])) if params.n > 1 else 0.0
        unital = row_dev <= STRUCT_ATOL
        herm = im_c <= STRUCT_ATOL and herm_dev <= STRUCT_ATOL
        details.append(f"max |row sum - 1| = {row_dev:.3e}")
        details.append(f"max |Im C| = {im_c:.3e}, max |lam_ij - conj(lam_ji)| = {herm_dev:.3e}")
    elif isinstance(params, ProductParams):
        du = params.lam00 - 1
        unital = _is_zero(du)
        im = max(abs(complex(x).imag) for x in params.lams)
        herm = im <= STRUCT_ATOL
        details.append(f"|lam00 - 1| = {abs(du):.3e}")
        details.append(f"max |Im lam_ab| = {im:.3e}")
    else:
        raise UnsupportedFamily(f"no structural test for {type(params).__name__}")
    return StructuralFlags(bool(unital), bool(herm), tuple(details))


def _family_basis(family: str, dims):
    """Orthogonal Choi-matrix basis of a family, with a constructor from coefficients."""
    from .choi import choi_generic

    if family == "U":
        n = _check_n(int(dims[0]) if np.ndim(dims) else int(dims))
        K = [choi_generic(UnitaryParams(n, 1.0, 0.0)).matrix, choi_generic(UnitaryParams(n, 0.0, 1.0)).matrix]

        def build(coef):
            return UnitaryParams(n, coef[0], coef[1])

        return n, K, build
    if family == "PROD":
        n1, n2 = (int(d) for d in dims)
        K = []
        for k in range(4):
            lam = [0.0] * 4
            lam[k] = 1.0
            K.append(choi_generic(ProductParams(n1, n2, *lam)).matrix)

        def build(coef):
            return ProductParams(n1, n2, *coef)

        return n1 * n2, K, build
    raise UnsupportedFamily(f"unknown family {family!r}")


def _clean(z: complex):
    z = complex(z)
    return z if z.imag != 0 else z.real


def twirl(choi, family: str, dims):
    """Orthogonal projection of a linear map onto an equivariant family.

    Parameters
    ----------
    choi : array_like or ChoiMatrix
        Choi matrix ``sum_ij E_ij (x) L(E_ij)`` of the input map.
    family : {"U", "DU", "PROD"}
    dims : int or (int, int)
        ``n`` for ``U``/``DU``; ``(n1, n2)`` for ``PROD``.

    Returns
    -------
    params : family parameters
        Projection in the Frobenius inner product on Choi matrices.
    residual : float
        Frobenius distance between the input Choi matrix and the projection's.
    """
    from .choi import choi_generic

    J = np.asarray(getattr(choi, "matrix", choi), dtype=np.complex128)
    family = _normalize_family(family)
    if family == "DU":
        n = _check_n(int(dims[0]) if np.ndim(dims) else int(dims))
        if J.shape != (n * n, n * n):
            raise DimensionMismatch(f"Choi matrix must be {n * n}x{n * n}")
        # E_jj (x) E_kk and E_ij (x) E_ij are orthonormal, so projection is extraction.
        T = J.reshape(n, n, n, n)
        C = np.empty((n, n), dtype=np.complex128)
        L = np.zeros((n, n), dtype=np.complex128)
        for j in range(n):
            for k in range(n):
                C[k, j] = T[j, k, j, k]
        for i in range(n):
            for j in range(n):
                if i != j:
                    L[i, j] = T[i, i, j, j]
        if not np.any(C.imag):
            C = C.real
        params = DiagonalParams(n, L, C)
    else:
        N, K, build = _family_basis(family, dims)
        if J.shape != (N * N, N * N):
            raise DimensionMismatch(f"Choi matrix must be {N * N}x{N * N}")
        coef = [_clean(np.vdot(Kk, J) / np.vdot(Kk, Kk).real) for Kk in K]
        params = build(coef)
    residual = float(np.linalg.norm(J - choi_generic(params).matrix))
    return params, residual


# ---------------------------------------------------------------- JSON


def _normalize_family(family: str) -> str:
    f = str(family).upper()
    if f in ("U", "UN", "UNITARY"):
        return "U"
    if f in ("DU", "DIAGONAL"):
        return "DU"
    if f in ("PROD", "PRODUCT"):
        return "PROD"
    raise UnsupportedFamily(f"unknown family {family!r}")


def _cpair(z) -> list:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def _cmat(M: np.ndarray) -> list:
    return [[_cpair(z) for z in row] for row in np.asarray(M)]


def _parse_complex(x, what: str) -> complex:
    if isinstance(x, bool):
        raise EquichanError(f"{what}: expected a number or [re, im], got {x!r}")
    if isinstance(x, (int, float)):
        return complex(x)
    if isinstance(x, (list, tuple)) and len(x) == 2 and all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in x
    ):
        return complex(x[0], x[1])
    if isinstance(x, (list, tuple)) and len(x) == 1:
        return _parse_complex(x[0], what)
    raise EquichanError(f"{what}: expected a number or [re, im], got {x!r}")


def _parse_cmat(rows, n: int, what: str) -> np.ndarray:
    if not isinstance(rows, list) or len(rows) != n:
        raise DimensionMismatch(f"{what}: expected {n} rows")
    out = np.empty((n, n), dtype=np.complex128)
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != n:
            raise DimensionMismatch(f"{what}: row {i} must have {n} entries")
        for j, v in enumerate(row):
            out[i, j] = _parse_complex(v, f"{what}[{i}][{j}]")
    return out


def _real_or_complex(z: complex):
    return z.real if z.imag == 0 else z


def params_to_json(p) -> dict:
    """Serialize family parameters to the documented JSON object."""
    if isinstance(p, UnitaryParams):
        return {"family": "U", "n": p.n, "sigma": _cpair(p.sigma), "lambda": _cpair(p.lam)}
    if isinstance(p, DiagonalParams):
        return {"family": "DU", "n": p.n, "offdiag": _cmat(p.offdiag), "mixing": _cmat(p.mixing)}
    if isinstance(p, ProductParams):
        return {"family": "PROD", "n1": p.n1, "n2": p.n2, "lam": [_cpair(x) for x in p.lams]}
    raise UnsupportedFamily(f"cannot serialize {type(p).__name__}")


def params_from_json(obj) -> Params:
    """Parse the JSON produced by :func:`params_to_json`."""
    if not isinstance(obj, dict) or "family" not in obj:
        raise EquichanError("params JSON must be an object with a 'family' key")
    fam = _normalize_family(obj["family"])
    try:
        if fam == "U":
            return UnitaryParams(
                obj["n"],
                _real_or_complex(_parse_complex(obj.get("sigma", 1.0), "sigma")),
                _real_or_complex(_parse_complex(obj["lambda"], "lambda")),
            )
        if fam == "DU":
            n = _check_n(obj["n"])
            L = _parse_cmat(obj["offdiag"], n, "offdiag")
            C = _parse_cmat(obj["mixing"], n, "mixing")
            if not np.any(C.imag):
                C = C.real
            return DiagonalParams(n, L, C)
        lam = obj["lam"]
        if not isinstance(lam, list) or len(lam) != 4:
            raise EquichanError("lam must list four [re, im] pairs")
        vals = [_real_or_complex(_parse_complex(x, f"lam[{k}]")) for k, x in enumerate(lam)]
        return ProductParams(obj["n1"], obj["n2"], *vals)
    except KeyError as exc:
        raise EquichanError(f"params JSON for family {fam} is missing key {exc}") from None


def same_family(p, q) -> None:
    """Raise unless ``p`` and ``q`` are the same family and dimensions."""
    if type(p) is not type(q):
        raise FamilyMismatch(f"{type(p).__name__} vs {type(q).__name__}")
    if isinstance(p, ProductParams):
        if (p.n1, p.n2) != (q.n1, q.n2):
            raise DimensionMismatch(f"({p.n1},{p.n2}) vs ({q.n1},{q.n2})")
    elif p.n != q.n:
        raise DimensionMismatch(f"n={p.n} vs n={q.n}")
