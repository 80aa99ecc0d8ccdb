"""Region predicates (Schwarz, CP, PPT, EB) with signed margins.

Every predicate returns a :class:`RegionVerdict`.  Analytic predicates collect
the slack of each defining inequality; the margin is the smallest slack and
``binding`` names the inequality attaining it.  Exact inputs (``int``,
``Fraction``) give exact margins, so boundary points report margin 0.

Numeric predicates (``cp_du``, ``ppt_numeric``, ...) decide with the
``eig_zero`` band of the supplied :class:`~equichan.linalg.Tolerance`.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

import numpy as np

from .channels import DiagonalParams, ProductParams, UnitaryParams, validate
from .choi import ChoiMatrix, choi_du_reduced, choi_generic, product_choi_eigs, product_pt_eigs
from .errors import (
    NonRealParameter,
    ParameterOutOfRange,
    StructurallyInvalid,
    UnsupportedDimensions,
    UnsupportedFamily,
)
from .linalg import DEFAULT_TOL, Tolerance, hermitian_eigenvalues, partial_transpose

__all__ = [
    "RegionVerdict",
    "schwarz_u",
    "cp_u",
    "ppt_eb_u",
    "eb_u",
    "schwarz_necessary_du",
    "cp_du",
    "ppt_du",
    "classify_du2",
    "classify_du3_symmetric",
    "schwarz_necessary_product",
    "cp_product_small",
    "ppt_product",
    "ppt_numeric",
    "cp_numeric",
    "ppt_channel",
    "eb_sufficient",
    "product_eb_corners",
    "both",
    "as_du2",
    "as_du3_symmetric",
    "class_report",
]


@dataclass(frozen=True)
class RegionVerdict:
    """Membership verdict.

    Attributes
    ----------
    member : bool
    margin : float
        Smallest slack over the defining inequalities (negative = violated).
    binding : str
        Identifier of the inequality attaining ``margin``.
    method : str
        ``"analytic"``, ``"numeric"``, ``"necessary-only"`` or
        ``"sufficient-only"``.
    note : str
    """

    member: bool
    margin: float
    binding: str
    method: str = "analytic"
    note: str = ""

    def boundary(self, tol: Tolerance = DEFAULT_TOL) -> bool:
        return abs(self.margin) <= tol.eig_zero

    def to_json(self) -> dict:
        return {
            "member": self.member,
            "margin": self.margin,
            "binding": self.binding,
            "method": self.method,
            "note": self.note,
        }


def _verdict(slacks: dict, method: str = "analytic", note: str = "", threshold=0) -> RegionVerdict:
    binding = min(slacks, key=lambda k: slacks[k])
    m = slacks[binding]
    return RegionVerdict(bool(m >= threshold), float(m), binding, method, note)


def both(*verdicts: RegionVerdict, method: str | None = None, note: str = "") -> RegionVerdict:
    """Conjunction of verdicts; the margin and binding come from the tightest one."""
    member = all(v.member for v in verdicts)
    tight = min(verdicts, key=lambda v: v.margin)
    if not member:
        tight = min((v for v in verdicts if not v.member), key=lambda v: v.margin)
    return RegionVerdict(member, tight.margin, tight.binding, method or tight.method, note or tight.note)


def _real(x, name: str = "lambda"):
    if isinstance(x, (Fraction, int)) and not isinstance(x, bool):
        return x
    z = complex(x)
    if z.imag != 0:
        raise NonRealParameter(f"{name} must be real, got {x!r}")
    return z.real


def _unit(x):
    """``1`` in the arithmetic of ``x`` (exact for Fraction/int)."""
    return Fraction(1) if isinstance(x, (Fraction, int)) else 1.0


# ---------------------------------------------------------------- U(n)


def schwarz_u(n: int, lam) -> RegionVerdict:
    """Schwarz iff ``-1/n <= lam <= 1``."""
    lam = _real(lam)
    one = _unit(lam)
    return _verdict({"lambda>=-1/n": lam + one / n, "lambda<=1": one - lam})


def cp_u(n: int, lam) -> RegionVerdict:
    """CP iff ``-1/(n^2-1) <= lam <= 1``."""
    lam = _real(lam)
    one = _unit(lam)
    return _verdict({"lambda>=-1/(n^2-1)": lam + one / (n * n - 1), "lambda<=1": one - lam})


def ppt_eb_u(n: int, lam) -> RegionVerdict:
    """Partial-transpose interval ``-1/(n-1) <= lam <= 1/(n+1)``.

    This is exactly the set where ``T o Phi`` is CP (the partially transposed
    Choi spectrum is ``(1-lam)/n +- lam``).  It is the PPT and EB region for
    maps that are already CP; intersect with :func:`cp_u` for channels, see
    :func:`ppt_channel`.
    """
    lam = _real(lam)
    one = _unit(lam)
    return _verdict(
        {"lambda>=-1/(n-1)": lam + one / (n - 1), "lambda<=1/(n+1)": one / (n + 1) - lam},
        note="T o Phi is CP on this interval; PPT channel = this AND cp_u",
    )


def eb_u(n: int, lam) -> RegionVerdict:
    """Exact EB test through the fidelity of the normalized Choi state.

    With ``rho = C/n`` and ``v`` the normalized maximally entangled vector,
    ``F = v^dag rho v = (1-lam)/n^2 + lam``.  An isotropic operator is a
    separable state iff ``0 <= F <= 1/n``, i.e. ``-1/(n^2-1) <= lam <= 1/(n+1)``.
    """
    lam = _real(lam)
    one = _unit(lam)
    F = (one - lam) / (n * n) + lam
    return _verdict({"F>=0": F, "F<=1/n": one / n - F}, note=f"F = {float(F):.17g}")


# ---------------------------------------------------------------- DU(n)


def _require_structure(p, unital: bool = True) -> None:
    flags = validate(p)
    if not flags.hermiticity_preserving or (unital and not flags.unital):
        raise StructurallyInvalid(
            "parameters must be "
            + ("unital and " if unital else "")
            + "Hermiticity preserving: "
            + "; ".join(flags.details)
        )


def schwarz_necessary_du(p: DiagonalParams) -> RegionVerdict:
    """Necessary Schwarz conditions for a unital Hermiticity-preserving DU map.

    * ``0 <= c_kj <= 1`` for all ``k, j`` (probe ``E_jj``);
    * ``c_jj >= |lam_ij|^2`` for ``i != j`` (probe ``E_ij``);
    * for distinct ``i, j, k`` (probe ``E_ij + E_ik``)::

        (c_jj + c_jk - |lam_ij|^2)(c_kj + c_kk - |lam_ik|^2) >= |lam_jk - lam_ji lam_ik|^2

      together with nonnegativity of both factors.

    For ``n = 2`` the list is also sufficient.  For ``n >= 3`` a true verdict
    is inconclusive.
    """
    _require_structure(p)
    n = p.n
    C = p.mixing.real
    L = p.offdiag
    s = {}
    for k in range(n):
        for j in range(n):
            s[f"c[{k},{j}]>=0"] = C[k, j]
            s[f"c[{k},{j}]<=1"] = 1.0 - C[k, j]
    for i in range(n):
        for j in range(n):
            if i != j:
                s[f"c[{j},{j}]>=|lam[{i},{j}]|^2"] = C[j, j] - abs(L[i, j]) ** 2
    for i in range(n):
        others = [x for x in range(n) if x != i]
        for j, k in combinations(others, 2):
            u = C[j, j] + C[j, k] - abs(L[i, j]) ** 2
            v = C[k, j] + C[k, k] - abs(L[i, k]) ** 2
            off = L[j, k] - L[j, i] * L[i, k]
            tag = f"mixed[{i},{j},{k}]"
            s[tag + ".det"] = u * v - abs(off) ** 2
            s[tag + ".diag_j"] = u
            s[tag + ".diag_k"] = v
    if n == 2:
        return _verdict(s, "analytic", "exact for n = 2")
    return _verdict(s, "necessary-only", "false certifies not Schwarz; true is inconclusive")


def cp_du(p: DiagonalParams, tol: Tolerance = DEFAULT_TOL) -> RegionVerdict:
    """CP iff ``c_ij >= 0`` for ``i != j`` and the reduced block is PSD."""
    _require_structure(p, unital=False)
    offs, reduced = choi_du_reduced(p)
    n = p.n
    s = {}
    idx = [(i, j) for i in range(n) for j in range(n) if i != j]
    for (i, j), v in zip(idx, offs):
        s[f"c[{i},{j}]>=0"] = float(np.real(v))
    s["reduced>=0"] = float(hermitian_eigenvalues(reduced, tol)[0])
    return _verdict(s, "analytic", "eigenvalue of the reduced block is numeric", threshold=-tol.eig_zero)


def ppt_du(p: DiagonalParams) -> RegionVerdict:
    """``T o Phi`` CP for a DU map.

    The partially transposed Choi matrix is diagonal ``c_ii`` on
    ``e_i (x) e_i`` plus the 2x2 blocks ``[[c_ji, lam_ij], [lam_ji, c_ij]]`` on
    ``{e_i (x) e_j, e_j (x) e_i}``.  Hence the condition is ``c >= 0``
    entrywise and ``c_ij c_ji >= |lam_ij|^2`` for every pair.
    """
    _require_structure(p, unital=False)
    n = p.n
    C = p.mixing.real
    s = {}
    for k in range(n):
        for j in range(n):
            s[f"c[{k},{j}]>=0"] = C[k, j]
    for i, j in combinations(range(n), 2):
        s[f"c[{i},{j}]c[{j},{i}]>=|lam[{i},{j}]|^2"] = C[i, j] * C[j, i] - abs(p.offdiag[i, j]) ** 2
    return _verdict(s)


def classify_du2(c12, c21, lam) -> tuple[RegionVerdict, RegionVerdict]:
    """Schwarz and CP verdicts for unital ``DU(2)`` maps.

    With ``c11 = 1 - c12`` and ``c22 = 1 - c21``:
    Schwarz iff ``0 <= c12, c21 <= 1`` and ``c11, c22 >= |lam|^2``;
    CP iff ``c12, c21 >= 0`` and ``[[c11, lam], [conj(lam), c22]] >= 0``.
    The conditions are symmetric under exchanging ``c11`` and ``c22``.
    """
    c12 = _real(c12, "c12")
    c21 = _real(c21, "c21")
    one = _unit(c12) if isinstance(c21, (int, Fraction)) else 1.0
    c11, c22 = one - c12, one - c21
    if isinstance(lam, (Fraction, int)):
        l2 = lam * lam
    else:
        l2 = abs(complex(lam)) ** 2
    schwarz = _verdict(
        {
            "c12>=0": c12,
            "c12<=1": one - c12,
            "c21>=0": c21,
            "c21<=1": one - c21,
            "c11>=|lam|^2": c11 - l2,
            "c22>=|lam|^2": c22 - l2,
        }
    )
    cp = _verdict(
        {"c12>=0": c12, "c21>=0": c21, "c11>=0": c11, "c22>=0": c22, "c11*c22>=|lam|^2": c11 * c22 - l2}
    )
    return schwarz, cp


def classify_du3_symmetric(p, lam) -> tuple[RegionVerdict, RegionVerdict]:
    """Closed-form region formulas for the symmetric ``DU(3)`` family.

    Schwarz: ``|lam|^2 <= min(p, 1-p)/2``; CP: ``|lam| <= min(p, 1-p)``.

    These formulas do not describe the true regions of the family.  For
    example ``p = 1, lam = 1/2`` is a Schur multiplier by a PSD matrix (CP and
    Schwarz) but is rejected by both formulas, and ``p = 1/2, lam = 0.6`` passes
    the Kadison test on every probe.  The exact CP region is given by
    :func:`cp_du` (for real ``lam``: ``-p/2 <= lam <= p``).  Use :func:`cp_du`
    and the oracle for decisions.
    """
    p = _real(p, "p")
    if not (0 <= p <= 1):
        raise ParameterOutOfRange(f"p must lie in [0, 1], got {p}")
    one = _unit(p)
    m = min(p, one - p)
    if isinstance(lam, (Fraction, int)):
        al, l2 = abs(lam), lam * lam
    else:
        al = abs(complex(lam))
        l2 = al * al
    note = "closed-form formula; disagrees with cp_du and the Kadison oracle on parts of the square"
    schwarz = _verdict({"|lam|^2<=min(p,1-p)/2": m / 2 - l2}, note=note)
    cp = _verdict({"|lam|<=min(p,1-p)": m - al}, note=note)
    return schwarz, cp


def as_du2(p: DiagonalParams):
    """``(c12, c21, lam)`` if ``p`` is a unital Hermiticity-preserving DU(2) map, else ``None``."""
    if not isinstance(p, DiagonalParams) or p.n != 2:
        return None
    f = validate(p)
    if not (f.unital and f.hermiticity_preserving):
        return None
    C = p.mixing.real
    return float(C[0, 1]), float(C[1, 0]), complex(p.offdiag[0, 1])


def as_du3_symmetric(p: DiagonalParams, atol: float = 1e-12):
    """``(p, lam)`` if ``p`` has the symmetric DU(3) form, else ``None``."""
    if not isinstance(p, DiagonalParams) or p.n != 3:
        return None
    pv = complex(p.mixing[0, 0]).real
    lam = complex(p.offdiag[0, 1])
    ref = DiagonalParams.du3_symmetric(pv, lam)
    if np.allclose(ref.mixing, p.mixing, rtol=0, atol=atol) and np.allclose(
        ref.offdiag, p.offdiag, rtol=0, atol=atol
    ):
        return pv, lam
    return None


# ---------------------------------------------------------------- product


def _require_product(p: ProductParams):
    f = validate(p)
    if not (f.unital and f.hermiticity_preserving):
        raise StructurallyInvalid("product predicates need lam00 = 1 and real lam: " + "; ".join(f.details))
    return tuple(complex(x).real for x in p.lams)


def _specialized_faces(p: ProductParams, l01, l10, l11) -> dict:
    """Named faces in lam coordinates for (2,2) and (2,3); scaled by n1*n2."""
    key = (p.n1, p.n2)
    if key == (2, 2):
        return {
            "S22.lin1": 1 - l01 - l10 + l11,
            "S22.lin2": 1 - l01 + l10 - l11,
            "S22.lin3": 1 + l01 - l10 - l11,
            "S22.quad": 1 + l01 + l10 + l11 - 4 * l11**2,
            "S22.q1": 1 + l01 - l10 - l11 - (l01 - l11) ** 2,
            "S22.q2": 1 + l01 + l10 + l11 - (l01 + l11) ** 2,
            "S22.q3": 1 - l01 + l10 - l11 - (l10 - l11) ** 2,
            "S22.q4": 1 + l01 + l10 + l11 - (l10 + l11) ** 2,
            "S22.rng1.lo": (l01 + l10 - l11) + 3,
            "S22.rng1.hi": 1 - (l01 + l10 - l11),
            "S22.rng2.lo": (l01 - l10 + l11) + 3,
            "S22.rng2.hi": 1 - (l01 - l10 + l11),
            "S22.rng3.lo": (l01 + l10 + l11) + 1,
            "S22.rng3.hi": 3 - (l01 + l10 + l11),
            "S22.rng4.lo": (l01 - l10 - l11) + 1,
            "S22.rng4.hi": 3 - (l01 - l10 - l11),
        }
    if key == (2, 3):
        return {
            "S23.lin1": 1 - l01 - l10 + l11,
            "S23.lin2": 1 - l01 + l10 - l11,
            "S23.lin3": 1 + 2 * l01 - l10 - 2 * l11,
            "S23.quad": 1 + 2 * l01 + l10 + 2 * l11 - 6 * l11**2,
            "S23.q1": 1 + 2 * l01 - l10 - 2 * l11 - 1.5 * (l01 - l11) ** 2,
            "S23.q2": 1 + 2 * l01 + l10 + 2 * l11 - 1.5 * (l01 - l11) ** 2 - 6 * l01 * l11,
            "S23.q3": 1 - l01 + l10 - l11 - (2.0 / 3.0) * (l10 - l11) ** 2,
            "S23.q4": 1 + 2 * l01 + l10 + 2 * l11 - (2.0 / 3.0) * (l10 - l11) ** 2 - 4 * l10 * l11 - 2 * l11**2,
            "S23.rng1.lo": (l01 + l10 - l11) + 5,
            "S23.rng1.hi": 1 - (l01 + l10 - l11),
            "S23.rng2.lo": (l01 - l10 + l11) + 5,
            "S23.rng2.hi": 1 - (l01 - l10 + l11),
            "S23.rng3.lo": (2 * l01 + l10 + 2 * l11) + 1,
            "S23.rng3.hi": 5 - (2 * l01 + l10 + 2 * l11),
            "S23.rng4.lo": (2 * l01 - l10 - 2 * l11) + 1,
            "S23.rng4.hi": 5 - (2 * l01 - l10 - 2 * l11),
        }
    return {}


def _generic_product_faces(p: ProductParams) -> dict:
    """Kadison-operator eigenvalues at the basis probes ``E_ij (x) F_kl``."""
    a, b, c, d = (complex(x).real for x in p.abcd)
    s = {
        "a>=0": a,
        "a+c>=0": a + c,
        "a+b>=0": a + b,
        "a+b+c+d(1-d)>=0": a + b + c + d * (1 - d),
        "a+b(1-b)>=0": a + b * (1 - b),
        "a+b(1-b)+c+d(1-2b-d)>=0": a + b * (1 - b) + c + d * (1 - 2 * b - d),
        "a+c(1-c)>=0": a + c * (1 - c),
        "a+b+c(1-c)+d(1-2c-d)>=0": a + b + c * (1 - c) + d * (1 - 2 * c - d),
    }
    for name, nu in (("a", a), ("a+c", a + c), ("a+b", a + b), ("a+b+c+d", a + b + c + d)):
        s[f"{name}<=1"] = 1 - nu
    return s


def schwarz_necessary_product(p: ProductParams) -> RegionVerdict:
    """Necessary Schwarz conditions for a unital Hermiticity-preserving product map.

    Evaluates the Kadison operator at the canonical probes ``E_ij (x) F_kl``
    in terms of ``a, b, c, d`` (see :attr:`ProductParams.abcd`).  For (2,2) and
    (2,3) the same faces are also listed in ``lam`` coordinates (scaled by
    ``n1 n2``) under ``S22.*`` / ``S23.*`` identifiers.
    """
    l00, l01, l10, l11 = _require_product(p)
    s = _generic_product_faces(p)
    s.update(_specialized_faces(p, l01, l10, l11))
    return _verdict(s, "necessary-only", "false certifies not Schwarz; true is inconclusive")


def _spectrum_verdict(spec, prefix: str, scale: float, method: str, note: str) -> RegionVerdict:
    s = {f"{prefix}[{k}]>=0": complex(v).real * scale for k, (v, _) in enumerate(spec)}
    return _verdict(s, method, note)


def cp_product_small(p: ProductParams, tol: Tolerance = DEFAULT_TOL, strict: bool = False) -> RegionVerdict:
    """CP verdict from the closed-form Choi spectrum; margin is ``n1 n2`` times the minimum.

    For factor dimensions outside ``{2, 3}`` the closed form is labelled
    conjectured; the verdict then comes from the numeric Choi matrix (or
    :class:`UnsupportedDimensions` is raised with ``strict=True``).
    """
    _require_product(p)
    N = p.n1 * p.n2
    if p.n1 > 3 or p.n2 > 3:
        if strict:
            raise UnsupportedDimensions(f"closed form stated for factors in {{2, 3}}, got ({p.n1}, {p.n2})")
        v = cp_numeric(choi_generic(p), tol)
        return RegionVerdict(
            v.member, v.margin * N, v.binding, "numeric", "conjectured-formula dimensions; numeric Choi PSD used"
        )
    return _spectrum_verdict(product_choi_eigs(p), "choi_family", N, "analytic", "")


def ppt_product(p: ProductParams) -> RegionVerdict:
    """``T o Phi`` CP for a product map, from the closed-form partial-transpose spectrum (times ``n1 n2``)."""
    _require_product(p)
    return _spectrum_verdict(product_pt_eigs(p), "pt_family", p.n1 * p.n2, "analytic", "")


def _choi_and_dims(C, dims):
    if isinstance(C, ChoiMatrix):
        return C.matrix, (C.dim_in, C.dim_out) if dims is None else tuple(dims)
    M = np.asarray(C, dtype=np.complex128)
    if dims is None:
        d = int(round(np.sqrt(M.shape[0])))
        dims = (d, d)
    return M, tuple(dims)


def ppt_numeric(C, dims=None, tol: Tolerance = DEFAULT_TOL) -> RegionVerdict:
    """Smallest eigenvalue of the partial transpose (output factor) of a Choi matrix."""
    M, dims = _choi_and_dims(C, dims)
    hermitian_eigenvalues(M, tol)  # raises NotHermitian
    lo = float(hermitian_eigenvalues(partial_transpose(M, dims, "second"), tol)[0])
    return RegionVerdict(lo >= -tol.eig_zero, lo, "min eig of partial transpose", "numeric")


def cp_numeric(C, tol: Tolerance = DEFAULT_TOL) -> RegionVerdict:
    """Smallest eigenvalue of a Choi matrix."""
    M, _ = _choi_and_dims(C, None)
    lo = float(hermitian_eigenvalues(M, tol)[0])
    return RegionVerdict(lo >= -tol.eig_zero, lo, "min eig of Choi matrix", "numeric")


def ppt_channel(p, tol: Tolerance = DEFAULT_TOL) -> RegionVerdict:
    """PPT channel: CP and ``T o Phi`` CP."""
    if isinstance(p, UnitaryParams):
        if not validate(p).unital:
            raise StructurallyInvalid("U-family predicates assume sigma = 1")
        return both(cp_u(p.n, p.lam), ppt_eb_u(p.n, p.lam), note="CP and T o Phi CP")
    if isinstance(p, DiagonalParams):
        return both(cp_du(p, tol), ppt_du(p), note="CP and T o Phi CP")
    if isinstance(p, ProductParams):
        _require_product(p)
        cp = _spectrum_verdict(product_choi_eigs(p), "choi_family", p.n1 * p.n2, "analytic", "")
        return both(cp, ppt_product(p), note="CP and T o Phi CP")
    raise UnsupportedFamily(f"no PPT test for {type(p).__name__}")


def product_eb_corners(n1: int, n2: int) -> np.ndarray:
    """``(lam01, lam10, lam11)`` of the four products of extremal EB isotropic channels.

    ``Phi_mu (x) Phi_nu`` with ``mu`` in ``{-1/(n1^2-1), 1/(n1+1)}`` and ``nu``
    in ``{-1/(n2^2-1), 1/(n2+1)}`` has ``(lam01, lam10, lam11) = (nu, mu, mu nu)``.
    """
    mus = (-1.0 / (n1 * n1 - 1), 1.0 / (n1 + 1))
    nus = (-1.0 / (n2 * n2 - 1), 1.0 / (n2 + 1))
    return np.array([[nu, mu, mu * nu] for mu in mus for nu in nus])


def _eb_product(p: ProductParams) -> RegionVerdict:
    _, l01, l10, l11 = _require_product(p)
    V = product_eb_corners(p.n1, p.n2)
    A = np.vstack([np.ones(4), V.T])
    w = np.linalg.solve(A, np.array([1.0, l01, l10, l11]))
    s = {f"weight[{k}]>=0": float(w[k]) for k in range(4)}
    return _verdict(
        s,
        "sufficient-only",
        "convex hull of tensor products of EB isotropic channels; false is inconclusive",
    )


def _eb_du(p: DiagonalParams) -> RegionVerdict:
    """Pairwise two-qubit split of the DU Choi matrix.

    The Choi matrix is a sum of diagonal terms and, for each pair ``i < j``,
    an X-shaped operator on ``span{e_i, e_j}^(x)2``.  Give the pair the
    diagonal weights ``x_i = c_ii |lam_ij| / S_i`` with ``S_i = sum_k |lam_ik|``;
    two-qubit X operators are separable iff PPT, which gives the conditions
    ``c >= 0``, ``c_ij c_ji >= |lam_ij|^2`` and ``c_ii c_jj >= S_i S_j``.
    """
    _require_structure(p, unital=False)
    n = p.n
    C = p.mixing.real
    A = np.abs(p.offdiag)
    S = A.sum(axis=1)
    s = {}
    for k in range(n):
        for j in range(n):
            s[f"c[{k},{j}]>=0"] = C[k, j]
    for i, j in combinations(range(n), 2):
        s[f"c[{i},{j}]c[{j},{i}]>=|lam[{i},{j}]|^2"] = C[i, j] * C[j, i] - A[i, j] ** 2
        if A[i, j] > 0:
            s[f"c[{i},{i}]c[{j},{j}]>=S[{i}]S[{j}]"] = C[i, i] * C[j, j] - S[i] * S[j]
    exact = n == 2
    return _verdict(
        s,
        "analytic" if exact else "sufficient-only",
        "exact for n = 2" if exact else "true certifies EB; false is inconclusive",
    )


def eb_sufficient(p) -> RegionVerdict:
    """EB test.

    * ``U``: exact, see :func:`eb_u` (``sigma`` must be 1).
    * ``DU``: sufficient certificate from the pairwise split (exact for n = 2).
    * ``PROD``: sufficient certificate, membership in the convex hull of
      :func:`product_eb_corners`.
    """
    if isinstance(p, UnitaryParams):
        if not validate(p).unital:
            raise StructurallyInvalid("U-family EB test assumes sigma = 1")
        return eb_u(p.n, p.lam)
    if isinstance(p, DiagonalParams):
        return _eb_du(p)
    if isinstance(p, ProductParams):
        return _eb_product(p)
    raise UnsupportedFamily(f"no EB test for {type(p).__name__}")


# ---------------------------------------------------------------- report


def _flag(v: RegionVerdict):
    """Boolean flag, or ``None`` when a one-sided test is inconclusive."""
    if v.method == "necessary-only" and v.member:
        return None
    if v.method == "sufficient-only" and not v.member:
        return None
    return v.member


def class_report(p, tol: Tolerance = DEFAULT_TOL) -> dict:
    """Structural flags plus every applicable region verdict for one channel.

    Returns a JSON-ready dict with ``flags`` (``None`` = undecided),
    ``margins``, ``binding`` and ``method`` keyed by test name.
    """
    from .channels import params_to_json

    flags = validate(p)
    out_flags = {"unital": flags.unital, "hermiticity_preserving": flags.hermiticity_preserving}
    verdicts: dict[str, RegionVerdict] = {}
    notes = list(flags.details)
    if isinstance(p, UnitaryParams):
        if flags.unital and flags.hermiticity_preserving:
            verdicts["schwarz"] = schwarz_u(p.n, p.lam)
            verdicts["cp"] = cp_u(p.n, p.lam)
            verdicts["co_cp"] = ppt_eb_u(p.n, p.lam)
            verdicts["ppt_eb"] = eb_u(p.n, p.lam)
        else:
            notes.append("region tests need sigma = 1 and real parameters")
    elif isinstance(p, DiagonalParams):
        if flags.hermiticity_preserving:
            if flags.unital:
                verdicts["schwarz"] = schwarz_necessary_du(p)
                sym = as_du3_symmetric(p)
                if sym is not None:
                    s, c = classify_du3_symmetric(*sym)
                    verdicts["du3s_schwarz_formula"] = s
                    verdicts["du3s_cp_formula"] = c
            verdicts["cp"] = cp_du(p, tol)
            verdicts["co_cp"] = ppt_du(p)
            verdicts["ppt"] = ppt_channel(p, tol)
            verdicts["eb"] = eb_sufficient(p)
        else:
            notes.append("region tests need a Hermiticity-preserving map")
    elif isinstance(p, ProductParams):
        if flags.unital and flags.hermiticity_preserving:
            verdicts["schwarz"] = schwarz_necessary_product(p)
            verdicts["cp"] = cp_product_small(p, tol)
            verdicts["co_cp"] = ppt_product(p)
            verdicts["ppt"] = ppt_channel(p, tol)
            verdicts["eb"] = eb_sufficient(p)
        else:
            notes.append("region tests need lam00 = 1 and real parameters")
    else:
        raise UnsupportedFamily(f"no report for {type(p).__name__}")
    for k, v in verdicts.items():
        out_flags[k] = _flag(v)
    return {
        "family": p.family,
        "params": params_to_json(p),
        "flags": out_flags,
        "margins": {k: v.margin for k, v in verdicts.items()},
        "binding": {k: v.binding for k, v in verdicts.items()},
        "method": {k: v.method for k, v in verdicts.items()},
        "notes": notes + [f"{k}: {v.note}" for k, v in verdicts.items() if v.note],
    }
