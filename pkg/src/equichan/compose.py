"""Composition, powers and the PPT-squared pipeline.

``compose(p, q)`` is the map ``X -> p(q(X))``.  Within each family the
parameters compose as follows:

* ``U``: ``sigma`` and ``lam`` multiply;
* ``DU``: off-diagonal tables multiply entrywise, mixing matrices multiply as
  ``C_p @ C_q``;
* ``PROD``: each ``lam_ab`` multiplies.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import DiagonalParams, ProductParams, UnitaryParams, params_to_json, same_family
from .classify import (
    RegionVerdict,
    as_du2,
    as_du3_symmetric,
    eb_sufficient,
    ppt_channel,
    ppt_numeric,
    schwarz_necessary_product,
)
from .choi import choi_generic
from .errors import EquichanError, FamilyMismatch, UnsupportedFamily
from .linalg import DEFAULT_TOL, Tolerance

__all__ = [
    "compose",
    "power",
    "Ppt2Report",
    "ppt2_check",
    "sample_ppt_points",
    "PPT2_FAMILIES",
]

PPT2_FAMILIES = ("U", "DU2", "DU3S", "PROD22", "PROD23")


def compose(p, q):
    """Parameters of ``p o q`` (apply ``q`` first)."""
    same_family(p, q)
    if isinstance(p, UnitaryParams):
        return UnitaryParams(p.n, p.sigma * q.sigma, p.lam * q.lam)
    if isinstance(p, DiagonalParams):
        return DiagonalParams(p.n, p.offdiag * q.offdiag, p.mixing @ q.mixing)
    if isinstance(p, ProductParams):
        lams = [a * b for a, b in zip(p.lams, q.lams)]
        return ProductParams(p.n1, p.n2, *lams)
    raise FamilyMismatch(f"cannot compose {type(p).__name__}")


def power(p, k: int):
    """``p`` composed with itself ``k`` times (``k >= 1``)."""
    if isinstance(k, bool) or int(k) != k or k < 1:
        raise EquichanError(f"power needs an integer k >= 1, got {k!r}")
    k = int(k)
    if isinstance(p, UnitaryParams):
        return UnitaryParams(p.n, p.sigma**k, p.lam**k)
    if isinstance(p, DiagonalParams):
        return DiagonalParams(p.n, p.offdiag**k, np.linalg.matrix_power(p.mixing, k))
    if isinstance(p, ProductParams):
        return ProductParams(p.n1, p.n2, *(x**k for x in p.lams))
    raise FamilyMismatch(f"cannot take powers of {type(p).__name__}")


@dataclass(frozen=True)
class Ppt2Report:
    """Outcome of checking that the square of a PPT channel is EB.

    ``conclusion`` is ``"holds"`` when the input is a PPT channel and an EB
    certificate fires on its square, ``"inconclusive"`` when the input is PPT
    but no certificate fires, and ``"not_ppt"`` when the premise fails.
    """

    input_params: object
    ppt_of_phi: RegionVerdict
    params_of_phi_squared: object
    eb_sufficient_of_phi_squared: RegionVerdict
    conclusion: str
    evidence: dict

    def to_json(self) -> dict:
        return {
            "input_params": params_to_json(self.input_params),
            "ppt_of_phi": self.ppt_of_phi.to_json(),
            "params_of_phi_squared": params_to_json(self.params_of_phi_squared),
            "eb_sufficient_of_phi_squared": self.eb_sufficient_of_phi_squared.to_json(),
            "conclusion": self.conclusion,
            "evidence": self.evidence,
        }


def _ppt2_class(p) -> str:
    if isinstance(p, UnitaryParams):
        return "U"
    if isinstance(p, DiagonalParams):
        if as_du2(p) is not None:
            return "DU2"
        if as_du3_symmetric(p) is not None:
            return "DU3S"
        raise UnsupportedFamily("DU maps are supported for n = 2 and the symmetric n = 3 form only")
    if isinstance(p, ProductParams):
        if (p.n1, p.n2) in ((2, 2), (2, 3)):
            return f"PROD{p.n1}{p.n2}"
        raise UnsupportedFamily(f"product maps are supported for (2,2) and (2,3), got ({p.n1},{p.n2})")
    raise UnsupportedFamily(f"unsupported parameters {type(p).__name__}")


def ppt2_check(p, tol: Tolerance = DEFAULT_TOL) -> Ppt2Report:
    """Decide whether ``p`` is a PPT channel and certify that ``p o p`` is EB.

    PPT here means CP with ``T o Phi`` CP.  The EB test on the square is exact
    for ``U`` and ``DU(2)``, and a sufficient certificate for symmetric
    ``DU(3)`` and the product family.  Product inputs additionally carry
    numeric evidence: the partial-transpose minimum of the squared Choi
    matrix and the necessary Schwarz faces of the square.
    """
    cls = _ppt2_class(p)
    ppt = ppt_channel(p, tol)
    sq = power(p, 2)
    eb = eb_sufficient(sq)
    evidence = {"class": cls}
    if cls.startswith("PROD"):
        evidence["ppt_numeric_phi"] = ppt_numeric(choi_generic(p), tol=tol).margin
        evidence["ppt_numeric_phi_squared"] = ppt_numeric(choi_generic(sq), tol=tol).margin
        faces = schwarz_necessary_product(sq)
        evidence["schwarz_faces_phi_squared"] = {"member": faces.member, "margin": faces.margin, "binding": faces.binding}
    if not ppt.member:
        conclusion = "not_ppt"
    elif eb.member:
        conclusion = "holds"
    else:
        conclusion = "inconclusive"
    return Ppt2Report(p, ppt, sq, eb, conclusion, evidence)


# ---------------------------------------------------------------- sampling


def _draw(cls: str, rng: np.random.Generator, n: int = 1):
    if cls == "U":
        return UnitaryParams(n, 1.0, float(rng.uniform(-1.0, 1.0)))
    if cls == "DU2":
        c12, c21 = rng.uniform(0.0, 1.0, 2)
        r, t = np.sqrt(rng.uniform()), rng.uniform(0, 2 * np.pi)
        return DiagonalParams.du2(float(c12), float(c21), complex(r * np.exp(1j * t)))
    if cls == "DU3S":
        pv = float(rng.uniform(0.0, 1.0))
        r, t = np.sqrt(rng.uniform()), rng.uniform(0, 2 * np.pi)
        return DiagonalParams.du3_symmetric(pv, complex(r * np.exp(1j * t)))
    if cls in ("PROD22", "PROD23"):
        n2 = 2 if cls == "PROD22" else 3
        l01, l10, l11 = rng.uniform(-1.0, 1.0, 3)
        return ProductParams(2, n2, 1.0, float(l01), float(l10), float(l11))
    raise UnsupportedFamily(f"unknown sampling class {cls!r}")


def sample_ppt_points(cls: str, count: int, seed: int, n: int = 2, max_tries: int = 10_000_000) -> list:
    """Rejection-sample PPT channels uniformly from a bounding box.

    Parameters
    ----------
    cls : {"U", "DU2", "DU3S", "PROD22", "PROD23"}
        ``DU2`` draws ``(c12, c21)`` from the unit square and ``lam`` from the
        unit disk; ``DU3S`` draws ``p`` from ``[0, 1]`` and ``lam`` from the
        unit disk; product classes draw ``(lam01, lam10, lam11)`` from
        ``[-1, 1]^3``; ``U`` draws ``lam`` from ``[-1, 1]``.
    count : int
    seed : int
    n : int
        Dimension for ``U``.

    Returns
    -------
    list of family params, each a PPT channel.
    """
    rng = np.random.default_rng(seed)
    out = []
    tries = 0
    while len(out) < count:
        tries += 1
        if tries > max_tries:
            raise RuntimeError("rejection sampler exceeded its budget")
        p = _draw(cls, rng, n)
        if ppt_channel(p).member:
            out.append(p)
    return out
