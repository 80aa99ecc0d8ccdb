"""Equivariant linear maps on matrix algebras: construction, composition and region tests."""

from .channels import (
    DiagonalParams,
    ProductParams,
    UnitaryParams,
    apply,
    decompose_product,
    twirl,
    validate,
)
from .choi import ChoiMatrix, choi_generic, choi_u_closed
from .classify import RegionVerdict
from .compose import compose, power, ppt2_check
from .linalg import DEFAULT_TOL, Tolerance
from .oracle import kadison_gap, schwarz_falsify

__version__ = "0.1.0"

__all__ = [
    "ChoiMatrix",
    "DEFAULT_TOL",
    "DiagonalParams",
    "ProductParams",
    "RegionVerdict",
    "Tolerance",
    "UnitaryParams",
    "apply",
    "choi_generic",
    "choi_u_closed",
    "compose",
    "decompose_product",
    "kadison_gap",
    "power",
    "ppt2_check",
    "schwarz_falsify",
    "twirl",
    "validate",
]
