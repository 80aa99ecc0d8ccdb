"""Numerical falsifiers and parameter-grid scans.

The Schwarz falsifier evaluates the Kadison operator
``M(X) = Phi(X^dag X) - Phi(X)^dag Phi(X)`` on structured sparse probes
first, then on random complex Gaussian matrices normalized to unit Frobenius
norm.  A probe with smallest eigenvalue ``< -tol.eig_zero`` certifies that the
map is not Schwarz.  Finding nothing certifies nothing.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from . import _accel
from .channels import DiagonalParams, ProductParams, UnitaryParams, apply, channel_dim, superoperator
from .choi import ChoiMatrix, choi_generic
from .classify import (
    RegionVerdict,
    classify_du2,
    classify_du3_symmetric,
    cp_du,
    cp_numeric,
    cp_product_small,
    cp_u,
    eb_sufficient,
    eb_u,
    ppt_du,
    ppt_eb_u,
    ppt_numeric,
    ppt_product,
    schwarz_necessary_du,
    schwarz_necessary_product,
    schwarz_u,
)
from .errors import DimensionMismatch, EquichanError, NotHermitianIntermediate, SpecInvalid
from .linalg import DEFAULT_TOL, Tolerance, hermitian_eigenvalues, hermiticity_residual, matrix_to_json

__all__ = [
    "Witness",
    "kadison_operator",
    "kadison_gap",
    "structured_probes",
    "random_probes",
    "schwarz_falsify",
    "block_positivity_falsify",
    "Axis",
    "ScanSpec",
    "PREDICATES",
    "region_scan",
    "scan_header",
    "rows_to_csv",
    "scan_spec_from_json",
    "params_at",
]

RANDOM_CHUNK = 256


@dataclass(frozen=True, eq=False)
class Witness:
    """Probe matrix and the smallest eigenvalue of its Kadison operator."""

    X: np.ndarray
    gap: float
    source: str = "structured"

    def to_json(self) -> dict:
        return {"X": matrix_to_json(self.X), "gap": self.gap, "source": self.source}


def kadison_operator(channel, X) -> np.ndarray:
    """``Phi(X^dag X) - Phi(X)^dag Phi(X)``."""
    A = np.asarray(X, dtype=np.complex128)
    PX = apply(channel, A)
    return apply(channel, A.conj().T @ A) - PX.conj().T @ PX


def kadison_gap(channel, X, tol: Tolerance = DEFAULT_TOL) -> float:
    """Smallest eigenvalue of the Kadison operator at ``X``.

    Raises
    ------
    DimensionMismatch
        If ``X`` does not match the channel.
    NotHermitianIntermediate
        If the Kadison operator is not Hermitian within ``tol.herm_sym``.
    """
    A = np.asarray(X, dtype=np.complex128)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"probe must be square, got {A.shape}")
    if isinstance(channel, (UnitaryParams, DiagonalParams, ProductParams)) and A.shape[0] != channel.dim:
        raise DimensionMismatch(f"probe is {A.shape[0]}x{A.shape[0]}, channel acts on {channel.dim}")
    M = kadison_operator(channel, A)
    res = hermiticity_residual(M)
    if res > tol.herm_sym:
        raise NotHermitianIntermediate(f"Kadison operator is not Hermitian (residual {res:.3e})")
    return float(hermitian_eigenvalues(M, tol)[0])


_PHASES = (1.0, -1.0, 1j, -1j)


def structured_probes(n: int) -> np.ndarray:
    """Sparse probes: ``E_ij``, ``E_ij + c E_ik`` (row pairs), ``E_ij + c E_kj`` (column pairs).

    ``c`` runs over ``{1, -1, i, -i}``; diagonal pairs ``E_ii + c E_jj`` are
    included as well.
    """
    probes = []
    for i in range(n):
        for j in range(n):
            E = np.zeros((n, n), dtype=np.complex128)
            E[i, j] = 1.0
            probes.append(E)
    for c in _PHASES:
        for i in range(n):
            for j, k in combinations(range(n), 2):
                R = np.zeros((n, n), dtype=np.complex128)
                R[i, j], R[i, k] = 1.0, c
                probes.append(R)
                Cm = np.zeros((n, n), dtype=np.complex128)
                Cm[j, i], Cm[k, i] = 1.0, c
                probes.append(Cm)
        for i, j in combinations(range(n), 2):
            D = np.zeros((n, n), dtype=np.complex128)
            D[i, i], D[j, j] = 1.0, c
            probes.append(D)
    out = np.stack(probes)
    return out / np.linalg.norm(out, axis=(1, 2))[:, None, None]


def random_probes(n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """Complex Gaussian matrices with unit Frobenius norm."""
    G = rng.standard_normal((count, n, n)) + 1j * rng.standard_normal((count, n, n))
    return G / np.linalg.norm(G, axis=(1, 2))[:, None, None]


def _gaps(S: np.ndarray, Xs: np.ndarray, tol: Tolerance) -> np.ndarray:
    gaps, res = _accel.kadison_batch(S, Xs)
    bad = res > tol.herm_sym
    if np.any(bad):
        raise NotHermitianIntermediate(
            f"Kadison operator is not Hermitian (residual {float(res.max()):.3e}); "
            "the channel does not preserve Hermiticity"
        )
    return gaps


def _refine(S: np.ndarray, X0: np.ndarray, tol: Tolerance):
    from scipy.optimize import minimize

    n = X0.shape[0]

    def f(v):
        X = (v[: n * n] + 1j * v[n * n :]).reshape(1, n, n)
        X = X / max(np.linalg.norm(X), 1e-300)
        return float(_accel.kadison_batch_numpy(S, X)[0][0])

    v0 = np.concatenate([X0.real.ravel(), X0.imag.ravel()])
    r = minimize(f, v0, method="BFGS", options={"maxiter": 200, "gtol": 1e-10})
    X = (r.x[: n * n] + 1j * r.x[n * n :]).reshape(n, n)
    return X / np.linalg.norm(X), float(r.fun)


def schwarz_falsify(
    channel,
    budget: int = 2000,
    seed: int = 0,
    tol: Tolerance = DEFAULT_TOL,
    n: int | None = None,
    refine: int = 0,
) -> Witness | None:
    """Search for ``X`` with a negative Kadison gap.

    Parameters
    ----------
    channel : family params or callable
        Should be unital and Hermiticity preserving.
    budget : int
        Number of random probes after the structured ones.
    seed : int
        Seed of the random probes; the result is deterministic given it.
    refine : int
        If positive and nothing was found, run local descent from the
        ``refine`` lowest random probes.
    n : int, optional
        Dimension, required for callables.

    Returns
    -------
    Witness or None
        The first probe (structured before random) with gap ``< -tol.eig_zero``.
    """
    n = channel_dim(channel, n)
    S = superoperator(channel, n)
    thr = -tol.eig_zero
    Xs = structured_probes(n)
    g = _gaps(S, Xs, tol)
    hit = np.flatnonzero(g < thr)
    if hit.size:
        k = int(hit[0])
        return Witness(Xs[k], float(g[k]), "structured")
    rng = np.random.default_rng(seed)
    best = []
    done = 0
    while done < budget:
        m = min(RANDOM_CHUNK, budget - done)
        Xs = random_probes(n, m, rng)
        g = _gaps(S, Xs, tol)
        hit = np.flatnonzero(g < thr)
        if hit.size:
            k = int(hit[0])
            return Witness(Xs[k], float(g[k]), "random")
        if refine:
            order = np.argsort(g)[:refine]
            best.extend((float(g[k]), Xs[k]) for k in order)
            best = sorted(best, key=lambda t: t[0])[:refine]
        done += m
    for _, X0 in best:
        X, gap = _refine(S, X0, tol)
        if gap < thr:
            return Witness(X, gap, "refined")
    return None


def block_positivity_falsify(C, dims=None, budget: int = 2000, seed: int = 0, tol: Tolerance = DEFAULT_TOL):
    """Sample ``<v (x) w, C v (x) w>`` over unit product vectors.

    Returns
    -------
    tuple or None
        ``(v, w, value)`` for the most negative sample if it is below
        ``-tol.eig_zero``, otherwise ``None``.  ``None`` does not prove block
        positivity.
    """
    if isinstance(C, ChoiMatrix):
        M = C.matrix
        dims = C.dims if dims is None else dims
    else:
        M = np.asarray(C, dtype=np.complex128)
        if dims is None:
            d = int(round(math.sqrt(M.shape[0])))
            dims = (d, d)
    d1, d2 = (int(d) for d in dims)
    if M.shape != (d1 * d2, d1 * d2):
        raise DimensionMismatch(f"dims {dims} do not match a {M.shape} matrix")
    hermitian_eigenvalues(M, tol)  # NotHermitian check
    rng = np.random.default_rng(seed)
    V = np.repeat(np.eye(d1, dtype=np.complex128), d2, axis=0)
    W = np.tile(np.eye(d2, dtype=np.complex128), (d1, 1))
    Vr = rng.standard_normal((budget, d1)) + 1j * rng.standard_normal((budget, d1))
    Wr = rng.standard_normal((budget, d2)) + 1j * rng.standard_normal((budget, d2))
    V = np.vstack([V, Vr / np.linalg.norm(Vr, axis=1)[:, None]])
    W = np.vstack([W, Wr / np.linalg.norm(Wr, axis=1)[:, None]])
    vals = _accel.product_values(M, V, W)
    k = int(np.argmin(vals))
    if vals[k] < -tol.eig_zero:
        return V[k], W[k], float(vals[k])
    return None


# ---------------------------------------------------------------- scans


@dataclass(frozen=True)
class Axis:
    name: str
    lo: float
    hi: float
    step: float

    def values(self) -> np.ndarray:
        if not (self.step > 0):
            raise SpecInvalid(f"axis {self.name}: step must be positive")
        if self.hi < self.lo:
            raise SpecInvalid(f"axis {self.name}: hi < lo")
        count = int(math.floor((self.hi - self.lo) / self.step + 1e-9)) + 1
        return np.round(self.lo + self.step * np.arange(count), 12)


@dataclass(frozen=True)
class ScanSpec:
    """Grid scan description.

    ``family`` is one of ``U``, ``DU2``, ``DU3S``, ``PROD``; ``fixed`` holds
    the non-swept parameters (``n`` for ``U``; ``n1``, ``n2`` for ``PROD``;
    defaults for any unswept coordinate).
    """

    family: str
    axes: tuple
    predicates: tuple
    fixed: dict = field(default_factory=dict)
    oracle: bool = False
    budget: int = 2000
    seed: int = 0
    workers: int = 1
    refine: int = 0


def _u_preds():
    return {
        "schwarz_u": lambda p: schwarz_u(p.n, p.lam),
        "cp_u": lambda p: cp_u(p.n, p.lam),
        "ppt_eb_u": lambda p: ppt_eb_u(p.n, p.lam),
        "eb_u": lambda p: eb_u(p.n, p.lam),
        "cp_numeric": lambda p: cp_numeric(choi_generic(p)),
        "ppt_numeric": lambda p: ppt_numeric(choi_generic(p)),
    }


def _du_common():
    return {
        "schwarz_necessary_du": schwarz_necessary_du,
        "cp_du": cp_du,
        "ppt_du": ppt_du,
        "eb_sufficient": eb_sufficient,
        "cp_numeric": lambda p: cp_numeric(choi_generic(p)),
        "ppt_numeric": lambda p: ppt_numeric(choi_generic(p)),
    }


def _du2_preds():
    d = _du_common()
    d["du2_schwarz"] = lambda p: classify_du2(p.mixing[0, 1].real, p.mixing[1, 0].real, p.offdiag[0, 1])[0]
    d["du2_cp"] = lambda p: classify_du2(p.mixing[0, 1].real, p.mixing[1, 0].real, p.offdiag[0, 1])[1]
    return d


def _du3s_preds():
    d = _du_common()
    d["du3s_schwarz"] = lambda p: classify_du3_symmetric(p.mixing[0, 0].real, p.offdiag[0, 1])[0]
    d["du3s_cp"] = lambda p: classify_du3_symmetric(p.mixing[0, 0].real, p.offdiag[0, 1])[1]
    return d


def _prod_preds():
    return {
        "schwarz_necessary_product": schwarz_necessary_product,
        "cp_product_small": cp_product_small,
        "ppt_product": ppt_product,
        "eb_sufficient": eb_sufficient,
        "cp_numeric": lambda p: cp_numeric(choi_generic(p)),
        "ppt_numeric": lambda p: ppt_numeric(choi_generic(p)),
    }


PREDICATES = {"U": _u_preds(), "DU2": _du2_preds(), "DU3S": _du3s_preds(), "PROD": _prod_preds()}

_AXES = {
    "U": ("lambda", "lambda_im", "sigma"),
    "DU2": ("c12", "c21", "lambda", "lambda_im"),
    "DU3S": ("p", "lambda", "lambda_im"),
    "PROD": ("l01", "l10", "l11"),
}


def params_at(family: str, values: dict, fixed: dict):
    """Family parameters at one grid point (swept values override fixed ones)."""
    v = dict(fixed)
    v.update(values)
    lam = complex(v.get("lambda", 0.0), v.get("lambda_im", 0.0))
    if family == "U":
        return UnitaryParams(int(v.get("n", 2)), v.get("sigma", 1.0), lam)
    if family == "DU2":
        return DiagonalParams.du2(v.get("c12", 0.0), v.get("c21", 0.0), lam)
    if family == "DU3S":
        return DiagonalParams.du3_symmetric(v.get("p", 1.0), lam)
    if family == "PROD":
        return ProductParams(
            int(v.get("n1", 2)), int(v.get("n2", 2)), 1.0, v.get("l01", 0.0), v.get("l10", 0.0), v.get("l11", 0.0)
        )
    raise SpecInvalid(f"unknown scan family {family!r}")


def _check_spec(spec: ScanSpec) -> None:
    if spec.family not in PREDICATES:
        raise SpecInvalid(f"family must be one of {sorted(PREDICATES)}, got {spec.family!r}")
    if not spec.axes or len(spec.axes) > 3:
        raise SpecInvalid("a scan needs between 1 and 3 axes")
    names = [a.name for a in spec.axes]
    if len(set(names)) != len(names):
        raise SpecInvalid("axis names must be distinct")
    for a in spec.axes:
        if a.name not in _AXES[spec.family]:
            raise SpecInvalid(f"axis {a.name!r} is not a coordinate of {spec.family}; use {_AXES[spec.family]}")
        a.values()
    for name in spec.predicates:
        if name not in PREDICATES[spec.family]:
            raise SpecInvalid(f"unknown predicate {name!r} for {spec.family}")
    if not isinstance(spec.seed, int) or spec.seed < 0 or spec.seed >= 2**64:
        raise SpecInvalid("seed must be an integer in [0, 2^64)")
    if spec.budget < 0 or spec.workers < 1:
        raise SpecInvalid("budget must be >= 0 and workers >= 1")


def _grid(spec: ScanSpec) -> list[dict]:
    grids = [a.values() for a in spec.axes]
    mesh = np.meshgrid(*grids, indexing="ij")
    flat = [m.ravel() for m in mesh]
    return [{a.name: float(f[k]) for a, f in zip(spec.axes, flat)} for k in range(flat[0].size)]


def _reference_schwarz(spec: ScanSpec):
    for name in spec.predicates:
        if "schwarz" in name:
            return name
    return None


def _evaluate(spec: ScanSpec, index: int, point: dict) -> dict:
    p = params_at(spec.family, point, spec.fixed)
    row = dict(point)
    preds = PREDICATES[spec.family]
    verdicts = {}
    for name in spec.predicates:
        v = preds[name](p)
        verdicts[name] = v
        row[f"{name}_member"] = int(v.member)
        row[f"{name}_margin"] = v.margin
    if spec.oracle:
        seed = int(np.random.SeedSequence([spec.seed, index]).generate_state(1, np.uint64)[0])
        w = schwarz_falsify(p, budget=spec.budget, seed=seed, refine=spec.refine)
        row["oracle_witness"] = int(w is not None)
        row["oracle_gap"] = w.gap if w is not None else ""
        ref = _reference_schwarz(spec)
        if ref is not None:
            row["oracle_agree"] = int((w is not None) == (not verdicts[ref].member))
        else:
            row["oracle_agree"] = ""
    return row


def scan_header(spec: ScanSpec) -> list[str]:
    cols = [a.name for a in spec.axes]
    for name in spec.predicates:
        cols += [f"{name}_member", f"{name}_margin"]
    if spec.oracle:
        cols += ["oracle_witness", "oracle_gap", "oracle_agree"]
    return cols


def region_scan(spec: ScanSpec) -> list[dict]:
    """Evaluate the predicates (and optionally the oracle) on every grid point.

    Rows come back in grid order (first axis slowest) regardless of
    ``spec.workers``; the oracle seed of each point derives from
    ``(spec.seed, point index)``.
    """
    _check_spec(spec)
    points = _grid(spec)
    if spec.workers > 1:
        with ThreadPoolExecutor(max_workers=spec.workers) as ex:
            return list(ex.map(lambda t: _evaluate(spec, *t), enumerate(points)))
    return [_evaluate(spec, k, pt) for k, pt in enumerate(points)]


def _fmt(x) -> str:
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def rows_to_csv(rows: list[dict], header: list[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(r.get(c, "")) for c in header])
    return buf.getvalue()


def scan_spec_from_json(obj) -> ScanSpec:
    """Build a :class:`ScanSpec` from its JSON form.

    Example::

        {"family": "U", "fixed": {"n": 2},
         "axes": [{"name": "lambda", "lo": -1.2, "hi": 1.2, "step": 0.1}],
         "predicates": ["schwarz_u", "cp_u", "ppt_eb_u"],
         "oracle": false, "budget": 2000, "seed": 0}
    """
    if not isinstance(obj, dict):
        raise SpecInvalid("scan spec must be a JSON object")
    try:
        axes = tuple(
            Axis(str(a["name"]), float(a["lo"]), float(a["hi"]), float(a["step"])) for a in obj["axes"]
        )
        spec = ScanSpec(
            family=str(obj["family"]).upper(),
            axes=axes,
            predicates=tuple(obj.get("predicates", ())),
            fixed=dict(obj.get("fixed", {})),
            oracle=bool(obj.get("oracle", False)),
            budget=int(obj.get("budget", 2000)),
            seed=int(obj.get("seed", 0)),
            workers=int(obj.get("workers", 1)),
            refine=int(obj.get("refine", 0)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SpecInvalid(f"malformed scan spec: {exc!r}") from None
    _check_spec(spec)
    return spec
