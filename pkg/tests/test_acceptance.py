"""End-to-end acceptance checks.

Each test prints exactly one ``[PASS]``/``[FAIL]`` line with a short summary
and then asserts the outcome.
"""

import json
import os
import time
from pathlib import Path

import numpy as np
import pytest

from equichan.channels import DiagonalParams, ProductParams, UnitaryParams, apply, params_to_json, twirl
from equichan.choi import choi_generic, choi_u_closed, product_choi_eigs
from equichan.classify import (
    classify_du3_symmetric,
    cp_numeric,
    cp_product_small,
    eb_u,
    ppt_numeric,
    schwarz_necessary_product,
)
from equichan.compose import compose, power, ppt2_check, sample_ppt_points
from equichan.linalg import hermitian_eigenvalues
from equichan.oracle import Axis, ScanSpec, kadison_gap, region_scan, schwarz_falsify

BUDGET = 2000


@pytest.fixture
def report(capsys):
    def _report(name, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
        assert ok, detail

    return _report


def grid(lo, hi, step):
    return np.round(lo + step * np.arange(int(round((hi - lo) / step)) + 1), 12)


def flip_brackets(xs, member):
    return [(xs[k], xs[k + 1]) for k in range(len(xs) - 1) if member[k] != member[k + 1]]


def brackets_match(brackets, bounds, slack=1e-12):
    if len(brackets) != len(bounds):
        return False
    return all(a - slack <= b <= c + slack for (a, c), b in zip(brackets, sorted(bounds)))


def bisect_flip(pred, a, b, tol=1e-12):
    fa = pred(a)
    while b - a > tol:
        m = 0.5 * (a + b)
        if pred(m) == fa:
            a = m
        else:
            b = m
    return 0.5 * (a + b)


def unitary(rng, n):
    Q, R = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def random_unital_du(rng, n):
    C = rng.random((n, n)) + 0.05
    for _ in range(200):
        C /= C.sum(axis=1, keepdims=True)
        C /= C.sum(axis=0, keepdims=True)
    C /= C.sum(axis=1, keepdims=True)
    G = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    G = G @ G.conj().T
    d = np.sqrt(np.diag(G).real)
    s = np.sqrt(np.diag(C))
    return DiagonalParams(n, G / np.outer(d, d) * np.outer(s, s), C)


def random_params(rng, family):
    z = lambda: complex(*rng.normal(size=2))  # noqa: E731
    if family == "U":
        return UnitaryParams(3, z(), z())
    if family == "DU":
        return DiagonalParams(3, rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)), rng.normal(size=(3, 3)))
    return ProductParams(2, 3, z(), z(), z(), z())


# ---------------------------------------------------------------- U(n) intervals


def test_u_interval_reproduction(report):
    t0 = time.perf_counter()
    problems = []
    checked = 0
    for n in (2, 3, 4, 5):
        spec = ScanSpec(
            "U", (Axis("lambda", -1.2, 1.2, 0.005),), ("schwarz_u", "cp_u", "ppt_eb_u"), {"n": n}, oracle=True,
            budget=BUDGET,
        )
        rows = region_scan(spec)
        xs = [r["lambda"] for r in rows]
        expected = {
            "schwarz_u": [-1 / n, 1.0],
            "cp_u": [-1 / (n * n - 1), 1.0],
            "ppt_eb_u": [-1 / (n - 1), 1 / (n + 1)],
        }
        for name, bounds in expected.items():
            br = flip_brackets(xs, [r[f"{name}_member"] for r in rows])
            if not brackets_match(br, bounds):
                problems.append(f"n={n} {name} flips {br}")
        for r in rows:
            if abs(r["schwarz_u_margin"]) > 1e-6:
                checked += 1
                if r["oracle_agree"] != 1:
                    problems.append(f"n={n} oracle disagrees at lambda={r['lambda']}")
    elapsed = time.perf_counter() - t0
    if elapsed > 120:
        problems.append(f"runtime {elapsed:.1f}s > 120s")
    detail = f"{checked} oracle points, {elapsed:.1f}s" + (f"; {problems[:5]}" if problems else "")
    report("u_interval_reproduction", not problems, detail)


# ---------------------------------------------------------------- product Choi spectra


def test_product_choi_spectra(report):
    rng = np.random.default_rng(2)
    worst = 0.0
    for dims in ((2, 2), (2, 3), (3, 2), (3, 3)):
        for _ in range(1000):
            p = ProductParams(*dims, *rng.uniform(-1, 1, 4))
            closed = product_choi_eigs(p).expanded()
            numeric = hermitian_eigenvalues(choi_generic(p).matrix)
            worst = max(worst, float(np.max(np.abs(closed - numeric))))
    report("product_choi_spectra", worst <= 1e-10, f"max |delta| = {worst:.3e} over 4000 draws")


# ---------------------------------------------------------------- PPT vs EB for U(n)


def test_u_ppt_equals_eb(report):
    problems = []
    xs = grid(-1.2, 1.2, 0.005)
    for n in (2, 3, 4, 5):
        ppt = lambda x: ppt_numeric(choi_u_closed(UnitaryParams(n, 1.0, x))).member  # noqa: E731
        eb = lambda x: eb_u(n, x).member  # noqa: E731
        a = [ppt(x) for x in xs]
        b = [eb(x) for x in xs]
        bad = [x for x, u, v in zip(xs, a, b) if u != v]
        if bad:
            problems.append(f"n={n}: {len(bad)} grid points disagree in [{float(bad[0])}, {float(bad[-1])}]")
        # locate each flip from the sign of the raw margin, free of the membership tolerance
        ppt_sign = lambda x: ppt_numeric(choi_u_closed(UnitaryParams(n, 1.0, x))).margin >= 0  # noqa: E731
        eb_sign = lambda x: eb_u(n, x).margin >= 0  # noqa: E731
        targets = [-1 / (n - 1), 1 / (n + 1)]
        for name, pred, member in (("ppt_numeric", ppt_sign, a), ("eb_fidelity", eb_sign, b)):
            found = [float(bisect_flip(pred, lo, hi)) for lo, hi in flip_brackets(xs, member)]
            if len(found) != 2 or max(abs(f - t) for f, t in zip(found, targets)) > 1e-9:
                problems.append(f"n={n} {name} flips at {[round(f, 9) for f in found]}, expected {targets}")
    report("u_ppt_equals_eb", not problems, "; ".join(problems) or "all grid points agree")


# ---------------------------------------------------------------- symmetric DU(3) regions


def test_du3_symmetric_regions(report):
    ps, lams = grid(0.0, 1.0, 0.005), grid(0.0, 0.8, 0.005)
    assert (len(ps), len(lams)) == (201, 161)
    band = 1e-6
    compared = {"schwarz": 0, "cp": 0}
    wrong = {"schwarz": 0, "cp": 0}
    example = {}
    containment_bad, strict_missing = 0, []
    for p in ps:
        m = min(p, 1 - p)
        strict = False
        for lam in lams:
            sv, cv = classify_du3_symmetric(p, lam)
            q = DiagonalParams.du3_symmetric(p, lam)
            if abs(lam - np.sqrt(m / 2)) > band:
                compared["schwarz"] += 1
                witness = schwarz_falsify(q, budget=BUDGET) is not None
                if sv.member == witness:
                    wrong["schwarz"] += 1
                    example.setdefault("schwarz", (float(p), float(lam)))
            cp_true = cp_numeric(choi_generic(q)).member
            if abs(lam - m) > band:
                compared["cp"] += 1
                if cv.member != cp_true:
                    wrong["cp"] += 1
                    example.setdefault("cp", (float(p), float(lam)))
            if cv.member and not sv.member:
                containment_bad += 1
            strict |= sv.member and not cv.member
        if 0 < m < 0.5 and not strict:
            # the two boundaries can be closer than one grid step; try between them
            sv, cv = classify_du3_symmetric(p, 0.5 * (m + np.sqrt(m / 2)))
            if not (sv.member and not cv.member):
                strict_missing.append(float(p))
    ok = not any(wrong.values()) and not containment_bad and not strict_missing
    detail = (
        f"schwarz formula wrong at {wrong['schwarz']}/{compared['schwarz']}, "
        f"cp formula wrong at {wrong['cp']}/{compared['cp']}, first (p, lam) {example}; "
        f"containment violations {containment_bad}, columns without a strict point {len(strict_missing)}"
    )
    report("du3_symmetric_regions", ok, detail)


# ---------------------------------------------------------------- composition


def test_composition_laws(report):
    rng = np.random.default_rng(5)
    worst = 0.0
    for family in ("U", "DU", "PROD"):
        for _ in range(100):
            p, q = random_params(rng, family), random_params(rng, family)
            C = choi_generic(lambda X: apply(p, apply(q, X)), p.dim).matrix
            worst = max(worst, float(np.max(np.abs(choi_generic(compose(p, q)).matrix - C))))
    report("composition_laws", worst <= 1e-12, f"max |delta| = {worst:.3e} over 300 pairs")


# ---------------------------------------------------------------- PPT^2


def test_ppt_squared_suite(report, tmp_path):
    out_dir = Path(os.environ.get("EQUICHAN_ARTIFACTS", tmp_path))
    out_dir.mkdir(parents=True, exist_ok=True)
    counter = []
    seed = 2024
    for cls in ("DU2", "DU3S"):
        for p in sample_ppt_points(cls, 1000, seed=seed):
            r = ppt2_check(p)
            if r.conclusion != "holds":
                counter.append({"class": cls, "seed": seed, "report": r.to_json()})
    for cls in ("PROD22", "PROD23"):
        for p in sample_ppt_points(cls, 1000, seed=seed):
            q = power(p, 2)
            pt = ppt_numeric(choi_generic(q))
            faces = schwarz_necessary_product(q)
            if not (pt.member and faces.member):
                counter.append(
                    {
                        "class": cls,
                        "seed": seed,
                        "params": params_to_json(p),
                        "ppt_min_eig_phi_squared": pt.margin,
                        "faces_phi_squared": faces.to_json(),
                    }
                )
    path = out_dir / "ppt2_counterexamples.json"
    path.write_text(json.dumps(counter, indent=1))
    report("ppt_squared_suite", not counter, f"{len(counter)} counterexamples in 4000 samples, written to {path}")


# ---------------------------------------------------------------- twirl


def test_twirl_fixed_point(report):
    rng = np.random.default_rng(7)
    worst_par, worst_res = 0.0, 0.0
    for family, dims in (("U", 3), ("DU", 3), ("PROD", (2, 3))):
        for _ in range(100):
            p = random_params(rng, family)
            q, res = twirl(choi_generic(p), family, dims)
            if family == "U":
                d = max(abs(q.sigma - p.sigma), abs(q.lam - p.lam))
            elif family == "DU":
                d = max(np.max(np.abs(q.offdiag - p.offdiag)), np.max(np.abs(q.mixing - p.mixing)))
            else:
                d = max(abs(a - b) for a, b in zip(q.lams, p.lams))
            worst_par, worst_res = max(worst_par, float(d)), max(worst_res, float(res))
    _, res_t = twirl(choi_generic(lambda X: X.T, 3), "DU", 3)
    ok = worst_par <= 1e-12 and worst_res <= 1e-12 and res_t > 0.1
    detail = f"max param error {worst_par:.3e}, max residual {worst_res:.3e}, transpose residual {res_t:.3f}"
    report("twirl_fixed_point", ok, detail)


# ---------------------------------------------------------------- Kadison for normal operators


def cp_channels(rng, family, count):
    out = []
    while len(out) < count:
        if family == "U":
            n = int(rng.integers(2, 6))
            out.append(UnitaryParams(n, 1.0, float(rng.uniform(-1 / (n * n - 1), 1))))
        elif family == "DU":
            out.append(random_unital_du(rng, int(rng.integers(2, 5))))
        else:
            p = ProductParams(2, int(rng.integers(2, 4)), 1.0, *rng.uniform(-1, 1, 3))
            if cp_product_small(p).member:
                out.append(p)
    return out


def test_kadison_normal_operators(report):
    rng = np.random.default_rng(8)
    worst = np.inf
    for family in ("U", "DU", "PROD"):
        for p in cp_channels(rng, family, 50):
            n = p.dim
            for _ in range(500):
                U = unitary(rng, n)
                X = (U * (rng.normal(size=n) + 1j * rng.normal(size=n))) @ U.conj().T
                worst = min(worst, kadison_gap(p, X))
    report("kadison_normal_operators", worst >= -1e-9, f"min gap {worst:.3e} over 75000 pairs")
