"""Batched inner loops with a numba path and a pure-numpy fallback.

The numba kernels are used when numba imports and the environment variable
``EQUICHAN_DISABLE_NUMBA`` is unset (or set to a false-ish value).  Both
implementations are always importable under explicit names so tests and the
benchmark can compare them directly.

Channels enter as a superoperator ``S`` acting on row-major vectorized
matrices: ``vec(Phi(X)) = S @ vec(X)``.
"""

from __future__ import annotations

import os

import numpy as np

DISABLE_ENV = "EQUICHAN_DISABLE_NUMBA"

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False


def _flag_disabled(value: str | None) -> bool:
    return (value or "").strip().lower() in {"1", "true", "yes", "on"}


USE_NUMBA = HAVE_NUMBA and not _flag_disabled(os.environ.get(DISABLE_ENV))
KADISON_NUMBA_MAX_N = 3


def kadison_batch_numpy(S: np.ndarray, Xs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Smallest eigenvalue of ``Phi(X^dag X) - Phi(X)^dag Phi(X)`` per batch entry.

    Parameters
    ----------
    S : (n*n, n*n) complex ndarray
        Superoperator of the channel.
    Xs : (B, n, n) complex ndarray
        Probe matrices.

    Returns
    -------
    gaps : (B,) float ndarray
        Minimum eigenvalue of the Hermitian part of each Kadison operator.
    residuals : (B,) float ndarray
        ``max |M - M^dag|`` per entry, used to flag non-Hermitian intermediates.
    """
    B, n, _ = Xs.shape
    St = S.T
    Xh = Xs.conj().transpose(0, 2, 1)
    PY = ((Xh @ Xs).reshape(B, n * n) @ St).reshape(B, n, n)
    PX = (Xs.reshape(B, n * n) @ St).reshape(B, n, n)
    M = PY - PX.conj().transpose(0, 2, 1) @ PX
    Mh = M.conj().transpose(0, 2, 1)
    residuals = np.abs(M - Mh).reshape(B, -1).max(axis=1)
    gaps = np.linalg.eigvalsh(0.5 * (M + Mh))[:, 0]
    return gaps, residuals


def product_values_numpy(C: np.ndarray, V: np.ndarray, W: np.ndarray) -> np.ndarray:
    """Real parts of ``<v (x) w, C v (x) w>`` for each row pair of ``V`` and ``W``."""
    B = V.shape[0]
    Z = (V[:, :, None] * W[:, None, :]).reshape(B, -1)
    return np.einsum("bi,ij,bj->b", Z.conj(), C, Z).real


if HAVE_NUMBA:

    @numba.njit(cache=True, nogil=True)
    def _kadison_operators(S, Xs):  # pragma: no cover - compiled
        B, n, _ = Xs.shape
        N = n * n
        H = np.empty((B, n, n), dtype=np.complex128)
        residuals = np.empty(B)
        y = np.empty(N, dtype=np.complex128)
        py = np.empty(N, dtype=np.complex128)
        px = np.empty(N, dtype=np.complex128)
        M = np.empty((n, n), dtype=np.complex128)
        for b in range(B):
            for i in range(n):
                for j in range(n):
                    acc = 0j
                    for k in range(n):
                        acc += np.conj(Xs[b, k, i]) * Xs[b, k, j]
                    y[i * n + j] = acc
            for r in range(N):
                s1 = 0j
                s2 = 0j
                for c in range(N):
                    s1 += S[r, c] * y[c]
                    s2 += S[r, c] * Xs[b, c // n, c % n]
                py[r] = s1
                px[r] = s2
            for i in range(n):
                for j in range(n):
                    acc = 0j
                    for k in range(n):
                        acc += np.conj(px[k * n + i]) * px[k * n + j]
                    M[i, j] = py[i * n + j] - acc
            res = 0.0
            for i in range(n):
                for j in range(n):
                    d = abs(M[i, j] - np.conj(M[j, i]))
                    if d > res:
                        res = d
                    H[b, i, j] = 0.5 * (M[i, j] + np.conj(M[j, i]))
            residuals[b] = res
        return H, residuals

    def kadison_batch_numba(S, Xs):
        """Kadison operators assembled in numba; one batched LAPACK call for the spectra."""
        H, residuals = _kadison_operators(S, Xs)
        return np.linalg.eigvalsh(H)[:, 0], residuals

    @numba.njit(cache=True, nogil=True)
    def product_values_numba(C, V, W):  # pragma: no cover - compiled
        B, d1 = V.shape
        d2 = W.shape[1]
        out = np.empty(B)
        z = np.empty(d1 * d2, dtype=np.complex128)
        for b in range(B):
            for i in range(d1):
                for k in range(d2):
                    z[i * d2 + k] = V[b, i] * W[b, k]
            acc = 0.0
            for r in range(d1 * d2):
                s = 0.0 + 0.0j
                for c in range(d1 * d2):
                    s += C[r, c] * z[c]
                acc += (np.conj(z[r]) * s).real
            out[b] = acc
        return out

else:  # pragma: no cover
    kadison_batch_numba = None
    product_values_numba = None


def kadison_batch(S, Xs, use_numba: bool | None = None):
    """Dispatch to the numba or numpy Kadison kernel.

    Both paths spend most of their time in the batched eigensolver.  The numba
    assembly only pays off for small probes, so the default picks it for
    ``n <= KADISON_NUMBA_MAX_N`` (see ``benchmarks/bench_kernels.py``).
    """
    S = np.ascontiguousarray(S, dtype=np.complex128)
    Xs = np.ascontiguousarray(Xs, dtype=np.complex128)
    if use_numba is None:
        use_numba = USE_NUMBA and Xs.shape[-1] <= KADISON_NUMBA_MAX_N
    if use_numba and HAVE_NUMBA:
        return kadison_batch_numba(S, Xs)
    return kadison_batch_numpy(S, Xs)


def product_values(C, V, W, use_numba: bool | None = None):
    """Dispatch to the numba or numpy block-positivity kernel."""
    C = np.ascontiguousarray(C, dtype=np.complex128)
    V = np.ascontiguousarray(V, dtype=np.complex128)
    W = np.ascontiguousarray(W, dtype=np.complex128)
    if (USE_NUMBA if use_numba is None else use_numba) and HAVE_NUMBA:
        return product_values_numba(C, V, W)
    return product_values_numpy(C, V, W)
