"""Dense complex linear algebra for Hermitian operators.

Matrices are plain ``numpy.ndarray`` objects of dtype ``complex128``.  The
eigensolver is a cyclic Jacobi method with a fixed row-major rotation order,
so results are bit-stable for identical inputs.
"""
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    NegativeEigenvalueForSqrt,
    NoConvergence,
    NotHermitian,
)

HERMITIAN_TOL = 1e-10
PSD_TOL = 1e-10
TRACE_TOL = 1e-10
SUPPORT_TOL = 1e-12
CONVERGENCE_TOL = 1e-13
MAX_SWEEPS = 60


def as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2:
        raise DimensionMismatch(f"expected a 2-d matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise DimensionMismatch("matrix has non-finite entries")
    return m


def dagger(a: np.ndarray) -> np.ndarray:
    return a.conj().T


def hermiticity_residual(a: np.ndarray) -> float:
    """Largest entrywise deviation |A - A^dagger|."""
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(a - a.conj().T)))


def _hermitian_scale(a: np.ndarray) -> float:
    # Frobenius norm bounds the operator norm from above; avoids a recursive
    # eigendecomposition just to set a tolerance.
    return max(1.0, float(np.linalg.norm(a)))


def is_hermitian(a, tol: float = HERMITIAN_TOL) -> bool:
    a = np.asarray(a)
    return a.shape[0] == a.shape[1] and hermiticity_residual(a) <= tol * _hermitian_scale(a)


@dataclass(frozen=True)
class HermitianEigen:
    """Ascending eigenvalues and the matching orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def _jacobi_sweeps(a: np.ndarray, v: np.ndarray) -> None:
    n = a.shape[0]
    fro = np.linalg.norm(a)
    target = CONVERGENCE_TOL * fro
    for _ in range(MAX_SWEEPS):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= target:
            return
        for p in range(n - 1):
            for q in range(p + 1, n):
                g = a[p, q]
                r = abs(g)
                if r == 0.0 or r < 1e-300:
                    continue
                alpha = a[p, p].real
                beta = a[q, q].real
                tau = (beta - alpha) / (2.0 * r)
                t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                phase = g / r
                sp = s * phase  # G[p, q]
                sq = -s * np.conj(phase)  # G[q, p]
                # columns: A <- A G
                ap = a[:, p].copy()
                aq = a[:, q]
                a[:, p] = c * ap + sq * aq
                a[:, q] = sp * ap + c * aq
                # rows: A <- G^dagger A
                rp = a[p, :].copy()
                rq = a[q, :]
                a[p, :] = c * rp + np.conj(sq) * rq
                a[q, :] = np.conj(sp) * rp + c * rq
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                vp = v[:, p].copy()
                vq = v[:, q]
                v[:, p] = c * vp + sq * vq
                v[:, q] = sp * vp + c * vq
    off = np.linalg.norm(a - np.diag(np.diag(a)))
    if off > target:
        raise NoConvergence(
            f"Jacobi did not converge in {MAX_SWEEPS} sweeps (off-diagonal {off:.3e})"
        )


def hermitian_eig(a) -> HermitianEigen:
    """Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Eigenvalues are returned ascending.  Each eigenvector column is rotated so
    that its first component of magnitude above 1e-12 is real and positive.
    """
    a = as_matrix(a)
    n, m = a.shape
    if n != m:
        raise DimensionMismatch(f"matrix is not square: {a.shape}")
    if hermiticity_residual(a) > HERMITIAN_TOL * _hermitian_scale(a):
        raise NotHermitian(f"residual {hermiticity_residual(a):.3e} exceeds tolerance")
    work = 0.5 * (a + a.conj().T)
    vecs = np.eye(n, dtype=np.complex128)
    _jacobi_sweeps(work, vecs)
    vals = np.diag(work).real.copy()
    order = np.argsort(vals, kind="stable")
    vals = vals[order]
    vecs = vecs[:, order]
    for j in range(n):
        col = vecs[:, j]
        idx = np.flatnonzero(np.abs(col) > 1e-12)
        if idx.size:
            z = col[idx[0]]
            vecs[:, j] = col * (np.conj(z) / abs(z))
    return HermitianEigen(vals, vecs)


def eigvalsh(a) -> np.ndarray:
    return hermitian_eig(a).eigenvalues


def _support_cut(vals: np.ndarray) -> float:
    scale = float(np.max(np.abs(vals))) if vals.size else 0.0
    return SUPPORT_TOL * scale


def _apply(f: str, vals: np.ndarray) -> np.ndarray:
    if f == "sqrt":
        if vals.size and vals.min() < -PSD_TOL:
            raise NegativeEigenvalueForSqrt(f"minimum eigenvalue {vals.min():.3e}")
        return np.sqrt(np.clip(vals, 0.0, None))
    if f == "abs":
        return np.abs(vals)
    cut = _support_cut(vals)
    on = vals > cut
    out = np.zeros_like(vals)
    if f == "inv_on_support":
        out[on] = 1.0 / vals[on]
    elif f == "inv_sqrt_on_support":
        out[on] = 1.0 / np.sqrt(vals[on])
    elif f == "log2_on_support":
        out[on] = np.log2(vals[on])
    else:
        raise ValueError(f"unknown function {f!r}")
    return out


def apply_hermitian_function(a, f: str) -> np.ndarray:
    """Spectral calculus: ``sum_i f(lambda_i) |u_i><u_i|``.

    ``f`` is one of ``sqrt``, ``abs``, ``inv_on_support``,
    ``inv_sqrt_on_support`` or ``log2_on_support``.  The ``*_on_support``
    functions act on eigenvalues above ``SUPPORT_TOL`` times the largest
    magnitude and send the kernel to zero.
    """
    eig = hermitian_eig(a)
    fv = _apply(f, eig.eigenvalues)
    v = eig.eigenvectors
    return (v * fv) @ v.conj().T


def pinv_psd(a) -> np.ndarray:
    return apply_hermitian_function(a, "inv_on_support")


def sqrtm_psd(a) -> np.ndarray:
    return apply_hermitian_function(a, "sqrt")


class MatrixNorms(NamedTuple):
    trace_norm: float
    operator_norm: float
    frobenius: float


def singular_values(a) -> np.ndarray:
    a = as_matrix(a)
    if a.shape[0] == a.shape[1] and is_hermitian(a):
        return np.sort(np.abs(eigvalsh(a)))[::-1]
    gram = a.conj().T @ a if a.shape[0] >= a.shape[1] else a @ a.conj().T
    return np.sqrt(np.clip(eigvalsh(gram), 0.0, None))[::-1]


def matrix_norms(a) -> MatrixNorms:
    a = as_matrix(a)
    sv = singular_values(a)
    fro = float(np.sqrt(np.sum(np.abs(a) ** 2)))
    tn = float(np.sum(sv))
    # Schatten comparison ||A||_1 <= sqrt(rank) ||A||_2
    dim = min(a.shape)
    assert tn <= np.sqrt(dim) * fro * (1 + 1e-9) + 1e-12, "Schatten-norm comparison violated"
    return MatrixNorms(tn, float(sv.max()) if sv.size else 0.0, fro)


def trace_norm(a) -> float:
    return matrix_norms(a).trace_norm


def operator_norm(a) -> float:
    return matrix_norms(a).operator_norm


def tensor_product(*factors) -> np.ndarray:
    """Kronecker product, left factor most significant."""
    out = np.ones((1, 1), dtype=np.complex128)
    for f in factors:
        out = np.kron(out, np.asarray(f, dtype=np.complex128))
    return out


def partial_trace(rho, factor_dims: Sequence[int], traced) -> np.ndarray:
    """Trace out the tensor factors at positions ``traced``.

    ``factor_dims`` lists the subsystem dimensions, most significant first.
    """
    rho = as_matrix(rho)
    dims = [int(d) for d in factor_dims]
    total = int(np.prod(dims))
    if rho.shape != (total, total):
        raise DimensionMismatch(f"factor dims {dims} do not match matrix {rho.shape}")
    traced = sorted(set(int(i) for i in traced))
    if any(i < 0 or i >= len(dims) for i in traced):
        raise DimensionMismatch(f"traced positions {traced} out of range")
    n = len(dims)
    t = rho.reshape(dims + dims)
    # trace from the highest position down so remaining axis numbers stay valid
    for count, i in enumerate(reversed(traced)):
        k = n - count
        t = np.trace(t, axis1=i, axis2=i + k)
    kept = [d for i, d in enumerate(dims) if i not in traced]
    size = int(np.prod(kept)) if kept else 1
    return t.reshape(size, size)


class SchurCheck(NamedTuple):
    is_psd: bool
    schur_min_eigenvalue: float


def schur_psd_check(b, c, d, tol: float = PSD_TOL) -> SchurCheck:
    """PSD test of ``[[B, C], [C^dagger, D]]`` through the Schur complement of B.

    Uses ``B+`` from :func:`pinv_psd`.  When B is singular the block matrix is
    PSD only if the columns of C also lie in the range of B, so that residual
    is checked as well.
    """
    b, c, d = as_matrix(b), as_matrix(c), as_matrix(d)
    if b.shape[0] != c.shape[0] or d.shape[0] != c.shape[1]:
        raise DimensionMismatch("block shapes are incompatible")
    b_min = float(eigvalsh(b).min())
    b_pinv = pinv_psd(b)
    schur = d - c.conj().T @ b_pinv @ c
    schur_min = float(eigvalsh(0.5 * (schur + schur.conj().T)).min())
    range_resid = float(np.max(np.abs(c - b @ b_pinv @ c))) if c.size else 0.0
    ok = b_min >= -tol and schur_min >= -tol and range_resid <= 1e-8 * max(1.0, np.abs(c).max())
    return SchurCheck(bool(ok), schur_min)


class DensityCheck(NamedTuple):
    ok: bool
    violations: list


def check_density(a, tol: float = TRACE_TOL) -> DensityCheck:
    """Report the Hermitian / PSD / unit-trace residuals of ``a``.

    ``violations`` holds ``(label, residual)`` pairs for each failed test.
    """
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"matrix is not square: {a.shape}")
    violations = []
    herm = hermiticity_residual(a)
    if herm > tol * _hermitian_scale(a):
        violations.append(("hermitian", herm))
        h = 0.5 * (a + a.conj().T)
    else:
        h = a
    min_eig = float(eigvalsh(0.5 * (h + h.conj().T)).min())
    if min_eig < -tol:
        violations.append(("psd", -min_eig))
    tr = abs(np.trace(a) - 1.0)
    if tr > tol:
        violations.append(("trace", float(tr)))
    return DensityCheck(not violations, violations)


def require_density(a, name: str = "state", tol: float = TRACE_TOL) -> np.ndarray:
    """Return ``a`` as a matrix, raising :class:`InputError` if it is not a state."""
    from .errors import InputError

    m = as_matrix(a)
    rep = check_density(m, tol)
    if not rep.ok:
        detail = ", ".join(f"{k}={v:.3e}" for k, v in rep.violations)
        raise InputError(f"{name} is not a density matrix ({detail})")
    return m
