"""Dense complex linear algebra kernels.

Matrices are plain ``numpy.ndarray`` objects of dtype ``complex128``; the
helpers here validate shapes and finiteness and wrap LAPACK (through numpy
and scipy) behind small, deterministic contracts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.linalg import lapack

from .errors import NoConvergence, NonFiniteEntries, NotHermitian, ShapeMismatch

TOL_ORTH = 1e-10
TOL_RECON = 1e-10
HERMITIAN_RTOL = 1e-8
CLUSTER_RTOL = 1e-6


def as_matrix(a, *, square: bool = False) -> np.ndarray:
    """Return ``a`` as a finite 2-D complex array (always a fresh copy)."""
    m = np.array(a, dtype=complex, copy=True)
    if m.ndim == 0:
        m = m.reshape(1, 1)
    if m.ndim != 2:
        raise ShapeMismatch(f"expected a 2-D matrix, got {m.ndim} dimensions")
    if square and m.shape[0] != m.shape[1]:
        raise ShapeMismatch(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NonFiniteEntries("matrix contains NaN or Inf entries")
    return m


def as_vector(x, size: int | None = None) -> np.ndarray:
    v = np.array(x, dtype=complex, copy=True).reshape(-1)
    if size is not None and v.shape[0] != size:
        raise ShapeMismatch(f"expected a vector of length {size}, got {v.shape[0]}")
    if not np.all(np.isfinite(v)):
        raise NonFiniteEntries("vector contains NaN or Inf entries")
    return v


def matmul(a, b) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise ShapeMismatch(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def adjoint(a) -> np.ndarray:
    return as_matrix(a).conj().T


def sub(a, b) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    if a.shape != b.shape:
        raise ShapeMismatch(f"cannot subtract {b.shape} from {a.shape}")
    return a - b


def scale(c, a) -> np.ndarray:
    return complex(c) * as_matrix(a)


def svd_values(a) -> np.ndarray:
    """Singular values, descending and clamped at zero."""
    a = as_matrix(a)
    if a.size == 0:
        return np.zeros(0)
    try:
        s = np.linalg.svd(a, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(f"SVD did not converge: {exc}") from exc
    return np.maximum(s, 0.0)


def operator_norm(a) -> float:
    s = svd_values(a)
    return float(s[0]) if s.size else 0.0


def hermitian_defect(s: np.ndarray) -> float:
    return float(np.linalg.norm(s - s.conj().T, 2)) if s.size else 0.0


def is_hermitian(s, rtol: float = HERMITIAN_RTOL) -> bool:
    s = as_matrix(s, square=True)
    return hermitian_defect(s) <= rtol * max(1.0, operator_norm(s))


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigen-decomposition ``S = V diag(values) V*`` of a Hermitian matrix."""

    values: np.ndarray
    vectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.vectors
        return (v * self.values) @ v.conj().T

    def orthogonality_residual(self) -> float:
        v = self.vectors
        return float(np.linalg.norm(v.conj().T @ v - np.eye(v.shape[1]), 2))


def hermitian_eig(s, rtol: float = HERMITIAN_RTOL) -> SpectralDecomposition:
    """Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian matrix.

    Raises NotHermitian when ``||S - S*|| > rtol * max(1, ||S||)``.
    """
    s = as_matrix(s, square=True)
    norm = operator_norm(s)
    defect = hermitian_defect(s)
    if defect > rtol * max(1.0, norm):
        raise NotHermitian(f"||S - S*|| = {defect:.3e} exceeds tolerance")
    try:
        w, v = np.linalg.eigh(0.5 * (s + s.conj().T))
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(f"Hermitian eigensolver did not converge: {exc}") from exc
    return SpectralDecomposition(values=w, vectors=v)


@dataclass(frozen=True)
class EigenEntry:
    modulus: float
    value: complex
    multiplicity: int


@dataclass(frozen=True)
class EigenSequence:
    """Eigenvalues grouped by modulus, largest modulus first.

    ``eigenvalues`` is the flat list (each eigenvalue repeated by algebraic
    multiplicity) ordered by modulus descending, then argument ascending.
    ``entries`` groups that list into modulus clusters.
    """

    eigenvalues: np.ndarray
    entries: tuple[EigenEntry, ...]
    tol_cluster: float

    @property
    def dim(self) -> int:
        return int(self.eigenvalues.shape[0])

    def moduli(self) -> np.ndarray:
        """Cluster moduli repeated by multiplicity (length ``dim``, descending)."""
        if not self.entries:
            return np.zeros(0)
        return np.concatenate([np.full(e.multiplicity, e.modulus) for e in self.entries])

    def nonzero_entries(self) -> tuple[EigenEntry, ...]:
        return tuple(e for e in self.entries if e.modulus > self.tol_cluster)


def _clusters(sorted_values: np.ndarray, tol: float) -> list[list[int]]:
    # single linkage on an already sorted 1-D array
    groups: list[list[int]] = []
    for i, v in enumerate(sorted_values):
        if groups and abs(v - sorted_values[groups[-1][-1]]) <= tol:
            groups[-1].append(i)
        else:
            groups.append([i])
    return groups


def _argument(z: complex) -> float:
    # argument in (-pi, pi]; -pi maps to pi
    a = math.atan2(z.imag, z.real)
    return math.pi if a <= -math.pi else a


def general_eigenvalues(a, tol_cluster: float | None = None) -> EigenSequence:
    """Eigenvalues with algebraic multiplicity, read off a complex Schur form."""
    a = as_matrix(a, square=True)
    n = a.shape[0]
    norm = operator_norm(a)
    tol = CLUSTER_RTOL * max(1.0, norm) if tol_cluster is None else float(tol_cluster)
    if n == 0:
        return EigenSequence(np.zeros(0, dtype=complex), (), tol)
    if _is_upper_triangular(a) or _is_upper_triangular(a.T):
        lam = np.diag(a).copy()
    else:
        try:
            t, _ = scipy.linalg.schur(a, output="complex")
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise NoConvergence(f"Schur decomposition failed: {exc}") from exc
        lam = np.diag(t).copy()
    mods = np.abs(lam)
    order = np.argsort(mods, kind="stable")
    groups = _clusters(mods[order], tol)
    entries = []
    flat = []
    for g in reversed(groups):
        idx = order[g]
        members = sorted(lam[idx], key=_argument)
        modulus = float(np.mean(mods[idx]))
        if modulus <= tol:
            modulus = 0.0
        entries.append(EigenEntry(modulus, complex(members[0]), len(members)))
        flat.extend(members)
    return EigenSequence(np.array(flat, dtype=complex), tuple(entries), tol)


def _is_upper_triangular(a: np.ndarray) -> bool:
    return not np.any(np.tril(a, -1))


@dataclass(frozen=True)
class SchurFrame:
    """Unitary change of basis ``A = U T U*`` with ``T`` upper triangular.

    The diagonal of ``T`` is sorted by modulus ascending, so the span of the
    first ``k`` frame vectors is the ``A``-invariant subspace belonging to the
    ``k`` smallest eigenvalue moduli.  For Hermitian input ``T`` is the
    diagonal matrix of eigenvalues.
    """

    unitary: np.ndarray
    triangular: np.ndarray
    kind: str = field(default="schur")

    @property
    def dim(self) -> int:
        return int(self.triangular.shape[0])

    def to_frame(self, x) -> np.ndarray:
        return self.unitary.conj().T @ np.asarray(x, dtype=complex)

    def from_frame(self, y) -> np.ndarray:
        return self.unitary @ np.asarray(y, dtype=complex)


def schur_frame(a) -> SchurFrame:
    a = as_matrix(a, square=True)
    n = a.shape[0]
    if n and is_hermitian(a, rtol=1e-13):
        dec = hermitian_eig(a)
        return SchurFrame(dec.vectors, np.diag(dec.values).astype(complex), "hermitian")
    if _is_upper_triangular(a):
        t, u, kind = a.copy(), np.eye(n, dtype=complex), "triangular"
    elif _is_upper_triangular(a.T):
        # reversing the basis turns lower triangular into upper triangular
        u = np.eye(n, dtype=complex)[:, ::-1].copy()
        t, kind = a[::-1, ::-1].copy(), "triangular"
    else:
        try:
            t, u = scipy.linalg.schur(a, output="complex")
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise NoConvergence(f"Schur decomposition failed: {exc}") from exc
        kind = "schur"
    t, u = _sort_schur_ascending(t, u)
    return SchurFrame(u, np.triu(t), kind)


def _sort_schur_ascending(t: np.ndarray, u: np.ndarray):
    n = t.shape[0]
    if n < 2:
        return t, u
    slack = 64 * np.finfo(float).eps * max(1.0, float(np.max(np.abs(t))))
    t = np.asfortranarray(t)
    u = np.asfortranarray(u)
    for k in range(n):
        mods = np.abs(np.diag(t))[k:]
        j = k + int(np.argmin(mods))
        # stable: only move when strictly smaller beyond rounding
        if mods[j - k] < mods[0] - slack:
            t, u, info = lapack.ztrexc(t, u, j + 1, k + 1)
            if info != 0:
                raise NoConvergence(f"Schur reordering failed (info={info})")
    return np.ascontiguousarray(t), np.ascontiguousarray(u)
