"""Matrix absolute value, PSD powers and the sequence ``B_n = |A^n|^(1/n)``."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np

from .errors import NegativeEigenvalue, NoConvergence, NotUnitVector
from .graded import GradedMatrix, graded_power, graded_svd
from .linalg import (
    SchurFrame,
    as_matrix,
    as_vector,
    hermitian_eig,
    operator_norm,
    schur_frame,
    svd_values,
)

RESCALE_LOW = 2.0**-30
RESCALE_HIGH = 2.0**30
SV_FLOOR = 1e-14
PSD_CLAMP = 1e-12
NEGATIVE_RTOL = 1e-8
METHODS = ("graded", "direct")


def abs_op(a) -> np.ndarray:
    """``|A| = (A* A)^(1/2)``, assembled from the SVD of ``A``."""
    a = as_matrix(a, square=True)
    try:
        _, s, vh = np.linalg.svd(a)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(f"SVD did not converge: {exc}") from exc
    h = (vh.conj().T * s) @ vh
    return 0.5 * (h + h.conj().T)


def psd_power(s, p: float) -> np.ndarray:
    """``S**p`` for Hermitian positive semidefinite ``S`` and ``p > 0``."""
    if not p > 0:
        raise ValueError("exponent must be positive")
    dec = hermitian_eig(s)
    w = dec.values
    norm = float(np.max(np.abs(w))) if w.size else 0.0
    if w.size and w[0] < -NEGATIVE_RTOL * norm:
        raise NegativeEigenvalue(f"eigenvalue {w[0]:.3e} is negative beyond tolerance")
    w = np.where(w < PSD_CLAMP * norm, 0.0, w)
    v = dec.vectors
    out = (v * w**p) @ v.conj().T
    return 0.5 * (out + out.conj().T)


def power_normalized(a, n: int) -> tuple[np.ndarray, float]:
    """``A**n = G * exp(log_scale)`` with ``||G|| = 1`` (or ``G = 0``).

    Products are rescaled to unit norm whenever the running norm leaves
    ``[2**-30, 2**30]``, and once more at the end.
    """
    a = as_matrix(a, square=True)
    if n < 1:
        raise ValueError("n must be >= 1")
    g = a.copy()
    log_scale = 0.0
    for k in range(n):
        if k:
            g = g @ a
        nrm = operator_norm(g)
        if nrm == 0.0:
            return np.zeros_like(g), 0.0
        if not RESCALE_LOW <= nrm <= RESCALE_HIGH:
            g = g / nrm
            log_scale += math.log(nrm)
    nrm = operator_norm(g)
    if nrm != 1.0:
        g = g / nrm
        log_scale += math.log(nrm)
    return g, log_scale


@dataclass(frozen=True)
class PowerSequenceRecord:
    """One term ``B_n`` of the sequence plus bookkeeping.

    ``eigenvalues`` are those of ``B_n`` in descending order, i.e. the
    ``n``-th roots of the singular values of ``A**n``.  Eigenvalues below
    ``resolution_floor`` come from singular values the chosen route cannot
    resolve and are reported, not trusted.  With ``method="graded"`` the
    eigenvectors are also kept in the coordinates of ``frame``
    (``frame_vectors``), where invariant subspaces of ``A`` are coordinate
    subspaces.
    """

    n: int
    B_n: np.ndarray
    log_scale_used: float
    effective_rank: int
    delta_prev: float
    eigenvalues: np.ndarray
    log_singular_values: np.ndarray
    resolution_floor: float
    method: str
    frame: SchurFrame | None = None
    frame_vectors: np.ndarray | None = None

    @property
    def below_resolution(self) -> np.ndarray:
        return self.eigenvalues < self.resolution_floor


def _effective_rank(log_sv: np.ndarray) -> int:
    if not log_sv.size or not np.isfinite(log_sv[0]):
        return 0
    return int(np.sum(log_sv > log_sv[0] + math.log(SV_FLOOR)))


def _roots(log_sv: np.ndarray, n: int) -> np.ndarray:
    with np.errstate(under="ignore"):
        return np.exp(log_sv / n)


def _record_direct(a: np.ndarray, n: int, previous) -> PowerSequenceRecord:
    g, log_scale = power_normalized(a, n)
    s = svd_values(g)
    with np.errstate(divide="ignore"):
        log_sv = np.log(s) + log_scale
    h = abs_op(g)
    b = math.exp(log_scale / n) * psd_power(h, 1.0 / n) if s[0] > 0 else np.zeros_like(g)
    floor = math.exp(log_scale / n) * (SV_FLOOR * float(s[0])) ** (1.0 / n) if s[0] > 0 else 0.0
    return PowerSequenceRecord(
        n=n,
        B_n=b,
        log_scale_used=log_scale,
        effective_rank=_effective_rank(log_sv),
        delta_prev=_delta(b, previous),
        eigenvalues=_roots(log_sv, n),
        log_singular_values=log_sv,
        resolution_floor=floor,
        method="direct",
    )


def graded_record(frame: SchurFrame, power: GradedMatrix, n: int, previous) -> PowerSequenceRecord:
    log_sv, v = graded_svd(power)
    roots = _roots(log_sv, n)
    b_frame = (v * roots) @ v.conj().T
    u = frame.unitary
    b = u @ b_frame @ u.conj().T
    b = 0.5 * (b + b.conj().T)
    top = log_sv[0] if log_sv.size and np.isfinite(log_sv[0]) else 0.0
    return PowerSequenceRecord(
        n=n,
        B_n=b,
        log_scale_used=float(top),
        effective_rank=_effective_rank(log_sv),
        delta_prev=_delta(b, previous),
        eigenvalues=roots,
        log_singular_values=log_sv,
        resolution_floor=0.0,
        method="graded",
        frame=frame,
        frame_vectors=v,
    )


def _delta(b: np.ndarray, previous) -> float:
    if previous is None:
        return 0.0
    prev = previous.B_n if isinstance(previous, PowerSequenceRecord) else previous
    return float(np.linalg.norm(b - prev, 2))


def b_n(a, n: int, *, method: str = "graded", previous=None, frame: SchurFrame | None = None) -> PowerSequenceRecord:
    """Compute ``B_n = |A**n|**(1/n)``.

    ``method="direct"`` rescales plain products of ``A`` and applies
    ``psd_power(abs_op(G), 1/n)``; it loses every singular value of ``A**n``
    below ``1e-14`` of the largest.  ``method="graded"`` (default) works in
    a sorted Schur frame with column-scaled powers and a Jacobi SVD, keeping
    small singular values to relative accuracy.  ``previous`` (a record or
    matrix) fills ``delta_prev``.
    """
    a = as_matrix(a, square=True)
    if n < 1:
        raise ValueError("n must be >= 1")
    if method == "direct":
        return _record_direct(a, n, previous)
    if method != "graded":
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    frame = frame or schur_frame(a)
    return graded_record(frame, graded_power(frame.triangular, n), n, previous)


def power_sequence(a, ns: Iterable[int], *, method: str = "graded") -> list[PowerSequenceRecord]:
    """Records for an ascending list of exponents, ``delta_prev`` chained."""
    a = as_matrix(a, square=True)
    ns = [int(n) for n in ns]
    if any(n < 1 for n in ns) or ns != sorted(ns):
        raise ValueError("exponents must be positive and ascending")
    records: list[PowerSequenceRecord] = []
    if method == "direct":
        for n in ns:
            records.append(_record_direct(a, n, records[-1] if records else None))
        return records
    if method != "graded":
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    frame = schur_frame(a)
    t = GradedMatrix.from_dense(frame.triangular)
    power, done = None, 0
    for n in ns:
        if power is None:
            power = graded_power(t, n)
        elif n == 2 * done:
            power = power @ power
        elif n > done:
            power = power @ graded_power(t, n - done)
        done = n
        records.append(graded_record(frame, power, n, records[-1] if records else None))
    return records


def log_abs_power_form(log_sv: np.ndarray, vectors: np.ndarray, x: np.ndarray) -> float:
    """``log <|X| x, x>`` from ``X``'s log singular values and right singular vectors."""
    w = vectors.conj().T @ x
    with np.errstate(divide="ignore"):
        terms = log_sv + 2.0 * np.log(np.abs(w))
    finite = terms[np.isfinite(terms)]
    if not finite.size:
        return -math.inf
    top = float(np.max(finite))
    return top + math.log(float(np.sum(np.exp(finite - top))))


class HolderCheck(NamedTuple):
    holds: bool
    slack: float
    lhs: float
    rhs: float


def holder_mccarthy_check(s, x, r: float) -> HolderCheck:
    """Check ``<S^r x, x> <= <S x, x>^r`` for PSD ``S``, unit ``x`` and ``0 < r < 1``."""
    s = as_matrix(s, square=True)
    x = as_vector(x, s.shape[0])
    if abs(np.linalg.norm(x) - 1.0) > 1e-12:
        raise NotUnitVector(f"||x|| = {np.linalg.norm(x):.15f}")
    if not 0.0 < r < 1.0:
        raise ValueError("r must lie in (0, 1)")
    lhs = float(np.real(np.vdot(x, psd_power(s, r) @ x)))
    base = max(float(np.real(np.vdot(x, s @ x))), 0.0)
    rhs = base**r
    slack = rhs - lhs
    return HolderCheck(lhs <= rhs + 1e-10, slack, lhs, rhs)
