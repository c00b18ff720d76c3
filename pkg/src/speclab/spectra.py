"""Limit detection for ``B_n``, Yamamoto diagnostics and ``V(T, r)`` estimation.

Quadratic forms ``<|T^n| x, x>`` are evaluated in a sorted Schur frame of
``T`` (see :class:`speclab.linalg.SchurFrame`).  A vector given in ordinary
coordinates carries rounding-level components along every direction, and
those components grow like the largest eigenvalue modulus to the power
``n``; the superior limit of such a perturbed vector is genuinely the top
modulus.  Passing vectors in frame coordinates (``frame=...``) keeps exact
zeros where invariant subspaces require them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .errors import ZeroVector
from .graded import GradedMatrix, graded_power, graded_product, graded_svd
from .linalg import (
    SchurFrame,
    as_matrix,
    as_vector,
    general_eigenvalues,
    hermitian_eig,
    operator_norm,
    schur_frame,
)
from .matfun import PowerSequenceRecord, b_n, graded_record, log_abs_power_form, power_sequence


class YamamotoRow(NamedTuple):
    n: int
    j: int
    root: float
    modulus: float
    error: float
    resolved: bool


def yamamoto_table(a, n_list: Sequence[int], *, method: str = "graded", tol_cluster=None) -> list[YamamotoRow]:
    """Rows ``(n, j, (s_j^(n))^(1/n), |lambda_j|, error, resolved)``, ``j`` 1-based."""
    a = as_matrix(a, square=True)
    moduli = general_eigenvalues(a, tol_cluster).moduli()
    rows = []
    for rec in power_sequence(a, n_list, method=method):
        resolved = ~rec.below_resolution
        for j, (root, mod) in enumerate(zip(rec.eigenvalues, moduli), start=1):
            rows.append(YamamotoRow(rec.n, j, float(root), float(mod), abs(float(root) - float(mod)), bool(resolved[j - 1])))
    return rows


class SpectrumMatch(NamedTuple):
    predicted: float
    achieved: float
    error: float


class MultiplicityCheck(NamedTuple):
    modulus: float
    expected: int
    found: int

    @property
    def ok(self) -> bool:
        return self.expected == self.found


@dataclass
class NayakLimitEstimate:
    """Estimated limit ``B`` of ``|A^n|^(1/n)`` from a doubling run."""

    B: np.ndarray
    n_final: int
    cauchy_gap: float
    spectrum_match: list[SpectrumMatch]
    converged: bool
    tol_match: float
    multiplicities: list[MultiplicityCheck]
    kernel_dim: int
    eigenvalues: np.ndarray
    vectors: np.ndarray
    frame: SchurFrame | None = None
    frame_vectors: np.ndarray | None = None
    history: list[tuple[int, float]] = field(default_factory=list)

    @property
    def max_error(self) -> float:
        return max((m.error for m in self.spectrum_match), default=0.0)

    @property
    def multiplicity_ok(self) -> bool:
        return all(m.ok for m in self.multiplicities)


def _multiplicity_checks(predicted: np.ndarray, achieved: np.ndarray, eig_seq, tol: float):
    """Count eigenvalues of ``B`` near each nonzero modulus cluster of ``A``.

    Moduli closer than ``2 * tol`` cannot be told apart at this tolerance and
    are merged into one cluster before counting.
    """
    mods = [e.modulus for e in eig_seq.nonzero_entries()]
    mults = [e.multiplicity for e in eig_seq.nonzero_entries()]
    merged: list[list[float]] = []
    counts: list[int] = []
    for mod, mult in zip(mods, mults):  # descending
        if merged and merged[-1][-1] - mod <= 2 * tol:
            merged[-1].append(mod)
            counts[-1] += mult
        else:
            merged.append([mod])
            counts.append(mult)
    checks = []
    for group, expected in zip(merged, counts):
        lo, hi = min(group) - tol, max(group) + tol
        found = int(np.sum((achieved >= lo) & (achieved <= hi)))
        checks.append(MultiplicityCheck(float(np.mean(group)), expected, found))
    return checks


def nayak_limit(
    a,
    n_max: int = 1024,
    tol_cauchy: float = 1e-10,
    *,
    method: str = "graded",
    tol_match: float | None = None,
    tol_cluster: float | None = None,
) -> NayakLimitEstimate:
    """Doubling run ``n = 1, 2, 4, ...`` until ``||B_2n - B_n|| <= tol_cauchy``.

    Stops at ``n_max`` (a power of two) otherwise and flags the result as not
    converged; slow Jordan-type convergence makes that an expected outcome.
    """
    a = as_matrix(a, square=True)
    if n_max < 1 or n_max & (n_max - 1):
        raise ValueError("n_max must be a power of two")
    schedule = [1 << k for k in range(n_max.bit_length())]
    prev = None
    history: list[tuple[int, float]] = []
    converged = False
    frame = schur_frame(a) if method == "graded" else None
    power = None
    t = GradedMatrix.from_dense(frame.triangular) if frame is not None else None
    for n in schedule:
        if method == "graded":
            power = t if power is None else power @ power
            rec = graded_record(frame, power, n, prev)
        else:
            rec = b_n(a, n, method=method, previous=prev)
        if prev is not None:
            history.append((n, rec.delta_prev))
        prev = rec
        if history and rec.delta_prev <= tol_cauchy:
            converged = True
            break
    gap = history[-1][1] if history else 0.0
    return _estimate_from_record(a, prev, gap, converged, history, tol_match, tol_cluster)


def _estimate_from_record(a, rec: PowerSequenceRecord, gap, converged, history, tol_match, tol_cluster):
    eig_seq = general_eigenvalues(a, tol_cluster)
    predicted = eig_seq.moduli()
    if rec.method == "graded":
        achieved = rec.eigenvalues.copy()
        frame_vectors = rec.frame_vectors
        vectors = rec.frame.unitary @ frame_vectors
    else:
        dec = hermitian_eig(rec.B_n)
        achieved = np.maximum(dec.values[::-1], 0.0)
        vectors = dec.vectors[:, ::-1]
        frame_vectors = None
    tol = max(1e-6, 5.0 * gap) if tol_match is None else float(tol_match)
    match = [SpectrumMatch(float(p), float(q), abs(float(p) - float(q))) for p, q in zip(predicted, achieved)]
    return NayakLimitEstimate(
        B=rec.B_n,
        n_final=rec.n,
        cauchy_gap=float(gap),
        spectrum_match=match,
        converged=converged,
        tol_match=tol,
        multiplicities=_multiplicity_checks(predicted, achieved, eig_seq, tol),
        kernel_dim=int(np.sum(achieved <= tol)),
        eigenvalues=achieved,
        vectors=vectors,
        frame=rec.frame,
        frame_vectors=frame_vectors,
        history=history,
    )


def spectral_projection_below(t, r: float, tol_cluster: float | None = None) -> tuple[np.ndarray, float]:
    """Orthogonal projection onto the eigenvectors of PSD ``T`` with eigenvalue ``<= lambda_r``.

    ``lambda_r`` is the largest eigenvalue not exceeding ``r`` (up to
    ``tol_cluster``), or 0 when there is none.
    """
    t = as_matrix(t, square=True)
    tol = 1e-6 * max(1.0, operator_norm(t)) if tol_cluster is None else float(tol_cluster)
    dec = hermitian_eig(t)
    w, v = dec.values, dec.vectors
    below = w <= r + tol
    lam_r = float(np.max(w[below])) if np.any(below) else 0.0
    keep = w <= lam_r + tol
    vk = v[:, keep]
    p = vk @ vk.conj().T
    return 0.5 * (p + p.conj().T), max(lam_r, 0.0)


@dataclass
class VEstimate:
    x: np.ndarray
    r_hat: float
    n_window: tuple[int, int]
    samples: list[tuple[int, float]]


def _window_top(n_lo: int, n_hi: int) -> int:
    return math.ceil((n_lo + n_hi) / 2)


def v_estimate_many(t, xs, n_lo: int, n_hi: int, *, frame: SchurFrame | None = None) -> list[VEstimate]:
    """``v_estimate`` for several vectors (columns of ``xs``) sharing one power sweep.

    With ``frame`` given, the columns of ``xs`` are frame coordinates and
    ``t`` is only used for its shape.
    """
    if not 1 <= n_lo < n_hi:
        raise ValueError("window must satisfy 1 <= n_lo < n_hi")
    t = as_matrix(t, square=True)
    xs = np.array(xs, dtype=complex)
    if xs.ndim == 1:
        xs = xs[:, None]
    norms = np.linalg.norm(xs, axis=0)
    if np.any(norms == 0):
        raise ZeroVector("v_estimate needs nonzero vectors")
    originals = xs.copy()
    if frame is None:
        frame = schur_frame(t)
        xs = frame.to_frame(xs)
    xs = xs / np.linalg.norm(xs, axis=0)
    step = GradedMatrix.from_dense(frame.triangular)
    power = graded_power(step, n_lo)
    samples: list[list[tuple[int, float]]] = [[] for _ in range(xs.shape[1])]
    for n in range(n_lo, n_hi + 1):
        if n > n_lo:
            power = graded_product(power, step)
        log_sv, vecs = graded_svd(power)
        for k in range(xs.shape[1]):
            lf = log_abs_power_form(log_sv, vecs, xs[:, k])
            samples[k].append((n, math.exp(lf / n) if np.isfinite(lf) else 0.0))
    top = _window_top(n_lo, n_hi)
    out = []
    for k in range(xs.shape[1]):
        r_hat = max(v for n, v in samples[k] if n >= top)
        out.append(VEstimate(originals[:, k], r_hat, (n_lo, n_hi), samples[k]))
    return out


def v_estimate(t, x, n_lo: int, n_hi: int, *, frame: SchurFrame | None = None) -> VEstimate:
    """Estimate ``limsup <|T^n| x, x>^(1/n)`` for unit-normalized ``x``.

    The superior limit is replaced by the maximum over the top half of the
    window, ``n`` in ``[ceil((n_lo + n_hi) / 2), n_hi]``.
    """
    x = as_vector(x)
    return v_estimate_many(t, x[:, None], n_lo, n_hi, frame=frame)[0]


class KernelLevel(NamedTuple):
    delta: float
    multiplicity: int
    worst_deviation: float
    r_hats: tuple[float, ...]


@dataclass
class KernelReport:
    levels: list[KernelLevel]
    tol_ker: float
    estimate: NayakLimitEstimate

    @property
    def worst(self) -> float:
        return max((lv.worst_deviation for lv in self.levels), default=0.0)

    @property
    def passed(self) -> bool:
        return self.worst <= self.tol_ker


def kernel_characterization_check(
    a,
    n_window: tuple[int, int] = (64, 256),
    *,
    estimate: NayakLimitEstimate | None = None,
    n_max: int = 1024,
    tol_ker: float | None = None,
) -> KernelReport:
    """Compare each eigenvalue of the estimated limit with ``v_estimate`` of its eigenvectors."""
    a = as_matrix(a, square=True)
    est = estimate or nayak_limit(a, n_max)
    tol = max(0.05, 10.0 * est.cauchy_gap) if tol_ker is None else float(tol_ker)
    if est.frame is not None:
        frame, vecs = est.frame, est.frame_vectors
    else:
        frame, vecs = None, est.vectors
    estimates = v_estimate_many(a, vecs, n_window[0], n_window[1], frame=frame)
    r_hats = np.array([e.r_hat for e in estimates])
    vals = est.eigenvalues
    order = np.argsort(-vals, kind="stable")
    groups: list[list[int]] = []
    for i in order:
        if groups and abs(vals[groups[-1][0]] - vals[i]) <= est.tol_match:
            groups[-1].append(int(i))
        else:
            groups.append([int(i)])
    levels = []
    for g in groups:
        delta = float(np.mean(vals[g]))
        dev = float(np.max(np.abs(r_hats[g] - vals[g])))
        levels.append(KernelLevel(delta, len(g), dev, tuple(float(r) for r in r_hats[g])))
    return KernelReport(levels, tol, est)


def v_uniqueness_check(t1, t2, r_grid: Sequence[float] | None = None, tol: float = 1e-8) -> bool:
    """True iff the projections ``E[0, lambda_r]`` of both PSD operators agree on ``r_grid``.

    The default grid is the union of both spectra plus all midpoints.
    """
    t1, t2 = as_matrix(t1, square=True), as_matrix(t2, square=True)
    if r_grid is None:
        pts = np.unique(np.concatenate([hermitian_eig(t1).values, hermitian_eig(t2).values]))
        r_grid = np.concatenate([pts, 0.5 * (pts[1:] + pts[:-1])])
    for r in r_grid:
        p1, _ = spectral_projection_below(t1, float(r))
        p2, _ = spectral_projection_below(t2, float(r))
        if np.linalg.norm(p1 - p2, 2) > tol:
            return False
    return True
