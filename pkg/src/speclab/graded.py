"""Column-scaled matrix powers and a one-sided Jacobi SVD that respects the scaling.

A matrix ``X`` is held as ``C @ diag(exp(L))`` with unit (or zero) columns
``C`` and per-column natural-log scales ``L``.  For an upper triangular ``T``
whose diagonal is sorted by modulus ascending, column ``j`` of ``T**n`` lives
in the leading ``j x j`` block and grows like ``|t_jj|**n``, so this
representation keeps every column accurate to working precision relative to
its own size even when the columns differ by hundreds of orders of magnitude.
Hestenes' one-sided Jacobi method then recovers singular values and right
singular vectors with relative accuracy governed by the conditioning of
``C`` instead of the spread of ``exp(L)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NoConvergence

NEG_INF = -np.inf


@dataclass(frozen=True)
class GradedMatrix:
    columns: np.ndarray
    log_scales: np.ndarray

    @property
    def dim(self) -> int:
        return int(self.columns.shape[0])

    @classmethod
    def from_dense(cls, x) -> "GradedMatrix":
        x = np.asarray(x, dtype=complex)
        return cls(*_normalize_columns(x, np.zeros(x.shape[1])))

    @classmethod
    def identity(cls, n: int) -> "GradedMatrix":
        return cls(np.eye(n, dtype=complex), np.zeros(n))

    def dense(self) -> np.ndarray:
        """Materialize ``C diag(exp(L))``; may under/overflow for extreme scales."""
        with np.errstate(over="ignore", under="ignore"):
            return self.columns * np.exp(self.log_scales)

    def __matmul__(self, other: "GradedMatrix") -> "GradedMatrix":
        return graded_product(self, other)


def _normalize_columns(y: np.ndarray, base: np.ndarray):
    norms = np.linalg.norm(y, axis=0)
    nz = norms > 0
    cols = np.zeros_like(y)
    cols[:, nz] = y[:, nz] / norms[nz]
    logs = np.full(y.shape[1], NEG_INF)
    logs[nz] = base[nz] + np.log(norms[nz])
    return cols, logs


def graded_product(a: GradedMatrix, b: GradedMatrix) -> GradedMatrix:
    """Product of two column-scaled matrices, column by column in log space."""
    c1, l1 = a.columns, a.log_scales
    c2, l2 = b.columns, b.log_scales
    with np.errstate(divide="ignore"):
        log_mag = np.log(np.abs(c2)) + l1[:, None]
    # log_mag is -inf wherever the term vanishes
    shift = np.max(log_mag, axis=0)
    live = np.isfinite(shift)
    weights = np.zeros_like(c2)
    if np.any(live):
        with np.errstate(invalid="ignore", under="ignore"):
            scaled = np.exp(log_mag[:, live] - shift[live])
        phase = np.zeros_like(c2[:, live])
        mag = np.abs(c2[:, live])
        np.divide(c2[:, live], mag, out=phase, where=mag > 0)
        weights[:, live] = np.where(np.isfinite(scaled), scaled, 0.0) * phase
    y = c1 @ weights
    base = np.where(live, shift, 0.0) + l2
    cols, logs = _normalize_columns(y, base)
    logs[~live] = NEG_INF
    cols[:, ~live] = 0.0
    return GradedMatrix(cols, logs)


def graded_power(t, n: int) -> GradedMatrix:
    """``T**n`` by binary powering in column-scaled form (``n >= 0``)."""
    if n < 0:
        raise ValueError("exponent must be non-negative")
    base = t if isinstance(t, GradedMatrix) else GradedMatrix.from_dense(t)
    result = None
    while n:
        if n & 1:
            result = base if result is None else result @ base
        n >>= 1
        if n:
            base = base @ base
    return result if result is not None else GradedMatrix.identity(base.dim)


def _round_robin(m: int) -> list[tuple[np.ndarray, np.ndarray]]:
    # circle method: every pair of columns meets once per sweep
    players = list(range(m)) + ([-1] if m % 2 else [])
    k = len(players)
    rounds = []
    for _ in range(k - 1):
        p, q = [], []
        for i in range(k // 2):
            x, y = players[i], players[k - 1 - i]
            if x >= 0 and y >= 0:
                p.append(min(x, y))
                q.append(max(x, y))
        rounds.append((np.array(p, dtype=int), np.array(q, dtype=int)))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def graded_svd(g: GradedMatrix, tol: float | None = None, max_sweeps: int | None = None):
    """Singular values and right singular vectors of a column-scaled matrix.

    Returns ``(log_sv, V)`` with ``log_sv`` sorted descending (``-inf`` for
    exact zeros) and ``V`` unitary such that ``X V`` has orthogonal columns of
    norms ``exp(log_sv)``.
    """
    c = g.columns.copy()
    logs = g.log_scales.copy()
    m = c.shape[1]
    v = np.eye(m, dtype=complex)
    if tol is None:
        tol = max(m, 1) * np.finfo(float).eps
    if max_sweeps is None:
        max_sweeps = 100 * max(m, 1)
    rounds = _round_robin(m)
    for _ in range(max_sweeps):
        rotated = False
        for p, q in rounds:
            if p.size == 0:
                continue
            live = np.isfinite(logs[p]) & np.isfinite(logs[q])
            if not np.any(live):
                continue
            p, q = p[live], q[live]
            # orient each pair so that column p carries the larger scale
            flip = logs[q] > logs[p]
            p, q = np.where(flip, q, p), np.where(flip, p, q)
            cp, cq = c[:, p], c[:, q]
            gam = np.einsum("ij,ij->j", cp.conj(), cq)
            a = np.einsum("ij,ij->j", cp.conj(), cp).real
            b = np.einsum("ij,ij->j", cq.conj(), cq).real
            absg = np.abs(gam)
            act = absg > tol * np.sqrt(a * b)
            if not np.any(act):
                continue
            rotated = True
            p, q, cp, cq = p[act], q[act], cp[:, act], cq[:, act]
            gam, a, b, absg = gam[act], a[act], b[act], absg[act]
            phase = gam / absg
            with np.errstate(under="ignore"):
                rho = np.exp(logs[q] - logs[p])
                eta = (rho * rho * b - a) / (2.0 * absg)
                tau = np.where(eta >= 0, 1.0, -1.0) / (np.abs(eta) + np.sqrt(rho * rho + eta * eta))
                t = rho * tau
                cs = 1.0 / np.sqrt(1.0 + t * t)
                new_p = cs * (cp - (t * rho * phase.conj()) * cq)
                new_q = cs * ((tau * phase) * cp + cq)
                vp, vq = v[:, p], v[:, q]
                v[:, p] = cs * (vp - (t * phase.conj()) * vq)
                v[:, q] = cs * (vq + (t * phase) * vp)
            cols_p, logs_p = _normalize_columns(new_p, logs[p])
            cols_q, logs_q = _normalize_columns(new_q, logs[q])
            c[:, p], logs[p] = cols_p, logs_p
            c[:, q], logs[q] = cols_q, logs_q
        if not rotated:
            order = np.argsort(-logs, kind="stable")
            return logs[order], v[:, order]
    raise NoConvergence(f"one-sided Jacobi did not converge in {max_sweeps} sweeps")
