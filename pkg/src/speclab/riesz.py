"""Riesz projections by trapezoidal quadrature of the resolvent on circles."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EigenvalueOnContour, QuadratureNotConverged, SingularResolvent
from .linalg import as_matrix, general_eigenvalues, svd_values

TOL_RIESZ = 1e-8
DIST_MARGIN = 1e-6
DEFAULT_NODES = 256
MAX_NODES = 1 << 16


@dataclass(frozen=True)
class RieszResult:
    P: np.ndarray
    rank: int
    quad_nodes: int
    idempotency_residual: float
    commutation_residual: float
    refinement_change: float
    decay_values: tuple[float, ...] = ()

    @property
    def accepted(self) -> bool:
        return max(self.idempotency_residual, self.commutation_residual) <= TOL_RIESZ


def _resolvent_sum(a: np.ndarray, center: complex, radius: float, thetas: np.ndarray) -> np.ndarray:
    n = a.shape[0]
    eye = np.eye(n, dtype=complex)
    acc = np.zeros((n, n), dtype=complex)
    for theta in thetas:
        w = radius * np.exp(1j * theta)
        try:
            r = np.linalg.solve((center + w) * eye - a, eye)
        except np.linalg.LinAlgError as exc:
            raise SingularResolvent(f"resolvent singular at z = {center + w}") from exc
        if not np.all(np.isfinite(r)):
            raise SingularResolvent(f"resolvent overflowed at z = {center + w}")
        acc += w * r
    return acc


def riesz_projection(a, center: complex, radius: float, nodes: int = DEFAULT_NODES, tol: float = TOL_RIESZ) -> RieszResult:
    """Riesz projection for the eigenvalues strictly inside ``|z - center| = radius``.

    The trapezoid rule is refined by doubling the node count (reusing the
    previous nodes) until two consecutive approximations agree to ``tol``.
    """
    a = as_matrix(a, square=True)
    if not radius > 0:
        raise ValueError("radius must be positive")
    if nodes < 16:
        raise ValueError("at least 16 quadrature nodes are required")
    lam = general_eigenvalues(a).eigenvalues
    dist = np.abs(np.abs(lam - center) - radius)
    if lam.size and np.min(dist) < DIST_MARGIN:
        raise EigenvalueOnContour(f"an eigenvalue lies within {np.min(dist):.2e} of the contour")

    total = _resolvent_sum(a, center, radius, 2 * math.pi * np.arange(nodes) / nodes)
    p = total / nodes
    change = math.inf
    while True:
        shifted = 2 * math.pi * (np.arange(nodes) + 0.5) / nodes
        total = total + _resolvent_sum(a, center, radius, shifted)
        nodes *= 2
        p_new = total / nodes
        change = float(np.linalg.norm(p_new - p, 2))
        p = p_new
        if change <= tol:
            break
        if nodes >= MAX_NODES:
            raise QuadratureNotConverged(f"projection still changing by {change:.2e} at {nodes} nodes")
    return RieszResult(
        P=p,
        rank=int(np.sum(svd_values(p) > 0.5)),
        quad_nodes=nodes,
        idempotency_residual=float(np.linalg.norm(p @ p - p, 2)),
        commutation_residual=float(np.linalg.norm(a @ p - p @ a, 2)),
        refinement_change=change,
    )


def riesz_origin_disc(
    a,
    r: float,
    nodes: int = DEFAULT_NODES,
    *,
    n_window: tuple[int, int] = (32, 128),
    samples: int = 5,
    seed: int = 0,
) -> RieszResult:
    """Riesz projection onto the spectral subspace of ``|lambda| < r``, plus a decay check.

    For ``samples`` random unit vectors ``x`` in the range of ``P`` the
    result records ``max ||A^n x||^(1/n)`` over the top half of
    ``n_window``; every value should stay below ``r``.  Iterates are pushed
    back into the range of ``P`` after each step (``P`` commutes with ``A``),
    which keeps rounding noise from seeding the outer spectrum.
    """
    a = as_matrix(a, square=True)
    res = riesz_projection(a, 0.0, r, nodes)
    if res.rank == 0:
        return res
    rng = np.random.default_rng(seed)
    p = res.P
    top = math.ceil((n_window[0] + n_window[1]) / 2)
    values = []
    for _ in range(samples):
        z = rng.standard_normal(a.shape[0]) + 1j * rng.standard_normal(a.shape[0])
        x = p @ z
        x /= np.linalg.norm(x)
        log_norm, best = 0.0, 0.0
        for n in range(1, n_window[1] + 1):
            x = p @ (a @ x)
            nrm = float(np.linalg.norm(x))
            if nrm == 0.0:
                break
            log_norm += math.log(nrm)
            x /= nrm
            if n >= top:
                best = max(best, math.exp(log_norm / n))
        values.append(best)
    return RieszResult(
        P=res.P,
        rank=res.rank,
        quad_nodes=res.quad_nodes,
        idempotency_residual=res.idempotency_residual,
        commutation_residual=res.commutation_residual,
        refinement_change=res.refinement_change,
        decay_values=tuple(values),
    )


def separating_radii(a) -> list[float]:
    """Circle radii halfway (in log-modulus) between adjacent nonzero modulus clusters."""
    entries = general_eigenvalues(a).nonzero_entries()
    mods = [e.modulus for e in entries]
    radii = [math.sqrt(hi * lo) for hi, lo in zip(mods, mods[1:])]
    if mods:
        radii.append(mods[-1] / 2)
    return radii
