"""Polynomial surrogates for ``t -> t^(1/(2n))``, functional-calculus transfer and Borel-Caratheodory checks."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np
from numpy.polynomial import Chebyshev, Polynomial
from scipy.optimize import minimize_scalar

from .errors import BadRadii, DegreeCap, SpectrumEscapesInterval
from .linalg import as_matrix, hermitian_eig

DEGREE_START = 4
DEGREE_CAP = 4096
DENSE_GRID_LIMIT = 2_000_000
REFINE_TOP = 8


@dataclass(frozen=True)
class PolyApprox:
    """Chebyshev interpolant of ``t^(1/(2n))`` on ``[0, R]``.

    ``coefficients`` are in the Chebyshev basis of ``interval``; evaluation
    stays in that basis (``__call__``) because the monomial form is
    hopelessly ill-conditioned at the degrees involved.  ``history`` lists
    ``(degree, sup_error)`` along the doubling search.
    """

    coefficients: np.ndarray
    degree: int
    interval: tuple[float, float]
    sup_error: float
    n: int
    grid_points: int
    history: tuple[tuple[int, float], ...] = ()

    @property
    def series(self) -> Chebyshev:
        return Chebyshev(self.coefficients, domain=list(self.interval))

    def __call__(self, t):
        return self.series(t)

    def monomial(self) -> Polynomial:
        """Monomial form in ``t`` (only sensible for small degrees)."""
        return self.series.convert(kind=Polynomial, domain=list(self.interval), window=list(self.interval))


def _root(t: np.ndarray, n: int) -> np.ndarray:
    return np.power(np.maximum(t, 0.0), 1.0 / (2 * n))


def _sup_error(series: Chebyshev, n: int, r_int: float) -> tuple[float, int]:
    d = series.degree()
    count = 10 * max(d, 1) ** 2 + 1
    if count <= DENSE_GRID_LIMIT:
        t = np.linspace(0.0, r_int, count)
    else:
        # node density of a uniform 10 d^2 grid near t = 0, Chebyshev-clustered elsewhere
        count = 40 * d + 1
        t = 0.5 * r_int * (1.0 - np.cos(np.linspace(0.0, math.pi, count)))
    err = np.abs(series(t) - _root(t, n))
    best = float(np.max(err))
    for idx in np.argsort(err)[-REFINE_TOP:]:
        lo = t[max(idx - 1, 0)]
        hi = t[min(idx + 1, t.size - 1)]
        if hi <= lo:
            continue
        res = minimize_scalar(
            lambda s: -abs(float(series(s)) - float(_root(np.array(s), n))),
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": 1e-14 * max(r_int, 1.0)},
        )
        best = max(best, -float(res.fun))
    return best, t.size


def approx_root(n: int, r_int: float, eps: float, *, degree_cap: int = DEGREE_CAP) -> PolyApprox:
    """Smallest degree ``4 * 2^k`` whose Chebyshev interpolant of ``t^(1/(2n))`` on ``[0, r_int]`` is within ``eps``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not r_int > 0 or not eps > 0:
        raise ValueError("r_int and eps must be positive")
    f = lambda t: _root(np.asarray(t), n)  # noqa: E731
    history = []
    d = DEGREE_START
    while d <= degree_cap:
        series = Chebyshev.interpolate(f, d, domain=[0.0, r_int])
        err, points = _sup_error(series, n, r_int)
        history.append((d, err))
        if err <= eps:
            return PolyApprox(series.coef.copy(), d, (0.0, float(r_int)), err, n, points, tuple(history))
        d *= 2
    raise DegreeCap(
        f"t^(1/{2 * n}) on [0, {r_int}] needs degree > {degree_cap} for eps = {eps} "
        f"(error {history[-1][1]:.3e} at degree {history[-1][0]})"
    )


class TransferCheck(NamedTuple):
    residual: float
    bound: float
    holds: bool
    pointwise: float


def calculus_transfer_check(s, p: PolyApprox, n: int, *, tol: float = 1e-9) -> TransferCheck:
    """``||S^(1/(2n)) - p(S)||`` for PSD ``S`` against ``p.sup_error``.

    Both functions are applied to one eigendecomposition of ``S``;
    ``pointwise`` is the largest ``|lambda^(1/(2n)) - p(lambda)|`` over the
    eigenvalues, which the operator residual should reproduce.
    """
    s = as_matrix(s, square=True)
    lo, hi = p.interval
    dec = hermitian_eig(s)
    w = dec.values
    slack = 1e-12 * max(hi, 1.0)
    if w.size and (w[0] < lo - slack or w[-1] > hi + slack):
        raise SpectrumEscapesInterval(f"spectrum [{w[0]:.3e}, {w[-1]:.3e}] not inside [{lo}, {hi}]")
    w = np.clip(w, lo, hi)
    v = dec.vectors
    exact = _root(w, n)
    approx = np.real(p(w))
    diff = (v * (exact - approx)) @ v.conj().T
    residual = float(np.linalg.norm(diff, 2)) if w.size else 0.0
    pointwise = float(np.max(np.abs(exact - approx))) if w.size else 0.0
    bound = p.sup_error + tol
    return TransferCheck(residual, bound, residual <= bound, pointwise)


def _as_callable(g) -> Callable[[np.ndarray], np.ndarray]:
    if callable(g):
        return g
    coef = np.asarray(g, dtype=complex)
    if coef.ndim != 1 or coef.size == 0:
        raise ValueError("polynomial coefficients must be a non-empty 1-D sequence")
    return lambda z: np.polynomial.polynomial.polyval(z, coef)


def _circle_max(func: Callable[[np.ndarray], np.ndarray], radius: float, grid: int) -> float:
    """Max of a real function of ``z`` on ``|z| = radius``, grid sample plus local refinement."""
    theta = 2 * math.pi * np.arange(grid) / grid
    vals = func(radius * np.exp(1j * theta))
    i = int(np.argmax(vals))
    h = 2 * math.pi / grid
    res = minimize_scalar(
        lambda th: -float(func(np.array([radius * np.exp(1j * th)]))[0]),
        bounds=(theta[i] - h, theta[i] + h),
        method="bounded",
        options={"xatol": 1e-13},
    )
    return max(float(vals[i]), -float(res.fun))


def _stable_max(func, radius: float, grid: int, rtol: float = 1e-10, max_grid: int = 1 << 20) -> tuple[float, float, int]:
    prev = _circle_max(func, radius, grid)
    while True:
        grid *= 2
        cur = _circle_max(func, radius, grid)
        change = abs(cur - prev)
        if change <= rtol * max(1.0, abs(cur)) or grid >= max_grid:
            return max(cur, prev), change, grid
        prev = cur


class BCResult(NamedTuple):
    lhs: float
    rhs: float
    holds: bool
    sup_re: float
    g0: float
    refinement_change: float


def borel_caratheodory_check(g, r: float, R: float, grid: int = 256) -> BCResult:
    """Compare ``max_{|z|<=r} |g|`` with ``2r/(R-r) max_{|z|<=R} Re g + (R+r)/(R-r) |g(0)|``.

    ``g`` is a coefficient sequence (ascending powers) or a callable on
    complex arrays.  Both maxima sit on the boundary circles (maximum
    principle for ``|g|`` and the harmonic ``Re g``); each is sampled on
    ``grid`` points, refined locally, and the grid doubled until the value
    moves by at most ``1e-10`` relative.
    """
    if not 0 < r < R:
        raise BadRadii(f"need 0 < r < R, got r = {r}, R = {R}")
    if grid < 64:
        raise ValueError("grid must be >= 64")
    func = _as_callable(g)
    lhs, ch1, _ = _stable_max(lambda z: np.abs(func(z)), r, grid)
    sup_re, ch2, _ = _stable_max(lambda z: np.real(func(z)), R, grid)
    g0 = float(abs(func(np.array([0j]))[0]))
    rhs = 2 * r / (R - r) * sup_re + (R + r) / (R - r) * g0
    return BCResult(lhs, rhs, lhs <= rhs + 1e-9, sup_re, g0, max(ch1, ch2))


@dataclass(frozen=True)
class GnReplay:
    approx: PolyApprox
    disc_max: float
    bc: BCResult
    refinement_change: float

    @property
    def holds(self) -> bool:
        return math.isfinite(self.disc_max) and self.bc.holds


def gn_bound_replay(n: int, eps: float) -> GnReplay:
    """Symmetrize ``approx_root(n, 1, eps)`` to ``g(z) = p(z^2)`` (even, real coefficients).

    ``g`` approximates ``|x|^(1/n)`` on ``[-1, 1]``.  Its maximum modulus on
    the closed unit disc is measured and compared with the budget obtained
    from the Borel-Caratheodory inequality with ``r = 1`` and ``R = 2``,
    whose ingredients (``max Re g`` on ``|z| = 2`` and ``|g(0)|``) are
    themselves measured.
    """
    p = approx_root(n, 1.0, eps)
    series = p.series
    g = lambda z: series(np.asarray(z) ** 2)  # noqa: E731
    bc = borel_caratheodory_check(g, 1.0, 2.0)
    return GnReplay(p, bc.lhs, bc, bc.refinement_change)


def random_polynomial(rng: np.random.Generator, max_degree: int = 20) -> np.ndarray:
    d = int(rng.integers(0, max_degree + 1))
    return rng.standard_normal(d + 1) + 1j * rng.standard_normal(d + 1)


def bc_sweep(trials: int, seed: int = 0, *, max_degree: int = 20, r_max: float = 4.0, grid: int = 256) -> list[tuple[np.ndarray, float, float, BCResult]]:
    """Seeded random Borel-Caratheodory checks with ``0 < r < R <= r_max``."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(trials):
        coef = random_polynomial(rng, max_degree)
        a, b = sorted(rng.uniform(0.05, r_max, size=2))
        if b - a < 1e-3:
            b = min(r_max, a + 0.1)
        out.append((coef, float(a), float(b), borel_caratheodory_check(coef, a, b, grid)))
    return out


def degree_table(ns: Sequence[int], r_int: float, eps: float) -> list[tuple[int, int | None, float]]:
    """``(n, degree or None if capped, last error)`` for each ``n``; used to compare flatness."""
    rows = []
    for n in ns:
        try:
            p = approx_root(n, r_int, eps)
            rows.append((n, p.degree, p.sup_error))
        except DegreeCap:
            rows.append((n, None, math.nan))
    return rows
