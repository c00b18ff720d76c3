"""Infinite-matrix operator generators, corner truncations and truncation studies.

Every generator is an entry rule ``entry(i, j)`` on 1-based indices together
with an upper bound on the operator norm and on the discarded tail
``||A - A_m||``.  Statements about the infinite operator are reported as
measurements on the pair ``(A_m, A_M)`` of corners, compared inside the
``M``-dimensional space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .errors import NonCompactOperator, NormBoundViolated, TruncationTooSmall
from .linalg import operator_norm
from .matfun import power_sequence

FINITE_BAND = "finite-band compact"
NON_COMPACT = "non-compact"
QUASINILPOTENT = "quasinilpotent-compact"
COMPACT_CLASSES = (FINITE_BAND, QUASINILPOTENT)

# tau_{m/2} threshold for compact generators scaled to norm 0.9, see collective_tail_diagnostic
TAIL_THRESHOLD = 0.1


@dataclass(frozen=True)
class OperatorGenerator:
    """Entry rule for an operator on l2(N), 1-based indices.

    ``family`` marks discretizations whose entries depend on the truncation
    size (the midpoint Volterra matrices).  For those ``truncate(m)`` is the
    m-point discretization, not a corner of one fixed infinite matrix, so
    corner-comparison studies reject them.
    """

    name: str
    entry: Callable[[int, int], complex]
    norm_bound: float
    tail_bound: Callable[[int], float]
    compactness_class: str
    params: dict = field(default_factory=dict)
    known_spectrum: tuple[tuple[complex, int], ...] | None = None
    family: Callable[[int], np.ndarray] | None = None
    description: str = ""

    @property
    def is_compact(self) -> bool:
        return self.compactness_class in COMPACT_CLASSES

    def truncate(self, m: int) -> np.ndarray:
        return truncate(self, m)


def truncate(gen: OperatorGenerator, m: int) -> np.ndarray:
    """The ``m x m`` leading corner ``(a_ij)_{i,j <= m}``."""
    if m < 1:
        raise ValueError("truncation size must be >= 1")
    if gen.family is not None:
        return np.array(gen.family(m), dtype=complex)
    out = np.empty((m, m), dtype=complex)
    for i in range(m):
        for j in range(m):
            out[i, j] = gen.entry(i + 1, j + 1)
    return out


def scaled(gen: OperatorGenerator, target: float = 0.9) -> OperatorGenerator:
    """Multiply the operator by ``target / norm_bound`` so that ``||A|| <= target``."""
    if gen.norm_bound <= 0:
        return gen
    c = target / gen.norm_bound
    entry, tail, fam = gen.entry, gen.tail_bound, gen.family
    spectrum = None if gen.known_spectrum is None else tuple((c * z, k) for z, k in gen.known_spectrum)
    return replace(
        gen,
        entry=lambda i, j: c * entry(i, j),
        norm_bound=target,
        tail_bound=lambda m: c * tail(m),
        params={**gen.params, "scale": c},
        known_spectrum=spectrum,
        family=None if fam is None else (lambda m: c * fam(m)),
    )


# ---- catalogue ------------------------------------------------------------


def left_shift(c: float = 1.0) -> OperatorGenerator:
    return OperatorGenerator(
        name="left-shift",
        entry=lambda i, j: complex(c) if j == i + 1 else 0j,
        norm_bound=abs(c),
        tail_bound=lambda m: abs(c),
        compactness_class=NON_COMPACT,
        params={"c": c},
        known_spectrum=None,
        description="c*L, L e_1 = 0, L e_{i+1} = e_i",
    )


def example2_weight(i: int) -> float:
    """Subdiagonal weight ``w_i`` of the non-convergent weighted shift (``T e_i = w_i e_{i+1}``)."""
    if i < 1:
        raise ValueError("weights are indexed from 1")
    if i == 1:
        return 0.5
    if i & (i - 1) == 0:
        return 2.0 ** -(i - 1)
    return 2.0


def example2_shift() -> OperatorGenerator:
    return OperatorGenerator(
        name="example2-shift",
        entry=lambda i, j: complex(example2_weight(j)) if i == j + 1 else 0j,
        norm_bound=2.0,
        tail_bound=lambda m: 2.0,
        compactness_class=NON_COMPACT,
        description="weighted shift, w_1 = 1/2, w_{2^k} = 2^-(2^k - 1), otherwise 2",
    )


def weighted_shift(weight: Callable[[int], float] | None = None, *, c: float = 1.0, name: str = "weighted-shift") -> OperatorGenerator:
    """Forward weighted shift ``e_i -> w_i e_{i+1}``; default weights ``c / i``.

    ``tail_bound`` assumes ``|w_i|`` non-increasing; pass a custom generator
    for other weight rules.
    """
    if weight is None:
        weight = lambda i: c / i  # noqa: E731
        norm, tail, params = abs(c), (lambda m: abs(c) / m), {"c": c}
    else:
        norm = abs(weight(1))
        tail, params = (lambda m: abs(weight(m))), {}
    return OperatorGenerator(
        name=name,
        entry=lambda i, j: complex(weight(j)) if i == j + 1 else 0j,
        norm_bound=norm,
        tail_bound=tail,
        compactness_class=QUASINILPOTENT,
        params=params,
        known_spectrum=((0j, 0),),
        description="weighted shift e_i -> w_i e_{i+1}",
    )


def diagonal(c: float = 1.0, q: float = 0.5) -> OperatorGenerator:
    return OperatorGenerator(
        name="diagonal",
        entry=lambda i, j: complex(c * q**i) if i == j else 0j,
        norm_bound=abs(c * q),
        tail_bound=lambda m: abs(c) * q ** (m + 1),
        compactness_class=FINITE_BAND,
        params={"c": c, "q": q},
        known_spectrum=tuple((complex(c * q**i), 1) for i in range(1, 9)),
        description="diag(c q^i)",
    )


def bidiagonal_compact(c: float = 1.0, q: float = 0.5) -> OperatorGenerator:
    """Upper bidiagonal, ``a_ii = c q^i`` and ``a_{i,i+1} = c / (i+1)``; spectrum ``{c q^i}``."""

    def entry(i, j):
        if i == j:
            return complex(c * q**i)
        if j == i + 1:
            return complex(c / (i + 1))
        return 0j

    return OperatorGenerator(
        name="bidiagonal-compact",
        entry=entry,
        norm_bound=abs(c) * (q + 0.5),
        tail_bound=lambda m: abs(c) * (q ** (m + 1) + 1.0 / (m + 1)),
        compactness_class=FINITE_BAND,
        params={"c": c, "q": q},
        known_spectrum=tuple((complex(c * q**i), 1) for i in range(1, 9)),
        description="diag(c q^i) plus superdiagonal c/(i+1)",
    )


def _legendre_volterra(i: int, j: int) -> float:
    # (V f)(x) = int_0^x f on L2[0,1] in the orthonormal shifted Legendre basis
    n, k = i - 1, j - 1
    if n == 0 and k == 0:
        return 0.5
    if n == k + 1:
        return 0.5 / math.sqrt((2 * k + 1) * (2 * k + 3))
    if k >= 1 and n == k - 1:
        return -0.5 / math.sqrt((2 * k - 1) * (2 * k + 1))
    return 0.0


def volterra_legendre(c: float = 1.0) -> OperatorGenerator:
    return OperatorGenerator(
        name="volterra-legendre",
        entry=lambda i, j: complex(c * _legendre_volterra(i, j)),
        norm_bound=2.0 * abs(c) / math.pi,
        tail_bound=lambda m: abs(c) / math.sqrt(4.0 * m * m - 1.0),
        compactness_class=QUASINILPOTENT,
        params={"c": c},
        known_spectrum=((0j, 0),),
        description="Volterra integration on L2[0,1], shifted Legendre basis (tridiagonal)",
    )


def _volterra_midpoint(m: int, c: float) -> np.ndarray:
    return np.tril(np.full((m, m), c / m, dtype=complex), -1)


def volterra(c: float = 1.0) -> OperatorGenerator:
    """Midpoint-rule Volterra discretization: ``(1/m)`` strictly below the diagonal.

    Nilpotent at every finite ``m``; entries depend on ``m``.
    """
    return OperatorGenerator(
        name="volterra",
        entry=lambda i, j: complex(c) if j < i else 0j,
        norm_bound=2.0 * abs(c) / math.pi,
        tail_bound=lambda m: 2.0 * abs(c) / math.pi,
        compactness_class=QUASINILPOTENT,
        params={"c": c},
        known_spectrum=((0j, 0),),
        family=lambda m: _volterra_midpoint(m, c),
        description="m-point midpoint rule for int_0^x on [0,1], entries 1/m for j < i",
    )


def _jordan_sum_matrix(blocks) -> np.ndarray:
    size = sum(k for _, k in blocks)
    out = np.zeros((size, size), dtype=complex)
    pos = 0
    for lam, k in blocks:
        out[pos : pos + k, pos : pos + k] = lam * np.eye(k) + np.eye(k, k=1)
        pos += k
    return out


def jordan_sum(blocks: Sequence[tuple[complex, int]] = ((0.5, 3), (0.2, 2), (0.0, 2))) -> OperatorGenerator:
    """Direct sum of Jordan blocks ``J_k(lambda)`` followed by zeros."""
    blocks = tuple((complex(lam), int(k)) for lam, k in blocks)
    dense = _jordan_sum_matrix(blocks)
    size = dense.shape[0]
    norm = operator_norm(dense) if size else 0.0

    def entry(i, j):
        return dense[i - 1, j - 1] if i <= size and j <= size else 0j

    spectrum: dict[complex, int] = {}
    for lam, k in blocks:
        spectrum[lam] = spectrum.get(lam, 0) + k
    return OperatorGenerator(
        name="jordan-sum",
        entry=entry,
        norm_bound=norm,
        tail_bound=lambda m: norm if m < size else 0.0,
        compactness_class=FINITE_BAND,
        params={"blocks": [[lam.real, lam.imag, k] for lam, k in blocks]},
        known_spectrum=tuple(spectrum.items()),
        description="finite direct sum of Jordan blocks, zero beyond",
    )


_FACTORIES: dict[str, Callable[..., OperatorGenerator]] = {
    "left-shift": left_shift,
    "example2-shift": example2_shift,
    "weighted-shift": weighted_shift,
    "diagonal": diagonal,
    "bidiagonal-compact": bidiagonal_compact,
    "volterra-legendre": volterra_legendre,
    "volterra": volterra,
    "jordan-sum": jordan_sum,
}


def zoo() -> list[OperatorGenerator]:
    return [factory() for factory in _FACTORIES.values()]


def get_generator(name: str, params: dict | None = None) -> OperatorGenerator:
    """Look up a generator by name; ``params`` go to its factory (``scale`` is applied last)."""
    if name not in _FACTORIES:
        raise KeyError(f"unknown generator {name!r}; known: {sorted(_FACTORIES)}")
    params = dict(params or {})
    target = params.pop("scale_to", None)
    if name == "jordan-sum" and "blocks" in params:
        params["blocks"] = [(complex(b[0], b[1]) if len(b) == 3 else b[0], b[-1]) for b in params["blocks"]]
    gen = _FACTORIES[name](**params)
    return scaled(gen, float(target)) if target is not None else gen


# ---- studies --------------------------------------------------------------


@dataclass(frozen=True)
class TruncationStudy:
    m: int
    M: int
    n_grid: tuple[int, ...]
    diffs: tuple[float, ...]
    sup_diff: float
    tail_surrogate: float
    bound_value: float

    @property
    def holds(self) -> bool:
        return self.sup_diff <= self.bound_value + 1e-8


def _check_theorem_input(gen: OperatorGenerator, counterexample: bool) -> None:
    if not gen.is_compact and not counterexample:
        raise NonCompactOperator(f"{gen.name} is {gen.compactness_class}; pass counterexample=True to study it")


def uniform_power_bound_study(
    gen: OperatorGenerator,
    m: int,
    M: int | None = None,
    n_grid: Sequence[int] = tuple(range(1, 65)),
    *,
    counterexample: bool = False,
) -> TruncationStudy:
    """Measure ``max_n ||A_m^n - A_M^n||`` against ``||A_m - A|| / (1 - ||A||)^2``.

    ``A_m`` is zero-padded to size ``M`` (default ``4 m``).  The tail
    surrogate is ``max(tail_bound(m), ||A_M - A_m||)``.
    """
    _check_theorem_input(gen, counterexample)
    if gen.family is not None:
        raise ValueError(f"{gen.name} is a size-dependent family; its corners are not nested")
    if gen.norm_bound >= 1:
        raise NormBoundViolated(f"norm bound {gen.norm_bound} of {gen.name} is not below 1")
    M = 4 * m if M is None else M
    if m < 1 or M < m:
        raise ValueError("need 1 <= m <= M")
    ns = sorted({int(n) for n in n_grid})
    if not ns or ns[0] < 1:
        raise ValueError("n_grid must hold positive integers")
    big = truncate(gen, M)
    small = np.zeros_like(big)
    small[:m, :m] = big[:m, :m]
    surrogate = max(gen.tail_bound(m), operator_norm(big - small))
    diffs = []
    p_big = np.eye(M, dtype=complex)
    p_small = np.eye(M, dtype=complex)
    want = set(ns)
    for n in range(1, ns[-1] + 1):
        p_big = p_big @ big
        p_small = p_small @ small
        if n in want:
            diffs.append(operator_norm(p_small - p_big))
    return TruncationStudy(
        m=m,
        M=M,
        n_grid=tuple(ns),
        diffs=tuple(diffs),
        sup_diff=max(diffs),
        tail_surrogate=surrogate,
        bound_value=surrogate / (1.0 - gen.norm_bound) ** 2,
    )


class LeftShiftRow(NamedTuple):
    n: int
    norm: float
    corner: float
    eig_deviation: float
    tail_diag_deviation: float


@dataclass(frozen=True)
class LeftShiftReport:
    c: float
    m: int
    rows: tuple[LeftShiftRow, ...]
    tol: float = 1e-12

    @property
    def passed(self) -> bool:
        c = self.c
        for r in self.rows:
            expect = c if r.n < self.m else 0.0
            if abs(r.norm - expect) > self.tol or abs(r.corner) > self.tol:
                return False
            if r.eig_deviation > self.tol or r.tail_diag_deviation > self.tol:
                return False
        return True


def left_shift_projection_check(c: float, m: int, n_list: Sequence[int]) -> LeftShiftReport:
    """Check ``|(cL)^n|^(1/n) = c * (projection onto coordinates > n)`` on the ``m``-corner.

    Per row: ``||B_n||``, ``<B_n e_1, e_1>``, the distance of the spectrum of
    ``B_n`` from ``{0, c}``, and the worst deviation of ``<B_n e_k, e_k>``
    from ``c`` over ``k > n``.  For ``n >= m`` the corner is nilpotent and
    ``B_n = 0``.
    """
    if not 0 < c < 1:
        raise ValueError("c must lie in (0, 1)")
    a = truncate(left_shift(c), m)
    ns = sorted({int(n) for n in n_list})
    rows = []
    for rec in power_sequence(a, ns):
        b = rec.B_n
        w = np.linalg.eigvalsh(b)
        eig_dev = float(np.max(np.minimum(np.abs(w), np.abs(w - c))))
        d = np.real(np.diag(b))[rec.n :]
        tail_dev = float(np.max(np.abs(d - c))) if d.size else 0.0
        rows.append(LeftShiftRow(rec.n, operator_norm(b), float(np.real(b[0, 0])), eig_dev, tail_dev))
    return LeftShiftReport(c, m, tuple(rows))


class OscillationRow(NamedTuple):
    p: int
    value: float
    expected: float
    error: float
    kind: str
    offdiag: float


def _dyadic_kind(p: int) -> str:
    if p & (p - 1) == 0:
        return "2^n"
    if (p + 1) & p == 0:
        return "2^n-1"
    return "other"


def example2_oscillation(m_truncation: int, exponent_list: Sequence[int]) -> list[OscillationRow]:
    """``<|T^p|^(1/p) e_1, e_1>`` on the ``m``-corner of the non-convergent weighted shift.

    ``(T^p)^* T^p`` is diagonal, so the entry equals ``||T^p e_1||^(1/p)``.
    Powers are accumulated once with power-of-two rescaling (exact); the
    ``offdiag`` column records the largest relative off-diagonal entry of
    ``(T^p)^* T^p`` as a structure check.  ``expected`` is the closed form
    ``(w_1 ... w_p)^(1/p)``, which is ``2^(-1/p)`` at ``p = 2^n - 1`` and
    ``1/2`` at ``p = 2^n``.
    """
    ps = sorted({int(p) for p in exponent_list})
    if not ps or ps[0] < 1:
        raise ValueError("exponents must be positive")
    if m_truncation <= ps[-1] + 1:
        raise TruncationTooSmall(f"m = {m_truncation} must exceed max exponent + 1 = {ps[-1] + 1}")
    t = truncate(example2_shift(), m_truncation)
    want = set(ps)
    g = np.eye(m_truncation, dtype=complex)
    log2_scale = 0
    log_weights = 0.0
    rows = []
    for p in range(1, ps[-1] + 1):
        g = t @ g
        log_weights += math.log(example2_weight(p))
        peak = float(np.max(np.abs(g)))
        e = math.frexp(peak)[1]
        if abs(e) > 30:
            g = g * 2.0**-e
            log2_scale += e
        if p not in want:
            continue
        col = float(np.linalg.norm(g[:, 0]))
        value = math.exp((math.log(col) + log2_scale * math.log(2.0)) / p)
        h = g.conj().T @ g
        diag = np.abs(np.diag(h))
        off = np.abs(h - np.diag(np.diag(h)))
        offdiag = float(np.max(off) / np.max(diag)) if np.max(diag) > 0 else 0.0
        expected = math.exp(log_weights / p)
        rows.append(OscillationRow(p, value, expected, abs(value - expected), _dyadic_kind(p), offdiag))
    return rows


class TailRow(NamedTuple):
    k: int
    tau: float


def collective_tail_diagnostic(
    gen: OperatorGenerator,
    m: int,
    n_max: int,
    k_grid: Sequence[int],
) -> list[TailRow]:
    """``tau_k = max_{n <= n_max} ||(I - P_k) B_n||`` on the ``m``-corner.

    ``P_k`` keeps the first ``k`` coordinates.  Shrinking tails across all
    ``n`` at once is the finite stand-in for collective compactness of
    ``{B_n}``.  For compact generators scaled to norm 0.9 and ``m = 64`` the
    measured ``tau_{m/2}`` stays below ``TAIL_THRESHOLD``; for the shifts it
    stays at the norm.
    """
    ks = [int(k) for k in k_grid]
    if ks != sorted(ks) or not ks or ks[0] < 0 or ks[-1] > m:
        raise ValueError("k_grid must be ascending within [0, m]")
    a = truncate(gen, m)
    tau = np.zeros(len(ks))
    for rec in power_sequence(a, range(1, n_max + 1)):
        b = rec.B_n
        for idx, k in enumerate(ks):
            if k < m:
                tau[idx] = max(tau[idx], operator_norm(b[k:, :]))
    return [TailRow(k, float(t)) for k, t in zip(ks, tau)]
