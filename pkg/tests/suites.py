"""Seeded matrix suites shared by the acceptance and property tests."""

from __future__ import annotations

import numpy as np


def jordan(lam: complex, k: int) -> np.ndarray:
    return lam * np.eye(k, dtype=complex) + np.eye(k, k=1, dtype=complex)


def direct_sum(*blocks) -> np.ndarray:
    blocks = [np.atleast_2d(np.asarray(b, dtype=complex)) for b in blocks]
    n = sum(b.shape[0] for b in blocks)
    out = np.zeros((n, n), dtype=complex)
    pos = 0
    for b in blocks:
        k = b.shape[0]
        out[pos : pos + k, pos : pos + k] = b
        pos += k
    return out


def random_scaled(rng: np.random.Generator, n: int, target: float = 0.9) -> np.ndarray:
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return target * a / np.linalg.norm(a, 2)


def scaled_to(a: np.ndarray, target: float = 0.9) -> np.ndarray:
    return target * a / np.linalg.norm(a, 2)


def spectrum_suite(seed: int = 20240501, count: int = 50) -> list[tuple[str, np.ndarray]]:
    """50 random complex matrices (dim 2..10, norm 0.9) plus Jordan direct sums (norm <= 0.9)."""
    rng = np.random.default_rng(seed)
    suite = [(f"random-{i}", random_scaled(rng, int(rng.integers(2, 11)))) for i in range(count)]
    jordans = {
        "J2(0.6)+0.3": direct_sum(jordan(0.6, 2), [[0.3]]),
        "J3(0.5)+J1(0.2)": direct_sum(jordan(0.5, 3), [[0.2]]),
        "J2(0.5)+J2(-0.5)": direct_sum(jordan(0.5, 2), jordan(-0.5, 2)),
        "J2(0.7i)+J3(0.3)+0": direct_sum(jordan(0.7j, 2), jordan(0.3, 3), [[0.0]]),
        "J4(0.5)+0.2+0.1i": direct_sum(jordan(0.5, 4), [[0.2]], [[0.1j]]),
        "J3(0)+0.4": direct_sum(jordan(0.0, 3), [[0.4]]),
    }
    suite += [(name, scaled_to(a)) for name, a in jordans.items()]
    return suite
