"""Search-based certification of the closed-form weights.

The maximizers here know nothing about the closed-form solution: they climb
the objective directly through multi-start local search over pairwise mass
transfers that preserve the weight-sum constraint.  They are intentionally
naive and only meant for small instances, as an independent check that the
algebraic optimum is what it claims to be.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .core import EstimatorConfig, NoSupportError, Sample, centered_distance

__all__ = [
    "OracleForm",
    "OracleResult",
    "maximize_simplex",
    "maximize_signed",
    "random_instance",
    "MAX_ORACLE_SAMPLES",
]

MAX_ORACLE_SAMPLES = 12

# Search schedule: transfer fractions (or absolute amounts, for the signed
# form) are halved from _STEP_START until _STEP_MIN, which resolves weights
# far below the certification tolerances.
_STEP_START = 0.5
_STEP_MIN = 1e-6


class OracleForm(Enum):
    SIMPLEX = "simplex"
    SIGNED = "signed"


@dataclass(frozen=True)
class OracleResult:
    """Best point found by a maximizer.

    ``evaluations`` counts objective evaluations spent, never exceeding the
    budget the maximizer was called with.
    """

    weights: tuple[float, ...]
    objective: float
    evaluations: int
    form: OracleForm


def _margins(x: float, samples: Sequence[Sample], config: EstimatorConfig) -> list[float]:
    n = len(samples)
    if n == 0:
        raise ValueError("samples must be nonempty")
    if n > MAX_ORACLE_SAMPLES:
        raise ValueError(
            f"oracle search is limited to {MAX_ORACLE_SAMPLES} samples, got {n}"
        )
    ph = [centered_distance(x, s.phi, config).phi_hat for s in samples]
    if max(ph) <= 0.0:
        raise NoSupportError(f"no sample strictly inside the window around x={x!r}")
    return ph


def _simplex_starts(rng: np.random.Generator, n: int) -> list[np.ndarray]:
    return [np.full(n, 1.0 / n)] + [rng.dirichlet(np.ones(n)) for _ in range(2)]


def _signed_starts(rng: np.random.Generator, n: int) -> list[np.ndarray]:
    alternating = np.where(np.arange(n) % 2 == 0, 2.0, -1.0)
    alternating /= alternating.sum()
    return [np.full(n, 1.0 / n), alternating, rng.dirichlet(np.ones(n))]


def _climb_simplex(
    w: list[float], ph: list[float], budget: int, used: int
) -> tuple[list[float], float, int]:
    """Greedy pairwise-transfer ascent of sum(w*ph)/sqrt(sum(w^2))."""
    n = len(w)
    a = sum(wi * pi for wi, pi in zip(w, ph))
    b = sum(wi * wi for wi in w)
    cur = a / math.sqrt(b)
    step = _STEP_START
    while step >= _STEP_MIN and used < budget:
        improved = False
        for i in range(n):
            for j in range(n):
                if j == i or w[i] <= 0.0:
                    continue
                for t in (step * w[i], w[i]):
                    if used >= budget:
                        return w, _simplex_objective(w, ph), used
                    used += 1
                    a2 = a + t * (ph[j] - ph[i])
                    b2 = b + 2.0 * t * (w[j] - w[i]) + 2.0 * t * t
                    cand = a2 / math.sqrt(b2)
                    if cand > cur + 1e-14 * (1.0 + abs(cur)):
                        w[i] -= t
                        w[j] += t
                        a, b, cur = a2, b2, cand
                        improved = True
                        break
        if not improved:
            step *= 0.5
            # Refresh the running sums so incremental rounding cannot pile up.
            a = sum(wi * pi for wi, pi in zip(w, ph))
            b = sum(wi * wi for wi in w)
            cur = a / math.sqrt(b)
    return w, _simplex_objective(w, ph), used


def _simplex_objective(w: Sequence[float], ph: Sequence[float]) -> float:
    a = sum(wi * pi for wi, pi in zip(w, ph))
    b = sum(wi * wi for wi in w)
    return a / math.sqrt(b)


def _signed_objective(w: Sequence[float], dist: Sequence[float], delta: float) -> float:
    p = sum(abs(wi) * di for wi, di in zip(w, dist))
    b = sum(wi * wi for wi in w)
    return (delta - p) / math.sqrt(b)


def _climb_signed(
    w: list[float], dist: list[float], delta: float, budget: int, used: int
) -> tuple[list[float], float, int]:
    """Greedy pairwise-transfer ascent of (delta - sum(|w|*dist))/sqrt(sum(w^2)).

    Weights may take any sign; only the sum-to-one constraint is preserved.
    Ordered pairs with a positive transfer cover both move directions, and
    the full transfer ``t = w[i]`` lets the search zero a coordinate exactly.
    """
    n = len(w)
    p = sum(abs(wi) * di for wi, di in zip(w, dist))
    b = sum(wi * wi for wi in w)
    cur = (delta - p) / math.sqrt(b)
    step = _STEP_START
    while step >= _STEP_MIN and used < budget:
        improved = False
        for i in range(n):
            for j in range(n):
                if j == i:
                    continue
                for t in (step, w[i]):
                    if t == 0.0:
                        continue
                    if used >= budget:
                        return w, _signed_objective(w, dist, delta), used
                    used += 1
                    wi2 = w[i] - t
                    wj2 = w[j] + t
                    p2 = (
                        p
                        + (abs(wi2) - abs(w[i])) * dist[i]
                        + (abs(wj2) - abs(w[j])) * dist[j]
                    )
                    b2 = b + 2.0 * t * (w[j] - w[i]) + 2.0 * t * t
                    cand = (delta - p2) / math.sqrt(b2)
                    if cand > cur + 1e-14 * (1.0 + abs(cur)):
                        w[i] = wi2
                        w[j] = wj2
                        p, b, cur = p2, b2, cand
                        improved = True
                        break
        if not improved:
            step *= 0.5
            p = sum(abs(wi) * di for wi, di in zip(w, dist))
            b = sum(wi * wi for wi in w)
            cur = (delta - p) / math.sqrt(b)
    return w, _signed_objective(w, dist, delta), used


def maximize_simplex(
    x: float,
    samples: Sequence[Sample],
    config: EstimatorConfig,
    *,
    budget: int = 100_000,
    seed: int = 0,
) -> OracleResult:
    """Maximize the simplex-form objective by multi-start local search.

    Restricted to nonnegative weights summing to one.  With the default
    budget the search resolves the optimum far beyond the certification
    tolerances for instances up to ``MAX_ORACLE_SAMPLES`` samples.
    """
    if budget < 1:
        raise ValueError("budget must be positive")
    ph = _margins(x, samples, config)
    rng = np.random.default_rng(seed)
    used = 0
    best_w: list[float] | None = None
    best = -math.inf
    for start in _simplex_starts(rng, len(ph)):
        if used >= budget and best_w is not None:
            break
        w, val, used = _climb_simplex([float(v) for v in start], ph, budget, used)
        if val > best:
            best, best_w = val, w
    assert best_w is not None
    return OracleResult(
        weights=tuple(best_w), objective=best, evaluations=used, form=OracleForm.SIMPLEX
    )


def maximize_signed(
    x: float,
    samples: Sequence[Sample],
    config: EstimatorConfig,
    *,
    budget: int = 100_000,
    seed: int = 0,
) -> OracleResult:
    """Maximize the signed-form objective by multi-start local search.

    Weights may take any sign.  The signed optimum never exceeds the simplex
    optimum, which certification leans on.
    """
    if budget < 1:
        raise ValueError("budget must be positive")
    _margins(x, samples, config)
    dist = [centered_distance(x, s.phi, config).phi_tilde for s in samples]
    rng = np.random.default_rng(seed)
    used = 0
    best_w: list[float] | None = None
    best = -math.inf
    for start in _signed_starts(rng, len(dist)):
        if used >= budget and best_w is not None:
            break
        w, val, used = _climb_signed(
            [float(v) for v in start], dist, config.delta, budget, used
        )
        if val > best:
            best, best_w = val, w
    assert best_w is not None
    return OracleResult(
        weights=tuple(best_w), objective=best, evaluations=used, form=OracleForm.SIGNED
    )


def random_instance(
    rng: np.random.Generator, n_samples: int | None = None
) -> tuple[float, list[Sample], EstimatorConfig]:
    """One random problem instance with a guaranteed nonempty active set.

    The window half-width, query point, and regressors are drawn so that
    roughly half the samples land inside the window; draws are repeated until
    at least one does.  Outputs are standard normal.
    """
    if n_samples is None:
        n = int(rng.integers(2, MAX_ORACLE_SAMPLES + 1))
    else:
        n = int(n_samples)
        if not 1 <= n <= MAX_ORACLE_SAMPLES:
            raise ValueError(f"n_samples must be in [1, {MAX_ORACLE_SAMPLES}], got {n}")
    delta = float(rng.uniform(0.5, 1.5))
    x = float(rng.uniform(-1.0, 1.0))
    while True:
        phis = rng.uniform(x - 2.0 * delta, x + 2.0 * delta, size=n)
        if np.any(np.abs(x - phis) < delta):
            break
    ys = rng.standard_normal(n)
    samples = [Sample(index=k + 1, phi=float(phis[k]), y=float(ys[k])) for k in range(n)]
    return x, samples, EstimatorConfig(delta=delta, l1=1.0)
