"""One-pass streaming form of the windowed direct-weight estimator.

The batch weights of :mod:`rdwo.core` never have to be materialized to keep
an estimate current: absorbing a new in-window sample rescales every earlier
weight by the same factor ``lam = S/(S + phi_hat)`` and gives the newcomer
``1 - lam``, where ``S`` is the running sum of absorbed endpoint margins.
The state is therefore a pair ``(S, estimate)`` per query point, updated in
constant time per sample.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .core import (
    ActiveSet,
    EstimatorConfig,
    NoSupportError,
    Sample,
    WeightSolution,
    _require_finite,
)

__all__ = [
    "Absorbed",
    "Skipped",
    "LedgerEntry",
    "LedgerDisabledError",
    "RecursiveState",
    "StreamingGrid",
]

# Largest double below 1.0; keeps the rescale factor strictly inside [0, 1)
# when phi_hat is so small that S/(S + phi_hat) rounds up to 1.0.
_ONE_BELOW = math.nextafter(1.0, 0.0)


class LedgerDisabledError(RuntimeError):
    """Weight reconstruction was requested from a state built without it."""


@dataclass(frozen=True)
class Absorbed:
    """Outcome of an update that took the sample in.

    ``reweight`` is the factor applied to every previously absorbed weight;
    ``new_weight`` is the weight given to the incoming sample.  They satisfy
    ``new_weight == 1 - reweight``, and ``reweight`` is zero exactly on the
    first absorption.
    """

    reweight: float
    new_weight: float


@dataclass(frozen=True)
class Skipped:
    """Outcome of an update that ignored an out-of-window sample."""


class LedgerEntry(NamedTuple):
    position: int
    index: int
    phi_hat: float
    y: float


class RecursiveState:
    """Streaming estimator state for a single query point.

    Constant memory unless ``diagnostics`` is set, in which case every
    absorbed sample is recorded so the implied weight vector can be
    reconstructed with :meth:`weights_snapshot`.
    """

    __slots__ = (
        "query_x",
        "config",
        "n_seen",
        "n_active",
        "support_sum",
        "support_sq_sum",
        "_estimate",
        "_ledger",
    )

    def __init__(self, query_x: float, config: EstimatorConfig, *, diagnostics: bool = False):
        self.query_x = _require_finite("query_x", query_x)
        self.config = config
        self.n_seen = 0
        self.n_active = 0
        self.support_sum = 0.0
        self.support_sq_sum = 0.0
        self._estimate = 0.0
        self._ledger: list[LedgerEntry] | None = [] if diagnostics else None

    @property
    def estimate(self) -> float | None:
        """Current estimate, or None while no sample has been absorbed."""
        return self._estimate if self.n_active > 0 else None

    def update(self, sample: Sample) -> Absorbed | Skipped:
        """Fold one sample into the state.

        Out-of-window samples (endpoint margin <= 0) leave the estimate
        untouched.  Absorbing a sample costs O(1) regardless of how many
        samples came before.
        """
        pos = self.n_seen
        d = self.config.delta - abs(self.query_x - sample.phi)
        self.n_seen = pos + 1
        if d <= 0.0:
            return Skipped()
        s_new = self.support_sum + d
        lam = self.support_sum / s_new
        if lam == 1.0:
            lam = _ONE_BELOW
        w_new = 1.0 - lam
        self._estimate = lam * self._estimate + w_new * sample.y
        self.support_sum = s_new
        self.support_sq_sum += d * d
        self.n_active += 1
        if self._ledger is not None:
            self._ledger.append(LedgerEntry(pos, sample.index, d, sample.y))
        return Absorbed(reweight=lam, new_weight=w_new)

    def weights_snapshot(self) -> WeightSolution:
        """Reconstruct the weight vector implied by the samples seen so far.

        The vector is positional over the stream: entry ``i`` belongs to the
        ``i``-th sample fed to :meth:`update`.  Requires diagnostics mode.
        """
        if self._ledger is None:
            raise LedgerDisabledError(
                "weights_snapshot requires a state built with diagnostics=True"
            )
        if self.n_active == 0:
            raise NoSupportError("no sample absorbed yet")
        weights = np.zeros(self.n_seen)
        margins = np.zeros(self.n_active)
        for slot, entry in enumerate(self._ledger):
            share = entry.phi_hat / self.support_sum
            weights[entry.position] = share
            margins[slot] = entry.phi_hat
        members = tuple(sorted(entry.index for entry in self._ledger))
        active_w = margins / self.support_sum
        numer = float(np.dot(active_w, margins))
        denom = math.sqrt(float(np.dot(active_w, active_w)))
        return WeightSolution(
            weights=weights, active=ActiveSet(members), objective=numer / denom
        )


class StreamingGrid:
    """Streaming estimator states for many query points at once.

    Vectorized over the grid; the per-point arithmetic is the same sequence
    of IEEE operations as :class:`RecursiveState`, so the estimates agree bit
    for bit with running one scalar state per grid point.
    """

    def __init__(self, xs: np.ndarray, config: EstimatorConfig):
        xs = np.asarray(xs, dtype=float)
        if xs.ndim != 1 or xs.size == 0:
            raise ValueError("xs must be a nonempty 1-D array")
        if not np.all(np.isfinite(xs)):
            raise ValueError("xs must be finite")
        self.xs = xs.copy()
        self.xs.setflags(write=False)
        self.config = config
        self.n_seen = 0
        self.n_active = np.zeros(xs.size, dtype=int)
        self.support_sum = np.zeros(xs.size)
        self.support_sq_sum = np.zeros(xs.size)
        self._estimates = np.zeros(xs.size)

    def update(self, phi: float, y: float) -> None:
        """Fold one sample into every grid point's state."""
        phi = _require_finite("phi", phi)
        y = _require_finite("y", y)
        d = self.config.delta - np.abs(self.xs - phi)
        mask = d > 0.0
        self.n_seen += 1
        if not mask.any():
            return
        s_new = self.support_sum + d
        denom = np.where(mask, s_new, 1.0)
        lam = self.support_sum / denom
        lam[lam == 1.0] = _ONE_BELOW
        w_new = 1.0 - lam
        est_new = lam * self._estimates + w_new * y
        self._estimates[mask] = est_new[mask]
        self.support_sum[mask] = s_new[mask]
        sq = d * d
        self.support_sq_sum[mask] += sq[mask]
        self.n_active[mask] += 1

    def extend(self, phis: np.ndarray, ys: np.ndarray) -> None:
        phis = np.asarray(phis, dtype=float)
        ys = np.asarray(ys, dtype=float)
        if phis.shape != ys.shape or phis.ndim != 1:
            raise ValueError("phis and ys must be aligned 1-D arrays")
        for phi, y in zip(phis, ys):
            self.update(float(phi), float(y))

    def estimates(self) -> np.ndarray:
        """Per-point estimates, nan where no sample has been absorbed."""
        return np.where(self.n_active > 0, self._estimates, np.nan)

    def active_counts(self) -> np.ndarray:
        return self.n_active.copy()

    def objectives(self) -> np.ndarray:
        """Per-point achieved objective values, nan where unsupported.

        For the closed-form weights the achieved objective reduces to the
        Euclidean norm of the absorbed margins, so it falls out of the
        running sum of squares.
        """
        return np.where(self.n_active > 0, np.sqrt(self.support_sq_sum), np.nan)

    def support_sums(self) -> np.ndarray:
        return self.support_sum.copy()
