"""Post-processing of evolved operators: transport and quench observables."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .pauli_algebra import InvalidArgumentsError
from .pauli_sum import PauliSum

__all__ = [
    "CorrelationProfile",
    "DegenerateProfileError",
    "DiffusionFit",
    "InsufficientDataError",
    "correlation_profile",
    "diffusion_constant",
    "extrapolate_zero_threshold",
    "magnetization",
    "msd",
    "weight_spectrum_series",
]


class DegenerateProfileError(ArithmeticError):
    """The correlation profile cannot be normalized (vanishing total)."""


class InsufficientDataError(ValueError):
    pass


@dataclass
class CorrelationProfile:
    """Correlations ``C_j`` at time ``t``, normalized to sum to one.

    ``raw`` keeps the unnormalized overlaps ``Tr[q_j q_c(t)] / 2**n``.
    """

    t: float
    values: np.ndarray
    raw: np.ndarray

    @property
    def total(self) -> float:
        return float(self.raw.sum())


def correlation_profile(q_evolved: PauliSum, densities: Sequence[PauliSum], t: float = 0.0) -> CorrelationProfile:
    """Overlaps of the evolved central density with each ``q_j``, renormalized at time ``t``.

    The denominator is the sum of the raw overlaps at the same time, which
    absorbs norm lost to truncation.
    """
    raw = np.array([q.overlap(q_evolved).real for q in densities])
    total = raw.sum()
    if not np.isfinite(total) or total == 0:
        raise DegenerateProfileError(f"correlation total is {total} at t={t}")
    return CorrelationProfile(t, raw / total, raw)


def msd(profile: CorrelationProfile | np.ndarray, positions: np.ndarray | None = None) -> float:
    """Spatial variance ``sum_j C_j j^2 - (sum_j C_j j)^2`` with 1-based ``j``."""
    c = profile.values if isinstance(profile, CorrelationProfile) else np.asarray(profile, dtype=float)
    j = np.arange(1, len(c) + 1, dtype=float) if positions is None else np.asarray(positions, dtype=float)
    mean = np.dot(c, j)
    return float(np.dot(c, j * j) - mean * mean)


@dataclass
class DiffusionFit:
    window: tuple[float, float]
    slope: float
    intercept: float
    residual: float
    n_samples: int

    @property
    def D(self) -> float:
        return self.slope / 2


def diffusion_constant(
    times: Sequence[float], d2: Sequence[float], window: tuple[float, float] = (10.0, 20.0)
) -> DiffusionFit:
    """Unweighted least-squares line through ``d^2(t)`` inside ``window``; ``D`` is half the slope."""
    lo, hi = window
    if not lo < hi:
        raise InvalidArgumentsError(f"fit window must satisfy lo < hi, got {window}")
    t = np.asarray(times, dtype=float)
    y = np.asarray(d2, dtype=float)
    eps = 1e-9 * max(1.0, abs(hi))
    sel = (t >= lo - eps) & (t <= hi + eps)
    if sel.sum() < 2 or np.ptp(t[sel]) == 0:
        raise InsufficientDataError(f"need >= 2 distinct samples in window {window}, got {int(sel.sum())}")
    design = np.column_stack([t[sel], np.ones(sel.sum())])
    (slope, intercept), *_ = np.linalg.lstsq(design, y[sel], rcond=None)
    resid = y[sel] - (slope * t[sel] + intercept)
    return DiffusionFit((lo, hi), float(slope), float(intercept), float(np.sqrt(np.mean(resid**2))), int(sel.sum()))


def extrapolate_zero_threshold(points: Sequence[tuple[float, float]], n_fit: int = 3) -> float:
    """Intercept at ``delta/dt -> 0`` of a line through the ``n_fit`` smallest abscissae."""
    pts = sorted((float(x), float(y)) for x, y in points)
    if len(pts) < n_fit:
        raise InsufficientDataError(f"need at least {n_fit} points, got {len(pts)}")
    x = np.array([p[0] for p in pts[:n_fit]])
    y = np.array([p[1] for p in pts[:n_fit]])
    if len(np.unique(x)) < n_fit:
        raise InsufficientDataError("duplicated abscissae make the fit degenerate")
    design = np.column_stack([x, np.ones(n_fit)])
    (_, intercept), *_ = np.linalg.lstsq(design, y, rcond=None)
    return float(intercept)


def weight_spectrum_series(spectra: Sequence[dict[int, float]], f0: float | None = None) -> list[dict[int, float]]:
    """Rescale per-time ``{m: F_m}`` maps by the initial total ``F(0)``."""
    if not spectra:
        return []
    if f0 is None:
        f0 = sum(spectra[0].values())
    return [{m: v / f0 for m, v in spec.items()} for spec in spectra]


def magnetization(q_evolved: PauliSum) -> float:
    """``<0...0| O(t) |0...0>``."""
    return q_evolved.expectation_zero()
