"""Discrete distributions over tolerance-binned real support points."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["DiscreteDistribution"]


@dataclass(frozen=True)
class DiscreteDistribution:
    """Probability masses over points in R^k, merged within a bin tolerance.

    ``points`` has shape (n, k) with rows sorted lexicographically;
    ``probs`` are the matching masses.  Scalar-valued distributions use
    k = 1 but accept plain floats in lookups.
    """

    points: np.ndarray
    probs: np.ndarray
    binning: float = 1e-9

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        if pts.shape[0] == 1 and pts.shape[1] != self.probs.shape[0]:
            pass  # already (n, k)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "probs", np.asarray(self.probs, dtype=float))
        if self.points.shape[0] != self.probs.shape[0]:
            raise ValueError("points and probs length mismatch")

    @classmethod
    def from_samples(
        cls,
        values: np.ndarray,
        weights: np.ndarray,
        binning: float = 1e-9,
    ) -> "DiscreteDistribution":
        """Bin weighted samples; values closer than ``binning`` in every
        coordinate share one bin (keyed by rounding to the tolerance)."""
        vals = np.asarray(values, dtype=float)
        if vals.ndim == 1:
            vals = vals[:, None]
        w = np.asarray(weights, dtype=float).ravel()
        if vals.shape[0] != w.shape[0]:
            raise ValueError("values and weights length mismatch")

        keys = np.round(vals / binning).astype(np.int64)
        order = np.lexsort(keys.T[::-1])
        keys, vals, w = keys[order], vals[order], w[order]
        if len(w) == 0:
            return cls(points=np.zeros((0, vals.shape[1])), probs=np.zeros(0), binning=binning)
        new_bin = np.any(np.diff(keys, axis=0) != 0, axis=1)
        bin_id = np.concatenate(([0], np.cumsum(new_bin)))
        nbins = bin_id[-1] + 1
        probs = np.bincount(bin_id, weights=w, minlength=nbins)
        # weighted mean location within each bin (spread < binning)
        pts = np.empty((nbins, vals.shape[1]))
        for j in range(vals.shape[1]):
            num = np.bincount(bin_id, weights=w * vals[:, j], minlength=nbins)
            first = np.searchsorted(bin_id, np.arange(nbins))
            with np.errstate(invalid="ignore"):
                pts[:, j] = np.where(probs > 0, num / np.where(probs > 0, probs, 1.0),
                                     vals[first, j])
        return cls(points=pts, probs=probs, binning=binning)

    @property
    def n_points(self) -> int:
        return self.points.shape[0]

    @property
    def total(self) -> float:
        return float(self.probs.sum())

    def scalar_points(self) -> np.ndarray:
        if self.points.shape[1] != 1:
            raise ValueError("distribution support is not one-dimensional")
        return self.points[:, 0]

    def prob_at(self, point, default: float = 0.0) -> float:
        """Mass of the bin containing ``point``; ``default`` if none."""
        q = np.atleast_1d(np.asarray(point, dtype=float))
        if q.shape[0] != self.points.shape[1]:
            raise ValueError("point dimension mismatch")
        hit = np.all(np.abs(self.points - q[None, :]) <= self.binning, axis=1)
        idx = np.flatnonzero(hit)
        if idx.size == 0:
            return default
        return float(self.probs[idx].sum())

    def mean(self) -> np.ndarray:
        return self.probs @ self.points

    def expectation(self, fn) -> float:
        """Sum of fn(point) weighted by the masses; fn takes a 1-d array."""
        return float(sum(p * fn(x) for x, p in zip(self.points, self.probs)))
