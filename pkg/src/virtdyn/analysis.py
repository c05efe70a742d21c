"""Singular-value metrics, Yoshikawa's manipulability, and the statistical
reductions (streaming matrix moments, outlier-robust medians) shared by the
experiments."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np


@dataclass(frozen=True)
class SvdMetrics:
    """Extremal singular values and the conditioning ratio of one matrix.

    ``kappa`` is ``inf`` when the matrix is exactly rank deficient.
    """

    sigma_min: float
    sigma_max: float
    kappa: float


def svd_metrics(matrix: np.ndarray) -> SvdMetrics:
    sigmas = np.linalg.svd(np.asarray(matrix, dtype=float), compute_uv=False)
    sigma_max = float(sigmas[0])
    sigma_min = float(sigmas[-1])
    kappa = sigma_max / sigma_min if sigma_min > 0.0 else float("inf")
    return SvdMetrics(sigma_min=sigma_min, sigma_max=sigma_max, kappa=kappa)


def yoshikawa(jacobian: np.ndarray) -> float:
    """Manipulability of a square Jacobian: |det J|."""
    jacobian = np.asarray(jacobian, dtype=float)
    if jacobian.shape[0] != jacobian.shape[1]:
        raise ValueError("yoshikawa expects a square Jacobian")
    return abs(float(np.linalg.det(jacobian)))


def yoshikawa_general(jacobian: np.ndarray) -> float:
    """Redundancy-ready form sqrt(det(J J^T)); agrees with :func:`yoshikawa`
    for square J."""
    jacobian = np.asarray(jacobian, dtype=float)
    gram_det = float(np.linalg.det(jacobian @ jacobian.T))
    return float(np.sqrt(max(gram_det, 0.0)))


@dataclass(frozen=True)
class MatrixStats:
    """Entrywise mean and population standard deviation of a matrix stream."""

    mean: np.ndarray
    std: np.ndarray
    sample_count: int


class MatrixStatsAccumulator:
    """Single-pass Welford accumulation of entrywise matrix moments.

    Accumulators over disjoint shards can be combined with :meth:`merge`
    (pairwise mean/variance merge), so sample loops may be sharded.
    """

    def __init__(self, shape: tuple[int, int] = (6, 6)):
        self._count = 0
        self._mean = np.zeros(shape)
        self._m2 = np.zeros(shape)

    @property
    def count(self) -> int:
        return self._count

    def update(self, sample: np.ndarray) -> None:
        sample = np.asarray(sample, dtype=float)
        self._count += 1
        delta = sample - self._mean
        self._mean += delta / self._count
        self._m2 += delta * (sample - self._mean)

    def update_batch(self, samples: np.ndarray) -> None:
        """Fold in a (k, rows, cols) batch via a pairwise merge."""
        samples = np.asarray(samples, dtype=float)
        k = samples.shape[0]
        if k == 0:
            return
        other = MatrixStatsAccumulator(shape=self._mean.shape)
        other._count = k
        other._mean = samples.mean(axis=0)
        other._m2 = ((samples - other._mean) ** 2).sum(axis=0)
        self.merge(other)

    def merge(self, other: "MatrixStatsAccumulator") -> None:
        if other._count == 0:
            return
        if self._count == 0:
            self._count = other._count
            self._mean = other._mean.copy()
            self._m2 = other._m2.copy()
            return
        total = self._count + other._count
        delta = other._mean - self._mean
        self._mean = self._mean + delta * (other._count / total)
        self._m2 = self._m2 + other._m2 + delta**2 * (self._count * other._count / total)
        self._count = total

    def finalize(self) -> MatrixStats:
        if self._count < 1:
            raise ValueError("no samples accumulated")
        return MatrixStats(
            mean=self._mean.copy(),
            std=np.sqrt(self._m2 / self._count),
            sample_count=self._count,
        )


def matrix_stats(samples: Iterable[np.ndarray]) -> MatrixStats:
    """Entrywise mean and population std of a stream of equally shaped
    matrices; rejects an empty stream."""
    acc: Optional[MatrixStatsAccumulator] = None
    for sample in samples:
        sample = np.asarray(sample, dtype=float)
        if acc is None:
            acc = MatrixStatsAccumulator(shape=sample.shape)
        acc.update(sample)
    if acc is None:
        raise ValueError("matrix_stats needs at least one sample")
    return acc.finalize()


def robust_median(values: Iterable[float], filtered: bool = True) -> float:
    """Median with the blowup tail removed.

    With ``filtered`` (default) infinite values are dropped and everything
    above the upper Tukey fence Q3 + 1.5 IQR is excluded before taking the
    median; without it the plain median of the raw values is returned.  The
    median of an even count is the lower middle value, so the result is always
    one of the inputs.
    """
    values = np.asarray(list(values), dtype=float)
    if values.size == 0:
        raise ValueError("robust_median needs at least one value")
    if filtered:
        finite = values[np.isfinite(values)]
        if finite.size > 0:
            q1, q3 = np.percentile(finite, [25.0, 75.0])
            values = finite[finite <= q3 + 1.5 * (q3 - q1)]
        else:
            values = finite
        if values.size == 0:
            raise ValueError("all values were filtered out; degenerate sample set")
    values = np.sort(values)
    return float(values[(values.size - 1) // 2])
