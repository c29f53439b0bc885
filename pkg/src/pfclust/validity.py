"""Cluster validity measures: RMSE, MAE and the Xie-Beni index.

All three are computed from a membership matrix, so hard and rough
partitions are first embedded into membership form (one-hot rows for hard
assignments, equal splits over upper sets for rough boundary genes).

RMSE and MAE are membership-weighted reconstruction residuals normalized
by the cell count n_genes * n_samples:

    rmse = sqrt( sum_ij u_ij^m ||x_i - w_j||^2  / (n_g n_s) )
    mae  =       sum_ij u_ij^m ||x_i - w_j||_1  / (n_g n_s)

The Xie-Beni index always squares the memberships, whatever fuzzifier the
algorithm ran with, so scores stay comparable across algorithms:

    xb = sum_ij u_ij^2 ||x_i - w_j||^2 / ( n_g * min_{j != l} ||w_j - w_l||^2 )

Lower is better for all three.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from ._util import as_values, sq_distances
from .fuzzy import FuzzyPartition
from .kmeans import HardPartition
from .rough import RoughPartition

__all__ = [
    "ALGORITHMS",
    "ValidityReport",
    "unified_memberships",
    "rmse",
    "mae",
    "xie_beni",
    "evaluate",
]

ALGORITHMS = ("kmeans", "rough_kmeans", "fcm", "pfcm")

_SEPARATION_TOL = 1e-12

Partition = Union[HardPartition, RoughPartition, FuzzyPartition]


@dataclass(frozen=True)
class ValidityReport:
    """The three validity measures plus the run shape they describe."""

    rmse: float
    mae: float
    xie_beni: float
    n_genes: int
    n_samples: int
    k: int
    algorithm: str

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(
                f"unknown algorithm tag {self.algorithm!r}; expected one of {ALGORITHMS}"
            )


def unified_memberships(p: Partition) -> np.ndarray:
    """Embed any partition kind into an (n_genes, k) row-stochastic matrix.

    Hard assignments become one-hot rows. Fuzzy memberships pass through
    unchanged. For rough partitions, a gene in some lower set gets 1 for
    that cluster; a boundary gene splits its unit mass equally over the
    upper sets that contain it.
    """
    if isinstance(p, FuzzyPartition):
        return p.memberships.copy()
    if isinstance(p, HardPartition):
        u = np.zeros((p.assignments.size, p.k))
        u[np.arange(p.assignments.size), p.assignments] = 1.0
        return u
    if isinstance(p, RoughPartition):
        n = max(max(up, default=-1) for up in p.upper) + 1
        u = np.zeros((n, p.k))
        for j, up in enumerate(p.upper):
            for i in up:
                u[i, j] = 1.0
        counts = u.sum(axis=1, keepdims=True)
        return u / counts
    raise TypeError(f"unsupported partition type {type(p).__name__}")


def _check_shapes(x: np.ndarray, u: np.ndarray, w: np.ndarray) -> None:
    if u.shape[0] != x.shape[0] or u.shape[1] != w.shape[0] or w.shape[1] != x.shape[1]:
        raise ValueError(
            f"inconsistent shapes: data {x.shape}, memberships {u.shape}, "
            f"centroids {w.shape}"
        )


def rmse(x, u: np.ndarray, w: np.ndarray, m: float = 2.0) -> float:
    """Root of the mean membership-weighted squared residual per cell."""
    xv = as_values(x)
    _check_shapes(xv, u, w)
    total = float(((u ** m) * sq_distances(xv, w)).sum())
    return math.sqrt(total / (xv.shape[0] * xv.shape[1]))


def mae(x, u: np.ndarray, w: np.ndarray, m: float = 2.0) -> float:
    """Mean membership-weighted L1 residual per cell."""
    xv = as_values(x)
    _check_shapes(xv, u, w)
    l1 = np.abs(xv[:, None, :] - w[None, :, :]).sum(axis=2)
    return float(((u ** m) * l1).sum()) / (xv.shape[0] * xv.shape[1])


def xie_beni(x, u: np.ndarray, w: np.ndarray) -> float:
    """Compactness over separation; infinity when centroids coincide.

    Requires at least two centroids; the separation term is the minimum
    squared distance between any two of them.
    """
    xv = as_values(x)
    _check_shapes(xv, u, w)
    k = w.shape[0]
    if k < 2:
        raise ValueError("the separation term needs at least 2 centroids")
    sep = sq_distances(w, w)
    np.fill_diagonal(sep, np.inf)
    min_sep = float(sep.min())
    if min_sep <= _SEPARATION_TOL:
        return math.inf
    scatter = float(((u ** 2) * sq_distances(xv, w)).sum())
    return scatter / (xv.shape[0] * min_sep)


def evaluate(x, p: Partition, m: float = 2.0, algorithm: str | None = None) -> ValidityReport:
    """Build a full ValidityReport for a partition of x.

    The fuzzifier m weights the rmse/mae residuals; pass 1.0 to score a
    hard or rough partition by plain membership fractions. With a single
    cluster the Xie-Beni index is undefined and reported as infinity.
    """
    xv = as_values(x)
    u = unified_memberships(p)
    w = p.centroids
    if algorithm is None:
        algorithm = {
            HardPartition: "kmeans",
            RoughPartition: "rough_kmeans",
            FuzzyPartition: "fcm" if getattr(p, "alpha", None) is None else "pfcm",
        }[type(p)]
    xb = math.inf if w.shape[0] < 2 else xie_beni(xv, u, w)
    return ValidityReport(
        rmse=rmse(xv, u, w, m),
        mae=mae(xv, u, w, m),
        xie_beni=xb,
        n_genes=xv.shape[0],
        n_samples=xv.shape[1],
        k=w.shape[0],
        algorithm=algorithm,
    )
