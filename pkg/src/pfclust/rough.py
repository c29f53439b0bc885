"""Rough k-means: clusters with lower and upper approximations.

A gene always joins the upper set of its nearest centroid, and also the
upper set of any other cluster whose distance is within a ratio threshold
zeta of the nearest distance. Genes claimed by exactly one upper set form
that cluster's lower set; the rest sit in boundary regions. Centroids are
weighted combinations of lower and boundary means.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ._util import as_values, initial_centroids, sq_distances

__all__ = ["RoughPartition", "rough_kmeans"]


@dataclass(frozen=True)
class RoughPartition:
    """Lower/upper approximations per cluster plus the final centroids.

    lower[j] is a frozenset of gene indices certainly in cluster j;
    upper[j] additionally holds the genes possibly in it. Invariants:
    lower[j] is a subset of upper[j]; every gene is in at least one upper
    set; a gene in any lower set is in exactly one upper set; a gene in
    two or more upper sets belongs to no lower set.
    """

    lower: tuple[frozenset[int], ...]
    upper: tuple[frozenset[int], ...]
    centroids: np.ndarray
    iterations: int

    @property
    def k(self) -> int:
        return self.centroids.shape[0]

    def boundary(self, j: int) -> frozenset[int]:
        """Genes in cluster j's upper set but not its lower set."""
        return self.upper[j] - self.lower[j]


def _memberships(x: np.ndarray, w: np.ndarray, zeta: float) -> np.ndarray:
    """Boolean (n, k) upper-set membership under the distance-ratio test."""
    d = np.sqrt(sq_distances(x, w))
    nearest = np.argmin(d, axis=1)
    d_near = d[np.arange(x.shape[0]), nearest]
    member = np.zeros(d.shape, dtype=bool)
    member[np.arange(x.shape[0]), nearest] = True
    positive = d_near > 0.0
    # exact coincidence with a centroid pins the gene to that cluster only
    ratio_ok = d <= zeta * d_near[:, None]
    member[positive] |= ratio_ok[positive]
    return member


def _collect(member: np.ndarray) -> tuple[tuple[frozenset[int], ...], tuple[frozenset[int], ...]]:
    counts = member.sum(axis=1)
    upper = tuple(frozenset(np.flatnonzero(member[:, j]).tolist()) for j in range(member.shape[1]))
    lower = tuple(
        frozenset(i for i in up if counts[i] == 1) for up in upper
    )
    return lower, upper


def rough_kmeans(
    m,
    k: int,
    zeta: float = 1.3,
    w_lower: float = 0.7,
    seed: int = 0,
    max_iter: int = 300,
    eps: float = 1e-5,
    farthest_init: bool = False,
    init_centroids: Optional[np.ndarray] = None,
    on_iteration: Optional[Callable[[RoughPartition], None]] = None,
) -> RoughPartition:
    """Cluster gene rows into k rough clusters.

    Parameters
    ----------
    m : ExpressionMatrix or array-like, shape (n_genes, n_samples)
    k : int
        Cluster count, 1 <= k <= n_genes.
    zeta : float
        Ratio threshold >= 1; a gene joins every upper set whose centroid
        distance is within zeta times its nearest centroid distance.
    w_lower : float
        Weight in (0, 1] of the lower-set mean in the centroid update; the
        boundary mean gets 1 - w_lower. A cluster with an empty boundary
        uses its lower mean alone, one with an empty lower set uses its
        upper mean, and one with an empty upper set keeps its previous
        centroid.
    seed : int
        Seeds the row sample used for the initial centroids.
    on_iteration : callable, optional
        Called with the in-progress RoughPartition after each round.

    Returns
    -------
    RoughPartition
    """
    x = as_values(m)
    n = x.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}], got {k}")
    if zeta < 1.0:
        raise ValueError(f"zeta must be >= 1, got {zeta}")
    if not 0.0 < w_lower <= 1.0:
        raise ValueError(f"w_lower must be in (0, 1], got {w_lower}")
    if max_iter < 1:
        raise ValueError(f"max_iter must be >= 1, got {max_iter}")
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")

    if init_centroids is not None:
        w = np.array(init_centroids, dtype=np.float64)
        if w.shape != (k, x.shape[1]):
            raise ValueError(
                f"init_centroids must have shape {(k, x.shape[1])}, got {w.shape}"
            )
    else:
        w = initial_centroids(x, k, np.random.default_rng(seed), farthest_init)

    prev_sets: Optional[tuple] = None
    lower: tuple[frozenset[int], ...] = ()
    upper: tuple[frozenset[int], ...] = ()
    iterations = 0
    for _ in range(max_iter):
        member = _memberships(x, w, zeta)
        lower, upper = _collect(member)
        w_new = np.empty_like(w)
        for j in range(k):
            low = sorted(lower[j])
            bound = sorted(upper[j] - lower[j])
            if low and bound:
                w_new[j] = w_lower * x[low].mean(axis=0) + (1.0 - w_lower) * x[bound].mean(axis=0)
            elif low:
                w_new[j] = x[low].mean(axis=0)
            elif bound:
                w_new[j] = x[bound].mean(axis=0)
            else:
                w_new[j] = w[j]
        movement = float(np.sqrt(((w_new - w) ** 2).sum(axis=1)).max())
        w = w_new
        iterations += 1
        if on_iteration is not None:
            on_iteration(RoughPartition(lower, upper, w.copy(), iterations))
        stable = (lower, upper) == prev_sets
        prev_sets = (lower, upper)
        if stable or movement < eps:
            break

    return RoughPartition(lower=lower, upper=upper, centroids=w, iterations=iterations)
