"""Independent reference implementations used only to cross-check the package.

Everything here is deliberately coded on a different route than the library:
graph metrics from explicit per-node dictionaries and a hand-looped entropy,
OLS through numpy's LAPACK-backed inverse of the normal equations, and the
incomplete beta from its hypergeometric power series instead of the
continued fraction.
"""

from __future__ import annotations

import math

import numpy as np


def entropy_bits(probabilities) -> float:
    """Shannon entropy in bits via an explicit loop; 0 log 0 is 0."""
    total = 0.0
    for p in probabilities:
        if p > 0:
            total -= p * math.log(p, 2)
    return total


def direct_structure_metrics(edges: dict[tuple[str, str], int]) -> tuple[float, float, int]:
    """(determinism, degeneracy, active count) straight from the definitions.

    ``edges`` maps unordered node pairs to positive integer weights. Rows are
    built as per-node dictionaries of neighbor probabilities; isolated nodes
    never appear.
    """
    strength: dict[str, float] = {}
    for (u, v), w in edges.items():
        strength[u] = strength.get(u, 0.0) + w
        strength[v] = strength.get(v, 0.0) + w
    active = sorted(strength)
    n = len(active)
    if n < 2:
        raise ValueError("need at least 2 active nodes")

    rows: dict[str, dict[str, float]] = {u: {} for u in active}
    for (u, v), w in edges.items():
        rows[u][v] = rows[u].get(v, 0.0) + w / strength[u]
        rows[v][u] = rows[v].get(u, 0.0) + w / strength[v]

    mean_entropy = sum(entropy_bits(row.values()) for row in rows.values()) / n
    det = math.log(n, 2) - mean_entropy

    averaged: dict[str, float] = {}
    for row in rows.values():
        for target, p in row.items():
            averaged[target] = averaged.get(target, 0.0) + p / n
    deg = math.log(n, 2) - entropy_bits(averaged.values())
    return det, deg, n


def ols_normal_equations(x: np.ndarray, y: np.ndarray):
    """Brute-force OLS: beta and SEs from inv(X'X), plus R², overall F, RSS.

    ``x`` must already contain the intercept column.
    """
    xtx_inv = np.linalg.inv(x.T @ x)
    beta = xtx_inv @ (x.T @ y)
    resid = y - x @ beta
    rss = float(resid @ resid)
    n, p = x.shape
    df2 = n - p
    sigma2 = rss / df2 if df2 > 0 else float("nan")
    se = np.sqrt(sigma2 * np.diag(xtx_inv)) if df2 > 0 else np.full(p, np.nan)
    centered = y - y.mean()
    tss = float(centered @ centered)
    r2 = 1.0 - rss / tss if tss > 0 else 0.0
    k = p - 1
    f = ((tss - rss) / k) / (rss / df2) if k > 0 and df2 > 0 and rss > 0 else float("nan")
    return beta, se, r2, f, rss


def betainc_series(a: float, b: float, x: float, tol: float = 1e-17) -> float:
    """Regularized incomplete beta from the 2F1(1, a+b; a+1; x) power series.

    All terms are positive, so there is no cancellation; the symmetry
    I_x(a,b) = 1 - I_{1-x}(b,a) keeps the series in its fast region.
    """
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    if x > a / (a + b):
        return 1.0 - betainc_series(b, a, 1.0 - x, tol)
    log_front = (
        a * math.log(x)
        + b * math.log1p(-x)
        - (math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b))
        - math.log(a)
    )
    term = 1.0
    total = 1.0
    n = 0
    while True:
        term *= (a + b + n) / (a + 1.0 + n) * x
        total += term
        n += 1
        if term < tol * total:
            break
        if n > 10_000_000:
            raise ArithmeticError("series did not converge")
    return math.exp(log_front) * total


def ks_statistic_uniform(sample) -> float:
    """Kolmogorov-Smirnov distance of a sample from Uniform(0, 1)."""
    ordered = sorted(sample)
    n = len(ordered)
    d = 0.0
    for i, value in enumerate(ordered):
        d = max(d, abs((i + 1) / n - value), abs(value - i / n))
    return d
