"""Brute-force classical reference for every verdict.

Evaluates derivative signs, consecutive-difference signs, and exact Jensen
sums directly from the polynomial coefficients; used as ground truth by the
property and acceptance tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .poly import MultiPoly, Poly

__all__ = ["OracleResult", "oracle_convex", "oracle_monotone"]


@dataclass(frozen=True)
class OracleResult:
    verdict: str  # "convex" | "not_convex" | "monotone" | "not_monotone" | "jensen_consistent" | "jensen_violated"
    witness: object = None
    details: dict | None = None


def _grid_points(grid) -> np.ndarray:
    pts = np.asarray(getattr(grid, "points", grid), dtype=float)
    return pts


def oracle_convex(f, grid, weights=None, mode: str = "auto") -> OracleResult:
    """Direct convexity evidence on the sampled points.

    Univariate without weights: the sign of min f''(x_i) (``mode="second"``)
    or of the minimum consecutive first-derivative difference
    (``mode="first"``).  With weights (or multivariate): the exact Jensen
    pair (LHS, RHS).
    """
    pts = _grid_points(grid)
    if weights is not None or isinstance(f, MultiPoly):
        lam = np.asarray(getattr(weights, "lambdas", weights), dtype=float)
        if isinstance(f, MultiPoly):
            xs = pts.reshape(len(lam), -1)
            center = lam @ xs
            lhs = float(f(center))
            rhs = float(lam @ f(xs))
        else:
            xs = pts.reshape(-1)
            center = float(lam @ xs)
            lhs = float(f(center))
            rhs = float(lam @ f(xs))
        verdict = "jensen_violated" if lhs > rhs else "jensen_consistent"
        witness = (center, lhs, rhs) if verdict == "jensen_violated" else None
        return OracleResult(verdict, witness, {"lhs": lhs, "rhs": rhs})

    xs = pts.reshape(-1)
    if mode in ("auto", "second"):
        vals = f.derivative(2)(xs)
        i = int(np.argmin(vals))
        if vals[i] < 0:
            return OracleResult("not_convex", float(xs[i]), {"min_second_derivative": float(vals[i])})
        return OracleResult("convex", None, {"min_second_derivative": float(vals[i])})
    if mode == "first":
        d1 = f.derivative()(xs)
        diffs = np.diff(d1)
        if diffs.size == 0:
            return OracleResult("convex", None, {"min_difference": 0.0})
        i = int(np.argmin(diffs))
        if diffs[i] < 0:
            return OracleResult(
                "not_convex", (float(xs[i]), float(xs[i + 1])), {"min_difference": float(diffs[i])}
            )
        return OracleResult("convex", None, {"min_difference": float(diffs[i])})
    raise ValueError(f"unknown mode {mode!r}")


def oracle_monotone(f: Poly, grid, direction: str = "increasing") -> OracleResult:
    """Sign check of f' at every grid point for the requested direction."""
    if direction not in ("increasing", "decreasing"):
        raise ValueError(f"unknown direction {direction!r}")
    xs = _grid_points(grid).reshape(-1)
    d1 = f.derivative()(xs)
    if direction == "increasing":
        bad = np.where(d1 < 0)[0]
        extreme = int(np.argmin(d1))
    else:
        bad = np.where(d1 > 0)[0]
        extreme = int(np.argmax(d1))
    if bad.size:
        return OracleResult("not_monotone", float(xs[extreme]), {"worst_derivative": float(d1[extreme])})
    return OracleResult("monotone", None, {"worst_derivative": float(d1[extreme])})
