"""Polynomial representations: derivatives, evaluation, domain remapping, and
certified sup-norm bounds.

All bounds are *certified*: the returned value is guaranteed to be an upper
bound on the true supremum (dense sampling plus a derivative-based slack,
falling back to the coefficient-sum bound when the slack cannot certify).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product as iter_product

import numpy as np
from numpy.polynomial import polynomial as npoly

__all__ = [
    "Poly",
    "MultiPoly",
    "Bounds",
    "certified_sup",
    "remap_domain",
    "poly_from_json",
    "poly_to_json",
]


def _trim(coeffs) -> tuple[float, ...]:
    c = [float(v) for v in coeffs]
    while len(c) > 1 and c[-1] == 0.0:
        c.pop()
    if not c:
        c = [0.0]
    return tuple(c)


@dataclass(frozen=True)
class Poly:
    """Univariate real polynomial, coefficients in ascending powers."""

    coeffs: tuple[float, ...]

    def __init__(self, coeffs):
        object.__setattr__(self, "coeffs", _trim(coeffs))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, x):
        return npoly.polyval(np.asarray(x, dtype=float), np.array(self.coeffs))

    def derivative(self, order: int = 1) -> "Poly":
        """Exact coefficient-level derivative of the given order."""
        if order < 0:
            raise ValueError("derivative order must be nonnegative")
        c = np.array(self.coeffs)
        for _ in range(order):
            c = npoly.polyder(c)
            if c.size == 0:
                c = np.zeros(1)
        return Poly(c)

    def compose_affine(self, c: float, w: float) -> "Poly":
        """Coefficients of p(c + w*t) as a polynomial in t."""
        inner = np.array([c, w], dtype=float)
        out = np.zeros(1)
        for k in range(self.degree, -1, -1):
            out = npoly.polyadd(npoly.polymul(out, inner), [self.coeffs[k]])
        return Poly(out)

    def scaled(self, s: float) -> "Poly":
        return Poly(np.array(self.coeffs) / s)

    @property
    def coefficient_sum(self) -> float:
        return float(np.sum(np.abs(self.coeffs)))


@dataclass(frozen=True)
class MultiPoly:
    """Multivariate polynomial as a sum of monomials a_k * x1^k1 ... xd^kd."""

    terms: tuple[tuple[float, tuple[int, ...]], ...]
    dim: int

    def __init__(self, terms, dim: int):
        if dim < 1:
            raise ValueError("dim must be positive")
        seen: dict[tuple[int, ...], float] = {}
        for a, k in terms:
            k = tuple(int(v) for v in k)
            if len(k) != dim:
                raise ValueError(f"exponent tuple {k} does not match dim={dim}")
            if any(v < 0 for v in k):
                raise ValueError("exponents must be nonnegative")
            seen[k] = seen.get(k, 0.0) + float(a)
        cleaned = tuple((a, k) for k, a in sorted(seen.items()) if a != 0.0)
        if not cleaned:
            cleaned = ((0.0, (0,) * dim),)
        object.__setattr__(self, "terms", cleaned)
        object.__setattr__(self, "dim", dim)

    @property
    def term_count(self) -> int:
        return len(self.terms)

    @property
    def max_exponent(self) -> int:
        return max(max(k) for _, k in self.terms)

    def __call__(self, x):
        """Evaluate at x of shape (dim,) or (m, dim)."""
        pts = np.atleast_2d(np.asarray(x, dtype=float))
        out = np.zeros(pts.shape[0])
        for a, k in self.terms:
            mono = np.full(pts.shape[0], a)
            for j, kj in enumerate(k):
                if kj:
                    mono = mono * pts[:, j] ** kj
            out += mono
        return out[0] if np.asarray(x).ndim == 1 else out

    @property
    def coefficient_sum(self) -> float:
        return float(sum(abs(a) for a, _ in self.terms))

    def remap(self, domains) -> "MultiPoly":
        """Substitute x_j = c_j + w_j * t_j for per-axis boxes [a_j, b_j],
        yielding the polynomial in t over [-1/2, 1/2]^dim."""
        domains = [tuple(map(float, ab)) for ab in domains]
        if len(domains) != self.dim:
            raise ValueError("one (a, b) interval required per axis")
        new_terms: dict[tuple[int, ...], float] = {}
        for a_k, k in self.terms:
            # expand prod_j (c_j + w_j t_j)^{k_j} via per-axis binomials
            axis_polys = []
            for j, kj in enumerate(k):
                lo, hi = domains[j]
                if lo >= hi:
                    raise ValueError(f"degenerate interval on axis {j}")
                c, w = (lo + hi) / 2.0, hi - lo
                axis_polys.append([math.comb(kj, i) * c ** (kj - i) * w**i for i in range(kj + 1)])
            for combo in iter_product(*(range(len(p)) for p in axis_polys)):
                coeff = a_k
                for j, i in enumerate(combo):
                    coeff *= axis_polys[j][i]
                key = tuple(combo)
                new_terms[key] = new_terms.get(key, 0.0) + coeff
        return MultiPoly(tuple((v, k) for k, v in new_terms.items()), self.dim)


def _sup_univariate(p: Poly) -> float:
    csum = p.coefficient_sum
    if p.degree == 0:
        return abs(p.coeffs[0])
    m = max(10 * p.degree + 1, 4097)
    xs = np.linspace(-1.0, 1.0, m)
    vmax = float(np.max(np.abs(p(xs))))
    # local refinement around the coarse argmax tightens the sampled maximum
    i = int(np.argmax(np.abs(p(xs))))
    h = 2.0 / (m - 1)
    lo, hi = max(-1.0, xs[i] - h), min(1.0, xs[i] + h)
    vmax = max(vmax, float(np.max(np.abs(p(np.linspace(lo, hi, 1025))))))
    d1_csum = p.derivative().coefficient_sum
    bound = vmax + d1_csum * h / 2.0
    return float(min(bound, csum)) if bound > csum else float(bound)


def _sup_multivariate(p: MultiPoly) -> float:
    csum = p.coefficient_sum
    d = p.dim
    per_axis = max(10 * p.max_exponent + 1, 9)
    per_axis = min(per_axis, max(5, int(round(2e5 ** (1.0 / d)))))
    axes = [np.linspace(-1.0, 1.0, per_axis)] * d
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    vmax = float(np.max(np.abs(p(mesh))))
    h = 2.0 / (per_axis - 1)
    # per-axis partial-derivative bounds on [-1,1]^d from coefficient sums
    slack = sum(sum(abs(a) * k[j] for a, k in p.terms) * h / 2.0 for j in range(d))
    return float(min(vmax + slack, csum))


def certified_sup(p) -> float:
    """Certified upper bound on sup |p| over [-1,1] (or [-1,1]^dim).

    Never exceeds the coefficient-sum bound and never undershoots the true
    supremum.
    """
    if isinstance(p, Poly):
        return _sup_univariate(p)
    if isinstance(p, MultiPoly):
        return _sup_multivariate(p)
    raise TypeError(f"expected Poly or MultiPoly, got {type(p).__name__}")


def _sup_on_half_box(p: Poly) -> float:
    # sup over [-1/2, 1/2] via the substitution t -> t/2
    return certified_sup(p.compose_affine(0.0, 0.5))


def remap_domain(p: Poly, a: float, b: float) -> tuple[Poly, float]:
    """Affine remap of p from [a, b] onto the working domain [-1/2, 1/2].

    Returns (q, s) with q(t) = p(c + w*t)/s, c = (a+b)/2, w = b-a.  The
    scale s = 2 * certified sup of |p(c + w*t)| over the working domain, so
    |q| <= 1/2 there with a factor-two safety margin.  Positive scaling
    preserves every derivative sign pattern.
    """
    if not a < b:
        raise ValueError(f"degenerate interval [{a}, {b}]")
    c, w = (a + b) / 2.0, float(b - a)
    composed = p.compose_affine(c, w)
    s = 2.0 * _sup_on_half_box(composed)
    if s == 0.0:
        s = 1.0
    return composed.scaled(s), s


@dataclass(frozen=True)
class Bounds:
    """Certified bounds used to normalize encodings of f, f', f''.

    Each field is at least the true supremum over [-1,1]; the factory
    doubles the certified sup so every normalized polynomial stays within
    1/2 on all of [-1,1], which the eigenvalue-transform precondition
    requires.
    """

    f_sup: float
    d1_sup: float
    d2_sup: float
    grad_sup: float = 0.0

    @classmethod
    def from_poly(cls, p: Poly) -> "Bounds":
        f_sup = max(2.0 * certified_sup(p), 1.0)
        d1 = max(2.0 * certified_sup(p.derivative()), 1e-300)
        d2 = max(2.0 * certified_sup(p.derivative(2)), 1e-300)
        return cls(f_sup=f_sup, d1_sup=d1, d2_sup=d2)

    @classmethod
    def from_multipoly(cls, p: MultiPoly) -> "Bounds":
        f_sup = max(2.0 * certified_sup(p), 1.0)
        grad = sum(abs(a) * kj for a, k in p.terms for kj in k)
        return cls(f_sup=f_sup, d1_sup=0.0, d2_sup=0.0, grad_sup=float(grad))


def poly_from_json(obj) -> Poly | MultiPoly:
    """Parse the polynomial JSON schema.

    ``{"kind": "uni", "coeffs": [c0, ...]}`` or
    ``{"kind": "multi", "dim": d, "terms": [{"a": a_k, "k": [k1, ...]}, ...]}``.
    """
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ValueError("polynomial object must have a 'kind' field")
    kind = obj["kind"]
    if kind == "uni":
        coeffs = obj.get("coeffs")
        if not isinstance(coeffs, list) or not coeffs:
            raise ValueError("'uni' polynomial requires a nonempty 'coeffs' list")
        return Poly(coeffs)
    if kind == "multi":
        dim = obj.get("dim")
        terms = obj.get("terms")
        if not isinstance(dim, int) or dim < 1:
            raise ValueError("'multi' polynomial requires a positive integer 'dim'")
        if not isinstance(terms, list) or not terms:
            raise ValueError("'multi' polynomial requires a nonempty 'terms' list")
        parsed = []
        for t in terms:
            if "a" not in t or "k" not in t:
                raise ValueError("each term needs 'a' and 'k' fields")
            parsed.append((t["a"], tuple(t["k"])))
        return MultiPoly(tuple(parsed), dim)
    raise ValueError(f"unknown polynomial kind {kind!r}")


def poly_to_json(p) -> dict:
    if isinstance(p, Poly):
        return {"kind": "uni", "coeffs": list(p.coeffs)}
    if isinstance(p, MultiPoly):
        return {
            "kind": "multi",
            "dim": p.dim,
            "terms": [{"a": a, "k": list(k)} for a, k in p.terms],
        }
    raise TypeError(f"expected Poly or MultiPoly, got {type(p).__name__}")
