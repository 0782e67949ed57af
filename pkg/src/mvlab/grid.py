"""Masked uniform Cartesian grids over balls and clipped half-balls.

A domain is a vertex-centered grid covering a geodesic ball B_r(center) or a
half-ball D_r(y) = B_r(y) n {x0 >= 0}. Nodes are classified interior / flat
boundary / cap boundary / outside. The center is always a grid node, and for
half-balls the plane x0 = 0 is a grid plane, so boundary stencils never need
interpolation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import (
    CenterBelowBoundary,
    CenterOffGrid,
    MetricNotPositiveDefinite,
    MVLabError,
    ResolutionTooCoarse,
)

BALL = "ball"
HALF_BALL = "half_ball"

# node classification codes (stored in the int8 mask array)
OUTSIDE = 0
INTERIOR = 1
FLAT_BOUNDARY = 2
CAP_BOUNDARY = 3

SUPPORTED_DIMENSIONS = (2, 3, 4)

# 8-point Gauss-Legendre rule on [0, 1], used for first-order geodesic
# length corrections along straight segments
_GL_T, _GL_W = np.polynomial.legendre.leggauss(8)
_GL_T = 0.5 * (_GL_T + 1.0)
_GL_W = 0.5 * _GL_W

_CHUNK = 1 << 17


@dataclass(frozen=True)
class MetricSpec:
    """A smooth metric g(x) on R^n given as a vectorized matrix field.

    ``matrix`` maps an array of points with shape (..., n) to symmetric
    positive-definite matrices with shape (..., n, n). ``declared_deviation``
    is the intended bound on the W^{1,inf} distance to the identity; the
    measured value (``metric_deviation``) is checked against it.
    """

    dimension: int
    matrix: Callable[[np.ndarray], np.ndarray]
    declared_deviation: float = 0.0
    name: str = "custom"
    trivial: bool = False  # identity fast path
    config: dict | None = field(default=None, compare=False)  # round-trip recipe

    def __call__(self, points: np.ndarray) -> np.ndarray:
        return self.matrix(np.asarray(points, dtype=float))


def identity_metric(n: int) -> MetricSpec:
    def matrix(points: np.ndarray) -> np.ndarray:
        eye = np.eye(n)
        return np.broadcast_to(eye, points.shape[:-1] + (n, n)).copy()

    return MetricSpec(n, matrix, declared_deviation=0.0, name="identity",
                      trivial=True, config={"preset": "identity"})


def conformal_metric(n: int, coefficient: float, axis: int = 1,
                     declared_deviation: float | None = None) -> MetricSpec:
    """g(x) = (1 + coefficient * x_axis) * identity."""

    def matrix(points: np.ndarray) -> np.ndarray:
        factor = 1.0 + coefficient * points[..., axis]
        return factor[..., None, None] * np.eye(n)

    name = f"conformal(c={coefficient!r}, axis={axis})"
    if declared_deviation is None:
        declared_deviation = abs(coefficient) * 4.0  # generous default bound
    return MetricSpec(n, matrix, declared_deviation, name=name,
                      config={"preset": "conformal", "coefficient": coefficient,
                              "axis": axis, "declared_deviation": declared_deviation})


def polynomial_metric(n: int, terms: Sequence[tuple[int, int, float, Sequence[int]]],
                      declared_deviation: float, name: str = "polynomial") -> MetricSpec:
    """g = identity + symmetric polynomial perturbations.

    Each term is (i, j, coef, powers): adds coef * prod_k x_k**powers[k] to
    entries (i, j) and (j, i).
    """
    terms = [(int(i), int(j), float(c), tuple(int(p) for p in pw)) for i, j, c, pw in terms]
    for i, j, _, pw in terms:
        if not (0 <= i < n and 0 <= j < n) or len(pw) != n:
            raise MVLabError(f"bad metric term ({i},{j},powers={pw}) for dimension {n}")

    def matrix(points: np.ndarray) -> np.ndarray:
        out = np.broadcast_to(np.eye(n), points.shape[:-1] + (n, n)).copy()
        for i, j, coef, powers in terms:
            mono = np.ones(points.shape[:-1])
            for k, p in enumerate(powers):
                if p:
                    mono = mono * points[..., k] ** p
            out[..., i, j] += coef * mono
            if i != j:
                out[..., j, i] += coef * mono
        return out

    return MetricSpec(n, matrix, declared_deviation, name=name,
                      config={"preset": "polynomial",
                              "terms": [[i, j, c, list(p)] for i, j, c, p in terms],
                              "declared_deviation": declared_deviation})


def sine_metric(n: int, coefficient: float, entry: tuple[int, int] = (0, 0),
                axis: int = 1, declared_deviation: float | None = None) -> MetricSpec:
    """g = identity + coefficient * sin(x_axis) on one diagonal entry."""
    i, j = entry

    def matrix(points: np.ndarray) -> np.ndarray:
        out = np.broadcast_to(np.eye(n), points.shape[:-1] + (n, n)).copy()
        pert = coefficient * np.sin(points[..., axis])
        out[..., i, j] += pert
        if i != j:
            out[..., j, i] += pert
        return out

    if declared_deviation is None:
        declared_deviation = abs(coefficient)
    return MetricSpec(n, matrix, declared_deviation, name=f"sine(c={coefficient!r})",
                      config={"preset": "sine", "coefficient": coefficient,
                              "entry": [i, j], "axis": axis,
                              "declared_deviation": declared_deviation})


def segment_distance(metric: MetricSpec | None, base: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Distance from ``base`` to each point: Euclidean, corrected to first
    order in (g - identity) along the straight segment when a nontrivial
    metric is present."""
    points = np.asarray(points, dtype=float)
    base = np.asarray(base, dtype=float)
    v = points - base
    length = np.linalg.norm(v, axis=-1)
    if metric is None or metric.trivial:
        return length
    out = length.copy()
    nz = np.flatnonzero(length.reshape(-1) > 0)
    flat_v = v.reshape(-1, v.shape[-1])
    flat_len = length.reshape(-1)
    for start in range(0, nz.size, _CHUNK):
        sel = nz[start:start + _CHUNK]
        vv = flat_v[sel]
        ll = flat_len[sel]
        vhat = vv / ll[:, None]
        corr = np.zeros(sel.size)
        for t, w in zip(_GL_T, _GL_W):
            g = metric(base + t * vv)
            g = g - np.eye(g.shape[-1])
            corr += w * np.einsum("mij,mi,mj->m", g, vhat, vhat)
        out.reshape(-1)[sel] = ll * (1.0 + 0.5 * corr)
    return out


@dataclass(frozen=True)
class Domain:
    """Immutable masked grid over a ball or clipped half-ball."""

    kind: str
    center: np.ndarray
    radius: float
    spacing: float
    dimension: int
    origin: np.ndarray
    shape: tuple[int, ...]
    mask: np.ndarray = field(repr=False)
    metric: MetricSpec | None = None

    def __post_init__(self):
        object.__setattr__(self, "_points_cache", None)
        object.__setattr__(self, "_center_dist_cache", None)

    # -- geometry ---------------------------------------------------------

    @property
    def h(self) -> float:
        return self.spacing

    @property
    def in_mask(self) -> np.ndarray:
        return self.mask != OUTSIDE

    @property
    def node_count(self) -> int:
        return int(np.count_nonzero(self.mask))

    def axis_coords(self, axis: int) -> np.ndarray:
        return self.origin[axis] + self.spacing * np.arange(self.shape[axis])

    def points(self) -> np.ndarray:
        """All box node coordinates, shape (prod(shape), n), C-order."""
        cached = getattr(self, "_points_cache")
        if cached is None:
            mesh = np.meshgrid(*[self.axis_coords(i) for i in range(self.dimension)],
                               indexing="ij")
            cached = np.stack([m.ravel() for m in mesh], axis=-1)
            object.__setattr__(self, "_points_cache", cached)
        return cached

    def in_mask_points(self) -> np.ndarray:
        return self.points()[self.in_mask.ravel()]

    def distance(self, points: np.ndarray, base: np.ndarray | None = None) -> np.ndarray:
        """Distance used by the mask: geodesic-corrected for metric balls."""
        if base is None:
            base = self.center
        return segment_distance(self.metric, base, points)

    def center_distances(self) -> np.ndarray:
        """Distance from the center to every box node, box-shaped, cached."""
        cached = getattr(self, "_center_dist_cache")
        if cached is None:
            cached = self.distance(self.points()).reshape(self.shape)
            object.__setattr__(self, "_center_dist_cache", cached)
        return cached

    def region_contains(self, points: np.ndarray) -> np.ndarray:
        """Membership in the analytic region (ball/half-ball), not the mask."""
        inside = self.distance(points) < self.radius
        if self.kind == HALF_BALL:
            inside &= points[..., 0] >= 0.0
        return inside

    def node_index(self, point: Sequence[float]) -> tuple[int, ...]:
        rel = (np.asarray(point, dtype=float) - self.origin) / self.spacing
        idx = np.rint(rel).astype(int)
        if np.max(np.abs(rel - idx)) > 1e-8:
            raise MVLabError(f"point {point} is not a grid node")
        if np.any(idx < 0) or np.any(idx >= np.asarray(self.shape)):
            raise MVLabError(f"point {point} is outside the grid box")
        return tuple(int(k) for k in idx)

    def node_point(self, index: Sequence[int]) -> np.ndarray:
        return self.origin + self.spacing * np.asarray(index, dtype=float)

    @property
    def flat_plane_index(self) -> int | None:
        """Axis-0 row index of the plane x0 = 0, when it lies in the box."""
        if self.kind != HALF_BALL:
            return None
        rel = -self.origin[0] / self.spacing
        row = int(round(rel))
        if abs(rel - row) > 1e-8 or not (0 <= row < self.shape[0]):
            return None
        return row

    @property
    def flat_node_count(self) -> int:
        return int(np.count_nonzero(self.mask == FLAT_BOUNDARY))

    def sqrt_det_metric(self) -> np.ndarray:
        """sqrt(det g) at every box node (ones for Euclidean domains)."""
        if self.metric is None or self.metric.trivial:
            return np.ones(self.shape)
        pts = self.points()
        out = np.empty(pts.shape[0])
        for start in range(0, pts.shape[0], _CHUNK):
            g = self.metric(pts[start:start + _CHUNK])
            out[start:start + _CHUNK] = np.sqrt(np.linalg.det(g))
        return out.reshape(self.shape)

    # -- field construction -------------------------------------------------

    def make_field(self, values: np.ndarray, density: bool = True,
                   facts: dict | None = None) -> "ScalarField":
        return ScalarField(self, np.asarray(values, dtype=float), density, facts)

    def field_from_function(self, fn: Callable[[np.ndarray], np.ndarray],
                            density: bool = True, facts: dict | None = None) -> "ScalarField":
        values = np.asarray(fn(self.points()), dtype=float).reshape(self.shape)
        values = np.where(self.in_mask, values, np.nan)
        return ScalarField(self, values, density, facts)


@dataclass(frozen=True)
class ScalarField:
    """Nonnegative density values on the in-mask nodes of a domain.

    Values at outside nodes are NaN so that any stencil reaching out of the
    mask poisons its result visibly. Comparison functions reuse the container
    with ``density=False`` and may be signed.
    """

    domain: Domain
    values: np.ndarray = field(repr=False)
    density: bool = True
    facts: dict | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.values.shape != self.domain.shape:
            raise MVLabError(
                f"field shape {self.values.shape} != domain shape {self.domain.shape}")
        if self.density:
            # operator outputs (density=False) may carry NaN at in-mask nodes
            # whose stencil exits the mask; densities must be total and >= 0
            vals = self.values[self.domain.in_mask]
            if not np.all(np.isfinite(vals)):
                raise MVLabError("density field has non-finite in-mask values")
            if vals.size and np.min(vals) < -1e-12 * max(1.0, float(np.max(np.abs(vals)))):
                raise MVLabError(f"density field has negative values (min {np.min(vals)})")

    def at(self, point: Sequence[float]) -> float:
        return float(self.values[self.domain.node_index(point)])

    def sup(self) -> float:
        return float(np.nanmax(self.values))

    def in_mask_values(self) -> np.ndarray:
        return self.values[self.domain.in_mask]

    def __add__(self, other: "ScalarField") -> "ScalarField":
        if other.domain is not self.domain:
            raise MVLabError("cannot add fields on different domains")
        return ScalarField(self.domain, self.values + other.values,
                           self.density and other.density)

    def scaled(self, factor: float) -> "ScalarField":
        return ScalarField(self.domain, self.values * factor,
                           self.density and factor >= 0)


def _classify(kind: str, inside: np.ndarray, flat_row: int | None) -> np.ndarray:
    """Interior nodes have all 2n axis neighbors inside; flat-plane nodes win
    over the cap classification."""
    interior = inside.copy()
    n = inside.ndim
    for ax in range(n):
        plus = np.zeros_like(inside)
        minus = np.zeros_like(inside)
        src = [slice(None)] * n
        dst = [slice(None)] * n
        src[ax] = slice(1, None)
        dst[ax] = slice(None, -1)
        plus[tuple(dst)] = inside[tuple(src)]
        minus[tuple(src)] = inside[tuple(dst)]
        interior &= plus & minus
    mask = np.where(inside, CAP_BOUNDARY, OUTSIDE).astype(np.int8)
    mask[interior] = INTERIOR
    if kind == HALF_BALL and flat_row is not None:
        sel = [slice(None)] * n
        sel[0] = flat_row
        plane = tuple(sel)
        mask[plane] = np.where(inside[plane], FLAT_BOUNDARY, OUTSIDE)
    return mask


def _check_positive_definite(metric: MetricSpec, points: np.ndarray) -> None:
    for start in range(0, points.shape[0], _CHUNK):
        g = metric(points[start:start + _CHUNK])
        if not np.allclose(g, np.swapaxes(g, -1, -2), atol=1e-10):
            raise MetricNotPositiveDefinite("metric is not symmetric")
        eigs = np.linalg.eigvalsh(g)
        if np.min(eigs) <= 0.0:
            raise MetricNotPositiveDefinite(
                f"metric has eigenvalue {np.min(eigs)} <= 0 on the grid box")


def make_ball_domain(center: Sequence[float], r: float, h: float, n: int,
                     metric: MetricSpec | None = None) -> Domain:
    """Masked grid over the geodesic ball B_r(center).

    The mask marks nodes whose first-order-corrected geodesic distance to the
    center is < r. The center is a grid node.
    """
    center = np.asarray(center, dtype=float)
    if n not in SUPPORTED_DIMENSIONS:
        raise MVLabError(f"dimension {n} not in {SUPPORTED_DIMENSIONS}")
    if center.shape != (n,):
        raise MVLabError(f"center must have {n} components")
    if r <= 0 or h <= 0:
        raise MVLabError("radius and spacing must be positive")
    if h > r / 8 + 1e-12:
        raise ResolutionTooCoarse(f"spacing h={h} exceeds r/8={r / 8}")
    if metric is not None and metric.trivial:
        metric = None

    pad = 1.0
    if metric is not None:
        pad += 2.0 * metric.declared_deviation
    half = int(np.ceil(pad * r / h)) + 1
    origin = center - half * h
    shape = (2 * half + 1,) * n

    mesh = np.meshgrid(*[origin[i] + h * np.arange(shape[i]) for i in range(n)],
                       indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=-1)

    if metric is not None:
        _check_positive_definite(metric, pts)

    dist = segment_distance(metric, center, pts).reshape(shape)
    inside = dist < r
    mask = _classify(BALL, inside, None)
    domain = Domain(BALL, center, float(r), float(h), n, origin, shape, mask, metric)
    if metric is not None:
        measured = metric_deviation(metric, domain)
        if measured > metric.declared_deviation + 1e-9 + 10.0 * h**2:
            raise MVLabError(
                f"metric deviates by {measured:.4g}, above the declared "
                f"{metric.declared_deviation:.4g}")
    return domain


def make_half_ball_domain(y: Sequence[float], r: float, h: float, n: int) -> Domain:
    """Masked grid over D_r(y) = B_r(y) n {x0 >= 0}, Euclidean metric.

    Requires y0 >= 0 and y0 a multiple of h so the plane x0 = 0 is a grid
    plane; the in-mask nodes on it are classified as flat boundary.
    """
    y = np.asarray(y, dtype=float)
    if n not in SUPPORTED_DIMENSIONS:
        raise MVLabError(f"dimension {n} not in {SUPPORTED_DIMENSIONS}")
    if y.shape != (n,):
        raise MVLabError(f"center must have {n} components")
    if r <= 0 or h <= 0:
        raise MVLabError("radius and spacing must be positive")
    if y[0] < 0:
        raise CenterBelowBoundary(f"half-ball center has y0={y[0]} < 0")
    if h > r / 8 + 1e-12:
        raise ResolutionTooCoarse(f"spacing h={h} exceeds r/8={r / 8}")
    steps = y[0] / h
    if abs(steps - round(steps)) > 1e-9 * max(1.0, abs(steps)):
        raise CenterOffGrid(f"y0={y[0]} is not an integer multiple of h={h}")
    steps = int(round(steps))

    half = int(np.ceil(r / h)) + 1
    down = min(half, steps)  # never place rows below x0 = 0
    origin = y.copy()
    origin[0] -= down * h
    origin[1:] -= half * h
    shape = (down + half + 1,) + (2 * half + 1,) * (n - 1)

    mesh = np.meshgrid(*[origin[i] + h * np.arange(shape[i]) for i in range(n)],
                       indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=-1)
    dist = np.linalg.norm(pts - y, axis=-1).reshape(shape)
    inside = dist < r
    flat_row = 0 if steps <= half else None
    mask = _classify(HALF_BALL, inside, flat_row)
    return Domain(HALF_BALL, y, float(r), float(h), n, origin, shape, mask, None)


def metric_deviation(metric: MetricSpec, domain: Domain) -> float:
    """Measured W^{1,inf} deviation of g from the identity over in-mask nodes:
    max of |g - identity| entries and central-difference |dg| entries."""
    if domain.kind != BALL:
        raise MVLabError("metric deviation is measured on ball domains only")
    pts = domain.in_mask_points()
    n = domain.dimension
    h = domain.spacing
    eye = np.eye(n)
    worst = 0.0
    for start in range(0, pts.shape[0], _CHUNK):
        chunk = pts[start:start + _CHUNK]
        g = metric(chunk)
        worst = max(worst, float(np.max(np.abs(g - eye))))
        for ax in range(n):
            step = np.zeros(n)
            step[ax] = h
            dg = (metric(chunk + step) - metric(chunk - step)) / (2.0 * h)
            worst = max(worst, float(np.max(np.abs(dg))))
    return worst
