"""Deterministic generators of test densities and blow-up sequences.

Every generator attaches machine-checkable analytic facts to the field it
produces (exact Laplacian constants, normal-derivative values, masses), so
the calculus operators can be validated against them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import quad as _quad

from . import calculus, verify
from .constants import BoundParams
from .errors import MVLabError, SpecOutOfDomain, UnresolvableScale
from .grid import HALF_BALL, Domain, ScalarField
from .quantization import DensitySequence

KINDS = ("constant", "quadratic", "harmonic_product", "poisson_peak",
         "bubble", "reflected_bubble", "linear_x0", "sum")


@dataclass(frozen=True)
class GeneratorSpec:
    """Recipe for one synthetic density field."""

    kind: str
    amplitude: float = 1.0
    center: tuple[float, ...] | None = None
    scale: float | None = None           # bubble width, wave number, ...
    offset: float = 0.0
    axis: int = 1                        # lateral axis for products/linears
    pole: tuple[float, ...] | None = None  # harmonic peak pole (outside domain)
    parts: tuple["GeneratorSpec", ...] = ()
    seed: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise MVLabError(f"unknown generator kind {self.kind!r}")
        if self.amplitude < 0:
            raise MVLabError("generator amplitude must be nonnegative")
        if self.offset < 0:
            raise MVLabError("generator offset must be nonnegative")


def bubble_mass(n: int, lam: float, amplitude: float = 1.0,
                rho: float | None = None) -> float:
    """Mass of the bubble profile amplitude * lam^-n (1 + |x|^2/lam^2)^-n
    inside B_rho (whole space when rho is None). The total is lam-invariant."""
    upper = math.inf if rho is None else rho / lam
    value, _ = _quad(lambda t: t ** (n - 1) * (1.0 + t * t) ** (-n), 0.0, upper,
                     limit=200)
    return calculus.vol_sphere(n - 1) * amplitude * value


def bubble_critical_ratio(n: int, amplitude: float) -> float:
    """Exact sup of Delta(e) / e^((n+2)/n) for the bubble profile: the
    radial computation gives 2 n^2 amplitude^(-2/n), independent of lam."""
    return 2.0 * n * n * amplitude ** (-2.0 / n)


def _values_and_facts(spec: GeneratorSpec, domain: Domain):
    n = domain.dimension
    pts = domain.points()
    kind = spec.kind

    if kind == "constant":
        vals = np.full(pts.shape[0], spec.amplitude + spec.offset)
        facts = {"laplacian_const": 0.0, "neumann_const": 0.0,
                 "harmonic": True, "subharmonic": True}
        return vals, facts

    if kind == "quadratic":
        center = np.asarray(spec.center if spec.center is not None else domain.center,
                            dtype=float)
        sq = np.sum((pts - center) ** 2, axis=-1)
        vals = spec.amplitude * sq + spec.offset
        facts = {
            "laplacian_const": -2.0 * n * spec.amplitude,
            "neumann_const": 2.0 * spec.amplitude * float(center[0]),
            "subharmonic": True,
        }
        return vals, facts

    if kind == "harmonic_product":
        k = spec.scale if spec.scale is not None else 1.0
        ax = spec.axis
        if not 1 <= ax < n:
            raise MVLabError(f"harmonic_product axis {ax} out of range for n={n}")
        x0_max = float(np.max(np.abs(pts[:, 0][domain.in_mask.ravel()])))
        if k * x0_max >= 0.5 * math.pi:
            raise SpecOutOfDomain(
                f"cos({k} x0) changes sign on the domain (k*max|x0| = {k * x0_max:.3g})")
        vals = spec.amplitude * np.cos(k * pts[:, 0]) * np.cosh(k * pts[:, ax]) + spec.offset
        facts = {"laplacian_const": 0.0, "harmonic": True, "subharmonic": True,
                 "neumann_const": 0.0}
        return vals, facts

    if kind == "poisson_peak":
        if spec.pole is None:
            raise MVLabError("poisson_peak needs a pole location")
        pole = np.asarray(spec.pole, dtype=float)
        gap = float(np.linalg.norm(pole - domain.center))
        if gap <= 1.02 * domain.radius:
            raise SpecOutOfDomain(
                f"pole at distance {gap:.3g} must sit outside the domain radius "
                f"{domain.radius:.3g}")
        dist = np.linalg.norm(pts - pole, axis=-1)
        if n == 2:
            big = spec.scale if spec.scale is not None else 1.1 * (gap + domain.radius)
            vals = spec.amplitude * np.log(big / np.maximum(dist, 1e-300)) + spec.offset
        else:
            vals = spec.amplitude * dist ** (2 - n) + spec.offset
        facts = {"laplacian_const": 0.0, "harmonic": True, "subharmonic": True}
        return vals, facts

    if kind in ("bubble", "reflected_bubble"):
        lam = spec.scale
        if lam is None or lam <= 0:
            raise MVLabError("bubble needs a positive scale")
        center = np.asarray(spec.center if spec.center is not None else domain.center,
                            dtype=float)
        if kind == "reflected_bubble":
            if domain.kind != HALF_BALL:
                raise SpecOutOfDomain("reflected bubble lives on a half-ball")
            if abs(center[0]) > 1e-12:
                raise SpecOutOfDomain("reflected bubble center must sit on x0 = 0")
        sq = np.sum((pts - center) ** 2, axis=-1)
        vals = spec.amplitude * lam ** (-n) * (1.0 + sq / lam**2) ** (-n) + spec.offset
        facts = {
            "sup_value": spec.amplitude * lam ** (-n) + spec.offset,
            "sup_at": tuple(center),
            "mass_full_space": bubble_mass(n, lam, spec.amplitude),
            "mass_within": lambda rho, _n=n, _l=lam, _a=spec.amplitude: bubble_mass(_n, _l, _a, rho),
            "critical_ratio": bubble_critical_ratio(n, spec.amplitude),
            "scale": lam,
        }
        if kind == "reflected_bubble":
            facts["neumann_const"] = 0.0  # even in x0 by construction
        return vals, facts

    if kind == "linear_x0":
        vals = spec.amplitude * pts[:, 0] + spec.offset
        facts = {"laplacian_const": 0.0, "harmonic": True, "subharmonic": True,
                 "neumann_const": -spec.amplitude}
        return vals, facts

    if kind == "sum":
        if not spec.parts:
            raise MVLabError("sum generator needs parts")
        total = np.zeros(pts.shape[0])
        merged: dict = {"laplacian_const": 0.0, "neumann_const": 0.0,
                        "harmonic": True, "subharmonic": True}
        for part in spec.parts:
            vals, facts = _values_and_facts(part, domain)
            total += vals
            if "laplacian_const" in facts and "laplacian_const" in merged:
                merged["laplacian_const"] += facts["laplacian_const"]
            else:
                merged.pop("laplacian_const", None)
            if "neumann_const" in facts and "neumann_const" in merged:
                merged["neumann_const"] += facts["neumann_const"]
            else:
                merged.pop("neumann_const", None)
            merged["harmonic"] = merged.get("harmonic", False) and facts.get("harmonic", False)
            merged["subharmonic"] = (merged.get("subharmonic", False)
                                     and facts.get("subharmonic", False))
        total += spec.offset
        return total, merged

    raise MVLabError(f"unhandled generator kind {kind!r}")


def gen(spec: GeneratorSpec, domain: Domain) -> ScalarField:
    """Sample the generator on the domain nodes, with analytic facts attached."""
    vals, facts = _values_and_facts(spec, domain)
    vals = vals.reshape(domain.shape)
    inside = domain.in_mask
    low = float(np.min(vals[inside]))
    if low < -1e-12 * max(1.0, float(np.max(np.abs(vals[inside])))):
        raise SpecOutOfDomain(f"generator {spec.kind} goes negative (min {low:.3g})")
    values = np.where(inside, np.maximum(vals, 0.0), np.nan)
    facts["spec"] = spec
    return ScalarField(domain, values, density=True, facts=facts)


def gen_sequence(specs: list[GeneratorSpec], schedule: list[float],
                 domain: Domain,
                 background: GeneratorSpec | None = None,
                 params: BoundParams | None = None,
                 fit_bounds: bool = True) -> DensitySequence:
    """Blow-up sequence e_i = background + sum of planted bubbles at scale
    lambda_i. The schedule must decrease strictly and stay resolvable
    (lambda_min >= 4h). Fitted nonlinearities (a_i, b_i) are attached."""
    if not specs:
        raise MVLabError("need at least one planted bubble spec")
    for s in specs:
        if s.kind not in ("bubble", "reflected_bubble"):
            raise MVLabError("planted specs must be bubbles")
    schedule = [float(lam) for lam in schedule]
    if any(l2 >= l1 for l1, l2 in zip(schedule, schedule[1:])):
        raise MVLabError("bubble schedule must be strictly decreasing")
    if schedule[-1] < 4.0 * domain.spacing:
        raise UnresolvableScale(
            f"lambda_min = {schedule[-1]} below the 4h = {4 * domain.spacing} guardrail")

    base = gen(background, domain) if background is not None else None
    fields = []
    fitted = []
    for lam in schedule:
        total = base.values.copy() if base is not None else np.where(
            domain.in_mask, 0.0, np.nan)
        for s in specs:
            bubble = gen(replace(s, scale=lam), domain)
            total = total + bubble.values
        field = ScalarField(domain, total, density=True)
        fields.append(field)
        if fit_bounds:
            a_req = verify.fit_nonlinearity(field, 0.0, 0.0)
            if domain.kind == HALF_BALL and domain.flat_node_count > 0:
                b_req = verify.fit_boundary_nonlinearity(field, 0.0, 0.0)
            else:
                b_req = 0.0
            fitted.append((a_req, b_req))
    if params is None:
        n = domain.dimension
        a_max = max(f[0] for f in fitted) if fitted else 0.0
        b_max = max(f[1] for f in fitted) if fitted else 0.0
        params = BoundParams(n, a=a_max, b=b_max)
    from .quantization import make_density_sequence

    return make_density_sequence(fields, params,
                                 fitted=tuple(fitted) if fitted else None)


def random_bubble_layout(domain: Domain, count: int, min_separation: float,
                         seed: int, region_fraction: float = 0.6,
                         max_tries: int = 10_000) -> list[tuple[float, ...]]:
    """Deterministic seeded placement of bubble centers on grid nodes inside
    the shrunken domain, pairwise separated by at least ``min_separation``."""
    rng = np.random.default_rng(seed)
    pts = domain.in_mask_points()
    dist = domain.distance(pts)
    candidates = pts[dist <= region_fraction * domain.radius]
    if domain.kind == HALF_BALL:
        candidates = candidates[candidates[:, 0] >= 0.0]
    if candidates.shape[0] == 0:
        raise MVLabError("no candidate nodes for bubble placement")
    chosen: list[np.ndarray] = []
    for _ in range(max_tries):
        if len(chosen) == count:
            break
        pick = candidates[rng.integers(candidates.shape[0])]
        if all(np.linalg.norm(pick - c) >= min_separation for c in chosen):
            chosen.append(pick)
    if len(chosen) < count:
        raise MVLabError(
            f"could not place {count} bubbles {min_separation} apart (seed {seed})")
    return [tuple(c) for c in chosen]
