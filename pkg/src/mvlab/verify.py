"""End-to-end inequality checkers: Morrey suites, the nonlinear mean value
theorems, the shell-average monotonicity suite, hypothesis fitting, and
empirical constant estimation.

Verdicts are three-valued: Holds / Fails / HypothesisViolated. A violated
hypothesis (including energy above the smallness threshold) means the
inequality is not claimed, not that it failed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import calculus
from .constants import BoundParams, ConstantLedger, boundary_rhs, interior_rhs
from .errors import (
    AllNodesBelowFloor,
    EmptyFamily,
    MVLabError,
    RadiusOutOfRange,
)
from .grid import BALL, HALF_BALL, ScalarField, metric_deviation

HOLDS = "Holds"
FAILS = "Fails"
HYPOTHESIS_VIOLATED = "HypothesisViolated"


@dataclass(frozen=True)
class VerificationReport:
    claim: str
    lhs: float
    rhs: float
    margin: float
    verdict: str
    reason: str | None
    tol: float
    hypothesis: dict
    grid: dict
    ledger: ConstantLedger | None = None
    required_c: float | None = None

    def as_dict(self) -> dict:
        out = {
            "claim": self.claim,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "margin": self.margin,
            "verdict": self.verdict,
            "reason": self.reason,
            "tol": self.tol,
            "hypothesis": self.hypothesis,
            "grid": self.grid,
            "required_c": self.required_c,
        }
        if self.ledger is not None:
            out["ledger"] = self.ledger.as_dict()
        return out


def _grid_summary(e: ScalarField) -> dict:
    dom = e.domain
    out = {
        "kind": dom.kind,
        "dimension": dom.dimension,
        "radius": dom.radius,
        "spacing": dom.spacing,
        "center": [float(c) for c in dom.center],
        "node_count": dom.node_count,
    }
    if dom.metric is not None and not dom.metric.trivial:
        out["metric"] = dom.metric.name
        out["measured_metric_deviation"] = metric_deviation(dom.metric, dom)
    return out


def fit_nonlinearity(e: ScalarField, a0: float, a1: float,
                     e_floor_factor: float = 1e-8) -> float:
    """Smallest a with Delta e <= a0 + a1 e + a e^((n+2)/n) over the
    stencil-valid nodes where e clears the division floor; clamped at 0."""
    dom = e.domain
    n = dom.dimension
    lap = calculus.laplacian(e).values
    valid = np.isfinite(lap)
    floor = e_floor_factor * max(e.sup(), 0.0)
    mask = valid & (e.values > floor)
    if not np.any(mask):
        raise AllNodesBelowFloor("no stencil-valid node above the density floor")
    ev = e.values[mask]
    ratio = (lap[mask] - a0 - a1 * ev) / ev ** ((n + 2) / n)
    return max(0.0, float(np.max(ratio)))


def fit_boundary_nonlinearity(e: ScalarField, b0: float, b1: float,
                              e_floor_factor: float = 1e-8) -> float:
    """Boundary analogue on the flat nodes with exponent (n+1)/n."""
    dom = e.domain
    n = dom.dimension
    bv = calculus.normal_derivative(e)
    lin = np.ravel_multi_index(tuple(bv.indices.T), dom.shape)
    ev = e.values.ravel()[lin]
    floor = e_floor_factor * max(e.sup(), 0.0)
    mask = bv.finite() & (ev > floor)
    if not np.any(mask):
        raise AllNodesBelowFloor("no flat-boundary node above the density floor")
    ratio = (bv.values[mask] - b0 - b1 * ev[mask]) / ev[mask] ** ((n + 1) / n)
    return max(0.0, float(np.max(ratio)))


def _interior_bound_margin(e: ScalarField, params: BoundParams) -> tuple[float, tuple | None]:
    """Max of Delta e - (A0 + A1 e + a e^((n+2)/n)) over stencil-valid nodes
    and the worst node index."""
    n = e.domain.dimension
    lap = calculus.laplacian(e).values
    bound = params.A0 + params.A1 * e.values + params.a * e.values ** ((n + 2) / n)
    resid = lap - bound
    finite = np.isfinite(resid)
    if not np.any(finite):
        raise MVLabError("no stencil-valid nodes for the interior bound check")
    resid = np.where(finite, resid, -np.inf)
    k = int(np.argmax(resid))
    idx = np.unravel_index(k, e.domain.shape)
    return float(resid[idx]), idx


def _boundary_bound_margin(e: ScalarField, params: BoundParams) -> tuple[float, tuple | None]:
    n = e.domain.dimension
    bv = calculus.normal_derivative(e)
    lin = np.ravel_multi_index(tuple(bv.indices.T), e.domain.shape)
    ev = e.values.ravel()[lin]
    bound = params.B0 + params.B1 * ev + params.b * ev ** ((n + 1) / n)
    resid = bv.values - bound
    finite = np.isfinite(resid)
    if not np.any(finite):
        raise MVLabError("no usable flat-boundary nodes for the normal bound check")
    resid = np.where(finite, resid, -np.inf)
    k = int(np.argmax(resid))
    return float(resid[k]), tuple(int(x) for x in bv.indices[k])


def _report(claim: str, lhs: float, rhs: float, tol: float, hypothesis: dict,
            grid: dict, ledger: ConstantLedger | None, c: float) -> VerificationReport:
    margin = rhs - lhs
    verdict = HOLDS if margin >= -tol else FAILS
    required_c = lhs * c / rhs if rhs > 0 else None
    return VerificationReport(claim, float(lhs), float(rhs), float(margin),
                              verdict, None, tol, hypothesis, grid, ledger,
                              required_c)


def _violated(claim: str, reason: str, tol: float, hypothesis: dict, grid: dict,
              ledger: ConstantLedger | None = None) -> VerificationReport:
    return VerificationReport(claim, math.nan, math.nan, math.nan,
                              HYPOTHESIS_VIOLATED, reason, tol, hypothesis,
                              grid, ledger, None)


def verify_morrey(e: ScalarField, c: float, tol_k: float = 10.0) -> VerificationReport:
    """Sub-mean-value check e(center) <= c r^-n int e for fields passing the
    subharmonicity hypothesis (plus the Neumann sign on half-balls)."""
    dom = e.domain
    n = dom.dimension
    tol = tol_k * dom.spacing
    grid = _grid_summary(e)
    zero = BoundParams(n)
    hypothesis: dict = {}

    lap_margin, lap_node = _interior_bound_margin(e, zero)
    hypothesis["laplacian_margin"] = lap_margin
    if lap_margin > tol:
        return _violated("morrey", f"laplacian-positive@{lap_node}", tol,
                         hypothesis, grid)
    if dom.kind == HALF_BALL and dom.flat_node_count > 0:
        nd_margin, nd_node = _boundary_bound_margin(e, zero)
        hypothesis["normal_margin"] = nd_margin
        if nd_margin > tol:
            return _violated("morrey", f"normal-derivative-positive@{nd_node}",
                             tol, hypothesis, grid)

    energy = calculus.integrate(e)
    hypothesis["energy"] = energy
    lhs = e.at(dom.center)
    if dom.kind == BALL:
        if dom.radius > 1.0:
            raise RadiusOutOfRange("interior sub-mean-value check requires r <= 1")
        rhs = interior_rhs(zero, dom.radius, energy, c)
    else:
        rhs = boundary_rhs(zero, dom.radius, energy, c)
    return _report("morrey", lhs, rhs, tol, hypothesis, grid, None, c)


def _check_ledger_match(params: BoundParams, ledger: ConstantLedger) -> None:
    if params.a + params.b > 0 or ledger.a + ledger.b > 0:
        if params.a != ledger.a or params.b != ledger.b:
            raise MVLabError(
                f"ledger built for (a={ledger.a}, b={ledger.b}) but params have "
                f"(a={params.a}, b={params.b})")


def verify_interior_mvi(e: ScalarField, params: BoundParams,
                        ledger: ConstantLedger, tol_k: float = 10.0) -> VerificationReport:
    """Nonlinear interior mean value inequality on a ball of radius <= 1."""
    dom = e.domain
    if dom.kind != BALL:
        raise MVLabError("interior inequality lives on ball domains")
    n = dom.dimension
    if params.n != n:
        raise MVLabError("params dimension differs from the domain")
    _check_ledger_match(params, ledger)
    if dom.radius > 1.0:
        raise RadiusOutOfRange(f"the interior inequality is stated for radii r <= 1, got {dom.radius}")
    tol = tol_k * dom.spacing
    grid = _grid_summary(e)
    hypothesis: dict = {}

    if "measured_metric_deviation" in grid:
        if grid["measured_metric_deviation"] > ledger.delta + 1e-12:
            return _violated("interior-mvi",
                             f"metric-deviation {grid['measured_metric_deviation']:.3g} "
                             f"above delta={ledger.delta}",
                             tol, hypothesis, grid, ledger)

    lap_margin, lap_node = _interior_bound_margin(e, params)
    hypothesis["laplacian_margin"] = lap_margin
    if lap_margin > tol:
        return _violated("interior-mvi", f"laplacian-bound@{lap_node}", tol,
                         hypothesis, grid, ledger)

    energy = calculus.integrate(e)
    threshold = ledger.energy_threshold_interior()
    hypothesis["energy"] = energy
    hypothesis["energy_threshold"] = threshold
    if energy > threshold:
        return _violated("interior-mvi", "energy-above-threshold", tol,
                         hypothesis, grid, ledger)

    c = ledger.c_master
    lhs = e.at(dom.center)
    rhs = interior_rhs(params, dom.radius, energy, c)
    terms = {
        "A0_term": c * params.A0 * dom.radius**2,
        "morrey_term": c * dom.radius ** (-n) * energy,
        "A1_term": c * params.A1 ** (n / 2.0) * energy,
    }
    hypothesis["branch"] = max(terms, key=lambda k: terms[k])
    hypothesis["terms"] = terms
    return _report("interior-mvi", lhs, rhs, tol, hypothesis, grid, ledger, c)


def verify_boundary_mvi(e: ScalarField, params: BoundParams,
                        ledger: ConstantLedger, tol_k: float = 10.0) -> VerificationReport:
    """Nonlinear boundary mean value inequality on a half-ball (any r > 0)."""
    dom = e.domain
    if dom.kind != HALF_BALL:
        raise MVLabError("boundary inequality lives on half-ball domains")
    n = dom.dimension
    if params.n != n:
        raise MVLabError("params dimension differs from the domain")
    _check_ledger_match(params, ledger)
    tol = tol_k * dom.spacing
    grid = _grid_summary(e)
    hypothesis: dict = {}

    lap_margin, lap_node = _interior_bound_margin(e, params)
    hypothesis["laplacian_margin"] = lap_margin
    if lap_margin > tol:
        return _violated("boundary-mvi", f"laplacian-bound@{lap_node}", tol,
                         hypothesis, grid, ledger)
    if dom.flat_node_count > 0:
        nd_margin, nd_node = _boundary_bound_margin(e, params)
        hypothesis["normal_margin"] = nd_margin
        if nd_margin > tol:
            return _violated("boundary-mvi", f"normal-bound@{nd_node}", tol,
                             hypothesis, grid, ledger)

    energy = calculus.integrate(e)
    threshold = ledger.energy_threshold_boundary()
    hypothesis["energy"] = energy
    hypothesis["energy_threshold"] = threshold
    if energy > threshold:
        return _violated("boundary-mvi", "energy-above-threshold", tol,
                         hypothesis, grid, ledger)

    lhs = e.at(dom.center)
    rhs = boundary_rhs(params, dom.radius, energy, ledger.c_master)
    return _report("boundary-mvi", lhs, rhs, tol, hypothesis, grid, ledger,
                   ledger.c_master)


@dataclass(frozen=True)
class LargeRadiusCheck:
    r: float
    lhs: float
    rhs: float
    passed: bool


@dataclass(frozen=True)
class MonotonicityReport:
    profile: calculus.ShellProfile
    y0: float
    monotone: bool
    worst_drop: float
    monotone_radii: tuple[float, ...]
    limit_value: float
    limit_target: float | None
    limit_kind: str          # "full" | "half" | "unresolved"
    limit_passed: bool | None
    large_r: tuple[LargeRadiusCheck, ...]
    hypothesis: dict
    tol: float
    verdict: str

    def as_dict(self) -> dict:
        return {
            "y0": self.y0,
            "monotone": self.monotone,
            "worst_drop": self.worst_drop,
            "limit_value": self.limit_value,
            "limit_target": self.limit_target,
            "limit_kind": self.limit_kind,
            "limit_passed": self.limit_passed,
            "large_r": [
                {"r": c.r, "lhs": c.lhs, "rhs": c.rhs, "passed": c.passed}
                for c in self.large_r
            ],
            "hypothesis": self.hypothesis,
            "tol": self.tol,
            "verdict": self.verdict,
            "profile": [
                {"r": s.r, "m": s.m, "nodes": s.node_count, "clipped": s.clipped}
                for s in self.profile.samples
            ],
        }


def monotonicity_suite(e: ScalarField, center, radii,
                       tol_k: float = 10.0, limit_rel_tol: float = 0.02,
                       limit_abs_tol: float | None = None,
                       hypothesis_mode: str = "pointwise") -> MonotonicityReport:
    """Shell-average checks for a Neumann-subharmonic field on a half-ball:
    monotonicity of M(r) on the unclipped range, the small-radius limit, and
    the large-radius inequality with the closed clipping constant."""
    dom = e.domain
    if dom.kind != HALF_BALL:
        raise MVLabError("the monotonicity suite runs on half-ball domains")
    n = dom.dimension
    center = np.asarray(center, dtype=float)
    y0 = float(center[0])
    tol = tol_k * dom.spacing
    hypothesis: dict = {"mode": hypothesis_mode}

    if hypothesis_mode == "pointwise":
        zero = BoundParams(n)
        lap_margin, lap_node = _interior_bound_margin(e, zero)
        hypothesis["laplacian_margin"] = lap_margin
        ok = lap_margin <= tol
        reason = None if ok else f"laplacian-positive@{lap_node}"
        if ok and dom.flat_node_count > 0:
            nd_margin, nd_node = _boundary_bound_margin(e, zero)
            hypothesis["normal_margin"] = nd_margin
            if nd_margin > tol:
                ok = False
                reason = f"normal-derivative-positive@{nd_node}"
    elif hypothesis_mode == "weak":
        weak = calculus.weak_subharmonic_test(e, tol_k=tol_k)
        hypothesis["weak_worst"] = weak.worst()
        ok = weak.subharmonic
        reason = None if ok else "weak-test-positive"
    else:
        raise MVLabError(f"unknown hypothesis mode {hypothesis_mode!r}")
    if not ok:
        profile = calculus.shell_profile(e, center, radii)
        return MonotonicityReport(profile, y0, False, math.nan, (), math.nan,
                                  None, "unresolved", None, (), hypothesis,
                                  tol, HYPOTHESIS_VIOLATED)

    profile = calculus.shell_profile(e, center, radii)
    rs = profile.radii()
    ms = profile.values()

    # (i)/(ii): nondecreasing where the clipping angle is frozen
    if y0 == 0.0:
        mono_sel = np.ones(len(rs), dtype=bool)
    else:
        mono_sel = rs <= y0 + 1e-12
    mono_r = rs[mono_sel]
    mono_m = ms[mono_sel]
    drops = np.diff(mono_m)
    worst_drop = float(np.min(drops)) if drops.size else 0.0
    monotone = bool(worst_drop >= -tol)

    # (iii): small-radius limit
    r_min = float(rs[0])
    limit_value = float(ms[0])
    vol = calculus.vol_sphere(n - 1)
    e_center = e.at(center)
    if limit_abs_tol is None:
        limit_abs_tol = 2.0 * vol * r_min**2
    if y0 == 0.0:
        limit_kind, target = "half", 0.5 * vol * e_center
    elif y0 > r_min:
        limit_kind, target = "full", vol * e_center
    else:
        limit_kind, target = "unresolved", None
    if target is None:
        limit_passed = None
    else:
        limit_passed = bool(abs(limit_value - target)
                            <= max(limit_rel_tol * abs(target), limit_abs_tol))

    # (iv): large-radius inequality, closed clipping constant
    big_r = float(rs[-1])
    checks = []
    if y0 > 0.0:
        total = calculus.integrate(e, subregion=(center, big_r))
        cn = calculus.cap_constant(n)
        lhs = vol * e_center
        for r, m in zip(rs, ms):
            if r > 0.5 * big_r:
                continue
            rhs = m + (cn * big_r ** (-n) * total if r > y0 else 0.0)
            checks.append(LargeRadiusCheck(float(r), lhs, float(rhs),
                                           bool(lhs <= rhs + tol)))

    all_ok = (monotone and (limit_passed is not False)
              and all(c.passed for c in checks))
    verdict = HOLDS if all_ok else FAILS
    return MonotonicityReport(profile, y0, monotone, worst_drop,
                              tuple(float(r) for r in mono_r), limit_value,
                              target, limit_kind, limit_passed, tuple(checks),
                              hypothesis, tol, verdict)


@dataclass(frozen=True)
class ConstantEstimate:
    value: float
    ratios: tuple[float, ...]
    argmax_index: int
    kind: str

    def as_dict(self) -> dict:
        return {"value": self.value, "argmax_index": self.argmax_index,
                "kind": self.kind, "ratios": list(self.ratios)}


def estimate_constant(family: list[ScalarField], kind: str,
                      tol_k: float = 10.0) -> ConstantEstimate:
    """Empirical mean-value constant: max over the family of
    e(center) r^n / int e. Every member must pass its subharmonicity
    hypothesis (with the Neumann sign for the boundary kind)."""
    if kind not in ("interior", "boundary"):
        raise MVLabError("kind must be 'interior' or 'boundary'")
    if not family:
        raise EmptyFamily("constant estimation needs at least one field")
    ratios = []
    for i, e in enumerate(family):
        dom = e.domain
        expected = BALL if kind == "interior" else HALF_BALL
        if dom.kind != expected:
            raise MVLabError(f"family member {i} is on a {dom.kind} domain, "
                             f"need {expected}")
        tol = tol_k * dom.spacing
        zero = BoundParams(dom.dimension)
        lap_margin, lap_node = _interior_bound_margin(e, zero)
        if lap_margin > tol:
            raise MVLabError(
                f"family member {i} is not subharmonic (margin {lap_margin:.3g} "
                f"at {lap_node})")
        if kind == "boundary" and dom.flat_node_count > 0:
            nd_margin, nd_node = _boundary_bound_margin(e, zero)
            if nd_margin > tol:
                raise MVLabError(
                    f"family member {i} violates the Neumann sign at {nd_node}")
        energy = calculus.integrate(e)
        if energy <= 0:
            raise MVLabError(f"family member {i} has nonpositive energy")
        ratios.append(e.at(dom.center) * dom.radius ** dom.dimension / energy)
    best = int(np.argmax(ratios))
    return ConstantEstimate(float(ratios[best]), tuple(ratios), best, kind)
