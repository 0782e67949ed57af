"""Bubble detector: extract concentration points from a finite sequence of
density fields with bounded energy.

A finite computed sequence cannot blow up, so divergence is operationalized:
a candidate point is a cluster (within a configurable radius, default 4h) of
per-index argmax nodes whose values exceed a declared divergence threshold
for at least ceil(sqrt(sequence length)) indices. At each witness index the
rescaled dichotomy either forces concentration (then the measured ball energy
must exceed the quantum hbar) or is consistent with boundedness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import calculus
from .constants import BoundParams, ConstantLedger, quantization_dichotomy
from .errors import MVLabError, QuantizationViolated
from .grid import HALF_BALL, ScalarField


@dataclass(frozen=True)
class DensitySequence:
    """Ordered density fields on a common domain with a shared energy bound."""

    fields: tuple[ScalarField, ...]
    energy_bound: float
    params: BoundParams
    energies: tuple[float, ...]
    fitted: tuple[tuple[float, float], ...] | None = None

    def __post_init__(self):
        if not self.fields:
            raise MVLabError("density sequence is empty")
        dom = self.fields[0].domain
        for f in self.fields:
            if f.domain is not dom:
                raise MVLabError("density sequence fields must share one domain")
            if not f.density:
                raise MVLabError("density sequence fields must be densities")
        tol = 1e-9 * max(1.0, self.energy_bound)
        for i, en in enumerate(self.energies):
            if en > self.energy_bound + tol:
                raise MVLabError(
                    f"field {i} has energy {en} above the bound {self.energy_bound}")

    @property
    def domain(self):
        return self.fields[0].domain

    def __len__(self) -> int:
        return len(self.fields)


def make_density_sequence(fields, params: BoundParams,
                          energy_bound: float | None = None,
                          fitted=None) -> DensitySequence:
    energies = tuple(calculus.integrate(f) for f in fields)
    if energy_bound is None:
        energy_bound = max(energies)
    return DensitySequence(tuple(fields), float(energy_bound), params,
                           energies, fitted)


def concentration_energy(e: ScalarField, x, delta: float) -> float:
    """Energy of e inside B_delta(x) clipped to the domain."""
    return calculus.integrate(e, subregion=(np.asarray(x, dtype=float), float(delta)))


@dataclass(frozen=True)
class ExtractionStep:
    index: int
    z: tuple[float, ...]
    R: float
    delta: float
    energy: float
    branch: str


@dataclass(frozen=True)
class MergeEvent:
    location: tuple[float, ...]
    merged_into: int
    distance: float


@dataclass(frozen=True)
class ConcentrationPoint:
    location: tuple[float, ...]
    witness_indices: tuple[int, ...]
    steps: tuple[ExtractionStep, ...]
    onset_index: int | None
    certified_energy: float | None
    exclusion_radius: float
    near_flat_boundary: bool


@dataclass(frozen=True)
class BoundedCandidate:
    """Cluster whose dichotomy never forced concentration: bounded after all."""

    location: tuple[float, ...]
    witness_indices: tuple[int, ...]
    max_value: float


@dataclass(frozen=True)
class ConcentrationReport:
    points: tuple[ConcentrationPoint, ...]
    bounded_candidates: tuple[BoundedCandidate, ...]
    merges: tuple[MergeEvent, ...]
    surviving_indices: tuple[int, ...]
    residual_bounds: dict = field(default_factory=dict)  # index -> sup on complement
    energy_bound: float = 0.0
    hbar: float = 0.0
    max_points: int = 0
    divergence_threshold: float = 0.0
    cluster_radius: float = 0.0
    budget_exhausted: bool = False

    @property
    def count(self) -> int:
        return len(self.points)

    def as_dict(self) -> dict:
        return {
            "count": self.count,
            "max_points": self.max_points,
            "energy_bound": self.energy_bound,
            "hbar": self.hbar,
            "divergence_threshold": self.divergence_threshold,
            "cluster_radius": self.cluster_radius,
            "budget_exhausted": self.budget_exhausted,
            "surviving_indices": list(self.surviving_indices),
            "residual_bounds": {str(k): v for k, v in sorted(self.residual_bounds.items())},
            "points": [
                {
                    "location": list(p.location),
                    "witness_indices": list(p.witness_indices),
                    "onset_index": p.onset_index,
                    "certified_energy": p.certified_energy,
                    "exclusion_radius": p.exclusion_radius,
                    "near_flat_boundary": p.near_flat_boundary,
                    "steps": [
                        {"index": s.index, "z": list(s.z), "R": s.R,
                         "delta": s.delta, "energy": s.energy, "branch": s.branch}
                        for s in p.steps
                    ],
                }
                for p in self.points
            ],
            "bounded_candidates": [
                {"location": list(c.location),
                 "witness_indices": list(c.witness_indices),
                 "max_value": c.max_value}
                for c in self.bounded_candidates
            ],
            "merges": [
                {"location": list(m.location), "merged_into": m.merged_into,
                 "distance": m.distance}
                for m in self.merges
            ],
        }


def _allowed_mask(domain, exclusions) -> np.ndarray:
    allowed = domain.in_mask.ravel().copy()
    if exclusions:
        pts = domain.points()
        for center, radius in exclusions:
            allowed &= np.linalg.norm(pts - center, axis=-1) > radius
    return allowed


def detect_concentration(seq: DensitySequence, ledger: ConstantLedger,
                         divergence_threshold: float,
                         cluster_radius: float | None = None,
                         exclusion_floor: float | None = None) -> ConcentrationReport:
    """Iteratively extract concentration points.

    Each round: find the largest cluster of above-threshold argmax nodes over
    the active subsequence; run the dichotomy along its witnesses; when some
    step forces concentration, certify the measured ball energies, record the
    point, exclude its neighborhood, and keep only the witness subsequence.
    Clusters that never force concentration are recorded as bounded and
    removed from the candidate search. Stops when no candidate remains or the
    budget floor(E / hbar) is reached.
    """
    if divergence_threshold <= 0:
        raise MVLabError("divergence threshold must be positive")
    if ledger.hbar is None or ledger.hbar <= 0:
        raise MVLabError("detector needs hbar = mu(a, b) > 0 in the ledger")
    dom = seq.domain
    n = dom.dimension
    h = dom.spacing
    if cluster_radius is None:
        cluster_radius = 4.0 * h
    if exclusion_floor is None:
        exclusion_floor = 8.0 * h
    hbar = ledger.hbar
    budget = int(math.floor(seq.energy_bound / hbar))
    need = int(math.ceil(math.sqrt(len(seq))))

    pts = dom.points()
    active = list(range(len(seq)))
    excluded: list[tuple[np.ndarray, float]] = []
    dismissed: list[tuple[np.ndarray, float]] = []
    points: list[ConcentrationPoint] = []
    bounded: list[BoundedCandidate] = []
    merges: list[MergeEvent] = []
    budget_exhausted = False

    while True:
        allowed = _allowed_mask(dom, excluded + dismissed)
        if not np.any(allowed):
            break
        argmaxes = {}
        for i in active:
            vals = np.where(allowed, seq.fields[i].values.ravel(), -np.inf)
            k = int(np.argmax(vals))
            argmaxes[i] = (pts[k], float(vals[k]))
        witnesses = [i for i in active if argmaxes[i][1] > divergence_threshold]
        if len(witnesses) < need:
            break

        # largest cluster of witness argmaxes; ties resolved toward the
        # lexicographically smallest anchor point
        best_anchor, best_members = None, []
        for i in witnesses:
            zi = argmaxes[i][0]
            members = [j for j in witnesses
                       if np.linalg.norm(argmaxes[j][0] - zi) <= cluster_radius]
            key = tuple(zi)
            if (len(members) > len(best_members)
                    or (len(members) == len(best_members)
                        and (best_anchor is None or key < best_anchor))):
                best_anchor, best_members = key, members
        if len(best_members) < need:
            break
        cluster = sorted(best_members)

        steps = []
        forced_any = False
        for i in cluster:
            z, value = argmaxes[i]
            R = value ** (1.0 / n)
            delta = R ** (-0.5)
            dich = quantization_dichotomy(R, seq.params, hbar, ledger.c_master)
            energy = concentration_energy(seq.fields[i], z, delta)
            if dich.forced:
                forced_any = True
                if energy <= hbar:
                    raise QuantizationViolated(
                        f"index {i}: dichotomy forces concentration at R={R:.6g} "
                        f"but the ball of radius {delta:.6g} holds {energy:.6g} <= "
                        f"hbar={hbar:.6g}")
            steps.append(ExtractionStep(i, tuple(float(x) for x in z), float(R),
                                        float(delta), float(energy),
                                        dich.branch.value))

        if not forced_any:
            loc = steps[-1].z
            bounded.append(BoundedCandidate(loc, tuple(cluster),
                                            max(argmaxes[i][1] for i in cluster)))
            # remove the candidate at the scale the dichotomy certified it,
            # or its own shoulder re-triggers the cluster search
            dismiss_radius = max(max(s.delta for s in steps), exclusion_floor)
            dismissed.append((np.asarray(loc), dismiss_radius))
            active = cluster
            continue

        # bounded findings are free; the energy budget caps extractions only
        if len(points) >= budget:
            budget_exhausted = True
            break

        location = np.asarray(steps[-1].z)
        delta_excl = max(max(s.delta for s in steps), exclusion_floor)

        merged = False
        for idx, existing in enumerate(points):
            gap = float(np.linalg.norm(location - np.asarray(existing.location)))
            if gap <= 2.0 * max(delta_excl, existing.exclusion_radius):
                merges.append(MergeEvent(tuple(location), idx, gap))
                grown = max(existing.exclusion_radius, gap + delta_excl)
                excluded[idx] = (np.asarray(existing.location), grown)
                points[idx] = ConcentrationPoint(
                    existing.location, existing.witness_indices, existing.steps,
                    existing.onset_index, existing.certified_energy, grown,
                    existing.near_flat_boundary)
                merged = True
                break
        if merged:
            active = cluster
            continue

        # onset: first witness index past which the fixed-scale ball at the
        # extracted point always carries more than hbar
        conc = {i: concentration_energy(seq.fields[i], location, delta_excl)
                for i in cluster}
        onset = None
        for pos, i in enumerate(cluster):
            if all(conc[j] > hbar for j in cluster[pos:]):
                onset = i
                break
        certified = (min(conc[j] for j in cluster if j >= onset)
                     if onset is not None else None)

        near_flat = bool(dom.kind == HALF_BALL and location[0] <= 4.0 * h)
        points.append(ConcentrationPoint(
            tuple(float(x) for x in location), tuple(cluster), tuple(steps),
            onset, certified, float(delta_excl), near_flat))
        excluded.append((location, float(delta_excl)))
        active = cluster

    allowed = _allowed_mask(dom, excluded)
    residual = {}
    for i in active:
        vals = seq.fields[i].values.ravel()[allowed]
        residual[i] = float(np.max(vals)) if vals.size else None
    return ConcentrationReport(
        tuple(points), tuple(bounded), tuple(merges), tuple(active), residual,
        seq.energy_bound, hbar, budget, divergence_threshold, cluster_radius,
        budget_exhausted)
