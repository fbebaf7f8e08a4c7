"""Projected one-dimensional systems and the dimension formula.

The x-extents of cylinder rectangles are generated by 2d interval
contractions indexed by the doubled alphabet: ratio a_i and offset tx_i for
unshifted symbols, ratio b_(i-d) and offset ty_(i-d) for shifted ones.  The
x-interval of the planar cylinder of a word equals the interval of its tau
lift in this system (and the y-interval corresponds to the omega lift).

The dimension of the measure combines entropy, the two Lyapunov exponents
and the dimension of the x-projection:

    dim = h / chi2 + ((chi2 - chi1) / chi2) * dim_projected

Under a per-state separation certificate for the interval system the
projected dimension is h / chi1; when only the pairwise norm conditions hold
it is min(h / chi1, 1) for almost every translation, and that mode is
flagged as a conjecture for any specific translation.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .coding import TransitionMatrix, transition_matrix
from .errors import MissingValue, NoCertificate, SOutOfRange
from .ifs import IfsSpec, SeparationReport, TransversalityReport, check_strong_separation, check_transversality
from .thermo import ThermoSummary, entropy, lyapunov_exponents, thermo_summary

__all__ = [
    "LineMapSystem", "line_system", "check_projection_ssc",
    "ProjectedMode", "ProjectedDim", "projected_dimension",
    "ly_dimension", "DimensionReport", "dimension_report",
]


@dataclass(frozen=True)
class LineMapSystem:
    """2d contractions of the unit interval, g_i(x) = ratios[i] * x + offsets[i]."""

    ratios: np.ndarray
    offsets: np.ndarray

    def __post_init__(self):
        self.ratios.setflags(write=False)
        self.offsets.setflags(write=False)

    def interval(self, i: int) -> tuple[float, float]:
        """Image of [0,1] under g_i (1-based symbol)."""
        r, c = self.ratios[i - 1], self.offsets[i - 1]
        return (c, c + r)


def line_system(spec: IfsSpec) -> LineMapSystem:
    ratios = np.array([m.a for m in spec.maps] + [m.b for m in spec.maps])
    offsets = np.array([m.tx for m in spec.maps] + [m.ty for m in spec.maps])
    return LineMapSystem(ratios=ratios, offsets=offsets)


def check_projection_ssc(sys: LineMapSystem, tm: TransitionMatrix) -> bool:
    """Per-state separation of the interval system.

    True when, for every state i, the intervals of its allowed successors are
    pairwise disjoint.  Conservative sufficient certificate for the projected
    dimension formula.
    """
    n = tm.entries.shape[0]
    for i in range(1, n + 1):
        children = [j for j in range(1, n + 1) if tm.allowed(i, j)]
        ivs = sorted(sys.interval(j) for j in children)
        for (a0, a1), (b0, b1) in zip(ivs, ivs[1:]):
            if b0 <= a1:
                return False
    return True


class ProjectedMode(Enum):
    SSC_FORMULA = "SscFormula"
    EXPECTED_MIN = "ExpectedMin"
    USER_SUPPLIED = "UserSupplied"
    MONTE_CARLO = "MonteCarlo"


@dataclass(frozen=True)
class ProjectedDim:
    value: float
    mode: ProjectedMode
    ssc_certified: bool


def projected_dimension(spec: IfsSpec, s: float,
                        mode_request: ProjectedMode | None = None,
                        user_value: float | None = None,
                        mc_options: dict | None = None) -> ProjectedDim | None:
    """Dimension of the x-projection of the measure.

    With no mode requested: the separation certificate selects the h/chi1
    formula; failing that, the pairwise norm conditions select
    min(h/chi1, 1) (an almost-every-translation value, flagged as such);
    otherwise None is returned and the caller reports the value as unknown.
    Explicit requests raise NoCertificate / MissingValue when their inputs
    are absent.
    """
    if not (0.0 < s < 2.0):
        raise SOutOfRange(f"s={s} must lie in (0,2)")
    certified = check_projection_ssc(line_system(spec), transition_matrix(spec.d, spec.l))

    if mode_request is ProjectedMode.USER_SUPPLIED:
        if user_value is None:
            raise MissingValue("UserSupplied mode needs a value")
        if not (0.0 <= user_value <= 1.0):
            raise SOutOfRange(f"user projected dimension {user_value} must lie in [0,1]")
        return ProjectedDim(value=float(user_value), mode=ProjectedMode.USER_SUPPLIED,
                            ssc_certified=certified)
    if mode_request is ProjectedMode.MONTE_CARLO:
        from . import sampling
        opts = dict(count=200_000, depth=30, seed=0)
        opts.update(mc_options or {})
        samples = sampling.sample_symbolic(spec, s, **opts)
        slope, _ = sampling.estimate_projected_dim(samples, sampling.Projection.X)
        return ProjectedDim(value=float(min(max(slope, 0.0), 1.0)),
                            mode=ProjectedMode.MONTE_CARLO, ssc_certified=certified)

    h = entropy(spec, s)
    chi1, _ = lyapunov_exponents(spec, s)
    ratio = h / chi1

    if mode_request is ProjectedMode.SSC_FORMULA or (mode_request is None and certified):
        if not certified:
            raise NoCertificate("projection separation certificate failed")
        value = ratio
        if value > 1.0:
            warnings.warn(f"h/chi1 = {value:.6f} clamped to 1 despite separation; "
                          "check the inputs", stacklevel=2)
            value = 1.0
        return ProjectedDim(value=value, mode=ProjectedMode.SSC_FORMULA, ssc_certified=certified)

    trans = check_transversality(spec)
    if mode_request is ProjectedMode.EXPECTED_MIN or (mode_request is None and trans.holds):
        return ProjectedDim(value=min(ratio, 1.0), mode=ProjectedMode.EXPECTED_MIN,
                            ssc_certified=certified)
    return None


def ly_dimension(thermo: ThermoSummary, projected: ProjectedDim) -> float:
    """dim = h/chi2 + ((chi2 - chi1)/chi2) * projected value.

    When the projected value is min(h/chi1, 1) this reduces algebraically to
    h/chi1 for h <= chi1 and to 1 + (h - chi1)/chi2 otherwise.
    """
    if thermo.chi2 <= 0.0:
        raise SOutOfRange("chi2 must be positive")
    return (thermo.entropy / thermo.chi2
            + (thermo.chi2 - thermo.chi1) / thermo.chi2 * projected.value)


@dataclass(frozen=True)
class DimensionReport:
    thermo: ThermoSummary
    projected: ProjectedDim | None
    ly_dim: float | None
    separation: SeparationReport
    transversality: TransversalityReport
    warnings: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "pressure": self.thermo.pressure,
            "entropy": self.thermo.entropy,
            "chi1": self.thermo.chi1,
            "chi2": self.thermo.chi2,
            "affinity_dim": self.thermo.affinity_dim,
            "projected_dim": None if self.projected is None else self.projected.value,
            "projected_mode": None if self.projected is None else self.projected.mode.value,
            "ly_dim": self.ly_dim,
            "strong_separation": self.separation.strong_separation,
            "transversality": self.transversality.holds,
            "warnings": list(self.warnings),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def dimension_report(spec: IfsSpec, s: float,
                     mode_request: ProjectedMode | None = None,
                     user_value: float | None = None,
                     mc_options: dict | None = None) -> DimensionReport:
    """Assemble hypothesis checks, thermodynamic summary and the dimension."""
    notes = []
    separation = check_strong_separation(spec)
    transversality = check_transversality(spec)
    summary = thermo_summary(spec, s)
    if not separation.strong_separation:
        notes.append("strong separation not certified at level 1; the dimension "
                     "formula is reported without its separation hypothesis")
    if all(m.a == m.b for m in spec.maps if not m.anti):
        notes.append("degenerate system: every diagonal map has a == b")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        projected = projected_dimension(spec, s, mode_request=mode_request,
                                        user_value=user_value, mc_options=mc_options)
    notes.extend(str(w.message) for w in caught)
    if projected is None:
        notes.append("projected dimension unknown: no separation certificate and "
                     "the pairwise norm conditions fail; dimension omitted")
        ly = None
    else:
        if projected.mode is ProjectedMode.EXPECTED_MIN:
            notes.append("projected dimension uses the almost-every-translation value "
                         "min(h/chi1, 1); for this specific translation it is a "
                         "conjecture, not a theorem")
        ly = ly_dimension(summary, projected)
    return DimensionReport(thermo=summary, projected=projected, ly_dim=ly,
                           separation=separation, transversality=transversality,
                           warnings=tuple(notes))
