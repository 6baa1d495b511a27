"""Recurrence/transience verdicts from the integral criteria.

Every divergence question is answered from the power-log class of the
relevant profile near its end point.  When all states of a family carry
declared tails the class is known analytically; it is then used with exact
thresholds provided a numeric fit on the same grid corroborates it.
Otherwise the numeric fit is used with the boundary bands.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .asymptotics import (AsymptoticFit, Decision, DecisionBands, End, GridSpec, IntegralForm, corroborates,
                          decide_integral, declared_fit, dominant_class, fit_samples)
from .core import (INF, ORIGIN, SUP, EnvelopeSelector, LevyTriplet2D, ProcessFamily, RadialDensity, SecondMoment,
                   cumulative_tail_integral, envelope_ball_tail, envelope_density, envelope_second_moment,
                   quasi_unimodality_certificate, radial_symbol_profile, second_moment_classifier)
from .errors import FitError, LevyRecError, ModelError

# marker for a term whose power-log class cannot be read off declared metadata
UNKNOWN = "unknown"


class VerdictValue(str, Enum):
    RECURRENT = "Recurrent"
    TRANSIENT = "Transient"
    INCONCLUSIVE = "Inconclusive"


RECURRENT = VerdictValue.RECURRENT
TRANSIENT = VerdictValue.TRANSIENT
INCONCLUSIVE = VerdictValue.INCONCLUSIVE


@dataclass(frozen=True)
class CriteriaConfig:
    origin_grid: GridSpec = GridSpec(1e-6, 1e-3, 48)
    infinity_grid: GridSpec = GridSpec(1e4, 1e7, 48)
    bands: DecisionBands = DecisionBands()
    corroborate_a: float = 0.05
    corroborate_b: float = 0.5
    use_declared: bool = True


DEFAULT_CONFIG = CriteriaConfig()


@dataclass(frozen=True)
class Gate:
    name: str
    outcome: str  # holds | fails | unknown | not_required | assumed
    detail: str = ""

    def as_dict(self):
        return {"name": self.name, "outcome": self.outcome, "detail": self.detail}


@dataclass
class Assessment:
    """Decision on one integral test, with the fit behind it."""

    label: str
    form: IntegralForm
    decision: Decision
    fit: Optional[AsymptoticFit] = None
    zero_profile: bool = False
    notes: list = field(default_factory=list)

    def as_dict(self):
        return {"label": self.label, "form": self.form.value, "decision": self.decision.value,
                "zero_profile": self.zero_profile, "fit": self.fit.as_dict() if self.fit else None,
                "notes": list(self.notes)}


@dataclass
class Verdict:
    value: VerdictValue
    criterion: str
    fits: list = field(default_factory=list)
    assumptions: list = field(default_factory=list)
    assessments: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    strategy: dict = field(default_factory=dict)

    def as_dict(self):
        return {"value": self.value.value, "criterion": self.criterion,
                "fits": [f.as_dict() for f in self.fits],
                "assumptions": [g.as_dict() for g in self.assumptions],
                "assessments": [a.as_dict() for a in self.assessments],
                "notes": list(self.notes), "strategy": self.strategy}


@dataclass
class ClassificationReport:
    verdict: VerdictValue
    verdicts: list
    contradiction: bool = False
    agreement: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    empirical: Optional[dict] = None

    def as_dict(self):
        return {"verdict": self.verdict.value, "contradiction": self.contradiction,
                "agreement": list(self.agreement), "warnings": list(self.warnings),
                "verdicts": [v.as_dict() for v in self.verdicts], "empirical": self.empirical}


# ---------------------------------------------------------------------------
# declared power-log classes
#
# A class (a, b) means C rho^a L^b with L = ln(1/rho) at the origin and
# ln(rho) at infinity; None means the term vanishes identically (near the
# end point); UNKNOWN means nothing is declared.


def _finite_support(triplet: LevyTriplet2D):
    dens = triplet.jump_density
    return not dens.is_zero and math.isfinite(dens.support_cap)


def _rings(triplet):
    return any(m > 0 for _, m in triplet.rings())


def symbol_class_origin(triplet: LevyTriplet2D, c: float):
    """Class of q(rho) as rho -> 0 for a frozen triplet with diffusion coefficient c."""
    classes = []
    if c > 0 or _rings(triplet):
        classes.append((2.0, 0.0))
    dens = triplet.jump_density
    if not dens.is_zero:
        if math.isfinite(dens.support_cap):
            classes.append((2.0, 0.0))
        elif dens.declared_tail is None:
            return UNKNOWN
        else:
            d, g = dens.declared_tail.delta, dens.declared_tail.log_exponent
            if -4.0 < d < -2.0:
                classes.append((-2.0 - d, g))
            elif d == -4.0:
                classes.append((2.0, max(g + 1.0, 0.0)))
            elif d < -4.0:
                classes.append((2.0, 0.0))
            else:
                return UNKNOWN
    return dominant_class(classes, End.ORIGIN, "sum")


def _density_moment_classes(dens: RadialDensity):
    """Classes at infinity of (rho^3 nu(B_rho^c), rho int_{B_rho}|y|^2 nu, rho^5 n(rho))."""
    if dens.is_zero:
        return None, None, None
    if math.isfinite(dens.support_cap):
        return None, (1.0, 0.0), None
    if dens.declared_tail is None:
        return UNKNOWN, UNKNOWN, UNKNOWN
    d, g = dens.declared_tail.delta, dens.declared_tail.log_exponent
    density = (5.0 + d, g)
    if d == -2.0:
        # the tail mass needs g < -1 and carries one extra logarithm
        return (3.0, g + 1.0), (3.0, g), density
    if d > -4.0:
        return (5.0 + d, g), (5.0 + d, g), density
    if d == -4.0:
        return (1.0, g), (1.0, max(g + 1.0, 0.0)), density
    return (5.0 + d, g), (1.0, 0.0), density


def moment_classes(triplet: LevyTriplet2D):
    tail, moment, density = _density_moment_classes(triplet.jump_density)
    if _rings(triplet):
        moment = UNKNOWN if moment is UNKNOWN else dominant_class([moment, (1.0, 0.0)], End.INFINITY, "sum")
    return tail, moment, density


def tails_class(triplet: LevyTriplet2D):
    """Class of rho * int_0^rho u nu(B_u^c) du as rho -> inf."""
    tail, moment, _ = moment_classes(triplet)
    if UNKNOWN in (tail, moment):
        return UNKNOWN
    return dominant_class([tail, moment], End.INFINITY, "sum")


def _envelope_class(family: ProcessFamily, sel: EnvelopeSelector, end: End, per_state):
    try:
        states = family.states()
    except LevyRecError:
        return UNKNOWN
    classes = []
    for s in states:
        if s.triplet is None:
            return UNKNOWN
        cls = per_state(s)
        if cls is UNKNOWN:
            return UNKNOWN
        classes.append(cls)
    return dominant_class(classes, end, "sup" if sel is SUP else "inf")


# ---------------------------------------------------------------------------
# assessing one integral test


def _assess(label, sample, form: IntegralForm, declared, cfg: CriteriaConfig) -> Assessment:
    end = End.ORIGIN if form is IntegralForm.ORIGIN_WEIGHTED else End.INFINITY
    grid = cfg.origin_grid if end is End.ORIGIN else cfg.infinity_grid
    rho = grid.radii()
    notes = []
    try:
        vals = np.array([sample(r) for r in rho], dtype=float)
    except LevyRecError as exc:
        return Assessment(label, form, Decision.INCONCLUSIVE, notes=[f"evaluation failed: {exc}"])
    if np.all(vals == 0.0):
        # 1/g is infinite on the whole grid
        return Assessment(label, form, Decision.DIVERGENT, zero_profile=True, notes=["profile vanishes on the grid"])
    numeric = None
    try:
        numeric = fit_samples(rho, vals, end, cfg.bands.residual_ceiling, label=label)
    except FitError as exc:
        notes.append(f"numeric fit failed: {exc}")
    fit = numeric
    if cfg.use_declared and declared not in (None, UNKNOWN) and numeric is not None:
        if corroborates(declared, numeric, cfg.corroborate_a, cfg.corroborate_b):
            fit = declared_fit(declared[0], declared[1], vals, rho, end, numeric, label=label)
        else:
            notes.append(f"declared class {declared} not corroborated by the numeric fit "
                         f"(a={numeric.exponent_a:.4g}, b={numeric.log_exponent_b:.4g})")
    if fit is None:
        return Assessment(label, form, Decision.INCONCLUSIVE, notes=notes)
    if not fit.reliable:
        notes.append(f"fit residual {fit.residual:.3g} above ceiling")
    return Assessment(label, form, decide_integral(fit, form, cfg.bands), fit, notes=notes)


def _fits(assessments):
    return [a.fit for a in assessments if a.fit is not None]


def _strategy(family):
    try:
        return family.strategy()
    except LevyRecError:
        return {}


# ---------------------------------------------------------------------------
# Chung-Fuchs


def classify_chung_fuchs(family: ProcessFamily, cfg: CriteriaConfig = DEFAULT_CONFIG) -> Verdict:
    """Origin behaviour of sup_x q and inf_x q against int_0 rho d rho / g."""
    gates = [Gate("radiality", "holds", "enforced by the radial triplet type"),
             Gate("Im q = 0", "holds", "automatic for radial symbols"),
             Gate("open-set irreducibility", "assumed", "recorded, not verified")]

    def per_state(s):
        return symbol_class_origin(s.triplet, s.triplet.c(ORIGIN))

    try:
        rec = _assess("sup symbol at origin", lambda r: radial_symbol_profile(family, SUP, r),
                      IntegralForm.ORIGIN_WEIGHTED, _envelope_class(family, SUP, End.ORIGIN, per_state), cfg)
        tra = _assess("inf symbol at origin", lambda r: radial_symbol_profile(family, INF, r),
                      IntegralForm.ORIGIN_WEIGHTED, _envelope_class(family, INF, End.ORIGIN, per_state), cfg)
    except LevyRecError as exc:
        return Verdict(INCONCLUSIVE, "chung_fuchs", assumptions=gates, notes=[f"envelope unavailable: {exc}"],
                       strategy=_strategy(family))
    notes = ["transience side holds for some r > 0; the grid sits at the origin end"]
    value = INCONCLUSIVE
    recurrent = rec.decision is Decision.DIVERGENT
    transient = tra.decision is Decision.CONVERGENT
    if recurrent and transient:
        notes.append("sup and inf envelopes disagree (sup divergent, inf convergent is impossible)")
    elif recurrent:
        value = RECURRENT
    elif transient:
        value = TRANSIENT
    return Verdict(value, "chung_fuchs", _fits([rec, tra]), gates, [rec, tra], notes, _strategy(family))


# ---------------------------------------------------------------------------
# tail criteria


def _transience_gates(family: ProcessFamily):
    """Quasi-unimodality (uniform in x) and the infinite-second-moment surrogate of the infinite quadratic liminf of inf_x q(x, xi) / |xi|^2."""
    gates = []
    try:
        certs = [quasi_unimodality_certificate(s.triplet) for s in family.states()]
    except LevyRecError as exc:
        certs = []
        gates.append(Gate("quasi-unimodality", "unknown", str(exc)))
    if certs:
        if all(certs):
            u0 = max(c.u0 for c in certs)
            gates.append(Gate("quasi-unimodality", "holds",
                              f"density nonincreasing beyond u0={u0:g} ({certs[0].method}); "
                              "monotone beyond u0 implies monotone beyond any u0' > max(u0, 1)"))
        else:
            gates.append(Gate("quasi-unimodality", "unknown", "monotonicity not certified"))
    sm = second_moment_classifier(family, INF)
    outcome = {SecondMoment.INFINITE: "holds", SecondMoment.FINITE: "fails",
               SecondMoment.INDETERMINATE: "unknown"}[sm]
    gates.append(Gate("infinite quadratic liminf via inf second moment", outcome, f"inf-envelope second moment {sm.value}"))
    return gates


def _gates_hold(gates):
    return all(g.outcome in ("holds", "not_required", "assumed") for g in gates)


def _has_measure(family):
    try:
        return all(s.triplet is not None for s in family.states()) and family.has_measure()
    except LevyRecError:
        return False


def classify_by_tails(family: ProcessFamily, cfg: CriteriaConfig = DEFAULT_CONFIG) -> Verdict:
    """Divergence of int^inf (rho sup/inf int_0^rho u nu(B_u^c) du)^-1 d rho."""
    if not _has_measure(family):
        cf = classify_chung_fuchs(family, cfg)
        gates = [Gate("infinite quadratic liminf via inf second moment", "fails", "no Levy measure")]
        return Verdict(cf.value, "tails->chung_fuchs", cf.fits, gates + cf.assumptions, cf.assessments,
                       ["no Levy measure: the tail criteria are void, defers to the Chung-Fuchs verdict"],
                       _strategy(family))
    rec = _assess("rho * sup cumulative tail", lambda r: r * cumulative_tail_integral(family, SUP, r),
                  IntegralForm.INFINITY_RECIPROCAL,
                  _envelope_class(family, SUP, End.INFINITY, lambda s: tails_class(s.triplet)), cfg)
    tra = _assess("rho * inf cumulative tail", lambda r: r * cumulative_tail_integral(family, INF, r),
                  IntegralForm.INFINITY_RECIPROCAL,
                  _envelope_class(family, INF, End.INFINITY, lambda s: tails_class(s.triplet)), cfg)
    gates = [Gate("recurrence direction", "not_required",
                  "divergence of the cumulative-tail integral implies the half-plane version, hence the "
                  "strip version, which is equivalent to the Chung-Fuchs recurrence condition")]
    gates += _transience_gates(family)
    notes = []
    value = INCONCLUSIVE
    recurrent = rec.decision is Decision.DIVERGENT
    transient = tra.decision is Decision.CONVERGENT
    if recurrent and transient:
        notes.append("sup and inf envelopes disagree")
    elif recurrent:
        value = RECURRENT
    elif transient:
        if _gates_hold(gates):
            value = TRANSIENT
        else:
            notes.append("inf-envelope integral converges but a transience gate is not established; "
                         "only the half-plane convergence follows")
    return Verdict(value, "tails", _fits([rec, tra]), gates, [rec, tra], notes, _strategy(family))


def classify_sufficient_p5(family: ProcessFamily, cfg: CriteriaConfig = DEFAULT_CONFIG) -> Verdict:
    """Sufficient tests built from the ball tail, the truncated second moment and the density."""
    if not _has_measure(family):
        return Verdict(INCONCLUSIVE, "p5", notes=["no Levy measure declared"], strategy=_strategy(family))
    assessments = []
    notes = []
    sm_sup = second_moment_classifier(family, SUP)
    if sm_sup is SecondMoment.FINITE:
        notes.append("sup second moment finite: the cumulative-tail integral diverges")

    def cls(sel, pick):
        return _envelope_class(family, sel, End.INFINITY, lambda s: _pick(moment_classes(s.triplet), pick))

    def both(sel):
        a, b = cls(sel, 0), cls(sel, 1)
        if UNKNOWN in (a, b):
            return UNKNOWN
        return dominant_class([a, b], End.INFINITY, "sum")

    rec = _assess("rho^3 sup tail + rho sup moment",
                  lambda r: r ** 3 * envelope_ball_tail(family, SUP, r) + r * envelope_second_moment(family, SUP, r),
                  IntegralForm.INFINITY_RECIPROCAL, both(SUP), cfg)
    assessments.append(rec)
    recurrent = sm_sup is SecondMoment.FINITE or rec.decision is Decision.DIVERGENT

    tests = [
        ("rho^3 inf tail + rho inf moment",
         lambda r: r ** 3 * envelope_ball_tail(family, INF, r) + r * envelope_second_moment(family, INF, r), both(INF)),
        ("rho^3 inf tail", lambda r: r ** 3 * envelope_ball_tail(family, INF, r), cls(INF, 0)),
        ("rho inf moment", lambda r: r * envelope_second_moment(family, INF, r), cls(INF, 1)),
    ]
    certs = [quasi_unimodality_certificate(s.triplet) for s in family.states()]
    if all(certs):
        tests.append(("rho^5 inf density", lambda r: r ** 5 * envelope_density(family, INF, r), cls(INF, 2)))
    else:
        notes.append("density shortcut skipped: decreasing_beyond not certified")
    fired = None
    for label, fn, declared in tests:
        a = _assess(label, fn, IntegralForm.INFINITY_RECIPROCAL, declared, cfg)
        assessments.append(a)
        if a.decision is Decision.CONVERGENT and fired is None:
            fired = label
    gates = [Gate("recurrence direction", "not_required", "sufficient test for the cumulative-tail divergence")]
    gates += _transience_gates(family)
    value = INCONCLUSIVE
    if recurrent and fired:
        notes.append("recurrence and transience tests both fired")
    elif recurrent:
        value = RECURRENT
    elif fired:
        if _gates_hold(gates):
            value = TRANSIENT
            notes.append(f"transience via '{fired}'")
        else:
            notes.append(f"'{fired}' converges but a transience gate is not established")
    return Verdict(value, "p5", _fits(assessments), gates, assessments, notes, _strategy(family))


def _pick(classes, i):
    return classes[i]


# ---------------------------------------------------------------------------
# regularly varying densities


def classify_regvar(density, cfg: CriteriaConfig = DEFAULT_CONFIG) -> Verdict:
    """Trichotomy by tail index for a Levy process with regularly varying radial density.

    delta < -4 recurrent, -4 < delta <= -2 transient, and at delta = -4
    transient when int^inf d rho / (rho^5 n(rho)) converges.  When that
    integral diverges the cumulative-tail class decides (the density test
    is only sufficient).
    """
    if isinstance(density, ProcessFamily):
        if density.state_mode != "constant" or density.triplet is None:
            raise ModelError("regular-variation rule applies to Levy processes with a declared density")
        density = density.triplet.jump_density
    tail = density.declared_tail
    if tail is None:
        raise ModelError("regular-variation rule needs a declared tail index")
    d, g = tail.delta, tail.log_exponent
    if d > -2.0:
        raise ModelError(f"tail index {d} > -2 is not a planar Levy density tail")
    triplet = LevyTriplet2D(0.0, density)
    cert = quasi_unimodality_certificate(triplet)
    gates = [Gate("decreasing beyond u0", "holds" if cert else "unknown",
                  f"u0={cert.u0:g} ({cert.method})" if cert else "not certified")]
    if not cert:
        return Verdict(INCONCLUSIVE, "regvar", assumptions=gates, notes=["monotone tail not certified"])
    if d < -4.0:
        return Verdict(RECURRENT, "regvar", assumptions=gates, notes=[f"delta={d:g} < -4"])
    if d > -4.0:
        return Verdict(TRANSIENT, "regvar", assumptions=gates, notes=[f"-4 < delta={d:g} <= -2"])
    dens_test = _assess("rho^5 n(rho)", lambda r: r ** 5 * float(density.evaluate(ORIGIN, np.array([r]))[0]),
                        IntegralForm.INFINITY_RECIPROCAL, (1.0, g), cfg)
    if dens_test.decision is Decision.CONVERGENT:
        return Verdict(TRANSIENT, "regvar", _fits([dens_test]), gates, [dens_test],
                       ["delta=-4 and int d rho/(rho^5 n) converges"])
    family = ProcessFamily("regvar", triplet)
    tails = _assess("rho * cumulative tail", lambda r: r * cumulative_tail_integral(family, SUP, r),
                    IntegralForm.INFINITY_RECIPROCAL, tails_class(triplet), cfg)
    assessments = [dens_test, tails]
    if tails.decision is Decision.DIVERGENT:
        return Verdict(RECURRENT, "regvar", _fits(assessments), gates, assessments,
                       ["delta=-4, density test divergent, cumulative-tail integral divergent"])
    if tails.decision is Decision.CONVERGENT:
        return Verdict(TRANSIENT, "regvar", _fits(assessments), gates + [Gate("infinite quadratic liminf", "holds", "g >= -1")],
                       assessments, ["delta=-4, cumulative-tail integral convergent"])
    return Verdict(INCONCLUSIVE, "regvar", _fits(assessments), gates, assessments, ["delta=-4 boundary unresolved"])


# ---------------------------------------------------------------------------
# reconciliation


def reconcile(verdicts: Sequence[Verdict], empirical: Optional[dict] = None) -> ClassificationReport:
    """Combine verdicts; a Recurrent/Transient clash flags a contradiction.

    ``empirical`` is an advisory Monte Carlo summary with key ``verdict``
    (Recurrent-consistent / Transient-consistent / Borderline); a conflict
    with it only raises a warning.
    """
    if not verdicts:
        raise ValueError("reconcile needs at least one verdict")
    decided = [v for v in verdicts if v.value is not INCONCLUSIVE]
    values = {v.value for v in decided}
    warnings = []
    if len(values) > 1:
        return ClassificationReport(INCONCLUSIVE, list(verdicts), contradiction=True,
                                    warnings=["Recurrent and Transient verdicts both present: numerical or "
                                              "modelling fault"], empirical=empirical)
    value = decided[0].value if decided else INCONCLUSIVE
    agreement = [v.criterion for v in decided]
    if empirical:
        emp = str(empirical.get("verdict", ""))
        if (value is RECURRENT and emp.startswith("Transient")) or (value is TRANSIENT and emp.startswith("Recurrent")):
            warnings.append(f"Monte Carlo reports {emp}; finite-horizon simulation is advisory only")
    return ClassificationReport(value, list(verdicts), False, agreement, warnings, empirical)
