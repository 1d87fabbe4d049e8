"""Executable no-eigenvalue criteria and coupling thresholds.

Pointwise criteria are checked on a radial grid and, for closed-form
families, by the sign of the leading large-``r`` term of the slack.  A
criterion ``Holds`` only when both parts pass; ``Fails`` always comes with a
concrete radius where the inequality is violated.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import specfun
from .errors import ArgumentOutOfDomain, NonConvergence
from .potentials import Potential, PotentialFamily
from .symbols import KineticSymbol, SymbolKind, mourre_mu, virial_q

#: Default radial grid.
GRID_N = 512
GRID_R = (1e-6, 1e6)
#: Relative slack tolerance; absorbs the ~1e-9 finite-difference error in q and mu.
SLACK_RTOL = 1e-7
EPS_GRID = tuple(k / 100 for k in range(1, 100))
BOUNDARY_RTOL = 1e-12


class Status(str, enum.Enum):
    HOLDS = "Holds"
    FAILS = "Fails"
    INCONCLUSIVE = "Inconclusive"


class FormulaId(str, enum.Enum):
    EQ4_0 = "Eq4_0"
    EQ4_2 = "Eq4_2"
    DICHO1 = "Dicho1"
    THM5 = "Thm5"
    LIEB_THIRRING = "LiebThirring"


def _jsonable(value):
    if isinstance(value, enum.Enum):
        return value.value
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (np.floating, np.integer)):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return repr(value)  # JSON has no inf/nan
    return value


@dataclass
class CriterionVerdict:
    """Outcome of a pointwise criterion.

    ``witness`` is a radius: the first violation for ``Fails``, otherwise
    the radius of smallest slack.  Points are ``(witness, 0, ..., 0)``.
    """

    criterion: str
    status: Status
    margin: float
    witness: float | None
    grid_spec: dict
    epsilon: float | None = None
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = self.grid_spec.get("d", 3)
        point = None if self.witness is None else [self.witness] + [0.0] * (d - 1)
        return _jsonable({
            "criterion": self.criterion,
            "status": self.status,
            "margin": self.margin,
            "witness": point,
            "witness_radius": self.witness,
            "grid_spec": self.grid_spec,
            "epsilon": self.epsilon,
            "details": self.details,
        })

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


@dataclass
class ThresholdReport:
    """A coupling threshold, the constants behind it and an optional verdict.

    ``compared_value`` is the quantity tested against ``threshold_value``
    (a supplied norm or coupling, or a computed left-hand side).
    """

    threshold_value: float
    formula_id: FormulaId
    intermediates: dict
    verdict: Status | None = None
    compared_value: float | None = None
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return _jsonable({
            "threshold_value": self.threshold_value,
            "formula_id": self.formula_id,
            "intermediates": self.intermediates,
            "verdict": self.verdict,
            "compared_value": self.compared_value,
            "notes": self.notes,
        })

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def compare(value: float, bound: float) -> Status:
    """``Holds`` if ``value < bound`` strictly, ``Inconclusive`` at the boundary."""
    if abs(value - bound) <= BOUNDARY_RTOL * max(abs(bound), abs(value), 1e-300):
        return Status.INCONCLUSIVE
    return Status.HOLDS if value < bound else Status.FAILS


# radial grids
def default_radii(V: Potential, n: int = GRID_N, include_origin: bool = True) -> tuple[np.ndarray, dict]:
    lo, hi = GRID_R
    hi_eff = min(hi, V.r_max)
    r = np.geomspace(lo, hi_eff, n)
    origin = include_origin and not V.singular_at_origin
    if origin:
        r = np.concatenate(([0.0], r))
    spec = {"kind": "log", "n": n, "r_min": lo, "r_max": hi_eff, "origin": origin, "d": V.d}
    return r, spec


def _grid(V: Potential, radii, include_origin: bool = True):
    if radii is None:
        return default_radii(V, include_origin=include_origin)
    r = np.sort(np.asarray(radii, dtype=float))
    if V.singular_at_origin or not include_origin:
        r = r[r > 0]
    r = r[r <= V.r_max]
    spec = {"kind": "explicit", "n": int(r.size), "r_min": float(r.min()), "r_max": float(r.max()),
            "origin": bool(r[0] == 0.0), "d": V.d}
    return r, spec


# tail sign analysis
def _combine(*weighted):
    """Sum ``weight * terms`` over ``(weight, {exponent: coef})`` pairs.

    Returns ``{exponent: (coefficient, magnitude scale)}``.
    """
    out: dict[float, list[float]] = {}
    for w, terms in weighted:
        for p, c in terms.items():
            acc = out.setdefault(p, [0.0, 0.0])
            acc[0] += w * c
            acc[1] += abs(w * c)
    return out


def tail_sign(combined: dict, known_below: float, rtol: float = SLACK_RTOL) -> tuple[str, float | None]:
    """Sign of the leading surviving term: ``positive``, ``negative``, ``zero`` or ``unknown``.

    ``known_below`` is the smallest decay exponent not captured by the
    expansions; a decision at or beyond it is ``unknown``.
    """
    for p in sorted(combined):
        coef, scale = combined[p]
        if abs(coef) <= rtol * scale or coef == 0.0:
            continue
        if p >= known_below:
            return "unknown", p
        return ("positive" if coef > 0 else "negative"), p
    return ("zero", None) if math.isinf(known_below) else ("unknown", None)


def _expansion_order(V: Potential) -> float:
    if V.family is PotentialFamily.COULOMB:
        return math.inf
    e = V.tail_exponent() / 2.0
    if V.family is PotentialFamily.INVERSE_POWER and V.C == 0:
        return math.inf
    if V.family is PotentialFamily.POSITIVE_BUMP and V.C == 0:
        return math.inf
    return 2.0 * e + 4.0


def _first_violation(slack, r_lo: float, r_hi: float) -> float:
    return brentq(slack, r_lo, r_hi, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=400)


def _pointwise(
    name: str, r: np.ndarray, grid_spec: dict, slack, scale, strict: bool,
    tail: tuple[str, float | None], details: dict, epsilon: float | None = None,
) -> CriterionVerdict:
    """Grid-plus-tail verdict for ``slack >= 0`` (``> 0`` if ``strict``).

    The reported margin is the tolerance-adjusted slack
    ``slack + SLACK_RTOL * scale``, so that points where the slack is below
    the resolution of its own terms are not misread as violations.
    """
    s = slack(r)
    adj = s + SLACK_RTOL * scale(r)
    details = dict(details)
    details["tail"] = {"sign": tail[0], "exponent": tail[1]}
    imin = int(np.argmin(adj))
    details["argmin_radius"] = float(r[imin])
    details["raw_margin"] = float(s.min())
    margin = float(adj[imin])
    bad = np.flatnonzero(adj < 0)
    if bad.size:
        j = int(bad[0])
        witness = float(r[j])
        if j > 0 and s[j - 1] > 0 and s[j] < 0:
            witness = _first_violation(lambda t: float(slack(np.array([t]))[0]), float(r[j - 1]), float(r[j]))
        return CriterionVerdict(name, Status.FAILS, margin, witness, grid_spec, epsilon, details)
    if tail[0] == "negative":
        # violated beyond the grid: walk outwards for a finite witness
        far = np.geomspace(r[-1], r[-1] * 1e100, 2001)
        fs = slack(far) + SLACK_RTOL * scale(far)
        neg = np.flatnonzero(fs < 0)
        witness = float(far[neg[0]]) if neg.size else math.inf
        details["note"] = "violated in the tail beyond the grid"
        return CriterionVerdict(name, Status.FAILS, min(margin, float(fs.min())), witness, grid_spec, epsilon, details)
    boundary = margin <= 0.0 if strict else margin < 0.0
    if boundary or tail[0] == "unknown" or (strict and tail[0] == "zero"):
        if tail[0] == "unknown":
            details["note"] = "no closed-form tail analysis available"
        elif boundary:
            details["note"] = "strict inequality not resolved (zero slack)"
        return CriterionVerdict(name, Status.INCONCLUSIVE, margin, float(r[imin]), grid_spec, epsilon, details)
    return CriterionVerdict(name, Status.HOLDS, margin, float(r[imin]), grid_spec, epsilon, details)


def _tail_terms(V: Potential):
    tt = V.tail_terms()
    if tt is None:
        return None
    return tt


def check_virial(sym: KineticSymbol, V: Potential, radii=None) -> CriterionVerdict:
    """Pointwise ``V + q W < 0`` with ``q = 1/b'(1-)``.

    Slack is ``-(V + q W)``; strict inequality is required.
    """
    q = virial_q(sym)
    r, spec = _grid(V, radii)
    tt = _tail_terms(V)
    if tt is None:
        tail = ("unknown", None)
    else:
        tail = tail_sign(_combine((-1.0, tt[0]), (-q, tt[1])), _expansion_order(V))
    return _pointwise(
        "virial", r, spec,
        slack=lambda t: -(V.radial(t) + q * V.radial_w(t)),
        scale=lambda t: np.abs(V.radial(t)) + q * np.abs(V.radial_w(t)),
        strict=True, tail=tail, details={"q": q, "symbol": sym.describe(), "potential": V.describe()},
    )


def decay_condition(V: Potential) -> tuple[bool, str]:
    """The ``C^1``, bounded, ``<x>^(-gamma)`` decay premise of the commutator criteria."""
    if V.singular_at_origin:
        return False, "potential is singular at the origin"
    p = V.tail_exponent()
    if p is None:
        return True, "decay not certified (no closed-form tail)"
    return p > 0, f"|V| ~ r^(-{p})"


def check_mourre_basic(sym: KineticSymbol, V: Potential, radii=None) -> CriterionVerdict:
    """Pointwise ``-mu V - W >= 0``."""
    mu = mourre_mu(sym)
    r, spec = _grid(V, radii)
    ok, why = decay_condition(V)
    details = {"mu": mu, "decay_condition": why, "symbol": sym.describe(), "potential": V.describe()}
    tt = _tail_terms(V)
    tail = ("unknown", None) if tt is None else tail_sign(_combine((-mu, tt[0]), (-1.0, tt[1])), _expansion_order(V))
    verdict = _pointwise(
        "mourre_basic", r, spec,
        slack=lambda t: -mu * V.radial(t) - V.radial_w(t),
        scale=lambda t: mu * np.abs(V.radial(t)) + np.abs(V.radial_w(t)),
        strict=False, tail=tail, details=details,
    )
    if not ok and verdict.status is Status.HOLDS:
        verdict.status = Status.INCONCLUSIVE
        verdict.details["note"] = f"decay premise fails: {why}"
    return verdict


class LowerBoundKind(str, enum.Enum):
    HARDY = "Hardy"
    RELATIVISTIC_FX = "RelativisticFx"


@dataclass(frozen=True)
class LowerBound:
    """Position-space lower bound ``F`` with ``Psi'(p^2/2) p^2 >= F(x)``.

    Both choices bound ``Psi`` itself; multiplying by ``mu`` (from
    ``2 u Psi' >= mu Psi``) gives the bound on ``Psi'(p^2/2) p^2``.
    """

    kind: LowerBoundKind
    alpha: float
    d: int = 3
    m: float = 1.0

    @classmethod
    def hardy(cls, d: int, alpha: float) -> LowerBound:
        return cls(LowerBoundKind.HARDY, float(alpha), int(d))

    @classmethod
    def relativistic_fx(cls, alpha: float, m: float = 1.0, d: int = 3) -> LowerBound:
        return cls(LowerBoundKind.RELATIVISTIC_FX, float(alpha), int(d), float(m))

    def constants(self) -> dict:
        a, d = self.alpha, self.d
        if self.kind is LowerBoundKind.HARDY:
            return {"C_hardy": specfun.hardy_constant(d, a)}
        if d != 3 or self.m != 1.0:
            raise ArgumentOutOfDomain("RelativisticFx is defined for d = 3, m = 1")
        if not 0 < a < 2:
            raise ArgumentOutOfDomain(f"RelativisticFx needs 0 < alpha < 2, got {a}")
        d1 = 0.5 * (3.0 ** (a / 2) - 1.0)
        d2 = 2.0 ** (-a / 2) * (3.0 ** (a / 2) - 1.0)
        c2 = specfun.hardy_constant(3, 2.0)
        ca = specfun.hardy_constant(3, a)
        return {"D1": d1, "D2": d2, "C_2": c2, "C_alpha": ca, "A": 1.0 / (d1 * c2), "B": 1.0 / (d2 * ca)}

    def psi_bound(self, r: np.ndarray) -> np.ndarray:
        """Lower bound on ``Psi(p^2/2)`` as a multiplication operator."""
        k = self.constants()
        with np.errstate(divide="ignore"):
            if self.kind is LowerBoundKind.HARDY:
                return k["C_hardy"] * r ** (-self.alpha)
            return 1.0 / (k["A"] * r * r + k["B"] * r**self.alpha)

    def tail(self) -> tuple[dict, float]:
        """Large-``r`` expansion of :meth:`psi_bound` and its truncation order."""
        k = self.constants()
        if self.kind is LowerBoundKind.HARDY:
            return {self.alpha: k["C_hardy"]}, math.inf
        a_, b_ = k["A"], k["B"]
        return {2.0: 1.0 / a_, 4.0 - self.alpha: -b_ / a_**2}, 6.0 - 2.0 * self.alpha

    def validate_symbol(self, sym: KineticSymbol):
        if self.kind is LowerBoundKind.HARDY:
            if sym.kind is not SymbolKind.FRACTIONAL or sym.alpha != self.alpha:
                raise ArgumentOutOfDomain("Hardy lower bound applies to the fractional symbol with the same alpha")
            if not 0 < self.alpha < self.d:
                raise ArgumentOutOfDomain(f"Hardy bound needs 0 < alpha < d, got alpha={self.alpha}, d={self.d}")
        else:
            if sym.kind is not SymbolKind.RELATIVISTIC or sym.m != 1.0 or sym.alpha != self.alpha:
                raise ArgumentOutOfDomain("RelativisticFx applies to the relativistic symbol with m = 1 and the same alpha")


def check_mourre_composite(
    sym: KineticSymbol, V: Potential, F: LowerBound, radii=None, eps_grid=EPS_GRID,
) -> CriterionVerdict:
    """Search ``eps`` for pointwise ``-eps mu V + (1 - eps) mu F - W >= 0``.

    Returns the verdict for the ``eps`` with the largest margin among the
    passing values, or the best-margin ``eps`` overall if none passes.
    """
    F.validate_symbol(sym)
    if F.d != V.d:
        raise ArgumentOutOfDomain(f"lower bound dimension {F.d} differs from potential dimension {V.d}")
    mu = mourre_mu(sym)
    r, spec = _grid(V, radii, include_origin=False)
    ok, why = decay_condition(V)
    f_tail, f_order = F.tail()
    tt = _tail_terms(V)
    fvals = mu * F.psi_bound(r)
    v, w = V.radial(r), V.radial_w(r)
    base = {"mu": mu, "lower_bound": F.kind.value, "lower_bound_constants": F.constants(),
            "decay_condition": why, "symbol": sym.describe(), "potential": V.describe()}

    best = None
    for eps in eps_grid:
        if not 0 < eps < 1:
            raise ArgumentOutOfDomain(f"eps must lie in (0, 1), got {eps}")
        if tt is None:
            tail = ("unknown", None)
        else:
            comb = _combine((-eps * mu, tt[0]), ((1 - eps) * mu, f_tail), (-1.0, tt[1]))
            tail = tail_sign(comb, min(_expansion_order(V), f_order))

        def slack(t, eps=eps):
            if t is r:
                return -eps * mu * v + (1 - eps) * fvals - w
            return -eps * mu * V.radial(t) + (1 - eps) * mu * F.psi_bound(t) - V.radial_w(t)

        def scale(t, eps=eps):
            return eps * mu * np.abs(v) + (1 - eps) * fvals + np.abs(w)

        verdict = _pointwise("mourre_composite", r, spec, slack, scale, strict=False,
                             tail=tail, details=base, epsilon=eps)
        rank = (verdict.status is Status.HOLDS, verdict.margin)
        if best is None or rank > best[0]:
            best = (rank, verdict)
    verdict = best[1]
    if not ok and verdict.status is Status.HOLDS:
        verdict.status = Status.INCONCLUSIVE
        verdict.details["note"] = f"decay premise fails: {why}"
    return verdict


# Birman-Schwinger thresholds
def _check_bs_dims(d: int, alpha: float):
    if int(d) != d or d < 3:
        raise ArgumentOutOfDomain(f"Birman-Schwinger thresholds need an integer d >= 3, got {d}")


def bs_threshold_compact(d: int, alpha: float, R: float, sup_norm: float | None = None) -> ThresholdReport:
    """Largest ``||V||_inf`` excluding non-positive eigenvalues for ``supp V`` in a ball of radius ``R``."""
    _check_bs_dims(d, alpha)
    c = specfun.riesz_constant(d, alpha)
    if not 0 < alpha < 2:
        raise ArgumentOutOfDomain(f"compact-support threshold needs 0 < alpha < 2, got {alpha}")
    if not R > 0:
        raise ArgumentOutOfDomain(f"support radius must be positive, got {R}")
    w = specfun.sphere_area(d)
    value = d * (2.0**alpha - 1.0) / (c * w * 2.0 * math.sqrt(2.0) * math.sqrt(5.0**d) * (2.0 * R) ** alpha)
    inter = {"d": d, "alpha": alpha, "R": R, "C_d_alpha": c, "omega_d": w}
    rep = ThresholdReport(value, FormulaId.EQ4_0, inter)
    if sup_norm is not None:
        rep.compared_value = float(sup_norm)
        rep.verdict = compare(float(sup_norm), value)
    return rep


def bs_check_global(d: int, alpha: float, sup_norm: float, l1_norm: float) -> ThresholdReport:
    """Left-hand side of the global Birman-Schwinger criterion; ``Holds`` iff it is below 1."""
    _check_bs_dims(d, alpha)
    if not (math.isfinite(sup_norm) and math.isfinite(l1_norm)) or sup_norm < 0 or l1_norm < 0:
        raise ArgumentOutOfDomain("norms must be finite and nonnegative")
    c = specfun.riesz_constant(d, alpha)
    w = specfun.sphere_area(d)
    k_inf = 8.0 * 5.0**d * w * w / (d * d * (2.0**alpha - 1.0) ** 2)
    lhs = 2.0 * c * c * (k_inf * sup_norm**2 + l1_norm**2)
    inter = {"d": d, "alpha": alpha, "C_d_alpha": c, "omega_d": w, "sup_coefficient": k_inf,
             "sup_norm": sup_norm, "l1_norm": l1_norm, "lhs": lhs}
    return ThresholdReport(1.0, FormulaId.EQ4_2, inter, compare(lhs, 1.0), lhs)


def dicho_f(rho, alpha: float, i_alpha: float, d: int = 3):
    """Bound function ``1000 rho^(2a) / (9 (2^d - 1)^2) + I^2 rho^(2a - 6)``."""
    rho = np.asarray(rho, dtype=float)
    return 1000.0 * rho ** (2 * alpha) / (9.0 * (2.0**d - 1.0) ** 2) + i_alpha**2 * rho ** (2 * alpha - 6)


def dicho_threshold(alpha: float, d: int = 3, coupling: float | None = None) -> ThresholdReport:
    """Lower bound on the coupling below which no non-positive eigenvalue exists.

    Computed twice: from the displayed closed form, and as
    ``1 / (4 sqrt(2) pi C sqrt(f(rho_min)))`` with ``f`` minimized exactly.
    """
    if d != 3:
        raise ArgumentOutOfDomain("the dichotomy bound is stated for d = 3")
    alpha = float(alpha)
    if not 1.5 < alpha < 2.0:
        raise ArgumentOutOfDomain(f"dichotomy bound needs 3/2 < alpha < 2, got {alpha}")
    i_a = specfun.i_alpha(alpha)
    c = specfun.riesz_constant(3, alpha)
    k7 = 2.0**d - 1.0
    kk = 3.0 * k7 / (10.0 * math.sqrt(10.0)) * i_a
    g = 3.0 / alpha - 1.0
    display = 1.0 / (4.0 * math.pi * c * i_a) * math.sqrt(
        alpha / 6.0 * kk ** (2.0 - 2.0 * alpha / 3.0) * g ** (1.0 - alpha / 3.0)
    )
    # stationary point of f: rho^6 = (3/alpha - 1) K^2
    rho_min = kk ** (1.0 / 3.0) * g ** (1.0 / 6.0)
    rho_printed = kk ** (1.0 / 3.0) * g ** (1.0 / 3.0)
    f_min = float(dicho_f(rho_min, alpha, i_a, d))
    f_closed = 3.0 * i_a**2 / alpha * kk ** (2.0 * alpha / 3.0 - 2.0) * g ** (alpha / 3.0 - 1.0)
    proof_form = 1.0 / (4.0 * math.sqrt(2.0) * math.pi * c * math.sqrt(f_min))
    if abs(proof_form - display) > 1e-12 * display:
        raise NonConvergence(f"threshold forms disagree: {display!r} vs {proof_form!r}")
    inter = {
        "alpha": alpha, "d": d, "C_3_alpha": c, "I_alpha": i_a, "two_pow_d_minus_1": k7, "K": kk,
        "rho_min": rho_min, "rho_min_printed": rho_printed,
        "f_rho_min": f_min, "f_rho_min_closed": f_closed,
        "f_rho_min_printed": float(dicho_f(rho_printed, alpha, i_a, d)),
        "A_display": display, "A_proof_form": proof_form,
    }
    rep = ThresholdReport(display, FormulaId.DICHO1, inter, notes=[
        "rho_min is the exact minimizer (exponent 1/6 on 3/alpha - 1); rho_min_printed uses exponent 1/3",
    ])
    if coupling is not None:
        rep.compared_value = float(coupling)
        rep.verdict = compare(float(coupling), display)
    return rep


def lt_count_report(alpha: float, coupling: float, L_alpha: float) -> ThresholdReport:
    """Upper bound ``4 pi L omega_3 C^(3/alpha) I_3`` on the number of negative eigenvalues."""
    alpha, coupling, L_alpha = float(alpha), float(coupling), float(L_alpha)
    if not 0 < alpha < 2:
        raise ArgumentOutOfDomain(f"count bound needs 0 < alpha < 2, got {alpha}")
    if coupling < 0:
        raise ArgumentOutOfDomain(f"coupling must be nonnegative, got {coupling}")
    if not L_alpha > 0:
        raise ArgumentOutOfDomain(f"L_alpha must be positive, got {L_alpha}")
    i3 = specfun.i_alpha(3.0)
    w = specfun.sphere_area(3)
    power = coupling ** (3.0 / alpha)
    bound = 4.0 * math.pi * L_alpha * w * power * i3
    inter = {"alpha": alpha, "C": coupling, "L_alpha": L_alpha, "I_3": i3, "omega_d": w,
             "C_pow_3_over_alpha": power, "direct_integral_bound": 4.0 * math.pi * L_alpha * power * i3}
    return ThresholdReport(bound, FormulaId.LIEB_THIRRING, inter, notes=[
        "direct_integral_bound is L int |V|^(3/alpha) dx, which has no extra omega_d factor",
    ])


def lt_count_bound(alpha: float, coupling: float, L_alpha: float) -> float:
    return lt_count_report(alpha, coupling, L_alpha).threshold_value
