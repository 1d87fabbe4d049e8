"""Radial potential families, their virial derivatives and exact zero modes.

Potentials are stored signed: attractive wells are negative.  Every family
is radial, ``V(x) = v(|x|)``, and exposes ``W(x) = x . grad V(x) = r v'(r)``
in closed form (from the spline derivative for tabulated data).

The hypergeometric family

    V(x) = -(2^a / Gamma(k)) Gamma((D+a)/2) Gamma(a/2+k) (1+|x|^2)^k F(-|x|^2),
    F(z) = 2F1reg((D+a)/2, a/2+k; D/2; z),   D = d + 2l,

annihilates ``phi(x) = P(x) (1+|x|^2)^(-k)`` under ``(-Delta)^(a/2) + V`` for
a harmonic polynomial ``P`` of degree ``l``.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import integrate
from scipy.interpolate import PchipInterpolator
from scipy.optimize import minimize_scalar

from . import specfun
from .errors import (
    ArgumentOutOfDomain,
    DimensionMismatch,
    DivergentNorm,
    InterpolationOutOfRange,
    QuadratureFailure,
    SingularPoint,
    UnsupportedHarmonicDegree,
)
from .tables import read_two_columns

#: Largest radius at which the hypergeometric series is evaluated.
HYP_R_MAX = math.sqrt(specfun.Z_MAX)
_CLOSED_FORM_TOL = 1e-14


class PotentialFamily(str, enum.Enum):
    INVERSE_POWER = "InversePower"
    COULOMB = "HomogeneousCoulomb"
    POSITIVE_BUMP = "PositiveBump"
    HYPERGEOMETRIC = "Hypergeometric"
    TABULATED = "TabulatedRadial"


@dataclass(frozen=True)
class Potential:
    """Immutable radial potential.  Build with the classmethod constructors."""

    family: PotentialFamily
    d: int = 3
    C: float | None = None
    beta: float | None = None
    gamma: float | None = None
    nu: float | None = None
    kappa: float | None = None
    alpha: float | None = None
    l: int | None = None
    table_r: tuple[float, ...] | None = None
    table_v: tuple[float, ...] | None = None
    _spline: PchipInterpolator | None = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        fam = PotentialFamily(self.family)
        object.__setattr__(self, "family", fam)
        if int(self.d) != self.d or self.d < 1:
            raise ArgumentOutOfDomain(f"dimension must be a positive integer, got {self.d}")
        if fam is PotentialFamily.INVERSE_POWER:
            _need(self.C is not None and self.C >= 0, f"InversePower needs C >= 0, got {self.C}")
            _need(self.beta is not None and self.beta > 0, f"InversePower needs beta > 0, got {self.beta}")
        elif fam is PotentialFamily.COULOMB:
            _need(self.C is not None and self.C >= 0, f"HomogeneousCoulomb needs C >= 0, got {self.C}")
            _need(self.gamma is not None and 0 < self.gamma < 1, f"HomogeneousCoulomb needs 0 < gamma < 1, got {self.gamma}")
        elif fam is PotentialFamily.POSITIVE_BUMP:
            _need(self.C is not None and self.C >= 0, f"PositiveBump needs C >= 0, got {self.C}")
            _need(self.nu is not None and self.nu > 0, f"PositiveBump needs nu > 0, got {self.nu}")
        elif fam is PotentialFamily.HYPERGEOMETRIC:
            _need(self.kappa is not None and self.kappa > 0, f"Hypergeometric needs kappa > 0, got {self.kappa}")
            _need(self.alpha is not None and 0 < self.alpha < 2, f"Hypergeometric needs 0 < alpha < 2, got {self.alpha}")
            _need(self.l is not None and int(self.l) == self.l and self.l >= 0, f"Hypergeometric needs integer l >= 0, got {self.l}")
        else:
            r = np.asarray(self.table_r, dtype=float)
            v = np.asarray(self.table_v, dtype=float)
            _need(r.ndim == 1 and r.shape == v.shape and r.size >= 2, "tabulated potential needs two equal columns, >= 2 rows")
            _need(r[0] == 0.0, f"tabulated radii must start at 0, got {r[0]}")
            _need(bool(np.all(np.diff(r) > 0)), "tabulated radii must be strictly increasing")
            _need(bool(np.all(np.isfinite(v))), "tabulated values must be finite")
            object.__setattr__(self, "_spline", PchipInterpolator(r, v, extrapolate=False))

    # constructors
    @classmethod
    def inverse_power(cls, C: float, beta: float, d: int = 3) -> Potential:
        """``-C (1 + |x|^2)^(-beta/2)``."""
        return cls(PotentialFamily.INVERSE_POWER, d=d, C=float(C), beta=float(beta))

    @classmethod
    def coulomb(cls, C: float, gamma: float, d: int = 3) -> Potential:
        """``-C |x|^(-gamma)``."""
        return cls(PotentialFamily.COULOMB, d=d, C=float(C), gamma=float(gamma))

    @classmethod
    def positive_bump(cls, C: float, nu: float, d: int = 3) -> Potential:
        """``+C (1 + |x|^2)^(-nu)``."""
        return cls(PotentialFamily.POSITIVE_BUMP, d=d, C=float(C), nu=float(nu))

    @classmethod
    def hypergeometric(cls, kappa: float, alpha: float, d: int = 3, l: int = 0) -> Potential:
        return cls(PotentialFamily.HYPERGEOMETRIC, d=d, kappa=float(kappa), alpha=float(alpha), l=int(l))

    @classmethod
    def closed_form_hypergeometric(cls, alpha: float, d: int = 3, l: int = 0) -> Potential:
        """The member ``kappa = (d + 2l - alpha)/2`` with an algebraic closed form."""
        return cls.hypergeometric((d + 2 * l - alpha) / 2.0, alpha, d, l)

    @classmethod
    def tabulated(cls, r, v, d: int = 3) -> Potential:
        return cls(
            PotentialFamily.TABULATED, d=d,
            table_r=tuple(float(x) for x in r), table_v=tuple(float(x) for x in v),
        )

    @property
    def delta(self) -> int:
        return self.d + 2 * (self.l or 0)

    @property
    def is_closed_form(self) -> bool:
        """True for hypergeometric members with ``kappa = (delta - alpha)/2``."""
        if self.family is not PotentialFamily.HYPERGEOMETRIC:
            return False
        return abs(self.kappa - (self.delta - self.alpha) / 2.0) <= _CLOSED_FORM_TOL * max(1.0, self.kappa)

    @property
    def r_max(self) -> float:
        """Largest radius at which the potential can be evaluated."""
        if self.family is PotentialFamily.TABULATED:
            return self.table_r[-1]
        if self.family is PotentialFamily.HYPERGEOMETRIC and not self.is_closed_form:
            return HYP_R_MAX
        return math.inf

    @property
    def singular_at_origin(self) -> bool:
        return self.family is PotentialFamily.COULOMB and self.C > 0

    def describe(self) -> dict:
        out = {"family": self.family.value, "d": self.d}
        for name in ("C", "beta", "gamma", "nu", "kappa", "alpha", "l"):
            value = getattr(self, name)
            if value is not None:
                out[name] = value
        if self.family is PotentialFamily.TABULATED:
            out["n_samples"] = len(self.table_r)
            out["r_max"] = self.r_max
        return out

    # radial profile and its virial derivative
    def radial(self, r) -> np.ndarray:
        """Signed values ``v(r)`` for an array of radii."""
        r = self._check_radii(r)
        fam = self.family
        if fam is PotentialFamily.INVERSE_POWER:
            return -self.C * (1.0 + r * r) ** (-self.beta / 2.0)
        if fam is PotentialFamily.POSITIVE_BUMP:
            return self.C * (1.0 + r * r) ** (-self.nu)
        if fam is PotentialFamily.COULOMB:
            if self.C == 0:
                return np.zeros_like(r)
            if np.any(r == 0):
                raise SingularPoint("HomogeneousCoulomb is singular at the origin")
            return -self.C * r ** (-self.gamma)
        if fam is PotentialFamily.HYPERGEOMETRIC:
            return np.array([self._hyp_value(float(x)) for x in r])
        return self._spline(r)

    def radial_w(self, r) -> np.ndarray:
        """``W = r v'(r) = x . grad V``."""
        r = self._check_radii(r)
        fam = self.family
        if fam is PotentialFamily.INVERSE_POWER:
            b = self.beta
            return self.C * b * r * r * (1.0 + r * r) ** (-b / 2.0 - 1.0)
        if fam is PotentialFamily.POSITIVE_BUMP:
            return -2.0 * self.nu * self.C * r * r * (1.0 + r * r) ** (-self.nu - 1.0)
        if fam is PotentialFamily.COULOMB:
            if self.C == 0:
                return np.zeros_like(r)
            if np.any(r == 0):
                raise SingularPoint("HomogeneousCoulomb is not differentiable at the origin")
            return self.gamma * self.C * r ** (-self.gamma)
        if fam is PotentialFamily.HYPERGEOMETRIC:
            return np.array([self._hyp_w(float(x)) for x in r])
        return r * self._spline.derivative()(r)

    def _check_radii(self, r) -> np.ndarray:
        r = np.atleast_1d(np.asarray(r, dtype=float))
        if np.any(r < 0) or np.any(np.isnan(r)):
            raise ArgumentOutOfDomain("radii must be nonnegative")
        if np.any(r > self.r_max):
            exc = InterpolationOutOfRange if self.family is PotentialFamily.TABULATED else ArgumentOutOfDomain
            raise exc(f"radius beyond the evaluable range {self.r_max}")
        return r

    # hypergeometric family
    def _hyp_params(self):
        a, k, dl = self.alpha, self.kappa, self.delta
        pre = -(2.0**a) / specfun.gamma_real(k) * specfun.gamma_real((dl + a) / 2.0) * specfun.gamma_real(a / 2.0 + k)
        return pre, (dl + a) / 2.0, a / 2.0 + k, dl / 2.0

    def closed_form_amplitude(self) -> float:
        """``2^a Gamma((D+a)/2) / Gamma((D-a)/2)`` for the closed-form member."""
        a, dl = self.alpha, self.delta
        return 2.0**a * specfun.gamma_real((dl + a) / 2.0) / specfun.gamma_real((dl - a) / 2.0)

    def _hyp_value(self, r: float) -> float:
        z = -r * r
        if self.is_closed_form and r > HYP_R_MAX:
            return -self.closed_form_amplitude() * (1.0 + r * r) ** (-self.alpha)
        pre, a, b, c = self._hyp_params()
        return pre * (1.0 + r * r) ** self.kappa * specfun.hyp2f1_reg(a, b, c, z)

    def _hyp_w(self, r: float) -> float:
        if self.is_closed_form and r > HYP_R_MAX:
            amp = self.closed_form_amplitude()
            return 2.0 * self.alpha * amp * r * r * (1.0 + r * r) ** (-self.alpha - 1.0)
        pre, a, b, c = self._hyp_params()
        z = -r * r
        k = self.kappa
        f = specfun.hyp2f1_reg(a, b, c, z)
        df = a * b * specfun.hyp2f1_reg(a + 1, b + 1, c + 1, z)
        # r d/dr [(1+r^2)^k F(-r^2)]
        return pre * (1.0 + r * r) ** (k - 1.0) * 2.0 * r * r * (k * f - (1.0 + r * r) * df)

    # tail expansions for sign analysis
    def tail_terms(self) -> tuple[dict[float, float], dict[float, float]] | None:
        """Leading large-``r`` terms of ``V`` and ``W`` as ``{decay exponent: coefficient}``.

        Two terms are kept for ``c (1+r^2)^(-e)``, which is enough to resolve
        the sign whenever the leading coefficients cancel.  ``None`` when no
        closed-form tail is known.
        """
        fam = self.family
        if fam is PotentialFamily.COULOMB:
            return {self.gamma: -self.C}, {self.gamma: self.gamma * self.C}
        if fam is PotentialFamily.INVERSE_POWER:
            sign, amp, e = -1.0, self.C, self.beta / 2.0
        elif fam is PotentialFamily.POSITIVE_BUMP:
            sign, amp, e = 1.0, self.C, self.nu
        elif self.is_closed_form:
            sign, amp, e = -1.0, self.closed_form_amplitude(), self.alpha
        else:
            return None
        c = sign * amp
        v = {2 * e: c, 2 * e + 2: -e * c}
        w = {2 * e: -2 * e * c, 2 * e + 2: 2 * e * (e + 1) * c}
        return v, w

    def tail_exponent(self) -> float | None:
        """Decay exponent ``p`` with ``|V| ~ r^(-p)``, when known."""
        terms = self.tail_terms()
        if terms is None:
            return None
        return min(terms[0])


def _need(ok: bool, message: str):
    if not ok:
        raise ArgumentOutOfDomain(message)


def load_tabulated_potential(path: str | Path, d: int = 3) -> Potential:
    """Read a two-column CSV ``r, V(r)``; a header line is optional."""
    r, v = read_two_columns(path)
    return Potential.tabulated(r, v, d)


def _radii_of(V: Potential, x) -> tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=float)
    if x.ndim == 0 or x.shape[-1] != V.d:
        raise DimensionMismatch(f"expected points of dimension {V.d}, got shape {x.shape}")
    return np.linalg.norm(x, axis=-1), x.ndim == 1


def eval_potential(V: Potential, x):
    """``V(x)`` at a point ``x`` (shape ``(d,)``) or at a stack of points ``(..., d)``."""
    r, single = _radii_of(V, x)
    out = V.radial(r.ravel()).reshape(r.shape)
    return float(out) if single else out


def virial_w(V: Potential, x):
    """``W(x) = x . grad V(x)``."""
    r, single = _radii_of(V, x)
    out = V.radial_w(r.ravel()).reshape(r.shape)
    return float(out) if single else out


def neumann_wigner_potential(kappa: float, alpha: float, d: int, l: int, x) -> float:
    """Value of the hypergeometric zero-mode potential at ``x``."""
    return eval_potential(Potential.hypergeometric(kappa, alpha, d, l), np.asarray(x, dtype=float))


@dataclass(frozen=True)
class ZeroMode:
    """``phi(x) = P(x) (1 + |x|^2)^(-kappa)`` with ``P = 1`` (l = 0) or ``P = x_1`` (l = 1)."""

    kappa: float
    l: int
    d: int

    def __post_init__(self):
        if self.l not in (0, 1):
            raise UnsupportedHarmonicDegree(f"harmonic degree {self.l} not supported (only 0, 1)")
        if not self.kappa > 0:
            raise ArgumentOutOfDomain(f"kappa must be positive, got {self.kappa}")

    @property
    def square_integrable(self) -> bool:
        return 4.0 * self.kappa - 2.0 * self.l > self.d

    def potential(self, alpha: float) -> Potential:
        return Potential.hypergeometric(self.kappa, alpha, self.d, self.l)


def zero_mode_eval(zm: ZeroMode, x):
    """``phi(x)`` at a point or a stack of points of shape ``(..., d)``."""
    if zm.l not in (0, 1):
        raise UnsupportedHarmonicDegree(f"harmonic degree {zm.l} not supported")
    x = np.asarray(x, dtype=float)
    if x.ndim == 0 or x.shape[-1] != zm.d:
        raise DimensionMismatch(f"expected points of dimension {zm.d}, got shape {x.shape}")
    r2 = np.sum(x * x, axis=-1)
    out = (1.0 + r2) ** (-zm.kappa)
    if zm.l == 1:
        out = out * x[..., 0]
    return float(out) if x.ndim == 1 else out


# norms (d = 3 closed-form radial families)
def _require_3d(V: Potential):
    if V.d != 3:
        raise DimensionMismatch(f"norms are implemented for d = 3, got d = {V.d}")


def sup_norm(V: Potential) -> float:
    """``sup |V|``; raises ``DivergentNorm`` for a singular potential."""
    if V.singular_at_origin:
        raise DivergentNorm("HomogeneousCoulomb is unbounded at the origin")
    return _radial_sup(V, lambda r: np.abs(V.radial(r)))


def weighted_sup(V: Potential, s: float) -> float:
    """``sup_x <x>^s |V(x)|^(1/2)``."""
    if V.singular_at_origin:
        raise DivergentNorm("HomogeneousCoulomb is unbounded at the origin")
    p = V.tail_exponent()
    limit = 0.0
    if p is not None:
        v_terms, _ = V.tail_terms()
        if s > p / 2.0 and v_terms[p] != 0:
            raise DivergentNorm(f"<x>^s |V|^(1/2) grows at infinity (s = {s} > p/2 = {p / 2})")
        if s == p / 2.0:
            limit = math.sqrt(abs(v_terms[p]))
    return max(limit, _radial_sup(V, lambda r: (1.0 + r * r) ** (s / 2.0) * np.sqrt(np.abs(V.radial(r)))))


def _radial_sup(V: Potential, f) -> float:
    hi = min(1e6, V.r_max)
    r = np.concatenate(([0.0], np.geomspace(1e-6, hi, 2049)))
    vals = f(r)
    i = int(np.argmax(vals))
    best = float(vals[i])
    lo_r, hi_r = r[max(i - 1, 0)], r[min(i + 1, len(r) - 1)]
    if hi_r > lo_r:
        res = minimize_scalar(lambda t: -float(f(np.array([t]))[0]), bounds=(lo_r, hi_r),
                              method="bounded", options={"xatol": 1e-12})
        best = max(best, -float(res.fun))
    return best


def l1_norm(V: Potential) -> float:
    """``int |V| dx = 4 pi int r^2 |v(r)| dr`` by adaptive quadrature.

    The half-line is mapped to ``[0, 1)`` with ``r = t / (1 - t)``.
    Tabulated potentials are integrated over their table support.
    """
    _require_3d(V)
    p = V.tail_exponent()
    if p is not None and p <= 3.0 and V.tail_terms()[0][p] != 0:
        raise DivergentNorm(f"|V| ~ r^(-{p}) is not integrable in d = 3")
    if V.family is PotentialFamily.HYPERGEOMETRIC and not V.is_closed_form:
        raise DivergentNorm("no tail control for general-kappa hypergeometric potentials")

    if V.family is PotentialFamily.TABULATED:
        # the spline is only C^1, so QUADPACK needs many panels and a looser gate
        val, err = _quad(lambda r: r * r * abs(float(V.radial(r)[0])), 0.0, V.r_max,
                                  epsabs=1e-10, limit=4000)
        gate = 1e-6
    else:
        def integrand(t):
            if t >= 1.0:
                return 0.0
            r = t / (1.0 - t)
            return r * r * abs(float(V.radial(r)[0])) / (1.0 - t) ** 2

        val, err = _quad(integrand, 0.0, 1.0, epsabs=1e-10, epsrel=1e-11, limit=400)
        gate = 1e-8
    if not math.isfinite(val) or err > gate * max(1.0, val):
        raise QuadratureFailure(f"L1 quadrature did not converge (estimate {err:.3g})")
    return 4.0 * math.pi * val


def _quad(f, a, b, **kw):
    # accuracy is judged from the returned error estimate, not from QUADPACK warnings
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        return integrate.quad(f, a, b, **kw)


@dataclass
class PotentialNorms:
    sup_norm: float
    l1_norm: float
    weighted_sup: dict[float, float]

    def to_dict(self) -> dict:
        return {
            "sup_norm": self.sup_norm,
            "l1_norm": self.l1_norm,
            "weighted_sup": {str(k): v for k, v in self.weighted_sup.items()},
        }


def potential_norms(V: Potential, s_values=()) -> PotentialNorms:
    """Sup, L1 and weighted sup norms of a radial potential in d = 3."""
    _require_3d(V)
    return PotentialNorms(sup_norm(V), l1_norm(V), {float(s): weighted_sup(V, s) for s in s_values})
