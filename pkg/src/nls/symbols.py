"""Kinetic Fourier symbols and their structural constants.

A symbol is a function ``Psi(u)`` of ``u = |xi|^2 / 2``; the multiplier in
momentum space is ``omega(xi) = Psi(|xi|^2 / 2)``.  Every quantity below is
radial, so the suprema and infima over ``xi in R^d`` reduce to 1-D scans
over ``|xi|``.

The central derived quantity is the log-slope

    gamma(u) = 2 u Psi'(u) / Psi(u) = d log(omega) / d log|xi|,

which controls both the scaling ratio ``b(a) = sup omega(a xi)/omega(xi)``
and the commutator constant ``mu = inf gamma``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import minimize_scalar

from .tables import read_two_columns
from .errors import (
    ArgumentOutOfDomain,
    DegenerateSymbol,
    InterpolationOutOfRange,
    NegativeArgument,
)

#: |xi| range scanned for suprema and infima.
XI_RANGE = (1e-8, 1e8)
#: u range on which the H2/H3 envelope constants are fitted.
U_RANGE = (1e-8, 1e8)
GRID_POINTS = 2049
#: Finite-difference step for b'(1-).
FD_STEP = 1e-4
#: b'(1-) or inf(gamma) below this counts as degenerate.
DEGENERACY_TOL = 1e-6
# Probe radii for the limiting log-slopes; gamma is modelled as
# gamma_inf + c / log(xi) there, which also covers logarithmic symbols.
_PROBE_EXPONENTS = (64.0, 128.0)
_TINY = 1e-300


class SymbolKind(str, enum.Enum):
    CLASSICAL = "Classical"
    FRACTIONAL = "Fractional"
    RELATIVISTIC = "Relativistic"
    JUMP_DIFFUSION = "JumpDiffusion"
    LOG_FRACTIONAL = "LogFractional"
    TABULATED = "Tabulated"


@dataclass(frozen=True)
class KineticSymbol:
    """Immutable description of a kinetic symbol ``Psi``.

    Use the constructors :meth:`classical`, :meth:`fractional`,
    :meth:`relativistic`, :meth:`jump_diffusion`, :meth:`log_fractional`
    and :meth:`tabulated` rather than the raw initializer.
    """

    kind: SymbolKind
    alpha: float | None = None
    m: float | None = None
    c: float | None = None
    table_u: tuple[float, ...] | None = None
    table_psi: tuple[float, ...] | None = None
    _spline: PchipInterpolator | None = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        kind = SymbolKind(self.kind)
        object.__setattr__(self, "kind", kind)
        a = self.alpha
        if kind in (SymbolKind.FRACTIONAL, SymbolKind.RELATIVISTIC, SymbolKind.LOG_FRACTIONAL):
            if a is None or not 0.0 < a <= 2.0:
                raise ArgumentOutOfDomain(f"{kind.value} needs 0 < alpha <= 2, got {a}")
        if kind is SymbolKind.RELATIVISTIC and (self.m is None or self.m < 0.0):
            raise ArgumentOutOfDomain(f"Relativistic needs m >= 0, got {self.m}")
        if kind is SymbolKind.JUMP_DIFFUSION:
            if a is None or not 0.0 < a < 2.0:
                raise ArgumentOutOfDomain(f"JumpDiffusion needs 0 < alpha < 2, got {a}")
            if self.c is None or not self.c > 0.0:
                raise ArgumentOutOfDomain(f"JumpDiffusion needs c > 0, got {self.c}")
        if kind is SymbolKind.TABULATED:
            u = np.asarray(self.table_u, dtype=float)
            psi = np.asarray(self.table_psi, dtype=float)
            if u.ndim != 1 or u.shape != psi.shape or u.size < 2:
                raise ArgumentOutOfDomain("tabulated symbol needs two equal-length columns, >= 2 rows")
            if u[0] != 0.0:
                raise ArgumentOutOfDomain(f"tabulated grid must start at u = 0, got {u[0]}")
            if np.any(np.diff(u) <= 0):
                raise ArgumentOutOfDomain("tabulated u must be strictly increasing")
            if not np.all(np.isfinite(psi)):
                raise ArgumentOutOfDomain("tabulated Psi values must be finite")
            object.__setattr__(self, "_spline", PchipInterpolator(u, psi, extrapolate=False))

    # constructors
    @classmethod
    def classical(cls) -> KineticSymbol:
        return cls(SymbolKind.CLASSICAL)

    @classmethod
    def fractional(cls, alpha: float) -> KineticSymbol:
        return cls(SymbolKind.FRACTIONAL, alpha=float(alpha))

    @classmethod
    def relativistic(cls, alpha: float, m: float) -> KineticSymbol:
        return cls(SymbolKind.RELATIVISTIC, alpha=float(alpha), m=float(m))

    @classmethod
    def jump_diffusion(cls, alpha: float, c: float) -> KineticSymbol:
        return cls(SymbolKind.JUMP_DIFFUSION, alpha=float(alpha), c=float(c))

    @classmethod
    def log_fractional(cls, alpha: float) -> KineticSymbol:
        return cls(SymbolKind.LOG_FRACTIONAL, alpha=float(alpha))

    @classmethod
    def tabulated(cls, u, psi) -> KineticSymbol:
        return cls(
            SymbolKind.TABULATED,
            table_u=tuple(float(v) for v in u),
            table_psi=tuple(float(v) for v in psi),
        )

    @property
    def u_max(self) -> float:
        return self.table_u[-1] if self.kind is SymbolKind.TABULATED else math.inf

    @property
    def is_homogeneous(self) -> bool:
        if self.kind in (SymbolKind.CLASSICAL, SymbolKind.FRACTIONAL):
            return True
        return self.kind is SymbolKind.RELATIVISTIC and self.m == 0.0

    def describe(self) -> dict:
        out = {"kind": self.kind.value}
        for name in ("alpha", "m", "c"):
            value = getattr(self, name)
            if value is not None:
                out[name] = value
        if self.kind is SymbolKind.TABULATED:
            out["n_samples"] = len(self.table_u)
            out["u_max"] = self.u_max
        return out

    # raw vectorized evaluation; callers validate the argument
    def _psi(self, u: np.ndarray) -> np.ndarray:
        k = self.kind
        if k is SymbolKind.CLASSICAL:
            return u.copy()
        if k is SymbolKind.FRACTIONAL:
            return (2.0 * u) ** (self.alpha / 2.0)
        if k is SymbolKind.RELATIVISTIC:
            if self.m == 0.0:
                return (2.0 * u) ** (self.alpha / 2.0)
            big_m = self.m ** (2.0 / self.alpha)
            # m ((1 + 2u/M)^(alpha/2) - 1) without cancellation at small u
            return self.m * np.expm1(0.5 * self.alpha * np.log1p(2.0 * u / big_m))
        if k is SymbolKind.JUMP_DIFFUSION:
            return 2.0 * u + self.c * (2.0 * u) ** (self.alpha / 2.0)
        if k is SymbolKind.LOG_FRACTIONAL:
            return np.log1p((2.0 * u) ** (self.alpha / 2.0))
        return self._spline(u)

    def _dpsi(self, u: np.ndarray) -> np.ndarray:
        k = self.kind
        a = self.alpha
        with np.errstate(divide="ignore"):
            if k is SymbolKind.CLASSICAL:
                return np.ones_like(u)
            if k is SymbolKind.FRACTIONAL or (k is SymbolKind.RELATIVISTIC and self.m == 0.0):
                return a * (2.0 * u) ** (a / 2.0 - 1.0)
            if k is SymbolKind.RELATIVISTIC:
                big_m = self.m ** (2.0 / a)
                return a * (2.0 * u + big_m) ** (a / 2.0 - 1.0)
            if k is SymbolKind.JUMP_DIFFUSION:
                return 2.0 + self.c * a * (2.0 * u) ** (a / 2.0 - 1.0)
            if k is SymbolKind.LOG_FRACTIONAL:
                s = (2.0 * u) ** (a / 2.0)
                return a * (2.0 * u) ** (a / 2.0 - 1.0) / (1.0 + s)
        return self._spline.derivative()(u)

    def _log_slope(self, u: np.ndarray) -> np.ndarray:
        """``2 u Psi'(u) / Psi(u)`` in closed form where cancellation matters."""
        k = self.kind
        a = self.alpha
        if k is SymbolKind.CLASSICAL:
            return np.full_like(u, 2.0)
        if k is SymbolKind.FRACTIONAL or (k is SymbolKind.RELATIVISTIC and self.m == 0.0):
            return np.full_like(u, a)
        if k is SymbolKind.RELATIVISTIC:
            big_m = self.m ** (2.0 / a)
            x = 2.0 * u / big_m
            # alpha x (1+x)^(a/2-1) / ((1+x)^(a/2) - 1)
            return a * x / (1.0 + x) / -np.expm1(-0.5 * a * np.log1p(x))
        if k is SymbolKind.JUMP_DIFFUSION:
            s = (2.0 * u) ** (1.0 - a / 2.0)  # ratio of the two terms
            return (2.0 * s + self.c * a) / (s + self.c)
        if k is SymbolKind.LOG_FRACTIONAL:
            s = (2.0 * u) ** (a / 2.0)
            return a * s / ((1.0 + s) * np.log1p(s))
        psi = self._psi(u)
        out = np.full_like(u, np.nan)
        ok = psi > _TINY
        out[ok] = 2.0 * u[ok] * self._dpsi(u[ok]) / psi[ok]
        return out


def _as_u(sym: KineticSymbol, u) -> tuple[np.ndarray, bool]:
    arr = np.asarray(u, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < 0.0):
        raise NegativeArgument(f"symbol argument must be >= 0, got {u!r}")
    if sym.kind is SymbolKind.TABULATED and np.any(arr > sym.u_max):
        raise InterpolationOutOfRange(f"u beyond tabulated range [0, {sym.u_max}]")
    return np.atleast_1d(arr), arr.ndim == 0


def eval_symbol(sym: KineticSymbol, u):
    """Return ``(Psi(u), Psi'(u))``; scalars in, scalars out.

    ``Psi'(0)`` is the one-sided derivative (``inf`` for fractional powers).
    """
    arr, scalar = _as_u(sym, u)
    value, deriv = sym._psi(arr), sym._dpsi(arr)
    if scalar:
        return float(value[0]), float(deriv[0])
    return value, deriv


def omega(sym: KineticSymbol, xi) -> np.ndarray:
    """Multiplier ``omega(xi) = Psi(|xi|^2 / 2)`` of a radial argument."""
    xi = np.abs(np.asarray(xi, dtype=float))
    return sym._psi(0.5 * xi * xi)


def log_slope(sym: KineticSymbol, u) -> np.ndarray:
    arr, scalar = _as_u(sym, u)
    out = sym._log_slope(arr)
    return float(out[0]) if scalar else out


def limiting_log_slopes(sym: KineticSymbol) -> tuple[float, float] | None:
    """Extrapolated log-slopes ``(gamma(0+), gamma(inf))``, or ``None`` if tabulated.

    Each limit comes from two probes at ``|xi| = 10^(+-64), 10^(+-128)``
    under the model ``gamma = gamma_lim + c / log|xi|``.
    """
    if sym.kind is SymbolKind.TABULATED:
        return None
    limits = []
    for sign in (-1.0, 1.0):
        xi = 10.0 ** (sign * np.array(_PROBE_EXPONENTS))
        g1, g2 = sym._log_slope(0.5 * xi * xi)
        limits.append(float(2.0 * g2 - g1))
    return limits[0], limits[1]


def _xi_grid(sym: KineticSymbol, n: int) -> np.ndarray:
    lo, hi = XI_RANGE
    if sym.kind is SymbolKind.TABULATED:
        hi = min(hi, math.sqrt(2.0 * sym.u_max))
    return np.geomspace(lo, hi, n)


def _ratio(sym: KineticSymbol, a: float, xi: np.ndarray) -> np.ndarray:
    num, den = omega(sym, a * xi), omega(sym, xi)
    out = np.zeros_like(xi)
    ok = den > _TINY
    out[ok] = num[ok] / den[ok]
    return out


def _raw_scaling_ratio(sym: KineticSymbol, a: float, n: int = GRID_POINTS) -> float:
    xi = _xi_grid(sym, n)
    ratio = _ratio(sym, a, xi)
    i = int(np.argmax(ratio))
    best = float(ratio[i])
    lo, hi = math.log(xi[max(i - 1, 0)]), math.log(xi[min(i + 1, len(xi) - 1)])
    if hi > lo:
        res = minimize_scalar(
            lambda t: -float(_ratio(sym, a, np.array([math.exp(t)]))[0]),
            bounds=(lo, hi), method="bounded", options={"xatol": 1e-10},
        )
        best = max(best, -float(res.fun))
    limits = limiting_log_slopes(sym)
    if limits is not None:
        # the supremum can sit at xi -> 0 or xi -> inf, never attained on a grid
        best = max(best, a ** limits[0], a ** limits[1])
    return min(best, 1.0)


def scaling_ratio(sym: KineticSymbol, a: float, n: int = GRID_POINTS) -> float:
    """``b(a) = sup_xi omega(a xi) / omega(xi)`` for ``0 < a < 1``.

    Raises ``DegenerateSymbol`` when ``b(a)`` is 1 to rounding, which by
    monotonicity means ``b = 1`` on all of ``[a, 1)``.
    """
    a = float(a)
    if not 0.0 < a < 1.0:
        raise ArgumentOutOfDomain(f"scaling_ratio needs 0 < a < 1, got {a}")
    b = _raw_scaling_ratio(sym, a, n)
    if b >= 1.0 - 1e-12:
        raise DegenerateSymbol(f"b({a}) = {b!r}: no scaling gap below 1", value=b)
    return b


def virial_derivative(sym: KineticSymbol, h: float = FD_STEP) -> float:
    """Richardson-extrapolated one-sided estimate of ``b'(1-)``."""

    def quotient(step):
        return (1.0 - _raw_scaling_ratio(sym, 1.0 - step)) / step

    return 2.0 * quotient(h) - quotient(2.0 * h)


def virial_q(sym: KineticSymbol, h: float = FD_STEP) -> float:
    """Virial constant ``q = 1 / b'(1-)``."""
    slope = virial_derivative(sym, h)
    if not slope > DEGENERACY_TOL:
        raise DegenerateSymbol(f"b'(1-) = {slope!r} <= {DEGENERACY_TOL}: q undefined", value=slope)
    return 1.0 / slope


def _u_grid(sym: KineticSymbol, n: int = GRID_POINTS) -> np.ndarray:
    xi = _xi_grid(sym, n)
    return 0.5 * xi * xi


def mourre_mu(sym: KineticSymbol, n: int = GRID_POINTS) -> float:
    """Largest ``mu`` with ``2 u Psi'(u) >= mu Psi(u)`` on the scan range."""
    u = _u_grid(sym, n)
    gamma = sym._log_slope(u)
    gamma = gamma[np.isfinite(gamma)]
    mu = float(gamma.min()) if gamma.size else math.nan
    limits = limiting_log_slopes(sym)
    if limits is not None:
        mu = min(mu, *limits)
    if not mu > DEGENERACY_TOL:
        raise DegenerateSymbol(f"inf 2uPsi'/Psi = {mu!r}: no commutator constant", value=mu)
    return mu


@dataclass
class AssumptionCheck:
    holds: bool
    witness: float | None = None
    constants: dict = field(default_factory=dict)
    note: str = ""

    def to_dict(self) -> dict:
        return {"holds": self.holds, "witness": self.witness, "constants": dict(self.constants), "note": self.note}


@dataclass
class AssumptionReport:
    symbol: dict
    checks: dict[str, AssumptionCheck]
    u_range: tuple[float, float]

    def __getitem__(self, name: str) -> AssumptionCheck:
        return self.checks[name]

    def to_dict(self) -> dict:
        return {
            "symbol": self.symbol,
            "u_range": list(self.u_range),
            "checks": {k: v.to_dict() for k, v in self.checks.items()},
        }


def verify_assumptions(sym: KineticSymbol, n: int = GRID_POINTS) -> AssumptionReport:
    """Numerically check the scaling (A1, A2) and commutator (H1-H4) hypotheses.

    Failures are reported, never raised.  Envelope constants are fitted on
    ``U_RANGE`` (clipped to the table for tabulated symbols) and certify the
    inequalities only there.
    """
    lo, hi = U_RANGE
    if sym.kind is SymbolKind.TABULATED:
        hi = min(hi, sym.u_max)
    u = np.concatenate(([0.0], np.geomspace(lo, hi, n)))
    psi, dpsi = sym._psi(u), sym._dpsi(u)
    gamma = sym._log_slope(u[1:])
    limits = limiting_log_slopes(sym)
    checks: dict[str, AssumptionCheck] = {}

    # H1: Psi(0) = 0, Psi >= 0, nondecreasing, finite derivative on (0, inf)
    bad = np.flatnonzero((psi < 0) | ~np.isfinite(psi))
    dec = np.flatnonzero(np.diff(psi) < 0)
    nonfinite_deriv = np.flatnonzero(~np.isfinite(dpsi[1:]) | (dpsi[1:] < 0))
    if psi[0] != 0.0:
        checks["H1"] = AssumptionCheck(False, 0.0, note=f"Psi(0) = {psi[0]!r}")
    elif bad.size:
        checks["H1"] = AssumptionCheck(False, float(u[bad[0]]), note="Psi negative or not finite")
    elif dec.size:
        checks["H1"] = AssumptionCheck(False, float(u[dec[0] + 1]), note="Psi decreases")
    elif nonfinite_deriv.size:
        checks["H1"] = AssumptionCheck(False, float(u[nonfinite_deriv[0] + 1]), note="Psi' negative or not finite")
    else:
        checks["H1"] = AssumptionCheck(True)

    # A1: omega continuous, nondecreasing and xi . grad omega <= c omega
    finite = gamma[np.isfinite(gamma)]
    c_a1 = float(finite.max()) if finite.size else math.nan
    if limits is not None:
        c_a1 = max(c_a1, *limits)
    a1_ok = checks["H1"].holds and math.isfinite(c_a1)
    checks["A1"] = AssumptionCheck(
        a1_ok, None if a1_ok else checks["H1"].witness, {"c": c_a1},
        note="constant c recorded only; not consumed downstream",
    )

    # A2: b(a) < 1 near a = 1 with b'(1-) > 0
    try:
        q = virial_q(sym)
        checks["A2"] = AssumptionCheck(True, constants={"b_prime": 1.0 / q, "q": q})
    except DegenerateSymbol as exc:
        checks["A2"] = AssumptionCheck(
            False, 1.0 - FD_STEP, {"b_prime": exc.value}, note=f"DegenerateSymbol: {exc}"
        )

    # H2: u^(1/2) <= c1 Psi(u) + d1
    root = np.sqrt(u)
    gamma_inf = limits[1] if limits is not None else None
    tail = (u >= 1.0) & (psi > _TINY)
    if gamma_inf is not None and gamma_inf < 1.0 - 1e-9:
        w = int(np.argmax(np.where(tail, root / np.where(psi > _TINY, psi, 1.0), 0.0)))
        checks["H2"] = AssumptionCheck(
            False, float(u[w]), {"gamma_inf": gamma_inf},
            note="Psi grows slower than u^(1/2); no linear envelope exists",
        )
    elif not tail.any():
        checks["H2"] = AssumptionCheck(False, float(u[-1]), note="no samples with u >= 1")
    else:
        c1 = float(np.max(root[tail] / psi[tail]))
        d1 = max(0.0, float(np.max(root - c1 * psi)))
        consts = {"c1": c1, "d1": d1}
        if gamma_inf is not None:
            consts["gamma_inf"] = gamma_inf
        checks["H2"] = AssumptionCheck(True, constants=consts)

    # H3: u Psi'(u) <= c2 Psi(u) + d2, with d2 = 0 from the log-slope bound
    c2 = 0.5 * c_a1
    checks["H3"] = AssumptionCheck(
        math.isfinite(c2), None, {"c2": c2, "d2": 0.0},
    )

    # H4: 2 u Psi' >= mu Psi with mu > 0
    try:
        mu = mourre_mu(sym, n)
        checks["H4"] = AssumptionCheck(True, constants={"mu": mu})
    except DegenerateSymbol as exc:
        w = float(u[1:][int(np.nanargmin(gamma))]) if np.isfinite(gamma).any() else None
        if limits is not None and limits[1] <= DEGENERACY_TOL:
            w = math.inf
        checks["H4"] = AssumptionCheck(False, w, {"mu": exc.value}, note=f"DegenerateSymbol: {exc}")

    return AssumptionReport(sym.describe(), {k: checks[k] for k in ("A1", "A2", "H1", "H2", "H3", "H4")}, (lo, hi))


def load_tabulated_symbol(path: str | Path) -> KineticSymbol:
    """Read a two-column CSV ``u, Psi(u)``; a header line is optional."""
    u, psi = read_two_columns(path)
    return KineticSymbol.tabulated(u, psi)
