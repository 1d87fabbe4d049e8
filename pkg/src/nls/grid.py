"""Periodic-torus discretization of ``H = Psi(-Delta/2) + V``.

The box ``[-L, L)^d`` carries ``N`` nodes per axis.  The kinetic part is
the exact multiplier ``Psi(|xi|^2 / 2)`` on the DFT lattice
``xi_k = pi k / L``, the potential acts by nodal multiplication.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import fft, linalg

from .criteria import dicho_threshold, _jsonable
from .errors import ArgumentOutOfDomain, DimensionMismatch, ResourceLimit
from .lanczos import lanczos_lowest
from .potentials import Potential, PotentialFamily, ZeroMode, zero_mode_eval
from .symbols import KineticSymbol, SymbolKind, omega

MAX_DOF = 2**24
DENSE_MAX_N = 4096
MAX_K = 20


def _fft_friendly(n: int) -> bool:
    for p in (2, 3, 5):
        while n % p == 0:
            n //= p
    return n == 1


@dataclass(frozen=True)
class TorusGrid:
    """Box ``[-L, L)^d`` with ``N`` nodes per axis.

    ``N`` must be even, at least 16 and have no prime factor above 5
    (powers of two and e.g. 96 qualify).
    """

    d: int
    N: int
    L: float

    def __post_init__(self):
        if self.d not in (1, 2, 3):
            raise ArgumentOutOfDomain(f"d must be 1, 2 or 3, got {self.d}")
        if self.N < 16 or self.N % 2 or not _fft_friendly(self.N):
            raise ArgumentOutOfDomain(f"N must be an even 5-smooth integer >= 16, got {self.N}")
        if not self.L > 0:
            raise ArgumentOutOfDomain(f"L must be positive, got {self.L}")
        if self.N**self.d > MAX_DOF:
            raise ResourceLimit(f"N^d = {self.N ** self.d} exceeds {MAX_DOF}")

    @property
    def h(self) -> float:
        return 2.0 * self.L / self.N

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.N,) * self.d

    @property
    def size(self) -> int:
        return self.N**self.d

    def axis(self) -> np.ndarray:
        return -self.L + self.h * np.arange(self.N)

    def frequencies(self) -> np.ndarray:
        """``pi k / L`` in DFT order."""
        return 2.0 * math.pi * fft.fftfreq(self.N, d=self.h)

    def points(self) -> np.ndarray:
        """Node coordinates, shape ``(N, ..., N, d)``."""
        axes = np.meshgrid(*([self.axis()] * self.d), indexing="ij")
        return np.stack(axes, axis=-1)

    def radii(self) -> np.ndarray:
        ax2 = self.axis() ** 2
        r2 = np.zeros(self.shape)
        for i in range(self.d):
            r2 = r2 + ax2.reshape([-1 if j == i else 1 for j in range(self.d)])
        return np.sqrt(r2)

    def xi_squared(self, real: bool = False) -> np.ndarray:
        """``|xi|^2`` on the full DFT lattice, or on the half lattice of ``rfftn``."""
        k = self.frequencies() ** 2
        last = (2.0 * math.pi * fft.rfftfreq(self.N, d=self.h)) ** 2 if real else k
        out = np.zeros(self.shape[:-1] + (last.size,))
        for i in range(self.d):
            kk = last if i == self.d - 1 else k
            out = out + kk.reshape([-1 if j == i else 1 for j in range(self.d)])
        return out

    @property
    def xi_max(self) -> float:
        """Largest lattice frequency norm (the corner ``k = -N/2`` on every axis)."""
        return math.sqrt(self.d) * math.pi * self.N / (2.0 * self.L)

    def describe(self) -> dict:
        return {"d": self.d, "N": self.N, "L": self.L, "h": self.h}


def potential_on_grid(V: Potential | None, grid: TorusGrid) -> np.ndarray:
    """Nodal values; a Coulomb singularity at the origin node is replaced by the mean over its 2d neighbours."""
    if V is None:
        return np.zeros(grid.shape)
    if V.d != grid.d:
        raise DimensionMismatch(f"potential dimension {V.d} differs from grid dimension {grid.d}")
    r = grid.radii()
    if V.singular_at_origin:
        origin = r == 0.0
        vals = np.zeros(grid.shape)
        vals[~origin] = V.radial(r[~origin])
        if origin.any():
            # every neighbour of the origin node sits at radius h
            vals[origin] = float(np.mean(V.radial(np.full(2 * grid.d, grid.h))))
        return vals
    return V.radial(r.ravel()).reshape(grid.shape)


class GridHamiltonian:
    """Matrix-free ``H`` on a torus grid with the multiplier and nodal potential cached."""

    def __init__(self, sym: KineticSymbol, V: Potential | None, grid: TorusGrid):
        self.sym, self.V, self.grid = sym, V, grid
        self.multiplier = omega(sym, np.sqrt(grid.xi_squared(real=True)))
        self.full_multiplier = None
        self.potential = potential_on_grid(V, grid)

    @property
    def scale(self) -> float:
        """Spectral scale ``Psi(|xi_max|^2 / 2) + max |V|``."""
        top = float(omega(self.sym, np.array([self.grid.xi_max]))[0])
        return top + float(np.max(np.abs(self.potential)))

    def kinetic(self, psi: np.ndarray) -> np.ndarray:
        g = self.grid
        axes = tuple(range(g.d))
        if np.iscomplexobj(psi):
            if self.full_multiplier is None:
                self.full_multiplier = omega(self.sym, np.sqrt(g.xi_squared()))
            return fft.ifftn(self.full_multiplier * fft.fftn(psi, axes=axes), axes=axes)
        return fft.irfftn(self.multiplier * fft.rfftn(psi, axes=axes), s=g.shape, axes=axes)

    def apply(self, psi) -> np.ndarray:
        psi = np.asarray(psi)
        g = self.grid
        flat = psi.ndim == 1
        if psi.size != g.size:
            raise DimensionMismatch(f"grid function has {psi.size} entries, expected {g.size}")
        u = psi.reshape(g.shape)
        out = self.kinetic(u) + self.potential * u
        return out.ravel() if flat else out


def apply_hamiltonian(psi, sym: KineticSymbol, V: Potential | None, grid: TorusGrid) -> np.ndarray:
    """``IDFT(Psi(|xi|^2/2) DFT(psi)) + V psi``."""
    return GridHamiltonian(sym, V, grid).apply(psi)


def dense_hamiltonian_1d(sym: KineticSymbol, V: Potential | None, grid: TorusGrid) -> np.ndarray:
    """The ``N x N`` nodal matrix of :func:`apply_hamiltonian` for ``d = 1``."""
    if grid.d != 1:
        raise DimensionMismatch("the dense matrix is built for d = 1 only")
    if grid.N > DENSE_MAX_N:
        raise ResourceLimit(f"N = {grid.N} exceeds the dense limit {DENSE_MAX_N}")
    # the kinetic part is circulant with first column IDFT(multiplier)
    col = fft.ifft(omega(sym, grid.frequencies())).real
    return linalg.circulant(col) + np.diag(potential_on_grid(V, grid))


@dataclass
class SpectralReport:
    eigenvalues: list[float]
    residual_norms: list[float]
    grid: dict
    symbol: dict
    potential: dict | None
    solver: dict
    eigenvectors: np.ndarray | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return _jsonable({
            "eigenvalues": self.eigenvalues,
            "residual_norms": self.residual_norms,
            "grid": self.grid,
            "symbol": self.symbol,
            "potential": self.potential,
            "solver": self.solver,
        })

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def lowest_eigenvalues(
    k: int,
    sym: KineticSymbol,
    V: Potential | None,
    grid: TorusGrid,
    tol: float = 1e-8,
    max_matvecs: int = 5000,
    solver: str = "Lanczos",
    seed: int = 0,
    keep_vectors: bool = False,
) -> SpectralReport:
    """The ``k`` lowest eigenvalues, with ``||H psi - lambda psi|| < tol * scale`` certificates.

    ``solver`` is ``"Lanczos"`` (matrix-free) or ``"Dense"`` (``d = 1``).
    A single-vector Krylov method resolves one copy of each eigenvalue in
    exact arithmetic, so multiplicities of degenerate levels can be missed.
    """
    if not 1 <= k <= MAX_K:
        raise ArgumentOutOfDomain(f"k must lie in [1, {MAX_K}], got {k}")
    op = GridHamiltonian(sym, V, grid)
    scale = op.scale
    if solver == "Dense":
        M = dense_hamiltonian_1d(sym, V, grid)
        vals, vecs = linalg.eigh(M, subset_by_index=(0, k - 1))
        res = np.linalg.norm(M @ vecs - vecs * vals, axis=0)
        meta = {"solver": "Dense", "tol": tol, "scale": scale, "threshold": tol * scale}
    elif solver == "Lanczos":
        result = lanczos_lowest(op.apply, grid.size, k, scale, tol=tol, max_matvecs=max_matvecs, seed=seed)
        vals, vecs, res, meta = result.eigenvalues, result.eigenvectors, result.residual_norms, result.meta
    else:
        raise ArgumentOutOfDomain(f"unknown solver {solver!r}")
    return SpectralReport(
        eigenvalues=[float(v) for v in vals],
        residual_norms=[float(r) for r in res],
        grid=grid.describe(),
        symbol=sym.describe(),
        potential=None if V is None else V.describe(),
        solver=_jsonable(meta),
        eigenvectors=vecs if keep_vectors else None,
    )


# zero modes
@dataclass
class ZeroModeResult:
    residual: float
    profile: list[tuple[float, float]]
    square_integrable: bool
    grid: dict

    def to_dict(self) -> dict:
        return _jsonable({
            "residual": self.residual,
            "profile": [list(p) for p in self.profile],
            "square_integrable": self.square_integrable,
            "grid": self.grid,
        })


def zero_mode_residual(kappa: float, alpha: float, d: int, l: int, grid: TorusGrid, bins: int = 8) -> ZeroModeResult:
    """Relative residual ``||H phi|| / ||phi||`` on the centred half-box ``|x|_inf <= L/2``.

    ``H = (-Delta)^(alpha/2) + V_{kappa,alpha}`` with the fractional symbol;
    the potential is evaluated on the half-box only.  ``profile`` lists the
    residual RMS in radial shells of the half-box.
    """
    if grid.d != d:
        raise DimensionMismatch(f"grid dimension {grid.d} differs from d = {d}")
    zm = ZeroMode(kappa, l, d)
    V = zm.potential(alpha)
    # (-Delta)^(a/2) = Psi(|xi|^2/2) with Psi(u) = (2u)^(a/2)
    sym = KineticSymbol.fractional(alpha)
    phi = zero_mode_eval(zm, grid.points())
    kin = GridHamiltonian(sym, None, grid).kinetic(phi)
    ax = grid.axis()
    inside1 = np.abs(ax) <= grid.L / 2.0
    mask = np.ones(grid.shape, dtype=bool)
    for i in range(d):
        mask &= inside1.reshape([-1 if j == i else 1 for j in range(d)])
    r = grid.radii()[mask]
    res = kin[mask] + V.radial(r) * phi[mask]
    residual = float(np.linalg.norm(res) / np.linalg.norm(phi[mask]))
    edges = np.linspace(0.0, r.max() * (1 + 1e-12), bins + 1)
    which = np.digitize(r, edges) - 1
    profile = []
    for b in range(bins):
        sel = which == b
        if sel.any():
            profile.append((float(edges[b + 1]), float(np.sqrt(np.mean(res[sel] ** 2)))))
    return ZeroModeResult(residual, profile, zm.square_integrable, grid.describe())


def zero_mode_convergence(kappa: float, alpha: float, d: int, l: int, N: int, L_values) -> list[tuple[float, float]]:
    """``(L, residual)`` pairs at fixed ``N`` for a convergence study in ``L``."""
    return [(float(L), zero_mode_residual(kappa, alpha, d, l, TorusGrid(d, N, float(L))).residual) for L in L_values]


# coupling sweeps
@dataclass
class SweepTable:
    rows: list[dict]
    detection_threshold: float
    crossover: tuple[float, float] | None
    lower_bound: float | None
    meta: dict

    COLUMNS = ("C", "lambda_min", "n_negative", "residual", "finite_size_shift")

    def to_dict(self) -> dict:
        return _jsonable({
            "rows": self.rows,
            "detection_threshold": self.detection_threshold,
            "crossover": self.crossover,
            "lower_bound_A": self.lower_bound,
            "meta": self.meta,
        })

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("# columns: " + ", ".join(self.COLUMNS) + "\n")
        writer = csv.DictWriter(buf, fieldnames=self.COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in self.rows:
            writer.writerow({c: row[c] for c in self.COLUMNS})
        return buf.getvalue()


def coupling_sweep(
    alpha: float,
    C_values,
    sym: KineticSymbol,
    grid: TorusGrid,
    beta: float | None = None,
    k: int = 1,
    tol: float = 1e-8,
    max_matvecs: int = 5000,
) -> SweepTable:
    """Lowest Ritz values of ``Psi + V`` with ``V = -C <x>^(-beta)`` (``beta = 2 alpha`` by default).

    A Ritz value counts as negative below ``-10 tol scale``.
    ``finite_size_shift`` is the box average of ``V``, the first-order
    energy of the constant mode, which a torus adds to any attractive
    potential.
    """
    C_values = [float(c) for c in C_values]
    if any(b < a for a, b in zip(C_values, C_values[1:])):
        raise ArgumentOutOfDomain("C values must be nondecreasing")
    if any(c < 0 for c in C_values):
        raise ArgumentOutOfDomain("couplings must be nonnegative")
    beta = 2.0 * alpha if beta is None else float(beta)
    rows = []
    threshold = None
    for c in C_values:
        V = Potential.inverse_power(c, beta, grid.d)
        op = GridHamiltonian(sym, V, grid)
        rep = lowest_eigenvalues(k, sym, V, grid, tol=tol, max_matvecs=max_matvecs)
        thr = 10.0 * tol * op.scale
        threshold = thr if threshold is None else max(threshold, thr)
        rows.append({
            "C": c,
            "lambda_min": rep.eigenvalues[0],
            "n_negative": int(sum(v < -thr for v in rep.eigenvalues)),
            "residual": max(rep.residual_norms),
            "finite_size_shift": float(np.mean(op.potential)),
            "eigenvalues": rep.eigenvalues,
            "matvecs": rep.solver.get("matvecs"),
        })
    crossover = None
    for prev, cur in zip(rows, rows[1:]):
        if prev["n_negative"] == 0 and cur["n_negative"] > 0:
            crossover = (prev["C"], cur["C"])
            break
    lower = None
    if grid.d == 3 and 1.5 < alpha < 2.0 and sym.kind is SymbolKind.FRACTIONAL:
        lower = dicho_threshold(alpha).threshold_value
    meta = {"alpha": alpha, "beta": beta, "grid": grid.describe(), "symbol": sym.describe(), "k": k, "tol": tol,
            "family": PotentialFamily.INVERSE_POWER.value}
    return SweepTable(rows, threshold, crossover, lower, meta)
