"""Concentration retrieval by constrained linear least squares over unit absorption profiles.

The solve works on column-normalized variables z_i = ||a_i|| x_i / ||y||. A thin
QR factorization reduces the problem to an n x n quadratic, which is minimized
over the box intersected with the (weighted) sum hyperplane: projected gradient
with Armijo backtracking first, then an active-set polish that solves each
working-set subproblem exactly.
"""

import json
import logging
import warnings
from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np

from .errors import InfeasibleConstraints, MaxIterations, RankDeficient
from .gases import GasSpecies
from .spectra import FrequencyGrid, SpectraOptions, unit_absorption_profile

log = logging.getLogger(__name__)

ZERO_COLUMN_NORM = 1e-15  # dB/ppm
MAX_CONDITION = 1e12
DEFAULT_TOLERANCE = 1e-8
NOISE_MODELS = ("relative", "band-max")


class ZeroColumnWarning(UserWarning):
    """A gas has no absorption on the grid and cannot be identified."""


@dataclass(frozen=True)
class DesignMatrix:
    entries: np.ndarray  # dB per ppm, rows = frequencies, columns = gases
    gases: tuple
    grid: Optional[FrequencyGrid] = None
    distance: Optional[float] = None
    zero_columns: tuple = ()

    def __post_init__(self):
        a = np.asarray(self.entries, dtype=float)
        gases = tuple(GasSpecies.parse(g) for g in self.gases)
        if a.ndim != 2 or a.shape[1] != len(gases):
            raise ValueError("design matrix needs one column per gas")
        if len(set(gases)) != len(gases):
            raise ValueError("duplicate gas in design matrix")
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)
        object.__setattr__(self, "gases", gases)
        norms = np.linalg.norm(a, axis=0)
        object.__setattr__(self, "zero_columns", tuple(g for g, n in zip(gases, norms) if n < ZERO_COLUMN_NORM))

    @property
    def shape(self):
        return self.entries.shape

    def vector(self, x):
        """Concentrations as an array aligned with ``gases``; mappings may omit gases (0 ppm)."""
        if isinstance(x, Mapping):
            parsed = {GasSpecies.parse(g): float(v) for g, v in x.items()}
            return np.array([parsed.get(g, 0.0) for g in self.gases])
        x = np.asarray(x, dtype=float)
        if x.shape != (len(self.gases),):
            raise ValueError("concentration vector length does not match the design matrix")
        return x

    def predict(self, x):
        return self.entries @ self.vector(x)

    def subset(self, gases):
        gases = [GasSpecies.parse(g) for g in gases]
        idx = [self.gases.index(g) for g in gases]
        return DesignMatrix(self.entries[:, idx], tuple(gases), self.grid, self.distance)


def build_design_matrix(gases, grid: FrequencyGrid, d: float, catalogs: Optional[Mapping] = None,
                        options: SpectraOptions = SpectraOptions()) -> DesignMatrix:
    """Unit absorption profiles (dB/ppm at distance ``d``) as columns, in the given gas order."""
    from .hitran import load_bundled_catalogs

    if not d > 0:
        raise ValueError("distance must be positive")
    gases = tuple(GasSpecies.parse(g) for g in gases)
    if catalogs is None:
        catalogs = load_bundled_catalogs(gases)
    cols = [unit_absorption_profile(g, grid, d, catalogs, options) for g in gases]
    dm = DesignMatrix(np.column_stack(cols), gases, grid, d)
    for g in dm.zero_columns:
        warnings.warn(f"{g.name} has no absorption on {grid.band.label()} THz; unidentifiable", ZeroColumnWarning,
                      stacklevel=2)
    return dm


def _as_design(A, gases=None):
    if isinstance(A, DesignMatrix):
        return A
    a = np.asarray(A, dtype=float)
    if gases is None:
        gases = tuple(GasSpecies)[: a.shape[1]]
    return DesignMatrix(a, tuple(gases))


def simulate_measurement(A, x_true, noise_level_percent: float, rng_seed=None, noise_model: str = "relative"):
    """A x_true plus zero-mean Gaussian noise.

    ``relative``: sigma(f) = level/100 * clean(f).  ``band-max``: sigma = level/100 * max(clean).
    """
    if noise_level_percent < 0:
        raise ValueError("noise level must be >= 0")
    if noise_model not in NOISE_MODELS:
        raise ValueError(f"noise model must be one of {NOISE_MODELS}")
    A = _as_design(A)
    clean = A.predict(x_true)
    if noise_level_percent == 0:
        return clean
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    scale = clean if noise_model == "relative" else np.full_like(clean, clean.max(initial=0.0))
    return clean + rng.standard_normal(clean.shape) * (noise_level_percent / 100.0) * scale


@dataclass(frozen=True)
class ConcentrationConstraints:
    lower: float = 0.0
    upper: float = 1e6
    sum_total: float = 1e6

    def __post_init__(self):
        if not self.lower <= self.upper:
            raise InfeasibleConstraints("lower bound exceeds upper bound")

    def check(self, n):
        if not n * self.lower <= self.sum_total <= n * self.upper:
            raise InfeasibleConstraints(
                f"sum {self.sum_total} outside [{n * self.lower}, {n * self.upper}] for {n} gases"
            )


@dataclass
class EstimationResult:
    estimates: dict  # GasSpecies -> ppm, None when unidentifiable
    residual_norm: float
    kkt_residual: float
    iterations: int
    converged: bool
    seed: Optional[int] = None
    unidentifiable: tuple = ()

    def vector(self, gases):
        return np.array([np.nan if self.estimates.get(g) is None else self.estimates[g] for g in gases])

    def to_dict(self):
        out = {g.name: v for g, v in self.estimates.items()}
        out.update(residual_norm=self.residual_norm, kkt_residual=self.kkt_residual,
                   iterations=self.iterations, converged=self.converged, seed=self.seed)
        return out

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)


# ---------------------------------------------------------------- projection


def project(v, lo, hi, w, t, equality=True):
    """Euclidean projection onto {lo <= z <= hi, w.z = t} (or w.z <= t), w > 0."""
    z = np.clip(v, lo, hi)
    if not equality and w @ z <= t:
        return z
    # w.clip(v - tau w) is piecewise linear and nonincreasing in tau; locate t exactly
    taus = np.unique(np.concatenate([(v - lo) / w, (v - hi) / w]))
    vals = np.array([w @ np.clip(v - tau * w, lo, hi) for tau in taus])
    # vals is nonincreasing along taus
    if t >= vals[0]:
        return np.clip(v - taus[0] * w, lo, hi)
    if t <= vals[-1]:
        return np.clip(v - taus[-1] * w, lo, hi)
    k = np.searchsorted(-vals, -t, side="left")
    t0, t1, g0, g1 = taus[k - 1], taus[k], vals[k - 1], vals[k]
    tau = t0 if g0 == g1 else t0 + (g0 - t) * (t1 - t0) / (g0 - g1)
    return np.clip(v - tau * w, lo, hi)


# ---------------------------------------------------------------- solver


@dataclass
class _Problem:
    R: np.ndarray
    b: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    w: np.ndarray
    t: float
    equality: bool

    def objective(self, z):
        r = self.R @ z - self.b
        return 0.5 * r @ r

    def gradient(self, z):
        return self.R.T @ (self.R @ z - self.b)


def _projected_gradient(p: _Problem, z, iterations, tol):
    """Armijo-backtracked projected gradient; returns (z, iterations used)."""
    lipschitz = max(np.linalg.norm(p.R, 2) ** 2, 1e-300)
    step = 1.0 / lipschitz
    f = p.objective(z)
    for it in range(1, iterations + 1):
        g = p.gradient(z)
        s = step * 4.0
        while True:
            zn = project(z - s * g, p.lo, p.hi, p.w, p.t, p.equality)
            fn = p.objective(zn)
            if fn <= f + g @ (zn - z) + 0.5 / s * (zn - z) @ (zn - z) or s < 1e-12 * step:
                break
            s *= 0.5
        moved = np.max(np.abs(zn - z))
        z, f = zn, fn
        if moved <= tol * max(1.0, np.max(np.abs(z))):
            return z, it
    return z, iterations


def _subproblem(Rf, r, wf, rhs):
    """min ||Rf u - r|| subject to wf.u = rhs (if wf is given)."""
    if wf is None:
        return np.linalg.lstsq(Rf, r, rcond=None)[0]
    norm = np.linalg.norm(wf)
    part = wf * (rhs / norm ** 2)
    if len(wf) == 1:
        return part
    basis = np.linalg.qr(wf[:, None], mode="complete")[0][:, 1:]
    u = np.linalg.lstsq(Rf @ basis, r - Rf @ part, rcond=None)[0]
    out = part + basis @ u
    # weights can span many decades; put the hyperplane residual on the heaviest one
    k = int(np.argmax(wf))
    out[k] += (rhs - wf @ out) / wf[k]
    return out


def _multipliers(p: _Problem, z, state, sum_active):
    """Sum multiplier nu and the KKT violation of each working-set constraint."""
    g = p.gradient(z)
    free = state == 0
    if sum_active and free.any():
        wf = p.w[free]
        nu = -(wf @ g[free]) / (wf @ wf)
    elif sum_active:
        # no free variable: any nu consistent with the bound signs works
        low = [-g[i] / p.w[i] for i in np.flatnonzero(state == -1)]
        high = [-g[i] / p.w[i] for i in np.flatnonzero(state == 1)]
        if not p.equality:
            low.append(0.0)
        nu_lo, nu_hi = max(low, default=-np.inf), min(high, default=np.inf)
        if nu_lo <= nu_hi:
            nu = nu_lo if np.isfinite(nu_lo) else (nu_hi if np.isfinite(nu_hi) else 0.0)
        else:
            nu = 0.5 * (nu_lo + nu_hi)
    else:
        nu = 0.0
    red = g + nu * p.w
    viol = np.zeros(len(z))
    viol[free] = np.abs(red[free])
    viol[state == -1] = np.maximum(-red[state == -1], 0.0)
    viol[state == 1] = np.maximum(red[state == 1], 0.0)
    sum_viol = max(-nu, 0.0) if (sum_active and not p.equality) else 0.0
    return nu, viol, sum_viol


def _kkt_residual(p: _Problem, z, state, sum_active):
    _, viol, sum_viol = _multipliers(p, z, state, sum_active)
    scale = max(1.0, np.max(np.abs(p.hi)))
    primal = max(np.max(np.maximum(p.lo - z, 0.0)), np.max(np.maximum(z - p.hi, 0.0))) / scale
    s = p.w @ z
    gap = abs(s - p.t) if p.equality else max(s - p.t, 0.0)
    primal = max(primal, gap / max(abs(p.t), 1e-300))
    return float(max(np.max(viol, initial=0.0), sum_viol, primal))


def _active_set(p: _Problem, z, tol, max_iter):
    """Primal active-set method from a feasible z. Returns (z, state, sum_active, iterations, converged)."""
    n = len(z)
    span = np.maximum(p.hi - p.lo, 1e-300)
    state = np.zeros(n, dtype=int)
    state[z - p.lo <= 1e-14 * span] = -1
    state[p.hi - z <= 1e-14 * span] = 1
    z = np.where(state == -1, p.lo, np.where(state == 1, p.hi, z))
    sum_active = p.equality or p.w @ z >= p.t * (1 - 1e-14)
    if p.equality:
        # restore the hyperplane after snapping
        free = state == 0
        if free.any():
            z[free] += p.w[free] * (p.t - p.w @ z) / (p.w[free] @ p.w[free])
    inner = 0.1 * tol
    for it in range(1, max_iter + 1):
        free = state == 0
        fixed = ~free
        if free.any():
            r = p.b - p.R[:, fixed] @ z[fixed]
            wf = p.w[free] if sum_active else None
            rhs = p.t - p.w[fixed] @ z[fixed] if sum_active else 0.0
            target = _subproblem(p.R[:, free], r, wf, rhs)
            step = target - z[free]
        else:
            step = np.zeros(0)
        if step.size and np.max(np.abs(step)) > 1e-15 * max(1.0, np.max(np.abs(z))):
            # longest feasible step toward the subproblem optimum
            alpha, block = 1.0, None
            idx = np.flatnonzero(free)
            for k, i in enumerate(idx):
                if step[k] < 0:
                    a = (p.lo[i] - z[i]) / step[k]
                    if a < alpha:
                        alpha, block = a, (i, -1)
                elif step[k] > 0:
                    a = (p.hi[i] - z[i]) / step[k]
                    if a < alpha:
                        alpha, block = a, (i, 1)
            if not sum_active:
                ws = p.w[free] @ step
                if ws > 0:
                    a = (p.t - p.w @ z) / ws
                    if a < alpha:
                        alpha, block = a, ("sum", 0)
            alpha = max(alpha, 0.0)
            z[free] += alpha * step
            if block is not None:
                if block[0] == "sum":
                    sum_active = True
                else:
                    i, side = block
                    state[i] = side
                    z[i] = p.lo[i] if side == -1 else p.hi[i]
                continue
        nu, viol, sum_viol = _multipliers(p, z, state, sum_active)
        bound_viol = np.where(state != 0, viol, 0.0)
        worst = int(np.argmax(bound_viol)) if n else 0
        if max(bound_viol.max(initial=0.0), sum_viol) <= inner:
            return z, state, sum_active, it, True
        if sum_viol > bound_viol.max(initial=0.0):
            sum_active = False
        else:
            state[worst] = 0
    return z, state, sum_active, max_iter, False


class ConstrainedSolver:
    """Reusable factorization of a design matrix for repeated constrained solves."""

    def __init__(self, A, constraints: Optional[ConcentrationConstraints] = None, tolerance: float = DEFAULT_TOLERANCE,
                 max_iterations: int = 10000, pg_iterations: int = 200):
        self.design = _as_design(A)
        self.constraints = constraints or ConcentrationConstraints()
        self.tolerance = tolerance
        self.max_iterations = max_iterations
        self.pg_iterations = pg_iterations
        entries = self.design.entries
        norms = np.linalg.norm(entries, axis=0)
        self.active = norms >= ZERO_COLUMN_NORM
        if not self.active.any():
            raise ValueError("design matrix has no nonzero column")
        self.norms = norms[self.active]
        self.q, self.r = np.linalg.qr(entries[:, self.active] / self.norms)
        c = self.constraints
        n_in, n_out = int(self.active.sum()), int((~self.active).sum())
        self.equality = n_out == 0
        if self.equality:
            c.check(n_in)
            self.sum_total = c.sum_total
        else:
            # excluded gases can take any value in [lower, upper], which turns the
            # equality into sum_total - n_out*upper <= sum(included) <= sum_total - n_out*lower
            if c.sum_total - n_out * c.upper > n_in * c.lower:
                raise InfeasibleConstraints("excluded gases cannot absorb the sum constraint")
            self.sum_total = c.sum_total - n_out * c.lower
            if self.sum_total < n_in * c.lower:
                raise InfeasibleConstraints("sum constraint below the lower bounds")

    @property
    def unidentifiable(self):
        return tuple(g for g, a in zip(self.design.gases, self.active) if not a)

    def _problem(self, y):
        scale = float(np.linalg.norm(y)) or 1.0
        b = self.q.T @ (y / scale)
        c = self.constraints
        d = self.norms
        lo = np.full(len(d), c.lower) * d / scale
        hi = np.full(len(d), c.upper) * d / scale
        return _Problem(self.r, b, lo, hi, 1.0 / d, self.sum_total / scale, self.equality), scale

    def _refine(self, y, p, scale, z, state, sum_active, passes=2):
        """Iterative refinement on the final working set using residuals formed in measurement space."""
        free = state == 0
        if not free.any():
            return z
        a = self.design.entries[:, self.active]
        for _ in range(passes):
            res = y - a @ (z * scale / self.norms)
            corr = self.q.T @ (res / scale)
            wf = p.w[free] if sum_active else None
            delta = _subproblem(p.R[:, free], corr, wf, p.t - p.w @ z)
            trial = z.copy()
            trial[free] += delta
            if np.any(trial < p.lo) or np.any(trial > p.hi) or (not p.equality and p.w @ trial > p.t):
                break
            z = trial
        return z

    def solve(self, y, seed=None, raise_on_max_iter=False) -> EstimationResult:
        y = np.asarray(y, dtype=float)
        if y.shape != (self.design.shape[0],):
            raise ValueError("measurement length does not match the design matrix")
        p, scale = self._problem(y)
        try:
            z0 = np.linalg.solve(p.R, p.b)
        except np.linalg.LinAlgError:
            z0 = np.linalg.lstsq(p.R, p.b, rcond=None)[0]
        z = project(z0, p.lo, p.hi, p.w, p.t, p.equality)
        z, pg_it = _projected_gradient(p, z, self.pg_iterations, 1e-12)
        budget = max(self.max_iterations - pg_it, 1)
        z, state, sum_active, as_it, converged = _active_set(p, z.copy(), self.tolerance, budget)
        z = self._refine(y, p, scale, z, state, sum_active)
        kkt = _kkt_residual(p, z, state, sum_active)
        converged = converged and kkt <= self.tolerance
        x_in = z * scale / self.norms
        c = self.constraints
        x_in = np.clip(x_in, c.lower, c.upper)
        x_in[state == -1] = c.lower
        x_in[state == 1] = c.upper
        x_full = np.zeros(len(self.design.gases))
        x_full[self.active] = x_in
        estimates = {}
        k = 0
        for g, a in zip(self.design.gases, self.active):
            if a:
                estimates[g] = float(x_in[k])
                k += 1
            else:
                estimates[g] = None
        residual = float(np.linalg.norm(self.design.entries @ x_full - y))
        result = EstimationResult(estimates, residual, kkt, pg_it + as_it, bool(converged), seed, self.unidentifiable)
        if not converged:
            log.warning("constrained solve stopped after %d iterations (KKT residual %.3g)", result.iterations, kkt)
            if raise_on_max_iter:
                raise MaxIterations(f"no convergence in {self.max_iterations} iterations (KKT {kkt:.3g})")
        return result


def solve_constrained_ls(A, y, constraints: Optional[ConcentrationConstraints] = None,
                         tolerance: float = DEFAULT_TOLERANCE, max_iterations: int = 10000,
                         seed=None) -> EstimationResult:
    """Minimize ||A x - y||^2 subject to lower <= x <= upper and sum(x) = sum_total."""
    return ConstrainedSolver(A, constraints, tolerance, max_iterations).solve(y, seed=seed)


class UnconstrainedSolver:
    """Ordinary least squares on the identifiable columns; zero columns are reported as None."""

    def __init__(self, A):
        self.design = _as_design(A)
        a = self.design.entries
        norms = np.linalg.norm(a, axis=0)
        self.active = norms >= ZERO_COLUMN_NORM
        if not self.active.any():
            raise RankDeficient("design matrix has no nonzero column")
        self.norms = norms[self.active]
        self.q, self.r = _factor(a[:, self.active] / self.norms)

    def solve(self, y, seed=None) -> EstimationResult:
        y = np.asarray(y, dtype=float)
        x_in = np.linalg.solve(self.r, self.q.T @ y) / self.norms
        x_full = np.zeros(len(self.design.gases))
        x_full[self.active] = x_in
        it = iter(x_in)
        estimates = {g: (float(next(it)) if a else None) for g, a in zip(self.design.gases, self.active)}
        residual = float(np.linalg.norm(self.design.entries @ x_full - y))
        unid = tuple(g for g, a in zip(self.design.gases, self.active) if not a)
        return EstimationResult(estimates, residual, 0.0, 1, True, seed, unid)


def _factor(a_scaled):
    if a_scaled.shape[0] < a_scaled.shape[1]:
        raise RankDeficient("fewer frequencies than gases")
    q, r = np.linalg.qr(a_scaled)
    cond = np.linalg.cond(r)
    if not cond <= MAX_CONDITION:
        raise RankDeficient(f"condition number {cond:.3g} exceeds {MAX_CONDITION:.0e}")
    return q, r


def solve_unconstrained_ls(A_sub, y):
    """Ordinary least squares via QR of the column-normalized matrix. Returns {gas: ppm} (or an array)."""
    is_design = isinstance(A_sub, DesignMatrix)
    a = A_sub.entries if is_design else np.asarray(A_sub, dtype=float)
    y = np.asarray(y, dtype=float)
    norms = np.linalg.norm(a, axis=0)
    if np.any(norms < ZERO_COLUMN_NORM):
        raise RankDeficient("design matrix has a zero column")
    q, r = _factor(a / norms)
    x = np.linalg.solve(r, q.T @ y) / norms
    if is_design:
        return {g: float(v) for g, v in zip(A_sub.gases, x)}
    return x
