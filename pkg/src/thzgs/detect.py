"""Monte Carlo harness: detection thresholds over noise decades and sensitivity curves."""

import csv
import hashlib
import json
import logging
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Mapping, Optional, Sequence

import numpy as np

from . import __version__
from .errors import HarnessUnstable, RankDeficient
from .gases import ALL_GASES, FILLER_GAS, STANDARD_PPM, GasSpecies, balanced
from .hitran import Band, load_bundled_catalogs
from .inversion import (
    NOISE_MODELS,
    ConstrainedSolver,
    UnconstrainedSolver,
    ZeroColumnWarning,
    build_design_matrix,
    simulate_measurement,
)
from .spectra import DEFAULT_CUTOFF, DEFAULT_STEP_THZ, FrequencyGrid, SpectraOptions

log = logging.getLogger(__name__)

DESK_RUNS = 200
FULL_SCALE_RUNS = 1000
DEFAULT_DISTANCE = 0.05  # m
DEFAULT_LEVELS = (1.0, 0.1, 0.01, 1e-3, 1e-4, 1e-5, 1e-6)  # percent
MAX_FAILURE_RATE = 0.05
MAX_MEDIAN_ERROR = 0.10
RETRY_FACTOR = 4
# Zero-noise estimates equal the truth only to rounding; coverage allows this slack.
COVERAGE_SLACK = 1e-9
SOLVERS = ("constrained", "unconstrained")


def run_seed(master_seed: int, run_index: int) -> int:
    """Stable 64-bit seed for one run; adding runs never changes earlier ones."""
    h = hashlib.blake2b(f"{int(master_seed)}:{int(run_index)}".encode(), digest_size=8)
    return int.from_bytes(h.digest(), "little")


@dataclass(frozen=True)
class MonteCarloConfig:
    runs: int = DESK_RUNS
    noise_level_percent: float = 0.0
    band: Band = Band(1.0, 3.0)
    distance: float = DEFAULT_DISTANCE
    gases: tuple = ALL_GASES
    master_seed: int = 0
    noise_model: str = "relative"
    step_thz: float = DEFAULT_STEP_THZ
    cutoff: float = DEFAULT_CUTOFF
    solver: str = "constrained"
    threads: int = 1

    def __post_init__(self):
        if int(self.runs) < 2:
            raise ValueError("runs must be >= 2")
        if not self.noise_level_percent >= 0:
            raise ValueError("noise level must be >= 0")
        if not self.distance > 0:
            raise ValueError("distance must be positive")
        if self.noise_model not in NOISE_MODELS:
            raise ValueError(f"noise model must be one of {NOISE_MODELS}")
        if self.solver not in SOLVERS:
            raise ValueError(f"solver must be one of {SOLVERS}")
        object.__setattr__(self, "runs", int(self.runs))
        object.__setattr__(self, "gases", tuple(GasSpecies.parse(g) for g in self.gases))

    def to_dict(self):
        out = asdict(self)
        out["band"] = [self.band.f_low, self.band.f_high]
        out["gases"] = [g.name for g in self.gases]
        return out


@dataclass(frozen=True)
class GasStats:
    mean: float
    median: float
    lcl: float
    ucl: float
    median_relative_error: float
    truth: float

    @property
    def half_width(self):
        return 0.5 * (self.ucl - self.lcl)

    @property
    def covers(self):
        slack = COVERAGE_SLACK * abs(self.truth)
        return self.lcl - slack <= self.truth <= self.ucl + slack


@dataclass
class MonteCarloResult:
    config: MonteCarloConfig
    stats: dict  # GasSpecies -> GasStats, None when unidentifiable
    runs: int
    failures: int

    def to_dict(self):
        return {
            "config": self.config.to_dict(),
            "runs": self.runs,
            "failures": self.failures,
            "stats": {g.name: (asdict(s) if s is not None else None) for g, s in self.stats.items()},
        }


_DESIGN_CACHE = {}


def design_for(config: MonteCarloConfig, catalogs: Optional[Mapping] = None):
    key = (config.gases, config.band, config.step_thz, config.distance, config.cutoff, id(catalogs))
    if key not in _DESIGN_CACHE:
        grid = FrequencyGrid.with_step(config.band, config.step_thz)
        cats = catalogs if catalogs is not None else load_bundled_catalogs(config.gases)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ZeroColumnWarning)
            design = build_design_matrix(config.gases, grid, config.distance, cats, SpectraOptions(config.cutoff))
        if len(_DESIGN_CACHE) > 32:
            _DESIGN_CACHE.clear()
        _DESIGN_CACHE[key] = design
    return _DESIGN_CACHE[key]


def _summarize(samples, truth):
    samples = np.asarray(samples, dtype=float)
    lcl, ucl = np.percentile(samples, [2.5, 97.5])  # linear interpolation
    if truth > 0:
        rel = float(np.median(np.abs(samples - truth) / truth))
    else:
        rel = float("inf")
    return GasStats(float(np.mean(samples)), float(np.median(samples)), float(lcl), float(ucl), rel, float(truth))


def monte_carlo_estimate(config: MonteCarloConfig, x_true: Optional[Mapping] = None,
                         catalogs: Optional[Mapping] = None) -> MonteCarloResult:
    """Repeat simulate -> solve with per-run seeds and summarize each gas's estimates."""
    x_true = dict(STANDARD_PPM if x_true is None else {GasSpecies.parse(g): v for g, v in x_true.items()})
    design = design_for(config, catalogs)
    x_vec = design.vector(x_true)
    if config.solver == "constrained":
        solver = ConstrainedSolver(design)
        identifiable = solver.active
    else:
        solver = UnconstrainedSolver(design)
        identifiable = solver.active
    n_gas = len(design.gases)

    def one(i):
        y = simulate_measurement(design, x_vec, config.noise_level_percent, run_seed(config.master_seed, i),
                                 config.noise_model)
        try:
            res = solver.solve(y)
        except RankDeficient:
            return None
        if not res.converged:
            return None
        return res.vector(design.gases)

    if config.threads > 1:
        with ThreadPoolExecutor(config.threads) as pool:
            outcomes = list(pool.map(one, range(config.runs)))
    else:
        outcomes = [one(i) for i in range(config.runs)]
    good = [o for o in outcomes if o is not None]
    failures = config.runs - len(good)
    if failures > MAX_FAILURE_RATE * config.runs:
        raise HarnessUnstable(f"{failures} of {config.runs} runs failed to converge")
    est = np.array(good).reshape(len(good), n_gas)
    stats = {}
    for j, g in enumerate(design.gases):
        stats[g] = _summarize(est[:, j], x_vec[j]) if identifiable[j] else None
    return MonteCarloResult(config, stats, config.runs, failures)


def detection_criterion(stats: Optional[GasStats], x_true: Optional[float] = None, runs: Optional[int] = None) -> bool:
    """Pass iff median relative error <= 10% and the 95% interval covers the truth."""
    if runs is not None and runs < 100:
        raise ValueError("detection needs statistics from at least 100 runs")
    if stats is None:
        return False  # unidentifiable
    if x_true is not None and x_true != stats.truth:
        stats = replace(stats, truth=float(x_true))
    if not stats.truth > 0:
        return False
    return stats.median_relative_error <= MAX_MEDIAN_ERROR and stats.covers


@dataclass
class LevelResult:
    level: float
    runs: int
    passed: bool
    stats: Optional[GasStats]
    retried: bool = False

    def to_dict(self):
        out = {"level_percent": self.level, "runs": self.runs, "passed": self.passed, "retried": self.retried}
        out["stats"] = asdict(self.stats) if self.stats is not None else None
        if self.stats is not None:
            out["covers"] = self.stats.covers
        return out


@dataclass
class DetectabilityReport:
    gas: GasSpecies
    band: Band
    levels_tested: list
    threshold: Optional[float]
    per_level: list
    config: MonteCarloConfig
    violations: list = field(default_factory=list)
    truth_ppm: float = 0.0

    def to_dict(self):
        return {
            "gas": self.gas.name,
            "band_thz": [self.band.f_low, self.band.f_high],
            "truth_ppm": self.truth_ppm,
            "levels_tested": list(self.levels_tested),
            "threshold_percent": self.threshold,
            "detectable": self.threshold is not None,
            "criterion": {"max_median_relative_error": MAX_MEDIAN_ERROR, "ci": [2.5, 97.5]},
            "monotonicity_violations": list(self.violations),
            "per_level": [lv.to_dict() for lv in self.per_level],
            "config": self.config.to_dict(),
            "seed": self.config.master_seed,
            "version": __version__,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def csv_rows(self):
        for lv in self.per_level:
            s = lv.stats
            yield [self.gas.name, f"{lv.level:g}", lv.runs, int(lv.passed),
                   *(["", "", "", "", ""] if s is None else
                     [f"{s.mean:.17g}", f"{s.median:.17g}", f"{s.lcl:.17g}", f"{s.ucl:.17g}",
                      f"{s.median_relative_error:.17g}"]),
                   self.config.master_seed, __version__]


REPORT_CSV_HEADER = ["gas", "level_percent", "runs", "passed", "mean_ppm", "median_ppm", "lcl_ppm", "ucl_ppm",
                     "median_relative_error", "seed", "version"]


def write_reports_csv(reports: Sequence[DetectabilityReport], fh):
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(REPORT_CSV_HEADER)
    for rep in reports:
        for row in rep.csv_rows():
            writer.writerow(row)


def _level_result(gas, config, x_true, catalogs, level, runs):
    cfg = replace(config, noise_level_percent=level, runs=runs)
    mc = monte_carlo_estimate(cfg, x_true, catalogs)
    stats = mc.stats.get(gas)
    return LevelResult(level, runs, detection_criterion(stats, runs=runs), stats)


def detectability_scan(gas, config: MonteCarloConfig, levels: Sequence[float] = DEFAULT_LEVELS,
                       x_true: Optional[Mapping] = None, full_scan: bool = False,
                       catalogs: Optional[Mapping] = None) -> DetectabilityReport:
    """Test ``levels`` from coarse to fine; the threshold is the coarsest passing level."""
    gas = GasSpecies.parse(gas)
    levels = [float(v) for v in levels]
    if any(b >= a for a, b in zip(levels, levels[1:])):
        raise ValueError("noise levels must be strictly decreasing")
    x_true = dict(STANDARD_PPM if x_true is None else {GasSpecies.parse(g): v for g, v in x_true.items()})
    if gas not in config.gases:
        config = replace(config, gases=config.gases + (gas,))
    per_level, tested, violations = [], [], []
    threshold = None
    for level in levels:
        res = _level_result(gas, config, x_true, catalogs, level, config.runs)
        if threshold is not None and not res.passed:
            log.info("%s failed at %g%% after passing at %g%%; retrying with %dx runs", gas.name, level, threshold,
                     RETRY_FACTOR)
            res = _level_result(gas, config, x_true, catalogs, level, config.runs * RETRY_FACTOR)
            res.retried = True
            if not res.passed:
                violations.append(level)
        per_level.append(res)
        tested.append(level)
        if res.passed and threshold is None:
            threshold = level
            if not full_scan:
                break
    return DetectabilityReport(gas, config.band, tested, threshold, per_level, config, violations,
                               float(x_true.get(gas, 0.0)))


@dataclass
class SensitivityCurve:
    gas: GasSpecies
    true_concentrations: list
    predicted_mean: list
    predicted_median: list
    lcl: list
    ucl: list
    config: MonteCarloConfig

    @property
    def max_relative_deviation(self):
        t = np.asarray(self.true_concentrations)
        return float(np.max(np.abs(np.asarray(self.predicted_mean) - t) / t))

    def to_dict(self):
        return {
            "gas": self.gas.name,
            "true_ppm": self.true_concentrations,
            "predicted_mean_ppm": self.predicted_mean,
            "predicted_median_ppm": self.predicted_median,
            "lcl_ppm": self.lcl,
            "ucl_ppm": self.ucl,
            "max_relative_deviation": self.max_relative_deviation,
            "config": self.config.to_dict(),
            "seed": self.config.master_seed,
            "version": __version__,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_csv(self, fh):
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["gas", "true_ppm", "mean_ppm", "median_ppm", "lcl_ppm", "ucl_ppm", "seed", "version"])
        for row in zip(self.true_concentrations, self.predicted_mean, self.predicted_median, self.lcl, self.ucl):
            writer.writerow([self.gas.name, *(f"{v:.17g}" for v in row), self.config.master_seed, __version__])


def sensitivity_curve(gas, sweep: Sequence[float], config: MonteCarloConfig, base: Optional[Mapping] = None,
                      catalogs: Optional[Mapping] = None) -> SensitivityCurve:
    """Monte Carlo estimates with ``gas`` set to each sweep value; the filler gas takes up the balance."""
    gas = GasSpecies.parse(gas)
    base = dict(STANDARD_PPM if base is None else {GasSpecies.parse(g): v for g, v in base.items()})
    means, medians, lcls, ucls = [], [], [], []
    for value in sweep:
        x = dict(base)
        x[gas] = float(value)
        if gas is not FILLER_GAS:
            x = balanced(x, FILLER_GAS)
        mc = monte_carlo_estimate(config, x, catalogs)
        s = mc.stats.get(gas)
        if s is None:
            raise RankDeficient(f"{gas.name} is unidentifiable on {config.band.label()} THz")
        means.append(s.mean)
        medians.append(s.median)
        lcls.append(s.lcl)
        ucls.append(s.ucl)
    return SensitivityCurve(gas, [float(v) for v in sweep], means, medians, lcls, ucls, config)
