"""Line-by-line absorption coefficient of a gas mixture at 296 K and 1 atm."""

import csv
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Optional

import numpy as np

from .constants import DB_PER_NEPER_POWER, N_REF, P_REF_ATM, PPM, PPM_TOTAL, T_REF, thz_to_wavenumber
from .errors import GridOutsideCoverage, InvalidMixture, MissingCatalog
from .gases import FILLER_GAS, STANDARD_PPM, GasSpecies, balanced
from .hitran import DEFAULT_GAMMA_FLOOR, Band, LineCatalog, coverage_of

log = logging.getLogger(__name__)

DEFAULT_STEP_THZ = 1e-4  # 100 MHz
DEFAULT_CUTOFF = 25.0  # cm^-1
# Grid points times in-window lines processed per block.
_BLOCK_ELEMENTS = 4_000_000


@dataclass(frozen=True)
class SpectraOptions:
    cutoff: float = DEFAULT_CUTOFF
    self_broadening: bool = False
    gamma_floor: float = DEFAULT_GAMMA_FLOOR
    threads: int = 1


@dataclass(frozen=True)
class GasMixture:
    """Mixing ratios in ppm at fixed 296 K and 1 atm."""

    mixing_ratios: Mapping = field(default_factory=dict)
    temperature: float = T_REF
    pressure: float = P_REF_ATM

    def __post_init__(self):
        ratios = {}
        for gas, q in dict(self.mixing_ratios).items():
            gas = GasSpecies.parse(gas)
            q = float(q)
            if not (0.0 <= q <= PPM_TOTAL) or not np.isfinite(q):
                raise InvalidMixture(f"{gas.name} mixing ratio {q} ppm outside [0, 1e6]")
            ratios[gas] = q
        total = sum(ratios.values())
        if total > PPM_TOTAL * (1 + 1e-12):
            raise InvalidMixture(f"mixing ratios sum to {total} ppm > 1e6")
        if self.temperature != T_REF:
            raise InvalidMixture(f"only T = {T_REF} K is supported, got {self.temperature}")
        if self.pressure != P_REF_ATM:
            raise InvalidMixture(f"only p = {P_REF_ATM} atm is supported, got {self.pressure}")
        ordered = dict(sorted(ratios.items(), key=lambda kv: kv[0].value))
        object.__setattr__(self, "mixing_ratios", ordered)

    @classmethod
    def standard(cls):
        """Standard atmosphere with N2 as the balancing gas."""
        return cls(dict(STANDARD_PPM))

    @classmethod
    def pure(cls, gas, ppm):
        return cls({GasSpecies.parse(gas): ppm})

    def ppm(self, gas):
        return self.mixing_ratios.get(GasSpecies.parse(gas), 0.0)

    def with_ppm(self, gas, ppm, filler: Optional[GasSpecies] = FILLER_GAS):
        """Copy with ``gas`` set to ``ppm``; the filler (if present) absorbs the change."""
        ratios = dict(self.mixing_ratios)
        ratios[GasSpecies.parse(gas)] = float(ppm)
        if filler is not None and filler in ratios and filler is not GasSpecies.parse(gas):
            ratios = balanced(ratios, filler)
        return GasMixture(ratios, self.temperature, self.pressure)

    def label(self):
        return ";".join(f"{g.name}={q:g}" for g, q in self.mixing_ratios.items())


@dataclass(frozen=True)
class FrequencyGrid:
    """Uniform frequency samples in THz, endpoints included."""

    band: Band
    n_points: int

    def __post_init__(self):
        if int(self.n_points) < 2:
            raise ValueError("a frequency grid needs at least two points")
        object.__setattr__(self, "n_points", int(self.n_points))

    @classmethod
    def with_step(cls, band: Band, step_thz: float = DEFAULT_STEP_THZ):
        n = int(round((band.f_high - band.f_low) / step_thz)) + 1
        return cls(band, max(n, 2))

    @property
    def values(self):
        return np.linspace(self.band.f_low, self.band.f_high, self.n_points)

    @property
    def wavenumbers(self):
        return thz_to_wavenumber(self.values)

    @property
    def step(self):
        return (self.band.f_high - self.band.f_low) / (self.n_points - 1)


@dataclass(frozen=True)
class AbsorptionSpectrum:
    grid: FrequencyGrid
    k: np.ndarray  # m^-1
    mixture: GasMixture

    def __post_init__(self):
        k = np.asarray(self.k, dtype=float)
        if k.shape != (self.grid.n_points,):
            raise ValueError("absorption coefficient length does not match the grid")
        object.__setattr__(self, "k", k)

    def to_csv(self, fh):
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["frequency_thz", "k_per_m"])
        for f, k in zip(self.grid.values, self.k):
            writer.writerow([f"{f:.17g}", f"{k:.17g}"])


# ---------------------------------------------------------------- line shape


def lorentz(nu, center, alpha):
    """Area-normalized Lorentz profile (cm)."""
    return alpha / np.pi / ((nu - center) ** 2 + alpha ** 2)


def line_half_width(line, pressure=P_REF_ATM, q_self=0.0, options: SpectraOptions = SpectraOptions()):
    """Pressure-broadened half-width (cm^-1) at 296 K; the temperature factor is 1."""
    if pressure <= 0:
        raise ValueError("pressure must be positive")
    gamma_air = max(line.gamma_air, options.gamma_floor)
    if not options.self_broadening:
        return gamma_air * pressure
    p_self = q_self * PPM * pressure
    return gamma_air * (pressure - p_self) + line.gamma_self * p_self


def _half_widths(arrays, pressure, q_self, options):
    gamma_air = np.maximum(arrays["gamma_air"], options.gamma_floor)
    if not options.self_broadening:
        return gamma_air * pressure
    p_self = q_self * PPM * pressure
    return gamma_air * (pressure - p_self) + arrays["gamma_self"] * p_self


def _accumulate(nu, centers, strengths, alphas, cutoff, out):
    """Add sum_j S_j phi(nu; centers_j, alpha_j) over |nu - center_j| <= cutoff into ``out``."""
    if len(centers) == 0 or len(nu) == 0:
        return
    lo = np.searchsorted(centers, nu[0] - cutoff, side="left")
    hi = np.searchsorted(centers, nu[-1] + cutoff, side="right")
    if hi <= lo:
        return
    c, s, a = centers[lo:hi], strengths[lo:hi], alphas[lo:hi]
    rows = max(1, _BLOCK_ELEMENTS // max(len(c), 1))
    for start in range(0, len(nu), rows):
        sub = nu[start:start + rows]
        j0 = np.searchsorted(c, sub[0] - cutoff, side="left")
        j1 = np.searchsorted(c, sub[-1] + cutoff, side="right")
        if j1 <= j0:
            continue
        d = sub[:, None] - c[None, j0:j1]
        prof = a[None, j0:j1] / np.pi / (d * d + a[None, j0:j1] ** 2)
        prof[np.abs(d) > cutoff] = 0.0
        out[start:start + rows] += prof @ s[j0:j1]


def cross_section(catalog: LineCatalog, grid: FrequencyGrid, options: SpectraOptions = SpectraOptions(),
                  q_self=0.0, pressure=P_REF_ATM):
    """Absorption cross-section (cm^2/molecule) of one gas on the grid."""
    arrays = catalog.arrays
    if len(catalog) == 0:
        return np.zeros(grid.n_points)
    alphas = _half_widths(arrays, pressure, q_self, options)
    centers = arrays["line_center"] + arrays["delta_air"] * pressure
    order = np.argsort(centers, kind="stable")
    centers, strengths, alphas = centers[order], arrays["intensity"][order], alphas[order]
    nu = grid.wavenumbers
    out = np.zeros(grid.n_points)
    threads = max(1, int(options.threads))
    if threads == 1:
        _accumulate(nu, centers, strengths, alphas, options.cutoff, out)
        return out
    # disjoint output slices per worker
    edges = np.linspace(0, len(nu), threads + 1).astype(int)

    def work(i):
        _accumulate(nu[edges[i]:edges[i + 1]], centers, strengths, alphas, options.cutoff, out[edges[i]:edges[i + 1]])

    with ThreadPoolExecutor(threads) as pool:
        list(pool.map(work, range(threads)))
    return out


def _check_coverage(catalog, grid, cutoff):
    cov = coverage_of(catalog)
    if cov is None:
        return
    lo = max(grid.wavenumbers[0] - cutoff, 0.0)
    hi = grid.wavenumbers[-1] + cutoff
    # catalogs store coverage rounded to 1e-6 cm^-1
    if cov[0] > lo + 1e-6 or cov[1] < hi - 1e-6:
        raise GridOutsideCoverage(
            f"{catalog.gas.name} catalog covers {cov[0]:.3f}-{cov[1]:.3f} cm^-1, need {lo:.3f}-{hi:.3f}"
        )


_XS_CACHE = {}


def _cached_cross_section(catalog, grid, options):
    key = (id(catalog), grid, options.cutoff, options.gamma_floor)
    hit = _XS_CACHE.get(key)
    if hit is not None and hit[0] is catalog:
        return hit[1]
    xs = cross_section(catalog, grid, options)
    xs.setflags(write=False)
    if len(_XS_CACHE) > 256:
        _XS_CACHE.clear()
    _XS_CACHE[key] = (catalog, xs)
    return xs


def absorption_coefficient(catalogs: Mapping, mixture: GasMixture, grid: FrequencyGrid,
                           options: SpectraOptions = SpectraOptions()) -> AbsorptionSpectrum:
    """k(f) in m^-1: sum over gases of N_i * sum_j S_j * Lorentz, converted from cm^-1."""
    k = np.zeros(grid.n_points)
    for gas, q in mixture.mixing_ratios.items():
        catalog = catalogs.get(gas)
        if catalog is None:
            raise MissingCatalog(f"no line catalog for {gas.name}")
        _check_coverage(catalog, grid, options.cutoff)
        if q == 0.0:
            continue
        if options.self_broadening:
            xs = cross_section(catalog, grid, options, q_self=q, pressure=mixture.pressure)
        else:
            xs = _cached_cross_section(catalog, grid, options)
        k += N_REF * mixture.pressure * q * PPM * xs
    return AbsorptionSpectrum(grid, k * 100.0, mixture)


def absorption_loss_db(spectrum: AbsorptionSpectrum, distance: float):
    """Beer-Lambert loss in dB over ``distance`` metres."""
    if distance < 0:
        raise ValueError("distance must be >= 0")
    return DB_PER_NEPER_POWER * spectrum.k * distance


def transmittance(spectrum: AbsorptionSpectrum, distance: float):
    if distance < 0:
        raise ValueError("distance must be >= 0")
    return np.exp(-spectrum.k * distance)


def unit_absorption_profile(gas, grid: FrequencyGrid, distance: float, catalogs: Optional[Mapping] = None,
                            options: SpectraOptions = SpectraOptions()):
    """Absorption loss (dB) per ppm of ``gas`` alone; self-broadening is always off."""
    from .hitran import load_bundled_catalogs

    gas = GasSpecies.parse(gas)
    if catalogs is None:
        catalogs = load_bundled_catalogs([gas])
    opts = SpectraOptions(options.cutoff, False, options.gamma_floor, options.threads)
    spectrum = absorption_coefficient(catalogs, GasMixture({gas: 1.0}), grid, opts)
    return absorption_loss_db(spectrum, distance)
