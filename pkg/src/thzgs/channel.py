"""THz link model: spreading loss, chirp pulse, transmit and received PSD, PSD differences."""

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from .constants import BOLTZMANN, SPEED_OF_LIGHT, T_REF
from .errors import DegenerateGeometry, EmptyInput, GridMismatch, UndersampledPulse
from .gases import GasSpecies
from .hitran import Band, load_bundled_catalogs
from .spectra import (
    DEFAULT_STEP_THZ,
    AbsorptionSpectrum,
    FrequencyGrid,
    GasMixture,
    SpectraOptions,
    absorption_coefficient,
    transmittance,
    unit_absorption_profile,
)

DEFAULT_DURATION = 0.05e-9  # s
OVERSAMPLE_MARGIN = 1.25
DEFAULT_OVERSAMPLE = 4.0
DEFAULT_MULTIPLIERS = (0.5, 0.8, 1.25, 2.0, 5.0, 10.0)
# Bands used for the total-PSD comparison (THz).
PSD_BANDS = {
    GasSpecies.O3: Band(0.59, 0.69),
    GasSpecies.N2O: Band(0.8, 0.9),
    GasSpecies.CH3OH: Band(0.8, 0.9),
}
BAND_SCORE_EPS = 1e-12


def spreading_loss_db(f, d):
    """Free-space spreading loss 20 log10(4 pi f d / c) for f in THz and d in metres."""
    f = np.asarray(f, dtype=float)
    if np.any(f <= 0) or not d > 0:
        raise DegenerateGeometry(f"spreading loss needs f > 0 and d > 0 (f={f}, d={d})")
    out = 20.0 * np.log10(4.0 * np.pi * f * 1e12 * d / SPEED_OF_LIGHT)
    return float(out) if out.ndim == 0 else out


def total_path_loss_db(f, d, spectrum=None):
    """Spreading plus absorption loss. ``spectrum`` is an AbsorptionSpectrum, a k value in m^-1, or None."""
    spread = spreading_loss_db(f, d)
    if spectrum is None:
        return spread
    if isinstance(spectrum, AbsorptionSpectrum):
        k = np.interp(np.asarray(f, dtype=float), spectrum.grid.values, spectrum.k)
    else:
        k = np.asarray(spectrum, dtype=float)
    if np.any(k < 0):
        raise ValueError("absorption coefficient must be >= 0")
    out = spread + 10.0 / np.log(10.0) * k * d
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class ChirpPulse:
    """Linear up-chirp with a rectangular envelope. Frequencies in THz."""

    f_start: float
    f_stop: float
    duration: float = DEFAULT_DURATION
    amplitude: float = 1.0
    sample_rate: Optional[float] = None  # samples/s; default 4x the Nyquist rate of f_stop

    def __post_init__(self):
        if not 0 < self.f_start <= self.f_stop:
            raise ValueError(f"need 0 < f_start <= f_stop, got {self.f_start}, {self.f_stop}")
        if not self.duration > 0:
            raise ValueError("duration must be positive")
        if self.sample_rate is None:
            object.__setattr__(self, "sample_rate", 2.0 * self.f_stop * 1e12 * DEFAULT_OVERSAMPLE)

    @classmethod
    def for_band(cls, band: Band, **kwargs):
        return cls(band.f_low, band.f_high, **kwargs)

    @property
    def band(self):
        return Band(self.f_start, self.f_stop)

    @property
    def n_samples(self):
        return int(round(self.duration * self.sample_rate))

    def check_sampling(self):
        need = 2.0 * self.f_stop * 1e12 * OVERSAMPLE_MARGIN
        if self.sample_rate < need:
            raise UndersampledPulse(f"sample rate {self.sample_rate:.4g}/s below {need:.4g}/s")


def chirp_waveform(pulse: ChirpPulse):
    pulse.check_sampling()
    t = np.arange(pulse.n_samples) / pulse.sample_rate
    f0 = pulse.f_start * 1e12
    rate = (pulse.f_stop - pulse.f_start) * 1e12 / pulse.duration
    return pulse.amplitude * np.cos(2 * np.pi * (f0 * t + 0.5 * rate * t * t))


def energy_spectral_density(x, sample_rate, freqs_hz):
    """One-sided energy spectral density 2|X(f)|^2/fs^2 (J/Hz into 1 ohm) from the DTFT of ``x``."""
    x = np.asarray(x, dtype=float)
    n = np.arange(len(x))
    out = np.empty(len(freqs_hz))
    step = max(1, 2_000_000 // max(len(x), 1))
    for i in range(0, len(freqs_hz), step):
        f = np.asarray(freqs_hz[i:i + step])[:, None]
        X = np.exp(-2j * np.pi * f * n[None, :] / sample_rate) @ x
        out[i:i + step] = 2.0 * np.abs(X) ** 2 / sample_rate ** 2
    return out


def periodogram(x, sample_rate, n_fft=None):
    """One-sided rectangular-window periodogram on the DFT grid, as energy per bin (J).

    Summing the returned bins gives the waveform energy sum(x^2)/fs exactly.
    """
    x = np.asarray(x, dtype=float)
    n_fft = max(len(x), n_fft or 0)
    X = np.fft.rfft(x, n_fft)
    energy = np.abs(X) ** 2 / (sample_rate * n_fft)
    energy[1:] *= 2.0
    if n_fft % 2 == 0:
        energy[-1] /= 2.0
    return np.fft.rfftfreq(n_fft, 1.0 / sample_rate), energy


def _transmit_w_per_hz(pulse, freqs_thz):
    """Transmit PSD in W/Hz: pulse energy spectral density averaged over the pulse duration."""
    x = chirp_waveform(pulse)
    return energy_spectral_density(x, pulse.sample_rate, np.asarray(freqs_thz) * 1e12) / pulse.duration


def transmit_reference(pulse: ChirpPulse, n_points=2001):
    """In-band transmit PSD peak (W/Hz) that defines 0 dBr."""
    f = np.linspace(pulse.f_start, pulse.f_stop, n_points)
    return float(_transmit_w_per_hz(pulse, f).max())


@dataclass(frozen=True)
class PsdContext:
    distance: Optional[float] = None
    mixture_id: str = ""
    includes_absorption_noise: bool = False
    multiplier: Optional[float] = None


@dataclass(frozen=True)
class PsdCurve:
    grid: FrequencyGrid
    values: np.ndarray  # dBr
    context: PsdContext = PsdContext()
    reference_w_per_hz: float = 1.0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.n_points,):
            raise ValueError("PSD length does not match the grid")
        if not np.all(np.isfinite(v)):
            raise ValueError("PSD values must be finite")
        object.__setattr__(self, "values", v)

    def linear(self):
        """Absolute PSD in W/Hz."""
        return self.reference_w_per_hz * 10.0 ** (self.values / 10.0)

    def to_csv(self, fh, header=True):
        writer = csv.writer(fh, lineterminator="\n")
        with_m = self.context.multiplier is not None
        if header:
            writer.writerow(["frequency_thz", "psd_dbr"] + (["multiplier"] if with_m else []))
        for f, v in zip(self.grid.values, self.values):
            row = [f"{f:.17g}", f"{v:.17g}"]
            if with_m:
                row.append(f"{self.context.multiplier:.17g}")
            writer.writerow(row)


def write_delta_csv(curves: Sequence[PsdCurve], fh):
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["frequency_thz", "psd_dbr", "multiplier"])
    for curve in curves:
        for f, v in zip(curve.grid.values, curve.values):
            writer.writerow([f"{f:.17g}", f"{v:.17g}", f"{curve.context.multiplier:.17g}"])


def _to_dbr(w_per_hz, reference):
    # clamp to the smallest positive double so exact spectral nulls stay finite
    return 10.0 * np.log10(np.maximum(w_per_hz, np.finfo(float).tiny) / reference)


def transmit_psd(pulse: ChirpPulse, grid: Optional[FrequencyGrid] = None) -> PsdCurve:
    """Periodogram of the pulse on the analysis grid (default: the pulse band at 100 MHz), in dBr."""
    if grid is None:
        grid = FrequencyGrid.with_step(pulse.band)
    ref = transmit_reference(pulse)
    s = _transmit_w_per_hz(pulse, grid.values)
    return PsdCurve(grid, _to_dbr(s, ref), PsdContext(), ref)


def _covers(grid, band):
    tol = 1e-9
    return grid.band.f_low <= band.f_low + tol and grid.band.f_high >= band.f_high - tol


def received_psd(pulse: ChirpPulse, spectrum: AbsorptionSpectrum, d: float, include_noise: bool = False) -> PsdCurve:
    """S_tx * (c/(4 pi f d))^2 * tau, plus k_B T0 (1 - tau) when ``include_noise``; in dBr of the transmit peak."""
    if not d > 0:
        raise DegenerateGeometry(f"distance must be positive, got {d}")
    grid = spectrum.grid
    if not _covers(grid, pulse.band):
        raise GridMismatch(f"spectrum grid {grid.band.label()} does not cover pulse band {pulse.band.label()}")
    f = grid.values
    ref = transmit_reference(pulse)
    s_tx = _transmit_w_per_hz(pulse, f)
    gain = (SPEED_OF_LIGHT / (4.0 * np.pi * f * 1e12 * d)) ** 2
    tau = transmittance(spectrum, d)
    s_rx = s_tx * gain * tau
    if include_noise:
        s_rx = s_rx + BOLTZMANN * T_REF * (1.0 - tau)
    ctx = PsdContext(d, spectrum.mixture.label(), include_noise)
    return PsdCurve(grid, _to_dbr(s_rx, ref), ctx, ref)


def _catalogs(catalogs, mixture):
    return catalogs if catalogs is not None else load_bundled_catalogs(list(mixture.mixing_ratios))


def psd_difference(gas, multipliers: Sequence[float], band: Band, d: float, base_mixture: GasMixture,
                   catalogs: Optional[Mapping] = None, pulse: Optional[ChirpPulse] = None,
                   include_noise: bool = False, step_thz: float = DEFAULT_STEP_THZ,
                   options: SpectraOptions = SpectraOptions(), threads: int = 1):
    """Received-PSD change (dB) when ``gas`` is scaled by each multiplier; N2 (if present) rebalances."""
    gas = GasSpecies.parse(gas)
    if any(not m > 0 for m in multipliers):
        raise ValueError("multipliers must be positive")
    catalogs = _catalogs(catalogs, base_mixture)
    grid = FrequencyGrid.with_step(band, step_thz)
    pulse = pulse or ChirpPulse.for_band(band)
    base = received_psd(pulse, absorption_coefficient(catalogs, base_mixture, grid, options), d, include_noise)
    q0 = base_mixture.ppm(gas)

    def one(m):
        mix = base_mixture.with_ppm(gas, q0 * m)
        curve = received_psd(pulse, absorption_coefficient(catalogs, mix, grid, options), d, include_noise)
        delta = curve.values - base.values
        ctx = PsdContext(d, mix.label(), include_noise, float(m))
        return PsdCurve(grid, delta, ctx, 1.0)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            return list(pool.map(one, multipliers))
    return [one(m) for m in multipliers]


def find_peak_difference(deltas: Sequence[PsdCurve]):
    """(frequency THz, |delta| dB) of the largest absolute difference; ties go to the lower frequency."""
    best = None
    for curve in deltas:
        if curve.grid.n_points == 0:
            continue
        mag = np.abs(curve.values)
        i = int(np.argmax(mag))  # first occurrence is the lowest frequency
        cand = (float(mag[i]), -float(curve.grid.values[i]))
        if best is None or cand > best:
            best = cand
    if best is None:
        raise EmptyInput("no PSD differences to search")
    return -best[1], best[0]


@dataclass(frozen=True)
class BandScore:
    band: Band
    target_mean: float
    h2o_mean: float

    @property
    def score(self):
        return self.target_mean / (self.h2o_mean + BAND_SCORE_EPS)


def band_score(target, bands: Sequence[Band], distance: float = 1.0, catalogs: Optional[Mapping] = None,
               step_thz: float = DEFAULT_STEP_THZ, options: SpectraOptions = SpectraOptions()):
    """Rank candidate bands by mean target unit profile over mean H2O unit profile, best first."""
    target = GasSpecies.parse(target)
    if catalogs is None:
        catalogs = load_bundled_catalogs([target, GasSpecies.H2O])
    scores = []
    for band in bands:
        grid = FrequencyGrid.with_step(band, step_thz)
        t = float(np.mean(unit_absorption_profile(target, grid, distance, catalogs, options)))
        w = float(np.mean(unit_absorption_profile(GasSpecies.H2O, grid, distance, catalogs, options)))
        scores.append(BandScore(band, t, w))
    return sorted(scores, key=lambda s: -s.score)


def sliding_bands(band: Band, width: float, step: float):
    """Candidate sub-bands of ``width`` THz stepped by ``step`` THz across ``band``."""
    out = []
    lo = band.f_low
    while lo + width <= band.f_high + 1e-9:
        out.append(Band(round(lo, 9), round(lo + width, 9)))
        lo += step
    return out

