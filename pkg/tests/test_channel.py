import dataclasses
import io
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import trapezoid
from scipy.signal import hilbert

from thzgs.channel import (
    BandScore,
    ChirpPulse,
    PsdContext,
    PsdCurve,
    band_score,
    chirp_waveform,
    energy_spectral_density,
    find_peak_difference,
    periodogram,
    psd_difference,
    received_psd,
    sliding_bands,
    spreading_loss_db,
    total_path_loss_db,
    transmit_psd,
    write_delta_csv,
)
from thzgs.errors import DegenerateGeometry, EmptyInput, GridMismatch, UndersampledPulse
from thzgs.gases import GasSpecies
from thzgs.hitran import Band, LineCatalog
from thzgs.spectra import AbsorptionSpectrum, FrequencyGrid, GasMixture, absorption_coefficient, unit_absorption_profile

C = 299792458.0
KB_T0 = 1.380649e-23 * 296.0


def vacuum(grid):
    return AbsorptionSpectrum(grid, np.zeros(grid.n_points), GasMixture())


# ---------------------------------------------------------------- spreading and total loss


def test_spreading_loss_reference_values():
    assert spreading_loss_db(0.3, 1.0) == pytest.approx(20 * math.log10(4 * math.pi * 0.3e12 / C), abs=1e-12)
    assert round(spreading_loss_db(0.3, 1.0), 2) == 81.99
    assert spreading_loss_db(1.0, 2.0) - spreading_loss_db(1.0, 1.0) == pytest.approx(20 * math.log10(2), abs=1e-12)


@given(f=st.floats(0.1, 10.0), d=st.floats(1e-3, 1e4), s=st.floats(1.001, 10.0))
def test_spreading_loss_increasing(f, d, s):
    assert spreading_loss_db(f * s, d) > spreading_loss_db(f, d)
    assert spreading_loss_db(f, d * s) > spreading_loss_db(f, d)


def test_spreading_loss_rejects_degenerate_geometry():
    for f, d in ((0.3, 0.0), (0.3, -1.0), (0.0, 1.0)):
        with pytest.raises(DegenerateGeometry):
            spreading_loss_db(f, d)


def test_total_path_loss():
    assert total_path_loss_db(1.0, 1.0) == spreading_loss_db(1.0, 1.0)
    assert total_path_loss_db(1.0, 1.0, 0.0) == spreading_loss_db(1.0, 1.0)
    total = total_path_loss_db(1.0, 1.0, 0.0461)
    assert round(spreading_loss_db(1.0, 1.0), 2) == 92.45
    assert total - spreading_loss_db(1.0, 1.0) == pytest.approx(10 * math.log10(math.e) * 0.0461, rel=1e-12)
    assert round(total - spreading_loss_db(1.0, 1.0), 2) == 0.20


def test_total_path_loss_from_spectrum(catalogs):
    grid = FrequencyGrid.with_step(Band(0.5, 1.5), 1e-3)
    spec = absorption_coefficient(catalogs, GasMixture.standard(), grid)
    f = grid.values
    assert np.all(total_path_loss_db(f, 10.0, spec) >= spreading_loss_db(f, 10.0))


# ---------------------------------------------------------------- chirp


def test_instantaneous_frequency_follows_linear_law():
    pulse = ChirpPulse(0.59, 0.69, sample_rate=40e12)
    x = chirp_waveform(pulse)
    phase = np.unwrap(np.angle(hilbert(x)))
    inst = np.diff(phase) * pulse.sample_rate / (2 * np.pi)
    t = (np.arange(len(inst)) + 0.5) / pulse.sample_rate
    law = (pulse.f_start + (pulse.f_stop - pulse.f_start) * t / pulse.duration) * 1e12
    mid = slice(int(0.1 * len(inst)), int(0.9 * len(inst)))
    assert np.max(np.abs(inst[mid] - law[mid]) / law[mid]) < 0.01


def test_pure_tone_when_start_equals_stop():
    pulse = ChirpPulse(0.8, 0.8)
    x = chirp_waveform(pulse)
    t = np.arange(pulse.n_samples) / pulse.sample_rate
    np.testing.assert_allclose(x, np.cos(2 * np.pi * 0.8e12 * t), atol=1e-9)


@pytest.mark.parametrize("band", [(0.59, 0.69), (0.8, 0.9), (1.0, 3.0)])
def test_chirp_energy(band):
    pulse = ChirpPulse(*band, amplitude=1.7)
    x = chirp_waveform(pulse)
    energy = np.sum(x ** 2) / pulse.sample_rate
    assert energy == pytest.approx(1.7 ** 2 * pulse.duration / 2, rel=1e-3)


def test_sampling_checks():
    with pytest.raises(UndersampledPulse):
        chirp_waveform(ChirpPulse(0.5, 1.0, sample_rate=2.0e12))
    with pytest.raises(ValueError):
        ChirpPulse(1.0, 0.5)
    with pytest.raises(ValueError):
        ChirpPulse(0.5, 1.0, duration=0.0)
    assert ChirpPulse(0.5, 1.0).n_samples == round(0.05e-9 * 8e12)


# ---------------------------------------------------------------- transmit PSD


def test_parseval_periodogram():
    pulse = ChirpPulse(0.8, 0.9)
    x = chirp_waveform(pulse)
    energy = np.sum(x ** 2) / pulse.sample_rate
    _, bins = periodogram(x, pulse.sample_rate, n_fft=4096)
    assert bins.sum() == pytest.approx(energy, rel=1e-3)


def test_dtft_density_integrates_to_energy():
    # the DTFT density and the FFT periodogram are independent routes to the same energy
    pulse = ChirpPulse(0.8, 0.9)
    x = chirp_waveform(pulse)
    energy = np.sum(x ** 2) / pulse.sample_rate
    f = np.linspace(0.0, pulse.sample_rate / 2, 20001)
    esd = energy_spectral_density(x, pulse.sample_rate, f)
    assert trapezoid(esd, f) == pytest.approx(energy, rel=1e-3)


def test_in_band_exceeds_out_of_band():
    pulse = ChirpPulse(0.59, 0.69)
    curve = transmit_psd(pulse, FrequencyGrid.with_step(Band(0.1, 2.0), 1e-3))
    f = curve.grid.values
    lin = curve.linear()
    inside = (f >= pulse.f_start) & (f <= pulse.f_stop)
    gap = 10 * np.log10(lin[inside].mean() / lin[~inside].mean())
    assert gap >= 10.0


def test_transmit_peak_is_zero_dbr():
    curve = transmit_psd(ChirpPulse(0.8, 0.9), FrequencyGrid(Band(0.8, 0.9), 2001))
    assert curve.values.max() == pytest.approx(0.0, abs=1e-12)


def test_time_shift_invariance():
    pulse = ChirpPulse(0.8, 0.9)
    x = chirp_waveform(pulse)
    f = np.linspace(0.7e12, 1.0e12, 301)
    a = energy_spectral_density(x, pulse.sample_rate, f)
    b = energy_spectral_density(np.concatenate([np.zeros(37), x]), pulse.sample_rate, f)
    np.testing.assert_allclose(b, a, rtol=1e-9, atol=1e-9 * a.max())


# ---------------------------------------------------------------- received PSD


def test_vacuum_factorization():
    pulse = ChirpPulse(0.8, 0.9)
    grid = FrequencyGrid.with_step(Band(0.8, 0.9), 1e-3)
    tx = transmit_psd(pulse, grid)
    for d in (1.0, 100.0):
        rx = received_psd(pulse, vacuum(grid), d)
        np.testing.assert_allclose(rx.values - tx.values, -spreading_loss_db(grid.values, d), atol=1e-9)


def test_noise_floor_when_opaque():
    pulse = ChirpPulse(0.8, 0.9)
    grid = FrequencyGrid.with_step(Band(0.8, 0.9), 1e-3)
    opaque = AbsorptionSpectrum(grid, np.full(grid.n_points, 1e3), GasMixture())
    rx = received_psd(pulse, opaque, 100.0, include_noise=True)
    np.testing.assert_allclose(rx.linear(), KB_T0, rtol=1e-9)


def test_received_errors():
    pulse = ChirpPulse(0.8, 0.9)
    narrow = FrequencyGrid.with_step(Band(0.8, 0.85), 1e-3)
    with pytest.raises(GridMismatch):
        received_psd(pulse, vacuum(narrow), 1.0)
    grid = FrequencyGrid.with_step(Band(0.8, 0.9), 1e-3)
    with pytest.raises(DegenerateGeometry):
        received_psd(pulse, vacuum(grid), 0.0)


def test_received_nonincreasing_in_mixing_ratio(catalogs):
    pulse = ChirpPulse(0.59, 0.69)
    grid = FrequencyGrid.with_step(pulse.band, 1e-3)
    base = GasMixture.standard()
    lo = received_psd(pulse, absorption_coefficient(catalogs, base, grid), 10.0)
    for gas in (GasSpecies.O3, GasSpecies.H2O, GasSpecies.SO2):
        more = base.with_ppm(gas, 2 * base.ppm(gas))
        hi = received_psd(pulse, absorption_coefficient(catalogs, more, grid), 10.0)
        assert np.all(hi.values <= lo.values + 1e-12)


def test_h2o_gap_grows_with_distance(catalogs):
    pulse = ChirpPulse(0.8, 0.9)
    grid = FrequencyGrid.with_step(pulse.band, 1e-3)
    wet = absorption_coefficient(catalogs, GasMixture.standard(), grid)
    dry = absorption_coefficient(catalogs, GasMixture.standard().with_ppm("H2O", 0.0), grid)
    gaps = []
    for d in (1.0, 10.0, 100.0):
        gap = received_psd(pulse, dry, d).values - received_psd(pulse, wet, d).values
        assert np.all(gap >= 0)
        gaps.append(gap)
    assert np.all(np.diff(gaps, axis=0) >= 0)


# ---------------------------------------------------------------- PSD differences


def test_psd_difference_matches_unit_profiles(catalogs):
    band = Band(0.8, 0.9)
    base = GasMixture.standard()
    q0 = base.ppm("O3")
    mults = (0.5, 0.9, 1.0, 1.1, 2.0, 10.0)
    deltas = psd_difference("O3", mults, band, 100.0, base, catalogs, step_thz=1e-3)
    grid = deltas[0].grid
    # O3 goes up by (m - 1) q0 and N2 down by the same amount; noise off keeps the change pure absorption
    o3 = unit_absorption_profile("O3", grid, 100.0, catalogs)
    n2 = unit_absorption_profile("N2", grid, 100.0, catalogs)
    for m, curve in zip(mults, deltas):
        np.testing.assert_allclose(curve.values, -(m - 1) * q0 * (o3 - n2), atol=1e-9)
    assert np.all(deltas[2].values == 0.0)
    assert np.all(np.sign(deltas[1].values[o3 > 0]) == -np.sign(deltas[3].values[o3 > 0]))
    by_distance = sorted(zip(mults, deltas), key=lambda md: abs(md[0] - 1))
    mags = np.array([np.abs(c.values) for _, c in by_distance])
    assert np.all(np.diff(mags, axis=0) >= -1e-9)
    with pytest.raises(ValueError):
        psd_difference("O3", (0.0,), band, 100.0, base, catalogs)


def test_o3_peak_difference_near_0_8424(catalogs):
    deltas = psd_difference("O3", (0.5, 2.0, 10.0), Band(0.8, 0.9), 100.0, GasMixture.standard(), catalogs)
    f, mag = find_peak_difference(deltas)
    assert abs(f - 0.8424) <= 0.005 and mag > 0


def _curve(values, lo=1.0, hi=2.0):
    grid = FrequencyGrid(Band(lo, hi), len(values))
    return PsdCurve(grid, np.asarray(values, dtype=float), PsdContext(multiplier=2.0))


def test_find_peak_rules():
    f, mag = find_peak_difference([_curve([0.0, 0.0, -3.0, 0.0, 0.0])])
    assert (f, mag) == (1.5, 3.0)
    f, _ = find_peak_difference([_curve([0.0, 2.0, 0.0, -2.0, 0.0])])
    assert f == 1.25
    f, _ = find_peak_difference([_curve([0.0, 0.0, 0.0, 2.0, 0.0]), _curve([0.0, 2.0, 0.0, 0.0, 0.0])])
    assert f == 1.25
    with pytest.raises(EmptyInput):
        find_peak_difference([])


def test_delta_csv_has_multiplier():
    buf = io.StringIO()
    write_delta_csv([_curve([0.0, 1.0])], buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "frequency_thz,psd_dbr,multiplier"
    assert lines[2] == "2,1,2"


# ---------------------------------------------------------------- band scoring


def test_o3_band_ranking(catalogs):
    ranked = band_score("O3", [Band(6.0, 8.0), Band(0.59, 0.69)], catalogs=catalogs, step_thz=1e-3)
    assert ranked[0].band == Band(0.59, 0.69)


def test_band_without_target_lines_ranks_last(catalogs):
    empty = {GasSpecies.O3: LineCatalog(GasSpecies.O3, ()), GasSpecies.H2O: catalogs[GasSpecies.H2O]}
    ranked = band_score("O3", [Band(0.59, 0.69), Band(6.0, 8.0)], catalogs=empty, step_thz=1e-3)
    assert all(s.score == 0.0 for s in ranked)
    mixed = dict(catalogs)
    lines = tuple(ln for ln in catalogs[GasSpecies.O3].lines if ln.line_center < 15.0)
    mixed[GasSpecies.O3] = LineCatalog(GasSpecies.O3, lines)
    bands = [Band(8.0, 9.0), Band(0.1, 0.2), Band(6.0, 7.0)]
    ranked = band_score("O3", bands, catalogs=mixed, step_thz=1e-3)
    assert ranked[-1].target_mean == 0.0 and ranked[0].band == Band(0.1, 0.2)


def test_band_ranking_scale_invariant(catalogs):
    bands = [Band(0.59, 0.69), Band(0.8, 0.9), Band(1.0, 1.1), Band(6.0, 8.0)]
    base = [s.band for s in band_score("O3", bands, catalogs=catalogs, step_thz=1e-3)]
    scaled = {g: LineCatalog(g, tuple(dataclasses.replace(ln, intensity=ln.intensity * 1e3) for ln in catalogs[g].lines))
              for g in (GasSpecies.O3, GasSpecies.H2O)}
    assert [s.band for s in band_score("O3", bands, catalogs=scaled, step_thz=1e-3)] == base


def test_band_score_property_and_sliding():
    assert BandScore(Band(1.0, 2.0), 2.0, 1.0).score == pytest.approx(2.0)
    bands = sliding_bands(Band(0.5, 1.0), 0.1, 0.05)
    assert bands[0] == Band(0.5, 0.6) and bands[-1] == Band(0.9, 1.0) and len(bands) == 9
