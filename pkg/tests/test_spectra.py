import io
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from thzgs.errors import GridOutsideCoverage, InvalidMixture, MissingCatalog
from thzgs.gases import STANDARD_PPM, GasSpecies
from thzgs.hitran import Band, LineCatalog, SpectralLine
from thzgs.spectra import (
    AbsorptionSpectrum,
    FrequencyGrid,
    GasMixture,
    SpectraOptions,
    absorption_coefficient,
    absorption_loss_db,
    line_half_width,
    lorentz,
    transmittance,
    unit_absorption_profile,
)

# 1 atm / (k_B * 296 K), molecules per cm^3, evaluated by hand from SI constants
N_REF_CM3 = 101325.0 / (1.380649e-23 * 296.0) / 1e6


def single_line_catalog(center, intensity=1e-20, gamma_air=0.07, gamma_self=0.35, gas=GasSpecies.CO):
    ln = SpectralLine(gas.molecule_id, 1, center, intensity, 1e-5, gamma_air, gamma_self, 10.0, 0.7, 0.0)
    return LineCatalog(gas, (ln,))


def test_half_width_branches():
    ln = SpectralLine(gamma_air=0.07, gamma_self=0.35)
    assert line_half_width(ln) == 0.07
    on = SpectraOptions(self_broadening=True)
    assert line_half_width(ln, q_self=1e6, options=on) == pytest.approx(0.35, rel=1e-15)
    trace_on = line_half_width(ln, q_self=1.0, options=on)
    # a 1 ppm self share moves the width by 1e-6 * (gamma_self / gamma_air - 1)
    assert abs(trace_on - 0.07) / 0.07 <= 1e-6 * (0.35 / 0.07 - 1) * (1 + 1e-9)
    assert abs(trace_on - 0.07) / 0.07 <= 1e-5
    # hand evaluation of the mixed branch
    assert trace_on == pytest.approx(0.07 * (1 - 1e-6) + 0.35 * 1e-6, rel=1e-15)


def test_single_line_lorentz_peak():
    grid = FrequencyGrid.with_step(Band(0.8, 1.0), 1e-4)
    center = float(grid.wavenumbers[1000])
    S, alpha, q = 3.7e-21, 0.0612, 25.0
    cat = single_line_catalog(center, S, alpha)
    spec = absorption_coefficient({GasSpecies.CO: cat}, GasMixture({GasSpecies.CO: q}), grid)
    expected = N_REF_CM3 * q * 1e-6 * S / (math.pi * alpha) * 100.0  # m^-1
    assert spec.k[1000] == pytest.approx(expected, rel=1e-9)
    # half maximum sits one half-width from the center
    assert lorentz(center + alpha, center, alpha) == pytest.approx(0.5 / (math.pi * alpha), rel=1e-12)


def test_cutoff_zeroes_far_wing():
    grid = FrequencyGrid.with_step(Band(0.5, 3.0), 1e-3)
    center = 50.0  # ~1.5 THz
    cat = single_line_catalog(center)
    k = absorption_coefficient({GasSpecies.CO: cat}, GasMixture({GasSpecies.CO: 1.0}), grid,
                               SpectraOptions(cutoff=10.0)).k
    far = np.abs(grid.wavenumbers - center) > 10.0
    assert np.all(k[far] == 0.0) and np.all(k[~far] > 0.0)


def test_zero_mixture_gives_zero(catalogs):
    grid = FrequencyGrid.with_step(Band(1.0, 3.0), 1e-3)
    mix = GasMixture({g: 0.0 for g in GasSpecies})
    assert np.all(absorption_coefficient(catalogs, mix, grid).k == 0.0)


def test_concentration_linearity(catalogs):
    grid = FrequencyGrid.with_step(Band(1.0, 3.0), 1e-3)
    base = GasMixture.standard().with_ppm("N2", STANDARD_PPM[GasSpecies.N2] - 1.0, filler=None)
    doubled = GasMixture({**base.mixing_ratios, GasSpecies.O3: 2 * base.ppm("O3")})
    inc = GasMixture({GasSpecies.O3: base.ppm("O3")})
    diff = absorption_coefficient(catalogs, doubled, grid).k - absorption_coefficient(catalogs, base, grid).k
    ref = absorption_coefficient(catalogs, inc, grid).k
    # the difference of two large sums carries rounding relative to the baseline, not to the increment
    scale = absorption_coefficient(catalogs, base, grid).k
    assert np.all(np.abs(diff - ref) <= 1e-12 * scale + 1e-12 * ref)


def test_sum_of_mixtures(catalogs):
    grid = FrequencyGrid.with_step(Band(0.5, 1.5), 1e-3)
    a = GasMixture({GasSpecies.H2O: 5000.0, GasSpecies.SO2: 1.0})
    b = GasMixture({GasSpecies.H2O: 2000.0, GasSpecies.O3: 0.07})
    ab = GasMixture({GasSpecies.H2O: 7000.0, GasSpecies.SO2: 1.0, GasSpecies.O3: 0.07})
    ka, kb, kab = (absorption_coefficient(catalogs, m, grid).k for m in (a, b, ab))
    np.testing.assert_allclose(kab, ka + kb, rtol=1e-12)


def test_cutoff_convergence_band_integrated(catalogs):
    mix = GasMixture.standard()
    for band in (Band(0.5, 1.5), Band(1.0, 3.0), Band(3.0, 4.5), Band(6.0, 8.0)):
        grid = FrequencyGrid.with_step(band, 1e-3)
        k25 = absorption_coefficient(catalogs, mix, grid, SpectraOptions(cutoff=25.0)).k
        k50 = absorption_coefficient(catalogs, mix, grid, SpectraOptions(cutoff=50.0)).k
        assert abs(k50.sum() - k25.sum()) / k25.sum() < 0.01


def test_loss_identities(catalogs):
    grid = FrequencyGrid.with_step(Band(1.0, 3.0), 1e-3)
    spec = absorption_coefficient(catalogs, GasMixture.standard(), grid)
    assert np.all(absorption_loss_db(spec, 0.0) == 0.0)
    assert np.all(absorption_loss_db(spec, 2.0) == 2.0 * absorption_loss_db(spec, 1.0))
    assert np.all(transmittance(spec, 0.0) == 1.0)
    tau = transmittance(spec, 0.3)
    np.testing.assert_allclose(-10 * np.log10(tau), absorption_loss_db(spec, 0.3), rtol=1e-12)
    assert np.all(transmittance(spec, 0.6)[spec.k > 0] < tau[spec.k > 0])
    with pytest.raises(ValueError):
        absorption_loss_db(spec, -1.0)


def test_ten_db_identity():
    grid = FrequencyGrid(Band(1.0, 2.0), 3)
    spec = AbsorptionSpectrum(grid, np.full(3, math.log(10) / 10), GasMixture())
    np.testing.assert_allclose(absorption_loss_db(spec, 10.0), 10.0, rtol=1e-15)


@given(d1=st.just(0.0) | st.floats(1e-6, 1e3), d2=st.just(0.0) | st.floats(1e-6, 1e3))
def test_distance_additivity(d1, d2):
    grid = FrequencyGrid(Band(1.0, 2.0), 4)
    spec = AbsorptionSpectrum(grid, np.array([0.0, 1e-3, 0.25, 7.0]), GasMixture())
    lhs = absorption_loss_db(spec, d1 + d2)
    rhs = absorption_loss_db(spec, d1) + absorption_loss_db(spec, d2)
    # d1 + d2 itself rounds, so equality holds to a few ulp; doubling is exact
    np.testing.assert_allclose(lhs, rhs, rtol=4 * np.finfo(float).eps, atol=0)
    assert np.array_equal(absorption_loss_db(spec, 2 * d1), 2 * absorption_loss_db(spec, d1))


@given(q=st.just(0.0) | st.floats(1e-9, 1e6))
def test_unit_profile_scales(catalogs, q):
    grid = FrequencyGrid.with_step(Band(1.0, 1.2), 1e-3)
    unit = unit_absorption_profile("O3", grid, 0.05, catalogs)
    full = absorption_loss_db(absorption_coefficient(catalogs, GasMixture({GasSpecies.O3: q}), grid), 0.05)
    np.testing.assert_allclose(unit * q, full, rtol=1e-12)


def test_o3_unit_profile_nonzero_and_nonnegative(catalogs):
    grid = FrequencyGrid.with_step(Band(1.0, 3.0))
    prof = unit_absorption_profile("O3", grid, 0.05, catalogs)
    assert np.all(prof >= 0) and prof.max() > 0


def test_so2_has_highest_peak_loss(catalogs):
    grid = FrequencyGrid.with_step(Band(0.5, 1.5))
    peak = {g: absorption_loss_db(absorption_coefficient(catalogs, GasMixture({g: STANDARD_PPM[g]}), grid), 1.0).max()
            for g in (GasSpecies.SO2, GasSpecies.NO2, GasSpecies.O3)}
    assert peak[GasSpecies.SO2] > peak[GasSpecies.NO2]
    assert peak[GasSpecies.SO2] > peak[GasSpecies.O3]


def test_self_broadening_toggle_changes_h2o(catalogs):
    grid = FrequencyGrid.with_step(Band(0.5, 0.6), 1e-3)
    mix = GasMixture({GasSpecies.H2O: 10000.0})
    off = absorption_coefficient(catalogs, mix, grid).k
    on = absorption_coefficient(catalogs, mix, grid, SpectraOptions(self_broadening=True)).k
    assert not np.allclose(on, off, rtol=1e-6)


def test_threads_match_serial(catalogs):
    grid = FrequencyGrid.with_step(Band(1.0, 3.0), 1e-3)
    mix = GasMixture({GasSpecies.H2O: 10000.0})
    serial = absorption_coefficient(catalogs, mix, grid, SpectraOptions(self_broadening=True)).k
    threaded = absorption_coefficient(catalogs, mix, grid, SpectraOptions(self_broadening=True, threads=4)).k
    # BLAS may sum the per-slice products in a different order
    np.testing.assert_allclose(threaded, serial, rtol=1e-13)


def test_mixture_validation():
    with pytest.raises(InvalidMixture):
        GasMixture({GasSpecies.O3: -1.0})
    with pytest.raises(InvalidMixture):
        GasMixture({GasSpecies.N2: 8e5, GasSpecies.O2: 3e5})
    with pytest.raises(InvalidMixture):
        GasMixture({GasSpecies.O3: 1.0}, temperature=300.0)
    with pytest.raises(InvalidMixture):
        GasMixture({GasSpecies.O3: 1.0}, pressure=0.5)
    mix = GasMixture.standard().with_ppm("O3", 0.14)
    assert sum(mix.mixing_ratios.values()) == pytest.approx(1e6, rel=1e-15)


def test_missing_catalog_and_coverage():
    grid = FrequencyGrid.with_step(Band(1.0, 2.0), 1e-2)
    with pytest.raises(MissingCatalog):
        absorption_coefficient({}, GasMixture({GasSpecies.O3: 1.0}), grid)
    narrow = LineCatalog(GasSpecies.CO, (), "test coverage=30.0:40.0")
    with pytest.raises(GridOutsideCoverage):
        absorption_coefficient({GasSpecies.CO: narrow}, GasMixture({GasSpecies.CO: 1.0}), grid)


def test_grid_and_csv():
    grid = FrequencyGrid.with_step(Band(1.0, 2.0), 0.25)
    assert grid.n_points == 5 and np.all(np.diff(grid.values) > 0)
    with pytest.raises(ValueError):
        FrequencyGrid(Band(1.0, 2.0), 1)
    spec = AbsorptionSpectrum(grid, np.linspace(0, 1, 5) / 3, GasMixture())
    buf = io.StringIO()
    spec.to_csv(buf)
    rows = buf.getvalue().splitlines()
    assert rows[0] == "frequency_thz,k_per_m"
    assert float(rows[2].split(",")[1]) == spec.k[1]
