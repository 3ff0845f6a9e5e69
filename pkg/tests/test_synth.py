import itertools
import math
from importlib import resources

import numpy as np
import pytest
from sympy.physics import wigner

from thzgs import corpus, synth
from thzgs.gases import GasSpecies
from thzgs.hitran import load_bundled_catalog, read_par_path

C_CM = 2.99792458e10
C2 = 1.438776877
MHZ_PER_CM = 29979.2458


def test_wigner_3j_matches_sympy():
    for j1, j2, j3 in itertools.product(range(4), repeat=3):
        for m1 in range(-j1, j1 + 1):
            for m2 in range(-j2, j2 + 1):
                m3 = -m1 - m2
                ref = float(wigner.wigner_3j(j1, j2, j3, m1, m2, m3))
                assert synth.wigner_3j(j1, j2, j3, m1, m2, m3) == pytest.approx(ref, abs=1e-14)


def test_wigner_6j_matches_sympy():
    for args in itertools.product(range(3), repeat=6):
        ref = float(wigner.wigner_6j(*args))
        assert synth.wigner_6j(*args) == pytest.approx(ref, abs=1e-14)


@pytest.mark.parametrize("j1,j2", [(1, 1), (2, 3), (5, 4)])
def test_3j_orthogonality(j1, j2):
    for m1 in range(-j1, j1 + 1):
        for m2 in range(-j2, j2 + 1):
            total = sum((2 * j3 + 1) * synth.wigner_3j(j1, j2, j3, m1, m2, -m1 - m2) ** 2
                        for j3 in range(abs(j1 - j2), j1 + j2 + 1))
            assert total == pytest.approx(1.0, abs=1e-12)


def test_linear_rotor_partition_function_high_temperature_limit():
    rotor = synth.LinearRotor(1.922529, 0.0, 0.1098)
    x = C2 * rotor.b / 296.0
    assert rotor.partition_function() == pytest.approx(1 / x + 1 / 3 + x / 15, rel=1e-5)


def test_co_ground_line_position():
    nu = corpus.MODELS[GasSpecies.CO].lines().nu[0]
    # 115271.2018 MHz, laboratory J = 1-0 frequency of 12C16O
    assert abs(nu * MHZ_PER_CM - 115271.2018) < 1.0


@pytest.mark.parametrize("gas", [GasSpecies.CO, GasSpecies.HCN, GasSpecies.O3])
def test_intensity_agrees_with_einstein_a(gas):
    model = corpus.MODELS[gas]
    table = model.lines(nu_max=corpus.NU_MAX) if isinstance(model, synth.AsymmetricTop) else model.lines()
    keep = table.intensity > table.intensity.max() * 1e-3
    q = model.partition_function()
    nu, a, g_up, e = table.nu[keep], table.einstein_a[keep], table.g_upper[keep], table.e_lower[keep]
    s = (model.abundance * a * g_up / (8 * math.pi * C_CM * nu ** 2)
         * np.exp(-C2 * e / 296.0) * (1 - np.exp(-C2 * nu / 296.0)) / q)
    np.testing.assert_allclose(table.intensity[keep], s, rtol=1e-9)


def test_h2o_183ghz_line_against_hitran_record():
    with resources.as_file(resources.files("thzgs.data") / "reference" / "hitran_h2o_astroquery.par") as p:
        catalogs, _ = read_par_path(p)
    ref = min(catalogs[1].lines, key=lambda ln: abs(ln.line_center - 6.114567))
    syn = load_bundled_catalog("H2O")
    centers = np.array([ln.line_center for ln in syn.lines])
    ln = syn.lines[int(np.argmin(np.abs(centers - ref.line_center)))]
    assert abs(ln.line_center - ref.line_center) * MHZ_PER_CM < 20.0
    assert ln.intensity == pytest.approx(ref.intensity, rel=0.05)


def test_bundled_corpus_regenerates():
    for gas in (GasSpecies.CO, GasSpecies.HCN, GasSpecies.N2):
        built = corpus.build_catalog(gas)
        bundled = load_bundled_catalog(gas, gamma_floor=0.0)
        assert built.lines == bundled.lines
