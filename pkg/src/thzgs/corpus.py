"""Rotor models for the thirteen gases and conversion of their line lists to HITRAN records.

The bundled catalogs under ``thzgs/data/lines`` are produced from these
models by ``tools/make_corpus.py``. They stand in for HITRAN downloads when
the archive is unreachable: line positions and strengths are physically
consistent but not of archival accuracy. Constants are ground-state values
in cm^-1 unless noted. O3 constants are an effective fit to published
sub-millimetre line positions (rms 70 MHz up to 1 THz).
"""

import numpy as np

from . import synth
from .gases import GasSpecies
from .hitran import LineCatalog, SpectralLine

MHZ = 1 / 29979.2458  # MHz -> cm^-1
NU_MAX = 385.0  # cm^-1; 10 THz plus a 50 cm^-1 wing margin
GENERATOR_VERSION = "rotor-1"


def _models():
    return {
        GasSpecies.H2O: synth.AsymmetricTop(
            27.88063, 14.52177, 9.27771,
            delta_j=1.2505e-3, delta_jk=-5.7607e-3, delta_k=3.2548e-2,
            small_delta_j=5.0845e-4, small_delta_k=1.148e-3,
            phi_j=5.34e-7, phi_jk=1.5e-6, phi_kj=-2.45e-5, phi_k=1.26e-4,
            mu_b=1.857, spin_weight=synth.ortho_para(3.0, 1.0),
            abundance=0.997317, j_max=20,
        ),
        GasSpecies.O3: synth.AsymmetricTop(
            3.5552169, 0.44528148, 0.39475436,
            delta_j=4.5384e-7, delta_jk=-7.2115e-7, delta_k=3.2512e-4,
            small_delta_j=6.851e-8, small_delta_k=3.333e-6,
            phi_kj=3.592e-8, phi_k=1.9677e-6,
            mu_b=0.5337, spin_weight=synth.even_only(), q_vib=1.046,
            abundance=0.992901, j_max=70,
        ),
        GasSpecies.SO2: synth.AsymmetricTop(
            60778.55 * MHZ, 10318.07 * MHZ, 8799.70 * MHZ,
            delta_j=0.006634 * MHZ, delta_jk=-0.11696 * MHZ, delta_k=2.5897 * MHZ,
            small_delta_j=0.001705 * MHZ, small_delta_k=0.02539 * MHZ,
            mu_b=1.633, spin_weight=synth.even_only(), q_vib=1.10,
            abundance=0.945678, j_max=80,
        ),
        GasSpecies.NO2: synth.AsymmetricTop(
            239905.6 * MHZ, 13002.2 * MHZ, 12304.7 * MHZ,
            delta_j=0.00852 * MHZ, delta_jk=-0.582 * MHZ, delta_k=77.3 * MHZ,
            small_delta_j=0.00053 * MHZ, small_delta_k=0.1 * MHZ, phi_k=1.0e-6,
            # electron spin (2) times 14N spin (3); spin-rotation doublets not resolved
            mu_b=0.316, spin_weight=synth.even_only(6.0), q_vib=1.03,
            abundance=0.991616, j_max=70,
        ),
        GasSpecies.CH3OH: synth.AsymmetricTop(
            127523.4 * MHZ, 24690.2 * MHZ, 23759.7 * MHZ,
            # rigid rotor; torsional states folded into q_vib
            mu_a=0.885, mu_b=1.44, q_vib=2.7,
            abundance=0.98593, j_max=45,
        ),
        GasSpecies.NH3: synth.InvertingSymmetricTop(
            b=9.9443, c=6.2284, dj=8.47e-4, djk=-1.58e-3, dk=8.5e-4, mu=1.4719,
            inv0=0.7934, inv_j=-151.3 * MHZ, inv_k=211.0 * MHZ, q_vib=1.011,
            abundance=0.995872, j_max=24,
        ),
        GasSpecies.CO: synth.LinearRotor(1.922529, 6.121e-6, 0.10980, abundance=0.986544, j_max=60),
        GasSpecies.HCN: synth.LinearRotor(1.478222, 2.91e-6, 2.985, g_ns=6.0, q_vib=1.066, abundance=0.985114, j_max=80),
        GasSpecies.N2O: synth.LinearRotor(0.419011, 1.76e-7, 0.16083, g_ns=9.0, q_vib=1.124, abundance=0.990333, j_max=150),
        GasSpecies.CH4: synth.SphericalTop(5.2410, 1.10e-4, theta=6.5e-6, q_vib=1.007, abundance=0.988274, j_max=30),
        GasSpecies.O2: synth.TripletSigma(abundance=0.995262, n_max=45),
        # No pure rotational spectrum: only the 667 cm^-1 bending band.
        GasSpecies.CO2: synth.PerpendicularBand(667.38, 0.39022, 0.39064, mu_transition=0.17, q_total=286.1,
                                                abundance=0.984204, j_max=90),
        # Quadrupole fundamental near 2330 cm^-1; nothing below 10 THz.
        GasSpecies.N2: synth.QuadrupoleBand(2329.92, 1.98957, 1.97219, strength=2.0e-10, q_total=467.1,
                                            abundance=0.992687, j_max=35),
    }


MODELS = _models()

# Pressure-broadening parameters: gamma_air at J=0, its decrease per unit J,
# lower bound, gamma_self factor, n_air, delta_air (cm^-1/atm).
BROADENING = {
    GasSpecies.H2O: (0.100, 0.0035, 0.020, 5.0, 0.70, -0.003),
    GasSpecies.O3: (0.080, 0.0003, 0.060, 1.3, 0.76, 0.0),
    GasSpecies.SO2: (0.110, 0.0003, 0.080, 3.5, 0.75, 0.0),
    GasSpecies.NO2: (0.075, 0.0003, 0.055, 1.3, 0.73, 0.0),
    GasSpecies.CH3OH: (0.100, 0.0005, 0.070, 4.0, 0.75, 0.0),
    GasSpecies.NH3: (0.100, 0.0015, 0.060, 4.5, 0.70, 0.0),
    GasSpecies.CO: (0.075, 0.0006, 0.040, 1.1, 0.73, 0.0),
    GasSpecies.HCN: (0.125, 0.0008, 0.070, 6.0, 0.74, 0.0),
    GasSpecies.N2O: (0.085, 0.0003, 0.060, 1.2, 0.75, 0.0),
    GasSpecies.CH4: (0.065, 0.0008, 0.045, 1.2, 0.73, 0.0),
    GasSpecies.O2: (0.055, 0.0003, 0.035, 1.0, 0.72, 0.0),
    GasSpecies.CO2: (0.075, 0.0002, 0.060, 1.3, 0.72, 0.0),
    GasSpecies.N2: (0.060, 0.0005, 0.040, 1.0, 0.70, 0.0),
}

# Relative intensity cut and line cap applied when writing the corpus.
PRUNE_RELATIVE = 1e-6
MAX_LINES = 6000


def _upper_j(label):
    digits = [int(tok) for tok in label.replace("R", " ").split() if tok.lstrip("-").isdigit()]
    return digits[0] if digits else 0


def line_table(gas):
    gas = GasSpecies.parse(gas)
    model = MODELS[gas]
    if isinstance(model, synth.AsymmetricTop):
        table = model.lines(nu_max=NU_MAX)
    else:
        table = model.lines()
    return table


def prune(table, nu_max=NU_MAX, relative=PRUNE_RELATIVE, max_lines=MAX_LINES):
    """Drop lines beyond ``nu_max`` or weaker than ``relative`` times the strongest."""
    mask = table.nu > 0
    in_range = mask & (table.nu <= nu_max)
    if in_range.any():
        mask = in_range  # molecules with no lines in range keep their out-of-range band
    if not mask.any():
        return table.select(mask)
    mask &= table.intensity >= relative * table.intensity[mask].max()
    idx = np.flatnonzero(mask)
    if len(idx) > max_lines:
        idx = idx[np.argsort(-table.intensity[idx], kind="stable")[:max_lines]]
    keep = np.zeros(len(table.nu), dtype=bool)
    keep[idx] = True
    return table.select(keep)


def to_lines(gas, table):
    """Convert a LineTable into SpectralLine records with HITRAN-style trailing fields."""
    gas = GasSpecies.parse(gas)
    g0, dg, gmin, self_factor, n_air, delta = BROADENING[gas]
    glob = "0".rjust(15)
    lines = []
    for i in range(len(table.nu)):
        j_up = _upper_j(table.q_upper[i])
        gamma_air = max(g0 - dg * j_up, gmin)
        gamma_self = min(gamma_air * self_factor, 0.999)
        trailing = (
            glob + glob + table.q_upper[i] + table.q_lower[i]
            + "000000" + " 0 0 0 0 0 0" + " "
            + f"{table.g_upper[i]:7.1f}" + f"{table.g_lower[i]:7.1f}"
        )
        ln = SpectralLine(
            molecule_id=gas.molecule_id,
            isotopologue_id=1,
            line_center=round(float(table.nu[i]), 6),
            intensity=float(f"{table.intensity[i]:.3e}"),
            einstein_a=float(f"{table.einstein_a[i]:.3e}"),
            gamma_air=round(gamma_air, 4),
            gamma_self=round(gamma_self, 3),
            lower_state_energy=round(float(table.e_lower[i]), 4),
            n_air=n_air,
            delta_air=delta,
            trailing=trailing,
        )
        lines.append(ln)
    return LineCatalog(gas, tuple(lines), f"synthetic:{GENERATOR_VERSION}")


def build_catalog(gas):
    return to_lines(gas, prune(line_table(gas)))
