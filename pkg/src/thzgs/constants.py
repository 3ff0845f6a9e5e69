"""Physical constants and unit conversions shared by every module.

Wavenumbers (cm^-1) are used internally; THz at the interfaces.
"""

import numpy as np

SPEED_OF_LIGHT = 2.99792458e8  # m/s
SPEED_OF_LIGHT_CM = 2.99792458e10  # cm/s
BOLTZMANN = 1.380649e-23  # J/K
PLANCK = 6.62607015e-34  # J s
SECOND_RADIATION = 1.438776877  # hc/k_B in cm K

T_REF = 296.0  # K
P_REF_ATM = 1.0
ATM_PA = 101325.0

# Number density of an ideal gas at 296 K, 1 atm, in molecule/cm^3.
N_REF = ATM_PA / (BOLTZMANN * T_REF) * 1e-6

DB_PER_NEPER_POWER = 10.0 / np.log(10.0)  # 10*log10(e)

PPM = 1e-6
PPM_TOTAL = 1e6


def thz_to_wavenumber(f_thz):
    """Convert frequency in THz to wavenumber in cm^-1."""
    out = np.multiply(f_thz, 1e12 / SPEED_OF_LIGHT_CM)
    return float(out) if np.ndim(out) == 0 else out


def wavenumber_to_thz(nu):
    """Convert wavenumber in cm^-1 to frequency in THz."""
    out = np.multiply(nu, SPEED_OF_LIGHT_CM / 1e12)
    return float(out) if np.ndim(out) == 0 else out
