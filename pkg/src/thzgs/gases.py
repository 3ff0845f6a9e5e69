"""Gas species, their HITRAN molecule numbers and the standard atmosphere table."""

from dataclasses import dataclass
from enum import Enum
from typing import Optional


class GasSpecies(Enum):
    """The thirteen gases handled by the toolkit, valued by HITRAN molecule number."""

    H2O = 1
    CO2 = 2
    O3 = 3
    N2O = 4
    CO = 5
    CH4 = 6
    O2 = 7
    SO2 = 9
    NO2 = 10
    NH3 = 11
    N2 = 22
    HCN = 23
    CH3OH = 39

    @property
    def molecule_id(self) -> int:
        return self.value

    @classmethod
    def from_molecule_id(cls, molecule_id: int) -> "GasSpecies":
        return cls(int(molecule_id))

    @classmethod
    def parse(cls, name) -> "GasSpecies":
        """Accept a species, its name (any case) or its molecule number."""
        if isinstance(name, cls):
            return name
        if isinstance(name, int) or (isinstance(name, str) and name.strip().isdigit()):
            return cls(int(name))
        try:
            return cls[str(name).strip().upper()]
        except KeyError:
            raise ValueError(f"unknown gas {name!r}") from None


@dataclass(frozen=True)
class TableRow:
    gas: GasSpecies
    ppm: float
    band_thz: tuple
    noise_percent: Optional[float]  # None where the table reads "reduced until 1e-6 %"
    detectable: bool


# Atmospheric mixing ratios, analysis bands and reported detection outcomes.
STANDARD_ATMOSPHERE = (
    TableRow(GasSpecies.H2O, 10000.0, (6.0, 8.0), 1.0, True),
    TableRow(GasSpecies.O2, 209460.0, (0.5, 2.5), 0.01, True),
    TableRow(GasSpecies.SO2, 1.0, (0.5, 2.5), 0.01, True),
    TableRow(GasSpecies.NH3, 0.01, (3.0, 5.5), 0.01, True),
    TableRow(GasSpecies.O3, 0.07, (1.0, 3.0), 0.001, True),
    TableRow(GasSpecies.NO2, 0.02, (1.0, 3.0), 0.001, True),
    TableRow(GasSpecies.HCN, 0.01, (1.0, 3.0), 0.001, True),
    TableRow(GasSpecies.CO, 0.01, (0.5, 3.0), 0.0001, True),
    TableRow(GasSpecies.CH4, 1.8, (3.0, 4.5), 0.00001, True),
    TableRow(GasSpecies.N2, 780840.0, (3.0, 5.0), None, False),
    TableRow(GasSpecies.CO2, 410.0, (8.0, 10.0), None, False),
    TableRow(GasSpecies.N2O, 0.5, (0.1, 1.5), None, False),
    TableRow(GasSpecies.CH3OH, 0.01, (0.1, 1.0), None, False),
)

TABLE = {row.gas: row for row in STANDARD_ATMOSPHERE}

TABLE_PPM = {row.gas: row.ppm for row in STANDARD_ATMOSPHERE}

# The dominant, least-absorbing gas absorbs concentration changes during sweeps.
FILLER_GAS = GasSpecies.N2


def balanced(ppm: dict, filler: GasSpecies = FILLER_GAS, total: float = 1e6) -> dict:
    """Return a copy of ``ppm`` with ``filler`` set so the mixture sums to ``total``."""
    out = dict(ppm)
    rest = sum(v for g, v in out.items() if g is not filler)
    if rest > total:
        raise ValueError(f"non-filler gases already sum to {rest} ppm > {total}")
    out[filler] = total - rest
    return out


# The tabulated values overshoot 1e6 ppm by ~712 ppm; N2 takes the balance.
STANDARD_PPM = balanced(TABLE_PPM)

ALL_GASES = tuple(GasSpecies)
