"""HITRAN 160-character line records: parsing, serialization, band filtering and fetching.

Column layout (1-based, inclusive)::

    1-2   molecule number           I2
    3     isotopologue number       I1
    4-15  line center (cm^-1)       F12.6
    16-25 intensity at 296 K        E10.3
    26-35 Einstein A (s^-1)         E10.3
    36-40 air half-width            F5.4
    41-45 self half-width           F5.3
    46-55 lower-state energy        F10.4
    56-59 n_air                     F4.2
    60-67 delta_air                 F8.6
    68-160 quantum numbers, uncertainties, references, weights (kept verbatim)

Fortran writes F fields without the leading zero when the field is one
character short (``.0919``, ``-.008358``); the serializer does the same so
that records survive a parse/serialize cycle byte for byte.
"""

import dataclasses
import datetime
import gzip
import hashlib
import io
import json
import logging
import os
import re
import time
import urllib.error
import urllib.parse
import urllib.request
from dataclasses import dataclass, field
from functools import cached_property
from importlib import resources
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from .constants import thz_to_wavenumber
from .errors import (
    CacheCorrupt,
    EmptyCatalog,
    FieldOverflow,
    FieldSyntax,
    HttpStatus,
    NetworkError,
    ParseError,
    RangeViolation,
    WrongLength,
)
from .gases import GasSpecies

log = logging.getLogger(__name__)

RECORD_LENGTH = 160
TRAILING_LENGTH = 93
CACHE_FORMAT_VERSION = "par160-v1"
DEFAULT_ENDPOINT = "https://hitran.org/lbl/api"
DEFAULT_GAMMA_FLOOR = 1e-6  # cm^-1/atm
DEFAULT_MARGIN = 25.0  # cm^-1, matches the line-wing cutoff

_EXP3 = re.compile(r"[eEdD][+-]\d{3}\s*$")

# name, first column, last column, kind, width, decimals
_FIELDS = (
    ("molecule_id", 1, 2, "I", 2, 0),
    ("isotopologue_id", 3, 3, "I", 1, 0),
    ("line_center", 4, 15, "F", 12, 6),
    ("intensity", 16, 25, "E", 10, 3),
    ("einstein_a", 26, 35, "E", 10, 3),
    ("gamma_air", 36, 40, "F", 5, 4),
    ("gamma_self", 41, 45, "F", 5, 3),
    ("lower_state_energy", 46, 55, "F", 10, 4),
    ("n_air", 56, 59, "F", 4, 2),
    ("delta_air", 60, 67, "F", 8, 6),
)


@dataclass(frozen=True)
class SpectralLine:
    """One transition. Units: cm^-1, cm^-1/(molecule cm^-2), s^-1, cm^-1/atm."""

    molecule_id: int = 0
    isotopologue_id: int = 0
    line_center: float = 0.0
    intensity: float = 0.0
    einstein_a: float = 0.0
    gamma_air: float = 0.0
    gamma_self: float = 0.0
    lower_state_energy: float = 0.0
    n_air: float = 0.0
    delta_air: float = 0.0
    trailing: str = " " * TRAILING_LENGTH
    # E fields written with zero-padded 3-digit exponents (HITEMP style), e.g. "1.929E-033".
    wide_exponents: frozenset = field(default=frozenset(), compare=False, repr=False)


@dataclass(frozen=True)
class Band:
    """Frequency band in THz."""

    f_low: float
    f_high: float

    def __post_init__(self):
        if not (0.1 <= self.f_low < self.f_high <= 10.0):
            raise ValueError(f"band must satisfy 0.1 <= f_low < f_high <= 10 THz, got {self.f_low}-{self.f_high}")

    @property
    def wavenumbers(self):
        return thz_to_wavenumber(self.f_low), thz_to_wavenumber(self.f_high)

    def label(self):
        return f"{self.f_low:g}-{self.f_high:g}"

    @classmethod
    def parse(cls, text):
        lo, hi = str(text).replace(":", "-").split("-")
        return cls(float(lo), float(hi))


@dataclass(frozen=True)
class LineCatalog:
    gas: GasSpecies
    lines: tuple = ()
    source: str = ""

    def __post_init__(self):
        lines = tuple(sorted(self.lines, key=lambda ln: ln.line_center))
        object.__setattr__(self, "lines", lines)
        for ln in lines:
            if ln.molecule_id != self.gas.molecule_id:
                raise ValueError(f"record for molecule {ln.molecule_id} in {self.gas.name} catalog")

    def __len__(self):
        return len(self.lines)

    @cached_property
    def arrays(self):
        """Column arrays (read-only) used by the spectral kernels."""
        names = ("line_center", "intensity", "gamma_air", "gamma_self", "delta_air", "n_air", "lower_state_energy")
        out = {}
        for name in names:
            a = np.array([getattr(ln, name) for ln in self.lines], dtype=float)
            a.setflags(write=False)
            out[name] = a
        return out

    def normalized(self, gamma_floor=DEFAULT_GAMMA_FLOOR):
        """Return a catalog whose air half-widths are at least ``gamma_floor``."""
        if not any(ln.gamma_air < gamma_floor for ln in self.lines):
            return self
        lines = tuple(
            dataclasses.replace(ln, gamma_air=gamma_floor) if ln.gamma_air < gamma_floor else ln
            for ln in self.lines
        )
        return LineCatalog(self.gas, lines, self.source)


# ---------------------------------------------------------------- records


def _format_fixed(value, width, decimals, name):
    s = f"{value:.{decimals}f}"
    if len(s) > width:
        # Fortran drops the leading zero of |x| < 1 when short of room.
        if s.startswith("0."):
            s = s[1:]
        elif s.startswith("-0."):
            s = "-" + s[2:]
    if len(s) > width:
        raise FieldOverflow(f"{name}={value!r} does not fit F{width}.{decimals}")
    return s.rjust(width)


def _format_exp(value, width, decimals, name, wide=False):
    s = f"{value:.{decimals}E}"
    if wide:
        mantissa, exponent = s.split("E")
        s = f"{mantissa}E{exponent[0]}{exponent[1:].zfill(3)}"
    if len(s) > width:
        raise FieldOverflow(f"{name}={value!r} does not fit E{width}.{decimals}")
    return s.rjust(width)


def _format_int(value, width, name):
    s = str(int(value))
    if len(s) > width or int(value) < 0:
        raise FieldOverflow(f"{name}={value!r} does not fit I{width}")
    return s.rjust(width)


def parse_par_record(record: str) -> SpectralLine:
    """Decode one 160-character record."""
    record = record.rstrip("\r\n")
    if len(record) != RECORD_LENGTH:
        raise WrongLength(f"record has {len(record)} characters, expected {RECORD_LENGTH}")
    values = {}
    wide = set()
    for name, first, last, kind, _, _ in _FIELDS:
        text = record[first - 1:last]
        try:
            if kind == "I":
                stripped = text.strip()
                values[name] = int(stripped) if stripped else 0
            else:
                values[name] = float(text)
        except ValueError:
            raise FieldSyntax(name, (first, last), text) from None
        if kind != "I" and not np.isfinite(values[name]):
            raise FieldSyntax(name, (first, last), text)
        if kind == "E" and _EXP3.search(text):
            wide.add(name)
    if values["intensity"] < 0:
        raise RangeViolation(f"negative intensity {values['intensity']!r}")
    if values["line_center"] < 0:
        raise RangeViolation(f"negative line center {values['line_center']!r}")
    return SpectralLine(trailing=record[67:], wide_exponents=frozenset(wide), **values)


def serialize_par_record(line: SpectralLine) -> str:
    """Encode a line as a 160-character record (no terminator)."""
    parts = []
    for name, _, _, kind, width, decimals in _FIELDS:
        value = getattr(line, name)
        if kind == "I":
            parts.append(_format_int(value, width, name))
        elif kind == "E":
            parts.append(_format_exp(value, width, decimals, name, name in line.wide_exponents))
        else:
            parts.append(_format_fixed(value, width, decimals, name))
    trailing = line.trailing
    if len(trailing) > TRAILING_LENGTH:
        raise FieldOverflow(f"trailing field has {len(trailing)} characters, at most {TRAILING_LENGTH}")
    return "".join(parts) + trailing.ljust(TRAILING_LENGTH)


@dataclass
class RecordError:
    line_number: int
    message: str


def parse_par_file(lines: Iterable[str], source=""):
    """Parse a stream of records into ``{molecule_id: LineCatalog}``.

    Blank lines are skipped. Bad records are collected as ``RecordError``
    (1-based line numbers) and returned alongside the catalogs. Raises
    ``EmptyCatalog`` when no record is valid.
    """
    grouped = {}
    errors = []
    for number, raw in enumerate(lines, start=1):
        if isinstance(raw, bytes):
            raw = raw.decode("ascii", errors="replace")
        text = raw.rstrip("\r\n")
        if not text.strip():
            continue
        try:
            ln = parse_par_record(text)
            gas = GasSpecies.from_molecule_id(ln.molecule_id)
        except ParseError as exc:
            errors.append(RecordError(number, str(exc)))
            continue
        except ValueError:
            errors.append(RecordError(number, f"molecule {text[:2].strip()!r} is not a supported gas"))
            continue
        grouped.setdefault(gas, []).append(ln)
    if not grouped:
        raise EmptyCatalog(f"no valid records in {source or 'input'}", errors)
    catalogs = {gas.molecule_id: LineCatalog(gas, tuple(lines), source) for gas, lines in grouped.items()}
    return catalogs, errors


def read_par_path(path):
    """Parse a (optionally gzipped) .par file from disk."""
    path = Path(path)
    opener = gzip.open if path.suffix == ".gz" else open
    with opener(path, "rt", encoding="ascii", newline="") as fh:
        return parse_par_file(fh, source=str(path))


def write_par(lines: Iterable[SpectralLine], fh):
    for ln in lines:
        fh.write(serialize_par_record(ln) + "\n")


# ---------------------------------------------------------------- filtering


def filter_band(catalog: LineCatalog, band: Band, margin: float = 0.0) -> LineCatalog:
    """Keep lines whose center lies within the band (in cm^-1) widened by ``margin``."""
    if margin < 0:
        raise ValueError("margin must be >= 0")
    lo, hi = band.wavenumbers
    lo -= margin
    hi += margin
    kept = tuple(ln for ln in catalog.lines if lo <= ln.line_center <= hi)
    return LineCatalog(catalog.gas, kept, catalog.source)


def covers(catalog: LineCatalog, lo_wn: float, hi_wn: float) -> bool:
    """True when the catalog's recorded coverage spans [lo_wn, hi_wn] cm^-1."""
    cov = coverage_of(catalog)
    return cov is None or (cov[0] <= lo_wn and cov[1] >= hi_wn)


def coverage_of(catalog: LineCatalog):
    """Coverage window parsed from the provenance string, or None if unknown."""
    marker = "coverage="
    if marker not in catalog.source:
        return None
    text = catalog.source.split(marker, 1)[1].split()[0]
    lo, hi = text.split(":")
    return float(lo), float(hi)


# ---------------------------------------------------------------- bundled corpus


def bundled_path(gas: GasSpecies):
    return resources.files("thzgs.data") / "lines" / f"{gas.molecule_id:02d}_{gas.name}.par.gz"


def load_bundled_catalog(gas, gamma_floor=DEFAULT_GAMMA_FLOOR) -> LineCatalog:
    gas = GasSpecies.parse(gas)
    path = bundled_path(gas)
    with resources.as_file(path) as p:
        if not Path(p).exists():
            from .errors import MissingCatalog
            raise MissingCatalog(f"no bundled catalog for {gas.name}")
        raw = gzip.decompress(Path(p).read_bytes()).decode("ascii")
    meta = bundled_manifest().get(gas.name, {})
    cov = meta.get("coverage_cm1")
    source = f"bundled:{path.name}"
    if cov:
        source += f" coverage={cov[0]}:{cov[1]}"
    catalogs, errors = parse_par_file(io.StringIO(raw), source=source)
    if errors:
        raise EmptyCatalog(f"bundled catalog {path.name} has {len(errors)} bad records", errors)
    catalog = catalogs.get(gas.molecule_id, LineCatalog(gas, (), source))
    return catalog.normalized(gamma_floor)


_BUNDLED_CACHE = {}


def load_bundled_catalogs(gases=None, gamma_floor=DEFAULT_GAMMA_FLOOR) -> dict:
    """Bundled catalogs keyed by GasSpecies. Parsed once per process."""
    gases = list(GasSpecies) if gases is None else [GasSpecies.parse(g) for g in gases]
    out = {}
    for gas in gases:
        key = (gas, gamma_floor)
        if key not in _BUNDLED_CACHE:
            _BUNDLED_CACHE[key] = load_bundled_catalog(gas, gamma_floor)
        out[gas] = _BUNDLED_CACHE[key]
    return out


def bundled_manifest() -> dict:
    path = resources.files("thzgs.data") / "lines" / "MANIFEST.json"
    try:
        return json.loads(path.read_text()).get("gases", {})
    except FileNotFoundError:
        return {}


# ---------------------------------------------------------------- fetching


@dataclass
class FetchStats:
    downloads: int = 0
    cache_hits: int = 0
    refetches: int = 0


@dataclass
class Fetcher:
    """HTTP client with an on-disk cache keyed by (molecule, band, format version).

    The query string sent is ``molecule_id``, ``numin``, ``numax`` (cm^-1),
    ``request_params=par_line`` and, when configured, ``apikey``.
    """

    endpoint: str = DEFAULT_ENDPOINT
    cache_dir: Path = Path(".thzgs-cache")
    api_key: Optional[str] = None
    attempts: int = 3
    backoff: float = 0.5
    timeout: float = 30.0
    refetch_on_corrupt: bool = True
    margin: float = DEFAULT_MARGIN
    stats: FetchStats = field(default_factory=FetchStats)

    def __post_init__(self):
        self.cache_dir = Path(self.cache_dir)
        if self.api_key is None:
            self.api_key = os.environ.get("THZGS_HITRAN_KEY") or None

    def cache_path(self, gas: GasSpecies, band: Band) -> Path:
        return self.cache_dir / str(gas.molecule_id) / f"{band.f_low:g}-{band.f_high:g}.par"

    def query_url(self, gas: GasSpecies, band: Band, include_key=True) -> str:
        lo, hi = band.wavenumbers
        params = {
            "molecule_id": gas.molecule_id,
            "numin": f"{max(lo - self.margin, 0.0):.6f}",
            "numax": f"{hi + self.margin:.6f}",
            "request_params": "par_line",
        }
        if include_key and self.api_key:
            params["apikey"] = self.api_key
        return self.endpoint + "?" + urllib.parse.urlencode(params)

    def _download(self, url):
        last = None
        for attempt in range(self.attempts):
            if attempt:
                time.sleep(self.backoff * 2 ** (attempt - 1))
            try:
                with urllib.request.urlopen(url, timeout=self.timeout) as resp:
                    return resp.read()
            except urllib.error.HTTPError as exc:
                last = exc
                # 4xx other than throttling will not improve on retry
                if 400 <= exc.code < 500 and exc.code != 429:
                    raise HttpStatus(exc.code, url.split("apikey")[0]) from None
            except (urllib.error.URLError, OSError) as exc:
                last = exc
            log.info("fetch attempt %d/%d failed: %s", attempt + 1, self.attempts, last)
        if isinstance(last, urllib.error.HTTPError):
            raise HttpStatus(last.code, url.split("apikey")[0])
        raise NetworkError(f"could not reach {self.endpoint}: {last}")

    def _read_cache(self, path: Path):
        sidecar = path.with_name(path.name + ".json")
        if not path.exists() or not sidecar.exists():
            return None
        meta = json.loads(sidecar.read_text())
        if meta.get("format_version") != CACHE_FORMAT_VERSION:
            return None
        payload = path.read_bytes()
        if hashlib.sha256(payload).hexdigest() != meta.get("sha256"):
            if not self.refetch_on_corrupt:
                raise CacheCorrupt(f"checksum mismatch for {path}")
            log.warning("checksum mismatch for %s; refetching", path)
            self.stats.refetches += 1
            return None
        return payload, meta

    def fetch(self, gas, band: Band) -> LineCatalog:
        from filelock import FileLock

        gas = GasSpecies.parse(gas)
        path = self.cache_path(gas, band)
        path.parent.mkdir(parents=True, exist_ok=True)
        with FileLock(str(path) + ".lock"):
            cached = self._read_cache(path)
            if cached is None:
                url = self.query_url(gas, band)
                payload = self._download(url)
                meta = {
                    "format_version": CACHE_FORMAT_VERSION,
                    "sha256": hashlib.sha256(payload).hexdigest(),
                    "url": self.query_url(gas, band, include_key=False),
                    "retrieved": datetime.date.today().isoformat(),
                }
                tmp = path.with_name(path.name + ".tmp")
                tmp.write_bytes(payload)
                os.replace(tmp, path)
                path.with_name(path.name + ".json").write_text(json.dumps(meta, indent=1, sort_keys=True))
                self.stats.downloads += 1
            else:
                payload, meta = cached
                self.stats.cache_hits += 1
        lo, hi = band.wavenumbers
        source = f"{meta['url']} retrieved {meta['retrieved']} coverage={max(lo - self.margin, 0.0):.6f}:{hi + self.margin:.6f}"
        text = payload.decode("ascii", errors="replace")
        try:
            catalogs, errors = parse_par_file(io.StringIO(text), source=source)
        except EmptyCatalog as exc:
            if exc.errors:
                raise
            return LineCatalog(gas, (), source)
        if errors:
            log.warning("%d malformed records in %s", len(errors), path)
        catalog = catalogs.get(gas.molecule_id, LineCatalog(gas, (), source))
        return filter_band(catalog, band, self.margin)


def fetch_lines(gas, band: Band, endpoint=DEFAULT_ENDPOINT, cache_dir=".thzgs-cache", **kwargs) -> LineCatalog:
    """Fetch (or read from cache) the catalog for ``gas`` over ``band`` widened by the margin."""
    return Fetcher(endpoint=endpoint, cache_dir=cache_dir, **kwargs).fetch(gas, band)
