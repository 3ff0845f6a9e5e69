"""Command-line front end: ``thzgs <verb> [options]``.

Verbs: fetch, spectra, invert, scan, sensitivity, psd, psd-diff, band-score.

Settings come from built-in defaults, then an optional JSON config file
(``--config``), then command-line flags. The resolved configuration is written
into every JSON output and next to every CSV output as ``<name>.config.json``.

Exit codes: 0 success, 1 usage error, 2 network/cache, 3 data format,
4 numerical non-convergence.
"""

import argparse
import csv
import json
import logging
import os
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ParseError, ThzgsError
from .gases import ALL_GASES, FILLER_GAS, STANDARD_PPM, TABLE, GasSpecies, balanced
from .hitran import DEFAULT_ENDPOINT, Band, Fetcher, load_bundled_catalogs

log = logging.getLogger("thzgs")

EXIT_USAGE = 1


class UsageError(ThzgsError):
    exit_code = EXIT_USAGE


class MeasurementFormat(ParseError):
    pass


@dataclass
class RunConfig:
    """Fully explicit run settings; echoed into outputs."""

    gases: list = field(default_factory=lambda: [g.name for g in ALL_GASES])
    ppm: dict = field(default_factory=dict)  # overrides of the standard-atmosphere table
    band: list = field(default_factory=lambda: [1.0, 3.0])
    step_thz: float = 1e-4
    distance: float = 0.05
    distances: list = field(default_factory=lambda: [1.0, 10.0, 100.0])
    noise_model: str = "relative"
    noise_percent: float = 0.0
    runs: int = 200
    seed: int = 0
    levels: list = field(default_factory=lambda: [1.0, 0.1, 0.01, 1e-3, 1e-4, 1e-5, 1e-6])
    full_scan: bool = False
    solve_gases: list = field(default_factory=lambda: [g.name for g in ALL_GASES])
    solver: str = "constrained"
    sweep: list = field(default_factory=list)
    multipliers: list = field(default_factory=lambda: [0.5, 0.8, 1.25, 2.0, 5.0, 10.0])
    include_noise: bool = False
    mode: str = "pure"
    self_broadening: bool = False
    cutoff: float = 25.0
    source: str = "bundled"
    endpoint: str = DEFAULT_ENDPOINT
    cache_dir: str = ".thzgs-cache"
    out: str = "."
    threads: int = 1
    bands: list = field(default_factory=list)

    def mixture_ppm(self):
        ppm = dict(STANDARD_PPM)
        for g, v in self.ppm.items():
            ppm[GasSpecies.parse(g)] = float(v)
        if not any(GasSpecies.parse(g) is FILLER_GAS for g in self.ppm):
            ppm = balanced(ppm, FILLER_GAS)
        return ppm

    def band_obj(self):
        return Band(float(self.band[0]), float(self.band[1]))

    def gas_list(self):
        return [GasSpecies.parse(g) for g in self.gases]

    def to_dict(self):
        # where results land does not change them; keep reports comparable across output dirs
        out = {k: v for k, v in asdict(self).items() if k != "out"}
        out["version"] = __version__
        return out


# Per-verb defaults layered between RunConfig defaults and the config file.
VERB_DEFAULTS = {
    "spectra": {"gases": ["O3", "SO2", "NO2"], "band": [0.5, 1.5], "distance": 1.0},
    "invert": {},
    "scan": {},
    "sensitivity": {"gases": ["O3"], "noise_percent": 1e-3, "sweep": [0.035, 0.07, 0.14]},
    "psd": {"gases": ["O3", "N2O", "CH3OH"]},
    "psd-diff": {"gases": ["O3"], "band": [0.8, 0.9], "distance": 100.0},
    "band-score": {"gases": ["O3"], "bands": [[0.59, 0.69], [6.0, 8.0]], "distance": 1.0},
    "fetch": {},
}


def load_config_file(path):
    try:
        data = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise UsageError(f"config file {path} not found") from None
    except json.JSONDecodeError as exc:
        raise MeasurementFormat(f"config file {path}: {exc}") from None
    if not isinstance(data, dict):
        raise MeasurementFormat(f"config file {path} must hold a JSON object")
    known = {f.name for f in fields(RunConfig)}
    unknown = set(data) - known
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return data


def resolve_config(verb, args):
    """defaults < verb defaults < config file < flags."""
    values = asdict(RunConfig())
    values.update(VERB_DEFAULTS.get(verb, {}))
    if getattr(args, "config", None):
        values.update(load_config_file(args.config))
    env_cache = os.environ.get("THZGS_CACHE_DIR")
    if env_cache and not (getattr(args, "config", None) and "cache_dir" in load_config_file(args.config)):
        values["cache_dir"] = env_cache
    for f in fields(RunConfig):
        v = getattr(args, f.name, None)
        if v is None:
            continue
        if f.name == "ppm":
            v = {**values.get("ppm", {}), **dict(v)}
        values[f.name] = v
    if getattr(args, "paper_scale", False):
        values["runs"] = 1000
    cfg = RunConfig(**values)
    try:
        cfg.gas_list()
        [GasSpecies.parse(g) for g in cfg.solve_gases]
        cfg.mixture_ppm()
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return cfg


# ---------------------------------------------------------------- argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _band(text):
    try:
        b = Band.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    return [b.f_low, b.f_high]


def _csv_list(conv):
    def parse(text):
        try:
            return [conv(t) for t in text.split(",") if t.strip()]
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from None
    return parse


def _gas_names(text):
    try:
        return [GasSpecies.parse(t).name for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _ppm_pair(text):
    gas, _, value = text.partition("=")
    try:
        return GasSpecies.parse(gas).name, float(value)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected GAS=PPM, got {text!r}") from exc


def _band_list(text):
    return [_band(t) for t in text.split(",") if t.strip()]


def build_parser():
    parser = _Parser(prog="thzgs", description="THz gas sensing toolkit.")
    parser.add_argument("--version", action="version", version=f"thzgs {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--out", help="output file or directory")
        p.add_argument("--threads", type=int)
        p.add_argument("--gases", type=_gas_names, help="comma-separated gas names")
        p.add_argument("--band", type=_band, help="frequency band in THz, e.g. 1-3")
        p.add_argument("--step-thz", dest="step_thz", type=float)
        p.add_argument("--distance", type=float, help="path length in metres")
        p.add_argument("--cutoff", type=float, help="line-wing cutoff in cm^-1")
        p.add_argument("--self-broadening", dest="self_broadening", action="store_const", const=True)
        p.add_argument("--source", choices=("bundled", "hitran"))
        p.add_argument("--endpoint")
        p.add_argument("--cache-dir", dest="cache_dir")
        p.add_argument("--ppm", type=_ppm_pair, action="append", help="GAS=PPM override (repeatable)")
        return p

    def monte_carlo(p):
        p.add_argument("--runs", type=int)
        p.add_argument("--paper-scale", action="store_true", help="1000 runs per point")
        p.add_argument("--seed", type=int)
        p.add_argument("--noise-model", dest="noise_model", choices=("relative", "band-max"))
        p.add_argument("--solve-gases", dest="solve_gases", type=_gas_names)
        p.add_argument("--solver", choices=("constrained", "unconstrained"))

    common(sub.add_parser("fetch", help="populate the line cache from HITRAN"))

    p = common(sub.add_parser("spectra", help="absorption loss per gas (CSV)"))
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--pure", dest="mode", action="store_const", const="pure")
    mode.add_argument("--in-air", dest="mode", action="store_const", const="in-air")

    p = common(sub.add_parser("invert", help="estimate concentrations from a loss spectrum"))
    monte_carlo(p)
    p.add_argument("--measurement", help="CSV with frequency_thz,loss_db")
    p.add_argument("--synthetic", action="store_true", help="simulate the measurement from the mixture")
    p.add_argument("--noise", dest="noise_percent", type=float, help="noise level in percent")

    p = common(sub.add_parser("scan", help="detection threshold per gas over noise decades"))
    monte_carlo(p)
    p.add_argument("--levels", type=_csv_list(float), help="noise levels in percent, decreasing")
    p.add_argument("--full-scan", dest="full_scan", action="store_const", const=True)

    p = common(sub.add_parser("sensitivity", help="Monte Carlo sensitivity curve"))
    monte_carlo(p)
    p.add_argument("--sweep", type=_csv_list(float), help="true concentrations in ppm")
    p.add_argument("--noise", dest="noise_percent", type=float)

    p = common(sub.add_parser("psd", help="received PSD with and without H2O"))
    p.add_argument("--distances", type=_csv_list(float))
    p.add_argument("--include-noise", dest="include_noise", action="store_const", const=True)

    p = common(sub.add_parser("psd-diff", help="PSD change for scaled gas concentrations"))
    p.add_argument("--multipliers", type=_csv_list(float))
    p.add_argument("--include-noise", dest="include_noise", action="store_const", const=True)

    p = common(sub.add_parser("band-score", help="rank candidate bands for a target gas"))
    p.add_argument("--bands", type=_band_list, help="comma-separated bands, e.g. 0.59-0.69,6-8")
    return parser


# ---------------------------------------------------------------- helpers


def _catalogs(cfg: RunConfig, gases, band=None):
    gases = list(dict.fromkeys(GasSpecies.parse(g) for g in gases))
    if cfg.source == "bundled":
        return load_bundled_catalogs(gases)
    fetcher = Fetcher(endpoint=cfg.endpoint, cache_dir=Path(cfg.cache_dir), margin=cfg.cutoff)
    band = band or cfg.band_obj()
    return {g: fetcher.fetch(g, band) for g in gases}


def _options(cfg: RunConfig):
    from .spectra import SpectraOptions

    return SpectraOptions(cutoff=cfg.cutoff, self_broadening=cfg.self_broadening, threads=max(1, cfg.threads))


def _out_path(cfg: RunConfig, default_name):
    out = Path(cfg.out)
    if out.suffix:
        out.parent.mkdir(parents=True, exist_ok=True)
        return out
    out.mkdir(parents=True, exist_ok=True)
    return out / default_name


def _out_dir(cfg: RunConfig):
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_sidecar(path: Path, cfg: RunConfig, extra=None):
    data = {"config": cfg.to_dict()}
    if extra:
        data.update(extra)
    path.with_name(path.name + ".config.json").write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def _dump(path: Path, data):
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def _mc_config(cfg: RunConfig, band=None, noise=None):
    from .detect import MonteCarloConfig

    return MonteCarloConfig(
        runs=cfg.runs, noise_level_percent=cfg.noise_percent if noise is None else noise,
        band=band or cfg.band_obj(), distance=cfg.distance,
        gases=tuple(GasSpecies.parse(g) for g in cfg.solve_gases), master_seed=cfg.seed,
        noise_model=cfg.noise_model, step_thz=cfg.step_thz, cutoff=cfg.cutoff, solver=cfg.solver,
        threads=max(1, cfg.threads),
    )


# ---------------------------------------------------------------- verbs


def cmd_fetch(cfg: RunConfig):
    fetcher = Fetcher(endpoint=cfg.endpoint, cache_dir=Path(cfg.cache_dir), margin=cfg.cutoff)
    band = cfg.band_obj()
    counts = {}
    for gas in cfg.gas_list():
        counts[gas.name] = len(fetcher.fetch(gas, band))
    s = fetcher.stats
    print(f"{s.downloads} downloads, {s.cache_hits} cache hits, {s.refetches} refetches")
    for name, n in counts.items():
        print(f"  {name}: {n} lines")
    return 0


def cmd_spectra(cfg: RunConfig):
    from .spectra import FrequencyGrid, GasMixture, absorption_coefficient, absorption_loss_db

    band = cfg.band_obj()
    grid = FrequencyGrid.with_step(band, cfg.step_thz)
    ppm = cfg.mixture_ppm()
    gases = cfg.gas_list()
    options = _options(cfg)
    mix_gases = list(ppm) if cfg.mode == "in-air" else gases
    catalogs = _catalogs(cfg, mix_gases, band)
    columns, names = [], []
    for gas in gases:
        mix = GasMixture({gas: ppm[gas]})
        columns.append(absorption_loss_db(absorption_coefficient(catalogs, mix, grid, options), cfg.distance))
        names.append(f"{gas.name}_loss_db")
    if cfg.mode == "in-air":
        total = absorption_coefficient(catalogs, GasMixture(ppm), grid, options)
        columns.append(absorption_loss_db(total, cfg.distance))
        names.append("total_loss_db")
    path = _out_path(cfg, "spectra.csv")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["frequency_thz"] + names)
        for i, f in enumerate(grid.values):
            writer.writerow([f"{f:.17g}"] + [f"{c[i]:.17g}" for c in columns])
    peaks = {n: float(np.max(c)) for n, c in zip(names, columns)}
    _write_sidecar(path, cfg, {"peak_loss_db": peaks})
    for n, v in peaks.items():
        print(f"{n}: peak {v:.6g} dB")
    return 0


def read_measurement(path):
    """Read ``frequency_thz,loss_db`` rows into (grid, values); errors name the row and column."""
    from .spectra import FrequencyGrid

    freqs, values = [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:2]] != ["frequency_thz", "loss_db"]:
            raise MeasurementFormat(f"{path}: row 1: expected header frequency_thz,loss_db, got {header}")
        for row_no, row in enumerate(reader, start=2):
            if not row or not "".join(row).strip():
                continue
            if len(row) < 2:
                raise MeasurementFormat(f"{path}: row {row_no}: expected 2 columns, got {len(row)}")
            for col, text in enumerate(row[:2], start=1):
                try:
                    v = float(text)
                except ValueError:
                    raise MeasurementFormat(f"{path}: row {row_no}, column {col}: not a number: {text!r}") from None
                if not np.isfinite(v):
                    raise MeasurementFormat(f"{path}: row {row_no}, column {col}: not finite: {text!r}")
            freqs.append(float(row[0]))
            values.append(float(row[1]))
    if len(freqs) < 2:
        raise MeasurementFormat(f"{path}: need at least two data rows")
    f = np.array(freqs)
    step = np.diff(f)
    if np.any(step <= 0) or np.max(np.abs(step - step.mean())) > 1e-6 * abs(step.mean()) + 1e-12:
        raise MeasurementFormat(f"{path}: frequencies must be uniformly spaced and increasing")
    try:
        grid = FrequencyGrid(Band(f[0], f[-1]), len(f))
    except ValueError as exc:
        raise MeasurementFormat(f"{path}: {exc}") from None
    return grid, np.array(values)


def cmd_invert(cfg: RunConfig, measurement=None, synthetic=False):
    import warnings

    from .detect import run_seed
    from .inversion import (
        ConstrainedSolver, UnconstrainedSolver, ZeroColumnWarning, build_design_matrix, simulate_measurement)
    from .spectra import FrequencyGrid

    solve_gases = [GasSpecies.parse(g) for g in cfg.solve_gases]
    if measurement:
        grid, y = read_measurement(measurement)
        seed = None
    elif synthetic:
        grid = FrequencyGrid.with_step(cfg.band_obj(), cfg.step_thz)
        seed = run_seed(cfg.seed, 0)
    else:
        raise UsageError("invert needs --measurement FILE or --synthetic")
    catalogs = _catalogs(cfg, solve_gases, grid.band)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", ZeroColumnWarning)
        design = build_design_matrix(solve_gases, grid, cfg.distance, catalogs, _options(cfg))
    for w in caught:
        log.warning("%s", w.message)
    truth = None
    if synthetic:
        truth = cfg.mixture_ppm()
        y = simulate_measurement(design, truth, cfg.noise_percent, seed, cfg.noise_model)
    solver = ConstrainedSolver(design) if cfg.solver == "constrained" else UnconstrainedSolver(design)
    result = solver.solve(y, seed=seed)
    data = {"result": result.to_dict(), "config": cfg.to_dict(),
            "unidentifiable": [g.name for g in result.unidentifiable]}
    if truth is not None:
        data["truth_ppm"] = {g.name: truth.get(g, 0.0) for g in design.gases}
    path = _out_path(cfg, "estimate.json")
    _dump(path, data)
    for g, v in result.estimates.items():
        print(f"{g.name:6s} {'unidentifiable' if v is None else f'{v:.9g} ppm'}")
    print(f"residual {result.residual_norm:.3g} dB, KKT {result.kkt_residual:.3g}, converged {result.converged}")
    if not result.converged:
        from .errors import MaxIterations

        raise MaxIterations(f"solver did not converge (KKT residual {result.kkt_residual:.3g})")
    return 0


def cmd_scan(cfg: RunConfig, band_given=False):
    from .detect import detectability_scan, write_reports_csv

    reports = []
    out = _out_dir(cfg)
    for gas in cfg.gas_list():
        band = cfg.band_obj() if band_given else Band(*TABLE[gas].band_thz)
        rep = detectability_scan(gas, _mc_config(cfg, band), cfg.levels, cfg.mixture_ppm(), cfg.full_scan)
        reports.append(rep)
        data = rep.to_dict()
        data["config_run"] = cfg.to_dict()
        (out / f"scan_{gas.name}.json").write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
        thr = "not detected" if rep.threshold is None else f"{rep.threshold:g} %"
        print(f"{gas.name:6s} {band.label():>10s} THz  threshold {thr}")
    with open(out / "scan.csv", "w", newline="") as fh:
        write_reports_csv(reports, fh)
    _write_sidecar(out / "scan.csv", cfg)
    return 0


def cmd_sensitivity(cfg: RunConfig):
    from .detect import sensitivity_curve

    gas = cfg.gas_list()[0]
    sweep = cfg.sweep or [STANDARD_PPM[gas]]
    curve = sensitivity_curve(gas, sweep, _mc_config(cfg), cfg.mixture_ppm())
    out = _out_dir(cfg)
    data = curve.to_dict()
    data["config_run"] = cfg.to_dict()
    _dump(out / f"sensitivity_{gas.name}.json", data)
    with open(out / f"sensitivity_{gas.name}.csv", "w", newline="") as fh:
        curve.to_csv(fh)
    _write_sidecar(out / f"sensitivity_{gas.name}.csv", cfg)
    for t, m, lo, hi in zip(curve.true_concentrations, curve.predicted_mean, curve.lcl, curve.ucl):
        print(f"{gas.name} true {t:g} ppm  mean {m:.6g}  95% CI [{lo:.6g}, {hi:.6g}]")
    return 0


def cmd_psd(cfg: RunConfig, band_given=False):
    from .channel import PSD_BANDS, ChirpPulse, received_psd
    from .spectra import FrequencyGrid, GasMixture, absorption_coefficient

    out = _out_dir(cfg)
    ppm = cfg.mixture_ppm()
    options = _options(cfg)
    summary = []
    for gas in cfg.gas_list():
        band = cfg.band_obj() if band_given else PSD_BANDS.get(gas, cfg.band_obj())
        grid = FrequencyGrid.with_step(band, cfg.step_thz)
        catalogs = _catalogs(cfg, [gas, GasSpecies.H2O], band)
        pulse = ChirpPulse.for_band(band)
        for d in cfg.distances:
            for with_h2o in (False, True):
                mix = {gas: ppm[gas]}
                if with_h2o:
                    mix[GasSpecies.H2O] = ppm[GasSpecies.H2O]
                spectrum = absorption_coefficient(catalogs, GasMixture(mix), grid, options)
                curve = received_psd(pulse, spectrum, d, cfg.include_noise)
                name = f"psd_{gas.name}_{d:g}m_{'with' if with_h2o else 'without'}_h2o.csv"
                with open(out / name, "w", newline="") as fh:
                    curve.to_csv(fh)
                _write_sidecar(out / name, cfg, {"gas": gas.name, "distance_m": d, "with_h2o": with_h2o,
                                                 "band_thz": [band.f_low, band.f_high]})
                summary.append((name, float(curve.values.max())))
    for name, peak in summary:
        print(f"{name}: peak {peak:.6g} dBr")
    return 0


def cmd_psd_diff(cfg: RunConfig):
    from .channel import find_peak_difference, psd_difference, write_delta_csv
    from .spectra import GasMixture

    gas = cfg.gas_list()[0]
    band = cfg.band_obj()
    base = GasMixture(cfg.mixture_ppm())
    catalogs = _catalogs(cfg, list(base.mixing_ratios), band)
    deltas = psd_difference(gas, cfg.multipliers, band, cfg.distance, base, catalogs,
                            include_noise=cfg.include_noise, step_thz=cfg.step_thz, options=_options(cfg),
                            threads=max(1, cfg.threads))
    f_peak, mag = find_peak_difference(deltas)
    path = _out_path(cfg, f"psd_diff_{gas.name}.csv")
    with open(path, "w", newline="") as fh:
        write_delta_csv(deltas, fh)
    _write_sidecar(path, cfg, {"peak_frequency_thz": f_peak, "peak_abs_delta_db": mag})
    print(f"peak |delta| {mag:.6g} dB at {f_peak:.6f} THz")
    return 0


def cmd_band_score(cfg: RunConfig):
    from .channel import band_score

    target = cfg.gas_list()[0]
    bands = [Band(float(a), float(b)) for a, b in (cfg.bands or [cfg.band])]
    catalogs = _catalogs(cfg, [target, GasSpecies.H2O], None) if cfg.source == "bundled" else None
    if catalogs is None:
        lo = min(b.f_low for b in bands)
        hi = max(b.f_high for b in bands)
        catalogs = _catalogs(cfg, [target, GasSpecies.H2O], Band(lo, hi))
    ranked = band_score(target, bands, cfg.distance, catalogs, cfg.step_thz, _options(cfg))
    path = _out_path(cfg, f"band_score_{target.name}.csv")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["rank", "f_low_thz", "f_high_thz", "target_mean_db_per_ppm", "h2o_mean_db_per_ppm",
                         "score"])
        for i, s in enumerate(ranked, start=1):
            writer.writerow([i, f"{s.band.f_low:.17g}", f"{s.band.f_high:.17g}", f"{s.target_mean:.17g}",
                             f"{s.h2o_mean:.17g}", f"{s.score:.17g}"])
    _write_sidecar(path, cfg)
    for i, s in enumerate(ranked, start=1):
        print(f"{i}. {s.band.label()} THz  score {s.score:.6g}")
    return 0


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args.verb, args)
        if args.verb == "fetch":
            return cmd_fetch(cfg)
        if args.verb == "spectra":
            return cmd_spectra(cfg)
        if args.verb == "invert":
            return cmd_invert(cfg, args.measurement, args.synthetic)
        if args.verb == "scan":
            return cmd_scan(cfg, band_given=args.band is not None or _file_has(args, "band"))
        if args.verb == "sensitivity":
            return cmd_sensitivity(cfg)
        if args.verb == "psd":
            return cmd_psd(cfg, band_given=args.band is not None or _file_has(args, "band"))
        if args.verb == "psd-diff":
            return cmd_psd_diff(cfg)
        if args.verb == "band-score":
            return cmd_band_score(cfg)
    except ThzgsError as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        return exc.exit_code
    except (ValueError, KeyError) as exc:
        log.error("%s", exc)
        return EXIT_USAGE
    return EXIT_USAGE


def _file_has(args, key):
    return bool(args.config) and key in load_config_file(args.config)


if __name__ == "__main__":
    sys.exit(main())
