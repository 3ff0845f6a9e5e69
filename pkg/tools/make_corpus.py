#!/usr/bin/env python
"""Regenerate the bundled line catalogs (src/thzgs/data/lines).

Usage:
    python tools/make_corpus.py [--gas O3 ...] [--astroquery-wheel W] [--exojax-par P]

The optional reference arguments copy real HITRAN-format records into
src/thzgs/data/reference for the parser round-trip tests.
"""

import argparse
import gzip
import io
import json
import logging
import zipfile
from pathlib import Path

from thzgs import corpus
from thzgs.gases import GasSpecies
from thzgs.hitran import bundled_path, write_par

ROOT = Path(__file__).resolve().parents[1]
LINES = ROOT / "src" / "thzgs" / "data" / "lines"
REFERENCE = ROOT / "src" / "thzgs" / "data" / "reference"

log = logging.getLogger("make_corpus")


def deterministic_gzip(data: bytes) -> bytes:
    buf = io.BytesIO()
    with gzip.GzipFile(fileobj=buf, mode="wb", mtime=0, filename="") as fh:
        fh.write(data)
    return buf.getvalue()


def model_summary(model):
    out = {"model": type(model).__name__}
    for key, value in vars(model).items():
        if isinstance(value, (int, float)):
            out[key] = value
    return out


def build(gases):
    LINES.mkdir(parents=True, exist_ok=True)
    manifest_path = LINES / "MANIFEST.json"
    manifest = json.loads(manifest_path.read_text()) if manifest_path.exists() else {"gases": {}}
    manifest["generator"] = corpus.GENERATOR_VERSION
    manifest["note"] = (
        "Synthetic rotor-model catalogs in HITRAN 160-character format; "
        "intensities at 296 K in cm/molecule, abundance-weighted main isotopologue only."
    )
    for gas in gases:
        catalog = corpus.build_catalog(gas)
        text = io.StringIO()
        write_par(catalog.lines, text)
        payload = text.getvalue().encode("ascii")
        path = LINES / bundled_path(gas).name
        path.write_bytes(deterministic_gzip(payload))
        model = corpus.MODELS[gas]
        q = model.partition_function() if hasattr(model, "partition_function") else getattr(model, "q_total", None)
        manifest["gases"][gas.name] = {
            "file": path.name,
            "lines": len(catalog),
            "coverage_cm1": [0.0, corpus.NU_MAX],
            "partition_function_296K": round(float(q), 3) if q else None,
            "broadening": list(corpus.BROADENING[gas]),
            "parameters": model_summary(model),
        }
        log.info("%s: %d lines -> %s (%d bytes)", gas.name, len(catalog), path.name, path.stat().st_size)
    manifest_path.write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")


def copy_references(astroquery_wheel=None, exojax_par=None):
    REFERENCE.mkdir(parents=True, exist_ok=True)
    if astroquery_wheel:
        with zipfile.ZipFile(astroquery_wheel) as zf:
            data = zf.read("astroquery/hitran/tests/data/H2O.data")
        (REFERENCE / "hitran_h2o_astroquery.par").write_bytes(data)
    if exojax_par:
        data = Path(exojax_par).read_bytes()
        (REFERENCE / "hitemp_co_exojax.par.gz").write_bytes(deterministic_gzip(data))


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--gas", action="append", help="gas name (repeatable); default all")
    parser.add_argument("--astroquery-wheel")
    parser.add_argument("--exojax-par")
    parser.add_argument("--skip-lines", action="store_true")
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    gases = [GasSpecies.parse(g) for g in args.gas] if args.gas else list(GasSpecies)
    if not args.skip_lines:
        build(gases)
    copy_references(args.astroquery_wheel, args.exojax_par)


if __name__ == "__main__":
    main()
