"""Convert raw UCI downloads into the CSV layout expected by data/manifest.toml.

    python scripts/prepare_uci.py --airfoil airfoil_self_noise.dat \
        --wine winequality-red.csv --abalone abalone.data --out data/

Only local files are read; nothing is downloaded.
"""

import argparse
import csv
from pathlib import Path

AIRFOIL = ["frequency", "angle_of_attack", "chord_length", "free_stream_velocity", "displacement_thickness", "sound_pressure"]
ABALONE = ["sex", "length", "diameter", "height", "whole_weight", "shucked_weight", "viscera_weight", "shell_weight", "rings"]


def _write(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    print(f"{path}: {len(rows)} rows")


def airfoil(src, out):
    rows = [line.split() for line in Path(src).read_text().splitlines() if line.strip()]
    _write(out / "airfoil.csv", AIRFOIL, rows)


def wine(src, out):
    with open(src, newline="") as fh:
        reader = csv.reader(fh, delimiter=";")
        header = [h.strip().replace(" ", "_") for h in next(reader)]
        rows = [r for r in reader if r]
    _write(out / "winequality-red.csv", header, rows)


def abalone(src, out):
    with open(src, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    _write(out / "abalone.csv", ABALONE, rows)


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--airfoil")
    ap.add_argument("--wine")
    ap.add_argument("--abalone")
    ap.add_argument("--out", default="data")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for fn, src in ((airfoil, args.airfoil), (wine, args.wine), (abalone, args.abalone)):
        if src:
            fn(src, out)


if __name__ == "__main__":
    main()
