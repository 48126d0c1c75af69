#!/usr/bin/env python3
"""Regenerates the bundled datasets in data/ with the marsmc binary.

usage: tools/make_data.py path/to/marsmc
"""
import csv
import subprocess
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
DATA = ROOT / "data"


def simulate(binary, config, workdir):
    out = Path(workdir) / Path(config).stem
    subprocess.run([binary, "simulate", "-c", str(config), "-s", f"output_dir={out}"], check=True)
    with open(out / "simulated.csv", newline="") as f:
        rows = list(csv.reader(f))
    return rows[0], [[float(v) for v in row] for row in rows[1:]]


def months(start_year, start_month, count):
    y, m = start_year, start_month
    for _ in range(count):
        yield f"{y:04d}-{m:02d}"
        m += 1
        if m > 12:
            y, m = y + 1, 1


def write(path, header, rows):
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def main():
    binary = sys.argv[1] if len(sys.argv) > 1 else str(ROOT / "build" / "tools" / "marsmc")
    with tempfile.TemporaryDirectory() as tmp:
        # Noise process plus cubic trends, sampled monthly from 2014-07 (116 months).
        _, values = simulate(binary, DATA / "configs" / "esg_brent_sim.json", tmp)
        T = len(values)
        trends = [
            lambda tau: 105.0 + 38.0 * tau - 61.0 * tau**2 + 35.0 * tau**3,
            lambda tau: 78.0 - 95.0 * tau + 120.0 * tau**2 - 22.0 * tau**3,
        ]
        rows = []
        for t, (date, y) in enumerate(zip(months(2014, 7, T), values)):
            tau = t / (T - 1)
            rows.append([date] + [f"{y[i] + trends[i](tau):.4f}" for i in range(2)])
        write(DATA / "esg_brent_sim.csv", ["date", "esg", "brent"], rows)

        header, values = simulate(binary, DATA / "configs" / "table2_cauchy.json", tmp)
        write(DATA / "table2_cauchy.csv", header, [[f"{v:.10g}" for v in row] for row in values])


if __name__ == "__main__":
    main()
