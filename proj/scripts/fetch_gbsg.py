#!/usr/bin/env python3
"""Build data/gbsg_er_tamoxifen.csv from the public GBSG2 breast cancer data.

The 686-patient German Breast Cancer Study Group data ships with several
open-source survival packages; this script pulls the copy bundled in the
`lifelines` wheel (MIT licensed) and keeps patients who received tamoxifen
and have a positive oestrogen receptor count (220 rows).

Usage: scripts/fetch_gbsg.py [output.csv]
"""
import csv
import io
import pathlib
import subprocess
import sys
import tempfile
import zipfile


def main() -> int:
    out = pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else "data/gbsg_er_tamoxifen.csv")
    with tempfile.TemporaryDirectory() as tmp:
        subprocess.run(
            [sys.executable, "-m", "pip", "download", "lifelines==0.30.0", "--no-deps", "-q", "-d", tmp],
            check=True,
        )
        wheel = next(pathlib.Path(tmp).glob("lifelines-*.whl"))
        with zipfile.ZipFile(wheel) as z:
            raw = z.read("lifelines/datasets/gbsg2.csv").decode("utf-8")

    rows = list(csv.DictReader(io.StringIO(raw)))
    grade = {"I": "1", "II": "2", "III": "3"}
    out.parent.mkdir(parents=True, exist_ok=True)
    kept = 0
    with out.open("w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["id", "age", "size", "nodes", "meno", "grade", "time", "event"])
        for i, r in enumerate(rows, start=1):
            if r["horTh"] != "yes" or float(r["estrec"]) <= 0:
                continue
            w.writerow([i, r["age"], r["tsize"], r["pnodes"], r["menostat"].lower(),
                        grade[r["tgrade"]], r["time"], r["cens"]])
            kept += 1
    print(f"wrote {kept} rows to {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
