#!/usr/bin/env python3
"""Rebuild UCI-layout data files from copies bundled with common Python packages.

Offline alternative to fetch_data.sh:
  * iris.data, wine.data  <- scikit-learn's bundled CSVs
  * glass.data            <- R MASS::fgl (as shipped in the pydataset resources
                             archive); RI is stored there as (RI - 1.518) * 1000
Soybean-small has no bundled copy; scripts/fetch_data.sh downloads it.
"""
import csv
import os
import sys
import tarfile

import sklearn

OUT = sys.argv[1] if len(sys.argv) > 1 else os.path.join(os.path.dirname(__file__), "..", "data")
SK = os.path.join(os.path.dirname(sklearn.__file__), "datasets", "data")
IRIS_NAMES = ["Iris-setosa", "Iris-versicolor", "Iris-virginica"]
GLASS_TYPES = {"WinF": 1, "WinNF": 2, "Veh": 3, "Con": 5, "Tabl": 6, "Head": 7}


def rows(path):
    with open(path) as fh:
        r = csv.reader(fh)
        next(r)
        return [row for row in r if row]


def iris():
    with open(os.path.join(OUT, "iris.data"), "w") as fh:
        for row in rows(os.path.join(SK, "iris.csv")):
            fh.write(",".join(row[:4] + [IRIS_NAMES[int(row[4])]]) + "\n")


def wine():
    with open(os.path.join(OUT, "wine.data"), "w") as fh:
        for row in rows(os.path.join(SK, "wine_data.csv")):
            fh.write(",".join([str(int(row[13]) + 1)] + row[:13]) + "\n")


def glass(fgl_csv):
    with open(fgl_csv) as src, open(os.path.join(OUT, "glass.data"), "w") as fh:
        r = csv.reader(src)
        next(r)
        for row in r:
            ri = 1.518 + float(row[1]) / 1000.0
            vals = ["%.2f" % float(v) for v in row[2:10]]
            fh.write(",".join([row[0], "%.5f" % ri] + vals + [str(GLASS_TYPES[row[10]])]) + "\n")


if __name__ == "__main__":
    os.makedirs(OUT, exist_ok=True)
    iris()
    wine()
    fgl = os.environ.get("FGL_CSV")
    if fgl is None:
        import pydataset  # noqa: F401  (resources unpacked on first import)
        fgl = os.path.join(os.path.expanduser("~"), ".pydataset", "resources", "rdata", "csv", "MASS", "fgl.csv")
    glass(fgl)
