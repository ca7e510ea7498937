#!/usr/bin/env python3
"""Write the Wisconsin breast cancer feature matrix (569 x 30) to data/breast_cancer.csv.

The acceptance suite's real-data criterion is skipped when this file is absent.
"""
import csv
import pathlib
import sys

try:
    from sklearn.datasets import load_breast_cancer
except ImportError:
    sys.exit("scikit-learn is required: pip install scikit-learn")

out = pathlib.Path(__file__).resolve().parent.parent / "data" / "breast_cancer.csv"
out.parent.mkdir(parents=True, exist_ok=True)
data = load_breast_cancer()
with out.open("w", newline="") as f:
    w = csv.writer(f)
    w.writerow(name.replace(" ", "_") for name in data.feature_names)
    for row in data.data:
        w.writerow(f"{v:.17g}" for v in row)
print(f"wrote {data.data.shape[0]} rows to {out}")
