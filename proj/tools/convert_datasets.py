#!/usr/bin/env python3
"""Convert raw benchmark tables into libsvm text files under data/.

Inputs (all public copies of the UCI tables):
  biopsy.csv    Wisconsin breast cancer (R MASS::biopsy), 699 rows, 16 with NA
  pima.dat      Pima Indians diabetes (KEEL), 768 rows
  mushroom.dat  Agaricus/Lepiota mushrooms (KEEL), 5644 complete rows

Outputs:
  breast-cancer  683 x 10, raw labels 2 (benign) / 4 (malignant); the first
                 feature is the sample code number, as in the libsvm copy.
                 Load with --label-map 2:-1,4:+1.
  diabetes       768 x 8, labels +1 (tested_positive) / -1.
  mushrooms      5644 x (one-hot width), labels +1 (poisonous) / -1 (edible).

Usage: convert_datasets.py <raw-dir> <out-dir>
"""
import csv
import os
import sys


def fmt(v):
    return repr(float(v)) if float(v) != int(float(v)) else str(int(float(v)))


def write_rows(path, rows):
    with open(path, "w") as f:
        for label, feats in rows:
            parts = [label] + [f"{i + 1}:{fmt(v)}" for i, v in enumerate(feats) if float(v) != 0.0]
            f.write(" ".join(parts) + "\n")


def breast_cancer(raw, out):
    rows = []
    with open(os.path.join(raw, "biopsy.csv")) as f:
        for rec in csv.DictReader(f):
            feats = [rec["ID"]] + [rec[f"V{k}"] for k in range(1, 10)]
            if any(v in ("NA", "") for v in feats):
                continue
            rows.append(("2" if rec["class"] == "benign" else "4", feats))
    write_rows(os.path.join(out, "breast-cancer"), rows)
    return len(rows)


def diabetes(raw, out):
    rows = []
    with open(os.path.join(raw, "pima.dat")) as f:
        for line in f:
            line = line.strip()
            if not line or line.startswith("@"):
                continue
            *feats, cls = line.split(",")
            rows.append(("+1" if cls.strip() == "tested_positive" else "-1", feats))
    write_rows(os.path.join(out, "diabetes"), rows)
    return len(rows)


def mushrooms(raw, out):
    records = []
    with open(os.path.join(raw, "mushroom.dat")) as f:
        for line in f:
            line = line.strip()
            if not line or line.startswith("@"):
                continue
            records.append(line.split(","))
    width = len(records[0]) - 1
    levels = [sorted({r[c] for r in records}) for c in range(width)]
    offsets, total = [], 0
    for lv in levels:
        offsets.append(total)
        total += len(lv)
    rows = []
    for r in records:
        feats = [0] * total
        for c in range(width):
            feats[offsets[c] + levels[c].index(r[c])] = 1
        rows.append(("+1" if r[-1] == "p" else "-1", feats))
    write_rows(os.path.join(out, "mushrooms"), rows)
    return len(rows), total


if __name__ == "__main__":
    raw, out = sys.argv[1], sys.argv[2]
    os.makedirs(out, exist_ok=True)
    print("breast-cancer", breast_cancer(raw, out))
    print("diabetes", diabetes(raw, out))
    print("mushrooms", mushrooms(raw, out))
