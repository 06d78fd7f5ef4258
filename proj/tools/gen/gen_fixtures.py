#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
"""Writes the shared metric and loss fixtures used by both implementations.

Values are computed here independently of the C++ code; the arithmetic order
follows the documented formulas so results are bit-identical.
"""
import json
import math
import sys


def metrics(cm):
    k = len(cm)
    total = sum(sum(r) for r in cm)
    diag = sum(cm[i][i] for i in range(k))
    near = sum(cm[i][j] for i in range(k) for j in range(max(0, i - 1), min(k, i + 2)))
    recall, precision, warnings = [], [], []
    rs = ps = 0.0
    rn = pn = 0
    for c in range(k):
        correct = float(sum(cm[c][j] for j in range(max(0, c - 1), min(k, c + 2))))
        n_c = float(sum(cm[c]))
        predicted = sum(cm[i][j] for i in range(k) for j in range(max(0, c - 1), min(k, c + 2)))
        if n_c > 0:
            recall.append(correct / n_c)
            rs += recall[-1]
            rn += 1
        else:
            recall.append(None)
            warnings.append(f"class {c + 1} has no true samples; excluded from mean recall")
        if predicted > 0:
            precision.append(correct / float(predicted))
            ps += precision[-1]
            pn += 1
        else:
            precision.append(None)
            warnings.append(f"class {c + 1} has no predictions nearby; excluded from mean precision")
    mr = rs / rn if rn else 0.0
    mp = ps / pn if pn else 0.0
    f1 = 2.0 * mr * mp / (mr + mp) if mr + mp > 0 else 0.0
    return {
        "num_classes": k,
        "n": total,
        "acc": diag / total,
        "acc_pm1": near / total,
        "mean_recall_pm1": mr,
        "mean_precision_pm1": mp,
        "f1_pm1": f1,
        "recall_pm1": recall,
        "precision_pm1": precision,
        "confusion": cm,
        "warnings": warnings,
    }


def tridiagonal(k):
    return [[1 if abs(i - j) <= 1 else 0 for j in range(k)] for i in range(k)]


METRIC_CASES = [
    ("three_class_hand", [[2, 1, 0], [0, 1, 1], [1, 0, 2]]),
    ("diagonal", [[5 if i == j else 0 for j in range(7)] for i in range(7)]),
    ("tridiagonal_7", tridiagonal(7)),
    ("empty_class", [[4, 0, 0, 0, 0], [0, 0, 0, 0, 0], [0, 0, 0, 0, 0], [0, 0, 0, 0, 0], [0, 0, 0, 0, 3]]),
    ("mixed_7", [[30, 5, 1, 0, 0, 0, 0], [4, 22, 6, 0, 1, 0, 0], [0, 7, 19, 8, 0, 0, 0],
                 [0, 0, 9, 20, 5, 2, 0], [0, 1, 0, 6, 25, 4, 0], [0, 0, 0, 3, 8, 21, 4],
                 [2, 0, 0, 0, 0, 5, 28]]),
]


def clamp(x):
    return min(max(x, 1e-12), 1.0)


def loss(kind, c, p):
    k = len(p)
    nb = [j for j in (c - 1, c, c + 1) if 1 <= j <= k]
    cre = -math.log(clamp(p[c - 1]))
    a = max(range(k), key=lambda i: (p[i], -i)) + 1
    w = abs(c - a)
    if kind == "cre":
        return cre
    if kind == "cdw1":
        return (w / (k - 1) + 1.0) * cre
    if kind == "cdw2":
        return math.exp(w) * cre
    if kind == "cdf":
        t = [1.0 if i + 1 == c else 0.0 for i in range(k)]
        s = ct = cp = 0.0
        for i in range(k):
            ct += t[i]
            cp += p[i]
            s += (ct - cp) ** 2
        return s
    if kind == "pom1a":
        return -math.log(clamp(sum(p[j - 1] for j in nb)))
    if kind == "pom1b":
        return -sum(math.log(clamp(p[j - 1])) for j in nb)
    raise ValueError(kind)


LOSS_PS = [
    [1 / 7] * 7,
    [0.1, 0.1, 0.4, 0.1, 0.1, 0.1, 0.1],
    [0.0, 0.0, 1 / 3, 1 / 3, 1 / 3, 0.0, 0.0],
    [0.05, 0.6, 0.2, 0.05, 0.04, 0.03, 0.03],
    [0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
]


def main(out_dir):
    cases = [{"name": n, "confusion": cm, "expected": metrics(cm)} for n, cm in METRIC_CASES]
    with open(f"{out_dir}/metrics_cases.json", "w") as f:
        json.dump({"version": 1, "cases": cases}, f, indent=1)
        f.write("\n")
    lcases = []
    for p in LOSS_PS:
        for c in (1, 4, 7):
            for kind in ("cre", "cdw1", "cdw2", "cdf", "pom1a", "pom1b"):
                lcases.append({"kind": kind, "target": c, "p": p, "expected": loss(kind, c, p)})
    with open(f"{out_dir}/loss_cases.json", "w") as f:
        json.dump({"version": 1, "tolerance": 1e-9, "cases": lcases}, f, indent=1)
        f.write("\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "tests/fixtures")
