#!/usr/bin/env python3
"""Re-solve exported LP files with HiGHS and compare against a verify report."""

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np
from scipy.optimize import linprog


def parse_terms(tokens):
    terms = []
    for k in range(0, len(tokens), 3):
        sign, coef, name = tokens[k : k + 3]
        terms.append((name, float(coef) * (-1.0 if sign == "-" else 1.0)))
    return terms


def parse_lp(text):
    section = None
    objective, rows, bounds = [], [], {}
    for line in text.splitlines():
        s = line.strip()
        if not s or s.startswith("\\"):
            continue
        if s in ("Minimize", "Subject To", "Bounds", "End"):
            section = s
            continue
        if section == "Minimize":
            tokens = s.split(":", 1)[1].split()
            objective = [] if tokens[0] == "0" else parse_terms(tokens)
        elif section == "Subject To":
            body = s.split(":", 1)[1].split()
            rel, rhs = body[-2], float(body[-1])
            terms = [] if body[0] == "0" else parse_terms(body[:-2])
            rows.append((terms, rel, rhs))
        elif section == "Bounds":
            lo, _, name, _, hi = s.split()
            bounds[name] = (float(lo), float(hi))
    return objective, rows, bounds


def solve_lp(path):
    objective, rows, bounds = parse_lp(Path(path).read_text())
    names = list(bounds)
    col = {n: k for k, n in enumerate(names)}
    c = np.zeros(len(names))
    for n, v in objective:
        c[col[n]] += v
    a_ub, b_ub, a_eq, b_eq = [], [], [], []
    for terms, rel, rhs in rows:
        r = np.zeros(len(names))
        for n, v in terms:
            r[col[n]] += v
        (a_eq if rel == "=" else a_ub).append(r)
        (b_eq if rel == "=" else b_ub).append(rhs)
    res = linprog(
        c,
        A_ub=np.array(a_ub) if a_ub else None,
        b_ub=b_ub or None,
        A_eq=np.array(a_eq) if a_eq else None,
        b_eq=b_eq or None,
        bounds=[bounds[n] for n in names],
        method="highs",
    )
    return res.status, res.fun


def to_float(v):
    return float(v) if not isinstance(v, str) else float(v.replace("inf", "Infinity"))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--report", required=True)
    ap.add_argument("--lp-dir", required=True)
    ap.add_argument("--tol", type=float, default=1e-6)
    args = ap.parse_args()

    report = json.loads(Path(args.report).read_text())
    delta = report["delta"]
    checked = failures = 0
    for r in report["reports"]:
        if r.get("skipped"):
            continue
        tag = f"{r['sample_id']}_d{delta:.6f}"
        for pb in r["pair_bounds"]:
            i, j = pb["pair"]
            for side, sign in (("lower", 1.0), ("upper", -1.0)):
                path = Path(args.lp_dir) / f"{tag}_{i}_{j}_{side}.lp"
                status, fun = solve_lp(path)
                ours = to_float(pb[side])
                checked += 1
                if status == 2:
                    ok = math.isinf(ours)
                else:
                    ok = status == 0 and abs(sign * fun - ours) <= args.tol * (1 + abs(ours))
                if not ok:
                    failures += 1
                    print(f"mismatch {path.name}: highs status {status} value {fun}, ours {ours}")
    print(f"{checked} programs cross-checked, {failures} mismatches")
    return 1 if failures or checked == 0 else 0


if __name__ == "__main__":
    sys.exit(main())
