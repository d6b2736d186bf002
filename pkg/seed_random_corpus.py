#!/usr/bin/env python3
"""
seed_random_corpus.py

Writes a reproducible corpus directory for `lhom_toolkit.py bench`:
- bcsp_XXX.bcsp.json   random binary CSP instances
- cnf_XXX.cnf          random DIMACS formulas
- manifest.csv         one row per file with its generation parameters

The whole corpus is determined by --seed.

Usage examples
--------------
# 1) 20 BCSP instances (n <= 8, domains <= 4) and 5 formulas
python seed_random_corpus.py --out corpus --count 20 --cnf-count 5

# 2) Denser instances, different seed
python seed_random_corpus.py --out corpus2 --count 50 --min-density 0.5 --max-density 0.9 --seed 7
"""

from __future__ import annotations

import argparse
from pathlib import Path
from typing import Any, Dict, List

import numpy as np
import pandas as pd

from lib import config
from lib.formats import write_bcsp, write_cnf
from lib.instances import random_bcsp
from lib.reductions import random_cnf


def build_corpus(
    out: Path,
    count: int,
    n_max: int,
    d_max: int,
    min_density: float,
    max_density: float,
    cnf_count: int,
    cnf_vars: int,
    cnf_clauses: int,
    width: int,
    seed: int,
) -> pd.DataFrame:
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    rows: List[Dict[str, Any]] = []

    for i in range(count):
        n = int(rng.integers(2, n_max + 1))
        d = int(rng.integers(1, d_max + 1))
        density = round(float(rng.uniform(min_density, max_density)), 3)
        inst_seed = int(rng.integers(2**31))
        name = f"bcsp_{i:03d}.bcsp.json"
        write_bcsp(random_bcsp(n, d, density, inst_seed), out / name)
        rows.append({"file": name, "kind": "bcsp", "n": n, "d_max": d, "density": density, "seed": inst_seed})

    for i in range(cnf_count):
        n = int(rng.integers(1, cnf_vars + 1))
        m = int(rng.integers(1, cnf_clauses + 1))
        inst_seed = int(rng.integers(2**31))
        name = f"cnf_{i:03d}.cnf"
        write_cnf(random_cnf(n, m, width, inst_seed), out / name)
        rows.append({"file": name, "kind": "cnf", "n": n, "clauses": m, "width": width, "seed": inst_seed})

    manifest = pd.DataFrame(rows, columns=["file", "kind", "n", "d_max", "density", "clauses", "width", "seed"])
    manifest.to_csv(out / "manifest.csv", index=False)
    return manifest


def main() -> None:
    p = argparse.ArgumentParser()
    p.add_argument("--out", required=True, help="Corpus directory (created when missing).")
    p.add_argument("--count", type=int, default=20, help="Number of BCSP instances.")
    p.add_argument("--n-max", type=int, default=8, help="Max variables per BCSP instance.")
    p.add_argument("--d-max", type=int, default=4, help="Max domain size.")
    p.add_argument("--min-density", type=float, default=0.2)
    p.add_argument("--max-density", type=float, default=0.8)
    p.add_argument("--cnf-count", type=int, default=0, help="Number of DIMACS formulas.")
    p.add_argument("--cnf-vars", type=int, default=6)
    p.add_argument("--cnf-clauses", type=int, default=8)
    p.add_argument("--width", type=int, default=3, help="Max clause width.")
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()

    config.configure_logging()
    if args.count < 0 or args.cnf_count < 0:
        raise SystemExit("--count and --cnf-count must be non-negative")
    if not 0.0 <= args.min_density <= args.max_density <= 1.0:
        raise SystemExit("densities must satisfy 0 <= min <= max <= 1")

    manifest = build_corpus(
        Path(args.out),
        args.count,
        args.n_max,
        args.d_max,
        args.min_density,
        args.max_density,
        args.cnf_count,
        args.cnf_vars,
        args.cnf_clauses,
        args.width,
        args.seed,
    )
    print(f"Wrote {len(manifest)} files to {args.out}")


if __name__ == "__main__":
    main()
