#!/usr/bin/env python3
"""Mixed-precision error study: label >=500 conformers in f32 and f64,
then report the MAEs (reference points: 6 meV energy / 0.2 meV gap).

Usage: python scripts/run_precision_study.py --out-dir study/ [--workers N]
"""

import argparse
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "tests"))


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--out-dir", required=True)
    ap.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    ap.add_argument("--n-conf", type=int, default=20)
    ap.add_argument("--conv-std", type=float, default=1e-5)
    ap.add_argument("--grid-level", type=int, default=1)
    args = ap.parse_args()

    from deskdft.molio import load_manifest
    from deskdft.pipeline import compare_precision, run
    from deskdft.scf import SCFOptions
    from suites import SMILES_9_11, write_conformer_suite

    suite_dir = os.path.join(args.out_dir, "suite")
    man_path = os.path.join(suite_dir, "manifest.jsonl")
    if not os.path.exists(man_path):
        man_path = write_conformer_suite(suite_dir, SMILES_9_11, n_conf=args.n_conf,
                                         seed=2024)
    manifest = load_manifest(man_path)
    print(f"{len(manifest.entries)} conformers")

    recs = {}
    for precision in ("f64", "f32"):
        opts = SCFOptions(precision=precision, convergence_std=args.conv_std,
                          max_iterations=50, grid_level=args.grid_level)
        out = os.path.join(args.out_dir, f"labels_{precision}.jsonl")
        recs[precision] = run(manifest, opts, args.workers, out, resume=True)
        n_conv = sum(r.converged for r in recs[precision])
        print(f"{precision}: {n_conv}/{len(recs[precision])} converged")

    rep = compare_precision(recs["f32"], recs["f64"])
    report_path = os.path.join(args.out_dir, "precision_report.json")
    with open(report_path, "w", encoding="utf-8") as fh:
        fh.write(rep.to_json() + "\n")
    print(f"n={rep.n_molecules}  MAE energy {rep.mae_energy_mev:.3f} meV  "
          f"MAE gap {rep.mae_gap_mev:.4f} meV  -> {report_path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
