#!/usr/bin/env python3
"""Produce tests/data/oracle_reference.json with an external reference package.

Requires pyscf (not installable from this repo's sandbox mirror; run on any
machine with `pip install pyscf`). Settings are matched to the engine's
oracle-equivalence test: B3LYP with the RPA-fit VWN (pyscf functional
'b3lypg'), tight convergence, a dense grid, Cartesian AOs, STO-3G.

Usage: python scripts/make_oracle_reference.py [--suite-dir DIR] [--out PATH]
"""

import argparse
import json
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "tests"))

HARTREE_TO_EV = 27.211386


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--suite-dir", default=os.path.join("tests", "data", "oracle_suite"))
    ap.add_argument("--out", default=os.path.join("tests", "data", "oracle_reference.json"))
    ap.add_argument("--grid-level", type=int, default=3,
                    help="engine grid level recorded in the reference file")
    ap.add_argument("--pyscf-grid-level", type=int, default=6)
    args = ap.parse_args()

    try:
        from pyscf import dft, gto
    except ImportError:
        print("pyscf is required (pip install pyscf); it is not available from "
              "the build sandbox's package mirror.", file=sys.stderr)
        return 2

    from suites import write_oracle_suite
    from deskdft.constants import symbol_for
    from deskdft.molio import load_manifest

    man_path = os.path.join(args.suite_dir, "manifest.jsonl")
    if not os.path.exists(man_path):
        write_oracle_suite(args.suite_dir, seed=7)
    manifest = load_manifest(man_path)

    out = {"functional": "b3lypg (VWN-RPA variant)", "basis": "sto-3g",
           "grid_level": args.grid_level, "molecules": {}}
    for entry in manifest.entries:
        mol = manifest.load_molecule(entry)
        atom = [(symbol_for(z), tuple(pos)) for z, pos in
                zip(mol.atomic_numbers, mol.positions)]
        pmol = gto.M(atom=atom, unit="Bohr", basis="sto-3g", charge=mol.charge,
                     cart=True, verbose=0)
        mf = dft.RKS(pmol)
        mf.xc = "b3lypg"
        mf.grids.level = args.pyscf_grid_level
        mf.conv_tol = 1e-10
        e_total = mf.kernel()
        if not mf.converged:
            print(f"warning: {entry.id} did not converge", file=sys.stderr)
        occ = mf.mo_occ > 0
        homo = float(mf.mo_energy[occ].max())
        lumo = float(mf.mo_energy[~occ].min())
        out["molecules"][entry.id] = {
            "e_total": float(e_total),
            "homo": homo,
            "lumo": lumo,
            "gap_ev": (lumo - homo) * HARTREE_TO_EV,
        }
        print(f"{entry.id}: {e_total:.8f} Ha  gap {(lumo - homo) * HARTREE_TO_EV:.4f} eV")

    os.makedirs(os.path.dirname(args.out), exist_ok=True)
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(out, fh, indent=2)
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
