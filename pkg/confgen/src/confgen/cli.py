"""confgen CLI: one XYZ file per conformer plus manifest.jsonl."""

from __future__ import annotations

import argparse
import os
import sys

from confgen.generate import ConformerRequest, generate_conformers
from confgen.smiles import SmilesError


def main(argv=None) -> int:
    p = argparse.ArgumentParser(prog="confgen",
                                description="SMILES -> 3D conformers (XYZ + manifest)")
    p.add_argument("--smiles-file", required=True, help="one SMILES per line")
    p.add_argument("--max-conformers", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--backend", choices=("auto", "rdkit", "builtin"), default="auto")
    args = p.parse_args(argv)

    try:
        with open(args.smiles_file, encoding="utf-8") as fh:
            smiles_list = [ln.strip() for ln in fh if ln.strip() and not ln.startswith("#")]
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 2

    os.makedirs(args.out_dir, exist_ok=True)
    manifest_path = os.path.join(args.out_dir, "manifest.jsonl")
    n_ok = 0
    with open(manifest_path, "w", encoding="utf-8") as man:
        for smi in smiles_list:
            try:
                cs = generate_conformers(
                    ConformerRequest(smi, max_conformers=args.max_conformers, seed=args.seed),
                    backend=args.backend)
            except (SmilesError, ValueError) as exc:
                print(f"skipped {smi!r}: {exc}", file=sys.stderr)
                continue
            if cs.n_conformers == 0:
                print(f"skipped {smi!r}: embedding failed", file=sys.stderr)
                continue
            for cid, block in zip(cs.ids, cs.xyz_blocks):
                with open(os.path.join(args.out_dir, f"{cid}.xyz"), "w", encoding="utf-8") as fh:
                    fh.write(block)
            for line in cs.manifest_lines:
                man.write(line + "\n")
            n_ok += 1
    print(f"{n_ok}/{len(smiles_list)} SMILES embedded -> {args.out_dir}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
