"""Frozen molecule suites for module and acceptance tests.

Conformers come from confgen's built-in embedder with fixed seeds, so suite
geometries are reproducible byte-for-byte; the small reference molecules are
fixed literature-style geometries.
"""

from __future__ import annotations

import os

from confgen.generate import ConformerRequest, generate_conformers

# 9-11 heavy atoms, GDB-flavored (rings, heteroatoms, unsaturation).
SMILES_9_11 = [
    "CCCCCCCCC", "CCCCCCCCO", "CCCCCCCCN", "CC(C)CCCCCO",
    "c1ccccc1CCO", "c1ccccc1CCN", "c1ccc(cc1)CC=O", "C1CCCCC1CCO",
    "C1CCCCC1C(=O)O", "OCC(O)C(O)CCO", "c1ccncc1CCO", "c1ccoc1CCCO",
    "N#Cc1ccccc1C#N", "CCCCCCCCCO", "CC(C)CC(=O)NCC", "c1ccccc1CCCO",
    "c1ccc2ccccc2c1", "CC(=O)c1ccccc1O", "OCc1ccccc1CO", "C1CCCCC1CCCCO",
    "c1ccccc1CCCCO", "N#Cc1ccccc1CC#N", "CCCCCCCCCCO", "c1ccncc1CCCCO",
    "CC(C)c1ccccc1CO", "CCOC(=O)c1ccco1",
]

# 6-8 heavy atoms for the STO-3G vs 6-31G disagreement study.
SMILES_SMALL = [
    "CCCCCC", "CCCCCO", "c1ccccc1", "CC(=O)CCC", "OCCCCO",
    "c1ccncc1", "CCCCCCC", "c1ccccc1O", "c1ccccc1N", "CC(=O)CCO",
    "c1ccccc1C", "OCC(O)CCO", "N#Cc1ccco1", "CCOC(C)=O", "Oc1ccccc1O",
    "CCCCC#N", "CC(C)CC#N", "c1ccccc1C=O", "CCCCCC=O", "NCCCCO",
]

SMILES_ALL_50 = SMILES_9_11 + SMILES_SMALL + ["CCCC(=O)N", "FCC(F)CCO",
                                              "Cc1ccncc1", "OCc1ccco1"]

# exactly nine heavy atoms each (checked in tests), for the reference suite
SMILES_9 = [
    "CCCCCCCCC", "CCCCCCCCO", "CCCCCCCCN", "CC(C)CCCCCO",
    "c1ccccc1CCO", "c1ccccc1CCN", "c1ccc(cc1)CC=O", "C1CCCCC1CCO",
    "C1CCCCC1C(=O)O", "OCC(O)C(O)CCO", "c1ccncc1CCO", "c1ccoc1CCCO",
    "CC(C)CC(=O)NCC", "CCC(O)CCC(C)O", "Nc1ccccc1CO",
]

# fixed small-molecule XYZ (Angstrom), standard near-equilibrium geometries
FIXED_XYZ = {
    "h2": "2\nid=h2\nH 0.0 0.0 0.0\nH 0.0 0.0 0.7408481\n",
    "h2o": ("3\nid=h2o\nO 0.0 0.0 0.1173\n"
            "H 0.0 0.7572 -0.4692\nH 0.0 -0.7572 -0.4692\n"),
    "nh3": ("4\nid=nh3\nN 0.0 0.0 0.1173\nH 0.0 0.9377 -0.2737\n"
            "H 0.8121 -0.4689 -0.2737\nH -0.8121 -0.4689 -0.2737\n"),
    "ch4": ("5\nid=ch4\nC 0.0 0.0 0.0\nH 0.6276 0.6276 0.6276\n"
            "H -0.6276 -0.6276 0.6276\nH -0.6276 0.6276 -0.6276\n"
            "H 0.6276 -0.6276 -0.6276\n"),
    "hf": "2\nid=hf\nF 0.0 0.0 0.0\nH 0.0 0.0 0.9168\n",
}


def write_conformer_suite(out_dir: str, smiles_list: list[str], n_conf: int,
                          seed: int = 2024) -> str:
    """Emit XYZ files + manifest.jsonl for a suite; returns the manifest path."""
    os.makedirs(out_dir, exist_ok=True)
    manifest_path = os.path.join(out_dir, "manifest.jsonl")
    with open(manifest_path, "w", encoding="utf-8") as man:
        for smi in smiles_list:
            cs = generate_conformers(
                ConformerRequest(smi, max_conformers=n_conf, seed=seed),
                backend="builtin")
            for cid, block in zip(cs.ids, cs.xyz_blocks):
                with open(os.path.join(out_dir, f"{cid}.xyz"), "w", encoding="utf-8") as fh:
                    fh.write(block)
            for line in cs.manifest_lines:
                man.write(line + "\n")
    return manifest_path


def write_oracle_suite(out_dir: str, seed: int = 7) -> str:
    """The 20-molecule reference suite: 5 fixed molecules + 15 conformers of
    9-heavy-atom SMILES."""
    os.makedirs(out_dir, exist_ok=True)
    manifest_path = os.path.join(out_dir, "manifest.jsonl")
    nine_heavy = SMILES_9
    with open(manifest_path, "w", encoding="utf-8") as man:
        for name, xyz in FIXED_XYZ.items():
            path = os.path.join(out_dir, f"{name}.xyz")
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(xyz)
            man.write(f'{{"id": "{name}", "path": "{name}.xyz"}}\n')
        for smi in nine_heavy:
            cs = generate_conformers(ConformerRequest(smi, max_conformers=1, seed=seed),
                                     backend="builtin")
            cid, block = cs.ids[0], cs.xyz_blocks[0]
            with open(os.path.join(out_dir, f"{cid}.xyz"), "w", encoding="utf-8") as fh:
                fh.write(block)
            man.write(cs.manifest_lines[0] + "\n")
    return manifest_path
