"""Conformer generation: SMILES in, XYZ blocks + manifest lines out.

Backend selection: rdkit's ETKDG when importable, otherwise the built-in
distance-geometry embedder. Output is byte-identical across runs for a fixed
seed and backend.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from confgen.embed import embed_heavy, place_hydrogens
from confgen.smiles import SmilesError, parse_smiles

MAX_CONFORMERS = 1000


def _have_rdkit() -> bool:
    try:
        import rdkit  # noqa: F401

        return True
    except ImportError:
        return False


@dataclass(frozen=True)
class ConformerRequest:
    smiles: str
    max_conformers: int = 20
    seed: int = 0

    def __post_init__(self):
        if not 1 <= self.max_conformers <= MAX_CONFORMERS:
            raise ValueError(f"max_conformers must be in 1..{MAX_CONFORMERS}")


@dataclass(frozen=True)
class ConformerSet:
    smiles: str
    ids: list[str]
    xyz_blocks: list[str]
    manifest_lines: list[str]

    @property
    def n_conformers(self) -> int:
        return len(self.ids)


def smiles_tag(smiles: str) -> str:
    return hashlib.sha1(smiles.encode()).hexdigest()[:10]


def _format_xyz(symbols, coords, conf_id: str) -> str:
    lines = [str(len(symbols)), f"id={conf_id}"]
    for s, (x, y, z) in zip(symbols, coords):
        lines.append(f"{s:<2s} {x:.10f} {y:.10f} {z:.10f}")
    return "\n".join(lines) + "\n"


def _generate_builtin(req: ConformerRequest) -> list[tuple[list[str], np.ndarray]]:
    g = parse_smiles(req.smiles)
    out = []
    for k in range(req.max_conformers):
        rng = np.random.default_rng(np.random.PCG64(
            [req.seed, k, int(smiles_tag(req.smiles), 16)]))
        heavy = embed_heavy(g, rng)
        if heavy is None:
            continue
        symbols, coords = place_hydrogens(g, heavy)
        out.append((symbols, np.round(coords, 10) + 0.0))
    return out


def _generate_rdkit(req: ConformerRequest) -> list[tuple[list[str], np.ndarray]]:
    from rdkit import Chem
    from rdkit.Chem import AllChem

    mol = Chem.MolFromSmiles(req.smiles)
    if mol is None:
        raise SmilesError(f"rdkit could not parse {req.smiles!r}")
    mol = Chem.AddHs(mol)
    params = AllChem.ETKDGv3()
    params.randomSeed = req.seed
    conf_ids = AllChem.EmbedMultipleConfs(mol, numConfs=req.max_conformers, params=params)
    symbols = [a.GetSymbol() for a in mol.GetAtoms()]
    out = []
    for cid in conf_ids:
        coords = np.array(mol.GetConformer(cid).GetPositions(), dtype=np.float64)
        out.append((symbols, coords))
    return out


def generate_conformers(req: ConformerRequest, backend: str = "auto") -> ConformerSet:
    """Hydrogen-completed conformers of one SMILES as XYZ (Angstrom) blocks."""
    if backend == "auto":
        backend = "rdkit" if _have_rdkit() else "builtin"
    if backend == "rdkit":
        confs = _generate_rdkit(req)
    elif backend == "builtin":
        parse_smiles(req.smiles)  # fail fast on bad SMILES
        confs = _generate_builtin(req)
    else:
        raise ValueError(f"unknown backend {backend!r}")
    tag = smiles_tag(req.smiles)
    ids, blocks, manifest = [], [], []
    for k, (symbols, coords) in enumerate(confs):
        cid = f"{tag}-{k}"
        ids.append(cid)
        blocks.append(_format_xyz(symbols, coords, cid))
        manifest.append(json.dumps({"id": cid, "path": f"{cid}.xyz", "smiles": req.smiles}))
    return ConformerSet(smiles=req.smiles, ids=ids, xyz_blocks=blocks, manifest_lines=manifest)
