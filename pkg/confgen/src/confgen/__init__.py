"""SMILES to 3D conformers for the dataset pipeline.

Uses RDKit's ETKDG when rdkit is importable; otherwise a built-in seeded
distance-geometry embedder with the same external behavior (XYZ + manifest
output, deterministic under a fixed seed).
"""

from confgen.generate import ConformerRequest, generate_conformers

__all__ = ["ConformerRequest", "generate_conformers"]

__version__ = "0.1.0"
