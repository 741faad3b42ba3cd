"""Molecular geometry data model, XYZ parsing, and scalar nuclear quantities.

Positions are stored in Bohr. XYZ text follows the usual convention (count
line, comment line, `symbol x y z` rows); the comment line may carry
whitespace-separated `id=` and `charge=` tokens so one XYZ stream can serve as
its own manifest.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from deskdft.constants import ANGSTROM_TO_BOHR, MAX_Z, SYMBOL_TO_Z, symbol_for
from deskdft.errors import MoleculeError, XYZParseError

MIN_SEPARATION_BOHR = 0.1  # ETKDG occasionally emits clashed conformers; integrals diverge at coincidence


@dataclass(frozen=True)
class Molecule:
    """Atomic numbers + positions (Bohr) + total charge; immutable."""

    atomic_numbers: tuple[int, ...]
    positions: np.ndarray  # (n_atoms, 3), Bohr
    charge: int = 0
    id: str = ""
    smiles: str | None = None

    def __post_init__(self):
        pos = np.ascontiguousarray(np.asarray(self.positions, dtype=np.float64))
        if pos.ndim != 2 or pos.shape[1] != 3 or pos.shape[0] != len(self.atomic_numbers):
            raise MoleculeError(
                f"positions shape {pos.shape} inconsistent with {len(self.atomic_numbers)} atoms"
            )
        if not np.all(np.isfinite(pos)):
            raise MoleculeError("non-finite coordinate")
        for z in self.atomic_numbers:
            if not 1 <= z <= MAX_Z:
                raise MoleculeError(f"atomic number {z} outside supported range 1..{MAX_Z}")
        n = pos.shape[0]
        if n == 0:
            raise MoleculeError("empty molecule")
        if n > 1:
            diff = pos[:, None, :] - pos[None, :, :]
            dist = np.sqrt(np.sum(diff * diff, axis=-1))
            dist[np.diag_indices(n)] = np.inf
            dmin = float(dist.min())
            if dmin < MIN_SEPARATION_BOHR:
                a, b = np.unravel_index(int(np.argmin(dist)), dist.shape)
                raise MoleculeError(
                    f"atoms {a} and {b} are {dmin:.4f} Bohr apart (< {MIN_SEPARATION_BOHR})"
                )
        # parity/positivity of the electron count is enforced by electron_count()
        # (and therefore at SCF entry): a bare atom is still a valid geometry
        # for grid construction and parsing round-trips.
        pos.setflags(write=False)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "atomic_numbers", tuple(int(z) for z in self.atomic_numbers))

    @property
    def n_atoms(self) -> int:
        return len(self.atomic_numbers)


def electron_count(m: Molecule) -> int:
    """Number of electrons, sum(Z) - charge; even and positive by construction."""
    nelec = sum(m.atomic_numbers) - m.charge
    if nelec <= 0 or nelec % 2 != 0:
        raise MoleculeError(f"electron count {nelec}: restricted-closed-shell violation")
    return nelec


def nuclear_repulsion(m: Molecule) -> float:
    """Point-charge repulsion sum_{a<b} Za*Zb/|ra-rb| in Hartree."""
    e = 0.0
    z = m.atomic_numbers
    pos = m.positions
    for a in range(m.n_atoms):
        for b in range(a + 1, m.n_atoms):
            r = math.dist(pos[a], pos[b])
            e += z[a] * z[b] / r
    return e


def _parse_comment_tokens(comment: str) -> tuple[str, int]:
    mol_id, charge = "", 0
    for tok in comment.split():
        if tok.startswith("id="):
            mol_id = tok[3:]
        elif tok.startswith("charge="):
            try:
                charge = int(tok[7:])
            except ValueError as exc:
                raise XYZParseError(f"bad charge token {tok!r}") from exc
    return mol_id, charge


def parse_xyz(text: str, unit: str = "angstrom") -> Molecule:
    """Parse one XYZ block into a Molecule (positions converted to Bohr)."""
    if unit not in ("angstrom", "bohr"):
        raise XYZParseError(f"unit must be 'angstrom' or 'bohr', got {unit!r}")
    lines = text.splitlines()
    if not lines:
        raise XYZParseError("empty XYZ text")
    try:
        n_atoms = int(lines[0].strip())
    except ValueError as exc:
        raise XYZParseError(f"malformed count line: {lines[0]!r}") from exc
    if n_atoms <= 0:
        raise XYZParseError(f"non-positive atom count {n_atoms}")
    if len(lines) < n_atoms + 2:
        raise XYZParseError(f"expected {n_atoms} atom lines, file has {max(0, len(lines) - 2)}")
    mol_id, charge = _parse_comment_tokens(lines[1] if len(lines) > 1 else "")
    zs: list[int] = []
    coords = np.empty((n_atoms, 3), dtype=np.float64)
    for i in range(n_atoms):
        parts = lines[2 + i].split()
        if len(parts) < 4:
            raise XYZParseError(f"atom line {i + 1} malformed: {lines[2 + i]!r}")
        z = SYMBOL_TO_Z.get(parts[0].lower())
        if z is None:
            raise XYZParseError(f"unknown element symbol {parts[0]!r}")
        try:
            xyz = [float(p) for p in parts[1:4]]
        except ValueError as exc:
            raise XYZParseError(f"bad coordinate on atom line {i + 1}") from exc
        if not all(math.isfinite(c) for c in xyz):
            raise XYZParseError(f"non-finite coordinate on atom line {i + 1}")
        zs.append(z)
        coords[i] = xyz
    for extra in lines[2 + n_atoms :]:
        if extra.strip():
            raise XYZParseError(f"trailing content after {n_atoms} atoms: {extra!r}")
    if unit == "angstrom":
        coords *= ANGSTROM_TO_BOHR
    return Molecule(tuple(zs), coords, charge=charge, id=mol_id)


def emit_xyz(m: Molecule, unit: str = "angstrom") -> str:
    """Inverse of parse_xyz; coordinates round-trip to 1e-10 Bohr."""
    if unit not in ("angstrom", "bohr"):
        raise XYZParseError(f"unit must be 'angstrom' or 'bohr', got {unit!r}")
    pos = m.positions / ANGSTROM_TO_BOHR if unit == "angstrom" else m.positions
    comment = []
    if m.id:
        comment.append(f"id={m.id}")
    if m.charge:
        comment.append(f"charge={m.charge}")
    lines = [str(m.n_atoms), " ".join(comment)]
    for z, (x, y, zc) in zip(m.atomic_numbers, pos):
        lines.append(f"{symbol_for(z):<2s} {x:.14f} {y:.14f} {zc:.14f}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class ManifestEntry:
    id: str
    path: str | None = None
    xyz: str | None = None
    smiles: str | None = None


@dataclass
class GeometryManifest:
    """Ordered geometry entries; ids are unique within a manifest."""

    entries: list[ManifestEntry] = field(default_factory=list)
    format_version: int = 1
    base_dir: str = "."

    def __post_init__(self):
        seen: set[str] = set()
        for e in self.entries:
            if e.id in seen:
                raise XYZParseError(f"duplicate manifest id {e.id!r}")
            if e.path is None and e.xyz is None:
                raise XYZParseError(f"manifest entry {e.id!r} has neither path nor xyz")
            seen.add(e.id)

    def load_molecule(self, entry: ManifestEntry, unit: str = "angstrom") -> Molecule:
        if entry.xyz is not None:
            text = entry.xyz
        else:
            with open(os.path.join(self.base_dir, entry.path), encoding="utf-8") as fh:
                text = fh.read()
        mol = parse_xyz(text, unit=unit)
        mol_id = mol.id or entry.id
        return Molecule(mol.atomic_numbers, mol.positions, charge=mol.charge,
                        id=mol_id, smiles=entry.smiles)


def load_manifest(path: str) -> GeometryManifest:
    """Read a JSON-lines manifest with fields {id, path|xyz, smiles?}."""
    entries = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise XYZParseError(f"{path}:{lineno}: invalid JSON") from exc
            if "id" not in rec:
                raise XYZParseError(f"{path}:{lineno}: missing 'id'")
            entries.append(ManifestEntry(
                id=str(rec["id"]),
                path=rec.get("path"),
                xyz=rec.get("xyz"),
                smiles=rec.get("smiles"),
            ))
    return GeometryManifest(entries=entries, base_dir=os.path.dirname(os.path.abspath(path)))


def save_manifest(manifest: GeometryManifest, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for e in manifest.entries:
            rec = {"id": e.id}
            if e.path is not None:
                rec["path"] = e.path
            if e.xyz is not None:
                rec["xyz"] = e.xyz
            if e.smiles is not None:
                rec["smiles"] = e.smiles
            fh.write(json.dumps(rec) + "\n")
