"""Basis tables, Gaussian-style basis-file parsing, and shell expansion.

Cartesian Gaussians throughout. AO ordering within a shell is fixed:
s; p as x, y, z; d as xx, xy, xz, yy, yz, zz. Contraction coefficients are
renormalized at expansion time so every AO has unit self-overlap.

Basis file grammar (Gaussian-style plain text):

    file     := { comment | element } ;
    comment  := '!' text NEWLINE
    element  := symbol int NEWLINE { shell } '****' NEWLINE
    shell    := type count [scale] NEWLINE { row }
    type     := 'S' | 'P' | 'D' | 'SP'
    row      := exponent coeff [coeff2] NEWLINE   -- coeff2 only for SP

Fields are whitespace-delimited; Fortran 'D' exponents are accepted; `count`
rows follow each shell header; exponents are multiplied by scale^2; SP blocks
split into an S and a P shell sharing exponents. Coefficients refer to
normalized primitives. Angular momenta above D are rejected.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from importlib import resources

import numpy as np

from deskdft.constants import SYMBOL_TO_Z
from deskdft.errors import BasisError
from deskdft.molio import Molecule

MAX_L = 2
_SHELL_LETTERS = {"S": 0, "P": 1, "D": 2}
_BUILTIN = {"sto-3g": "sto-3g.dat", "6-31g": "6-31g.dat"}

# Cartesian components per angular momentum, in the fixed AO order.
CARTESIAN_COMPONENTS = (
    ((0, 0, 0),),
    ((1, 0, 0), (0, 1, 0), (0, 0, 1)),
    ((2, 0, 0), (1, 1, 0), (1, 0, 1), (0, 2, 0), (0, 1, 1), (0, 0, 2)),
)


def n_components(l: int) -> int:
    return (l + 1) * (l + 2) // 2


@dataclass(frozen=True)
class ContractedShell:
    """One contracted Gaussian shell: shared exponents, one coefficient each."""

    element: int
    angular_momentum: int
    exponents: tuple[float, ...]
    coefficients: tuple[float, ...]

    def __post_init__(self):
        if not 0 <= self.angular_momentum <= MAX_L:
            raise BasisError(f"angular momentum {self.angular_momentum} unsupported (max {MAX_L})")
        if len(self.exponents) != len(self.coefficients) or not self.exponents:
            raise BasisError("exponent/coefficient length mismatch")
        for e in self.exponents:
            if not (e > 0 and math.isfinite(e)):
                raise BasisError(f"non-positive exponent {e}")
        if any(a <= b for a, b in zip(self.exponents, self.exponents[1:])):
            raise BasisError("exponents must be sorted descending")

    @property
    def n_primitives(self) -> int:
        return len(self.exponents)


@dataclass(frozen=True)
class BasisSet:
    name: str
    shells: dict[int, tuple[ContractedShell, ...]]  # element Z -> shells

    def elements(self) -> set[int]:
        return set(self.shells)


def _parse_basis_text(text: str, name: str) -> BasisSet:
    shells: dict[int, list[ContractedShell]] = {}
    lines = text.splitlines()
    i = 0
    n = len(lines)

    def err(lineno: int, msg: str) -> BasisError:
        return BasisError(f"{name}:{lineno + 1}: {msg}")

    while i < n:
        line = lines[i].strip()
        if not line or line.startswith("!") or line.startswith("****"):
            i += 1
            continue
        parts = line.split()
        z = SYMBOL_TO_Z.get(parts[0].lower())
        if z is None:
            raise err(i, f"unknown element symbol {parts[0]!r}")
        i += 1
        element_shells: list[ContractedShell] = []
        while i < n:
            header = lines[i].strip()
            if not header or header.startswith("!"):
                i += 1
                continue
            if header.startswith("****"):
                i += 1
                break
            hparts = header.split()
            if len(hparts) < 2:
                raise err(i, f"malformed shell header {header!r}")
            letters = hparts[0].upper()
            try:
                count = int(hparts[1])
            except ValueError:
                raise err(i, f"malformed primitive count in {header!r}") from None
            scale = float(hparts[2]) if len(hparts) > 2 else 1.0
            if letters == "SP":
                ls = (0, 1)
            elif letters in _SHELL_LETTERS:
                ls = (_SHELL_LETTERS[letters],)
            else:
                raise err(i, f"unsupported shell type {letters!r} (only S, P, D, SP)")
            i += 1
            exps: list[float] = []
            coefs: list[list[float]] = [[] for _ in ls]
            for k in range(count):
                if i >= n:
                    raise err(i - 1, "unexpected end of file inside shell block")
                row = lines[i].replace("D", "E").replace("d", "e").split()
                if len(row) != 1 + len(ls):
                    raise err(i, f"expected exponent + {len(ls)} coefficient(s), got {len(row)} fields")
                try:
                    vals = [float(v) for v in row]
                except ValueError:
                    raise err(i, f"bad number in {lines[i]!r}") from None
                exps.append(vals[0] * scale * scale)
                for c, v in zip(coefs, vals[1:]):
                    c.append(v)
                i += 1
            for l, c in zip(ls, coefs):
                element_shells.append(
                    ContractedShell(z, l, tuple(exps), tuple(c))
                )
        if not element_shells:
            raise err(i - 1, f"element {parts[0]} has no shells")
        shells[z] = element_shells
    if not shells:
        raise BasisError(f"{name}: no element blocks found")
    return BasisSet(name=name, shells={z: tuple(s) for z, s in shells.items()})


def load_basis(name_or_path: str) -> BasisSet:
    """Load a built-in basis ('sto-3g', '6-31g') or a Gaussian-format file."""
    key = name_or_path.lower()
    if key in _BUILTIN:
        text = resources.files("deskdft.basisdata").joinpath(_BUILTIN[key]).read_text()
        return _parse_basis_text(text, key)
    if os.path.exists(name_or_path):
        with open(name_or_path, encoding="utf-8") as fh:
            return _parse_basis_text(fh.read(), os.path.basename(name_or_path))
    raise BasisError(
        f"unknown basis {name_or_path!r}: not a built-in ({', '.join(sorted(_BUILTIN))}) "
        "and not a file"
    )


def _double_factorial(k: int) -> float:
    out = 1.0
    while k > 1:
        out *= k
        k -= 2
    return out


def primitive_norm(alpha: float, lx: int, ly: int, lz: int) -> float:
    """Normalization constant of a Cartesian primitive Gaussian."""
    l = lx + ly + lz
    df = _double_factorial(2 * lx - 1) * _double_factorial(2 * ly - 1) * _double_factorial(2 * lz - 1)
    return (2.0 * alpha / math.pi) ** 0.75 * (4.0 * alpha) ** (0.5 * l) / math.sqrt(df)


def _self_overlap(exps: np.ndarray, coefs: np.ndarray, lx: int, ly: int, lz: int) -> float:
    # <phi|phi> for a same-center contraction of normalized primitives.
    df = (_double_factorial(2 * lx - 1)
          * _double_factorial(2 * ly - 1)
          * _double_factorial(2 * lz - 1))
    l = lx + ly + lz
    norms = np.array([primitive_norm(a, lx, ly, lz) for a in exps])
    psum = exps[:, None] + exps[None, :]
    pair = (np.pi / psum) ** 1.5 * df / (2.0 * psum) ** l
    cn = coefs * norms
    return float(cn @ pair @ cn)


@dataclass(frozen=True)
class AOBasis:
    """Shells instantiated on atom centers; the kernel-facing flat layout.

    `prim_coef[p, c]` already contains primitive normalization and the
    unit-self-overlap rescaling for component c of the owning shell.
    """

    shells: tuple[tuple[int, ContractedShell], ...]
    n_ao: int
    ao_offsets: np.ndarray       # (nshell,) int32, first AO index of each shell
    shell_l: np.ndarray          # (nshell,) int32
    shell_center: np.ndarray     # (nshell, 3) float64
    prim_start: np.ndarray       # (nshell,) int32 into prim arrays
    prim_count: np.ndarray       # (nshell,) int32
    prim_exp: np.ndarray         # (nprim,) float64
    prim_coef: np.ndarray        # (nprim, 6) float64, per-component

    @property
    def n_shells(self) -> int:
        return len(self.shells)


def expand(m: Molecule, b: BasisSet) -> AOBasis:
    """Instantiate basis shells on every atom, in atom order."""
    missing = sorted({z for z in m.atomic_numbers if z not in b.shells})
    if missing:
        raise BasisError(f"basis {b.name!r} missing element(s) Z={missing}")

    placed: list[tuple[int, ContractedShell]] = []
    for ia, z in enumerate(m.atomic_numbers):
        for sh in b.shells[z]:
            placed.append((ia, sh))

    nshell = len(placed)
    ao_offsets = np.zeros(nshell, dtype=np.int32)
    shell_l = np.zeros(nshell, dtype=np.int32)
    shell_center = np.zeros((nshell, 3), dtype=np.float64)
    prim_start = np.zeros(nshell, dtype=np.int32)
    prim_count = np.zeros(nshell, dtype=np.int32)
    exp_list: list[float] = []
    coef_rows: list[np.ndarray] = []

    n_ao = 0
    for isp, (ia, sh) in enumerate(placed):
        l = sh.angular_momentum
        ao_offsets[isp] = n_ao
        shell_l[isp] = l
        shell_center[isp] = m.positions[ia]
        prim_start[isp] = len(exp_list)
        prim_count[isp] = sh.n_primitives
        exps = np.asarray(sh.exponents)
        coefs = np.asarray(sh.coefficients)
        row = np.zeros((sh.n_primitives, 6), dtype=np.float64)
        for c, (lx, ly, lz) in enumerate(CARTESIAN_COMPONENTS[l]):
            s = _self_overlap(exps, coefs, lx, ly, lz)
            norms = np.array([primitive_norm(a, lx, ly, lz) for a in exps])
            row[:, c] = coefs * norms / math.sqrt(s)
        exp_list.extend(exps)
        coef_rows.append(row)
        n_ao += n_components(l)

    prim_exp = np.asarray(exp_list, dtype=np.float64)
    prim_coef = np.vstack(coef_rows) if coef_rows else np.zeros((0, 6))
    for arr in (ao_offsets, shell_l, shell_center, prim_start, prim_count, prim_exp, prim_coef):
        arr.setflags(write=False)
    return AOBasis(
        shells=tuple(placed),
        n_ao=n_ao,
        ao_offsets=ao_offsets,
        shell_l=shell_l,
        shell_center=shell_center,
        prim_start=prim_start,
        prim_count=prim_count,
        prim_exp=prim_exp,
        prim_coef=prim_coef,
    )
