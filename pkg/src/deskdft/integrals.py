"""One-electron matrices, the 8-fold-symmetry packed two-electron tensor,
and the symmetry-aware J/K contraction.

Only canonical quadruples (i>=j, k>=l, composite ij>=kl) are generated and
stored; build_jk walks them once, scattering each value to all of its
distinct symmetric images, so packed and dense contractions agree to
accumulation order.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from deskdft import _kernels as _k
from deskdft.basis import AOBasis
from deskdft.errors import DimensionError, ResourceLimitError
from deskdft.molio import Molecule

DEFAULT_SCREEN_EPS = 1e-12
DEFAULT_MAX_N_AO = 128
DEFAULT_BUDGET_BYTES = 4 << 30


@dataclass(frozen=True)
class IntegralSet:
    """Overlap, kinetic, and nuclear-attraction matrices."""

    S: np.ndarray
    T: np.ndarray
    V: np.ndarray
    n_ao: int

    def __post_init__(self):
        for name in ("S", "T", "V"):
            m = getattr(self, name)
            if m.shape != (self.n_ao, self.n_ao):
                raise DimensionError(f"{name} has shape {m.shape}, expected ({self.n_ao}, {self.n_ao})")


@dataclass(frozen=True)
class PackedERI:
    """Canonical two-electron integrals, composite-pair ordered.

    degeneracy[e] is the number of distinct symmetric images of quadruple e
    (1, 2, 4, or 8); unpacking scatters values[e] to every image.
    """

    i: np.ndarray          # (m,) uint16
    j: np.ndarray
    k: np.ndarray
    l: np.ndarray
    values: np.ndarray     # (m,) working dtype
    degeneracy: np.ndarray  # (m,) uint8
    n_ao: int
    screen_eps: float

    @property
    def quads(self) -> np.ndarray:
        return np.stack([self.i, self.j, self.k, self.l], axis=1)

    @property
    def n_entries(self) -> int:
        return int(self.values.shape[0])

    def nbytes(self) -> int:
        return self.i.nbytes * 4 + self.values.nbytes + self.degeneracy.nbytes


class _PairTables:
    """Shell-pair precomputation shared by Schwarz bounds and quartet fills."""

    def __init__(self, ao: AOBasis):
        nsh = ao.n_shells
        si, sj = np.tril_indices(nsh)
        # descending shell order so pair index order matches composite AO order
        self.pair_si = si.astype(np.int32)
        self.pair_sj = sj.astype(np.int32)
        counts = (ao.prim_count[self.pair_si] * ao.prim_count[self.pair_sj]).astype(np.int64)
        self.pair_pp_start = np.zeros(len(si), dtype=np.int64)
        np.cumsum(counts[:-1], out=self.pair_pp_start[1:])
        self.pair_pp_count = counts.astype(np.int32)
        npp = int(counts.sum())
        self.pp_p = np.zeros(npp)
        self.pp_P = np.zeros((npp, 3))
        self.pp_ia = np.zeros(npp, dtype=np.int32)
        self.pp_ib = np.zeros(npp, dtype=np.int32)
        self.pp_cmaxK = np.zeros(npp)
        self.pp_E = np.zeros((npp, 3, _k.E_TABLE_LEN))
        _k._build_pair_tables(self.pair_si, self.pair_sj, ao.shell_l, ao.shell_center,
                              ao.prim_start, ao.prim_count, ao.prim_coef, ao.prim_exp,
                              self.pair_pp_start, self.pp_p, self.pp_P,
                              self.pp_ia, self.pp_ib, self.pp_cmaxK, self.pp_E)
        self.ao = ao
        self._schwarz: tuple[np.ndarray, np.ndarray] | None = None

    def schwarz(self) -> tuple[np.ndarray, np.ndarray]:
        if self._schwarz is None:
            ao = self.ao
            q_pair = np.zeros(len(self.pair_si))
            q_ao = np.zeros(ao.n_ao * (ao.n_ao + 1) // 2)
            _k._schwarz_kernel(self.pair_si, self.pair_sj, self.pair_pp_start,
                               self.pair_pp_count, ao.shell_l, ao.ao_offsets,
                               self.pp_p, self.pp_P, self.pp_ia, self.pp_ib,
                               self.pp_cmaxK, self.pp_E, ao.prim_coef,
                               _k._BOYS_TABLE, ao.n_ao,
                               _k._COMP_OFF, _k._COMP_LX, _k._COMP_LY, _k._COMP_LZ,
                               _k._NCOMP, q_pair, q_ao)
            self._schwarz = (q_pair, q_ao)
        return self._schwarz


def one_electron(ao: AOBasis, m: Molecule, dtype=np.float64) -> IntegralSet:
    """Analytic S, T, V via Hermite-Gaussian recurrences."""
    n = ao.n_ao
    S = np.zeros((n, n))
    T = np.zeros((n, n))
    V = np.zeros((n, n))
    pairs = _PairTables(ao)
    atom_coords = np.ascontiguousarray(m.positions)
    atom_charge = np.asarray(m.atomic_numbers, dtype=np.float64)
    _k._one_electron_kernel(pairs.pair_si, pairs.pair_sj, ao.shell_l, ao.shell_center,
                            ao.ao_offsets, ao.prim_start, ao.prim_count,
                            ao.prim_exp, ao.prim_coef, atom_coords, atom_charge,
                            S, T, V, _k._BOYS_TABLE,
                            _k._COMP_OFF, _k._COMP_LX, _k._COMP_LY, _k._COMP_LZ, _k._NCOMP)
    dtype = np.dtype(dtype)
    if dtype != np.float64:
        S, T, V = S.astype(dtype), T.astype(dtype), V.astype(dtype)
    return IntegralSet(S=S, T=T, V=V, n_ao=n)


def eri_packed(ao: AOBasis, screen_eps: float = DEFAULT_SCREEN_EPS, dtype=np.float64,
               max_n_ao: int = DEFAULT_MAX_N_AO,
               budget_bytes: int = DEFAULT_BUDGET_BYTES,
               _pairs: _PairTables | None = None) -> PackedERI:
    """Canonical quadruples with Schwarz screening at threshold screen_eps."""
    if ao.n_ao > max_n_ao:
        raise ResourceLimitError(f"N={ao.n_ao} exceeds configured maximum {max_n_ao}")
    dtype = np.dtype(dtype)
    pairs = _pairs if _pairs is not None else _PairTables(ao)
    q_pair, q_ao = pairs.schwarz()

    npair = len(pairs.pair_si)
    qa, qb = np.tril_indices(npair)
    if screen_eps > 0.0:
        keep = q_pair[qa] * q_pair[qb] >= screen_eps
        qa, qb = qa[keep], qb[keep]
    quart_a = qa.astype(np.int32)
    quart_b = qb.astype(np.int32)

    counts = np.zeros(len(quart_a), dtype=np.int64)
    _k._count_kernel(quart_a, quart_b, pairs.pair_si, pairs.pair_sj,
                     ao.shell_l, ao.ao_offsets, q_ao, float(screen_eps),
                     _k._NCOMP, counts)
    total = int(counts.sum())
    entry_bytes = 4 * 2 + dtype.itemsize + 1
    if total * entry_bytes > budget_bytes:
        raise ResourceLimitError(
            f"packed ERI would need {total * entry_bytes / 1e6:.0f} MB "
            f"(> budget {budget_bytes / 1e6:.0f} MB)")
    offsets = np.zeros(len(quart_a), dtype=np.int64)
    np.cumsum(counts[:-1], out=offsets[1:])

    out_i = np.zeros(total, dtype=np.uint16)
    out_j = np.zeros(total, dtype=np.uint16)
    out_k = np.zeros(total, dtype=np.uint16)
    out_l = np.zeros(total, dtype=np.uint16)
    out_v = np.zeros(total, dtype=dtype)
    out_deg = np.zeros(total, dtype=np.uint8)
    _k._fill_kernel(quart_a, quart_b, offsets,
                    pairs.pair_si, pairs.pair_sj, pairs.pair_pp_start, pairs.pair_pp_count,
                    ao.shell_l, ao.ao_offsets,
                    pairs.pp_p, pairs.pp_P, pairs.pp_ia, pairs.pp_ib,
                    pairs.pp_cmaxK, pairs.pp_E,
                    ao.prim_coef, _k._BOYS_TABLE, q_ao, float(screen_eps),
                    _k._COMP_OFF, _k._COMP_LX, _k._COMP_LY, _k._COMP_LZ, _k._NCOMP,
                    out_i, out_j, out_k, out_l, out_v, out_deg)

    if screen_eps > 0.0:
        keep_v = np.abs(out_v) >= screen_eps
        out_i, out_j, out_k, out_l = out_i[keep_v], out_j[keep_v], out_k[keep_v], out_l[keep_v]
        out_v, out_deg = out_v[keep_v], out_deg[keep_v]

    # composite-pair order
    ij = out_i.astype(np.int64) * (out_i.astype(np.int64) + 1) // 2 + out_j
    kl = out_k.astype(np.int64) * (out_k.astype(np.int64) + 1) // 2 + out_l
    npairs_ao = ao.n_ao * (ao.n_ao + 1) // 2
    order = np.argsort(ij * npairs_ao + kl, kind="stable")
    return PackedERI(
        i=out_i[order], j=out_j[order], k=out_k[order], l=out_l[order],
        values=out_v[order], degeneracy=out_deg[order],
        n_ao=ao.n_ao, screen_eps=float(screen_eps),
    )


def build_jk(eri: PackedERI, rho: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Coulomb J and exchange K (with its -1/2 factor) from the packed tensor.

    Single pass over canonical quadruples; accumulation is float64 regardless
    of the working dtype, reduced over fixed-size chunks in fixed order.
    """
    n = eri.n_ao
    if rho.shape != (n, n):
        raise DimensionError(f"rho shape {rho.shape} does not match n_ao={n}")
    m = eri.n_entries
    nchunk = max(1, min((m + _k.JK_CHUNK - 1) // _k.JK_CHUNK, 4096))
    Jp = np.zeros((nchunk, n, n))
    Kp = np.zeros((nchunk, n, n))
    if m:
        _k._jk_kernel(eri.i, eri.j, eri.k, eri.l, eri.values,
                      np.ascontiguousarray(rho), n, Jp, Kp)
    J = Jp.sum(axis=0)
    K = -0.5 * Kp.sum(axis=0)
    dtype = rho.dtype
    return J.astype(dtype), K.astype(dtype)


def unpack_eri(eri: PackedERI) -> np.ndarray:
    """Dense N^4 tensor with all 8 symmetric images realized exactly."""
    n = eri.n_ao
    dense = np.zeros((n, n, n, n), dtype=np.float64)
    i = eri.i.astype(np.intp)
    j = eri.j.astype(np.intp)
    k = eri.k.astype(np.intp)
    l = eri.l.astype(np.intp)
    v = eri.values.astype(np.float64)
    dense[i, j, k, l] = v
    dense[j, i, k, l] = v
    dense[i, j, l, k] = v
    dense[j, i, l, k] = v
    dense[k, l, i, j] = v
    dense[l, k, i, j] = v
    dense[k, l, j, i] = v
    dense[l, k, j, i] = v
    return dense


def dense_eri(ao: AOBasis, max_n_ao: int = 32) -> np.ndarray:
    """Brute-force oracle path: full unscreened tensor, N <= 32 only."""
    if ao.n_ao > max_n_ao:
        raise ResourceLimitError(f"dense_eri limited to N <= {max_n_ao}, got {ao.n_ao}")
    return unpack_eri(eri_packed(ao, screen_eps=0.0))


_DUMP_MAGIC = 0x45524931  # "ERI1"
_SET_MAGIC = 0x53545631   # "STV1"


def dump_packed(eri: PackedERI, path: str) -> None:
    """Little-endian layout: header{magic u32, n_ao u32, count u64, itemsize u8},
    then count quads as 4 x u16, then count values."""
    with open(path, "wb") as fh:
        fh.write(struct.pack("<IIQB", _DUMP_MAGIC, eri.n_ao, eri.n_entries,
                             eri.values.dtype.itemsize))
        fh.write(np.ascontiguousarray(eri.quads.astype("<u2")).tobytes())
        fh.write(np.ascontiguousarray(eri.values.astype(f"<f{eri.values.dtype.itemsize}")).tobytes())


def load_packed(path: str) -> PackedERI:
    with open(path, "rb") as fh:
        magic, n_ao, count, itemsize = struct.unpack("<IIQB", fh.read(17))
        if magic != _DUMP_MAGIC:
            raise ValueError(f"{path}: not a packed-ERI dump")
        quads = np.frombuffer(fh.read(count * 8), dtype="<u2").reshape(count, 4)
        values = np.frombuffer(fh.read(count * itemsize), dtype=f"<f{itemsize}")
    i, j, k, l = (np.ascontiguousarray(quads[:, c]) for c in range(4))
    deg = np.where(i != j, 2, 1) * np.where(k != l, 2, 1) \
        * np.where((i != k) | (j != l), 2, 1)
    return PackedERI(i=i, j=j, k=k, l=l, values=values.copy(),
                     degeneracy=deg.astype(np.uint8), n_ao=int(n_ao), screen_eps=float("nan"))


def dump_integral_set(ints: IntegralSet, path: str) -> None:
    """Little-endian: header{magic u32, n_ao u32}, then S, T, V row-major float64."""
    with open(path, "wb") as fh:
        fh.write(struct.pack("<II", _SET_MAGIC, ints.n_ao))
        for mat in (ints.S, ints.T, ints.V):
            fh.write(np.ascontiguousarray(mat, dtype="<f8").tobytes())


def load_integral_set(path: str) -> IntegralSet:
    with open(path, "rb") as fh:
        magic, n_ao = struct.unpack("<II", fh.read(8))
        if magic != _SET_MAGIC:
            raise ValueError(f"{path}: not an integral-set dump")
        mats = [np.frombuffer(fh.read(8 * n_ao * n_ao), dtype="<f8").reshape(n_ao, n_ao).copy()
                for _ in range(3)]
    return IntegralSet(S=mats[0], T=mats[1], V=mats[2], n_ao=int(n_ao))
