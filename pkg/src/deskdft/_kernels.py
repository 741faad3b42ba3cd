"""Numba kernels: McMurchie-Davidson Gaussian integrals and the packed J/K contraction.

Recurrence internals run in float64; contracted values are accumulated and
stored in the working dtype (float32 or float64), so every kernel family is
compiled for both scalar widths. build_jk always accumulates in float64.

Shell-pair data is precomputed once per AO basis: Hermite expansion tables
E[i,j,t] per Cartesian dimension with the fixed layout idx = (i*3+j)*5+t
(supports l <= 2, so i,j <= 2 and t <= 4).
"""

from __future__ import annotations

import numpy as np
from numba import njit, prange
from scipy.special import hyp1f1

MAX_L = 2
N_CHUNKS = 128          # fixed generation chunk count: determinism across thread counts
JK_CHUNK = 65536        # fixed contraction batch size: deterministic f32 reductions

# Cartesian powers per component, flat across l=0,1,2 (offsets 0, 1, 4).
_COMP_OFF = np.array([0, 1, 4], dtype=np.int32)
_COMP_LX = np.array([0, 1, 0, 0, 2, 1, 1, 0, 0, 0], dtype=np.int32)
_COMP_LY = np.array([0, 0, 1, 0, 0, 1, 0, 2, 1, 0], dtype=np.int32)
_COMP_LZ = np.array([0, 0, 0, 1, 0, 0, 1, 0, 1, 2], dtype=np.int32)
_NCOMP = np.array([1, 3, 6], dtype=np.int32)

# ---------------------------------------------------------------------------
# Boys function: tabulated seeds + 7-term Taylor + downward recursion.

_BOYS_MMAX = 4 * MAX_L           # highest order needed by an ERI quartet
_BOYS_TAYLOR = 7
_BOYS_STEP = 0.1
_BOYS_TMAX = 43.0


def _build_boys_table() -> np.ndarray:
    ts = np.arange(0.0, _BOYS_TMAX + _BOYS_STEP / 2, _BOYS_STEP)
    ms = np.arange(0, _BOYS_MMAX + _BOYS_TAYLOR + 1)
    tt, mm = np.meshgrid(ts, ms, indexing="ij")
    return (hyp1f1(mm + 0.5, mm + 1.5, -tt) / (2 * mm + 1)).astype(np.float64)


_BOYS_TABLE = _build_boys_table()


@njit(cache=True, fastmath=True)
def _boys(mmax, T, F, table):
    """Fill F[0..mmax] with Boys F_m(T)."""
    if T > _BOYS_TMAX - 0.5 * _BOYS_STEP:
        ft = 0.5 * np.sqrt(np.pi / T)
        F[0] = ft
        et = np.exp(-T) if T < 700.0 else 0.0
        inv2t = 0.5 / T
        for m in range(mmax):
            F[m + 1] = ((2 * m + 1) * F[m] - et) * inv2t
    else:
        it = int(T / _BOYS_STEP + 0.5)
        dT = T - it * _BOYS_STEP
        acc = 0.0
        for j in range(_BOYS_TAYLOR - 1, 0, -1):
            acc = (acc + table[it, mmax + j]) * (-dT) / j
        acc += table[it, mmax]
        F[mmax] = acc
        et = np.exp(-T)
        for m in range(mmax - 1, -1, -1):
            F[m] = (2.0 * T * F[m + 1] + et) / (2 * m + 1)


# ---------------------------------------------------------------------------
# Hermite expansion coefficients.

_E_STRIDE_J = 3   # j index stride factor within pair tables
_E_STRIDE_T = 5
E_TABLE_LEN = 3 * _E_STRIDE_J * _E_STRIDE_T  # 45 per dimension


@njit(cache=True, fastmath=True)
def _fill_E_dim(la, lb, p, pa, pb, kfac, E):
    """E[i,j,t] (flat (i*3+j)*5+t) for one Cartesian dimension; E[0,0,0]=kfac."""
    for q in range(E_TABLE_LEN):
        E[q] = 0.0
    E[0] = kfac
    oo2p = 0.5 / p
    for j in range(lb + 1):
        for i in range(la + 1):
            if i == 0 and j == 0:
                continue
            if i > 0:
                src = ((i - 1) * _E_STRIDE_J + j) * _E_STRIDE_T
                dst = (i * _E_STRIDE_J + j) * _E_STRIDE_T
                x = pa
            else:
                src = (i * _E_STRIDE_J + (j - 1)) * _E_STRIDE_T
                dst = (i * _E_STRIDE_J + j) * _E_STRIDE_T
                x = pb
            nmax = i + j
            for t in range(nmax + 1):
                v = x * E[src + t]
                if t > 0:
                    v += oo2p * E[src + t - 1]
                if t + 1 <= nmax - 1:
                    v += (t + 1) * E[src + t + 1]
                E[dst + t] = v


@njit(cache=True, fastmath=True)
def _fill_R(L, alpha, x, y, z, T, F, R, table):
    """Hermite Coulomb integrals R[0..L]^3 (flat t*(L+1)^2+u*(L+1)+v), order n=0."""
    _boys(L, T, F, table)
    n1 = L + 1
    nn = n1 * n1
    # scratch layout: R4[n, t, u, v] flattened into R with stride n1^3
    s3 = n1 * nn
    m2a = -2.0 * alpha
    pw = 1.0
    for n in range(n1):
        R[n * s3] = pw * F[n]
        pw *= m2a
    for v in range(1, n1):
        for n in range(n1 - v):
            val = z * R[(n + 1) * s3 + (v - 1)]
            if v > 1:
                val += (v - 1) * R[(n + 1) * s3 + (v - 2)]
            R[n * s3 + v] = val
    for u in range(1, n1):
        for v in range(n1 - u):
            for n in range(n1 - u - v):
                val = y * R[(n + 1) * s3 + (u - 1) * n1 + v]
                if u > 1:
                    val += (u - 1) * R[(n + 1) * s3 + (u - 2) * n1 + v]
                R[n * s3 + u * n1 + v] = val
    for t in range(1, n1):
        for u in range(n1 - t):
            for v in range(n1 - t - u):
                for n in range(n1 - t - u - v):
                    val = x * R[(n + 1) * s3 + (t - 1) * nn + u * n1 + v]
                    if t > 1:
                        val += (t - 1) * R[(n + 1) * s3 + (t - 2) * nn + u * n1 + v]
                    R[n * s3 + t * nn + u * n1 + v] = val


# ---------------------------------------------------------------------------
# Shell-pair tables.


@njit(cache=True)
def _build_pair_tables(pair_si, pair_sj, shell_l, shell_center,
                       prim_start, prim_count, prim_coef, prim_exp,
                       pair_pp_start, pp_p, pp_P, pp_ia, pp_ib, pp_cmaxK, pp_E):
    npair = pair_si.shape[0]
    for ip in range(npair):
        si = pair_si[ip]
        sj = pair_sj[ip]
        la = shell_l[si]
        lb = shell_l[sj]
        A = shell_center[si]
        B = shell_center[sj]
        rab2 = 0.0
        for d in range(3):
            rab2 += (A[d] - B[d]) ** 2
        idx = pair_pp_start[ip]
        for pa in range(prim_start[si], prim_start[si] + prim_count[si]):
            a = prim_exp[pa]
            cmax_a = 0.0
            for c in range(6):
                if abs(prim_coef[pa, c]) > cmax_a:
                    cmax_a = abs(prim_coef[pa, c])
            for pb in range(prim_start[sj], prim_start[sj] + prim_count[sj]):
                b = prim_exp[pb]
                p = a + b
                mu = a * b / p
                kab = np.exp(-mu * rab2)
                cmax_b = 0.0
                for c in range(6):
                    if abs(prim_coef[pb, c]) > cmax_b:
                        cmax_b = abs(prim_coef[pb, c])
                pp_p[idx] = p
                for d in range(3):
                    pp_P[idx, d] = (a * A[d] + b * B[d]) / p
                pp_ia[idx] = pa
                pp_ib[idx] = pb
                pp_cmaxK[idx] = cmax_a * cmax_b * kab
                for d in range(3):
                    _fill_E_dim(la, lb, p,
                                pp_P[idx, d] - A[d], pp_P[idx, d] - B[d],
                                1.0 if d > 0 else kab,
                                pp_E[idx, d])
                idx += 1


# ---------------------------------------------------------------------------
# One-electron integrals (S, T, V). Extended-j Hermite tables for the kinetic part.

_OE_SJ = 5
_OE_ST = 7
_OE_LEN = 3 * _OE_SJ * _OE_ST


@njit(cache=True)
def _fill_E_dim_ext(la, lbx, p, pa, pb, kfac, E):
    """Like _fill_E_dim but layout (i*5+j)*7+t with j up to lb+2."""
    for q in range(_OE_LEN):
        E[q] = 0.0
    E[0] = kfac
    oo2p = 0.5 / p
    for j in range(lbx + 1):
        for i in range(la + 1):
            if i == 0 and j == 0:
                continue
            if i > 0:
                src = ((i - 1) * _OE_SJ + j) * _OE_ST
                x = pa
            else:
                src = (i * _OE_SJ + (j - 1)) * _OE_ST
                x = pb
            dst = (i * _OE_SJ + j) * _OE_ST
            nmax = i + j
            for t in range(nmax + 1):
                v = x * E[src + t]
                if t > 0:
                    v += oo2p * E[src + t - 1]
                if t + 1 <= nmax - 1:
                    v += (t + 1) * E[src + t + 1]
                E[dst + t] = v


@njit(cache=True, parallel=True)
def _one_electron_kernel(pair_si, pair_sj, shell_l, shell_center, ao_offsets,
                         prim_start, prim_count, prim_exp, prim_coef,
                         atom_coords, atom_charge, S, Tm, V, table,
                         comp_off, comp_lx, comp_ly, comp_lz, ncomp_tab):
    npair = pair_si.shape[0]
    for ip in prange(npair):
        Ex = np.zeros(_OE_LEN, dtype=np.float64)
        Ey = np.zeros(_OE_LEN, dtype=np.float64)
        Ez = np.zeros(_OE_LEN, dtype=np.float64)
        Fbuf = np.zeros(2 * MAX_L + 1, dtype=np.float64)
        Rbuf = np.zeros((2 * MAX_L + 1) ** 4, dtype=np.float64)
        si = pair_si[ip]
        sj = pair_sj[ip]
        la = shell_l[si]
        lb = shell_l[sj]
        na = ncomp_tab[la]
        nb = ncomp_tab[lb]
        A = shell_center[si]
        B = shell_center[sj]
        rab2 = 0.0
        for d in range(3):
            rab2 += (A[d] - B[d]) ** 2
        sblk = np.zeros((na, nb), dtype=np.float64)
        tblk = np.zeros((na, nb), dtype=np.float64)
        vblk = np.zeros((na, nb), dtype=np.float64)
        L = la + lb
        n1 = L + 1
        nn = n1 * n1
        s3 = n1 * nn
        for pa in range(prim_start[si], prim_start[si] + prim_count[si]):
            a = prim_exp[pa]
            for pb in range(prim_start[sj], prim_start[sj] + prim_count[sj]):
                b = prim_exp[pb]
                p = a + b
                mu = a * b / p
                kab = np.exp(-mu * rab2)
                Px = (a * A[0] + b * B[0]) / p
                Py = (a * A[1] + b * B[1]) / p
                Pz = (a * A[2] + b * B[2]) / p
                _fill_E_dim_ext(la, lb + 2, p, Px - A[0], Px - B[0], kab, Ex)
                _fill_E_dim_ext(la, lb + 2, p, Py - A[1], Py - B[1], 1.0, Ey)
                _fill_E_dim_ext(la, lb + 2, p, Pz - A[2], Pz - B[2], 1.0, Ez)
                sqp = np.sqrt(np.pi / p)
                ovall = sqp * sqp * sqp
                for ca in range(na):
                    ax = comp_lx[comp_off[la] + ca]
                    ay = comp_ly[comp_off[la] + ca]
                    az = comp_lz[comp_off[la] + ca]
                    for cb in range(nb):
                        bx = comp_lx[comp_off[lb] + cb]
                        by = comp_ly[comp_off[lb] + cb]
                        bz = comp_lz[comp_off[lb] + cb]
                        cc = prim_coef[pa, ca] * prim_coef[pb, cb]
                        ex0 = Ex[(ax * _OE_SJ + bx) * _OE_ST]
                        ey0 = Ey[(ay * _OE_SJ + by) * _OE_ST]
                        ez0 = Ez[(az * _OE_SJ + bz) * _OE_ST]
                        sblk[ca, cb] += cc * ex0 * ey0 * ez0 * ovall
                        # 1D kinetic pieces: t(i,j) built from overlaps at j-2, j, j+2
                        kx = -2.0 * b * b * Ex[(ax * _OE_SJ + bx + 2) * _OE_ST] \
                            + b * (2 * bx + 1) * ex0
                        if bx >= 2:
                            kx -= 0.5 * bx * (bx - 1) * Ex[(ax * _OE_SJ + bx - 2) * _OE_ST]
                        ky = -2.0 * b * b * Ey[(ay * _OE_SJ + by + 2) * _OE_ST] \
                            + b * (2 * by + 1) * ey0
                        if by >= 2:
                            ky -= 0.5 * by * (by - 1) * Ey[(ay * _OE_SJ + by - 2) * _OE_ST]
                        kz = -2.0 * b * b * Ez[(az * _OE_SJ + bz + 2) * _OE_ST] \
                            + b * (2 * bz + 1) * ez0
                        if bz >= 2:
                            kz -= 0.5 * bz * (bz - 1) * Ez[(az * _OE_SJ + bz - 2) * _OE_ST]
                        tblk[ca, cb] += cc * (kx * ey0 * ez0 + ex0 * ky * ez0 + ex0 * ey0 * kz) * ovall
                # nuclear attraction
                pref = 2.0 * np.pi / p
                for ia in range(atom_coords.shape[0]):
                    xpc = Px - atom_coords[ia, 0]
                    ypc = Py - atom_coords[ia, 1]
                    zpc = Pz - atom_coords[ia, 2]
                    rpc2 = xpc * xpc + ypc * ypc + zpc * zpc
                    _fill_R(L, p, xpc, ypc, zpc, p * rpc2, Fbuf, Rbuf, table)
                    zchg = -float(atom_charge[ia]) * pref
                    for ca in range(na):
                        ax = comp_lx[comp_off[la] + ca]
                        ay = comp_ly[comp_off[la] + ca]
                        az = comp_lz[comp_off[la] + ca]
                        for cb in range(nb):
                            bx = comp_lx[comp_off[lb] + cb]
                            by = comp_ly[comp_off[lb] + cb]
                            bz = comp_lz[comp_off[lb] + cb]
                            cc = prim_coef[pa, ca] * prim_coef[pb, cb]
                            ssum = 0.0
                            for t in range(ax + bx + 1):
                                ext = Ex[(ax * _OE_SJ + bx) * _OE_ST + t]
                                if ext == 0.0:
                                    continue
                                for u in range(ay + by + 1):
                                    eyu = Ey[(ay * _OE_SJ + by) * _OE_ST + u]
                                    if eyu == 0.0:
                                        continue
                                    for v in range(az + bz + 1):
                                        ezv = Ez[(az * _OE_SJ + bz) * _OE_ST + v]
                                        if ezv == 0.0:
                                            continue
                                        ssum += ext * eyu * ezv * Rbuf[t * nn + u * n1 + v]
                            vblk[ca, cb] += zchg * cc * ssum
        oa = ao_offsets[si]
        ob = ao_offsets[sj]
        for ca in range(na):
            for cb in range(nb):
                S[oa + ca, ob + cb] = sblk[ca, cb]
                S[ob + cb, oa + ca] = sblk[ca, cb]
                Tm[oa + ca, ob + cb] = tblk[ca, cb]
                Tm[ob + cb, oa + ca] = tblk[ca, cb]
                V[oa + ca, ob + cb] = vblk[ca, cb]
                V[ob + cb, oa + ca] = vblk[ca, cb]


# ---------------------------------------------------------------------------
# ERI quartets.


@njit(cache=True, fastmath=True)
def _quartet_block(la, lb, lc, ld,
                   sa_pps, sa_ppn, sb_pps, sb_ppn,
                   pp_p, pp_P, pp_ia, pp_ib, pp_cmaxK, pp_E,
                   prim_coef, Fbuf, Rbuf, table, block,
                   comp_off, comp_lx, comp_ly, comp_lz, ncomp_tab,
                   prim_cut):
    """Contracted (ab|cd) for all components into block[na*nb, nc*nd]."""
    na = ncomp_tab[la]
    nb = ncomp_tab[lb]
    nc = ncomp_tab[lc]
    nd = ncomp_tab[ld]
    for q in range(na * nb):
        for r in range(nc * nd):
            block[q, r] = 0.0
    L = la + lb + lc + ld
    n1 = L + 1
    nn = n1 * n1
    s3 = n1 * nn
    for ppa in range(sa_pps, sa_pps + sa_ppn):
        p = pp_p[ppa]
        for ppb in range(sb_pps, sb_pps + sb_ppn):
            q = pp_p[ppb]
            pq = p * q
            sq = np.sqrt(p + q)
            pref = 2.0 * np.pi ** 2.5 / (pq * sq)
            if prim_cut > 0.0 and pref * pp_cmaxK[ppa] * pp_cmaxK[ppb] < prim_cut:
                continue
            alpha = pq / (p + q)
            xpq = pp_P[ppa, 0] - pp_P[ppb, 0]
            ypq = pp_P[ppa, 1] - pp_P[ppb, 1]
            zpq = pp_P[ppa, 2] - pp_P[ppb, 2]
            T = alpha * (xpq * xpq + ypq * ypq + zpq * zpq)
            _fill_R(L, alpha, xpq, ypq, zpq, T, Fbuf, Rbuf, table)
            ia = pp_ia[ppa]
            ib = pp_ib[ppa]
            ic = pp_ia[ppb]
            idp = pp_ib[ppb]
            for ca in range(na):
                ax = comp_lx[comp_off[la] + ca]
                ay = comp_ly[comp_off[la] + ca]
                az = comp_lz[comp_off[la] + ca]
                for cb in range(nb):
                    bx = comp_lx[comp_off[lb] + cb]
                    by = comp_ly[comp_off[lb] + cb]
                    bz = comp_lz[comp_off[lb] + cb]
                    cab = prim_coef[ia, ca] * prim_coef[ib, cb]
                    if cab == 0.0:
                        continue
                    exi = (ax * _E_STRIDE_J + bx) * _E_STRIDE_T
                    eyi = (ay * _E_STRIDE_J + by) * _E_STRIDE_T
                    ezi = (az * _E_STRIDE_J + bz) * _E_STRIDE_T
                    for cc in range(nc):
                        cx = comp_lx[comp_off[lc] + cc]
                        cy = comp_ly[comp_off[lc] + cc]
                        cz = comp_lz[comp_off[lc] + cc]
                        for cd in range(nd):
                            dx = comp_lx[comp_off[ld] + cd]
                            dy = comp_ly[comp_off[ld] + cd]
                            dz = comp_lz[comp_off[ld] + cd]
                            ccd = prim_coef[ic, cc] * prim_coef[idp, cd]
                            if ccd == 0.0:
                                continue
                            fxi = (cx * _E_STRIDE_J + dx) * _E_STRIDE_T
                            fyi = (cy * _E_STRIDE_J + dy) * _E_STRIDE_T
                            fzi = (cz * _E_STRIDE_J + dz) * _E_STRIDE_T
                            ssum = 0.0
                            for t in range(ax + bx + 1):
                                e1 = pp_E[ppa, 0, exi + t]
                                if e1 == 0.0:
                                    continue
                                for u in range(ay + by + 1):
                                    e2 = e1 * pp_E[ppa, 1, eyi + u]
                                    if e2 == 0.0:
                                        continue
                                    for v in range(az + bz + 1):
                                        e3 = e2 * pp_E[ppa, 2, ezi + v]
                                        if e3 == 0.0:
                                            continue
                                        inner = 0.0
                                        for tau in range(cx + dx + 1):
                                            f1 = pp_E[ppb, 0, fxi + tau]
                                            if f1 == 0.0:
                                                continue
                                            sgn1 = -f1 if (tau & 1) else f1
                                            for nu in range(cy + dy + 1):
                                                f2 = sgn1 * pp_E[ppb, 1, fyi + nu]
                                                if f2 == 0.0:
                                                    continue
                                                sgn2 = -f2 if (nu & 1) else f2
                                                for ph in range(cz + dz + 1):
                                                    f3 = pp_E[ppb, 2, fzi + ph]
                                                    if f3 == 0.0:
                                                        continue
                                                    val = -f3 if (ph & 1) else f3
                                                    inner += sgn2 * val * Rbuf[(t + tau) * nn + (u + nu) * n1 + (v + ph)]
                                        ssum += e3 * inner
                            block[ca * nb + cb, cc * nd + cd] += pref * cab * ccd * ssum


@njit(cache=True, parallel=True)
def _schwarz_kernel(pair_si, pair_sj, pair_pp_start, pair_pp_count,
                    shell_l, ao_offsets,
                    pp_p, pp_P, pp_ia, pp_ib, pp_cmaxK, pp_E,
                    prim_coef, table, n_ao,
                    comp_off, comp_lx, comp_ly, comp_lz, ncomp_tab,
                    q_pair, q_ao):
    npair = pair_si.shape[0]
    for ip in prange(npair):
        Fbuf = np.zeros(4 * MAX_L + 1, dtype=np.float64)
        Rbuf = np.zeros((4 * MAX_L + 1) ** 4, dtype=np.float64)
        block = np.zeros((36, 36), dtype=np.float64)
        si = pair_si[ip]
        sj = pair_sj[ip]
        la = shell_l[si]
        lb = shell_l[sj]
        na = ncomp_tab[la]
        nb = ncomp_tab[lb]
        _quartet_block(la, lb, la, lb,
                       pair_pp_start[ip], pair_pp_count[ip],
                       pair_pp_start[ip], pair_pp_count[ip],
                       pp_p, pp_P, pp_ia, pp_ib, pp_cmaxK, pp_E,
                       prim_coef, Fbuf, Rbuf, table, block,
                       comp_off, comp_lx, comp_ly, comp_lz, ncomp_tab, 0.0)
        qmax = 0.0
        for ca in range(na):
            for cb in range(nb):
                v = block[ca * nb + cb, ca * nb + cb]
                if v < 0.0:
                    v = 0.0
                v = np.sqrt(v)
                i = ao_offsets[si] + ca
                j = ao_offsets[sj] + cb
                if i < j:
                    i, j = j, i
                q_ao[i * (i + 1) // 2 + j] = v
                if v > qmax:
                    qmax = v
        q_pair[ip] = qmax


@njit(cache=True, parallel=True)
def _count_kernel(quart_a, quart_b, pair_si, pair_sj, shell_l, ao_offsets,
                  q_ao, screen_eps, ncomp_tab, counts):
    nq = quart_a.shape[0]
    for iq in prange(nq):
        pa = quart_a[iq]
        pb = quart_b[iq]
        s1 = pair_si[pa]
        s2 = pair_sj[pa]
        s3 = pair_si[pb]
        s4 = pair_sj[pb]
        n1c = ncomp_tab[shell_l[s1]]
        n2c = ncomp_tab[shell_l[s2]]
        n3c = ncomp_tab[shell_l[s3]]
        n4c = ncomp_tab[shell_l[s4]]
        o1 = ao_offsets[s1]
        o2 = ao_offsets[s2]
        o3 = ao_offsets[s3]
        o4 = ao_offsets[s4]
        cnt = 0
        for c1 in range(n1c):
            i = o1 + c1
            for c2 in range(n2c):
                j = o2 + c2
                if j > i:
                    continue
                ij = i * (i + 1) // 2 + j
                for c3 in range(n3c):
                    k = o3 + c3
                    for c4 in range(n4c):
                        l = o4 + c4
                        if l > k:
                            continue
                        if pa == pb:
                            kl = k * (k + 1) // 2 + l
                            if kl > ij:
                                continue
                        if screen_eps > 0.0:
                            kl = k * (k + 1) // 2 + l
                            if q_ao[ij] * q_ao[kl] < screen_eps:
                                continue
                        cnt += 1
        counts[iq] = cnt


@njit(cache=True, parallel=True, fastmath=True)
def _fill_kernel(quart_a, quart_b, offsets,
                 pair_si, pair_sj, pair_pp_start, pair_pp_count,
                 shell_l, ao_offsets,
                 pp_p, pp_P, pp_ia, pp_ib, pp_cmaxK, pp_E,
                 prim_coef, table, q_ao, screen_eps,
                 comp_off, comp_lx, comp_ly, comp_lz, ncomp_tab,
                 out_i, out_j, out_k, out_l, out_v, out_deg):
    nq = quart_a.shape[0]
    nchunk = N_CHUNKS if nq > N_CHUNKS else nq
    if nchunk == 0:
        return
    per = (nq + nchunk - 1) // nchunk
    prim_cut = 0.001 * screen_eps
    for ic in prange(nchunk):
        Fbuf = np.zeros(4 * MAX_L + 1, dtype=np.float64)
        Rbuf = np.zeros((4 * MAX_L + 1) ** 4, dtype=np.float64)
        block = np.zeros((36, 36), dtype=out_v.dtype)
        lo = ic * per
        hi = min(nq, lo + per)
        for iq in range(lo, hi):
            pa = quart_a[iq]
            pb = quart_b[iq]
            s1 = pair_si[pa]
            s2 = pair_sj[pa]
            s3 = pair_si[pb]
            s4 = pair_sj[pb]
            l1 = shell_l[s1]
            l2 = shell_l[s2]
            l3 = shell_l[s3]
            l4 = shell_l[s4]
            n1c = ncomp_tab[l1]
            n2c = ncomp_tab[l2]
            n3c = ncomp_tab[l3]
            n4c = ncomp_tab[l4]
            o1 = ao_offsets[s1]
            o2 = ao_offsets[s2]
            o3 = ao_offsets[s3]
            o4 = ao_offsets[s4]
            _quartet_block(l1, l2, l3, l4,
                           pair_pp_start[pa], pair_pp_count[pa],
                           pair_pp_start[pb], pair_pp_count[pb],
                           pp_p, pp_P, pp_ia, pp_ib, pp_cmaxK, pp_E,
                           prim_coef, Fbuf, Rbuf, table, block,
                           comp_off, comp_lx, comp_ly, comp_lz, ncomp_tab,
                           prim_cut)
            pos = offsets[iq]
            for c1 in range(n1c):
                i = o1 + c1
                for c2 in range(n2c):
                    j = o2 + c2
                    if j > i:
                        continue
                    ij = i * (i + 1) // 2 + j
                    for c3 in range(n3c):
                        k = o3 + c3
                        for c4 in range(n4c):
                            l = o4 + c4
                            if l > k:
                                continue
                            kl = k * (k + 1) // 2 + l
                            if pa == pb and kl > ij:
                                continue
                            if screen_eps > 0.0 and q_ao[ij] * q_ao[kl] < screen_eps:
                                continue
                            v = block[c1 * n2c + c2, c3 * n4c + c4]
                            if kl > ij:
                                ii, jj, kk, ll = k, l, i, j
                            else:
                                ii, jj, kk, ll = i, j, k, l
                            out_i[pos] = ii
                            out_j[pos] = jj
                            out_k[pos] = kk
                            out_l[pos] = ll
                            out_v[pos] = v
                            deg = 1
                            if ii != jj:
                                deg *= 2
                            if kk != ll:
                                deg *= 2
                            if ii != kk or jj != ll:
                                deg *= 2
                            out_deg[pos] = deg
                            pos += 1


@njit(cache=True, parallel=True)
def _becke_kernel(centers, inv_rij, points, owner, out):
    npts = points.shape[0]
    natom = centers.shape[0]
    for p in prange(npts):
        d = np.empty(natom)
        for a in range(natom):
            dx = points[p, 0] - centers[a, 0]
            dy = points[p, 1] - centers[a, 1]
            dz = points[p, 2] - centers[a, 2]
            d[a] = np.sqrt(dx * dx + dy * dy + dz * dz)
        tot = 0.0
        pown = 0.0
        for a in range(natom):
            cell = 1.0
            for bidx in range(natom):
                if bidx == a:
                    continue
                f = (d[a] - d[bidx]) * inv_rij[a, bidx]
                for _ in range(3):
                    f = 1.5 * f - 0.5 * f * f * f
                cell *= 0.5 * (1.0 - f)
            tot += cell
            if a == owner[p]:
                pown = cell
        out[p] = pown / tot if tot > 0.0 else 0.0


@njit(cache=True, parallel=True)
def _jk_kernel(ei, ej, ek, el, ev, rho, n_ao, Jp, Kp):
    """Per-chunk J/K partials (float64) from canonical packed entries."""
    m = ev.shape[0]
    nchunk = Jp.shape[0]
    per = (m + nchunk - 1) // nchunk
    for ic in prange(nchunk):
        lo = ic * per
        hi = min(m, lo + per)
        J = Jp[ic]
        K = Kp[ic]
        for e in range(lo, hi):
            i = int(ei[e])
            j = int(ej[e])
            k = int(ek[e])
            l = int(el[e])
            v = float(ev[e])
            eq_ij = i == j
            eq_kl = k == l
            eq_p = (i == k) and (j == l)
            # image (a,b,c,d): J[c,d] += v*rho[a,b]; K[a,d] += v*rho[b,c]
            J[k, l] += v * float(rho[i, j])
            K[i, l] += v * float(rho[j, k])
            if not eq_ij:
                J[k, l] += v * float(rho[j, i])
                K[j, l] += v * float(rho[i, k])
            if not eq_kl:
                J[l, k] += v * float(rho[i, j])
                K[i, k] += v * float(rho[j, l])
            if (not eq_ij) and (not eq_kl):
                J[l, k] += v * float(rho[j, i])
                K[j, k] += v * float(rho[i, l])
            if not eq_p:
                J[i, j] += v * float(rho[k, l])
                K[k, j] += v * float(rho[l, i])
                if not eq_kl:
                    J[i, j] += v * float(rho[l, k])
                    K[l, j] += v * float(rho[k, i])
                if not eq_ij:
                    J[j, i] += v * float(rho[k, l])
                    K[k, i] += v * float(rho[l, j])
                if (not eq_ij) and (not eq_kl):
                    J[j, i] += v * float(rho[l, k])
                    K[l, i] += v * float(rho[k, j])
