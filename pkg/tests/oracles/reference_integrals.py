"""Independent Gaussian-integral reference: Taketa-Huzinaga-O-ohata closed-form
summation formulas (explicit binomial expansions, no Hermite recurrences),
with the Boys function from mpmath's incomplete gamma.

Deliberately slow, loop-based, and structurally unrelated to the engine's
McMurchie-Davidson kernels; agreement between the two is the point.
"""

from __future__ import annotations

import math

import mpmath
import numpy as np

from deskdft.basis import AOBasis, CARTESIAN_COMPONENTS


def _fact(n: int) -> int:
    return math.factorial(n)


def _binom(n: int, k: int) -> int:
    return math.comb(n, k)


def _dfact(n: int) -> float:
    if n <= 0:
        return 1.0
    out = 1.0
    while n > 1:
        out *= n
        n -= 2
    return out


def boys(m: int, x: float) -> float:
    """F_m(x) = int_0^1 t^(2m) exp(-x t^2) dt via the lower incomplete gamma."""
    if x < 1e-14:
        return 1.0 / (2 * m + 1)
    xm = mpmath.mpf(x)
    val = 0.5 * mpmath.gammainc(m + 0.5, 0, xm) / xm ** (m + 0.5)
    return float(val)


def _f_poly(j: int, l: int, m: int, a: float, b: float) -> float:
    """Coefficient of x^j in (x+a)^l (x+b)^m."""
    s = 0.0
    for k in range(max(0, j - m), min(j, l) + 1):
        s += _binom(l, k) * _binom(m, j - k) * a ** (l - k) * b ** (m - j + k)
    return s


def _overlap_1d(l1: int, l2: int, pa: float, pb: float, gamma: float) -> float:
    s = 0.0
    for i in range((l1 + l2) // 2 + 1):
        s += _f_poly(2 * i, l1, l2, pa, pb) * _dfact(2 * i - 1) / (2 * gamma) ** i
    return s * math.sqrt(math.pi / gamma)


def overlap_prim(a, la, A, b, lb, B) -> float:
    gamma = a + b
    P = (a * np.asarray(A) + b * np.asarray(B)) / gamma
    rab2 = float(np.sum((np.asarray(A) - np.asarray(B)) ** 2))
    pre = math.exp(-a * b * rab2 / gamma)
    out = pre
    for d in range(3):
        out *= _overlap_1d(la[d], lb[d], P[d] - A[d], P[d] - B[d], gamma)
    return out


def kinetic_prim(a, la, A, b, lb, B) -> float:
    lx, ly, lz = lb
    term = b * (2 * (lx + ly + lz) + 3) * overlap_prim(a, la, A, b, lb, B)
    term += -2.0 * b * b * (
        overlap_prim(a, la, A, b, (lx + 2, ly, lz), B)
        + overlap_prim(a, la, A, b, (lx, ly + 2, lz), B)
        + overlap_prim(a, la, A, b, (lx, ly, lz + 2), B))
    if lx >= 2:
        term += -0.5 * lx * (lx - 1) * overlap_prim(a, la, A, b, (lx - 2, ly, lz), B)
    if ly >= 2:
        term += -0.5 * ly * (ly - 1) * overlap_prim(a, la, A, b, (lx, ly - 2, lz), B)
    if lz >= 2:
        term += -0.5 * lz * (lz - 1) * overlap_prim(a, la, A, b, (lx, ly, lz - 2), B)
    return term


def _a_array(l1, l2, pa, pb, pc, gamma):
    """THO A_{l,r,i} coefficients collected by Boys order contribution."""
    out = []
    for l in range(l1 + l2 + 1):
        fl = _f_poly(l, l1, l2, pa, pb)
        for r in range(l // 2 + 1):
            for i in range((l - 2 * r) // 2 + 1):
                num = ((-1) ** l) * fl * ((-1) ** i) * _fact(l) \
                    * pc ** (l - 2 * r - 2 * i) * (0.25 / gamma) ** (r + i)
                den = _fact(r) * _fact(i) * _fact(l - 2 * r - 2 * i)
                out.append((l - 2 * r - i, num / den))
    return out


def nuclear_prim(a, la, A, b, lb, B, C, Z) -> float:
    gamma = a + b
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    C = np.asarray(C, dtype=float)
    P = (a * A + b * B) / gamma
    rab2 = float(np.sum((A - B) ** 2))
    rcp2 = float(np.sum((C - P) ** 2))
    ax = _a_array(la[0], lb[0], P[0] - A[0], P[0] - B[0], P[0] - C[0], gamma)
    ay = _a_array(la[1], lb[1], P[1] - A[1], P[1] - B[1], P[1] - C[1], gamma)
    az = _a_array(la[2], lb[2], P[2] - A[2], P[2] - B[2], P[2] - C[2], gamma)
    s = 0.0
    for (i, va) in ax:
        for (j, vb) in ay:
            for (k, vc) in az:
                s += va * vb * vc * boys(i + j + k, gamma * rcp2)
    return -Z * (2.0 * math.pi / gamma) * math.exp(-a * b * rab2 / gamma) * s


def _b0(i, r, g):
    return (_fact(i) / _fact(r) / _fact(i - 2 * r)) * (4 * g) ** (r - i)


def _fb(i, l1, l2, p, a, b, r, g):
    return _f_poly(i, l1, l2, p - a, p - b) * _b0(i, r, g)


def _b_term(i1, i2, r1, r2, u, l1, l2, l3, l4, px, ax, bx, qx, cx, dx, g1, g2, delta):
    return (_fb(i1, l1, l2, px, ax, bx, r1, g1)
            * (-1) ** i2 * _fb(i2, l3, l4, qx, cx, dx, r2, g2)
            * (-1) ** u * (_fact(i1 + i2 - 2 * (r1 + r2)) / _fact(u)
                           / _fact(i1 + i2 - 2 * (r1 + r2) - 2 * u))
            * (qx - px) ** (i1 + i2 - 2 * (r1 + r2) - 2 * u)
            / delta ** (i1 + i2 - 2 * (r1 + r2) - u))


def _b_array(l1, l2, l3, l4, p, a, b, q, c, d, g1, g2, delta):
    imax = l1 + l2 + l3 + l4 + 1
    out = [0.0] * imax
    for i1 in range(l1 + l2 + 1):
        for i2 in range(l3 + l4 + 1):
            for r1 in range(i1 // 2 + 1):
                for r2 in range(i2 // 2 + 1):
                    for u in range((i1 + i2) // 2 - r1 - r2 + 1):
                        i = i1 + i2 - 2 * (r1 + r2) - u
                        out[i] += _b_term(i1, i2, r1, r2, u, l1, l2, l3, l4,
                                          p, a, b, q, c, d, g1, g2, delta)
    return out


def eri_prim(a, la, A, b, lb, B, c, lc, C, d, ld, D) -> float:
    A, B, C, D = (np.asarray(v, dtype=float) for v in (A, B, C, D))
    g1 = a + b
    g2 = c + d
    P = (a * A + b * B) / g1
    Q = (c * C + d * D) / g2
    rab2 = float(np.sum((A - B) ** 2))
    rcd2 = float(np.sum((C - D) ** 2))
    rpq2 = float(np.sum((P - Q) ** 2))
    delta = 0.25 / g1 + 0.25 / g2
    bx = _b_array(la[0], lb[0], lc[0], ld[0], P[0], A[0], B[0], Q[0], C[0], D[0], g1, g2, delta)
    by = _b_array(la[1], lb[1], lc[1], ld[1], P[1], A[1], B[1], Q[1], C[1], D[1], g1, g2, delta)
    bz = _b_array(la[2], lb[2], lc[2], ld[2], P[2], A[2], B[2], Q[2], C[2], D[2], g1, g2, delta)
    s = 0.0
    for i in range(len(bx)):
        for j in range(len(by)):
            for k in range(len(bz)):
                s += bx[i] * by[j] * bz[k] * boys(i + j + k, 0.25 * rpq2 / delta)
    return (2.0 * math.pi ** 2.5 / (g1 * g2 * math.sqrt(g1 + g2))
            * math.exp(-a * b * rab2 / g1) * math.exp(-c * d * rcd2 / g2) * s)


def _ao_plan(ao: AOBasis):
    """Per-AO primitive lists: (exponent, effective coefficient, powers, center)."""
    plan = []
    for isp in range(ao.n_shells):
        l = int(ao.shell_l[isp])
        p0 = int(ao.prim_start[isp])
        pc = int(ao.prim_count[isp])
        for comp, powers in enumerate(CARTESIAN_COMPONENTS[l]):
            prims = [(float(ao.prim_exp[p0 + ip]), float(ao.prim_coef[p0 + ip, comp]))
                     for ip in range(pc)]
            plan.append((prims, powers, ao.shell_center[isp]))
    return plan


def reference_stv(ao: AOBasis, atom_coords, atom_charges):
    """Contracted S, T, V matrices via the THO formulas."""
    plan = _ao_plan(ao)
    n = ao.n_ao
    S = np.zeros((n, n))
    T = np.zeros((n, n))
    V = np.zeros((n, n))
    for i in range(n):
        pi, li, Ai = plan[i]
        for j in range(i + 1):
            pj, lj, Aj = plan[j]
            s = t = v = 0.0
            for (a, ca) in pi:
                for (b, cb) in pj:
                    cc = ca * cb
                    s += cc * overlap_prim(a, li, Ai, b, lj, Aj)
                    t += cc * kinetic_prim(a, li, Ai, b, lj, Aj)
                    for R, Z in zip(atom_coords, atom_charges):
                        v += cc * nuclear_prim(a, li, Ai, b, lj, Aj, R, Z)
            S[i, j] = S[j, i] = s
            T[i, j] = T[j, i] = t
            V[i, j] = V[j, i] = v
    return S, T, V


def reference_eri_dense(ao: AOBasis) -> np.ndarray:
    """Full dense ERI tensor via the THO formulas (tiny systems only)."""
    plan = _ao_plan(ao)
    n = ao.n_ao
    out = np.zeros((n, n, n, n))
    for i in range(n):
        for j in range(i + 1):
            ij = i * (i + 1) // 2 + j
            for k in range(n):
                for l in range(k + 1):
                    kl = k * (k + 1) // 2 + l
                    if kl > ij:
                        continue
                    pi, li, Ai = plan[i]
                    pj, lj, Aj = plan[j]
                    pk, lk, Ak = plan[k]
                    pl, ll, Al = plan[l]
                    val = 0.0
                    for (a, ca) in pi:
                        for (b, cb) in pj:
                            for (c, cc_) in pk:
                                for (d, cd) in pl:
                                    val += ca * cb * cc_ * cd * eri_prim(
                                        a, li, Ai, b, lj, Aj, c, lk, Ak, d, ll, Al)
                    for (w, x, y, z) in ((i, j, k, l), (j, i, k, l), (i, j, l, k), (j, i, l, k),
                                         (k, l, i, j), (l, k, i, j), (k, l, j, i), (l, k, j, i)):
                        out[w, x, y, z] = val
    return out
