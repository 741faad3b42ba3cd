"""Becke-partitioned molecular quadrature grid and the B3LYP semi-local
exchange-correlation energy/potential.

The functional's semi-local mixture is
    0.08 * E_x^LSDA + 0.72 * E_x^B88 + 0.19 * E_c^VWN(RPA) + 0.81 * E_c^LYP
(the 0.20 exact-exchange fraction rides on K in the SCF driver). Pointwise
functional math always runs in float64; grid values and matrix assembly stay
in the working dtype.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import lebedev_rule

from deskdft.basis import AOBasis, CARTESIAN_COMPONENTS
from deskdft.errors import DimensionError, DeskDFTError
from deskdft.molio import Molecule

DENSITY_FLOOR = 1e-12
XC_BATCH = 8192

# Becke exchange-mixing weights; exact-exchange fraction lives in scf.fock.
W_LSDA_X = 0.08
W_B88_X = 0.72
W_VWN_C = 0.19
W_LYP_C = 0.81

# Lebedev rules with strictly positive weights only: npoints -> degree.
_LEBEDEV_DEGREE = {6: 3, 14: 5, 26: 7, 38: 9, 50: 11, 86: 15, 110: 17,
                   146: 19, 194: 23, 302: 29}

# Treutler-Ahlrichs mapping parameter xi per element (Z=1..18).
_TA_XI = (0.8, 0.9,
          1.8, 1.4, 1.3, 1.1, 0.9, 0.9, 0.9, 0.9,
          1.4, 1.3, 1.3, 1.2, 1.1, 1.0, 1.0, 1.0)

# Bragg-Slater-style atomic radii in Angstrom, used only for angular pruning.
_BRAGG_A = (0.35, 0.31,
            1.45, 1.05, 0.85, 0.70, 0.65, 0.60, 0.50, 0.38,
            1.80, 1.50, 1.25, 1.10, 1.00, 1.00, 1.00, 0.71)
_ANGSTROM = 1.8897259886

# level -> (n_rad H, n_rad heavy, angular schedule H, angular schedule heavy);
# schedules are (inner, mid, bond, far) Lebedev counts over the radial regions
# delimited by _PRUNE_BOUNDS * R_bragg
_LEVELS = {
    0: (18, 20, (14, 26, 26, 14), (14, 26, 38, 14)),
    1: (18, 30, (14, 26, 50, 26), (26, 50, 86, 26)),
    2: (30, 45, (26, 50, 146, 86), (38, 86, 194, 110)),
    3: (50, 65, (38, 110, 302, 302), (50, 146, 302, 302)),
}
_PRUNE_BOUNDS = (0.30, 0.60, 3.0)  # fractions of the Bragg radius
_FAR_MIN_BOHR = 4.0  # far tier never starts inside real valence density


@dataclass(frozen=True)
class Grid:
    """Molecular quadrature points (Bohr) and Becke-partitioned weights."""

    points: np.ndarray   # (npts, 3)
    weights: np.ndarray  # (npts,)
    level: int

    @property
    def n_points(self) -> int:
        return int(self.points.shape[0])


@dataclass(frozen=True)
class AOGridValues:
    phi: np.ndarray       # (npts, n_ao)
    grad_phi: np.ndarray  # (3, npts, n_ao)


@dataclass(frozen=True)
class XCResult:
    E_xc: float
    V_xc: np.ndarray


def _radial_ta(n: int, xi: float) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Chebyshev (2nd kind) nodes under the Treutler-Ahlrichs M4 map."""
    i = np.arange(1, n + 1)
    theta = i * np.pi / (n + 1)
    x = np.cos(theta)
    # plain-integral Gauss-Chebyshev-2 rule: weight sin^2 / weight-function sin
    w = np.pi / (n + 1) * np.sin(theta)
    ln2 = math.log(2.0)
    a = 0.6
    opx = 1.0 + x
    lnt = np.log(2.0 / (1.0 - x))
    r = (xi / ln2) * opx ** a * lnt
    dr = (xi / ln2) * opx ** a * (a * lnt / opx + 1.0 / (1.0 - x))
    return r[::-1], (w * dr)[::-1]


def _angular(npts: int) -> tuple[np.ndarray, np.ndarray]:
    deg = _LEBEDEV_DEGREE[npts]
    pts, w = lebedev_rule(deg)
    return pts.T.copy(), w.copy()


def _becke_weights(centers: np.ndarray, points: np.ndarray, owner: np.ndarray) -> np.ndarray:
    """Becke cell weights (3 smoothing iterations, no size adjustment)."""
    from deskdft._kernels import _becke_kernel

    natom = centers.shape[0]
    if natom == 1:
        return np.ones(points.shape[0])
    inv_rij = np.linalg.norm(centers[:, None, :] - centers[None, :, :], axis=2)
    np.fill_diagonal(inv_rij, 1.0)
    inv_rij = 1.0 / inv_rij
    np.fill_diagonal(inv_rij, 0.0)
    out = np.empty(points.shape[0])
    _becke_kernel(centers, inv_rij, np.ascontiguousarray(points), owner, out)
    return out


def build_grid(m: Molecule, level: int = 1) -> Grid:
    """Per-atom radial x Lebedev product grids with Becke partition weights."""
    if level not in _LEVELS:
        raise DeskDFTError(f"unsupported grid level {level}; choose from {sorted(_LEVELS)}")
    n_rad_h, n_rad_heavy, sched_h, sched_heavy = _LEVELS[level]
    pts_list, w_list, owner_list = [], [], []
    for ia, z in enumerate(m.atomic_numbers):
        n_rad = n_rad_h if z <= 2 else n_rad_heavy
        ang_sched = sched_h if z <= 2 else sched_heavy
        xi = _TA_XI[z - 1]
        r, wr = _radial_ta(n_rad, xi)
        r_atom = _BRAGG_A[z - 1] * _ANGSTROM
        ang_cache = {}
        for ir in range(n_rad):
            if r[ir] < _PRUNE_BOUNDS[0] * r_atom:
                nang = ang_sched[0]
            elif r[ir] < _PRUNE_BOUNDS[1] * r_atom:
                nang = ang_sched[1]
            elif r[ir] < max(_PRUNE_BOUNDS[2] * r_atom, _FAR_MIN_BOHR):
                nang = ang_sched[2]
            else:
                nang = ang_sched[3]
            if nang not in ang_cache:
                ang_cache[nang] = _angular(nang)
            apts, aw = ang_cache[nang]
            pts_list.append(m.positions[ia] + r[ir] * apts)
            w_list.append(wr[ir] * r[ir] ** 2 * aw)
            owner_list.append(np.full(len(aw), ia, dtype=np.int32))
    points = np.vstack(pts_list)
    weights = np.concatenate(w_list)
    owner = np.concatenate(owner_list)
    weights = weights * _becke_weights(np.ascontiguousarray(m.positions), points, owner)
    neg = weights < 0.0
    if neg.any():
        if float(np.abs(weights[neg]).max()) > 1e-14:
            raise DeskDFTError("negative quadrature weight beyond numerical noise")
        weights = np.where(neg, 0.0, weights)
    points.setflags(write=False)
    weights.setflags(write=False)
    return Grid(points=points, weights=weights, level=level)


def eval_ao(ao: AOBasis, g: Grid, dtype=np.float64) -> AOGridValues:
    """AO values and Cartesian gradients on the grid."""
    dtype = np.dtype(dtype)
    npts = g.n_points
    phi = np.zeros((npts, ao.n_ao), dtype=dtype)
    grad = np.zeros((3, npts, ao.n_ao), dtype=dtype)
    pts = g.points
    for isp in range(ao.n_shells):
        l = int(ao.shell_l[isp])
        off = int(ao.ao_offsets[isp])
        p0 = int(ao.prim_start[isp])
        pc = int(ao.prim_count[isp])
        exps = ao.prim_exp[p0:p0 + pc]
        rel = pts - ao.shell_center[isp]
        r2 = np.einsum("pd,pd->p", rel, rel)
        eg = np.exp(-np.outer(r2, exps))            # (npts, nprim)
        for c, (lx, ly, lz) in enumerate(CARTESIAN_COMPONENTS[l]):
            coefs = ao.prim_coef[p0:p0 + pc, c]
            base = eg @ coefs                         # sum_p c_p exp(...)
            dbase = eg @ (coefs * (-2.0 * exps))      # d/d(r2) prefactor
            poly = rel[:, 0] ** lx * rel[:, 1] ** ly * rel[:, 2] ** lz
            phi[:, off + c] = poly * base
            for d, ld in enumerate((lx, ly, lz)):
                dpoly = 0.0
                if ld > 0:
                    dpoly = ld * rel[:, 0] ** (lx - (d == 0)) \
                        * rel[:, 1] ** (ly - (d == 1)) \
                        * rel[:, 2] ** (lz - (d == 2))
                grad[d, :, off + c] = dpoly * base + poly * rel[:, d] * dbase
    return AOGridValues(phi=phi, grad_phi=grad)


# ---------------------------------------------------------------------------
# B3LYP semi-local functional (restricted / spin-unpolarized), float64 math.

_CX_LSDA = 0.75 * (3.0 / math.pi) ** (1.0 / 3.0)          # f = -CX * n^(4/3)
_CX_SPIN = 1.5 * (3.0 / (4.0 * math.pi)) ** (1.0 / 3.0)   # per-spin prefactor
_B88_BETA = 0.0042
_VWN_A, _VWN_B, _VWN_C, _VWN_X0 = 0.0310907, 13.0720, 42.7198, -0.409286
_LYP_A, _LYP_B, _LYP_C, _LYP_D = 0.04918, 0.132, 0.2533, 0.349
_CF = 0.3 * (3.0 * math.pi ** 2) ** (2.0 / 3.0)


def _lsda_x(n):
    ex = -_CX_LSDA * np.cbrt(n)        # per particle
    vrho = (4.0 / 3.0) * ex
    return ex * n, vrho


def _b88_x(n, sigma):
    """Full B88 exchange (LSDA part included), closed-shell. Returns (f, vrho, vsigma)."""
    ns = 0.5 * n
    ss = 0.25 * sigma
    t = np.cbrt(ns)
    t4 = t ** 4
    x = np.sqrt(ss) / t4
    a = np.arcsinh(x)
    d = 1.0 + 6.0 * _B88_BETA * x * a
    dp = 6.0 * _B88_BETA * (a + x / np.sqrt(1.0 + x * x))
    g = _CX_SPIN + _B88_BETA * x * x / d
    fs = -t4 * g
    # d fs / d ns at fixed sigma_s
    dgdx = _B88_BETA * (2.0 * x * d - x * x * dp) / (d * d)
    dfs_dns = -(4.0 / 3.0) * t * g + t4 * dgdx * (4.0 / 3.0) * x / ns
    # d fs / d sigma_s, sigma-free form: -beta t^-4 (2d - x dp) / (2 d^2)
    dfs_dss = -_B88_BETA * (2.0 * d - x * dp) / (2.0 * d * d * t4)
    f = 2.0 * fs
    vrho = dfs_dns
    vsigma = 0.5 * dfs_dss
    return f, vrho, vsigma


def _vwn_c(n):
    """VWN correlation, RPA-fit parameters, paramagnetic (unpolarized)."""
    A, b, c, x0 = _VWN_A, _VWN_B, _VWN_C, _VWN_X0
    rs = np.cbrt(3.0 / (4.0 * math.pi * n))
    x = np.sqrt(rs)
    X = rs + b * x + c
    X0 = x0 * x0 + b * x0 + c
    Q = math.sqrt(4.0 * c - b * b)
    atn = np.arctan(Q / (2.0 * x + b))
    ec = A * (np.log(x * x / X) + (2.0 * b / Q) * atn
              - (b * x0 / X0) * (np.log((x - x0) ** 2 / X) + (2.0 * (b + 2.0 * x0) / Q) * atn))
    dec_dx = A * (2.0 / x - 2.0 * (x + b) / X
                  - (b * x0 / X0) * (2.0 / (x - x0) - 2.0 * (x + b + x0) / X))
    dec_drs = dec_dx / (2.0 * x)
    vrho = ec - (rs / 3.0) * dec_drs
    return ec * n, vrho


def _lyp_c(n, sigma):
    """LYP correlation, closed shell (Miehlich form reduced to n, sigma)."""
    a, b, c, d = _LYP_A, _LYP_B, _LYP_C, _LYP_D
    t = n ** (-1.0 / 3.0)
    X = 1.0 + d * t
    w = t ** 11 * np.exp(-c * t) / X
    delta = t * (c + d / X)
    n143 = n ** 4 * np.cbrt(n * n)  # n^(14/3)
    f = -a * n / X - a * b * w * _CF * n143 + a * b * w * n * n * sigma * (3.0 + 7.0 * delta) / 72.0
    vsigma = a * b * w * n * n * (3.0 + 7.0 * delta) / 72.0
    tp = -t / (3.0 * n)  # dt/dn
    wp_over_w = tp * (11.0 / t - c - d / X)
    wp = w * wp_over_w
    deltap = tp * (c + d / X - d * d * t / (X * X))
    vrho = (-a / X + a * n * d * tp / (X * X)
            - a * b * _CF * (wp * n143 + w * (14.0 / 3.0) * n143 / n)
            + (a * b * sigma / 72.0) * (wp * n * n * (3.0 + 7.0 * delta)
                                        + 2.0 * n * w * (3.0 + 7.0 * delta)
                                        + 7.0 * w * n * n * deltap))
    return f, vrho, vsigma


def b3lyp(rho_grid: np.ndarray, sigma: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Semi-local B3LYP at given density n and |grad n|^2.

    Returns per-particle exc plus vrho = d(n*exc)/dn and vsigma = d(n*exc)/dsigma,
    zero where n is below the density floor.
    """
    n_in = np.asarray(rho_grid)
    if n_in.shape != np.asarray(sigma).shape:
        raise DimensionError("rho/sigma shape mismatch")
    out_dtype = n_in.dtype if n_in.dtype in (np.float32, np.float64) else np.float64
    n = np.maximum(np.asarray(rho_grid, dtype=np.float64), 0.0)
    s = np.maximum(np.asarray(sigma, dtype=np.float64), 0.0)
    live = n >= DENSITY_FLOOR
    exc = np.zeros(n.shape)
    vrho = np.zeros(n.shape)
    vsigma = np.zeros(n.shape)
    if live.any():
        nl = n[live]
        sl = s[live]
        f0, vr0 = _lsda_x(nl)
        f1, vr1, vs1 = _b88_x(nl, sl)
        f2, vr2 = _vwn_c(nl)
        f3, vr3, vs3 = _lyp_c(nl, sl)
        ftot = W_LSDA_X * f0 + W_B88_X * f1 + W_VWN_C * f2 + W_LYP_C * f3
        exc[live] = ftot / nl
        vrho[live] = W_LSDA_X * vr0 + W_B88_X * vr1 + W_VWN_C * vr2 + W_LYP_C * vr3
        vsigma[live] = W_B88_X * vs1 + W_LYP_C * vs3
    if not (np.all(np.isfinite(exc)) and np.all(np.isfinite(vrho)) and np.all(np.isfinite(vsigma))):
        raise DeskDFTError("non-finite functional output (density underflow mishandled)")
    return exc.astype(out_dtype), vrho.astype(out_dtype), vsigma.astype(out_dtype)


def density_on_grid(aov: AOGridValues, rho: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Electron density and its gradient on the grid from a symmetric rho."""
    phi = aov.phi
    t = phi @ rho                      # (npts, N)
    n = np.einsum("pi,pi->p", t, phi)
    gn = np.empty((3, phi.shape[0]), dtype=phi.dtype)
    for d in range(3):
        gn[d] = 2.0 * np.einsum("pi,pi->p", aov.grad_phi[d], t)
    return n, gn


def xc_matrix(g: Grid, aov: AOGridValues, rho: np.ndarray) -> XCResult:
    """Semi-local XC energy and symmetric potential matrix on the grid."""
    n_ao = aov.phi.shape[1]
    if rho.shape != (n_ao, n_ao):
        raise DimensionError(f"rho shape {rho.shape} does not match n_ao={n_ao}")
    dtype = aov.phi.dtype
    npts = g.n_points
    V = np.zeros((n_ao, n_ao), dtype=np.float64)
    e_acc = 0.0
    w_all = g.weights
    for lo in range(0, npts, XC_BATCH):
        hi = min(npts, lo + XC_BATCH)
        phi = aov.phi[lo:hi]
        gphi = aov.grad_phi[:, lo:hi, :]
        w = w_all[lo:hi].astype(dtype)
        t = phi @ rho
        n = np.einsum("pi,pi->p", t, phi)
        gn = np.empty((3, hi - lo), dtype=dtype)
        for d in range(3):
            gn[d] = 2.0 * np.einsum("pi,pi->p", gphi[d], t)
        sig = gn[0] ** 2 + gn[1] ** 2 + gn[2] ** 2
        exc, vrho, vsigma = b3lyp(n, sig)
        e_acc += float(np.sum(w_all[lo:hi] * np.asarray(n, dtype=np.float64)
                              * np.asarray(exc, dtype=np.float64)))
        wv = (0.5 * w * vrho)[:, None] * phi
        gext = 2.0 * w * vsigma
        for d in range(3):
            wv += (gext * gn[d])[:, None] * gphi[d]
        V += (phi.T @ wv).astype(np.float64)
    V = V + V.T
    return XCResult(E_xc=e_acc, V_xc=V.astype(dtype))
