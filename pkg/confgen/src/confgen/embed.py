"""Built-in distance-geometry embedder (fallback when rdkit is absent).

Pipeline per conformer: distance-bounds matrix from the bonded graph
(bond-length table, 1-3 via ideal angles, 1-4 via cis/trans estimates,
vdW floors beyond), triangle smoothing, seeded random distance sampling,
metric-matrix embedding, then L-BFGS refinement of bound violations.
Hydrogens are placed analytically on the refined heavy-atom skeleton.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.optimize import minimize

from confgen.smiles import MolGraph

# bond lengths in Angstrom by (elements sorted, order); aromatic handled apart
_BOND = {
    ("C", "C", 1): 1.53, ("C", "C", 2): 1.34, ("C", "C", 3): 1.20,
    ("C", "N", 1): 1.47, ("C", "N", 2): 1.28, ("C", "N", 3): 1.15,
    ("C", "O", 1): 1.43, ("C", "O", 2): 1.21,
    ("C", "F", 1): 1.35,
    ("N", "N", 1): 1.45, ("N", "N", 2): 1.25, ("N", "N", 3): 1.10,
    ("N", "O", 1): 1.40, ("N", "O", 2): 1.21,
    ("O", "O", 1): 1.45,
    ("F", "N", 1): 1.40, ("F", "O", 1): 1.42, ("F", "F", 1): 1.42,
}
_AROM_BOND = {("C", "C"): 1.39, ("C", "N"): 1.34, ("C", "O"): 1.36,
              ("N", "N"): 1.32, ("N", "O"): 1.36, ("O", "O"): 1.40}
_H_BOND = {"C": 1.09, "N": 1.01, "O": 0.96, "F": 0.92}
_VDW = {"C": 1.70, "N": 1.55, "O": 1.52, "F": 1.47, "H": 1.10}


def _bond_length(g: MolGraph, bd) -> float:
    ea, eb = g.atoms[bd.a].element, g.atoms[bd.b].element
    if bd.aromatic:
        return _AROM_BOND.get(tuple(sorted((ea, eb))), 1.39)
    key = tuple(sorted((ea, eb))) + (bd.order,)
    if key in _BOND:
        return _BOND[key]
    return _BOND.get(tuple(sorted((ea, eb))) + (1,), 1.50)


def _hybridization(g: MolGraph, i: int) -> int:
    """3 = sp3, 2 = sp2, 1 = sp."""
    orders = [bd.order for _, bd in g.neighbors(i)]
    if g.atoms[i].aromatic:
        return 2
    if 3 in orders or orders.count(2) >= 2:
        return 1
    if 2 in orders:
        return 2
    return 3


def _ideal_angle(hyb: int) -> float:
    return {3: math.radians(109.47), 2: math.radians(120.0), 1: math.pi}[hyb]


def _graph_paths(g: MolGraph):
    """All-pairs shortest paths (few dozen atoms; BFS per atom)."""
    n = g.n_heavy
    adj = [[] for _ in range(n)]
    for bd in g.bonds:
        adj[bd.a].append(bd.b)
        adj[bd.b].append(bd.a)
    dist = np.full((n, n), 99, dtype=int)
    for s in range(n):
        dist[s, s] = 0
        queue = [s]
        while queue:
            new = []
            for u in queue:
                for v in adj[u]:
                    if dist[s, v] > dist[s, u] + 1:
                        dist[s, v] = dist[s, u] + 1
                        new.append(v)
            queue = new
    return adj, dist


def _bounds(g: MolGraph) -> tuple[np.ndarray, np.ndarray]:
    n = g.n_heavy
    lo = np.zeros((n, n))
    hi = np.full((n, n), 999.0)
    blen = {}
    for bd in g.bonds:
        d = _bond_length(g, bd)
        blen[(bd.a, bd.b)] = blen[(bd.b, bd.a)] = d
        lo[bd.a, bd.b] = lo[bd.b, bd.a] = d - 0.01
        hi[bd.a, bd.b] = hi[bd.b, bd.a] = d + 0.01
    adj, gdist = _graph_paths(g)

    # 1-3 from ideal angles at the middle atom
    for j in range(n):
        ang = _ideal_angle(_hybridization(g, j))
        nbrs = adj[j]
        for x in range(len(nbrs)):
            for y in range(x + 1, len(nbrs)):
                a, c = nbrs[x], nbrs[y]
                d1, d2 = blen[(j, a)], blen[(j, c)]
                d13 = math.sqrt(d1 * d1 + d2 * d2 - 2 * d1 * d2 * math.cos(ang))
                lo[a, c] = lo[c, a] = max(lo[a, c], d13 * 0.94)
                hi[a, c] = hi[c, a] = min(hi[a, c], d13 * 1.06)

    # 1-4 cis/trans estimates along each bond path a-b-c-d
    for bd in g.bonds:
        b, c = bd.a, bd.b
        for a in adj[b]:
            if a == c:
                continue
            for d in adj[c]:
                if d == b or d == a:
                    continue
                if gdist[a, d] != 3:
                    continue
                dab, dbc, dcd = blen[(a, b)], blen[(b, c)], blen[(c, d)]
                th_b = _ideal_angle(_hybridization(g, b))
                th_c = _ideal_angle(_hybridization(g, c))
                pa = np.array([dab * math.cos(th_b), dab * math.sin(th_b), 0.0])
                pc = np.array([dbc, 0.0, 0.0])
                dir_cis = np.array([dbc - dcd * math.cos(th_c), dcd * math.sin(th_c), 0.0])
                dir_trans = np.array([dbc - dcd * math.cos(th_c), -dcd * math.sin(th_c), 0.0])
                d_cis = float(np.linalg.norm(dir_cis - pa))
                d_trans = float(np.linalg.norm(dir_trans - pa))
                lo[a, d] = lo[d, a] = max(lo[a, d] if lo[a, d] > 0 else 0.0,
                                          min(d_cis, d_trans) * 0.80)
                hi[a, d] = hi[d, a] = min(hi[a, d], max(d_cis, d_trans) * 1.06)

    # vdW floors for distant pairs
    for i in range(n):
        for j in range(i + 1, n):
            if gdist[i, j] >= 4 and lo[i, j] == 0.0:
                vdw = 0.80 * (_VDW[g.atoms[i].element] + _VDW[g.atoms[j].element])
                lo[i, j] = lo[j, i] = vdw

    # triangle smoothing
    for k in range(n):
        hik = hi[:, k][:, None] + hi[k, :][None, :]
        np.minimum(hi, hik, out=hi)
    for k in range(n):
        lik = np.maximum(lo[:, k][:, None] - hi[k, :][None, :],
                         lo[k, :][None, :] - hi[:, k][:, None])
        np.maximum(lo, lik, out=lo)
    bad = lo > hi
    if bad.any():
        mid = 0.5 * (lo + hi)
        lo = np.where(bad, mid * 0.95, lo)
        hi = np.where(bad, mid * 1.05, hi)
    np.fill_diagonal(lo, 0.0)
    np.fill_diagonal(hi, 0.0)
    return lo, hi


def _embed_distances(D: np.ndarray) -> np.ndarray:
    """Classical metric-matrix embedding into 3D."""
    n = D.shape[0]
    D2 = D * D
    J = np.eye(n) - np.ones((n, n)) / n
    B = -0.5 * J @ D2 @ J
    w, U = np.linalg.eigh(B)
    idx = np.argsort(w)[::-1][:3]
    lam = np.clip(w[idx], 0.0, None)
    X = U[:, idx] * np.sqrt(lam)[None, :]
    if X.shape[1] < 3:
        X = np.hstack([X, np.zeros((n, 3 - X.shape[1]))])
    return X


def _violation_energy(x: np.ndarray, lo2: np.ndarray, hi2: np.ndarray, iu, jv):
    X = x.reshape(-1, 3)
    d = X[iu] - X[jv]
    d2 = np.einsum("pd,pd->p", d, d)
    over = np.maximum(d2 - hi2, 0.0) / hi2
    under = np.maximum(lo2 - d2, 0.0) / lo2
    e = float(np.sum(over ** 2) + np.sum(under ** 2))
    coef = (4.0 * over / hi2 - 4.0 * under / lo2)
    grad = np.zeros_like(X)
    gpair = coef[:, None] * d
    np.add.at(grad, iu, gpair)
    np.add.at(grad, jv, -gpair)
    return e, grad.ravel()


def embed_heavy(g: MolGraph, rng: np.random.Generator,
                max_tries: int = 8) -> np.ndarray | None:
    """Heavy-atom 3D coordinates (Angstrom) or None if embedding fails."""
    n = g.n_heavy
    if n == 1:
        return np.zeros((1, 3))
    lo, hi = _bounds(g)
    iu, jv = np.triu_indices(n, k=1)
    lo2 = np.maximum(lo[iu, jv], 0.05) ** 2
    hi2 = hi[iu, jv] ** 2
    for _ in range(max_tries):
        frac = rng.uniform(0.2, 0.8, size=len(iu))
        dsamp = lo[iu, jv] + frac * (hi[iu, jv] - lo[iu, jv])
        D = np.zeros((n, n))
        D[iu, jv] = dsamp
        D[jv, iu] = dsamp
        X = _embed_distances(D)
        X = X + rng.normal(scale=1e-3, size=X.shape)
        res = minimize(_violation_energy, X.ravel(), args=(lo2, hi2, iu, jv),
                       jac=True, method="L-BFGS-B",
                       options={"maxiter": 500, "ftol": 1e-12, "gtol": 1e-9})
        X = res.x.reshape(-1, 3)
        d = np.linalg.norm(X[iu] - X[jv], axis=1)
        viol = np.maximum(d - hi[iu, jv], 0.0) + np.maximum(lo[iu, jv] - d, 0.0)
        if viol.max() < 0.35 and d.min() > 0.80:
            return X
    return None


def _orthonormal_to(v: np.ndarray) -> np.ndarray:
    pick = np.array([1.0, 0.0, 0.0]) if abs(v[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    u = np.cross(v, pick)
    return u / np.linalg.norm(u)


def place_hydrogens(g: MolGraph, heavy: np.ndarray) -> tuple[list[str], np.ndarray]:
    """Analytic hydrogen completion on a heavy-atom skeleton.

    Returns (symbols, coords) with heavy atoms first, in graph order.
    """
    symbols = [a.element for a in g.atoms]
    coords = [heavy[i] for i in range(g.n_heavy)]
    tet = math.radians(109.47)
    for a in g.atoms:
        m = a.h_count
        if m == 0:
            continue
        center = heavy[a.index]
        dl = _H_BOND[a.element]
        nbr = [heavy[j] for j, _ in g.neighbors(a.index)]
        dirs: list[np.ndarray] = []
        if not nbr:
            # isolated heavy atom: regular arrangement (methane, ammonia, water)
            base = [np.array([1.0, 1.0, 1.0]), np.array([-1.0, -1.0, 1.0]),
                    np.array([-1.0, 1.0, -1.0]), np.array([1.0, -1.0, -1.0])]
            dirs = [b / np.linalg.norm(b) for b in base[:m]]
        else:
            units = [(p - center) / np.linalg.norm(p - center) for p in nbr]
            hyb = _hybridization(g, a.index)
            if len(units) == 1:
                u = units[0]
                perp = _orthonormal_to(u)
                if hyb == 1:
                    dirs = [-u]
                else:
                    ang = _ideal_angle(hyb)
                    first = u * math.cos(ang) + perp * math.sin(ang)
                    dirs = [first]
                    if m >= 2:
                        # remaining H: rotate about u
                        perp2 = np.cross(u, perp)
                        step = 2 * math.pi / (m if hyb == 2 else 3)
                        dirs = []
                        for k in range(m):
                            phi = k * step
                            pp = perp * math.cos(phi) + perp2 * math.sin(phi)
                            dirs.append(u * math.cos(ang) + pp * math.sin(ang))
            elif len(units) == 2:
                bisec = -(units[0] + units[1])
                nb = np.linalg.norm(bisec)
                bisec = bisec / nb if nb > 1e-8 else _orthonormal_to(units[0])
                if hyb == 2 or m == 1:
                    dirs = [bisec]
                    if m == 2:  # strained sp2; fall through to out-of-plane pair
                        hyb = 3
                if hyb == 3 and m >= 1:
                    axis = np.cross(units[0], units[1])
                    na = np.linalg.norm(axis)
                    axis = axis / na if na > 1e-8 else _orthonormal_to(units[0])
                    half = 0.5 * tet
                    dirs = [bisec * math.cos(half) + axis * math.sin(half)]
                    if m >= 2:
                        dirs.append(bisec * math.cos(half) - axis * math.sin(half))
            else:
                s = -np.sum(units, axis=0)
                ns = np.linalg.norm(s)
                dirs = [s / ns if ns > 1e-8 else _orthonormal_to(units[0])]
        for k in range(m):
            d = dirs[k % len(dirs)]
            symbols.append("H")
            coords.append(center + dl * d)
    return symbols, np.asarray(coords)
