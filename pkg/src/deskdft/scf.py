"""Self-consistent field driver: Fock assembly, the generalized eigenproblem,
DIIS-accelerated iteration, and HOMO/LUMO/gap extraction.

Restricted closed-shell B3LYP only. Non-convergence is reported in-band via
SCFResult.converged; the convergence test is std(last 5 energies) below
SCFOptions.convergence_std, evaluated on the recorded energy history.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from deskdft.basis import BasisSet, expand
from deskdft.constants import HARTREE_TO_EV
from deskdft.errors import DeskDFTError, DimensionError, MoleculeError
from deskdft.integrals import IntegralSet, build_jk, eri_packed, one_electron
from deskdft.molio import Molecule, electron_count, nuclear_repulsion
from deskdft.xc import build_grid, eval_ao, xc_matrix

EXACT_EXCHANGE_FRACTION = 0.20  # B3LYP hybrid a_x, applied to K at Fock assembly
LINDEP_THRESHOLD = 1e-7
DIIS_COND_MAX = 1e12


@dataclass(frozen=True)
class OrbitalSolution:
    C: np.ndarray        # (N, M) coefficients, M <= N after linear-dependence drop
    epsilon: np.ndarray  # (M,) orbital energies, ascending
    n_occ: int


@dataclass(frozen=True)
class SCFResult:
    solution: OrbitalSolution
    E_total: float
    E_components: dict[str, float]
    energy_history: list[float]
    converged: bool
    iterations: int
    n_ao: int


@dataclass
class SCFOptions:
    max_iterations: int = 50
    convergence_std: float = 0.01      # Hartree; tighter 1e-6 available
    diis_history: int = 8
    precision: str = "f64"             # "f32" | "f64"
    damping_factor: float = 0.5        # pre-DIIS density mixing
    grid_level: int = 1
    screen_eps: float = 1e-12
    diis_start: int = 3                # iteration index at which DIIS takes over

    def __post_init__(self):
        if self.max_iterations < 5:
            raise DeskDFTError("max_iterations must be >= 5 (convergence window needs 5 energies)")
        if self.precision not in ("f32", "f64"):
            raise DeskDFTError(f"precision must be 'f32' or 'f64', got {self.precision!r}")

    @property
    def dtype(self):
        return np.float32 if self.precision == "f32" else np.float64


def density(sol: OrbitalSolution) -> np.ndarray:
    """rho = 2 C_occ C_occ^T (doubly occupied restricted orbitals)."""
    if sol.n_occ > sol.C.shape[1]:
        raise DimensionError(
            f"n_occ={sol.n_occ} exceeds {sol.C.shape[1]} orbitals (basis too small)")
    cocc = sol.C[:, :sol.n_occ]
    return 2.0 * cocc @ cocc.T


def fock(ints: IntegralSet, J: np.ndarray, K: np.ndarray, Vxc: np.ndarray) -> np.ndarray:
    """F = V + T + J + a_x K + V_xc; K already carries its -1/2 factor."""
    n = ints.n_ao
    for name, mat in (("J", J), ("K", K), ("Vxc", Vxc)):
        if mat.shape != (n, n):
            raise DimensionError(f"{name} shape {mat.shape} != ({n}, {n})")
    return ints.V + ints.T + J + EXACT_EXCHANGE_FRACTION * K + Vxc


def solve_roothaan(F: np.ndarray, S: np.ndarray, n_occ: int = 0) -> OrbitalSolution:
    """Canonical orthogonalization, dropping eigenpairs with s < 1e-7."""
    s, U = scipy.linalg.eigh(S)
    if s[-1] <= 0.0:
        raise DeskDFTError("overlap matrix not positive definite")
    keep = s > LINDEP_THRESHOLD
    if not keep.any():
        raise DeskDFTError("overlap matrix singular after linear-dependence drop")
    X = U[:, keep] / np.sqrt(s[keep])
    Fp = X.T @ F @ X
    eps, Cp = scipy.linalg.eigh(Fp)
    C = X @ Cp
    return OrbitalSolution(C=C, epsilon=eps, n_occ=n_occ)


def diis_step(history: list[tuple[np.ndarray, np.ndarray]]) -> np.ndarray:
    """Pulay extrapolation of the Fock matrix from (F, error) pairs.

    Minimizes the combined error norm under coefficients summing to one;
    falls back to damped mixing of the two latest matrices when the DIIS
    system is ill-conditioned.
    """
    if not history:
        raise DeskDFTError("diis_step requires at least one (F, error) pair")
    if len(history) == 1:
        return history[0][0]
    m = len(history)
    B = np.empty((m + 1, m + 1))
    B[-1, :] = 1.0
    B[:, -1] = 1.0
    B[-1, -1] = 0.0
    for a in range(m):
        ea = history[a][1].astype(np.float64).ravel()
        for b in range(a, m):
            eb = history[b][1].astype(np.float64).ravel()
            B[a, b] = B[b, a] = ea @ eb
    rhs = np.zeros(m + 1)
    rhs[-1] = 1.0
    if np.linalg.cond(B) > DIIS_COND_MAX:
        f1 = history[-1][0]
        f0 = history[-2][0]
        return (0.5 * f1 + 0.5 * f0).astype(f1.dtype)
    c = np.linalg.solve(B, rhs)[:m]
    out = np.zeros_like(history[-1][0], dtype=np.float64)
    for a in range(m):
        out += c[a] * history[a][0].astype(np.float64)
    return out.astype(history[-1][0].dtype)


def _trace(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.sum(a.astype(np.float64) * b.astype(np.float64)))


def scf(m: Molecule, b: BasisSet, opts: SCFOptions | None = None,
        iteration_callback=None) -> SCFResult:
    """Iterate rho -> (J, K, V_xc) -> F -> orbitals from the core-Hamiltonian guess.

    iteration_callback(it, rho, S, C, energy), when given, observes every
    iteration (used by invariant checks; the pipeline never sets it).
    """
    opts = opts or SCFOptions()
    dtype = opts.dtype
    nelec = electron_count(m)
    n_occ = nelec // 2

    ao = expand(m, b)
    if n_occ > ao.n_ao:
        raise MoleculeError(f"{nelec} electrons need {n_occ} orbitals but basis has {ao.n_ao}")
    ints = one_electron(ao, m, dtype=dtype)
    eri = eri_packed(ao, screen_eps=opts.screen_eps, dtype=dtype)
    grid = build_grid(m, level=opts.grid_level)
    aov = eval_ao(ao, grid, dtype=dtype)
    e_nn = nuclear_repulsion(m)
    h_core = ints.V + ints.T

    sol = solve_roothaan(h_core, ints.S, n_occ)
    history: list[float] = []
    components: dict[str, float] = {}
    rho_prev: np.ndarray | None = None
    diis_buf: list[tuple[np.ndarray, np.ndarray]] = []
    converged = False

    for it in range(opts.max_iterations):
        rho = density(sol).astype(dtype)
        if rho_prev is not None and 0 < it < opts.diis_start:
            rho = (opts.damping_factor * rho_prev
                   + (1.0 - opts.damping_factor) * rho).astype(dtype)
        rho_prev = rho

        J, K = build_jk(eri, rho)
        xcres = xc_matrix(grid, aov, rho)
        F = fock(ints, J, K, xcres.V_xc)

        components = {
            "E_nn": e_nn,
            "E_core": _trace(rho, h_core),
            "E_coulomb": 0.5 * _trace(rho, J),
            "E_exx": 0.5 * EXACT_EXCHANGE_FRACTION * _trace(rho, K),
            "E_xc": xcres.E_xc,
        }
        history.append(sum(components.values()))

        if iteration_callback is not None:
            iteration_callback(it, rho, ints.S, sol.C, history[-1])

        err = F @ rho @ ints.S - ints.S @ rho @ F
        diis_buf.append((F, err))
        if len(diis_buf) > opts.diis_history:
            diis_buf.pop(0)
        F_use = diis_step(diis_buf) if it + 1 >= opts.diis_start else F
        sol = solve_roothaan(F_use, ints.S, n_occ)

        if len(history) >= 5 and float(np.std(history[-5:])) < opts.convergence_std:
            converged = True
            break

    return SCFResult(
        solution=sol,
        E_total=history[-1],
        E_components=components,
        energy_history=history,
        converged=converged,
        iterations=len(history),
        n_ao=ao.n_ao,
    )


def properties(r: SCFResult) -> dict[str, float]:
    """HOMO and LUMO in Hartree plus the (positive) gap in eV."""
    sol = r.solution
    if sol.n_occ >= sol.epsilon.shape[0]:
        raise DeskDFTError("no virtual orbital: n_occ equals the orbital count")
    if sol.n_occ < 1:
        raise DeskDFTError("no occupied orbital")
    homo = float(sol.epsilon[sol.n_occ - 1])
    lumo = float(sol.epsilon[sol.n_occ])
    return {"homo": homo, "lumo": lumo, "gap": (lumo - homo) * HARTREE_TO_EV}
