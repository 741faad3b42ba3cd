"""Batch dataset generation with checkpoint/resume, plus the comparison and
conformer-variance analyses.

Records are streamed to JSONL in completion order; a separate checkpoint file
lists completed ids and is rewritten atomically (temp + rename) after every
record, so a killed run resumes to the identical id -> record map.
"""

from __future__ import annotations

import json
import logging
import math
import multiprocessing as mp
import os
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from deskdft.constants import HARTREE_TO_EV
from deskdft.errors import DeskDFTError
from deskdft.molio import GeometryManifest, ManifestEntry
from deskdft.scf import SCFOptions, properties, scf

log = logging.getLogger("deskdft.pipeline")

RECORD_FIELDS = ("id", "smiles", "n_ao", "energy", "homo", "lumo", "gap",
                 "converged", "iterations", "precision", "basis", "wall_ms")


@dataclass(frozen=True)
class DatasetRecord:
    """One labeled conformer; energies in eV."""

    id: str
    smiles: str | None
    n_ao: int
    energy: float
    homo: float
    lumo: float
    gap: float
    converged: bool
    iterations: int
    precision: str
    basis: str
    wall_ms: int

    def to_json(self) -> str:
        return json.dumps(asdict(self))

    @staticmethod
    def from_json(line: str) -> "DatasetRecord":
        d = json.loads(line)
        return DatasetRecord(**{k: d[k] for k in RECORD_FIELDS})


@dataclass(frozen=True)
class ComparisonReport:
    n_molecules: int
    mae_energy_mev: float
    mae_gap_mev: float
    convergence_rate_a: float
    convergence_rate_b: float
    deltas: list[dict[str, float]]

    def to_json(self) -> str:
        return json.dumps({
            "n_molecules": self.n_molecules,
            "mae_energy_mev": self.mae_energy_mev,
            "mae_gap_mev": self.mae_gap_mev,
            "convergence_rate_a": self.convergence_rate_a,
            "convergence_rate_b": self.convergence_rate_b,
            "deltas": self.deltas,
        }, indent=2)


@dataclass(frozen=True)
class VarianceStats:
    per_smiles_std: dict[str, float]
    hist_edges: list[float]
    hist_counts: list[int]


def _label_one(entry: ManifestEntry, base_dir: str, basis_name: str,
               opts: SCFOptions) -> DatasetRecord:
    from deskdft.basis import load_basis

    manifest = GeometryManifest(entries=[entry], base_dir=base_dir)
    mol = manifest.load_molecule(entry)
    basis = load_basis(basis_name)
    t0 = time.monotonic()
    res = scf(mol, basis, opts)
    wall_ms = int(round((time.monotonic() - t0) * 1000))
    props = properties(res)
    return DatasetRecord(
        id=mol.id,
        smiles=entry.smiles,
        n_ao=res.n_ao,
        energy=res.E_total * HARTREE_TO_EV,
        homo=props["homo"] * HARTREE_TO_EV,
        lumo=props["lumo"] * HARTREE_TO_EV,
        gap=props["gap"],
        converged=res.converged,
        iterations=res.iterations,
        precision=opts.precision,
        basis=basis_name,
        wall_ms=wall_ms,
    )


def _worker(args):
    entry, base_dir, basis_name, opts = args
    try:
        return ("ok", _label_one(entry, base_dir, basis_name, opts))
    except Exception as exc:  # per-entry failures must never abort the batch
        return ("err", (entry.id, f"{type(exc).__name__}: {exc}"))


def _worker_init():
    os.environ["OMP_NUM_THREADS"] = "1"
    try:
        import numba

        numba.set_num_threads(1)
    except Exception:
        pass


def _atomic_write(path: str, text: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _read_checkpoint(path: str) -> set[str]:
    if not os.path.exists(path):
        return set()
    with open(path, encoding="utf-8") as fh:
        return {line.strip() for line in fh if line.strip()}


def load_records(path: str) -> list[DatasetRecord]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(DatasetRecord.from_json(line))
    return out


def run(manifest: GeometryManifest, opts: SCFOptions, workers: int,
        out_path: str, basis_name: str = "sto-3g",
        resume: bool = False) -> list[DatasetRecord]:
    """Label every manifest entry once; append records to out_path as JSONL."""
    if workers < 1:
        raise DeskDFTError("workers must be >= 1")
    ckpt_path = out_path + ".ckpt"
    done: set[str] = set()
    kept_lines: list[str] = []
    if resume:
        checkpointed = _read_checkpoint(ckpt_path)
        if os.path.exists(out_path):
            # keep one valid line per checkpointed id; drop partial/orphan lines
            with open(out_path, encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if not line:
                        continue
                    try:
                        rec = DatasetRecord.from_json(line)
                    except (json.JSONDecodeError, KeyError, TypeError):
                        continue
                    if rec.id in checkpointed and rec.id not in done:
                        kept_lines.append(line)
                        done.add(rec.id)
    _atomic_write(out_path, "".join(ln + "\n" for ln in kept_lines))
    _atomic_write(ckpt_path, "".join(i + "\n" for i in sorted(done)))

    todo = [e for e in manifest.entries if e.id not in done]
    tasks = [(e, manifest.base_dir, basis_name, opts) for e in todo]
    records: list[DatasetRecord] = [DatasetRecord.from_json(ln) for ln in kept_lines]

    def _consume(result) -> None:
        status, payload = result
        if status == "err":
            eid, reason = payload
            log.warning("entry %s failed: %s", eid, reason)
            return
        rec = payload
        records.append(rec)
        with open(out_path, "a", encoding="utf-8") as fh:
            fh.write(rec.to_json() + "\n")
        done.add(rec.id)
        _atomic_write(ckpt_path, "".join(i + "\n" for i in sorted(done)))

    if not tasks:
        return records
    if workers == 1:
        for t in tasks:
            _consume(_worker(t))
    else:
        # spawn, not fork: numba's threading layers are not fork-safe.
        # one BLAS/numba thread per worker; children inherit the env at exec.
        prev_omp = os.environ.get("OMP_NUM_THREADS")
        os.environ["OMP_NUM_THREADS"] = "1"
        try:
            ctx = mp.get_context("spawn")
            with ctx.Pool(workers, initializer=_worker_init) as pool:
                for result in pool.imap_unordered(_worker, tasks, chunksize=1):
                    _consume(result)
        finally:
            if prev_omp is None:
                os.environ.pop("OMP_NUM_THREADS", None)
            else:
                os.environ["OMP_NUM_THREADS"] = prev_omp
    return records


def records_equal(a: DatasetRecord, b: DatasetRecord) -> bool:
    """Physical equality; wall_ms is a measurement, not a label."""
    ka = asdict(a)
    kb = asdict(b)
    ka.pop("wall_ms")
    kb.pop("wall_ms")
    return ka == kb


def _compare(run_a: list[DatasetRecord], run_b: list[DatasetRecord]) -> ComparisonReport:
    ids_a = {r.id for r in run_a}
    ids_b = {r.id for r in run_b}
    if ids_a != ids_b:
        only_a = sorted(ids_a - ids_b)[:5]
        only_b = sorted(ids_b - ids_a)[:5]
        raise DeskDFTError(f"id mismatch between runs (a-only {only_a}, b-only {only_b})")
    by_a = {r.id: r for r in run_a}
    by_b = {r.id: r for r in run_b}
    deltas = []
    de, dg = [], []
    for i in sorted(ids_a):
        ra, rb = by_a[i], by_b[i]
        if not (ra.converged and rb.converged):
            continue
        d_energy = (ra.energy - rb.energy) * 1000.0
        d_gap = (ra.gap - rb.gap) * 1000.0
        deltas.append({"id": i, "d_energy_mev": d_energy, "d_gap_mev": d_gap})
        de.append(abs(d_energy))
        dg.append(abs(d_gap))
    if not de:
        raise DeskDFTError("no molecule converged in both runs")
    return ComparisonReport(
        n_molecules=len(de),
        mae_energy_mev=float(np.mean(de)),
        mae_gap_mev=float(np.mean(dg)),
        convergence_rate_a=sum(r.converged for r in run_a) / len(run_a),
        convergence_rate_b=sum(r.converged for r in run_b) / len(run_b),
        deltas=deltas,
    )


def compare_precision(run_a: list[DatasetRecord], run_b: list[DatasetRecord]) -> ComparisonReport:
    """MAE between two precisions over molecules converged in both runs."""
    return _compare(run_a, run_b)


def compare_basis(run_sto3g: list[DatasetRecord], run_631g: list[DatasetRecord]) -> ComparisonReport:
    """Same report shape; expected to show disagreement far above 43 meV."""
    return _compare(run_sto3g, run_631g)


def variance_stats(records: list[DatasetRecord], bins: int = 40) -> VarianceStats:
    """Std of the gap over each SMILES's converged conformers (>= 2 required)."""
    groups: dict[str, list[float]] = {}
    for r in records:
        if r.smiles and r.converged:
            groups.setdefault(r.smiles, []).append(r.gap)
    stds = {s: float(np.std(g, ddof=1)) for s, g in groups.items() if len(g) >= 2}
    if stds:
        counts, edges = np.histogram(list(stds.values()), bins=bins)
    else:
        counts, edges = np.zeros(bins, dtype=int), np.linspace(0.0, 1.0, bins + 1)
    return VarianceStats(per_smiles_std=stds,
                         hist_edges=[float(e) for e in edges],
                         hist_counts=[int(c) for c in counts])


def variance_to_csv(stats: VarianceStats, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("smiles,gap_std_ev\n")
        for s, v in sorted(stats.per_smiles_std.items()):
            fh.write(f"{s},{v:.9f}\n")
        fh.write("\nbin_lo,bin_hi,count\n")
        for lo, hi, c in zip(stats.hist_edges[:-1], stats.hist_edges[1:], stats.hist_counts):
            fh.write(f"{lo:.9f},{hi:.9f},{c}\n")
