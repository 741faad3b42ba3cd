"""Command-line interface: generate / compare / variance.

Exit codes: 0 success, 1 usage error, 2 I/O error.
"""

from __future__ import annotations

import argparse
import logging
import sys

from deskdft.errors import DeskDFTError


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _build_parser() -> _Parser:
    p = _Parser(prog="deskdft", description="Restricted Kohn-Sham B3LYP label generator")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="label a geometry manifest")
    g.add_argument("--manifest", required=True)
    g.add_argument("--out", required=True)
    g.add_argument("--basis", default="sto-3g")
    g.add_argument("--precision", choices=("f32", "f64"), default="f32")
    g.add_argument("--workers", type=int, default=None,
                   help="default: hardware thread count")
    g.add_argument("--grid-level", type=int, default=1)
    g.add_argument("--max-iter", type=int, default=50)
    g.add_argument("--conv-std", type=float, default=0.01)
    g.add_argument("--screen-eps", type=float, default=1e-12)
    g.add_argument("--resume", action="store_true")

    c = sub.add_parser("compare", help="MAE report between two record files")
    c.add_argument("--a", required=True)
    c.add_argument("--b", required=True)
    c.add_argument("--report", required=True)

    v = sub.add_parser("variance", help="per-SMILES gap-variance histogram")
    v.add_argument("--in", dest="inp", required=True)
    v.add_argument("--out", required=True)
    v.add_argument("--bins", type=int, default=40)
    return p


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        if args.command == "generate":
            return _cmd_generate(args)
        if args.command == "compare":
            return _cmd_compare(args)
        if args.command == "variance":
            return _cmd_variance(args)
        return 1
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 2
    except DeskDFTError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _cmd_generate(args) -> int:
    import os

    from deskdft.molio import load_manifest
    from deskdft.pipeline import run
    from deskdft.scf import SCFOptions

    manifest = load_manifest(args.manifest)
    opts = SCFOptions(
        max_iterations=args.max_iter,
        convergence_std=args.conv_std,
        precision=args.precision,
        grid_level=args.grid_level,
        screen_eps=args.screen_eps,
    )
    workers = args.workers if args.workers else (os.cpu_count() or 1)
    records = run(manifest, opts, workers, args.out, basis_name=args.basis,
                  resume=args.resume)
    n_conv = sum(r.converged for r in records)
    print(f"{len(records)} records ({n_conv} converged) -> {args.out}")
    return 0


def _cmd_compare(args) -> int:
    from deskdft.pipeline import compare_precision, load_records

    ra = load_records(args.a)
    rb = load_records(args.b)
    report = compare_precision(ra, rb)
    with open(args.report, "w", encoding="utf-8") as fh:
        fh.write(report.to_json() + "\n")
    print(f"n={report.n_molecules}  MAE energy {report.mae_energy_mev:.3f} meV  "
          f"MAE gap {report.mae_gap_mev:.3f} meV")
    return 0


def _cmd_variance(args) -> int:
    from deskdft.pipeline import load_records, variance_stats, variance_to_csv

    stats = variance_stats(load_records(args.inp), bins=args.bins)
    variance_to_csv(stats, args.out)
    print(f"{len(stats.per_smiles_std)} SMILES with >=2 converged conformers -> {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
