"""Desk-scale restricted Kohn-Sham B3LYP engine and dataset generator.

Layout mirrors the computation: geometry I/O (`molio`), basis expansion
(`basis`), analytic integrals and the symmetry-packed two-electron tensor
(`integrals`), numerical exchange-correlation (`xc`), the SCF driver (`scf`),
and the batch label-generation pipeline (`pipeline`).
"""

__version__ = "0.1.0"
