"""Secondary-component acceptance: 50 GDB-like SMILES at max_conformers=20."""

import sys

import pytest

from confgen.generate import ConformerRequest, generate_conformers
from confgen.smiles import heavy_atom_count

SMILES_50 = [
    "CCCCCCCCC", "CCCCCCCCO", "CCCCCCCCN", "CC(C)CCCCCO",
    "c1ccccc1CCO", "c1ccccc1CCN", "c1ccc(cc1)CC=O", "C1CCCCC1CCO",
    "C1CCCCC1C(=O)O", "OCC(O)C(O)CCO", "c1ccncc1CCO", "c1ccoc1CCCO",
    "N#Cc1ccccc1C#N", "CCCCCCCCCO", "CC(C)CC(=O)NCC", "c1ccccc1CCCO",
    "c1ccc2ccccc2c1", "CC(=O)c1ccccc1O", "OCc1ccccc1CO", "C1CCCCC1CCCCO",
    "c1ccccc1CCCCO", "N#Cc1ccccc1CC#N", "CCCCCCCCCCO", "c1ccncc1CCCCO",
    "CC(C)c1ccccc1CO", "CCOC(=O)c1ccco1",
    "CCCCCC", "CCCCCO", "c1ccccc1", "CC(=O)CCC", "OCCCCO",
    "c1ccncc1", "CCCCCCC", "c1ccccc1O", "c1ccccc1N", "CC(=O)CCO",
    "c1ccccc1C", "OCC(O)CCO", "N#Cc1ccco1", "CCOC(C)=O", "Oc1ccccc1O",
    "CCCCC#N", "CC(C)CC#N", "c1ccccc1C=O", "CCCCCC=O", "NCCCCO",
    "CCCC(=O)N", "FCC(F)CCO", "Cc1ccncc1", "OCc1ccco1",
]


@pytest.fixture(scope="module")
def generated():
    out = {}
    for smi in SMILES_50:
        out[smi] = generate_conformers(
            ConformerRequest(smi, max_conformers=20, seed=11), backend="builtin")
    return out


def test_suite_is_fifty():
    assert len(SMILES_50) == len(set(SMILES_50)) == 50


def test_embedding_rate_at_least_90_percent(generated):
    ok = sum(1 for cs in generated.values() if cs.n_conformers >= 1)
    assert ok >= 45, f"only {ok}/50 SMILES embedded"


def test_every_xyz_parses_via_molio(generated):
    from deskdft.molio import parse_xyz

    n_checked = 0
    for cs in generated.values():
        for block in cs.xyz_blocks:
            mol = parse_xyz(block)
            assert mol.n_atoms == int(block.splitlines()[0])
            n_checked += 1
    assert n_checked > 0


def test_heavy_atom_counts_match(generated):
    for smi, cs in generated.items():
        expect = heavy_atom_count(smi)
        for block in cs.xyz_blocks:
            symbols = [ln.split()[0] for ln in block.strip().splitlines()[2:]]
            heavy = sum(1 for s in symbols if s != "H")
            assert heavy == expect, smi


def test_element_set_is_organic(generated):
    allowed = {"H", "C", "N", "O", "F"}
    for cs in generated.values():
        for block in cs.xyz_blocks:
            symbols = {ln.split()[0] for ln in block.strip().splitlines()[2:]}
            assert symbols <= allowed


def test_byte_identical_across_runs(generated):
    for smi in SMILES_50[::7]:
        again = generate_conformers(
            ConformerRequest(smi, max_conformers=20, seed=11), backend="builtin")
        assert again.xyz_blocks == generated[smi].xyz_blocks
        assert again.manifest_lines == generated[smi].manifest_lines


def test_conformer_count_cap(generated):
    for cs in generated.values():
        assert cs.n_conformers <= 20
