"""Unit conversions and element tables.

Internal units are Bohr (length) and Hartree (energy) everywhere; reports
convert to eV at the boundary.
"""

ANGSTROM_TO_BOHR = 1.8897259886
HARTREE_TO_EV = 27.211386

# Z = 1..18; the engine targets H,C,N,O,F but accepts anything with basis data.
ELEMENT_SYMBOLS = (
    "H", "He",
    "Li", "Be", "B", "C", "N", "O", "F", "Ne",
    "Na", "Mg", "Al", "Si", "P", "S", "Cl", "Ar",
)

SYMBOL_TO_Z = {s.lower(): z for z, s in enumerate(ELEMENT_SYMBOLS, start=1)}

MAX_Z = len(ELEMENT_SYMBOLS)


def symbol_for(z: int) -> str:
    return ELEMENT_SYMBOLS[z - 1]
