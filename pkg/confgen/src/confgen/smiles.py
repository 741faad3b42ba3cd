"""Minimal SMILES reader for GDB-style organic molecules (H, C, N, O, F).

Supports: aliphatic C/N/O/F, aromatic c/n/o, bracket atoms with explicit H
counts ([nH], [NH2], ...), bonds - = #, branches, ring closures (digits and
%nn). Aromatic systems are kekulized by perfect matching; implicit hydrogens
follow fixed valences (C4, N3, O2, F1). No charges, stereo, or isotopes.
"""

from __future__ import annotations

from dataclasses import dataclass, field


class SmilesError(ValueError):
    pass


_VALENCE = {"C": 4, "N": 3, "O": 2, "F": 1, "H": 1}
_ORGANIC = {"C", "N", "O", "F"}
_AROMATIC = {"c", "n", "o"}


@dataclass
class Atom:
    element: str
    aromatic: bool = False
    explicit_h: int | None = None  # bracket atoms pin their H count
    h_count: int = 0
    index: int = -1


@dataclass
class Bond:
    a: int
    b: int
    order: int = 1          # 1, 2, 3 after kekulization
    aromatic: bool = False


@dataclass
class MolGraph:
    atoms: list[Atom] = field(default_factory=list)
    bonds: list[Bond] = field(default_factory=list)

    def neighbors(self, i: int) -> list[tuple[int, Bond]]:
        out = []
        for bd in self.bonds:
            if bd.a == i:
                out.append((bd.b, bd))
            elif bd.b == i:
                out.append((bd.a, bd))
        return out

    @property
    def n_heavy(self) -> int:
        return len(self.atoms)


def _parse_bracket(body: str) -> Atom:
    i = 0
    if i < len(body) and body[i].isdigit():
        raise SmilesError(f"isotopes unsupported: [{body}]")
    sym = None
    for cand in ("Cl", "Br"):
        if body.startswith(cand):
            raise SmilesError(f"element {cand} outside supported set")
    ch = body[i]
    if ch in "CNOF":
        sym, arom = ch, False
    elif ch in "cno":
        sym, arom = ch.upper(), True
    elif ch == "H":
        raise SmilesError("bare [H] atoms unsupported")
    else:
        raise SmilesError(f"unsupported element in [{body}]")
    i += 1
    hcount = 0
    if i < len(body) and body[i] == "H":
        i += 1
        if i < len(body) and body[i].isdigit():
            hcount = int(body[i])
            i += 1
        else:
            hcount = 1
    if i < len(body):
        raise SmilesError(f"unsupported bracket content [{body}] (charges/stereo not allowed)")
    return Atom(element=sym, aromatic=arom, explicit_h=hcount)


def parse_smiles(text: str) -> MolGraph:
    """Parse SMILES into a heavy-atom graph with kekulized bond orders and
    per-atom hydrogen counts."""
    g = MolGraph()
    stack: list[int] = []
    prev: int | None = None
    pending_order: int | None = None
    ring_open: dict[int, tuple[int, int | None, bool]] = {}
    i = 0
    n = len(text)

    def add_atom(atom: Atom) -> int:
        atom.index = len(g.atoms)
        g.atoms.append(atom)
        return atom.index

    def add_bond(a: int, b: int, order: int | None, arom_pair: bool):
        if a == b:
            raise SmilesError("self bond")
        aromatic = order is None and arom_pair
        g.bonds.append(Bond(a=a, b=b, order=order or 1, aromatic=aromatic))

    while i < n:
        ch = text[i]
        if ch in "CNOF":
            idx = add_atom(Atom(element=ch))
        elif ch in "cno":
            idx = add_atom(Atom(element=ch.upper(), aromatic=True))
        elif ch == "[":
            j = text.find("]", i)
            if j < 0:
                raise SmilesError("unterminated bracket atom")
            idx = add_atom(_parse_bracket(text[i + 1:j]))
            i = j
        elif ch in "-=#":
            if pending_order is not None:
                raise SmilesError("double bond symbol")
            pending_order = {"-": 1, "=": 2, "#": 3}[ch]
            i += 1
            continue
        elif ch == "(":
            if prev is None:
                raise SmilesError("branch before any atom")
            stack.append(prev)
            i += 1
            continue
        elif ch == ")":
            if not stack:
                raise SmilesError("unbalanced ')'")
            prev = stack.pop()
            i += 1
            continue
        elif ch.isdigit() or ch == "%":
            if prev is None:
                raise SmilesError("ring closure before any atom")
            if ch == "%":
                if i + 2 >= n or not text[i + 1:i + 3].isdigit():
                    raise SmilesError("bad %nn ring closure")
                num = int(text[i + 1:i + 3])
                i += 2
            else:
                num = int(ch)
            if num in ring_open:
                other, order0, arom0 = ring_open.pop(num)
                order = pending_order if pending_order is not None else order0
                arom_pair = g.atoms[prev].aromatic and g.atoms[other].aromatic and arom0
                add_bond(other, prev, order, arom_pair)
            else:
                ring_open[num] = (prev, pending_order,
                                  g.atoms[prev].aromatic)
            pending_order = None
            i += 1
            continue
        elif ch in ".@/\\+":
            raise SmilesError(f"unsupported SMILES feature {ch!r}")
        elif ch.isspace():
            i += 1
            continue
        else:
            raise SmilesError(f"unexpected character {ch!r} at {i}")
        # common atom tail: bond to previous
        if prev is not None:
            arom_pair = g.atoms[prev].aromatic and g.atoms[idx].aromatic
            add_bond(prev, idx, pending_order, arom_pair and pending_order is None)
        pending_order = None
        prev = idx
        i += 1

    if ring_open:
        raise SmilesError(f"unclosed ring bond(s): {sorted(ring_open)}")
    if stack:
        raise SmilesError("unbalanced '('")
    if not g.atoms:
        raise SmilesError("empty SMILES")
    _kekulize(g)
    _assign_hydrogens(g)
    return g


def _kekulize(g: MolGraph) -> None:
    """Assign alternating double bonds over the aromatic subgraph."""
    needs = set()
    for a in g.atoms:
        if not a.aromatic:
            continue
        if a.element == "C":
            needs.add(a.index)
        elif a.element == "N" and not a.explicit_h:
            needs.add(a.index)   # pyridine-type
        # [nH] and aromatic O contribute a lone pair, no double bond
    arom_bonds = [bd for bd in g.bonds if bd.aromatic]
    adj: dict[int, list[Bond]] = {}
    for bd in arom_bonds:
        adj.setdefault(bd.a, []).append(bd)
        adj.setdefault(bd.b, []).append(bd)

    matched: dict[int, Bond] = {}

    def match(remaining: frozenset) -> bool:
        if not remaining:
            return True
        a = min(remaining)
        for bd in adj.get(a, ()):
            other = bd.b if bd.a == a else bd.a
            if other in remaining:
                matched[a] = matched[other] = bd
                if match(remaining - {a, other}):
                    return True
                del matched[a], matched[other]
        return False

    if not match(frozenset(needs)):
        raise SmilesError("cannot kekulize aromatic system")
    chosen = {id(bd) for bd in matched.values()}
    for bd in arom_bonds:
        bd.order = 2 if id(bd) in chosen else 1


def _assign_hydrogens(g: MolGraph) -> None:
    for a in g.atoms:
        bond_sum = sum(bd.order for _, bd in g.neighbors(a.index))
        if a.explicit_h is not None:
            a.h_count = a.explicit_h
            target = bond_sum + a.h_count
            # aromatic N lone pair etc. make valence checks loose for brackets
            if target > _VALENCE[a.element] + 1:
                raise SmilesError(f"valence overflow on atom {a.index} ({a.element})")
        else:
            h = _VALENCE[a.element] - bond_sum
            if h < 0:
                raise SmilesError(
                    f"valence overflow on atom {a.index} ({a.element}): bonds sum to {bond_sum}")
            a.h_count = h


def heavy_atom_count(smiles: str) -> int:
    return parse_smiles(smiles).n_heavy
