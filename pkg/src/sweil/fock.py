"""Canonical basis states of the semi-infinite symmetric/exterior module
tensor product, with exact creation/annihilation actions and box enumeration.

Generators are labelled by (family, component, mode):

  'g' / 'b'  bosonic pair, pairing  g(c,k) b(c,k):  gb - bg = 1
  'e' / 't'  fermionic pair, pairing e(c,k) t(c,k): et + te = 1

Creators are g/e at mode > 0 and b/t at mode <= 0; a monomial is a multiset
of bosonic creators together with a strictly ordered set of fermionic
creators applied to the vacuum.

In the *relative* model the mode-0 fermionic slots of the vacuum are already
filled, so mode-0 fermionic generators act as zero and relative monomials
carry no mode-0 fermionic keys.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple, Optional

from .scalars import QI, ZERO, ONE
from .liealg import StructureError

BOSONIC = ("b", "g")
FERMIONIC = ("t", "e")
FAMILIES = ("b", "g", "t", "e")

# canonical order: family rank (g before b, e before t), then mode, then component
_FRANK = {"e": 0, "t": 1}
_BRANK = {"g": 0, "b": 1}


class GenKey(NamedTuple):
    family: str
    comp: int
    mode: int

    def is_creator(self) -> bool:
        if self.family in ("g", "e"):
            return self.mode > 0
        return self.mode <= 0

    def dual(self) -> "GenKey":
        other = {"g": "b", "b": "g", "e": "t", "t": "e"}[self.family]
        return GenKey(other, self.comp, self.mode)

    def is_fermionic(self) -> bool:
        return self.family in FERMIONIC


def _fsort_key(k: GenKey):
    return (_FRANK[k.family], k.mode, k.comp)


def _bsort_key(k: GenKey):
    return (_BRANK[k.family], k.mode, k.comp)


@dataclass(frozen=True)
class FockMonomial:
    """Canonical monomial: sorted boson tuple, strictly sorted fermion tuple."""

    bosons: tuple
    fermions: tuple

    @staticmethod
    def vacuum() -> "FockMonomial":
        return FockMonomial((), ())

    def is_vacuum(self) -> bool:
        return not self.bosons and not self.fermions

    def degrees(self):
        """(E, Deg_S, Deg_Lambda, a, b) of this monomial."""
        e = 0
        deg_s = 0
        deg_l = 0
        a = bcount = 0
        for k in self.bosons:
            if k.family == "g":
                e += k.mode
                deg_s += 1
            else:
                e -= k.mode
                deg_s -= 1
        for k in self.fermions:
            if k.family == "e":
                e += k.mode
                deg_l += 1
                a += 1
            else:
                e -= k.mode
                deg_l -= 1
                bcount += 1
        return e, deg_s, deg_l, a, bcount

    def energy(self) -> int:
        return self.degrees()[0]

    def b0_count(self) -> int:
        return sum(1 for k in self.bosons if k.family == "b" and k.mode == 0)

    def has_zero_mode_fermion(self) -> bool:
        return any(k.mode == 0 for k in self.fermions)

    def __str__(self):
        return format_monomial(self)


VACUUM = FockMonomial.vacuum()


def energy_and_degrees(m: FockMonomial):
    return m.degrees()


def make_monomial(keys: Iterable[GenKey]):
    """Canonicalize a product of creator keys; returns (sign, monomial|None).

    None (with sign 0) means a repeated fermionic creator.
    """
    bosons = []
    fermions = []
    sign = 1
    for k in keys:
        if not k.is_creator():
            raise StructureError(f"{k} is not a creator")
        if k.is_fermionic():
            pos = 0
            for f in fermions:
                if f == k:
                    return 0, None
                if _fsort_key(f) < _fsort_key(k):
                    pos += 1
            # anticommute past the fermions that precede the insertion point
            sign *= -1 if (len(fermions) - pos) % 2 else 1
            fermions.insert(pos, k)
        else:
            bosons.append(k)
    return sign, FockMonomial(tuple(sorted(bosons, key=_bsort_key)), tuple(fermions))


class FockVector:
    """Finite linear combination of monomials; zero coefficients dropped."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = {}
        if terms:
            for m, c in terms.items():
                c = QI.of(c)
                if not c.is_zero():
                    self.terms[m] = c

    @staticmethod
    def zero() -> "FockVector":
        return FockVector()

    @staticmethod
    def of(m: FockMonomial, coeff=ONE) -> "FockVector":
        return FockVector({m: coeff})

    @staticmethod
    def vacuum() -> "FockVector":
        return FockVector.of(VACUUM)

    def is_zero(self) -> bool:
        return not self.terms

    def add_term(self, m: FockMonomial, c: QI):
        cur = self.terms.get(m, ZERO) + c
        if cur.is_zero():
            self.terms.pop(m, None)
        else:
            self.terms[m] = cur

    def __add__(self, other):
        out = FockVector(dict(self.terms))
        for m, c in other.terms.items():
            out.add_term(m, c)
        return out

    def __sub__(self, other):
        return self + other.scale(QI(-1))

    def scale(self, c) -> "FockVector":
        c = QI.of(c)
        if c.is_zero():
            return FockVector()
        return FockVector({m: v * c for m, v in self.terms.items()})

    def __eq__(self, other):
        return isinstance(other, FockVector) and self.terms == other.terms

    def __hash__(self):
        raise TypeError("FockVector is not hashable")

    def items(self):
        return sorted(self.terms.items(), key=lambda kv: _mono_sort_key(kv[0]))

    def __str__(self):
        if not self.terms:
            return "0"
        return "  +  ".join(f"({c}) {m}" for m, c in self.items())


def _mono_sort_key(m: FockMonomial):
    return (
        tuple(_bsort_key(k) for k in m.bosons),
        tuple(_fsort_key(k) for k in m.fermions),
    )


def apply_generator(key: GenKey, v, relative=False):
    """Exact action of a single generator on a monomial or vector."""
    if isinstance(v, FockMonomial):
        v = FockVector.of(v)
    out = FockVector()
    for m, c in v.terms.items():
        for m2, c2 in _apply_to_monomial(key, m, relative):
            out.add_term(m2, c * c2)
    return out


def _apply_to_monomial(key: GenKey, m: FockMonomial, relative):
    if relative and key.is_fermionic() and key.mode == 0:
        return []
    if key.is_creator():
        if key.is_fermionic():
            if key in m.fermions:
                return []
            pos = 0
            for f in m.fermions:
                if _fsort_key(f) < _fsort_key(key):
                    pos += 1
            sign = -1 if pos % 2 else 1
            fermions = m.fermions[:pos] + (key,) + m.fermions[pos:]
            return [(FockMonomial(m.bosons, fermions), QI(sign))]
        bosons = tuple(sorted(m.bosons + (key,), key=_bsort_key))
        return [(FockMonomial(bosons, m.fermions), ONE)]
    # annihilator: contract the matching creator
    partner = key.dual()
    if key.is_fermionic():
        for idx, f in enumerate(m.fermions):
            if f == partner:
                sign = -1 if idx % 2 else 1
                fermions = m.fermions[:idx] + m.fermions[idx + 1 :]
                return [(FockMonomial(m.bosons, fermions), QI(sign))]
        return []
    count = m.bosons.count(partner)
    if count == 0:
        return []
    idx = m.bosons.index(partner)
    bosons = m.bosons[:idx] + m.bosons[idx + 1 :]
    # gb - bg = 1: a 'g' annihilator picks up +count, a 'b' annihilator -count
    coeff = QI(count) if key.family == "g" else QI(-count)
    return [(FockMonomial(bosons, m.fermions), coeff)]


def apply_product(keys, m: FockMonomial, relative=False) -> FockVector:
    """Apply a product of generators written left to right (rightmost first)."""
    vec = FockVector.of(m)
    for key in reversed(list(keys)):
        if vec.is_zero():
            break
        vec = apply_generator(key, vec, relative)
    return vec


def normal_order_pair(a: GenKey, b: GenKey):
    """Normal order the written product ``a b`` of a same-statistics pair.

    Returns (sign, (first, second)): annihilators are moved right, a
    fermionic swap contributes -1, and the contraction term is dropped.
    """
    if a.is_fermionic() != b.is_fermionic():
        raise StructureError("normal ordering is defined within one statistics family")
    if (not a.is_creator()) and b.is_creator():
        sign = -1 if a.is_fermionic() else 1
        return sign, (b, a)
    return 1, (a, b)


def normal_order_slots(keys):
    """Stably move annihilators right of creators; fermionic swaps give -1.

    Works across statistics (bosonic keys commute with everything here since
    same-term slots never pair after the reordering).
    """
    keys = list(keys)
    sign = 1
    # insertion sort by creator-status only (stable)
    for i in range(1, len(keys)):
        j = i
        while j > 0 and (not keys[j - 1].is_creator()) and keys[j].is_creator():
            if keys[j - 1].is_fermionic() and keys[j].is_fermionic():
                sign = -sign
            keys[j - 1], keys[j] = keys[j], keys[j - 1]
            j -= 1
    return sign, keys


@dataclass(frozen=True)
class Box:
    """Finite truncation: E <= emax, at most b0max mode-0 bosonic creators."""

    emax: int
    b0max: int = 0
    zero_fermions_allowed: bool = True
    deg_s: Optional[int] = None
    deg_l: Optional[int] = None

    def admits(self, m: FockMonomial) -> bool:
        e, ds, dl, _, _ = m.degrees()
        if e > self.emax or m.b0_count() > self.b0max:
            return False
        if not self.zero_fermions_allowed and m.has_zero_mode_fermion():
            return False
        if self.deg_s is not None and ds != self.deg_s:
            return False
        if self.deg_l is not None and dl != self.deg_l:
            return False
        return True


def enumerate_box(dim: int, box: Box):
    """Deterministic, duplicate-free enumeration of the monomials in a box."""
    if box.emax < 0 or box.b0max < 0:
        raise StructureError("box bounds must be nonnegative")
    gens = []
    for c in range(dim):
        for k in range(1, box.emax + 1):
            gens.append(GenKey("g", c, k))
            gens.append(GenKey("b", c, -k))
            gens.append(GenKey("e", c, k))
            gens.append(GenKey("t", c, -k))
        gens.append(GenKey("b", c, 0))
        if box.zero_fermions_allowed:
            gens.append(GenKey("t", c, 0))
    gens.sort()

    out = []

    def rec(idx, chosen, energy, b0):
        if idx == len(gens):
            sign, mono = make_monomial(chosen)
            assert sign in (1, -1) or not chosen
            if box.admits(mono):
                out.append(mono)
            return
        g = gens[idx]
        cost = g.mode if g.family in ("g", "e") else -g.mode
        zero_b = g.family == "b" and g.mode == 0
        max_rep = 1 if g.is_fermionic() else (
            box.b0max - b0 if zero_b else (box.emax - energy) // cost if cost else 0
        )
        if not zero_b and cost == 0 and not g.is_fermionic():
            max_rep = 0
        n = 0
        while True:
            if energy + n * cost <= box.emax and (not zero_b or b0 + n <= box.b0max):
                rec(idx + 1, chosen + [g] * n, energy + n * cost, b0 + (n if zero_b else 0))
            else:
                break
            if n >= max_rep:
                break
            n += 1
        return

    rec(0, [], 0, 0)
    out.sort(key=_mono_sort_key)
    return out


# -- fixture text format ----------------------------------------------


def format_monomial(m: FockMonomial) -> str:
    if m.is_vacuum():
        return "vac"
    def tok(k):
        mode = f"{k.mode:+d}" if k.mode else "0"
        return f"{k.family}({k.comp + 1},{mode})"

    bos = " ".join(tok(k) for k in m.bosons)
    fer = " ".join(tok(k) for k in m.fermions)
    if bos and fer:
        return f"{bos} | {fer}"
    return bos or f"| {fer}"


def parse_monomial(text: str) -> FockMonomial:
    text = text.strip()
    if text == "vac":
        return VACUUM
    if "|" in text:
        bos_txt, fer_txt = text.split("|")
    else:
        bos_txt, fer_txt = text, ""
    keys = []
    for chunk in (bos_txt + " " + fer_txt).split():
        fam = chunk[0]
        if fam not in FAMILIES or chunk[1] != "(" or not chunk.endswith(")"):
            raise StructureError(f"bad generator token {chunk!r}")
        comp_s, mode_s = chunk[2:-1].split(",")
        keys.append(GenKey(fam, int(comp_s) - 1, int(mode_s)))
    sign, mono = make_monomial(keys)
    if mono is None:
        raise StructureError("repeated fermionic creator in monomial text")
    if sign != 1:
        raise StructureError("monomial text is not in canonical order")
    return mono
