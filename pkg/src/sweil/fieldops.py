"""Locally finite normal-ordered mode sums acting exactly on Fock vectors.

A FieldOperator is a finite list of term shapes; each shape is an ordered
list of generator slots whose modes are affine in at most two integer
summation variables, together with an exact coefficient function.  For a
given input monomial only finitely many variable assignments can contribute
(every annihilator slot must find a partner among the input's creators);
the window is computed by interval propagation and may be widened without
changing any output, which the tests exercise.

This module also builds every concrete operator family: the adjoint and
weight-density Witt representations, the N=2 and S'(2,alpha) quadratic
expansions, the differentials d and the Koszul operator, the sl(2) triple
on the relative model, the star involution, and the Hermitian forms.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, NamedTuple, Optional

from .scalars import QI, ZERO, ONE, I
from .liealg import GradedBackend, StructureError
from .fock import (
    FockMonomial,
    FockVector,
    GenKey,
    VACUUM,
    apply_generator,
    apply_product,
    make_monomial,
    normal_order_slots,
)

_BOS = ("b", "g")
_CREATOR_POSITIVE = ("g", "e")  # creator iff mode > 0; 'b'/'t' iff mode <= 0
_DUAL = {"g": "b", "b": "g", "e": "t", "t": "e"}


class SlotSpec(NamedTuple):
    """One generator slot; mode = const + sum(coeffs[i] * var[i])."""

    family: str
    comp: int
    const: int
    coeffs: tuple

    def mode_at(self, vars_):
        return self.const + sum(c * v for c, v in zip(self.coeffs, vars_))


@dataclass(frozen=True)
class TermShape:
    nvars: int
    slots: tuple
    coeff: Callable[[tuple], QI]
    normal: bool = True
    # filters: tuple of (var index, op) with op in {'>', '!='} against zero
    filters: tuple = ()


class Operator:
    """Base class: exact linear operator on FockVector with declared parity
    and (E, Deg_S, Deg_Lambda) shifts (None when the shift is not uniform)."""

    parity: int = 0
    shift: Optional[tuple] = None
    name: str = ""

    def __init__(self):
        self._memo = {}

    def apply_monomial(self, m: FockMonomial, relative=False, pad=0) -> FockVector:
        key = (m, relative, pad)
        hit = self._memo.get(key)
        if hit is None:
            hit = self._apply_monomial(m, relative, pad)
            self._memo[key] = hit
        return hit

    def _apply_monomial(self, m, relative, pad):
        raise NotImplementedError

    def apply(self, v: FockVector, relative=False, pad=0) -> FockVector:
        out = FockVector()
        for m, c in v.terms.items():
            for m2, c2 in self.apply_monomial(m, relative, pad).terms.items():
                out.add_term(m2, c * c2)
        return out


def _partner_modes(mono: FockMonomial, family: str, comp: int):
    dual = _DUAL[family]
    keys = mono.bosons if dual in _BOS else mono.fermions
    return [k.mode for k in keys if k.family == dual and k.comp == comp]


def _term_window(term: TermShape, mono: FockMonomial, pad: int):
    """Integer boxes of summation variables that can possibly contribute."""
    nv = term.nvars
    if nv == 0:
        return [()]
    # constraints: affine form (const, coeffs) bounded below ('ge') or above
    cons = []
    for slot in term.slots:
        F = _partner_modes(mono, slot.family, slot.comp)
        if slot.family in _CREATOR_POSITIVE:
            bound = min([1] + F)
            cons.append((slot.const, slot.coeffs, "ge", bound))
        else:
            bound = max([0] + F)
            cons.append((slot.const, slot.coeffs, "le", bound))
    for vi, op in term.filters:
        if op == ">":
            unit = tuple(1 if i == vi else 0 for i in range(nv))
            cons.append((0, unit, "ge", 1))
    lo = [None] * nv
    hi = [None] * nv
    for _ in range(50):
        changed = False
        for a, cf, kind, b in cons:
            for v in range(nv):
                cv = cf[v]
                if cv == 0:
                    continue
                # extreme of the other variables' contribution
                rest = 0
                known = True
                for i in range(nv):
                    ci = cf[i]
                    if i == v or ci == 0:
                        continue
                    if kind == "ge":
                        e = hi[i] if ci > 0 else lo[i]
                    else:
                        e = lo[i] if ci > 0 else hi[i]
                    if e is None:
                        known = False
                        break
                    rest += ci * e
                if not known:
                    continue
                r = b - a - rest
                if kind == "ge":
                    # cv * x_v >= r
                    if cv > 0:
                        nb = -((-r) // cv)
                        if lo[v] is None or nb > lo[v]:
                            lo[v] = nb
                            changed = True
                    else:
                        nb = r // cv
                        if hi[v] is None or nb < hi[v]:
                            hi[v] = nb
                            changed = True
                else:
                    # cv * x_v <= r
                    if cv > 0:
                        nb = r // cv
                        if hi[v] is None or nb < hi[v]:
                            hi[v] = nb
                            changed = True
                    else:
                        nb = -((-r) // cv)
                        if lo[v] is None or nb > lo[v]:
                            lo[v] = nb
                            changed = True
        if not changed:
            break
    if any(x is None for x in lo) or any(x is None for x in hi):
        raise StructureError("summation window is not locally finite")
    ranges = [range(l - pad, h + pad + 1) for l, h in zip(lo, hi)]
    out = []
    for vs in itertools.product(*ranges):
        ok = True
        for vi, op in term.filters:
            if op == ">" and not vs[vi] > 0:
                ok = False
            if op == "!=" and vs[vi] == 0:
                ok = False
        if ok:
            out.append(vs)
    return out


class FieldOperator(Operator):
    def __init__(self, terms, central=ZERO, name=""):
        super().__init__()
        self.terms = tuple(terms)
        self.central = QI.of(central)
        self.name = name
        self.parity, self.shift = self._declare()

    def _declare(self):
        parity = None
        shift = None
        for term in self.terms:
            p = sum(1 for s in term.slots if s.family in ("t", "e")) % 2
            ds = sum(+1 if s.family == "g" else -1 if s.family == "b" else 0
                     for s in term.slots)
            dl = sum(+1 if s.family == "e" else -1 if s.family == "t" else 0
                     for s in term.slots)
            de = 0
            for v in range(term.nvars):
                tot = sum(
                    (1 if s.family in _CREATOR_POSITIVE else -1) * s.coeffs[v]
                    for s in term.slots
                )
                if tot != 0:
                    raise StructureError("term energy shift depends on a summation variable")
            de = sum(
                (1 if s.family in _CREATOR_POSITIVE else -1) * s.const
                for s in term.slots
            )
            if parity is None:
                parity, shift = p, (de, ds, dl)
            elif (p, (de, ds, dl)) != (parity, shift):
                raise StructureError("terms disagree on parity or degree shifts")
        if parity is None:
            parity, shift = 0, (0, 0, 0)
        if not self.central.is_zero() and (parity != 0 or shift != (0, 0, 0)):
            raise StructureError("central summand requires an even shiftless operator")
        return parity, shift

    def _apply_monomial(self, m, relative, pad):
        out = FockVector()
        if not self.central.is_zero():
            out.add_term(m, self.central)
        for term in self.terms:
            for vs in _term_window(term, m, pad):
                c = term.coeff(vs)
                if c.is_zero():
                    continue
                keys = [
                    GenKey(s.family, s.comp, s.mode_at(vs)) for s in term.slots
                ]
                sign = 1
                if term.normal:
                    sign, keys = normal_order_slots(keys)
                res = apply_product(keys, m, relative)
                if res.is_zero():
                    continue
                factor = c if sign == 1 else -c
                for m2, c2 in res.terms.items():
                    out.add_term(m2, factor * c2)
        return out


class SumOperator(Operator):
    def __init__(self, parts, central=ZERO, name=""):
        super().__init__()
        self.parts = tuple((QI.of(c), op) for c, op in parts)
        self.central = QI.of(central)
        self.name = name
        parities = {op.parity for _, op in self.parts}
        self.parity = parities.pop() if len(parities) == 1 else 0
        shifts = {op.shift for _, op in self.parts}
        self.shift = shifts.pop() if len(shifts) == 1 else None

    def _apply_monomial(self, m, relative, pad):
        out = FockVector()
        if not self.central.is_zero():
            out.add_term(m, self.central)
        for c, op in self.parts:
            for m2, c2 in op.apply_monomial(m, relative, pad).terms.items():
                out.add_term(m2, c * c2)
        return out


class ComposeOperator(Operator):
    """Apply ``inner`` first, then ``outer``."""

    def __init__(self, outer, inner, name=""):
        super().__init__()
        self.outer = outer
        self.inner = inner
        self.name = name
        self.parity = (outer.parity + inner.parity) % 2
        if outer.shift is not None and inner.shift is not None:
            self.shift = tuple(a + b for a, b in zip(outer.shift, inner.shift))

    def _apply_monomial(self, m, relative, pad):
        return self.outer.apply(
            self.inner.apply_monomial(m, relative, pad), relative, pad
        )


class ProjectedOperator(Operator):
    """Keep only the output monomials whose fermionic bidegree (a, b)
    differs from the input's by the given (da, db)."""

    def __init__(self, op, da, db, name=""):
        super().__init__()
        self.op = op
        self.da = da
        self.db = db
        self.name = name
        self.parity = op.parity
        self.shift = op.shift

    def _apply_monomial(self, m, relative, pad):
        _, _, _, a0, b0 = m.degrees()
        out = FockVector()
        for m2, c in self.op.apply_monomial(m, relative, pad).terms.items():
            _, _, _, a, b = m2.degrees()
            if (a, b) == (a0 + self.da, b0 + self.db):
                out.add_term(m2, c)
        return out


def super_commutator(a: Operator, b: Operator) -> Operator:
    """[a, b] = ab - (-1)^{p(a)p(b)} ba, evaluated pointwise."""
    sign = ONE if (a.parity and b.parity) else QI(-1)
    return SumOperator(
        [(ONE, ComposeOperator(a, b)), (sign, ComposeOperator(b, a))],
        name=f"[{a.name},{b.name}]",
    )


def zero_operator(name="0") -> Operator:
    return SumOperator([], name=name)


# -- builders ----------------------------------------------------------


def _const(c):
    c = QI.of(c)
    return lambda vs, _c=c: _c


def _half(x):
    return QI.of(x) / QI(2)


def _quad(fam1, c1, k1, fam2, c2, k2, coeff, normal=True, filters=()):
    """One-variable term fam1(c1, m + k1) fam2(c2, m + k2)."""
    return TermShape(
        1,
        (SlotSpec(fam1, c1, k1, (1,)), SlotSpec(fam2, c2, k2, (1,))),
        coeff,
        normal,
        filters,
    )


def build_theta_adjoint(backend: GradedBackend, j: int, n: int) -> FieldOperator:
    """theta(x) = rho(x) + pi(x) for x the j-th generator at mode n."""
    terms = []
    if backend.kind == "loop":
        spec = backend.spec
        for a in range(spec.dim):
            row = spec.bracket(j, a)
            for k in range(spec.dim):
                cc = row[k]
                if cc.is_zero():
                    continue
                terms.append(_quad("t", k, n, "e", a, 0, _const(cc)))
                terms.append(_quad("b", k, n, "g", a, 0, _const(cc)))
    elif backend.kind == "witt":
        if j != 0:
            raise StructureError("witt backend has a single component")
        coeff = lambda vs: QI(n - vs[0])
        terms.append(_quad("t", 0, n, "e", 0, 0, coeff))
        terms.append(_quad("b", 0, n, "g", 0, 0, coeff))
    else:
        raise StructureError("adjoint theta needs a Lie backend (loop or witt)")
    return FieldOperator(terms, name=f"theta[{j},{n}]")


def build_witt_rep(backend: GradedBackend, n: int) -> FieldOperator:
    """theta(L_n) on the weight-density module: coefficient
    (-m + mu - n*lam + lam) on both tensor factors."""
    if backend.kind != "fmu":
        raise StructureError("build_witt_rep needs an fmu backend")
    lam, mu = backend.lam, backend.mu
    shift = mu - (QI(n) - ONE) * lam
    coeff = lambda vs: QI(-vs[0]) + shift
    terms = [
        _quad("t", 0, n, "e", 0, 0, coeff),
        _quad("b", 0, n, "g", 0, 0, coeff),
    ]
    return FieldOperator(terms, name=f"Lwitt[{n}]")


def _loop_witt_L(backend, n, alpha=ZERO):
    """theta(L_n) on the loop complex: coefficient -(m - alpha/2)."""
    half_a = _half(alpha)
    coeff = lambda vs: -(QI(vs[0]) - half_a)
    terms = []
    for a in range(backend.dim):
        terms.append(_quad("t", a, n, "e", a, 0, coeff))
        terms.append(_quad("b", a, n, "g", a, 0, coeff))
    return FieldOperator(terms, name=f"Lwitt[{n}]")


N2_SYMBOLS = ("L", "H", "h", "p")


def build_n2_family(backend: GradedBackend, symbol: str, n: int) -> Operator:
    """The N=2 generators: Virasoro L (assembled), Heisenberg H, and the odd
    pair h, p; on a weight-density (fmu) or loop backend."""
    if backend.kind == "fmu":
        lam, mu = backend.lam, backend.mu
        if symbol == "H":
            terms = [
                _quad("t", 0, 0, "e", 0, n, _const(lam)),
                _quad("b", 0, 0, "g", 0, n, _const(lam - ONE)),
            ]
            central = mu if n == 0 else ZERO
            return FieldOperator(terms, central, name=f"H[{n}]")
        if symbol == "h":
            return FieldOperator(
                [_quad("g", 0, n, "t", 0, 0, _const(ONE), normal=False)],
                name=f"h[{n}]",
            )
        if symbol == "p":
            shift = mu + (QI(n) + ONE) * lam
            coeff = lambda vs: QI(vs[0]) - shift
            return FieldOperator(
                [_quad("b", 0, -n, "e", 0, 0, coeff, normal=False)],
                name=f"p[{n}]",
            )
        if symbol == "L":
            return SumOperator(
                [
                    (QI(-1), build_witt_rep(backend, -n)),
                    (_half(n + 1), build_n2_family(backend, "H", n)),
                ],
                name=f"L[{n}]",
            )
        raise StructureError(f"unknown N=2 symbol {symbol!r}")
    if backend.kind == "loop":
        if symbol == "H":
            terms = [
                _quad("g", a, n, "b", a, 0, _const(QI(-1)))
                for a in range(backend.dim)
            ]
            return FieldOperator(terms, name=f"H[{n}]")
        if symbol == "h":
            terms = [
                _quad("g", a, n, "t", a, 0, _const(ONE), normal=False)
                for a in range(backend.dim)
            ]
            return FieldOperator(terms, name=f"h[{n}]")
        if symbol == "p":
            coeff = lambda vs: QI(vs[0])
            terms = [
                _quad("b", a, -n, "e", a, 0, coeff, normal=False)
                for a in range(backend.dim)
            ]
            return FieldOperator(terms, name=f"p[{n}]")
        if symbol == "L":
            return SumOperator(
                [
                    (QI(-1), _loop_witt_L(backend, -n)),
                    (_half(n + 1), build_n2_family(backend, "H", n)),
                ],
                name=f"L[{n}]",
            )
        raise StructureError(f"unknown N=2 symbol {symbol!r}")
    raise StructureError("N=2 family needs an fmu or loop backend")


S2A_SYMBOLS = ("Lalpha", "E", "H", "F", "h", "p", "x", "y", "HH")


def build_s2alpha_family(
    backend: GradedBackend, alpha, symbol: str, n: int = 0
) -> Operator:
    """The S'(2, alpha) quadratic expansions on a loop complex."""
    if backend.kind != "loop":
        raise StructureError("S'(2,alpha) family needs a loop backend")
    alpha = QI.of(alpha)
    D = backend.dim
    half_a = _half(alpha)
    if symbol == "H":
        terms = [_quad("b", a, 0, "g", a, n, _const(QI(-1))) for a in range(D)]
        return FieldOperator(terms, name=f"H[{n}]")
    if symbol == "Lalpha":
        central = (alpha / QI(4) - alpha * alpha / QI(8)) * QI(D) if n == 0 else ZERO
        return SumOperator(
            [
                (QI(-1), _loop_witt_L(backend, -n, alpha)),
                ((QI(n) + ONE - alpha) / QI(2), build_s2alpha_family(backend, alpha, "H", n)),
            ],
            central,
            name=f"Lalpha[{n}]",
        )
    if symbol == "h":
        terms = [
            _quad("g", a, n, "t", a, 0, _const(ONE), normal=False) for a in range(D)
        ]
        return FieldOperator(terms, name=f"h[{n}]")
    if symbol == "p":
        coeff = lambda vs: QI(vs[0]) - half_a
        terms = [
            _quad("b", a, -n, "e", a, 0, coeff, normal=False) for a in range(D)
        ]
        return FieldOperator(terms, name=f"p[{n}]")
    if symbol == "E":
        terms = []
        for a in range(D):
            terms.append(
                TermShape(
                    1,
                    (SlotSpec("g", a, 0, (1,)), SlotSpec("g", a, 1 + n, (-1,))),
                    _const(-_half(I)),
                    normal=False,
                )
            )
        return FieldOperator(terms, name=f"E[{n}]")
    if symbol == "F":
        terms = []
        for a in range(D):
            terms.append(
                TermShape(
                    1,
                    (SlotSpec("b", a, 0, (1,)), SlotSpec("b", a, 1 - n, (-1,))),
                    _const(-_half(I)),
                    normal=False,
                )
            )
        return FieldOperator(terms, name=f"F[{n}]")
    if symbol == "y":
        terms = []
        for a in range(D):
            terms.append(
                TermShape(
                    1,
                    (SlotSpec("b", a, 0, (1,)), SlotSpec("t", a, 1 - n, (-1,))),
                    _const(I),
                    normal=False,
                )
            )
        return FieldOperator(terms, name=f"y[{n}]")
    if symbol == "x":
        coeff = lambda vs: -I * (QI(vs[0]) - half_a)
        terms = []
        for a in range(D):
            terms.append(
                TermShape(
                    1,
                    (SlotSpec("g", a, 1 + n, (-1,)), SlotSpec("e", a, 0, (1,))),
                    coeff,
                    normal=False,
                )
            )
        return FieldOperator(terms, name=f"x[{n}]")
    if symbol == "HH":
        terms = [_quad("t", a, 0, "e", a, 0, _const(QI(-1))) for a in range(D)]
        return FieldOperator(terms, name="HH")
    raise StructureError(f"unknown S'(2,alpha) symbol {symbol!r}")


SL2_SYMBOLS = ("EE", "HH", "FF")


def build_sl2_EHF(backend: GradedBackend, symbol: str) -> FieldOperator:
    """The sl(2) triple on the relative model (nonzero fermionic modes)."""
    if backend.kind != "loop":
        raise StructureError("sl(2) triple needs a loop backend")
    if backend.spec.form is None:
        raise StructureError("sl(2) triple needs an invariant form")
    D = backend.dim
    terms = []
    if symbol == "EE":
        for a in range(D):
            terms.append(
                TermShape(
                    1,
                    (SlotSpec("e", a, 0, (-1,)), SlotSpec("e", a, 0, (1,))),
                    lambda vs: I * QI(vs[0]),
                    normal=False,
                    filters=((0, ">"),),
                )
            )
        return FieldOperator(terms, name="EE")
    if symbol == "HH":
        for a in range(D):
            terms.append(
                _quad("t", a, 0, "e", a, 0, _const(QI(-1)), filters=((0, "!="),))
            )
        return FieldOperator(terms, name="HH")
    if symbol == "FF":
        for a in range(D):
            terms.append(
                TermShape(
                    1,
                    (SlotSpec("t", a, 0, (1,)), SlotSpec("t", a, 0, (-1,))),
                    lambda vs: -I / QI(vs[0]),
                    normal=False,
                    filters=((0, ">"),),
                )
            )
        return FieldOperator(terms, name="FF")
    raise StructureError(f"unknown sl(2) symbol {symbol!r}")


def build_differential_parts(backend: GradedBackend):
    """The two cubic summands of d: the fermionic piece (coefficient 1/2)
    and the mixed piece."""
    t1 = []
    t2 = []

    def add(comp_a, comp_b, comp_k, coeff1, coeff2):
        t1.append(
            TermShape(
                2,
                (
                    SlotSpec("t", comp_k, 0, (1, 1)),
                    SlotSpec("e", comp_b, 0, (0, 1)),
                    SlotSpec("e", comp_a, 0, (1, 0)),
                ),
                coeff1,
            )
        )
        t2.append(
            TermShape(
                2,
                (
                    SlotSpec("b", comp_k, 0, (1, 1)),
                    SlotSpec("g", comp_b, 0, (0, 1)),
                    SlotSpec("e", comp_a, 0, (1, 0)),
                ),
                coeff2,
            )
        )

    if backend.kind == "loop":
        spec = backend.spec
        for a in range(spec.dim):
            for b in range(spec.dim):
                row = spec.bracket(a, b)
                for k in range(spec.dim):
                    cc = row[k]
                    if cc.is_zero():
                        continue
                    add(a, b, k, _const(_half(ONE) * cc), _const(cc))
    elif backend.kind == "witt":
        coeff = lambda vs: QI(vs[0] - vs[1])
        add(0, 0, 0, lambda vs: _half(ONE) * QI(vs[0] - vs[1]), coeff)
    else:
        raise StructureError("differential d needs a Lie backend (loop or witt)")
    return FieldOperator(t1, name="d_ferm"), FieldOperator(t2, name="d_mixed")


def build_differential_d(backend: GradedBackend) -> FieldOperator:
    d1, d2 = build_differential_parts(backend)
    return FieldOperator(d1.terms + d2.terms, name="d")


def build_koszul_h(backend: GradedBackend) -> FieldOperator:
    terms = [
        _quad("g", a, 0, "t", a, 0, _const(ONE), normal=False)
        for a in range(backend.dim)
    ]
    return FieldOperator(terms, name="koszul")


def split_d1_d2(d: Operator):
    """Bidegree components: d1 raises a by 1, d2 lowers b by 1."""
    return (
        ProjectedOperator(d, 1, 0, name="d1"),
        ProjectedOperator(d, 0, -1, name="d2"),
    )


def build_dc(d: Operator) -> Operator:
    d1, d2 = split_d1_d2(d)
    return SumOperator([(I, d1), (-I, d2)], name="dc")


# -- star, Hermitian forms, adjoint rules ------------------------------


def star_monomial(m: FockMonomial):
    """(sign, monomial): tau(u_m) -> eps(u'_{-m}) and eps(u'_n) -> tau(u_{-n}),
    the tau-block images written first, then canonicalized."""
    if m.has_zero_mode_fermion():
        raise StructureError("star is defined on the relative model only")
    seq = []
    for k in m.fermions:
        if k.family == "t":
            seq.append(GenKey("e", k.comp, -k.mode))
    for k in m.fermions:
        if k.family == "e":
            seq.append(GenKey("t", k.comp, -k.mode))
    sign, mono = make_monomial(list(m.bosons) + seq)
    assert mono is not None
    return sign, mono


def star(v: FockVector) -> FockVector:
    out = FockVector()
    for m, c in v.terms.items():
        sign, m2 = star_monomial(m)
        out.add_term(m2, c if sign == 1 else -c)
    return out


class StarOperator(Operator):
    parity = 0
    name = "star"

    def __init__(self):
        super().__init__()

    def _apply_monomial(self, m, relative, pad):
        return star(FockVector.of(m))


def generator_adjoint(key: GenKey):
    """Adjoint of a generator with respect to {.,.}: a scalar multiple of
    the same family at the opposite mode."""
    c = I if key.family == "e" else -I
    return c, GenKey(key.family, key.comp, -key.mode)


def _herm_monomial(m: FockMonomial, w: FockVector) -> QI:
    if m.is_vacuum():
        return w.terms.get(VACUUM, ZERO)
    if m.bosons:
        key = m.bosons[0]
        rest = FockMonomial(m.bosons[1:], m.fermions)
    else:
        key = m.fermions[0]
        rest = FockMonomial(m.bosons, m.fermions[1:])
    c, adj = generator_adjoint(key)
    w2 = apply_generator(adj, w).scale(c)
    return _herm_monomial(rest, w2)


def hermitian_form(v: FockVector, w: FockVector) -> QI:
    """{v, w}: sesquilinear (antilinear in v), {vac, vac} = 1, reduced by
    the adjoint rules; monomials of mode-0 bosonic creators pair to zero
    against the vacuum, which makes those directions degenerate."""
    total = ZERO
    for m, c in v.terms.items():
        total = total + c.conj() * _herm_monomial(m, w)
    return total


_HODGE_SWAP = {"e": "t", "t": "e", "g": "b", "b": "g"}


def hodge_adjoint(key: GenKey):
    """Adjoint of a creator with respect to the Hodge inner product: the
    annihilator of the paired family at the same mode, weighted so that
    the homotopy operator, the twisted homotopy operator and the
    Lefschetz lowering operator become the exact adjoints of the Koszul
    differential, the twisted differential and the raising operator."""
    n = abs(key.mode)
    if n == 0 and key.family in ("e", "t"):
        raise StructureError("the Hodge form is defined on the relative model only")
    if key.family == "e":
        c = QI(Fraction(1, n))
    elif key.family == "t":
        c = QI(n)
    elif key.family == "g":
        c = QI(-1)
    else:
        c = ONE
    return c, GenKey(_HODGE_SWAP[key.family], key.comp, key.mode)


def _hodge_monomial(m: FockMonomial, w: FockVector) -> QI:
    if m.is_vacuum():
        return w.terms.get(VACUUM, ZERO)
    if m.bosons:
        key = m.bosons[0]
        rest = FockMonomial(m.bosons[1:], m.fermions)
    else:
        key = m.fermions[0]
        rest = FockMonomial(m.bosons, m.fermions[1:])
    c, adj = hodge_adjoint(key)
    w2 = apply_generator(adj, w).scale(c)
    return _hodge_monomial(rest, w2)


def hodge_form(v: FockVector, w: FockVector) -> QI:
    """Positive-definite Hodge inner product on the relative model:
    sesquilinear (antilinear in v), diagonal on canonical monomials with
    positive weights; every graded piece has an invertible Gram matrix."""
    total = ZERO
    for m, c in v.terms.items():
        total = total + c.conj() * _hodge_monomial(m, w)
    return total


def pairing_form(v: FockVector, w: FockVector) -> QI:
    """(v, w) = {i^(a+b) star v, w} on the relative model."""
    u = FockVector()
    for m, c in v.terms.items():
        _, _, _, a, b = m.degrees()
        sign, m2 = star_monomial(m)
        factor = (ONE, I, QI(-1), -I)[(a + b) % 4]
        coeff = c * factor
        u.add_term(m2, coeff if sign == 1 else -coeff)
    return hermitian_form(u, w)
