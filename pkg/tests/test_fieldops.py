from fractions import Fraction

import pytest

from sweil.scalars import QI, ZERO, ONE, I
from sweil.liealg import (
    StructureError,
    builtin_sl2_orthonormal,
    fmu_backend,
    loop_backend,
    witt_backend,
    abelian,
)
from sweil.fock import (
    Box,
    FockVector,
    GenKey,
    VACUUM,
    apply_product,
    enumerate_box,
    make_monomial,
)
from sweil.fieldops import (
    StarOperator,
    build_differential_d,
    build_differential_parts,
    build_dc,
    build_koszul_h,
    build_n2_family,
    build_s2alpha_family,
    build_sl2_EHF,
    build_theta_adjoint,
    build_witt_rep,
    _loop_witt_L,
    generator_adjoint,
    hermitian_form,
    pairing_form,
    split_d1_d2,
    star,
    star_monomial,
    super_commutator,
)

SL2 = loop_backend(builtin_sl2_orthonormal())
AB1 = loop_backend(abelian(1, with_form=True))
WITT = witt_backend()


def vec(*keys):
    return apply_product(list(keys), VACUUM)


def g(c, k):
    return GenKey("g", c, k)


def b(c, k):
    return GenKey("b", c, k)


def t(c, k):
    return GenKey("t", c, k)


def e(c, k):
    return GenKey("e", c, k)


# -- central charges of quadratic families -----------------------------


@pytest.mark.parametrize(
    "lam,mu,expect",
    [
        (ZERO, ZERO, QI(1)),
        (QI(-1), QI(1), QI(3)),
        (QI(Fraction(1, 2)), ZERO, ZERO),
    ],
)
def test_fmu_heisenberg_level(lam, mu, expect):
    backend = fmu_backend(lam, mu)
    H1 = build_n2_family(backend, "H", 1)
    Hm1 = build_n2_family(backend, "H", -1)
    comm = super_commutator(H1, Hm1)
    assert comm.apply(FockVector.vacuum()) == FockVector.vacuum().scale(expect)


def test_loop_heisenberg_level_is_dimension():
    for backend, dim in ((SL2, 3), (AB1, 1)):
        H1 = build_s2alpha_family(backend, ZERO, "H", 1)
        Hm1 = build_s2alpha_family(backend, ZERO, "H", -1)
        comm = super_commutator(H1, Hm1)
        assert comm.apply(FockVector.vacuum()) == FockVector.vacuum().scale(QI(dim))


# -- the raw Virasoro zero mode diagonalizes energy --------------------


def test_quadratic_witt_zero_mode_is_energy():
    L0 = _loop_witt_L(SL2, 0)
    for m in enumerate_box(SL2.dim, Box(emax=2, b0max=1)):
        out = L0.apply(FockVector.of(m))
        assert out == FockVector.of(m, QI(m.energy())), m


def test_fmu_rep_matches_adjoint_of_witt():
    # the adjoint module of the one-component graded Lie algebra of
    # vector fields equals the weight-density module at (-1, 1)
    backend = fmu_backend(QI(-1), QI(1))
    box = Box(emax=2, b0max=1)
    for n in (-2, -1, 0, 1, 2):
        rep = build_witt_rep(backend, n)
        adj = build_theta_adjoint(WITT, 0, n)
        for m in enumerate_box(1, box):
            assert rep.apply(FockVector.of(m)) == adj.apply(FockVector.of(m)), (n, m)


def test_adjoint_theta_on_vacuum():
    # nonnegative modes annihilate the vacuum; negative modes create pairs
    for n in (0, 1, 2):
        assert build_theta_adjoint(SL2, 0, n).apply(FockVector.vacuum()).is_zero()
    assert not build_theta_adjoint(SL2, 0, -1).apply(FockVector.vacuum()).is_zero()


# -- differential fixtures ---------------------------------------------


def test_differential_shape():
    d = build_differential_d(SL2)
    assert d.parity == 1
    assert d.shift == (0, 0, 1)


def test_differential_kills_vacuum():
    for backend in (SL2, WITT):
        d = build_differential_d(backend)
        assert d.apply(FockVector.vacuum()).is_zero()


@pytest.mark.parametrize("backend,dim", [(SL2, 3), (WITT, 1)])
def test_differential_squares_to_zero(backend, dim):
    d = build_differential_d(backend)
    for m in enumerate_box(dim, Box(emax=2, b0max=1)):
        assert d.apply(d.apply(FockVector.of(m))).is_zero(), m


def test_differential_parts_bidegrees():
    d = build_differential_d(SL2)
    d1, d2 = split_d1_d2(d)
    for m in enumerate_box(SL2.dim, Box(emax=2, b0max=0)):
        _, _, _, a0, b0 = m.degrees()
        for op, da, db in ((d1, 1, 0), (d2, 0, -1)):
            for m2, _ in op.apply(FockVector.of(m)).terms.items():
                _, _, _, a2, b2 = m2.degrees()
                assert (a2, b2) == (a0 + da, b0 + db)
        # and the parts recompose
        lhs = d.apply(FockVector.of(m))
        rhs = d1.apply(FockVector.of(m)) + d2.apply(FockVector.of(m))
        assert lhs == rhs


def test_dc_squares_to_zero():
    dc = build_dc(build_differential_d(SL2))
    for m in enumerate_box(SL2.dim, Box(emax=2, b0max=0)):
        assert dc.apply(dc.apply(FockVector.of(m))).is_zero(), m


def test_koszul_contraction_fixtures():
    k = build_koszul_h(AB1)
    assert k.apply(vec(b(0, 0))) == vec(t(0, 0))
    assert k.apply(vec(e(0, 1))) == vec(g(0, 1))
    assert k.apply(FockVector.vacuum()).is_zero()


# -- window robustness -------------------------------------------------


def test_window_padding_is_a_no_op():
    ops = [
        build_differential_d(SL2),
        build_s2alpha_family(SL2, QI(Fraction(1, 2)), "Lalpha", 1),
        build_n2_family(SL2, "p", -1),
        build_sl2_EHF(SL2, "EE"),
    ]
    for m in enumerate_box(SL2.dim, Box(emax=2, b0max=0)):
        v = FockVector.of(m)
        for op in ops:
            assert op.apply(v, pad=0) == op.apply(v, pad=3), (op.name, m)


# -- sl(2) triple on the relative model --------------------------------


def test_sl2_triple_fixture():
    EE = build_sl2_EHF(AB1, "EE")
    out = EE.apply(vec(t(0, -2)), relative=True)
    assert out == vec(e(0, 2)).scale(QI(0, -2))


def test_sl2_triple_relations_on_box():
    EE = build_sl2_EHF(AB1, "EE")
    HH = build_sl2_EHF(AB1, "HH")
    FF = build_sl2_EHF(AB1, "FF")
    box = Box(emax=2, b0max=0, zero_fermions_allowed=False)
    for m in enumerate_box(1, box):
        v = FockVector.of(m)
        c1 = super_commutator(EE, FF).apply(v, relative=True)
        assert c1 == HH.apply(v, relative=True), m
        c2 = super_commutator(HH, EE).apply(v, relative=True)
        assert c2 == EE.apply(v, relative=True).scale(QI(2)), m
        c3 = super_commutator(HH, FF).apply(v, relative=True)
        assert c3 == FF.apply(v, relative=True).scale(QI(-2)), m


def test_s2alpha_central_term():
    alpha = QI(Fraction(1, 2))
    L0 = build_s2alpha_family(SL2, alpha, "Lalpha", 0)
    # on the vacuum only the central summand survives
    expect = (alpha / QI(4) - alpha * alpha / QI(8)) * QI(3)
    assert L0.apply(FockVector.vacuum()) == FockVector.vacuum().scale(expect)


# -- star and the forms ------------------------------------------------


def test_star_involution_on_relative_box():
    box = Box(emax=2, b0max=1, zero_fermions_allowed=False)
    for m in enumerate_box(1, box):
        assert star(star(FockVector.of(m))) == FockVector.of(m), m


def test_star_rejects_zero_mode_fermions():
    _, m = make_monomial([t(0, 0)])
    with pytest.raises(StructureError):
        star_monomial(m)


def test_star_exchanges_bidegree():
    _, m = make_monomial([e(0, 1), e(0, 3), t(0, -2)])
    sign, m2 = star_monomial(m)
    _, _, _, a, bb = m2.degrees()
    assert (a, bb) == (1, 2)


def test_generator_adjoint_rules():
    c, k = generator_adjoint(e(0, 1))
    assert (c, k) == (I, e(0, -1))
    c, k = generator_adjoint(t(0, -2))
    assert (c, k) == (-I, t(0, 2))
    c, k = generator_adjoint(g(0, 1))
    assert (c, k) == (-I, g(0, -1))
    c, k = generator_adjoint(b(0, 0))
    assert (c, k) == (-I, b(0, 0))


def test_hermitian_form_fixtures():
    vac = FockVector.vacuum()
    assert hermitian_form(vac, vac) == ONE
    assert hermitian_form(vec(e(0, 1)), vec(t(0, -1))) == I
    assert hermitian_form(vec(t(0, -1)), vec(e(0, 1))) == -I
    # conjugate symmetry on a sample pair
    v, w = vec(g(0, 2)), vec(b(0, -2))
    assert hermitian_form(v, w) == hermitian_form(w, v).conj()
    # mode-0 bosonic creators are null against the vacuum
    assert hermitian_form(vac, vec(b(0, 0))) == ZERO
    assert hermitian_form(vec(b(0, 0)), vec(b(0, 0))) == ZERO


def test_pairing_form_fixtures():
    assert pairing_form(FockVector.vacuum(), FockVector.vacuum()) == ONE
    assert pairing_form(vec(e(0, 1)), vec(e(0, 1))) == QI(-1)


def test_star_operator_is_even_involution():
    s = StarOperator()
    v = vec(e(0, 1)).scale(QI(2, 3))
    assert s.apply(s.apply(v, relative=True), relative=True) == v
    assert s.parity == 0

# -- the positive-definite Hodge inner product -------------------------


def test_hodge_form_fixtures():
    from sweil.fieldops import hodge_form

    vac = FockVector.vacuum()
    assert hodge_form(vac, vac) == ONE
    assert hodge_form(vec(e(0, 2)), vec(e(0, 2))) == QI(Fraction(1, 2))
    assert hodge_form(vec(t(0, -2)), vec(t(0, -2))) == QI(2)
    assert hodge_form(vec(g(0, 2)), vec(g(0, 2))) == ONE
    assert hodge_form(vec(b(0, 0)), vec(b(0, 0))) == ONE
    # off-diagonal entries vanish on canonical monomials
    assert hodge_form(vec(e(0, 1)), vec(t(0, -1))) == ZERO


def test_hodge_form_rejects_zero_mode_fermions():
    from sweil.fieldops import hodge_form

    v = apply_product([t(0, 0)], VACUUM)
    with pytest.raises(StructureError):
        hodge_form(v, v)


def test_hodge_form_makes_package_adjoints_exact():
    from sweil.fieldops import hodge_form, build_sl2_EHF

    h0 = build_s2alpha_family(SL2, ZERO, "h", 0)
    p0 = build_s2alpha_family(SL2, ZERO, "p", 0)
    x = build_s2alpha_family(SL2, ZERO, "x", -1)
    y = build_s2alpha_family(SL2, ZERO, "y", 1)
    EE = build_sl2_EHF(SL2, "EE")
    FF = build_sl2_EHF(SL2, "FF")
    box = Box(emax=2, b0max=1, zero_fermions_allowed=False)
    monos = list(enumerate_box(SL2.dim, box))
    vecs = [FockVector.of(m) for m in monos]
    pairs = (
        (h0, lambda v: p0.apply(v, relative=True).scale(QI(-1))),
        (x, lambda v: y.apply(v, relative=True)),
        (EE, lambda v: FF.apply(v, relative=True)),
    )
    for A, B in pairs:
        avs = [A.apply(v, relative=True) for v in vecs]
        bvs = [B(v) for v in vecs]
        for i, v in enumerate(vecs):
            for j, w in enumerate(vecs):
                assert hodge_form(avs[i], w) == hodge_form(v, bvs[j]), (
                    monos[i],
                    monos[j],
                )


def test_hodge_form_positive_and_hermitian_on_box():
    from sweil.fieldops import hodge_form

    box = Box(emax=2, b0max=2, zero_fermions_allowed=False)
    for m in enumerate_box(1, box):
        v = FockVector.of(m)
        norm = hodge_form(v, v)
        assert norm.im == 0 and norm.re > 0, m
    # sesquilinearity and conjugate symmetry on a sample
    v = vec(e(0, 1)).scale(QI(2, 3))
    w = vec(e(0, 1))
    assert hodge_form(v, w) == QI(2, 3).conj() * hodge_form(w, w)
    assert hodge_form(v, w) == hodge_form(w, v).conj()
