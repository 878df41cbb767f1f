import pytest
from hypothesis import given, strategies as st

from sweil.scalars import QI, ONE
from sweil.liealg import StructureError
from sweil.fock import (
    Box,
    FockMonomial,
    FockVector,
    GenKey,
    VACUUM,
    apply_generator,
    apply_product,
    enumerate_box,
    format_monomial,
    make_monomial,
    normal_order_pair,
    normal_order_slots,
    parse_monomial,
)


def g(c, k):
    return GenKey("g", c, k)


def b(c, k):
    return GenKey("b", c, k)


def t(c, k):
    return GenKey("t", c, k)


def e(c, k):
    return GenKey("e", c, k)


def mono(*keys):
    sign, m = make_monomial(keys)
    assert sign == 1
    return m


def test_creator_classification():
    assert g(0, 1).is_creator() and not g(0, 0).is_creator()
    assert b(0, 0).is_creator() and not b(0, 1).is_creator()
    assert e(0, 2).is_creator() and not e(0, -1).is_creator()
    assert t(0, -3).is_creator() and not t(0, 1).is_creator()


def test_pairing_relations():
    # e t + t e = 1 on vac: t(u_0) then e(u'_0)
    v = apply_generator(t(0, 0), FockVector.vacuum())
    back = apply_generator(e(0, 0), v)
    assert back == FockVector.vacuum()
    # g b - b g = 1: annihilator g(u'_0) contracts b(u_0) with +1
    v = apply_generator(b(0, 0), FockVector.vacuum())
    assert apply_generator(g(0, 0), v) == FockVector.vacuum()
    # and on b^k the coefficient is +k
    v3 = apply_product([b(0, 0)] * 3, VACUUM)
    assert apply_generator(g(0, 0), v3) == apply_product([b(0, 0)] * 2, VACUUM).scale(3)
    # b annihilator on g^k gives -k
    w2 = apply_product([g(0, 1)] * 2, VACUUM)
    assert apply_generator(b(0, 1), w2) == apply_product([g(0, 1)], VACUUM).scale(-2)


def test_nonmatching_pairs_vanish():
    v = apply_generator(e(0, 1), FockVector.vacuum())
    assert apply_generator(t(0, 2), v).is_zero()
    assert apply_generator(g(0, -1), FockVector.vacuum()).is_zero()


def test_fermionic_square_zero():
    v = apply_generator(e(0, 1), FockVector.vacuum())
    assert apply_generator(e(0, 1), v).is_zero()
    v = apply_generator(t(0, 0), FockVector.vacuum())
    assert apply_generator(t(0, 0), v).is_zero()


def test_fermionic_insertion_sign():
    # canonical order: e-family before t-family, mode ascending
    m = mono(e(0, 1), t(0, 0))
    v = apply_generator(e(0, 2), FockVector.of(m))
    ((m2, c),) = v.terms.items()
    assert m2 == mono(e(0, 1), e(0, 2), t(0, 0))
    assert c == -ONE  # one fermion (e at mode 1) precedes the slot


def test_fermionic_contraction_sign():
    m = mono(e(0, 1), e(0, 2))
    # t(u_2) contracts the second fermion: sign (-1)^1
    v = apply_generator(t(0, 2), FockVector.of(m))
    ((m2, c),) = v.terms.items()
    assert m2 == mono(e(0, 1)) and c == -ONE
    # t(u_1) contracts the first: sign +1
    v = apply_generator(t(0, 1), FockVector.of(m))
    ((m2, c),) = v.terms.items()
    assert m2 == mono(e(0, 2)) and c == ONE


def test_relative_mode_kills_zero_mode_fermions():
    assert apply_generator(t(0, 0), FockVector.vacuum(), relative=True).is_zero()
    assert apply_generator(e(0, 0), FockVector.vacuum(), relative=True).is_zero()
    # nonzero modes unaffected
    assert not apply_generator(t(0, -1), FockVector.vacuum(), relative=True).is_zero()


def test_energy_and_degrees():
    assert VACUUM.degrees() == (0, 0, 0, 0, 0)
    m = mono(e(0, 2), t(0, -1))
    assert m.degrees() == (3, 0, 0, 1, 1)
    m = mono(g(0, 2), b(0, 0))
    assert m.degrees() == (2, 0, 0, 0, 0)
    m = mono(g(0, 1), e(0, 1), t(0, -2))
    assert m.degrees() == (4, 1, 0, 1, 1)


def test_energy_additive_and_nonnegative():
    m1 = mono(g(0, 2))
    m2 = mono(t(0, -1), b(0, -3))
    joined = mono(g(0, 2), t(0, -1), b(0, -3))
    assert joined.energy() == m1.energy() + m2.energy()
    for m in enumerate_box(1, Box(emax=2, b0max=1)):
        assert m.energy() >= 0


def test_normal_order_pair():
    # :t(u_1) e(u'_1): -> -e(u'_1) t(u_1)
    sign, (first, second) = normal_order_pair(t(0, 1), e(0, 1))
    assert sign == -1 and first == e(0, 1) and second == t(0, 1)
    # :b(u_0) g(u'_0): unchanged (both annihilator-side order already normal)
    sign, pair = normal_order_pair(b(0, 0), g(0, 0))
    assert sign == 1 and pair == (b(0, 0), g(0, 0))
    # distinct modes: creator moved left with coefficient 1
    sign, pair = normal_order_pair(b(0, 1), g(0, 2))
    assert sign == 1 and pair == (g(0, 2), b(0, 1))
    with pytest.raises(StructureError):
        normal_order_pair(b(0, 0), e(0, 1))


def test_normal_order_slots_sign():
    sign, keys = normal_order_slots([t(0, 1), e(0, 1)])
    assert sign == -1 and keys == [e(0, 1), t(0, 1)]
    sign, keys = normal_order_slots([b(0, 1), g(0, 2)])
    assert sign == 1 and keys == [g(0, 2), b(0, 1)]
    # already normal stays put
    sign, keys = normal_order_slots([g(0, 2), b(0, 1)])
    assert sign == 1 and keys == [g(0, 2), b(0, 1)]


def test_enumerate_box_smallest():
    out = enumerate_box(1, Box(emax=0, b0max=0))
    assert out == sorted([VACUUM, mono(t(0, 0))], key=lambda m: (m.bosons, m.fermions))
    assert len(out) == 2


def test_enumerate_box_e1_counts():
    absolute = enumerate_box(1, Box(emax=1, b0max=0))
    assert len(absolute) == 10
    relative = enumerate_box(1, Box(emax=1, b0max=0, zero_fermions_allowed=False))
    assert len(relative) == 5
    assert len(set(absolute)) == 10


def test_enumerate_box_b0():
    out = enumerate_box(1, Box(emax=0, b0max=2, zero_fermions_allowed=False))
    # vac, b0, b0^2
    assert len(out) == 3


def test_box_deg_constraints():
    out = enumerate_box(1, Box(emax=1, b0max=0, deg_s=1))
    for m in out:
        assert m.degrees()[1] == 1


def test_text_roundtrip():
    m = mono(g(0, 2), b(0, 0), e(0, 1), t(0, -3))
    txt = format_monomial(m)
    assert txt == "g(1,+2) b(1,0) | e(1,+1) t(1,-3)"
    assert parse_monomial(txt) == m
    assert parse_monomial("vac") == VACUUM
    assert format_monomial(VACUUM) == "vac"


@given(st.lists(st.sampled_from([g(0, 1), g(0, 2), b(0, 0), b(0, -1)]), max_size=5))
def test_boson_canonicalization_order_independent(keys):
    import itertools

    base = make_monomial(keys)
    for perm in itertools.islice(itertools.permutations(keys), 6):
        assert make_monomial(list(perm)) == base


def test_fermion_swap_sign():
    s1, m1 = make_monomial([e(0, 1), e(0, 2)])
    s2, m2 = make_monomial([e(0, 2), e(0, 1)])
    assert m1 == m2 and s1 == -s2
    s3, m3 = make_monomial([e(0, 1), e(0, 1)])
    assert s3 == 0 and m3 is None


def test_vector_space_laws():
    v = FockVector.of(mono(g(0, 1)), QI(2)) + FockVector.of(VACUUM, QI(1, 1))
    w = v - v
    assert w.is_zero()
    assert v.scale(0).is_zero()
    assert (v + v) == v.scale(2)
