from fractions import Fraction
from itertools import product

import pytest

from sweil.scalars import QI, ZERO, ONE
from sweil.liealg import StructureError
from sweil.sca import (
    EVEN_SYMBOLS,
    KAHLER_SYMBOLS,
    N2_SYMBOLS,
    ODD_SYMBOLS,
    SCAElement,
    SYMBOLS,
    SuperVectorField,
    L0_element,
    deg,
    derext_action,
    divergence,
    kahler_bracket,
    kahler_parity,
    n2_bracket,
    parity_of,
    psi,
    remark_F_field,
    s2a_basis_bracket,
    s2a_bracket,
    s_alpha_obstruction,
    spectral_flow,
    vf_bracket,
    vf_realize,
)

HALF = QI(Fraction(1, 2))
ALPHAS = (ZERO, HALF, QI(1))


def basis_list(window):
    return [(s, n) for s in SYMBOLS for n in range(-window, window + 1)]


def vf_of_element(alpha, el):
    out = SuperVectorField()
    for (sym, n), c in el.coeffs.items():
        out = out + vf_realize(alpha, sym, n).scale(c)
    assert el.central.is_zero()
    return out


@pytest.mark.parametrize("alpha", ALPHAS)
def test_super_antisymmetry(alpha):
    for (sa, na), (sb, nb) in product(basis_list(2), repeat=2):
        ab = s2a_basis_bracket(alpha, sa, na, sb, nb)
        ba = s2a_basis_bracket(alpha, sb, nb, sa, na)
        expect = ba if (parity_of(sa) and parity_of(sb)) else ba.scale(QI(-1))
        assert ab == expect, (sa, na, sb, nb)


@pytest.mark.parametrize("alpha", (ZERO, HALF))
def test_super_jacobi_with_cocycle(alpha):
    bl = basis_list(2)
    for (sa, na), (sb, nb), (sc, nc) in product(bl, bl, bl):
        A = SCAElement.basis(sa, na)
        B = SCAElement.basis(sb, nb)
        C = SCAElement.basis(sc, nc)
        t1 = s2a_bracket(alpha, A, s2a_bracket(alpha, B, C))
        t2 = s2a_bracket(alpha, s2a_bracket(alpha, A, B), C)
        t3 = s2a_bracket(alpha, B, s2a_bracket(alpha, A, C))
        if parity_of(sa) and parity_of(sb):
            t3 = t3.scale(QI(-1))
        assert (t1 - t2 - t3).is_zero(), (sa, na, sb, nb, sc, nc)


@pytest.mark.parametrize("alpha", (ZERO, HALF))
def test_vector_field_oracle_matches_table(alpha):
    # independent realization by superderivations of C[t,1/t] (x) /\(th1,th2)
    for sa, sb in product(SYMBOLS, repeat=2):
        for na in range(-3, 4):
            for nb in range(-3, 4):
                lhs = vf_bracket(
                    vf_realize(alpha, sa, na), vf_realize(alpha, sb, nb)
                )
                tab = s2a_basis_bracket(
                    alpha, sa, na, sb, nb, include_cocycle=False
                )
                assert lhs == vf_of_element(alpha, tab), (sa, na, sb, nb)


@pytest.mark.parametrize("alpha", ALPHAS)
def test_basis_fields_satisfy_weighted_divergence(alpha):
    for s in SYMBOLS:
        for n in range(-3, 4):
            assert not s_alpha_obstruction(alpha, vf_realize(alpha, s, n))


def test_weighted_divergence_negative_control():
    x = SuperVectorField()
    x.add_term("t", 0, 2, ONE)
    assert s_alpha_obstruction(ZERO, x)
    assert divergence(x)


@pytest.mark.parametrize("alpha", (HALF, QI(1)))
def test_spectral_flow_is_homomorphism(alpha):
    for sa, sb in product(N2_SYMBOLS, repeat=2):
        for na in range(-3, 4):
            for nb in range(-3, 4):
                A = SCAElement.basis(sa, na)
                B = SCAElement.basis(sb, nb)
                lhs = spectral_flow(alpha, s2a_bracket(alpha, A, B))
                rhs = n2_bracket(
                    spectral_flow(alpha, A), spectral_flow(alpha, B)
                )
                assert lhs == rhs, (sa, na, sb, nb)


def test_spectral_flow_fixes_odd_and_shifts_even():
    a = QI(1)
    assert spectral_flow(a, SCAElement.basis("h", 3)) == SCAElement.basis("h", 3)
    img = spectral_flow(a, SCAElement.basis("L", 0))
    assert img.coeffs[("L", 0)] == ONE
    assert img.coeffs[("H", 0)] == -HALF
    assert img.central == QI(Fraction(1, 24))


@pytest.mark.parametrize("alpha", ALPHAS)
def test_grading_element(alpha):
    L0 = L0_element(alpha)
    for s in SYMBOLS:
        for n in range(-3, 4):
            B = SCAElement.basis(s, n)
            got = s2a_bracket(alpha, L0, B, include_cocycle=False)
            assert got == B.scale(deg(alpha, s, n)), (s, n)


@pytest.mark.parametrize("alpha", (QI(0), QI(1)))
def test_exterior_derivations_are_derivations(alpha):
    for D in ("EE", "HH", "FF"):
        for sa, sb in product(SYMBOLS, repeat=2):
            for na in range(-2, 3):
                for nb in range(-2, 3):
                    A = SCAElement.basis(sa, na)
                    B = SCAElement.basis(sb, nb)
                    lhs = derext_action(
                        alpha, D, s2a_bracket(alpha, A, B, include_cocycle=False)
                    )
                    rhs = s2a_bracket(
                        alpha, derext_action(alpha, D, A), B, include_cocycle=False
                    ) + s2a_bracket(
                        alpha, A, derext_action(alpha, D, B), include_cocycle=False
                    )
                    assert lhs == rhs, (D, sa, na, sb, nb)


@pytest.mark.parametrize("alpha", (QI(0), QI(1)))
def test_exterior_derivations_close_to_sl2(alpha):
    def comm(d1, d2, el):
        return derext_action(alpha, d1, derext_action(alpha, d2, el)) - (
            derext_action(alpha, d2, derext_action(alpha, d1, el))
        )

    for s in SYMBOLS:
        for n in range(-3, 4):
            B = SCAElement.basis(s, n)
            assert comm("HH", "EE", B) == derext_action(alpha, "EE", B).scale(QI(2))
            assert comm("HH", "FF", B) == derext_action(alpha, "FF", B).scale(QI(-2))
            assert comm("EE", "FF", B) == derext_action(alpha, "HH", B)


def test_exterior_raising_needs_integer_parameter():
    with pytest.raises(StructureError):
        derext_action(HALF, "EE", SCAElement.basis("h", 0))
    # the Cartan element is available for any parameter
    out = derext_action(HALF, "HH", SCAElement.basis("h", 0))
    assert out == SCAElement.basis("h", 0, QI(-1))


def test_exterior_remark_field_realizes_lowering():
    for ia in (QI(0), QI(1)):
        FFf = remark_F_field(ia)
        assert not s_alpha_obstruction(ia, FFf)
        for s in ODD_SYMBOLS:
            for k in range(-3, 4):
                lhs = vf_bracket(FFf, vf_realize(ia, s, k))
                rhs = vf_of_element(
                    ia, derext_action(ia, "FF", SCAElement.basis(s, k))
                )
                assert lhs == rhs, (ia, s, k)


def test_psi_intertwines_classical_table():
    for sa, sb in product(KAHLER_SYMBOLS, repeat=2):
        table = kahler_bracket({sa: ONE}, {sb: ONE})
        lhs = SCAElement()
        for sym, c in table.items():
            lhs = lhs + psi(sym).scale(c)
        rhs = s2a_bracket(ZERO, psi(sa), psi(sb), include_cocycle=False)
        assert lhs == rhs, (sa, sb, table)


def test_psi_images_have_degree_zero():
    for sym in KAHLER_SYMBOLS:
        for (s, n) in psi(sym).coeffs:
            assert deg(ZERO, s, n) == ZERO


def test_kahler_table_is_super_lie():
    for sa, sb in product(KAHLER_SYMBOLS, repeat=2):
        ab = kahler_bracket({sa: ONE}, {sb: ONE})
        ba = kahler_bracket({sb: ONE}, {sa: ONE})
        sgn = QI(1 if kahler_parity(sa) and kahler_parity(sb) else -1)
        assert ab == {k: v * sgn for k, v in ba.items()}
    for sa, sb, sc in product(KAHLER_SYMBOLS, repeat=3):
        t1 = kahler_bracket({sa: ONE}, kahler_bracket({sb: ONE}, {sc: ONE}))
        t2 = kahler_bracket(kahler_bracket({sa: ONE}, {sb: ONE}), {sc: ONE})
        t3 = kahler_bracket({sb: ONE}, kahler_bracket({sa: ONE}, {sc: ONE}))
        # [A,[B,C]] - [[A,B],C] - (-1)^{pA pB}[B,[A,C]] == 0
        s = QI(1 if kahler_parity(sa) and kahler_parity(sb) else -1)
        acc = {}
        for d, sg in ((t1, ONE), (t2, QI(-1)), (t3, s)):
            for k, v in d.items():
                acc[k] = acc.get(k, ZERO) + v * sg
        assert all(v.is_zero() for v in acc.values()), (sa, sb, sc)


def test_kahler_laplacian_central():
    for sym in KAHLER_SYMBOLS:
        assert kahler_bracket({"lap": ONE}, {sym: ONE}) == {}


def test_kahler_fixture_rows():
    assert kahler_bracket({"L": ONE}, {"Lam": ONE}) == {"H": ONE}
    assert kahler_bracket({"d": ONE}, {"ds": ONE}) == {"lap": ONE}
    assert kahler_bracket({"Lam": ONE}, {"d": ONE}) == {"dcs": ONE}
    assert kahler_bracket({"L": ONE}, {"ds": ONE}) == {"dc": QI(-1)}


def test_cocycle_fixture_values():
    # quadratic central term on the L string
    out = s2a_basis_bracket(ZERO, "L", 2, "L", -2)
    assert out.central == HALF  # 2*(4-1)/12
    out = s2a_basis_bracket(ZERO, "H", 1, "H", -1)
    assert out.central == QI(Fraction(1, 3))
    out = s2a_basis_bracket(ZERO, "E", 2, "F", -2)
    assert out.central == QI(Fraction(1, 3))
    # deg-zero odd pairs at alpha = 0 carry no central term
    assert s2a_basis_bracket(ZERO, "h", 0, "p", 0).central == ZERO
    assert s2a_basis_bracket(ZERO, "x", -1, "y", 1).central == ZERO


def test_n2_symbol_guard():
    with pytest.raises(StructureError):
        n2_bracket(SCAElement.basis("E", 0), SCAElement.basis("H", 0))


def test_element_arithmetic_and_parity():
    a = SCAElement.basis("L", 1, QI(2)) + SCAElement.center(QI(3))
    assert a.parity() == 0
    assert (a - a).is_zero()
    odd = SCAElement.basis("h", 1)
    assert odd.parity() == 1
    mixed = odd + SCAElement.basis("L", 0)
    assert mixed.parity() is None
