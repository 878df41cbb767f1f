import pytest

from sweil.scalars import QI, ZERO, ONE
from sweil.liealg import (
    LieAlgebraSpec,
    StructureError,
    abelian,
    builtin_sl2_orthonormal,
    check_jacobi,
    check_invariant_form,
    loop_backend,
    witt_backend,
    fmu_backend,
    parse_backend,
)


def test_abelian_passes_jacobi():
    assert check_jacobi(abelian(3)).passed


def test_sl2_passes_jacobi_and_form():
    spec = builtin_sl2_orthonormal()
    assert check_jacobi(spec).passed
    assert check_invariant_form(spec).passed


def test_sl2_bracket_closes_on_third_vector():
    spec = builtin_sl2_orthonormal()
    v = spec.bracket(0, 1)
    assert v[0].is_zero() and v[1].is_zero() and not v[2].is_zero()


def test_mutated_sl2_fails_with_witness():
    spec = builtin_sl2_orthonormal()
    c = [[[x for x in col] for col in row] for row in spec.c]
    c[0][1][2] = -c[0][1][2]
    bad = LieAlgebraSpec(c, spec.form)
    rep = check_jacobi(bad)
    assert not rep.passed
    assert rep.witness is not None


def test_degenerate_form_detected():
    spec = builtin_sl2_orthonormal()
    form = [[ONE, ZERO, ZERO], [ZERO, ONE, ZERO], [ZERO, ZERO, ZERO]]
    bad = LieAlgebraSpec([[list(col) for col in row] for row in spec.c], form)
    rep = check_invariant_form(bad)
    assert not rep.passed and rep.detail == "degenerate"


def test_malformed_constants_rejected():
    with pytest.raises(StructureError):
        LieAlgebraSpec([[[ZERO]], [[ZERO]]])


def test_witt_bracket():
    b = witt_backend()
    coeffs, mode = b.bracket((0, 2), (0, -1))
    assert coeffs[0] == QI(3) and mode == 1


def test_fmu_action():
    b = fmu_backend(0, 0)
    coeffs, mode = b.bracket((0, 1), (0, 0))
    assert coeffs[0].is_zero() and mode == 1
    # adjoint parameters (-1, 1) match the Witt coefficient m - n
    adj = fmu_backend(-1, 1)
    for m in range(-2, 3):
        for n in range(-2, 3):
            coeffs, _ = adj.bracket((0, m), (0, n))
            assert coeffs[0] == QI(m - n)


def test_loop_abelian_bracket_zero():
    b = loop_backend(abelian(2))
    coeffs, mode = b.bracket((0, 3), (1, -1))
    assert all(c.is_zero() for c in coeffs) and mode == 2


def test_parse_backend():
    assert parse_backend("witt").kind == "witt"
    assert parse_backend("loop:sl2").spec.name == "sl2"
    assert parse_backend("loop:abelian:2").dim == 2
    fb = parse_backend("fmu:-1:1")
    assert fb.lam == QI(-1) and fb.mu == ONE
    with pytest.raises(StructureError):
        parse_backend("nope")
