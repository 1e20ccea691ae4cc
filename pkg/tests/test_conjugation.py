import math

import pytest

from phidual import (
    Elementary,
    INF,
    NEG_INF,
    ProperFunction,
    TabulatedFunction,
    biconjugate,
    biconjugate_leq_f,
    fenchel_moreau_check,
    left_conjugate,
    phi_conjugate,
    proper_piecewise,
)

from oracles import affine_class, box1d, lsc_class

G_NEG_SQ = proper_piecewise("g", (-INF, INF, -1.0, 0.0, 0.0))
F_2SQ = proper_piecewise("f", (-INF, INF, 2.0, 0.0, 0.0))
BOX = box1d()


def g_conjugate_table(a: float, b: float) -> float:
    """sup of b*x - a*x^2 + x^2: piecewise formula for the conjugate of -x^2."""
    if a < 1.0 or (a == 1.0 and b != 0.0):
        return INF
    if a == 1.0:
        return 0.0
    return b * b / (4.0 * (a - 1.0))


def f_shifted_conjugate_table(a: float, b: float) -> float:
    """sup of -b*x + a*x^2 - 2x^2: the left-transform table for 2x^2."""
    if a < 2.0:
        return -b * b / (4.0 * (a - 2.0))
    if a == 2.0:
        return 0.0 if b == 0.0 else INF
    return INF


@pytest.mark.parametrize("a,b", [(2.0, 1.0), (1.5, -3.0), (4.0, 8.0)])
def test_conjugate_of_concave_square_finite_region(a, b):
    cv = phi_conjugate(G_NEG_SQ, Elementary(a, (b,), 0.0), BOX)
    assert cv.method == "closed-form"
    assert cv.value == g_conjugate_table(a, b)
    # the attaining point is the vertex b / (2(a-1))
    assert math.isclose(cv.attaining_point[0], b / (2 * (a - 1)), rel_tol=1e-12)


def test_conjugate_of_concave_square_boundary_and_infinite():
    assert phi_conjugate(G_NEG_SQ, Elementary(1.0, (0.0,), 0.0), BOX).value == 0.0
    cv = phi_conjugate(G_NEG_SQ, Elementary(0.5, (1.0,), 0.0), BOX)
    assert cv.value == INF
    assert cv.attaining_point is None  # infinite values carry no point


@pytest.mark.parametrize("a,b", [(0.0, 2.0), (1.0, -4.0), (1.5, 0.5)])
def test_left_conjugate_of_steep_square(a, b):
    cv = left_conjugate(F_2SQ, Elementary(a, (b,), 0.0), BOX)
    assert cv.value == f_shifted_conjugate_table(a, b)


def test_left_conjugate_boundary_cases():
    assert left_conjugate(F_2SQ, Elementary(2.0, (0.0,), 0.0), BOX).value == 0.0
    zero = proper_piecewise("z", (-INF, INF, 0.0, 0.0, 0.0))
    assert left_conjugate(zero, Elementary(0.0, (0.0,), 0.0), BOX).value == 0.0


def test_left_conjugate_equals_right_at_negated_affine():
    f = proper_piecewise("f", (-2.0, 3.0, 1.0, -1.0, 0.5))
    phi = Elementary(0.0, (1.5,), -2.0)
    lv = left_conjugate(f, phi, BOX).value
    rv = phi_conjugate(f, phi.negated(), BOX).value
    assert math.isclose(lv, rv, rel_tol=1e-12)


def test_biconjugate_of_convex_square_affine_class():
    f = proper_piecewise("f", (-INF, INF, 1.0, 0.0, 0.0))
    assert abs(biconjugate(f, 1.0, affine_class(), BOX) - 1.0) < 1e-3


def test_biconjugate_of_concave_square_lsc_class():
    assert abs(biconjugate(G_NEG_SQ, 0.0, lsc_class(), BOX) - 0.0) < 1e-3


def test_biconjugate_of_concave_square_affine_class_is_neg_infinite():
    # no affine minorant exists; every searched conjugate is +inf
    assert biconjugate(G_NEG_SQ, 0.0, affine_class(), BOX) == NEG_INF


def test_fenchel_moreau_examples():
    assert fenchel_moreau_check(F_2SQ, Elementary(1.0, (0.0,), 0.0), 1.0, BOX)
    # equality case: g(3) + g*(1,0) = -9 = phi(3)
    phi = Elementary(1.0, (0.0,), 0.0)
    assert fenchel_moreau_check(G_NEG_SQ, phi, 3.0, BOX)
    gstar = phi_conjugate(G_NEG_SQ, phi, BOX).value
    assert G_NEG_SQ(3.0) + gstar == phi(3.0)
    with pytest.raises(ValueError):
        fenchel_moreau_check(
            proper_piecewise("f", (0.0, 1.0, 0.0, 0.0, 0.0)), phi, 5.0, BOX
        )


def test_biconjugate_leq_f_cases():
    assert biconjugate_leq_f(F_2SQ, lsc_class(grid=33), box1d(n=501))
    gap = proper_piecewise("f", (-3.0, -1.0, 0.0, 0.0, 0.0), (1.0, 3.0, 0.0, 0.0, 1.0))
    assert biconjugate_leq_f(gap, affine_class(grid=33), box1d(n=501))
    assert biconjugate_leq_f(G_NEG_SQ, affine_class(grid=33), box1d(n=501))


def test_conjugate_monotone_in_function_ordering():
    small = proper_piecewise("s", (-INF, INF, 0.5, 0.0, -1.0))
    large = proper_piecewise("l", (-INF, INF, 0.5, 0.0, 0.0))  # small <= large
    for a, b in [(0.0, 1.0), (1.0, 2.0), (2.0, -3.0)]:
        phi = Elementary(a, (b,), 0.0)
        assert (
            phi_conjugate(small, phi, BOX).value >= phi_conjugate(large, phi, BOX).value
        )


def test_conjugate_constant_shift_identity_is_exact():
    f = proper_piecewise("f", (-4.0, 4.0, 1.0, -2.0, 0.25))
    base = Elementary(0.5, (1.0,), 0.75)
    v0 = phi_conjugate(f, base, BOX).value
    for r in (-3.0, 0.5, 2.0):
        vr = phi_conjugate(f, base.with_constant(base.c + r), BOX).value
        assert vr == v0 + r


def test_biconjugate_recovers_max_of_elementaries():
    # f = max(phi_1, phi_2, phi_3) is class-convex; f** must reproduce it
    parts = [
        Elementary(1.0, (0.0,), 0.0),
        Elementary(0.0, (2.0,), -1.0),
        Elementary(2.0, (-4.0,), 1.0),
    ]
    box = box1d(n=401)
    tab = TabulatedFunction(box, lambda p: max(e(p) for e in parts), "maxelem")
    f = ProperFunction.from_tabulated(tab)
    cls = lsc_class(grid=33, a_max=4.0, v_max=8.0)
    for x in (-2.0, -0.5, 0.0, 1.0, 3.0):
        assert abs(biconjugate(f, x, cls, box) - f(x)) < 1e-3
