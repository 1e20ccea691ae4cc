import numpy as np
import pytest

from phidual import (
    Elementary,
    INF,
    NEG_INF,
    ProblemInstance,
    UnsupportedClassError,
    certify_zero_gap_via_intersection,
    check_bui_condition,
    check_intersection_direct,
    check_intersection_property,
    get_entry,
    proper_piecewise,
    theorem_bridge_report,
    val_lagrangian_dual,
    val_lagrangian_primal,
)
from phidual.gap import elementary_extremum_on_box, support_candidates

from oracles import affine_class, box1d

PAIR = get_entry("example-6.1").build()
FEN = get_entry("fenchel-quadratic").build()
GAP = get_entry("gap-instance").build()
PIN = [(Elementary(1.0, (0.0,), 0.0), Elementary(3.0, (0.0,), 0.0))]

BOX2 = box1d(-2.0, 2.0, 401)


def test_constant_slice_dominates_its_own_level():
    phi1 = Elementary(0.0, (0.0,), -0.5)  # constant -0.5
    phi2 = Elementary(2.0, (1.0,), 0.0)
    cert = check_intersection_property(phi1, phi2, -0.5, BOX2)
    assert cert.holds and cert.t0 == 1.0
    assert cert.min_over_x_at_t0 >= -0.5 - 1e-9


def test_opposed_slopes_balance_at_interior_t():
    # v(t) = min (2t-1) x on [-2, 2] = -2|2t-1| peaks at an interior t0 = 1/2
    phi1 = Elementary(0.0, (1.0,), 0.0)
    phi2 = Elementary(0.0, (-1.0,), 0.0)
    cert = check_intersection_property(phi1, phi2, -1.0, BOX2)
    assert cert.holds
    assert abs(cert.t0 - 0.5) < 1e-6
    assert abs(cert.min_over_x_at_t0) < 1e-9


def test_flat_against_concave_square():
    # the zero function against -x^2: only t = 1 dominates level -1
    cert = check_intersection_property(
        Elementary(0.0, (0.0,), 0.0), Elementary(1.0, (0.0,), 0.0), -1.0, BOX2
    )
    assert cert.holds and cert.t0 == 1.0


def test_identical_negative_squares_fail():
    phi = Elementary(1.0, (0.0,), 0.0)  # -x^2
    cert = check_intersection_property(phi, phi, 0.0, BOX2)
    assert not cert.holds
    assert cert.min_over_x_at_t0 == -4.0


def test_direct_oracle_on_support_pair():
    # the zero constant supports the first Lagrangian slice; any minorant of
    # -x^2 supports the second; the pair certifies every negative level
    phi1 = Elementary(0.0, (0.0,), 0.0)
    phi2 = Elementary(1.0, (0.0,), 0.0)
    assert check_intersection_direct(phi1, phi2, -0.5, box1d(n=501))
    assert not check_intersection_direct(phi2, phi2, 0.0, BOX2, t_grid_size=101)


def test_lemma_and_direct_agree_on_random_pairs():
    rng = np.random.default_rng(17)
    box = box1d(n=501)
    agree = 0
    for _ in range(80):
        phi1 = Elementary(rng.choice([0.0, 0.5, 1.0]), (rng.uniform(-3, 3),), rng.uniform(-4, 4))
        phi2 = Elementary(rng.choice([0.0, 0.5, 1.0]), (rng.uniform(-3, 3),), rng.uniform(-4, 4))
        alpha = float(rng.uniform(-6, 2))
        cert = check_intersection_property(phi1, phi2, alpha, box)
        if abs(cert.min_over_x_at_t0 - alpha) < 5e-3:
            continue  # skip near-ties where grid and exact checks can differ
        assert cert.holds == check_intersection_direct(phi1, phi2, alpha, box, 501)
        agree += 1
    assert agree > 40


def test_sampled_concavity_of_the_combination_minimum():
    rng = np.random.default_rng(23)
    box = box1d(n=101)
    for _ in range(20):
        phi1 = Elementary(rng.choice([0.0, 1.0, 2.0]), (rng.uniform(-3, 3),), rng.uniform(-2, 2))
        phi2 = Elementary(rng.choice([0.0, 0.5]), (rng.uniform(-3, 3),), rng.uniform(-2, 2))
        v = lambda t: elementary_extremum_on_box(phi1.combine(phi2, t), box, "inf")[0]
        ts = np.linspace(0, 1, 21)
        for a, b in zip(ts, ts[2:]):
            assert v((a + b) / 2) >= 0.5 * (v(a) + v(b)) - 1e-9


def test_certify_with_pinned_pair_uses_constant_alpha_support():
    certs = certify_zero_gap_via_intersection(PAIR, [-0.5, -0.1, -0.01], pairs=PIN)
    for cert in certs:
        assert cert.found
        assert cert.support1.a == 0.0 and cert.support1.v == (0.0,)
        assert cert.support1.c == cert.alpha
        assert cert.psi2.a == 3.0


def test_certify_default_search_on_convex_instance():
    certs = certify_zero_gap_via_intersection(FEN, [-0.1])
    assert certs[0].found


def test_certify_zero_budget_is_inconclusive():
    certs = certify_zero_gap_via_intersection(PAIR, [-0.5], pairs=PIN, check_budget=0)
    assert not certs[0].found and certs[0].checks_used == 0


def test_certify_rejects_alpha_at_or_above_primal_level():
    with pytest.raises(ValueError):
        certify_zero_gap_via_intersection(PAIR, [0.5], pairs=PIN)


def test_certificate_reusable_at_lower_levels():
    cert = certify_zero_gap_via_intersection(PAIR, [-0.01], pairs=PIN)[0]
    for lower in (-0.1, -1.0, -7.5):
        again = check_intersection_property(
            cert.support1, cert.support2, lower, PAIR.box
        )
        assert again.holds


def test_certified_levels_stay_below_dual_value():
    alphas = [-0.5, -0.1, -0.01]
    certs = certify_zero_gap_via_intersection(PAIR, alphas, pairs=PIN)
    assert all(c.found for c in certs)
    v_ld, _ = val_lagrangian_dual(PAIR)
    assert v_ld >= max(alphas) - 1e-9


def test_support_candidates_of_lagrangian_slices():
    cands = support_candidates(PAIR, Elementary(1.0, (0.0,), 0.0), -0.5)
    assert any(c.a == 0.0 and c.v == (0.0,) and c.c == -0.5 for c in cands)
    cands3 = support_candidates(PAIR, Elementary(3.0, (0.0,), 0.0), -0.5)
    assert cands3  # the slice -x^2 has a nonempty support


def test_bui_condition_fails_for_quadratic_pair():
    res = check_bui_condition(PAIR)
    assert not res.overall
    assert all(not w.found for w in res.per_eps)


def test_bui_condition_holds_for_convex_pair():
    res = check_bui_condition(FEN)
    assert res.overall
    assert all(w.found and w.verified for w in res.per_eps)
    # the canonical witness (x_bar = 0, phi = 0) verifies at every eps
    from phidual import is_eps_subgradient

    zero = Elementary(0.0, (0.0,), 0.0)
    for eps in res.epsilons:
        assert is_eps_subgradient(FEN.g, 0.0, zero, eps, FEN.box).holds
        assert is_eps_subgradient(FEN.f, 0.0, zero, eps, FEN.box).holds


def test_bui_condition_ignores_constant_offsets():
    inst = ProblemInstance(
        proper_piecewise("f", (-INF, INF, 1.0, 0.0, 0.0)),
        proper_piecewise("g", (-INF, INF, 1.0, 0.0, -1.0)),
        box1d(),
        affine_class(),
    )
    res = check_bui_condition(inst)
    assert res.overall and res.per_eps[0].x_bar == (0.0,)


def test_bui_guard_on_unsupported_class():
    import types

    bad_phi = types.SimpleNamespace(contains_zero=True, additive=False, dim=1)
    bad = types.SimpleNamespace(f=PAIR.f, g=PAIR.g, box=PAIR.box, phi=bad_phi)
    with pytest.raises(UnsupportedClassError):
        check_bui_condition(bad)


def test_bridge_on_quadratic_pair():
    br = theorem_bridge_report(PAIR, pairs=PIN)
    assert not br.condition_sum
    assert br.condition_intersection
    assert not br.contradiction
    assert br.missing_hypotheses == ["symmetric"]
    assert br.primal_biconjugate_equality


def test_bridge_on_convex_instance():
    br = theorem_bridge_report(FEN)
    assert br.condition_sum and br.condition_intersection
    assert br.backward_applicable and br.forward_applicable
    assert not br.contradiction


def test_bridge_on_gap_instance():
    br = theorem_bridge_report(GAP)
    assert not br.condition_sum
    assert not br.condition_intersection  # inconclusive at levels above the gap
    assert not br.contradiction
    v_ld, _ = val_lagrangian_dual(GAP)
    assert br.val_P > v_ld + 0.5  # the positive gap is visible


def test_bridge_handles_infeasible_dual_class():
    # -x^2 has no affine minorant: val(LP) = -inf, so no level is admissible
    # and the intersection condition is reported as not evaluable
    inst = ProblemInstance(
        PAIR.f, PAIR.g, PAIR.box, affine_class()
    )
    br = theorem_bridge_report(inst)
    assert not br.condition_sum
    assert not br.condition_intersection
    assert br.intersection == []
    assert any("not evaluable" in n for n in br.notes)
