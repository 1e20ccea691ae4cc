"""Closed form against grid oracle: the two conjugate routes must agree.

The oracle route treats the same piecewise quadratic as a black box, so this
is the strongest end-to-end check of the vertex-clamping algebra.  Finite
values must match to 1e-4; infinite verdicts must match exactly (the oracle
detects divergence on expanding boxes).
"""

import numpy as np

from phidual import (
    Elementary,
    INF,
    ProperFunction,
    TabulatedFunction,
    phi_conjugate,
    pieces,
)

from oracles import box1d, random_bounded_piecewise

BOX = box1d()


def _as_tabulated(f: ProperFunction) -> ProperFunction:
    pw = f.piecewise
    return ProperFunction.from_tabulated(
        TabulatedFunction(BOX, lambda p: pw(p[0]), f.label + "#tab")
    )


def test_agreement_on_bounded_domains():
    # domains inside [-8, 8]: every sup is interior, both routes finite
    rng = np.random.default_rng(41)
    for k in range(120):
        f = random_bounded_piecewise(rng)
        tab = _as_tabulated(f)
        phi = Elementary(
            float(rng.choice([0.0, 0.5, 1.0, 2.0, 4.0])),
            (float(rng.uniform(-8, 8)),),
            float(rng.uniform(-3, 3)),
        )
        exact = phi_conjugate(f, phi, BOX).value
        oracle = phi_conjugate(tab, phi, BOX).value
        assert exact != INF and oracle != INF
        assert abs(exact - oracle) <= 1e-4, (k, phi, exact, oracle)


def test_agreement_on_full_line_instances():
    # engineered so the leading coefficient of phi - f stays away from zero:
    # either both routes diverge or both find an interior vertex
    rng = np.random.default_rng(43)
    n_inf = n_fin = 0
    for k in range(80):
        alpha = float(rng.uniform(-2.0, -0.3))  # concave f = alpha x^2 + ...
        beta = float(rng.uniform(-2, 2))
        gamma = float(rng.uniform(-3, 3))
        f = ProperFunction.from_piecewise(
            pieces((-INF, INF, alpha, beta, gamma)), "f"
        )
        tab = _as_tabulated(f)
        if rng.uniform() < 0.5:
            # a + alpha <= -0.2: phi - f grows quadratically, sup infinite
            a = float(rng.uniform(0.0, -alpha - 0.2))
            v = float(rng.uniform(-4, 4))
        else:
            # a + alpha >= 0.2: concave difference with vertex inside the box
            a = float(rng.uniform(-alpha + 0.2, -alpha + 3.0))
            v = beta + 2.0 * (a + alpha) * float(rng.uniform(-8, 8))
        phi = Elementary(a, (v,), 0.0)
        exact = phi_conjugate(f, phi, BOX).value
        oracle = phi_conjugate(tab, phi, BOX).value
        if exact == INF:
            n_inf += 1
            assert oracle == INF, (k, phi, alpha, oracle)
        else:
            n_fin += 1
            assert oracle != INF, (k, phi, alpha, exact)
            assert abs(exact - oracle) <= 1e-4, (k, phi, exact, oracle)
    assert n_inf > 10 and n_fin > 10  # both branches exercised


def test_infinite_conjugates_carry_no_attaining_point():
    g = ProperFunction.from_piecewise(pieces((-INF, INF, -1.0, 0.0, 0.0)), "g")
    cv = phi_conjugate(g, Elementary(0.0, (1.0,), 0.0), BOX)
    assert cv.value == INF and cv.attaining_point is None
