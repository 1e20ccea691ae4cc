"""Perturbation duality for minimizing f + g over a box stand-in of the space.

The perturbation function p(x, y) = f(x) + g(x+y) together with the coupling
c((phi, psi), (x, y)) = phi(x) + psi(x+y) - psi(x) produces the conjugate dual

    (CD)   max over phi of  -*f(phi) - g*(phi),

equivalently the Lagrangian dual of L(x, phi) = f(x) + phi(x) - g*(phi).  The
symmetric-pair variants (CD^sym, ICD) restrict to phi with -phi in the class,
which for the lsc-quadratic kind forces the affine subfamily.  Every searched
sup over the class is truncated to the class's parameter box, so all reported
dual values are lower bounds of the untruncated sups.

`duality_chain_report` evaluates the whole chain

    val(P) >= val(LP) >= val(LD) = val(CD) >= val(ICD)

sharing refined winners and witness points across the entries, so that a
reported violation reflects an actual defect rather than search asymmetry.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np

from .core import (
    INF,
    NEG_INF,
    BoxDomain,
    Point,
    as_point,
    ext_to_json,
    extremum_on_box,
    inf_on_grid,
    is_finite,
    refine_extremum,
)
from .conjugation import (
    CLOSED_FORM,
    GRID_ORACLE,
    biconjugate_on_grid,
    conjugate_table,
    conjugates_at_params,
    left_conjugate,
    phi_conjugate,
    refine_in_params,
)
from .functions import (
    Elementary,
    PhiClass,
    ProperFunction,
    UnsupportedClassError,
    values_on_grid,
)


@dataclass(frozen=True)
class ProblemInstance:
    """Minimize f + g over the box with duals searched in the given class."""

    f: ProperFunction
    g: ProperFunction
    box: BoxDomain
    phi: PhiClass

    def __post_init__(self):
        dims = {self.f.dim, self.g.dim, self.box.dim, self.phi.dim}
        if len(dims) != 1:
            raise ValueError(f"dimension mismatch across instance parts: {dims}")
        if not np.any(np.isfinite(objective_values(self.f, self.g, self.box))):
            raise ValueError("dom(f) and dom(g) do not meet on the working grid")


@lru_cache(maxsize=128)
def objective_values(f: ProperFunction, g: ProperFunction, box: BoxDomain) -> np.ndarray:
    vals = values_on_grid(f, box) + values_on_grid(g, box)
    vals.setflags(write=False)
    return vals


# ---------------------------------------------------------------------------
# pointwise objects
# ---------------------------------------------------------------------------


def perturbation(inst: ProblemInstance, x, y) -> float:
    """p(x, y) = f(x) + g(x+y); p(x, 0) is the objective of (P)."""
    x, y = as_point(x), as_point(y)
    return inst.f(x) + inst.g(tuple(a + b for a, b in zip(x, y)))


def coupling(phi: Elementary, psi: Elementary, x, y) -> float:
    """c((phi, psi), (x, y)) = phi(x) + psi(x+y) - psi(x).

    When psi is affine this collapses to phi(x) + <v_psi, y>, the standard
    bilinear pairing.
    """
    x, y = as_point(x), as_point(y)
    z = tuple(a + b for a, b in zip(x, y))
    return phi(x) + psi(z) - psi(x)


def perturbation_conjugate_zero(inst: ProblemInstance, phi: Elementary) -> float:
    """p*(0, phi) = *f(phi) + g*(phi)."""
    return left_conjugate(inst.f, phi, inst.box).value + phi_conjugate(
        inst.g, phi, inst.box
    ).value


def perturbation_conjugate_direct(
    inst: ProblemInstance,
    phi: Elementary,
    psi: Elementary,
    x_box: Optional[BoxDomain] = None,
    y_box: Optional[BoxDomain] = None,
) -> float:
    """Direct double-grid sup of c((phi, psi), (x, y)) - p(x, y).

    Brute-force evaluator of the generalized-coupling conjugate; used to
    cross-check the factored form and to exercise couplings with psi != phi.
    """
    x_box = x_box or inst.box
    y_box = y_box or inst.box
    best = NEG_INF
    for x in x_box.grid():
        fx = inst.f(x)
        if fx == INF:
            continue
        base = phi(x) - psi(x) - fx
        for y in y_box.grid():
            z = tuple(a + b for a, b in zip(x, y))
            gz = inst.g(z)
            if gz == INF:
                continue
            val = base + psi(z) - gz
            if val > best:
                best = val
    return best


def lagrangian(inst: ProblemInstance, x, phi: Elementary) -> float:
    """L(x, phi) = f(x) + phi(x) - g*(phi).

    When g*(phi) = +inf the multiplier phi is infeasible and L(., phi) is
    reported as -inf.
    """
    gstar = phi_conjugate(inst.g, phi, inst.box).value
    if gstar == INF:
        return NEG_INF
    return inst.f(x) + phi(as_point(x)) - gstar


def lagrangian_piecewise(inst: ProblemInstance, phi: Elementary):
    """L(., phi) as a PiecewiseQuadratic when f is piecewise; None otherwise."""
    if inst.f.piecewise is None:
        return None
    gstar = phi_conjugate(inst.g, phi, inst.box).value
    if gstar == INF:
        return None
    from .functions import PiecewiseQuadratic, QuadraticPiece

    return PiecewiseQuadratic(
        tuple(
            QuadraticPiece(
                p.lo, p.hi, p.a2 - phi.a, p.a1 + phi.v[0], p.a0 + phi.c - gstar
            )
            for p in inst.f.piecewise.pieces
        )
    )


# ---------------------------------------------------------------------------
# optimal values
# ---------------------------------------------------------------------------


def _exact_path(inst: ProblemInstance) -> bool:
    return inst.f.piecewise is not None and inst.g.piecewise is not None


def val_primal(inst: ProblemInstance) -> tuple[float, Optional[Point]]:
    """inf of f + g on the grid, refined around the first minimizer.

    Off-grid refinement only applies on the exact piecewise path: a tabulated
    member pins every quantifier of the instance to the grid, keeping primal
    and dual values comparable.
    """
    vals = objective_values(inst.f, inst.g, inst.box)
    h = lambda p: inst.f(p) + inst.g(p)
    rounds = 25 if _exact_path(inst) else 0
    return extremum_on_box(h, inst.box, kind="inf", values=vals, rounds=rounds)


def dual_value_at(inst: ProblemInstance, phi: Elementary) -> float:
    """-*f(phi) - g*(phi), the dual objective at one elementary function."""
    lf = left_conjugate(inst.f, phi, inst.box).value
    gs = phi_conjugate(inst.g, phi, inst.box).value
    if lf == INF or gs == INF:
        return NEG_INF
    return -lf - gs


def _dual_table(inst: ProblemInstance) -> tuple[np.ndarray, np.ndarray]:
    lf = conjugate_table(inst.f, inst.phi, inst.box, "left")
    gs = conjugate_table(inst.g, inst.phi, inst.box, "right")
    return lf.params, -lf.values - gs.values


def val_lagrangian_dual(
    inst: ProblemInstance, refine_rounds: int = 20
) -> tuple[float, Optional[Elementary]]:
    """sup over the truncated class of inf_x L(x, phi) = -*f(phi) - g*(phi).

    Infeasible parameters (infinite conjugates) contribute -inf and are
    thereby skipped; the winner is refined inside the parameter box.
    """
    params, d = _dual_table(inst)
    i = int(np.argmax(d))
    if d[i] == NEG_INF:
        return NEG_INF, None
    if params.shape[1] == 0:
        return float(d[i]), inst.phi.member(())

    def objective(p):
        arr = np.asarray([list(p)], dtype=float)
        lf = conjugates_at_params(inst.f, inst.phi, inst.box, arr, "left")[0]
        gs = conjugates_at_params(inst.g, inst.phi, inst.box, arr, "right")[0]
        return NEG_INF if (lf == INF or gs == INF) else -lf - gs

    val, p = refine_in_params(objective, inst.phi, tuple(params[i]), refine_rounds)
    if val > float(d[i]):
        return val, inst.phi.member(p)
    return float(d[i]), inst.phi.member(tuple(params[i]))


def val_cd(inst: ProblemInstance) -> tuple[float, Optional[Elementary]]:
    """The conjugate dual; identical computation to `val_lagrangian_dual`."""
    return val_lagrangian_dual(inst)


def _affine_subclass(phi_class: PhiClass) -> PhiClass:
    if phi_class.kind == "constant-only":
        return phi_class
    sizes = (
        phi_class.grid_sizes[1:]
        if phi_class.kind == "lsc-quadratic"
        else phi_class.grid_sizes
    )
    return PhiClass(
        "affine",
        dim=phi_class.dim,
        a_max=phi_class.a_max,
        v_max=phi_class.v_max,
        grid_sizes=sizes,
    )


def _symmetric_pair_sweep(
    inst: ProblemInstance, refine_rounds: int = 20
) -> tuple[float, Optional[Elementary]]:
    """sup of -f*(-phi) - g*(phi) over {phi : -phi in class}.

    For the lsc-quadratic kind the constraint a >= 0 on both phi and -phi
    forces a = 0, so the sweep always runs over the affine subfamily.
    """
    sub = _affine_subclass(inst.phi)
    params = sub.param_grid()
    fneg = conjugates_at_params(inst.f, sub, inst.box, -params, "right")
    gpos = conjugates_at_params(inst.g, sub, inst.box, params, "right")
    d = -fneg - gpos
    i = int(np.argmax(d))
    if d[i] == NEG_INF:
        return NEG_INF, None
    if params.shape[1] == 0:
        return float(d[i]), sub.member(())

    def objective(p):
        arr = np.asarray([list(p)], dtype=float)
        fv = conjugates_at_params(inst.f, sub, inst.box, -arr, "right")[0]
        gv = conjugates_at_params(inst.g, sub, inst.box, arr, "right")[0]
        return NEG_INF if (fv == INF or gv == INF) else -fv - gv

    val, p = refine_in_params(objective, sub, tuple(params[i]), refine_rounds)
    if val > float(d[i]):
        return val, sub.member(p)
    return float(d[i]), sub.member(tuple(params[i]))


def val_cd_sym(inst: ProblemInstance) -> tuple[float, Optional[Elementary]]:
    """The symmetric-form conjugate dual: max of -f*(-phi) - g*(phi)."""
    return _symmetric_pair_sweep(inst)


def val_icd(
    inst: ProblemInstance,
) -> tuple[float, Optional[tuple[Elementary, Elementary]]]:
    """The infimal-convolution dual: max over pairs phi1 + phi2 = 0 of
    -f*(phi2) - g*(phi1).

    Zero-sum pairs force both members affine here (a1 + a2 = 0 with both
    >= 0), so the sweep coincides with the symmetric-form one.
    """
    if not (inst.phi.contains_zero and inst.phi.additive):
        raise UnsupportedClassError(
            "the infimal-convolution dual needs 0 in the class and additivity"
        )
    val, phi1 = _symmetric_pair_sweep(inst)
    if phi1 is None:
        return val, None
    return val, (phi1, phi1.negated())


def _biconjugate_at_points(
    inst: ProblemInstance, pts: np.ndarray, extra_phis: tuple[Elementary, ...]
) -> np.ndarray:
    """g** restricted to the searched family, at arbitrary points."""
    table = conjugate_table(inst.g, inst.phi, inst.box, "right")
    params, values = table.params, table.values
    if extra_phis:
        ep = np.array(
            [inst.phi.params_of(p) for p in extra_phis], dtype=float
        ).reshape(len(extra_phis), inst.phi.n_params)
        ev = conjugates_at_params(inst.g, inst.phi, inst.box, ep, "right")
        params = np.vstack([params, ep])
        values = np.concatenate([values, ev])
    if inst.phi.kind == "lsc-quadratic":
        a, v = params[:, 0], params[:, 1:]
    elif inst.phi.kind == "affine":
        a, v = np.zeros(params.shape[0]), params
    else:
        a, v = np.zeros(params.shape[0]), np.zeros((params.shape[0], inst.phi.dim))
    sq = np.sum(pts * pts, axis=1)
    scores = -np.outer(a, sq) + v @ pts.T - values[:, None]
    return np.max(scores, axis=0)


def _lagrangian_primal_search(
    inst: ProblemInstance,
    extra_phis: tuple[Elementary, ...] = (),
    extra_points: tuple[Point, ...] = (),
    refine_rounds: int = 25,
) -> tuple[float, Optional[Point]]:
    # g** <= g holds pointwise, so clamping by g is sound and keeps grid-sup
    # conjugates of tabulated functions from leaking above g between grid
    # points (where the refined primal witness may live)
    bic = biconjugate_on_grid(inst.g, inst.phi, inst.box, extra_phis)
    if np.all(bic == NEG_INF):
        return NEG_INF, None
    bic = np.minimum(bic, values_on_grid(inst.g, inst.box))
    fv = values_on_grid(inst.f, inst.box)
    grid = inst.box.grid()
    v, p = inf_on_grid(None, grid, values=fv + bic)
    if p is None:
        return v, p

    def m(x: Point) -> float:
        fx = inst.f(x)
        if fx == INF:
            return INF
        b = float(_biconjugate_at_points(inst, np.asarray([x]), extra_phis)[0])
        return fx + min(b, inst.g(x))

    if _exact_path(inst):
        v, p = refine_extremum(m, inst.box, p, refine_rounds, kind="inf")
    for q in extra_points:
        mq = m(as_point(q))
        if mq < v:
            v, p = mq, as_point(q)
    return v, p


def val_lagrangian_primal(inst: ProblemInstance) -> float:
    """inf of f + g** over the box, via sup_phi L(x, phi) = f(x) + g**(x).

    Uses the biconjugate identity instead of a nested sup-inf; -inf when the
    truncated class contains no feasible elementary function for g.
    """
    return _lagrangian_primal_search(inst)[0]


# ---------------------------------------------------------------------------
# the full chain
# ---------------------------------------------------------------------------

_CHAIN = ("val_P", "val_LP", "val_LD", "val_CD", "val_CD_sym", "val_ICD")


@dataclass
class DualityReport:
    """Evaluated value chain with gaps, methods and truncation provenance."""

    val_P: float
    val_LP: float
    val_LD: float
    val_CD: float
    val_CD_sym: float
    val_ICD: float
    argmin_P: Optional[Point]
    best_dual_elementary: Optional[Elementary]
    gaps: dict
    chain_ok: bool
    violations: list = field(default_factory=list)
    methods: dict = field(default_factory=dict)
    truncation: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    gap_analysis: Optional[dict] = None

    def values(self) -> dict:
        return {name: getattr(self, name) for name in _CHAIN}

    def as_dict(self) -> dict:
        best = self.best_dual_elementary
        doc = {
            "values": {k: ext_to_json(v) for k, v in self.values().items()},
            "argmin_P": list(self.argmin_P) if self.argmin_P else None,
            "best_dual_elementary": (
                {"a": best.a, "v": list(best.v), "c": best.c} if best else None
            ),
            "gaps": {k: ext_to_json(v) for k, v in self.gaps.items()},
            "chain_ok": self.chain_ok,
            "violations": list(self.violations),
            "methods": dict(self.methods),
            "truncation": dict(self.truncation),
            "notes": list(self.notes),
        }
        if self.gap_analysis is not None:
            doc["gap_analysis"] = self.gap_analysis
        return doc

    def csv_rows(self) -> list[dict]:
        rows = []
        for name in _CHAIN:
            attain = ""
            if name == "val_P" and self.argmin_P:
                attain = ";".join(f"{c:.12g}" for c in self.argmin_P)
            if name in ("val_LD", "val_CD") and self.best_dual_elementary:
                b = self.best_dual_elementary
                attain = f"a={b.a:.12g};v=" + ",".join(f"{c:.12g}" for c in b.v)
            rows.append(
                {
                    "name": name,
                    "value": ext_to_json(getattr(self, name)),
                    "attainer": attain,
                    "method": self.methods.get(name, ""),
                    "truncation": self.truncation.get("summary", ""),
                }
            )
        return rows


def duality_chain_report(inst: ProblemInstance, tol: float = 1e-6) -> DualityReport:
    """Evaluate val(P), val(LP), val(LD), val(CD), val(CD^sym), val(ICD).

    Refined dual winners are folded into the biconjugate family and the primal
    witness is shared, keeping the computed chain coherent; any residual
    violation beyond `tol` is recorded (dual values remain lower bounds under
    truncation, so violations are reported, never silently clipped).
    """
    v_cd, phi_cd = val_lagrangian_dual(inst)
    v_sym, phi_sym = val_cd_sym(inst)
    try:
        v_icd, _ = val_icd(inst)
    except UnsupportedClassError:
        v_icd = NEG_INF
    # the symmetric-pair winner is CD-feasible: merge it to guard against
    # refinement asymmetry between the two sweeps
    for cand in (phi_sym,):
        if cand is not None:
            dv = dual_value_at(inst, cand)
            if dv > v_cd:
                v_cd, phi_cd = dv, cand
    v_ld = v_cd

    extras = tuple(p for p in (phi_cd, phi_sym) if p is not None)
    v_p, x_p = val_primal(inst)
    v_lp, x_lp = _lagrangian_primal_search(
        inst, extras, extra_points=(x_p,) if x_p else ()
    )
    if x_lp is not None:
        cand = inst.f(x_lp) + inst.g(x_lp)
        if cand < v_p:
            v_p, x_p = cand, x_lp

    violations = []
    for hi, lo in (("val_P", "val_LP"), ("val_LP", "val_LD"), ("val_CD", "val_CD_sym"),
                   ("val_CD", "val_ICD")):
        pairs = {"val_P": v_p, "val_LP": v_lp, "val_LD": v_ld, "val_CD": v_cd,
                 "val_CD_sym": v_sym, "val_ICD": v_icd}
        if pairs[hi] < pairs[lo] - tol:
            violations.append(f"{hi} < {lo} by {pairs[lo] - pairs[hi]:.3e}")
    if abs(v_ld - v_cd) > tol:
        violations.append("val_LD != val_CD")

    method = CLOSED_FORM if (inst.f.piecewise is not None and inst.g.piecewise is not None) else GRID_ORACLE
    gaps = {
        "cd": v_p - v_cd if is_finite(v_cd) else INF,
        "icd": v_p - v_icd if is_finite(v_icd) else INF,
    }
    truncation = inst.phi.truncation_summary()
    truncation["summary"] = (
        f"kind={inst.phi.kind};a<={inst.phi.a_max};|v|<={inst.phi.v_max};"
        f"grid={'x'.join(str(n) for n in inst.phi.grid_sizes)}"
    )
    return DualityReport(
        val_P=v_p,
        val_LP=v_lp,
        val_LD=v_ld,
        val_CD=v_cd,
        val_CD_sym=v_sym,
        val_ICD=v_icd,
        argmin_P=x_p,
        best_dual_elementary=phi_cd,
        gaps=gaps,
        chain_ok=not violations,
        violations=violations,
        methods={name: method for name in _CHAIN},
        truncation=truncation,
        notes=[
            "dual values are lower bounds of the untruncated sup over the class",
        ],
    )
