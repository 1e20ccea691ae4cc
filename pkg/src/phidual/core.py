"""Extended-real arithmetic, box domains, sampling grids and grid extremum search.

Function values live in (-inf, +inf] (proper functions); optimal values of
sups/infs may additionally be -inf.  Both are represented as plain Python
floats, with ``math.inf`` as the infinity sentinel; the helpers below pin
down the arithmetic and the JSON encoding ("+inf" / "-inf" strings).

Everything here is deterministic: grids enumerate lexicographically and all
ties resolve to the first point in enumeration order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Iterator, Optional, Sequence

import numpy as np

INF = math.inf
NEG_INF = -math.inf

Point = tuple[float, ...]

#: sup values beyond this magnitude are reported as infinite
UNBOUNDED_CAP = 1e12
#: growth factor between expanding-box sweeps that flags divergence
GROWTH_FACTOR = 10.0
#: box expansion per divergence-scan round (catches linear and faster growth)
EXPANSION = 16.0


def is_finite(x: float) -> bool:
    return math.isfinite(x)


def ext_add(a: float, b: float) -> float:
    """Extended-value addition; (+inf) + (-inf) is a contract violation."""
    if math.isinf(a) and math.isinf(b) and (a > 0) != (b > 0):
        raise ValueError("undefined sum (+inf) + (-inf)")
    return a + b


def ext_to_json(x: float) -> object:
    if x == INF:
        return "+inf"
    if x == NEG_INF:
        return "-inf"
    return x


def ext_from_json(v: object) -> float:
    if v == "+inf":
        return INF
    if v == "-inf":
        return NEG_INF
    if isinstance(v, (int, float)):
        return float(v)
    raise ValueError(f"not an extended real: {v!r}")


def as_point(x) -> Point:
    """Coerce a scalar or sequence of coordinates to a Point tuple."""
    if isinstance(x, (int, float)):
        return (float(x),)
    return tuple(float(c) for c in x)


def dot(v: Point, x: Point) -> float:
    return sum(vi * xi for vi, xi in zip(v, x))


def norm_sq(x: Point) -> float:
    return sum(xi * xi for xi in x)


@dataclass(frozen=True)
class BoxDomain:
    """Axis-aligned box in R^n (n in {1, 2}) with per-axis sample counts.

    The box is the finite stand-in for the whole space: every "for all x"
    and "sup over x" below is resolved on (refinements of) its grid.
    """

    lower: Point
    upper: Point
    samples: tuple[int, ...]

    def __post_init__(self):
        lo = as_point(self.lower)
        up = as_point(self.upper)
        ns = tuple(int(n) for n in self.samples)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", up)
        object.__setattr__(self, "samples", ns)
        if not (len(lo) == len(up) == len(ns)):
            raise ValueError("lower/upper/samples dimension mismatch")
        if len(lo) not in (1, 2):
            raise ValueError("only dimensions 1 and 2 are supported")
        if any(not is_finite(c) for c in lo + up):
            raise ValueError("box corners must be finite")
        if any(l >= u for l, u in zip(lo, up)):
            raise ValueError("box requires lower < upper componentwise")
        if any(n < 2 for n in ns):
            raise ValueError("need at least 2 samples per axis")

    @property
    def dim(self) -> int:
        return len(self.lower)

    def axes(self) -> list[np.ndarray]:
        return [
            np.linspace(l, u, n)
            for l, u, n in zip(self.lower, self.upper, self.samples)
        ]

    def cell_sizes(self) -> tuple[float, ...]:
        return tuple(
            (u - l) / (n - 1) for l, u, n in zip(self.lower, self.upper, self.samples)
        )

    def contains(self, p: Point) -> bool:
        return all(l <= c <= u for l, c, u in zip(self.lower, p, self.upper))

    def clip(self, p: Point) -> Point:
        return tuple(min(max(c, l), u) for l, c, u in zip(self.lower, p, self.upper))

    def scaled(self, factor: float) -> "BoxDomain":
        """Box with the same center and sample counts, `factor` times wider."""
        center = [(l + u) / 2.0 for l, u in zip(self.lower, self.upper)]
        half = [(u - l) / 2.0 * factor for l, u in zip(self.lower, self.upper)]
        return BoxDomain(
            tuple(c - h for c, h in zip(center, half)),
            tuple(c + h for c, h in zip(center, half)),
            self.samples,
        )

    def grid(self) -> "Grid":
        return Grid(self)


class Grid:
    """The lattice of points induced by a BoxDomain, enumerated lexicographically."""

    def __init__(self, box: BoxDomain):
        self.box = box

    @cached_property
    def axes(self) -> list[np.ndarray]:
        return self.box.axes()

    @cached_property
    def points(self) -> np.ndarray:
        """All grid points as an (N, dim) array in enumeration order."""
        if self.box.dim == 1:
            return self.axes[0][:, None]
        xs, ys = np.meshgrid(self.axes[0], self.axes[1], indexing="ij")
        return np.column_stack([xs.ravel(), ys.ravel()])

    @property
    def size(self) -> int:
        return int(np.prod(self.box.samples))

    def point(self, i: int) -> Point:
        return tuple(float(c) for c in self.points[i])

    def __iter__(self) -> Iterator[Point]:
        for row in self.points:
            yield tuple(float(c) for c in row)


def _values_on_grid(h: Callable[[Point], float], grid: Grid) -> np.ndarray:
    return np.array([h(tuple(row)) for row in grid.points], dtype=float)


def sup_on_grid(
    h: Callable[[Point], float], grid: Grid, values: Optional[np.ndarray] = None
) -> tuple[float, Optional[Point]]:
    """Maximum of h over the grid and the first attaining point.

    Returns +inf iff some grid point evaluates to +inf.  -inf values are
    skipped; if every value is -inf the result is (-inf, None).
    """
    vals = _values_on_grid(h, grid) if values is None else values
    i = int(np.argmax(vals))
    best = float(vals[i])
    if best == NEG_INF:
        return NEG_INF, None
    return best, grid.point(i)


def inf_on_grid(
    h: Callable[[Point], float], grid: Grid, values: Optional[np.ndarray] = None
) -> tuple[float, Optional[Point]]:
    """Dual of sup_on_grid: +inf values are skipped unless all are +inf."""
    vals = _values_on_grid(h, grid) if values is None else values
    i = int(np.argmin(vals))
    best = float(vals[i])
    if best == INF:
        return INF, None
    return best, grid.point(i)


def refine_extremum(
    h: Callable[[Point], float],
    box: BoxDomain,
    seed: Point,
    rounds: int,
    kind: str = "sup",
) -> tuple[float, Point]:
    """Local grid refinement around `seed`, halving the search cell each round.

    The returned value is >= (for sup; <= for inf) the seed evaluation and is
    monotone in `rounds`.  The search never leaves the box.
    """
    if rounds < 0:
        raise ValueError("rounds must be >= 0")
    if kind not in ("sup", "inf"):
        raise ValueError("kind must be 'sup' or 'inf'")
    seed = as_point(seed)
    if not box.contains(seed):
        raise ValueError("seed must lie inside the box")
    sign = 1.0 if kind == "sup" else -1.0
    best_p = seed
    best_v = sign * h(seed)
    radii = list(box.cell_sizes())
    offsets = (-1.0, -0.5, 0.0, 0.5, 1.0)
    for _ in range(rounds):
        for off in _offset_lattice(len(radii), offsets):
            cand = box.clip(
                tuple(c + o * r for c, o, r in zip(best_p, off, radii))
            )
            v = sign * h(cand)
            if v > best_v:
                best_v, best_p = v, cand
        radii = [r / 2.0 for r in radii]
    return sign * best_v, best_p


def _offset_lattice(dim: int, offsets: Sequence[float]) -> Iterator[tuple[float, ...]]:
    if dim == 1:
        for o in offsets:
            yield (o,)
    else:
        for o1 in offsets:
            for o2 in offsets:
                yield (o1, o2)


def extremum_on_box(
    h: Callable[[Point], float],
    box: BoxDomain,
    kind: str = "sup",
    rounds: int = 25,
    values: Optional[np.ndarray] = None,
) -> tuple[float, Optional[Point]]:
    """Grid extremum followed by local refinement around the best grid point."""
    grid = box.grid()
    if kind == "sup":
        v, p = sup_on_grid(h, grid, values=values)
    else:
        v, p = inf_on_grid(h, grid, values=values)
    if p is None or not is_finite(v):
        return v, p
    return refine_extremum(h, box, p, rounds, kind=kind)


def diverges_on_expanding_boxes(
    h: Callable[[Point], float],
    box: BoxDomain,
    kind: str = "sup",
    rounds: int = 2,
    cap: float = UNBOUNDED_CAP,
) -> bool:
    """Heuristic unboundedness sentinel for sups (infs when kind='inf').

    The extremum is re-evaluated on boxes expanded by EXPANSION per round
    (same sample counts).  Divergence is declared when the magnitude exceeds
    `cap`, when the value grows by more than GROWTH_FACTOR between sweeps, or
    when the sweep-to-sweep increments fail to shrink (log-or-faster growth).
    Behaviour outside the scanned region is, by construction, unverified.
    """
    sign = 1.0 if kind == "sup" else -1.0
    vals = []
    for k in range(rounds + 1):
        b = box if k == 0 else box.scaled(EXPANSION**k)
        grid = b.grid()
        raw = _values_on_grid(lambda p: sign * h(p), grid)
        v = float(np.max(raw))
        if v == INF or v > cap:
            return True
        if v == NEG_INF:
            # nothing finite on this sweep; cannot certify growth
            continue
        vals.append(v)
    for u, w in zip(vals, vals[1:]):
        if w > GROWTH_FACTOR * max(abs(u), 1.0) and w > u:
            return True
    if len(vals) >= 3:
        d1 = vals[1] - vals[0]
        d2 = vals[2] - vals[1]
        floor = 1e-6 * max(1.0, abs(vals[0]))
        if d1 > floor and d2 >= 0.9 * d1:
            return True
    return False
