"""Parameter-box coverings: graded coverings and the log-grid covering.

A covering is an ordered list of cells.  Each cell ties an integer shift
power n to an axis-aligned box with an anchor point.  Two constructions are
provided:

* ``build_log_covering`` tiles the enclosing cube [a, b]^d with g cells per
  axis (anchors at cell centers) and attaches the power schedule
  N_j = (m-1)*sigma + sigma**((m-1)/m) * (j+r)**r with sigma = base**m.
* ``build_graded_covering`` searches for a covering satisfying the five
  graded-covering properties (spacing, box containment, pairwise proximity,
  power summability, gap summability), as certified by ``verify_graded``.
  The verifier, not the constructor, is the source of truth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

Box = Tuple[Tuple[float, float], ...]


class CoveringInfeasibleError(ValueError):
    """Covering construction failed; ``reason`` is 'diam' or 'budget'."""

    def __init__(self, reason: str, message: str):
        super().__init__(message)
        self.reason = reason


def as_box(obj) -> Box:
    box = tuple((float(lo), float(hi)) for lo, hi in obj)
    if not box:
        raise ValueError("box needs at least one axis")
    for lo, hi in box:
        if not (lo <= hi):
            raise ValueError(f"empty box axis [{lo}, {hi}]")
    return box


def box_max_side(box: Box) -> float:
    return max(hi - lo for lo, hi in box)


@dataclass(frozen=True)
class Cell:
    n: int
    anchor: Tuple[float, ...]
    box: Box

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("cell power must be a positive integer")
        if len(self.anchor) != len(self.box):
            raise ValueError("anchor and box dimensions differ")
        as_box(self.box)

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "anchor": list(self.anchor),
            "box": [list(ax) for ax in self.box],
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "Cell":
        return cls(int(obj["n"]), tuple(float(a) for a in obj["anchor"]), as_box(obj["box"]))


@dataclass(frozen=True)
class GradedParams:
    alpha: float
    beta: float
    D: float
    tau: float
    eta: float
    N: int
    c: float = 0.1
    d: int = 2

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("dimension d must be >= 1")
        if not (0.0 < self.alpha < 1.0 / self.d):
            raise ValueError(f"alpha must lie in (0, 1/d) = (0, {1.0/self.d}); got {self.alpha}")
        if not (self.beta > self.alpha * self.d):
            raise ValueError(f"beta must exceed alpha*d = {self.alpha * self.d}; got {self.beta}")
        for name in ("D", "tau", "eta", "c"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        if self.N < 1:
            raise ValueError("spacing floor N must be a positive integer")

    def to_json_dict(self) -> dict:
        return {
            "kind": "graded", "alpha": self.alpha, "beta": self.beta, "D": self.D,
            "tau": self.tau, "eta": self.eta, "N": self.N, "c": self.c, "d": self.d,
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "GradedParams":
        return cls(
            alpha=float(obj["alpha"]), beta=float(obj["beta"]), D=float(obj["D"]),
            tau=float(obj["tau"]), eta=float(obj["eta"]), N=int(obj["N"]),
            c=float(obj.get("c", 0.1)), d=int(obj.get("d", 2)),
        )


@dataclass(frozen=True)
class LogCoveringParams:
    box: Box
    m: int
    r: int
    base: int

    def __post_init__(self):
        object.__setattr__(self, "box", as_box(self.box))
        if self.m < 2:
            raise ValueError("log covering requires m >= 2")
        if self.base < 2:
            raise ValueError("base must be an integer >= 2")
        if self.r < 1:
            raise ValueError("r must be a positive integer")
        lows = [lo for lo, _ in self.box]
        if min(lows) <= 0.0:
            raise ValueError("box must sit in the positive orthant")
        for lo, hi in self.box:
            if not (hi < 2.0 * lo):
                raise ValueError(f"box axis [{lo}, {hi}] violates hi < 2*lo")
        amin = min(lows)
        r_floor = max(1.0 / amin, 1.0)
        if not (self.r > r_floor) and not (amin > 1.0):
            raise ValueError(
                f"r = {self.r} too small: need r > {r_floor} unless every lower bound exceeds 1")

    @property
    def sigma(self) -> int:
        return self.base**self.m

    @property
    def d(self) -> int:
        return len(self.box)

    def to_json_dict(self) -> dict:
        return {"kind": "log", "box": [list(ax) for ax in self.box],
                "m": self.m, "r": self.r, "base": self.base}

    @classmethod
    def from_json_dict(cls, obj: dict) -> "LogCoveringParams":
        return cls(box=as_box(obj["box"]), m=int(obj["m"]), r=int(obj["r"]), base=int(obj["base"]))


@dataclass(frozen=True)
class Covering:
    cells: Tuple[Cell, ...]
    params: Optional[object] = None  # GradedParams | LogCoveringParams | None
    kind: str = "custom"

    def __post_init__(self):
        cells = tuple(self.cells)
        object.__setattr__(self, "cells", cells)
        if not cells:
            raise ValueError("covering needs at least one cell")
        d = len(cells[0].box)
        for c in cells:
            if len(c.box) != d:
                raise ValueError("all cells must share one dimension")
        ns = [c.n for c in cells]
        if any(b <= a for a, b in zip(ns, ns[1:])):
            raise ValueError("cell powers must be strictly increasing")

    @property
    def q(self) -> int:
        return len(self.cells)

    @property
    def d(self) -> int:
        return len(self.cells[0].box)

    @property
    def powers(self) -> List[int]:
        return [c.n for c in self.cells]

    def to_json_dict(self) -> dict:
        params = self.params.to_json_dict() if self.params is not None else None
        return {"kind": self.kind, "params": params,
                "cells": [c.to_json_dict() for c in self.cells]}

    @classmethod
    def from_json_dict(cls, obj: dict) -> "Covering":
        kind = obj.get("kind", "custom")
        params = obj.get("params")
        if params is not None:
            pk = params.get("kind")
            if pk == "graded":
                params = GradedParams.from_json_dict(params)
            elif pk == "log":
                params = LogCoveringParams.from_json_dict(params)
            else:
                raise ValueError(f"unknown covering params kind {pk!r}")
        cells = tuple(Cell.from_json_dict(c) for c in obj["cells"])
        return cls(cells=cells, params=params, kind=kind)


# -- geometry helpers -----------------------------------------------------------


def _axis_midpoints(lo: float, hi: float, edges: Sequence[float]) -> List[float]:
    if hi == lo:
        return [lo]
    pts = {lo, hi}
    for e in edges:
        if lo < e < hi:
            pts.add(e)
    srt = sorted(pts)
    return [(a + b) / 2.0 for a, b in zip(srt, srt[1:]) if b > a]


def box_union_covers(boxes: Sequence[Box], K: Box):
    """Does the union of closed boxes contain the closed box K?

    Exact for closed boxes: the arrangement induced by all box edges is
    probed at elementary-cell midpoints, and every elementary open cell is
    either inside a given box or disjoint from it.

    Returns (covered, first_uncovered_point_or_None, uncovered_count).
    """
    d = len(K)
    axes_mids = []
    for ax in range(d):
        lo, hi = K[ax]
        edges = [b[ax][0] for b in boxes] + [b[ax][1] for b in boxes]
        axes_mids.append(np.asarray(_axis_midpoints(lo, hi, edges)))
    shape = tuple(len(m) for m in axes_mids)
    covered = np.zeros(shape, dtype=bool)
    for b in boxes:
        sl = []
        for ax in range(d):
            mids = axes_mids[ax]
            i0 = int(np.searchsorted(mids, b[ax][0], side="left"))
            i1 = int(np.searchsorted(mids, b[ax][1], side="right"))
            sl.append(slice(i0, i1))
        covered[tuple(sl)] = True
    if covered.all():
        return True, None, 0
    missing = np.argwhere(~covered)
    first = tuple(float(axes_mids[ax][i]) for ax, i in enumerate(missing[0]))
    return False, first, int(missing.shape[0])


def _pairwise_sup_dist(boxes: Sequence[Box]) -> np.ndarray:
    """sup over the two boxes of the max-norm distance, for every pair.

    The supremum of ||x - y||_inf over two boxes is attained at corners and
    equals max over axes of max(hi_a - lo_b, hi_b - lo_a).
    """
    arr = np.asarray(boxes, dtype=np.float64)  # (q, d, 2)
    lo = arr[:, :, 0]
    hi = arr[:, :, 1]
    # (q, q, d): max(hi_j - lo_l, hi_l - lo_j) per axis
    m = np.maximum(hi[:, None, :] - lo[None, :, :], hi[None, :, :] - lo[:, None, :])
    return m.max(axis=2)


# -- log covering ---------------------------------------------------------------


def log_covering_cell_count(sigma: int, d: int = 2) -> int:
    """Largest d-th power of an integer not exceeding floor((log sigma)^3 + 1)."""
    raw = math.floor(math.log(sigma) ** 3 + 1.0)
    if raw < 1:
        raise CoveringInfeasibleError("budget", f"sigma = {sigma} too small: no cells")
    g = int(round(raw ** (1.0 / d)))
    while g**d > raw:
        g -= 1
    while (g + 1) ** d <= raw:
        g += 1
    if g < 1:
        raise CoveringInfeasibleError("budget", f"sigma = {sigma} too small: no cells")
    return g**d


def log_covering_power(p: LogCoveringParams, j: int) -> int:
    """Power N_j attached to the j-th cell (1-based), an exact integer."""
    return (p.m - 1) * p.sigma + p.base ** (p.m - 1) * (j + p.r) ** p.r


def build_log_covering(p: LogCoveringParams, q_override: Optional[int] = None) -> Covering:
    """Grid covering of [a, b]^d with a = min lower, b = max upper bound.

    Cell count q is the largest perfect d-th power below floor((log sigma)^3+1)
    (q_override replaces it for oracle runs); anchors sit at cell centers in
    row-major order and cell j carries the exact integer power N_j.
    """
    d = p.d
    if q_override is not None:
        q = int(q_override)
        if q < 1:
            raise ValueError("q_override must be >= 1")
        g = int(round(q ** (1.0 / d)))
        for cand in (g - 1, g, g + 1):
            if cand >= 1 and cand**d == q:
                g = cand
                break
        else:
            raise ValueError(f"q_override = {q} is not a perfect {d}-th power")
    else:
        q = log_covering_cell_count(p.sigma, d)
        g = int(round(q ** (1.0 / d)))
    a = min(lo for lo, _ in p.box)
    b = max(hi for _, hi in p.box)
    side = (b - a) / g if g > 0 else 0.0
    cells = []
    for j in range(1, q + 1):
        # row-major: last axis varies fastest
        rem = j - 1
        idx = [0] * d
        for ax in range(d - 1, -1, -1):
            idx[ax] = rem % g
            rem //= g
        box = tuple((a + i * side, a + (i + 1) * side) for i in idx)
        anchor = tuple((lo + hi) / 2.0 for lo, hi in box)
        cells.append(Cell(n=log_covering_power(p, j), anchor=anchor, box=box))
    return Covering(cells=tuple(cells), params=p, kind="log")


# -- graded covering ------------------------------------------------------------


@dataclass
class PropertyReport:
    """Outcome of one checked property.

    ``sense`` says which side of the bound passes: 'ceiling' needs
    achieved <= bound, 'floor' needs achieved >= bound.  ``margin`` is the
    slack toward the bound and is nonnegative exactly when the check passes.
    """

    passed: bool
    achieved: float
    bound: float
    sense: str = "ceiling"
    witness: Optional[dict] = None
    note: str = ""

    @property
    def margin(self) -> float:
        if self.sense == "floor":
            return self.achieved - self.bound
        return self.bound - self.achieved

    def to_json_dict(self) -> dict:
        out = {"pass": bool(self.passed), "achieved": self.achieved,
               "bound": self.bound, "margin": self.margin, "sense": self.sense}
        if self.witness is not None:
            out["witness"] = self.witness
        if self.note:
            out["note"] = self.note
        return out


@dataclass
class GradedReport:
    properties: dict
    overall: bool

    def to_json_dict(self) -> dict:
        return {"pass": bool(self.overall),
                "properties": {k: v.to_json_dict() for k, v in self.properties.items()}}


def verify_graded(cov: Covering, K, p: GradedParams) -> GradedReport:
    """Check the five graded-covering properties; always returns a report.

    (a) spacing: n_0 >= N and consecutive gaps >= N.
    (b) every box inside its anchor's tau/n**alpha square, and the union of
        boxes covers K (edge-grid sweep, exact for closed boxes).
    (c) pairwise sup of the max-norm distance bounded by
        D*(n_l - n_j)**alpha / n_l**alpha, checked on box corners (exact).
    (d) sum of n_j**-beta bounded by eta.
    (e) for every j, sum over l != j of |n_l - n_j|**-beta bounded by eta.
    """
    K = as_box(K)
    ns = np.asarray(cov.powers, dtype=np.float64)
    q = cov.q
    props = {}

    gaps = np.diff(ns)
    ach_a = float(min(ns[0], gaps.min())) if q > 1 else float(ns[0])
    props["a"] = PropertyReport(ach_a >= p.N, ach_a, float(p.N), sense="floor",
                                note="min of n_0 and consecutive gaps")

    # (b) containment in the anchor square
    worst_slack = math.inf
    worst_cell = None
    for j, c in enumerate(cov.cells):
        room = p.tau / c.n**p.alpha
        for ax in range(cov.d):
            lo_slack = c.box[ax][0] - c.anchor[ax]
            hi_slack = (c.anchor[ax] + room) - c.box[ax][1]
            s = min(lo_slack, hi_slack)
            if s < worst_slack:
                worst_slack, worst_cell = s, j
    props["b_containment"] = PropertyReport(
        worst_slack >= 0.0, -worst_slack, 0.0, witness={"cell": worst_cell},
        note="achieved is the worst containment violation; negative means slack")

    covered, missing_pt, miss_count = box_union_covers([c.box for c in cov.cells], K)
    props["b_cover"] = PropertyReport(
        covered, float(miss_count), 0.0,
        witness=None if covered else {"uncovered_point": list(missing_pt)},
        note="achieved value counts uncovered elementary cells")

    # (c) pairwise proximity on box corners
    if q > 1:
        dist = _pairwise_sup_dist([c.box for c in cov.cells])
        jj, ll = np.triu_indices(q, k=1)
        bound = p.D * (ns[ll] - ns[jj]) ** p.alpha / ns[ll] ** p.alpha
        gap_c = bound - dist[jj, ll]
        w = int(np.argmin(gap_c))
        props["c"] = PropertyReport(
            bool(gap_c[w] >= 0.0), float(dist[jj[w], ll[w]]), float(bound[w]),
            witness={"pair": [int(jj[w]), int(ll[w])]})
    else:
        props["c"] = PropertyReport(True, 0.0, math.inf, note="vacuous for a single cell")

    ach_d = math.fsum(1.0 / c.n**p.beta for c in cov.cells)
    props["d"] = PropertyReport(ach_d <= p.eta, ach_d, p.eta)

    if q > 1:
        diff = np.abs(ns[:, None] - ns[None, :])
        np.fill_diagonal(diff, np.inf)
        row_sums = (diff**-p.beta).sum(axis=1)
        worst_j = int(np.argmax(row_sums))
        worst_e = float(row_sums[worst_j])
        props["e"] = PropertyReport(worst_e <= p.eta, worst_e, p.eta, witness={"cell": worst_j})
    else:
        props["e"] = PropertyReport(True, 0.0, p.eta, note="vacuous for a single cell")

    overall = all(r.passed for r in props.values())
    return GradedReport(properties=props, overall=overall)


def _grid_cells(K: Box, g: int, schedule: Sequence[int]) -> Tuple[Cell, ...]:
    d = len(K)
    cells = []
    for j, n in enumerate(schedule):
        rem = j
        idx = [0] * d
        for ax in range(d - 1, -1, -1):
            idx[ax] = rem % g
            rem //= g
        box = []
        anchor = []
        for ax in range(d):
            lo, hi = K[ax]
            side = (hi - lo) / g
            box.append((lo + idx[ax] * side, lo + (idx[ax] + 1) * side))
            anchor.append(lo + idx[ax] * side)
        cells.append(Cell(n=int(n), anchor=tuple(anchor), box=tuple(box)))
    return tuple(cells)


def build_graded_covering(K, p: GradedParams, g_max: int = 40) -> Covering:
    """Deterministic search for a covering that passes ``verify_graded``.

    K is tiled by a g x ... x g grid with an arithmetic power schedule;
    grid size, spacing and offset escalate until the verifier passes or the
    budget runs out.  Raises CoveringInfeasibleError with reason 'diam' when
    the precondition diam(K) <= c*D fails and 'budget' when the search space
    is exhausted.
    """
    K = as_box(K)
    d = len(K)
    if d != p.d:
        raise ValueError(f"params declare d = {p.d} but K has {d} axes")
    S = box_max_side(K)
    if S > p.c * p.D:
        raise CoveringInfeasibleError(
            "diam", f"diam(K) = {S} exceeds c*D = {p.c * p.D}")

    def n_cap_for(g: int) -> int:
        if S == 0.0:
            return 10**15
        cap = int((p.tau * g / S) ** (1.0 / p.alpha))
        # float rounding in the power can overshoot by ~cap/alpha ulps, so
        # step down multiplicatively until the containment bound holds
        while cap >= 1 and p.tau / cap**p.alpha < S / g:
            cap = min(cap - 1, int(cap * (1.0 - 1e-9)))
        return cap

    # single cell: box = K, anchor at the lower corner
    n_lo = max(p.N, math.ceil(p.eta ** (-1.0 / p.beta)))
    cap1 = n_cap_for(1)
    if n_lo <= cap1:
        cov = Covering(cells=(Cell(n=n_lo, anchor=tuple(lo for lo, _ in K), box=K),),
                       params=p, kind="graded")
        if verify_graded(cov, K, p).overall:
            return cov

    for g in range(2, g_max + 1):
        q = g**d
        s_beta = math.fsum(k ** (-p.beta) for k in range(1, q))
        cap = n_cap_for(g)
        delta = max(p.N, math.ceil((2.0 * s_beta / p.eta) ** (1.0 / p.beta)))
        span = (q - 1) * delta
        if p.N + span > cap:
            continue
        slack = cap - span - p.N
        for frac in (0.5, 0.25, 0.75, 0.0, 1.0):
            n0 = p.N + int(frac * slack)
            schedule = np.asarray([n0 + j * delta for j in range(q)], dtype=np.float64)
            # cheap closed-form prescreen before building any cells:
            # (d), (e) on the arithmetic schedule and the (c) bound against
            # the worst-case pair distance (row wraps make it ~diam(K))
            if math.fsum((schedule**-p.beta).tolist()) > p.eta:
                continue
            diffs = np.abs(schedule[:, None] - schedule[None, :])
            np.fill_diagonal(diffs, np.inf)
            if float((diffs**-p.beta).sum(axis=1).max()) > p.eta:
                continue
            if d >= 2 and S > p.D * (delta / schedule[-1]) ** p.alpha:
                continue
            cov = Covering(cells=_grid_cells(K, g, [int(n) for n in schedule]),
                           params=p, kind="graded")
            if verify_graded(cov, K, p).overall:
                return cov
    raise CoveringInfeasibleError(
        "budget", f"no covering found with grid size up to {g_max} per axis")
