"""Numeric checkers for the shift-family criteria.

Four checkers share a common report shape:

* ``check_basic_criterion``  -- the four displayed norms (II.a, II.b, III, IV)
  of the algebra criterion, sampled over a covering's cells;
* ``check_unif_hypotheses``  -- Lipschitz profile, divergence probe and the
  two tail displays bounded by M0 / k**beta;
* ``check_corollary_hypotheses`` -- the two practical bullet conditions
  (power or log Lipschitz profile plus a cumulative growth floor);
* ``check_carac_conditions`` -- spacing, box cover and the two tail sums of
  the characterization.

Every checker is a pure function returning a CriterionReport with one entry
per condition: pass flag, worst achieved value, bound, and the witnessing
parameter point.  Identical inputs produce bitwise-identical JSON reports.
Large cumulative products are compared in log domain throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .covering import Covering, box_union_covers, as_box
from .lognum import logsumexp
from .seqspace import L1, ProductKind, SeqVec, SpaceNorm, cw_root, norm
from .weights import (
    LipschitzProfile,
    WeightFamily,
    lipschitz_ratio_profile,
    log_cum_window,
    log_cum_windows,
    log_weight,
)

_MAX_PAIR_GRID = 50_000_000  # guard for the (n, k) product in the tail displays


@dataclass
class ConditionResult:
    name: str
    passed: bool
    achieved: float
    bound: float
    sense: str = "ceiling"  # ceiling: achieved <= bound; floor: achieved >= bound
    witness: Optional[dict] = None
    evaluations: int = 0
    note: str = ""

    @property
    def margin(self) -> float:
        if self.sense == "floor":
            return self.achieved - self.bound
        return self.bound - self.achieved

    def to_json_dict(self) -> dict:
        out = {
            "pass": bool(self.passed), "achieved": self.achieved, "bound": self.bound,
            "margin": self.margin, "sense": self.sense, "evaluations": self.evaluations,
        }
        if self.witness is not None:
            out["witness"] = self.witness
        if self.note:
            out["note"] = self.note
        return out


@dataclass
class CriterionReport:
    conditions: Dict[str, ConditionResult]
    meta: dict = field(default_factory=dict)

    @property
    def overall(self) -> bool:
        return all(c.passed for c in self.conditions.values())

    def to_json_dict(self) -> dict:
        return {
            "pass": bool(self.overall),
            "conditions": {k: v.to_json_dict() for k, v in self.conditions.items()},
            "meta": self.meta,
        }

    def rows(self) -> List[dict]:
        """Flat per-condition rows for CSV export."""
        out = []
        for name, c in self.conditions.items():
            out.append({
                "condition": name, "pass": c.passed, "achieved": c.achieved,
                "bound": c.bound, "margin": c.margin, "evaluations": c.evaluations,
            })
        return out


def _require_fnorm_bullets(space_norm: SpaceNorm):
    """Precondition on the chosen norm: the three scalar-scaling bullets.

    |c| <= 1 must not increase the norm, ||c*x|| <= (|c|+1)*||x|| must hold,
    and scaling to zero must drive the norm to zero.  Probed numerically on a
    fixed vector and scalar grid.
    """
    probe = SeqVec({0: 1.0, 3: -0.5, 7: 2.0})
    base = norm(probe, space_norm)
    for c in (-1.5, -1.0, -0.5, -0.1, 0.1, 0.5, 1.0, 1.5):
        val = norm(c * probe, space_norm)
        if abs(c) <= 1.0 and val > base * (1 + 1e-9):
            raise ValueError(f"norm violates the contraction bullet at c = {c}")
        if val > (abs(c) + 1.0) * base * (1 + 1e-9):
            raise ValueError(f"norm violates the (|c|+1) scaling bullet at c = {c}")
    if norm(1e-200 * probe, space_norm) > 1e-150:
        raise ValueError("norm does not scale to zero with the scalar")


def _norm_from_logcoeffs(logcs: Sequence[float], n: SpaceNorm) -> float:
    """Norm of a vector given the logs of its (positive) coefficients."""
    logcs = [c for c in logcs if c != -math.inf]
    if not logcs:
        return 0.0
    if n.kind == "sup":
        return math.exp(max(logcs))
    if n.p == 1.0:
        return math.exp(logsumexp(logcs))
    return math.exp(logsumexp([n.p * c for c in logcs]) / n.p)


# ---------------------------------------------------------------------------
# basic criterion for algebras
# ---------------------------------------------------------------------------


def _cell_samples(cell, samples_per_axis: int) -> List[Tuple[float, ...]]:
    """Sample grid inside a cell's box; a single sample sits on the anchor."""
    if samples_per_axis < 1:
        raise ValueError("samples_per_axis must be >= 1")
    if samples_per_axis == 1:
        return [tuple(cell.anchor)]
    axes = [np.linspace(lo, hi, samples_per_axis) for lo, hi in cell.box]
    pts = [()]
    for ax in axes:
        pts = [p + (float(a),) for p in pts for a in ax]
    return pts


def check_basic_criterion(
    fams: Sequence[WeightFamily],
    cov: Covering,
    v: Sequence[SeqVec],
    m_lo: int,
    m_hi: int,
    eps: float,
    samples_per_axis: int = 3,
    space_norm: SpaceNorm = L1,
    product_kind: ProductKind = ProductKind.COORDINATEWISE,
    region=None,
) -> CriterionReport:
    """Evaluate the four displayed norms of the algebra criterion on a covering.

    For every cell i, every sampled lambda in its box and every power m in
    the admitted range, the displays are evaluated with the coordinatewise
    product and compared against eps; the report carries the worst sample per
    condition.  Condition I (the cover itself) is delegated to the covering's
    union check and only evaluated when ``region`` is supplied.
    """
    if product_kind is not ProductKind.COORDINATEWISE:
        raise ValueError("check_basic_criterion supports the coordinatewise product only")
    _require_fnorm_bullets(space_norm)
    fams = tuple(fams)
    v = tuple(v)
    d = cov.d
    if len(fams) != d or len(v) != d:
        raise ValueError(f"need {d} weight families and {d} target vectors")
    if m_lo < 1 or m_hi < m_lo:
        raise ValueError("power range must satisfy 1 <= m_lo <= m_hi")
    if eps < 0.0:
        raise ValueError("eps must be nonnegative")
    for ax, vec in enumerate(v):
        for k, c in vec.items():
            if c < 0.0:
                raise ValueError(f"target vector {ax} has negative entry at index {k}")

    roots = [cw_root(vec, m_lo) for vec in v]
    supp = [vec.support() for vec in roots]
    powers = cov.powers
    q = cov.q
    anchors = [[cell.anchor[ax] for cell in cov.cells] for ax in range(d)]

    # forward coefficients at the anchors: A[ax][j][l] for l in supp[ax]
    A: List[List[np.ndarray]] = []
    for ax in range(d):
        ls = np.asarray(supp[ax], dtype=np.int64)
        rows = []
        for j in range(q):
            w = log_cum_windows(fams[ax], anchors[ax][j], ls, np.full(ls.shape, powers[j]))
            coeffs = np.asarray([roots[ax].coeff(int(l)) for l in ls])
            rows.append(coeffs * np.exp(-w / m_lo))
        A.append(rows)

    conds: Dict[str, ConditionResult] = {}

    if region is None:
        conds["I"] = ConditionResult(
            "I", True, 0.0, 0.0, evaluations=0,
            note="delegated to the covering union check; no region supplied")
    else:
        covered, missing, count = box_union_covers([c.box for c in cov.cells], as_box(region))
        conds["I"] = ConditionResult(
            "I", covered, float(count), 0.0, evaluations=1,
            witness=None if covered else {"uncovered_point": list(missing)})

    # II.a -- the lambda-independent forward sum
    total = 0.0
    for ax in range(d):
        entries: Dict[int, float] = {}
        for j in range(q):
            for idx, l in enumerate(supp[ax]):
                k = l + powers[j]
                entries[k] = entries.get(k, 0.0) + float(A[ax][j][idx])
        total += norm(SeqVec(entries), space_norm)
    conds["II.a"] = ConditionResult("II.a", total <= eps, total, eps, evaluations=1)

    worst = {
        "II.b": ConditionResult("II.b", True, 0.0, eps),
        "III": ConditionResult("III", True, 0.0, eps),
        "IV": ConditionResult("IV", True, 0.0, eps),
    }

    ms = list(range(m_lo, m_hi + 1))
    for i in range(q):
        n_i = powers[i]
        for lam in _cell_samples(cov.cells[i], samples_per_axis):
            # windows of length n_i at the sampled point, per axis
            win_tail: List[np.ndarray] = []  # for II.b: offsets l + n_j - n_i
            win_head: List[np.ndarray] = []  # for III/IV: offsets l
            for ax in range(d):
                offs = []
                for j in range(q):
                    for l in supp[ax]:
                        offs.append(l + powers[j] - n_i)
                offs = np.asarray(offs, dtype=np.int64)
                valid = offs >= 0
                w = np.full(offs.shape, -math.inf)
                if valid.any():
                    w[valid] = log_cum_windows(
                        fams[ax], lam[ax], offs[valid],
                        np.full(int(valid.sum()), n_i))
                win_tail.append(w.reshape(q, len(supp[ax])))
                ls = np.asarray(supp[ax], dtype=np.int64)
                win_head.append(log_cum_windows(
                    fams[ax], lam[ax], ls, np.full(ls.shape, n_i)))

            for m in ms:
                # II.b: sum over j != i of B^{n_i} (F^{n_j} root)^m
                val = 0.0
                for ax in range(d):
                    entries = {}
                    for j in range(q):
                        if j == i:
                            continue
                        for idx, l in enumerate(supp[ax]):
                            pos = l + powers[j] - n_i
                            if pos < 0:
                                continue
                            c = float(A[ax][j][idx]) ** m * math.exp(win_tail[ax][j][idx])
                            entries[pos] = entries.get(pos, 0.0) + c
                    val += norm(SeqVec(entries), space_norm)
                cur = worst["II.b"]
                cur.evaluations += 1
                if val > cur.achieved:
                    cur.achieved = val
                    cur.witness = {"cell": i, "lambda": list(lam), "m": m}

                if m == m_lo:
                    # IV: distance of B^{n_i} (F^{n_i} root)^{m_lo} to the target
                    val = 0.0
                    for ax in range(d):
                        entries = {}
                        for idx, l in enumerate(supp[ax]):
                            entries[l] = float(A[ax][i][idx]) ** m_lo * math.exp(
                                win_head[ax][idx])
                        val += norm(SeqVec(entries) - v[ax], space_norm)
                    cur = worst["IV"]
                    cur.evaluations += 1
                    if val > cur.achieved:
                        cur.achieved = val
                        cur.witness = {"cell": i, "lambda": list(lam)}
                else:
                    # III: premature powers m in (m_lo, m_hi]
                    val = 0.0
                    for ax in range(d):
                        entries = {}
                        for idx, l in enumerate(supp[ax]):
                            entries[l] = float(A[ax][i][idx]) ** m * math.exp(
                                win_head[ax][idx])
                        val += norm(SeqVec(entries), space_norm)
                    cur = worst["III"]
                    cur.evaluations += 1
                    if val > cur.achieved:
                        cur.achieved = val
                        cur.witness = {"cell": i, "lambda": list(lam), "m": m}

    for name in ("II.b", "III", "IV"):
        worst[name].passed = worst[name].achieved <= eps
    if m_hi == m_lo:
        worst["III"].note = "vacuous: the power range (m_lo, m_hi] is empty"
    conds.update(worst)

    meta = {"q": q, "d": d, "m_lo": m_lo, "m_hi": m_hi, "eps": eps,
            "samples_per_axis": samples_per_axis, "norm": space_norm.to_json(),
            "sampled_sup_note": "sampled maxima are lower bounds on the true suprema"}
    return CriterionReport(conditions=conds, meta=meta)


# ---------------------------------------------------------------------------
# unified-criterion hypotheses
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class UnifParams:
    m_prime: int
    alpha: float
    C1: float
    C2: float
    beta: float
    M0: float
    N0: int
    F: LipschitzProfile
    n_max: int
    k_max: int
    I0_lo: float
    I0_hi: float
    I0_points: int = 9
    d: int = 1
    divergence_threshold: float = 1e6

    def __post_init__(self):
        if self.m_prime < 1:
            raise ValueError("m_prime must be a positive integer")
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if not (0.0 < self.alpha < 1.0 / self.d):
            raise ValueError(f"alpha must lie in (0, 1/d); got {self.alpha}")
        if not (self.beta > self.alpha * self.d):
            raise ValueError(
                f"beta must exceed alpha*d = {self.alpha * self.d}; got {self.beta}")
        for name in ("C1", "C2", "M0"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        if self.N0 < 1 or self.n_max < self.N0 or self.k_max < self.N0:
            raise ValueError("need 1 <= N0 <= n_max and N0 <= k_max")
        if not (self.I0_lo > 0.0 and self.I0_hi >= self.I0_lo):
            raise ValueError("I0 must be a compact interval in (0, +inf)")
        if self.I0_points < 2:
            raise ValueError("I0 grid needs at least 2 points")
        ns = np.arange(self.N0, self.n_max + 1, dtype=np.float64)
        if (np.asarray(self.F(ns)) > self.C1 * ns**self.alpha).any():
            raise ValueError("profile violates F(n) <= C1 * n**alpha on [N0, n_max]")

    def grid(self) -> np.ndarray:
        return np.linspace(self.I0_lo, self.I0_hi, self.I0_points)


def check_unif_hypotheses(
    fam: WeightFamily, p: UnifParams, collect_table: bool = False
) -> CriterionReport:
    """Check the Lipschitz, divergence and tail-display hypotheses.

    (i) grid Lipschitz ratios against F(n); (ii) divergence probe of the
    cumulative products at k_max (a finite check cannot certify divergence,
    so the report labels it a probe); (iii) the two displayed inequalities
    against M0/k**beta for all admitted (n, k) pairs, in log domain.
    """
    grid = p.grid()
    ns = np.arange(p.N0, p.n_max + 1, dtype=np.int64)
    ks = np.arange(p.N0, p.k_max + 1, dtype=np.int64)
    if len(ns) * len(ks) > _MAX_PAIR_GRID:
        raise ValueError("n_max*k_max grid too large; lower the evaluation bounds")
    conds: Dict[str, ConditionResult] = {}

    ratios = lipschitz_ratio_profile(fam, grid, ns)
    fn = np.asarray(p.F(ns), dtype=np.float64)
    diff = ratios - fn
    w = int(np.argmax(diff))
    conds["i"] = ConditionResult(
        "i", bool(diff[w] <= 0.0), float(ratios[w]), float(fn[w]),
        witness={"n": int(ns[w])}, evaluations=len(ns))

    # (ii) divergence probe: smallest cumulative product at k_max over the grid
    fk_last = np.asarray([log_cum_window(fam, a, 0, p.k_max) for a in grid])
    w = int(np.argmin(fk_last))
    conds["ii"] = ConditionResult(
        "ii", bool(fk_last[w] >= math.log(p.divergence_threshold)),
        float(fk_last[w]), math.log(p.divergence_threshold), sense="floor",
        witness={"a": float(grid[w]), "k": p.k_max}, evaluations=len(grid),
        note="probe, not proof: log of the cumulative product at k_max")

    # (iii) both tail displays, worst over (n, k, a), log domain
    nk = ns[:, None] + ks[None, :]
    growth = p.C2 * (ks[None, :].astype(np.float64) ** p.alpha) * (
        np.asarray(p.F(nk), dtype=np.float64) / nk.astype(np.float64) ** p.alpha)
    log_rhs = math.log(p.M0) - p.beta * np.log(ks.astype(np.float64))

    worst1 = (-math.inf, None)
    worst2 = (-math.inf, None)
    m1_table = None
    m2_table = None
    for a in grid:
        fk = log_cum_windows(fam, float(a), np.zeros(len(ks), dtype=np.int64), ks)
        m1 = (growth - fk[None, :]) - log_rhs[None, :]
        iw = np.unravel_index(int(np.argmax(m1)), m1.shape)
        if m1[iw] > worst1[0]:
            worst1 = (float(m1[iw]), {"n": int(ns[iw[0]]), "k": int(ks[iw[1]]), "a": float(a)})
        m2 = (-fk / p.m_prime) - log_rhs
        jw = int(np.argmax(m2))
        if m2[jw] > worst2[0]:
            worst2 = (float(m2[jw]), {"k": int(ks[jw]), "a": float(a)})
        if collect_table:
            m1_table = m1 if m1_table is None else np.maximum(m1_table, m1)
            m2_table = m2 if m2_table is None else np.maximum(m2_table, m2)

    table: List[dict] = []
    if collect_table:
        # per-(n, k) margins, worst over the parameter grid; the root display
        # carries no n dependence and repeats along rows
        for i, n in enumerate(ns.tolist()):
            for j, k in enumerate(ks.tolist()):
                table.append({"n": n, "k": k,
                              "log_margin_growth": float(m1_table[i, j]),
                              "log_margin_root": float(m2_table[j])})

    conds["iii.growth"] = ConditionResult(
        "iii.growth", worst1[0] <= 0.0, worst1[0], 0.0, witness=worst1[1],
        evaluations=len(grid) * len(ns) * len(ks),
        note="log-domain margin of the growth display against M0/k**beta")
    conds["iii.root"] = ConditionResult(
        "iii.root", worst2[0] <= 0.0, worst2[0], 0.0, witness=worst2[1],
        evaluations=len(grid) * len(ks),
        note="log-domain margin of the 1/m'-root display against M0/k**beta")

    meta = {"family": fam.to_json_dict(), "m_prime": p.m_prime, "alpha": p.alpha,
            "beta": p.beta, "M0": p.M0, "N0": p.N0, "n_max": p.n_max, "k_max": p.k_max}
    report = CriterionReport(conditions=conds, meta=meta)
    if collect_table:
        report.meta["table"] = table
    return report


# ---------------------------------------------------------------------------
# corollary hypotheses
# ---------------------------------------------------------------------------


def check_corollary_hypotheses(
    fam: WeightFamily,
    I0_grid: Sequence[float],
    variant: int,
    constants: dict,
    N: int,
    n_max: int,
) -> CriterionReport:
    """Check the two bullet conditions of one practical corollary.

    Variant 1: D1*n**alpha-Lipschitz window sums plus growth floor
    D2*exp(D3*n**alpha).  Variant 2: D1*log(n)-Lipschitz plus growth floor
    D2*n**gamma.  Both bullets are verified on the grid for N <= n <= n_max.
    """
    grid = sorted(set(float(a) for a in I0_grid))
    if len(grid) < 2:
        raise ValueError("I0 grid needs at least 2 distinct points")
    if N < 1 or n_max < N:
        raise ValueError("need 1 <= N <= n_max")
    D1 = float(constants["D1"])
    D2 = float(constants["D2"])
    if D1 <= 0.0 or D2 <= 0.0:
        raise ValueError("constants must be positive")
    ns = np.arange(N, n_max + 1, dtype=np.int64)
    nsf = ns.astype(np.float64)

    if variant == 1:
        alpha = constants.get("alpha", fam.alpha)
        if alpha is None:
            raise ValueError("variant 1 needs alpha (from constants or the family)")
        D3 = float(constants["D3"])
        if D3 <= 0.0:
            raise ValueError("constants must be positive")
        lip_bound = D1 * nsf**alpha
        growth_floor = math.log(D2) + D3 * nsf**alpha
    elif variant == 2:
        gamma = float(constants["gamma"])
        if gamma <= 0.0:
            raise ValueError("constants must be positive")
        lip_bound = D1 * np.log(nsf)
        growth_floor = math.log(D2) + gamma * np.log(nsf)
    else:
        raise ValueError(f"variant must be 1 or 2, got {variant}")

    ratios = lipschitz_ratio_profile(fam, grid, ns)
    diff = ratios - lip_bound
    w = int(np.argmax(diff))
    lip = ConditionResult(
        "lipschitz", bool(diff[w] <= 0.0), float(ratios[w]), float(lip_bound[w]),
        witness={"n": int(ns[w])}, evaluations=len(ns))

    # growth floor: min over the grid of the log cumulative product
    fmin = None
    for a in grid:
        fa = log_cum_windows(fam, a, np.zeros(len(ns), dtype=np.int64), ns)
        fmin = fa if fmin is None else np.minimum(fmin, fa)
    gdiff = fmin - growth_floor
    w = int(np.argmin(gdiff))
    grw = ConditionResult(
        "growth", bool(gdiff[w] >= 0.0), float(fmin[w]), float(growth_floor[w]),
        sense="floor", witness={"n": int(ns[w])}, evaluations=len(grid) * len(ns),
        note="log of the cumulative product against the log of the floor")

    meta = {"family": fam.to_json_dict(), "variant": variant, "N": N, "n_max": n_max,
            "constants": {k: float(v) for k, v in constants.items()}}
    return CriterionReport(conditions={"lipschitz": lip, "growth": grw}, meta=meta)


# ---------------------------------------------------------------------------
# characterization conditions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CaracParams:
    m: int
    tau: float
    N: int
    eps: float
    K: tuple
    F: LipschitzProfile
    c: float
    C: float
    space_norm: SpaceNorm = L1

    def __post_init__(self):
        object.__setattr__(self, "K", as_box(self.K))
        if self.m < 1:
            raise ValueError("m must be a positive integer")
        if self.tau <= 0.0 or self.eps <= 0.0:
            raise ValueError("tau and eps must be positive")
        if self.N < 1:
            raise ValueError("N must be a positive integer")
        if not (0.0 < self.c <= self.C):
            raise ValueError("need 0 < c <= C")


def check_carac_conditions(
    fams: Sequence[WeightFamily],
    schedule: Sequence[Tuple[int, Sequence[float]]],
    p: CaracParams,
) -> CriterionReport:
    """Check the box-cover and tail-sum conditions of the characterization.

    ``schedule`` is the list of (n_k, lambda_k) pairs with lambda_k a point
    in R^d.  Spacing violations are reported as condition '0'; (ii) and (iii)
    are evaluated in log domain; a hypothesis probe of the Lipschitz sandwich
    and the weight-ratio floor runs on a coordinate grid drawn from K.
    """
    _require_fnorm_bullets(p.space_norm)
    fams = tuple(fams)
    d = len(fams)
    sched = [(int(n), tuple(float(x) for x in lam)) for n, lam in schedule]
    if not sched:
        raise ValueError("schedule must be nonempty")
    for _, lam in sched:
        if len(lam) != d:
            raise ValueError("schedule points must match the family dimension")
    if len(p.K) != d:
        raise ValueError("K must match the family dimension")
    q = len(sched)
    ns = [n for n, _ in sched]
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise ValueError("schedule powers must be strictly increasing")
    conds: Dict[str, ConditionResult] = {}

    gaps_min = min([ns[0]] + [b - a for a, b in zip(ns, ns[1:])])
    conds["0"] = ConditionResult(
        "0", gaps_min >= p.N, float(gaps_min), float(p.N), sense="floor",
        note="n_1 and consecutive gaps must reach the spacing floor N")

    # (i) box cover of K by the backward tau/F(n_k) boxes
    boxes = []
    for n_k, lam in sched:
        r = p.tau / float(p.F(n_k))
        boxes.append(tuple((lam[ax] - r, lam[ax]) for ax in range(d)))
    covered, missing, count = box_union_covers(boxes, p.K)
    conds["i"] = ConditionResult(
        "i", covered, float(count), 0.0,
        witness=None if covered else {"uncovered_point": list(missing)})

    # (ii) per axis: || sum_k what_{n_k}(lambda_k(i))^{-1/m} e_{n_k} || < eps
    worst_ii = (-math.inf, None)
    for ax in range(d):
        logcs = [-log_cum_window(fams[ax], lam[ax], 0, n_k) / p.m for n_k, lam in sched]
        val = _norm_from_logcoeffs(logcs, p.space_norm)
        if val > worst_ii[0]:
            worst_ii = (val, {"axis": ax})
    conds["ii"] = ConditionResult(
        "ii", worst_ii[0] < p.eps, worst_ii[0], p.eps, witness=worst_ii[1],
        evaluations=d * q)

    # (iii) tail sums over j > k for every (k, axis, l)
    worst_iii = (-math.inf, None)
    evals = 0
    for k in range(q):
        n_k, lam_k = sched[k]
        for ax in range(d):
            for l in range(p.N + 1):
                logcs = []
                for j in range(k + 1, q):
                    n_j, lam_j = sched[j]
                    num = log_cum_window(fams[ax], lam_k[ax], n_j - n_k + l, n_k)
                    den = log_cum_window(fams[ax], lam_j[ax], l, n_j)
                    logcs.append(num - den)
                evals += 1
                if not logcs:
                    continue
                val = _norm_from_logcoeffs(logcs, p.space_norm)
                if val > worst_iii[0]:
                    worst_iii = (val, {"k": k, "axis": ax, "l": l})
    if worst_iii[0] == -math.inf:
        worst_iii = (0.0, None)
    conds["iii"] = ConditionResult(
        "iii", worst_iii[0] < p.eps, worst_iii[0], p.eps, witness=worst_iii[1],
        evaluations=evals)

    # hypothesis probe: Lipschitz sandwich and weight-ratio floor on K's grid
    probe = _carac_hypothesis_probe(fams, sched, p)
    conds["H"] = probe

    meta = {"q": q, "d": d, "m": p.m, "tau": p.tau, "N": p.N, "eps": p.eps,
            "norm": p.space_norm.to_json()}
    return CriterionReport(conditions=conds, meta=meta)


def _carac_hypothesis_probe(fams, sched, p: CaracParams) -> ConditionResult:
    worst = math.inf
    witness = None
    checked = 0
    for ax, fam in enumerate(fams):
        lo, hi = p.K[ax]
        pts = sorted({lo, (lo + hi) / 2.0, hi})
        if len(pts) < 2:
            pts = [lo, lo * 1.5 + 0.5]
        for n_k, _ in sched:
            fn = float(p.F(n_k))
            for i in range(len(pts)):
                for j in range(i + 1, len(pts)):
                    a, b = pts[i], pts[j]
                    df = abs(log_cum_window(fam, b, 0, n_k) - log_cum_window(fam, a, 0, n_k))
                    lo_m = df - p.c * fn * (b - a)
                    hi_m = p.C * fn * (b - a) - df
                    ratio_m = math.exp(log_weight(fam, a, n_k) - log_weight(fam, b, n_k)) - p.c
                    m = min(lo_m, hi_m, ratio_m)
                    checked += 1
                    if m < worst:
                        worst = m
                        witness = {"axis": ax, "n": n_k, "a": a, "b": b}
    return ConditionResult(
        "H", worst >= 0.0, -worst, 0.0, witness=witness, evaluations=checked,
        note="hypothesis probe: Lipschitz sandwich and weight-ratio floor on K's grid")
