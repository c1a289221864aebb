"""Parametrized weight families and N-fold shift application in log domain.

A weight family maps a parameter lam > 0 to a sequence of positive weights
(w_n(lam))_{n>=1}.  All cumulative products live in log domain: the central
primitive is the window sum  sum_{i=l+1}^{l+n} log w_i(lam),  evaluated in
closed form whenever one exists and by compensated summation otherwise.
Ratios of cumulative weights are exp of window differences, which keeps
n ~ 1e8 with lam <= 3 inside double range.

Families:
    affine(alpha):   w_n(lam) = 1 + lam / n**(1-alpha),  alpha in [0, 1)
    pure_power:      w_1(lam)...w_n(lam) = n**lam
    exp_alpha(alpha):w_1(lam)...w_n(lam) = exp(lam * n**alpha), alpha in (0, 1]
    power_ratio:     w_n(lam) = (1 + 1/n)**lam
    geometric:       w_n(lam) = lam
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from .lognum import lgamma_ratio
from .seqspace import MAX_INDEX, IndexOverflowError, SeqVec

_VARIANTS = ("affine", "pure_power", "exp_alpha", "power_ratio", "geometric")

# Window lengths up to this bound are summed term by term with math.fsum
# (exact to the last ulp); beyond it the affine(0) family switches to a
# cancellation-free Stirling form and other closed forms do not care.
_FSUM_MAX = 1 << 21
# Stirling's series for log Gamma ratios is used from this argument on.
_STIRLING_MIN = 1 << 14


class InadmissibleParameterError(ValueError):
    """Weight parameter outside the family's admissible domain."""


@dataclass(frozen=True)
class WeightFamily:
    variant: str
    alpha: Optional[float] = None

    def __post_init__(self):
        if self.variant not in _VARIANTS:
            raise ValueError(f"unknown weight family {self.variant!r}")
        if self.variant == "affine":
            if self.alpha is None or not (0.0 <= self.alpha < 1.0):
                raise ValueError("affine family requires alpha in [0, 1)")
        elif self.variant == "exp_alpha":
            if self.alpha is None or not (0.0 < self.alpha <= 1.0):
                raise ValueError("exp_alpha family requires alpha in (0, 1]")
        elif self.alpha is not None:
            raise ValueError(f"{self.variant} family takes no alpha")

    # -- constructors ---------------------------------------------------------

    @classmethod
    def affine(cls, alpha: float = 0.0) -> "WeightFamily":
        return cls("affine", float(alpha))

    @classmethod
    def pure_power(cls) -> "WeightFamily":
        return cls("pure_power")

    @classmethod
    def exp_alpha(cls, alpha: float) -> "WeightFamily":
        return cls("exp_alpha", float(alpha))

    @classmethod
    def power_ratio(cls) -> "WeightFamily":
        return cls("power_ratio")

    @classmethod
    def geometric(cls) -> "WeightFamily":
        return cls("geometric")

    # -- serialization --------------------------------------------------------

    def to_json_dict(self) -> dict:
        out = {"variant": self.variant}
        if self.alpha is not None:
            out["alpha"] = self.alpha
        return out

    @classmethod
    def from_json_dict(cls, obj: dict) -> "WeightFamily":
        if not isinstance(obj, dict) or "variant" not in obj:
            raise ValueError("weight family JSON needs a 'variant' key")
        return cls(obj["variant"], obj.get("alpha"))


def _require_admissible(fam: WeightFamily, lam: float) -> float:
    lam = float(lam)
    if not (lam > 0.0) or not math.isfinite(lam):
        raise InadmissibleParameterError(
            f"parameter {lam!r} not admissible for {fam.variant} (need lam > 0)")
    return lam


def log_weight(fam: WeightFamily, lam: float, n: int) -> float:
    """log w_n(lam) for a single index n >= 1."""
    lam = _require_admissible(fam, lam)
    if n < 1:
        raise ValueError("weights are indexed from 1")
    v = fam.variant
    if v == "affine":
        return math.log1p(lam / n ** (1.0 - fam.alpha))
    if v == "pure_power":
        return 0.0 if n == 1 else lam * math.log1p(1.0 / (n - 1))
    if v == "exp_alpha":
        a = fam.alpha
        return lam * (n**a - (n - 1) ** a)
    if v == "power_ratio":
        return lam * math.log1p(1.0 / n)
    return math.log(lam)  # geometric


# -- affine window machinery --------------------------------------------------


def _affine_fsum_window(alpha: float, lam: float, l: int, n: int) -> float:
    idx = np.arange(l + 1, l + n + 1, dtype=np.float64)
    if alpha == 0.0:
        terms = np.log1p(lam / idx)
    else:
        terms = np.log1p(lam / idx ** (1.0 - alpha))
    return math.fsum(terms.tolist())


@lru_cache(maxsize=4096)
def _affine0_lgamma_shift(lam: float, z: int) -> float:
    """log(Gamma(z+lam)/Gamma(z)) for the affine(0) cumulative product.

    Exact-grade partial product below the Stirling threshold, Stirling's
    cancellation-free ratio above it.
    """
    if z < _STIRLING_MIN:
        head = math.lgamma(1.0 + lam)
        if z > 1:
            head += _affine_fsum_window(0.0, lam, 0, z - 1)
        return head
    return lgamma_ratio(float(z), lam)


def _affine_window(alpha: float, lam: float, l: int, n: int) -> float:
    if n <= _FSUM_MAX:
        return _affine_fsum_window(alpha, lam, l, n)
    if alpha == 0.0:
        # prod_{i=l+1}^{l+n} (1 + lam/i) = Gamma-ratio telescoping
        return _affine0_lgamma_shift(lam, l + n + 1) - _affine0_lgamma_shift(lam, l + 1)
    # No closed form for general alpha: chunked compensated summation.
    total = []
    start = l + 1
    stop = l + n + 1
    while start < stop:
        end = min(start + _FSUM_MAX, stop)
        idx = np.arange(start, end, dtype=np.float64)
        total.append(math.fsum(np.log1p(lam / idx ** (1.0 - alpha)).tolist()))
        start = end
    return math.fsum(total)


# -- public window operations ---------------------------------------------------


def log_cum_window(fam: WeightFamily, lam: float, l: int, n: int) -> float:
    """sum_{i=l+1}^{l+n} log w_i(lam); closed form where one exists.

    l >= 0 is the window offset and n >= 0 its length; n == 0 gives 0.
    """
    lam = _require_admissible(fam, lam)
    if l < 0 or n < 0:
        raise ValueError("window offset and length must be nonnegative")
    if n == 0:
        return 0.0
    v = fam.variant
    if v == "pure_power":
        # log what_n = lam log n, with what_0 = 1
        if l == 0:
            return lam * math.log(n)
        return lam * math.log1p(n / l)
    if v == "exp_alpha":
        a = fam.alpha
        if l == 0:
            return lam * float(n) ** a
        return lam * l**a * math.expm1(a * math.log1p(n / l))
    if v == "power_ratio":
        return lam * math.log1p(n / (l + 1))
    if v == "geometric":
        return n * math.log(lam)
    return _affine_window(fam.alpha, lam, l, n)


def log_cum_prefix(fam: WeightFamily, lam: float, upto: int) -> np.ndarray:
    """Array P with P[n] = log_cum_window(fam, lam, 0, n) for n = 0..upto.

    Closed forms are exact; the affine family uses a vectorized cumulative
    sum, adequate for checker margins (absolute error ~ n * eps).
    """
    lam = _require_admissible(fam, lam)
    if upto < 0:
        raise ValueError("prefix length must be nonnegative")
    v = fam.variant
    ns = np.arange(upto + 1, dtype=np.float64)
    if v == "pure_power":
        out = np.zeros(upto + 1)
        if upto >= 1:
            out[1:] = lam * np.log(ns[1:])
        return out
    if v == "exp_alpha":
        return lam * ns**fam.alpha
    if v == "power_ratio":
        return lam * np.log(ns + 1.0)
    if v == "geometric":
        return ns * math.log(lam)
    idx = ns[1:]
    terms = np.log1p(lam / idx ** (1.0 - fam.alpha)) if fam.alpha else np.log1p(lam / idx)
    out = np.empty(upto + 1)
    out[0] = 0.0
    np.cumsum(terms, out=out[1:])
    return out


def log_cum_windows(
    fam: WeightFamily, lam: float, offsets: np.ndarray, lengths: np.ndarray
) -> np.ndarray:
    """Vectorized window sums: element i is log_cum_window(fam, lam, offs[i], lens[i]).

    Closed-form families are evaluated directly; the affine family builds one
    transient cumulative-sum prefix (checker-grade accuracy, ~n*eps absolute).
    """
    lam = _require_admissible(fam, lam)
    offs = np.asarray(offsets, dtype=np.int64)
    lens = np.asarray(lengths, dtype=np.int64)
    if (offs < 0).any() or (lens < 0).any():
        raise ValueError("window offsets and lengths must be nonnegative")
    v = fam.variant
    if v == "affine":
        upto = int((offs + lens).max(initial=0))
        if upto > 50_000_000:
            raise ValueError(
                "affine windows beyond 5e7 need the scalar log_cum_window path")
        pref = log_cum_prefix(fam, lam, upto)
        return pref[offs + lens] - pref[offs]
    out = np.zeros(offs.shape, dtype=np.float64)
    pos = lens > 0
    o = offs[pos].astype(np.float64)
    n = lens[pos].astype(np.float64)
    if v == "pure_power":
        vals = np.where(o == 0.0, lam * np.log(np.maximum(n, 1.0)),
                        lam * np.log1p(n / np.maximum(o, 1.0)))
    elif v == "exp_alpha":
        a = fam.alpha
        with np.errstate(divide="ignore", invalid="ignore"):
            vals = np.where(
                o == 0.0, lam * n**a,
                lam * o**a * np.expm1(a * np.log1p(n / np.maximum(o, 1.0))))
    elif v == "power_ratio":
        vals = lam * np.log1p(n / (o + 1.0))
    else:  # geometric
        vals = n * math.log(lam)
    out[pos] = vals
    return out


def apply_backward_power(fam: WeightFamily, lam: float, N: int, x: SeqVec) -> SeqVec:
    """N-fold weighted backward shift B_w^N in closed form.

    Entry k maps to k - N with factor w_{k-N+1}(lam)...w_k(lam); entries with
    index < N are annihilated.
    """
    if N < 0:
        raise ValueError("shift power must be nonnegative")
    if N == 0:
        return x
    out = {}
    for k, c in x.items():
        if k < N:
            continue
        out[k - N] = c * math.exp(log_cum_window(fam, lam, k - N, N))
    return SeqVec(out)


def apply_forward_root_power(fam: WeightFamily, lam: float, m: int, N: int, x: SeqVec) -> SeqVec:
    """N-fold forward shift with weights w_n(lam)**(-1/m).

    Entry k maps to k + N with factor exp(-window(k, N)/m); with m = 1 this is
    a right inverse of apply_backward_power.
    """
    if N < 0:
        raise ValueError("shift power must be nonnegative")
    if m < 1:
        raise ValueError("root order must be >= 1")
    if N == 0:
        return x
    out = {}
    for k, c in x.items():
        if k + N > MAX_INDEX:
            raise IndexOverflowError(f"forward shift index {k}+{N} exceeds 2**63-1")
        out[k + N] = c * math.exp(-log_cum_window(fam, lam, k, N) / m)
    return SeqVec(out)


def lipschitz_ratio(fam: WeightFamily, grid: Sequence[float], l: int, n: int) -> float:
    """Largest difference quotient of a -> window(a, l, n) over grid pairs."""
    pts = sorted(set(float(a) for a in grid))
    if len(pts) < 2:
        raise ValueError("lipschitz_ratio needs at least 2 distinct grid points")
    vals = [log_cum_window(fam, a, l, n) for a in pts]
    best = 0.0
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            q = abs(vals[j] - vals[i]) / (pts[j] - pts[i])
            if q > best:
                best = q
    return best


def lipschitz_ratio_profile(
    fam: WeightFamily, grid: Sequence[float], n_values: np.ndarray
) -> np.ndarray:
    """lipschitz_ratio(fam, grid, 0, n) for every n in n_values, vectorized."""
    pts = sorted(set(float(a) for a in grid))
    if len(pts) < 2:
        raise ValueError("need at least 2 distinct grid points")
    n_values = np.asarray(n_values, dtype=np.int64)
    upto = int(n_values.max(initial=0))
    prefixes = [log_cum_prefix(fam, a, upto) for a in pts]
    best = np.zeros(len(n_values))
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            q = np.abs(prefixes[j][n_values] - prefixes[i][n_values]) / (pts[j] - pts[i])
            np.maximum(best, q, out=best)
    return best


@dataclass(frozen=True)
class LipschitzProfile:
    """Growth profile F(n): either D1 * n**alpha or D1 * log n."""

    kind: str  # "power" | "log"
    D1: float
    alpha: Optional[float] = None

    def __post_init__(self):
        if self.D1 <= 0.0:
            raise ValueError("profile scale D1 must be positive")
        if self.kind == "power":
            if self.alpha is None or not (0.0 < self.alpha <= 1.0):
                raise ValueError("power profile requires alpha in (0, 1]")
        elif self.kind == "log":
            if self.alpha is not None:
                raise ValueError("log profile takes no alpha")
        else:
            raise ValueError(f"unknown profile kind {self.kind!r}")

    def __call__(self, n) -> float:
        if self.kind == "power":
            return self.D1 * np.asarray(n, dtype=np.float64) ** self.alpha
        return self.D1 * np.log(np.asarray(n, dtype=np.float64))

    def to_json_dict(self) -> dict:
        out = {"kind": self.kind, "D1": self.D1}
        if self.alpha is not None:
            out["alpha"] = self.alpha
        return out

    @classmethod
    def from_json_dict(cls, obj: dict) -> "LipschitzProfile":
        return cls(obj["kind"], float(obj["D1"]), obj.get("alpha"))
