"""Run-length statistics and eventually-always-hitting experiments.

Notation (1-based positions, words stored 0-based):

* ``l_n`` is the number of zeros immediately following position ``n``;
  with a 0-based array ``w`` this is the zero run starting at ``w[n]``.
* ``L[N] = max(l_1, ..., l_N)``.
* A point eventually always hits the shrinking targets around ``0^inf`` iff
  ``L[N] + 1 > Phi(N)`` for all large N, where ``Phi = -log_m psi``.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Sequence

import numpy as np

from . import kernels
from .errors import InsufficientWordLength, WordTooShort
from .gibbs import OrbitSampler, ParryMeasure
from .sft import Sft, WordLike, as_word

GROWTH_CAP = 8


# -- run lengths -----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class RunLengths:
    """Zero-run lengths of a finite word.

    ``l[n]`` and ``L[n]`` are indexed by ``n = 1..T-1`` (index 0 is unused
    and set to 0).  A censored ``l[n]`` is only a lower bound because the run
    reaches the end of the word; ``L[N]`` is censored as soon as any ``l[n]``
    with ``n <= N`` is.
    """

    word_len: int
    l: np.ndarray
    l_censored: np.ndarray
    L: np.ndarray
    L_censored: np.ndarray

    @property
    def horizon(self) -> int:
        return self.word_len - 1

    @property
    def first_censored(self) -> int:
        """Least censored index, or ``word_len`` if none."""
        idx = np.flatnonzero(self.l_censored)
        return int(idx[0]) if idx.size else self.word_len

    def at(self, N: int) -> tuple[int, bool]:
        if not 1 <= N <= self.horizon:
            raise IndexError(f"N={N} outside 1..{self.horizon}")
        return int(self.L[N]), bool(self.L_censored[N])


def run_lengths(w: WordLike) -> RunLengths:
    """Compute ``l_n`` and ``L_N`` with censoring flags.

    Examples
    --------
    >>> r = run_lengths("10010")
    >>> r.l[1:].tolist(), r.l_censored[1:].tolist()
    ([2, 1, 0, 1], [False, False, False, True])
    """
    w = as_word(w)
    T = int(w.size)
    if T < 2:
        raise WordTooShort(f"run lengths need a word of length >= 2, got {T}")
    z = kernels.zero_runs(np.ascontiguousarray(w))
    l = z.copy()
    l[0] = 0
    cens = z == (T - np.arange(T))
    cens[0] = False
    L = np.maximum.accumulate(l)
    first = np.flatnonzero(cens)
    Lc = np.zeros(T, dtype=bool)
    if first.size:
        Lc[first[0]:] = True
    for arr in (l, cens, L, Lc):
        arr.setflags(write=False)
    return RunLengths(T, l, cens, L, Lc)


# -- target functions ------------------------------------------------------


class Family(str, Enum):
    LOG_RATE = "LOG_RATE"
    LINEAR_RATE = "LINEAR_RATE"
    POWER_RATE = "POWER_RATE"
    TABLE = "TABLE"


@dataclass(frozen=True, eq=False)
class TargetFunction:
    """Shrinking-target radii ``psi`` described through ``Phi(N) = -log_m psi(N)``.

    Families:

    * ``LOG_RATE``: ``Phi(N) = c * ln(N) / entropy`` (``c`` times ``log_A N``);
    * ``LINEAR_RATE``: ``Phi(N) = tau * N`` (``tau = 1`` is ``psi(N) = m**-N``);
    * ``POWER_RATE``: ``Phi(N) = N**s``;
    * ``TABLE``: piecewise-linear interpolation of ``(N, Phi)`` pairs, held
      constant outside the table.
    """

    family: Family
    c: Optional[float] = None
    entropy: Optional[float] = None
    tau_param: Optional[float] = None
    s: Optional[float] = None
    table: Optional[np.ndarray] = None

    def __post_init__(self):
        fam = Family(self.family)
        object.__setattr__(self, "family", fam)
        if fam is Family.LOG_RATE:
            if self.c is None or self.entropy is None or self.c < 0 or self.entropy <= 0:
                raise ValueError("LOG_RATE needs c >= 0 and a positive entropy")
        elif fam is Family.LINEAR_RATE:
            if self.tau_param is None or self.tau_param < 0:
                raise ValueError("LINEAR_RATE needs tau >= 0")
        elif fam is Family.POWER_RATE:
            if self.s is None or not 0 < self.s < 1:
                raise ValueError("POWER_RATE needs 0 < s < 1")
        else:
            tab = np.asarray(self.table, dtype=float)
            if tab.ndim != 2 or tab.shape[1] != 2 or tab.shape[0] < 1:
                raise ValueError("TABLE needs a list of (N, Phi) pairs")
            if np.any(np.diff(tab[:, 0]) <= 0) or np.any(tab[:, 1] < 0):
                raise ValueError("TABLE N values must increase and Phi values be >= 0")
            object.__setattr__(self, "table", tab)

    # constructors
    @classmethod
    def log_rate(cls, c: float, entropy: float) -> "TargetFunction":
        return cls(Family.LOG_RATE, c=float(c), entropy=float(entropy))

    @classmethod
    def linear_rate(cls, tau: float) -> "TargetFunction":
        return cls(Family.LINEAR_RATE, tau_param=float(tau))

    @classmethod
    def power_rate(cls, s: float) -> "TargetFunction":
        return cls(Family.POWER_RATE, s=float(s))

    @classmethod
    def from_table(cls, pairs) -> "TargetFunction":
        return cls(Family.TABLE, table=np.asarray(pairs, dtype=float))

    @classmethod
    def from_dict(cls, data: dict, entropy: Optional[float] = None) -> "TargetFunction":
        fam = Family(data["family"])
        if fam is Family.LOG_RATE:
            return cls.log_rate(data["c"], data.get("entropy", entropy))
        if fam is Family.LINEAR_RATE:
            return cls.linear_rate(data["tau"])
        if fam is Family.POWER_RATE:
            return cls.power_rate(data["s"])
        return cls.from_table(data["table"])

    def to_dict(self) -> dict:
        fam = self.family
        if fam is Family.LOG_RATE:
            return {"family": fam.value, "c": self.c, "entropy": self.entropy}
        if fam is Family.LINEAR_RATE:
            return {"family": fam.value, "tau": self.tau_param}
        if fam is Family.POWER_RATE:
            return {"family": fam.value, "s": self.s}
        return {"family": fam.value, "table": self.table.tolist()}

    @property
    def tau(self) -> float:
        """``lim Phi(N) / N``."""
        if self.family is Family.LINEAR_RATE:
            return self.tau_param
        if self.family is Family.TABLE:
            return 0.0
        return 0.0

    def phi(self, N):
        """Evaluate ``Phi`` at scalar or array ``N`` (float result)."""
        x = np.asarray(N, dtype=float)
        fam = self.family
        if fam is Family.LOG_RATE:
            with np.errstate(divide="ignore"):
                out = self.c * np.log(np.maximum(x, 1.0)) / self.entropy
        elif fam is Family.LINEAR_RATE:
            out = self.tau_param * x
        elif fam is Family.POWER_RATE:
            out = np.power(np.maximum(x, 0.0), self.s)
        else:
            out = np.interp(x, self.table[:, 0], self.table[:, 1])
        return float(out) if out.ndim == 0 else out

    __call__ = phi

    def inverse(self, y: float, lo: int = 0) -> int:
        """Largest integer ``x >= lo`` with ``Phi(x) <= y`` (bisection).

        Requires ``Phi`` nondecreasing and unbounded.  Returns ``lo`` when
        ``Phi(lo) > y``.
        """
        if self.phi(lo) > y:
            return lo
        hi = max(lo + 1, 2)
        while self.phi(hi) <= y:
            hi *= 2
            if hi > 1 << 62:
                raise OverflowError("Phi does not exceed the requested value")
        # invariant: phi(lo) <= y < phi(hi)
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if self.phi(mid) <= y:
                lo = mid
            else:
                hi = mid
        return lo

    def phi_table(self, n_stop: int) -> np.ndarray:
        """``Phi(N)`` for ``N = 0..n_stop`` as a float array."""
        out = np.asarray(self.phi(np.arange(n_stop + 1)), dtype=float)
        return out


def zero_target() -> TargetFunction:
    """``Phi == 0`` (every point survives)."""
    return TargetFunction.linear_rate(0.0)


# -- survival ----------------------------------------------------------------


@dataclass(frozen=True)
class SurvivalReport:
    N0: int
    N1: int
    survived: bool
    first_failure: Optional[int]
    censored: bool


def ea_survives(
    w: WordLike | RunLengths,
    psi: TargetFunction,
    N0: int,
    N1: int,
    optimistic: bool = False,
) -> SurvivalReport:
    """Check ``L[N] + 1 > Phi(N)`` for every ``N`` in ``[N0, N1]``.

    In strict mode a censored ``L[N]`` is a lower bound: a pass is certain,
    a failure is ambiguous and raises InsufficientWordLength.  In optimistic
    mode censored values count as infinite.
    """
    if N0 < 1 or N1 < N0:
        raise ValueError(f"need 1 <= N0 <= N1, got N0={N0}, N1={N1}")
    runs = w if isinstance(w, RunLengths) else run_lengths(w)
    if N1 > runs.horizon:
        raise InsufficientWordLength(f"window ends at {N1} but the word only determines N <= {runs.horizon}")
    Ns = np.arange(N0, N1 + 1)
    L = runs.L[N0 : N1 + 1]
    cens = runs.L_censored[N0 : N1 + 1]
    fails = (L + 1.0) <= psi.phi_table(N1)[N0:]
    if optimistic:
        fails &= ~cens
    bad = np.flatnonzero(fails)
    any_cens = bool(cens.any())
    if bad.size == 0:
        return SurvivalReport(N0, N1, True, None, any_cens)
    i = int(bad[0])
    if cens[i]:
        raise InsufficientWordLength(
            f"L[{Ns[i]}] is censored and its lower bound fails; extend the word to decide"
        )
    return SurvivalReport(N0, N1, False, int(Ns[i]), bool(cens[: i + 1].any()))


# -- hitting counts ------------------------------------------------------------


def target_depths(lam: float, entropy: float, N: int) -> np.ndarray:
    """``k_n = floor(ln n / h) + 1`` for ``n = 1..N`` (index 0 unused)."""
    n = np.arange(N + 1, dtype=float)
    n[0] = 1.0
    j = np.floor(np.log(n) / entropy)
    # exact correction at powers of lam
    j += (lam ** (j + 1) <= n)
    j -= (lam**j > n)
    k = j.astype(np.int64) + 1
    k[0] = 0
    return k


def hitting_counts(w: WordLike, sft: Sft, measure: ParryMeasure, N: int) -> tuple[int, float]:
    """``R(N)`` and ``F(N)`` for targets ``I_{k_n}(0^inf)``.

    ``R`` counts ``n <= N`` such that the ``k_n`` symbols after position ``n``
    are all zero; ``F`` is the sum of the exact measures of those targets.
    """
    w = as_word(w)
    h = measure.entropy
    need = N + int(math.floor(math.log(N) / h)) + 2 if N >= 1 else 0
    if N < 1:
        raise ValueError("N must be >= 1")
    if w.size < need:
        raise InsufficientWordLength(f"hitting counts up to N={N} need a word of length >= {need}")
    k = target_depths(measure.lam, h, N)
    z = kernels.zero_runs(np.ascontiguousarray(w[: need + 1]))
    R = int(np.count_nonzero(z[1 : N + 1] >= k[1:]))
    return R, hitting_mass(measure, N, k)


def hitting_mass(measure: ParryMeasure, N: int, depths: Optional[np.ndarray] = None) -> float:
    """``F(N) = sum_{n<=N} mu(0^{k_n})``."""
    k = depths if depths is not None else target_depths(measure.lam, measure.entropy, N)
    ks, counts = np.unique(k[1 : N + 1], return_counts=True)
    p0, p00 = measure.pi[0], measure.trans[0, 0]
    return float(np.sum(counts * p0 * p00 ** (ks - 1.0)))


# -- experiments ---------------------------------------------------------------


def default_threads() -> int:
    env = os.environ.get("SHIFTLAB_THREADS")
    if env:
        return max(1, int(env))
    return max(1, min(8, os.cpu_count() or 1))


def parallel_map(fn: Callable, items: Sequence, threads: Optional[int] = None) -> list:
    """Order-preserving map over a thread pool (results merged by index)."""
    threads = threads or default_threads()
    if threads == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _initial_length(horizon: int, entropy: float) -> int:
    return horizon + 1 + int(4 * math.log(max(horizon, 2)) / entropy) + 64


def checkpoint_maxima(
    measure: ParryMeasure, seed: int, checkpoints: np.ndarray
) -> np.ndarray:
    """Uncensored ``L[N]`` at sorted checkpoints for the orbit of ``seed``.

    The orbit is extended (doubling) until the largest checkpoint is exact,
    up to ``GROWTH_CAP`` times that checkpoint.
    """
    top = int(checkpoints[-1])
    sampler = OrbitSampler(measure, seed)
    length = _initial_length(top, measure.entropy)
    out = np.empty(checkpoints.size, dtype=np.int64)
    while True:
        w = sampler.extend_to(length)
        first = kernels.checkpoint_maxima(w, checkpoints, out)
        if first < 0 or first > top:
            return out
        if length >= GROWTH_CAP * top:
            raise InsufficientWordLength(
                f"seed {seed}: checkpoint {top} still censored at word length {length}"
            )
        length = min(2 * length, GROWTH_CAP * top)


@dataclass
class LimitRatioResult:
    checkpoints: np.ndarray
    seeds: list
    L: np.ndarray  # shape (seeds, checkpoints)
    ratio: np.ndarray
    summary: dict = field(default_factory=dict)


def _quantiles(x: np.ndarray) -> dict:
    p5, p25, p50, p75, p95 = np.percentile(x, [5, 25, 50, 75, 95], axis=0)
    return {"median": p50, "mean": x.mean(axis=0), "p5": p5, "p95": p95, "p25": p25, "p75": p75, "iqr": p75 - p25}


def limit_ratio_experiment(
    sft: Sft,
    measure: ParryMeasure,
    seeds: Sequence[int],
    N: int,
    checkpoints: Optional[Sequence[int]] = None,
    threads: Optional[int] = None,
) -> LimitRatioResult:
    """Ratios ``L_N / log_A N`` with ``log_A N = ln N / entropy`` per seed and checkpoint."""
    cps = np.array(sorted(set(checkpoints if checkpoints is not None else [N])), dtype=np.int64)
    if cps[0] < 2:
        raise ValueError("checkpoints must be >= 2 (log_A 1 = 0)")
    if cps[-1] > N:
        raise ValueError("checkpoints must not exceed N")
    rows = parallel_map(lambda s: checkpoint_maxima(measure, s, cps), list(seeds), threads)
    L = np.array(rows, dtype=np.int64).reshape(len(seeds), cps.size)
    ratio = L / (np.log(cps) / measure.entropy)
    summary = {k: v for k, v in _quantiles(ratio).items()}
    return LimitRatioResult(cps, list(seeds), L, ratio, summary)


def survival_for_seed(
    measure: ParryMeasure, seed: int, phi: np.ndarray, N0: int, N1: int, optimistic: bool = False
) -> SurvivalReport:
    """Survival over ``[N0, N1]`` of the orbit of ``seed`` with auto-extension."""
    sampler = OrbitSampler(measure, seed)
    length = _initial_length(N1, measure.entropy)
    while True:
        w = sampler.extend_to(length)
        status, at = kernels.first_failure(w, phi, N0, N1, optimistic)
        if status == 0:
            return SurvivalReport(N0, N1, True, None, False)
        if status == 1:
            return SurvivalReport(N0, N1, False, int(at), False)
        if length >= GROWTH_CAP * N1:
            raise InsufficientWordLength(f"seed {seed}: L[{at}] stays censored up to length {length}")
        length = min(2 * length, GROWTH_CAP * N1)


@dataclass
class DichotomyResult:
    seeds: list
    reports: list
    fraction: float


def dichotomy_experiment(
    sft: Sft,
    measure: ParryMeasure,
    psi: TargetFunction,
    seeds: Sequence[int],
    N0: int,
    N1: int,
    threads: Optional[int] = None,
    optimistic: bool = False,
) -> DichotomyResult:
    """Fraction of seeds whose orbit satisfies ``L[N] + 1 > Phi(N)`` on ``[N0, N1]``."""
    if not 1 <= N0 < N1:
        raise ValueError("need 1 <= N0 < N1")
    if psi.family is Family.LOG_RATE and psi.c == 1:
        raise ValueError("c = 1 is the undecided boundary of the dichotomy")
    phi = psi.phi_table(N1)
    reports = parallel_map(lambda s: survival_for_seed(measure, s, phi, N0, N1, optimistic), list(seeds), threads)
    frac = sum(r.survived for r in reports) / len(reports) if reports else float("nan")
    return DichotomyResult(list(seeds), reports, frac)


def geometric_checkpoints(start: int, stop: int, ratio: float = 2.0) -> list[int]:
    """Integers ``start, start*ratio, ...`` (rounded, deduplicated) up to ``stop``."""
    if start < 1 or ratio <= 1:
        raise ValueError("need start >= 1 and ratio > 1")
    out = []
    x = float(start)
    while x <= stop:
        n = int(round(x))
        if not out or n != out[-1]:
            out.append(n)
        x *= ratio
    return out


def liminf_limsup_estimate(
    w: WordLike | RunLengths,
    psi: TargetFunction,
    checkpoints: Sequence[int],
    burn_in: int = 0,
) -> tuple[float, float]:
    """Min and max of ``L[N] / Phi(N)`` over ``checkpoints[burn_in:]``.

    Censored values enter as their lower bounds.
    """
    runs = w if isinstance(w, RunLengths) else run_lengths(w)
    cps = np.asarray(list(checkpoints), dtype=np.int64)[burn_in:]
    if cps.size == 0:
        raise ValueError("no checkpoints left after burn-in")
    if cps.max() > runs.horizon or cps.min() < 1:
        raise InsufficientWordLength(f"checkpoints must lie in 1..{runs.horizon}")
    ratios = runs.L[cps] / np.asarray(psi.phi(cps), dtype=float)
    return float(ratios.min()), float(ratios.max())
