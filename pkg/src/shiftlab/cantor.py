"""Cantor-type constructions with prescribed run-length behaviour.

Two families are implemented.

``SECTION4`` targets ``psi(N) = m**-N`` (so ``Phi(N) = N``) and prescribed
``liminf L_N / N = a``, ``limsup L_N / N = b``.  Points start with ``0^{n_1}``
and level ``k`` appends a block of length ``n_{k+1} - n_k + M + 1`` made of a
marker, a forced zero run of length ``m_k - n_k - 2M - 1``, ``t_k`` free
blocks of the same length and one free tail block, all glued with
lexicographically least bridges.

``CASE2`` .. ``CASE6`` handle slowly shrinking targets (``Phi(N) / N -> 0``).
Points start with ``0^{n_0}`` and level ``k`` appends a block of length
``n_k - n_{k-1}`` containing a forced zero run of length ``d_{k-1} - 1 - 3M``
and ``l_k`` free blocks of length ``d_{k-1} - 1 - 2M``.

In both families the mass distribution splits the mass of a level-``k``
cylinder evenly among the level-``k+1`` blocks, so ``log lambda`` is a sum of
log word counts.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Optional

import numpy as np

from .errors import ConstructionError, DepthExceeded, EmptyRegime, SeedSearchFailure
from .gibbs import ParryMeasure, UniformStream, UniformWords, parry_measure
from .hitting import TargetFunction
from .sft import Sft, bridge_symbols, log_count_words

SEED_LIMIT = 10**9
MAX_LEVELS = 1_000_000


class Variant(str, Enum):
    SECTION4 = "SECTION4"
    CASE2 = "CASE2"
    CASE3 = "CASE3"
    CASE4 = "CASE4"
    CASE5 = "CASE5"
    CASE6 = "CASE6"


@dataclass(frozen=True)
class Level:
    """One construction level ``k >= 1``.

    ``width`` is ``m_k`` for SECTION4 and ``d_k`` otherwise; ``blocks`` is
    ``t_k`` or ``l_k``; ``tail`` is the free tail length (SECTION4) or
    ``r_k``.  ``N`` is the prefix length after which the level-``k`` mass is
    fixed and ``stretch_end`` the last prefix length with that same mass.
    """

    k: int
    n: int
    width: int
    blocks: int
    tail: int
    N: int
    stretch_end: int
    log_count: float
    log_mass: float


@dataclass(eq=False)
class LevelSequences:
    variant: Variant
    sft: Sft
    params: dict
    gap: int
    marker: int
    prefix: int  # length of the initial zero block
    levels: list
    n_seq: list  # n_k for SECTION4 (n_seq[0] = n_1), n_k for k >= 0 otherwise
    width_seq: list  # m_k or d_k aligned with n_seq
    psi: Optional[TargetFunction] = None
    checks: dict = field(default_factory=dict)

    @property
    def depth(self) -> int:
        return len(self.levels)

    def level(self, k: int) -> Level:
        if not 1 <= k <= self.depth:
            raise DepthExceeded(f"level {k} outside 1..{self.depth}")
        return self.levels[k - 1]

    def phi(self, N):
        if self.variant is Variant.SECTION4:
            return np.asarray(N, dtype=float)
        return self.psi.phi(N)


def choose_marker(sft: Sft) -> int:
    """Smallest nonzero symbol that may be followed by 0, else the smallest nonzero symbol."""
    a = sft.allowed
    for s in range(1, sft.m):
        if a[s, 0]:
            return s
    return 1


# -- SECTION4 --------------------------------------------------------------


def _section4_sequences(a: Fraction, b: Fraction, M: int, k0: Optional[int], n1: Optional[int], count: int):
    """``n_k, m_k`` for ``k = 1..count`` and the chosen ``k0``."""
    if a > 0:
        ratio = b / a
        need = max(a * (2 + b) / (b * (1 - a) - a), a * (1 + b) / (b * (b - a)))

        def build(k0):
            ns = [math.floor(ratio ** (k + k0)) + 1 for k in range(1, count + 1)]
            ms = [math.floor((1 + b) * n) + 1 for n in ns]
            return ns, ms

        if k0 is None:
            k0 = 1
            while not (ratio**k0 > need and build(k0)[1][0] - build(k0)[0][0] - 2 * M - 1 >= 1):
                k0 += 1
        ns, ms = build(k0)
        return ns, ms, k0
    # a = 0: geometric growth by increasing integer factors
    if k0 is None:
        k0 = max(1, math.ceil(b + 1))
    if n1 is None:
        n1 = math.ceil(4 * (math.sqrt(2) + 1) ** 2)
        while math.floor((1 + b) * n1) + math.isqrt(n1) + 1 - n1 - 2 * M - 1 < 1:
            n1 += 1
    ns = [n1]
    for k in range(1, count):
        ns.append((k + k0 + 1) * ns[-1])
    ms = [math.floor((1 + b) * n) + math.isqrt(n) + 1 for n in ns]
    return ns, ms, k0


def _build_section4(sft, a, b, k0, n1, depth_budget):
    M = sft.gap
    fa, fb = Fraction(a), Fraction(b)
    if not 0 <= fa < 1:
        raise ValueError(f"SECTION4 needs 0 <= a < 1, got a={a}")
    if fb <= 0 or math.isinf(b):
        raise ValueError(f"SECTION4 needs 0 < b < inf, got b={b}")
    boundary = fb * (1 - fa) - fa
    if boundary < 0:
        raise EmptyRegime(f"b < a/(1-a): {b} < {float(fa / (1 - fa))}; the level set is empty")
    if boundary == 0 and fa > 0:
        raise ConstructionError(f"b = a/(1-a) = {b}: the construction needs b > a/(1-a)")
    count = 8
    while True:
        ns, ms, k0 = _section4_sequences(fa, fb, M, k0, n1, count)
        # N_k = n_{k+1} + (2M+1)k; need n up to K+2 for stretch ends
        Ns = [ns[k] + (2 * M + 1) * k for k in range(1, count)]
        if Ns[-1] > depth_budget or count > 4096:
            break
        count *= 2
    checks = {
        "gap_increasing": all(ms[i + 1] - ns[i + 1] > ms[i] - ns[i] for i in range(count - 1)),
        "m_below_next_n": all(ms[i] < ns[i + 1] for i in range(count - 1)),
        "blocks_positive": ms[0] - ns[0] - 2 * M - 1 >= 1,
    }
    if not checks["blocks_positive"]:
        raise ConstructionError("zero block length m_1 - n_1 - 2M - 1 is not positive; raise k0 or n1")
    if not (checks["gap_increasing"] and checks["m_below_next_n"]):
        raise ConstructionError(f"sequence facts fail: {checks}")
    levels = []
    log_mass = 0.0
    for k in range(1, count - 1):
        n, m, n_next = ns[k - 1], ms[k - 1], ns[k]
        N = n_next + (2 * M + 1) * k
        if N > depth_budget:
            break
        gap = m - n
        t = (n_next - m - 1) // gap  # largest t with m + t*gap < n_next
        tail = n_next - m - t * gap
        log_count = t * log_count_words(sft, gap - 2 * M - 1) + log_count_words(sft, tail)
        log_mass -= log_count
        stretch = ms[k] + (2 * M + 1) * (k + 1)
        levels.append(Level(k, n, m, t, tail, N, stretch, log_count, log_mass))
    params = {"a": float(a), "b": float(b), "k0": k0, "n1": ns[0]}
    return LevelSequences(
        Variant.SECTION4, sft, params, M, choose_marker(sft), ns[0], levels, ns, ms, None, checks
    )


# -- CASE2 .. CASE6 ------------------------------------------------------------


def _case_rules(variant: Variant, psi: TargetFunction, a: float, b: float):
    """Return (width(n), next_n(k, n_prev, d_prev), parameter check message)."""
    phi = psi.phi

    if variant is Variant.CASE2:
        if not (0 < a <= b < math.inf):
            raise ValueError("CASE2 needs 0 < a <= b < inf")
        width = lambda n: math.floor(b * phi(n))
        arg = lambda k, n: (b / a) * phi(n)
    elif variant is Variant.CASE3:
        if not (0 < a < math.inf and math.isinf(b)):
            raise ValueError("CASE3 needs 0 < a < b = inf")

        def width(n):
            f = phi(n)
            return math.floor(a * f * math.log(n / f)) if f > 0 else 0

        arg = lambda k, n: phi(n) * math.log(n / phi(n))
    elif variant is Variant.CASE4:
        if not (a == 0 and 0 < b < math.inf):
            raise ValueError("CASE4 needs a = 0 < b < inf")
        width = lambda n: math.floor(b * phi(n))
        arg = lambda k, n: (k - 1) * phi(n)
    elif variant is Variant.CASE5:
        if not (a == 0 and math.isinf(b)):
            raise ValueError("CASE5 needs a = 0, b = inf")
        width = lambda n: math.isqrt(math.floor(n * phi(n)))
        arg = lambda k, n: n * phi(n)
    else:
        if not (a == 0 and b == 0):
            raise ValueError("CASE6 needs a = b = 0")
        width = lambda n: math.isqrt(math.floor(phi(n)))
        arg = None
    return width, arg


def _seed_n0(width, threshold: int, M: int) -> int:
    """Least n0 with ``width(n0) >= threshold`` and ``width(n0) - 1 - 3M >= 1``."""
    need = max(threshold, 3 * M + 2)
    ok = lambda n: width(n) >= need
    hi = 2
    while not ok(hi):
        hi *= 2
        if hi > SEED_LIMIT:
            if ok(SEED_LIMIT):
                hi = SEED_LIMIT
                break
            raise SeedSearchFailure(f"no n0 <= {SEED_LIMIT} satisfies the seeding inequality (need width >= {need})")
    lo = hi // 2  # not ok(lo) unless lo < 2
    if ok(lo):
        lo = 1
        if ok(lo):
            return lo
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


def _build_case(variant, sft, psi, a, b, P, n0, depth_budget):
    if psi is None:
        raise ValueError(f"{variant.value} needs a target function")
    if psi.tau != 0:
        raise ValueError(f"{variant.value} needs a target with Phi(N)/N -> 0")
    if P < 3:
        raise ValueError("P must be an integer >= 3")
    M = sft.gap
    width, arg = _case_rules(variant, psi, a, b)
    threshold = P + 2 + (3 * M if variant is Variant.CASE2 else 2 * M)
    if n0 is None:
        n0 = _seed_n0(width, threshold, M)
    d0 = width(n0)
    if d0 < max(threshold, 3 * M + 2):
        raise ConstructionError(f"n0={n0} gives d0={d0} below the seeding threshold")
    ns, ds = [n0], [d0]
    levels = []
    log_mass = 0.0
    ratio_trace = []
    for k in range(1, MAX_LEVELS):
        n_prev, d_prev = ns[-1], ds[-1]
        if variant is Variant.CASE6:
            n = n_prev + P * d_prev + 1
        else:
            # the inverse never drops below n_{k-1} (matters for CASE4 at k = 1)
            n = psi.inverse(arg(k, n_prev), lo=n_prev) + P * d_prev
        if n > depth_budget:
            break
        d = width(n)
        if d < 3 * M + 2:
            raise ConstructionError(f"level {k}: d_k={d} leaves no room for the zero block")
        blocks = (n - n_prev) // d_prev - 1
        r = (n - n_prev) - d_prev * (blocks + 1)
        log_count = blocks * log_count_words(sft, d_prev - 1 - 2 * M)
        log_mass -= log_count
        levels.append(Level(k, n, d, blocks, r, n, n + d, log_count, log_mass))
        ns.append(n)
        ds.append(d)
        if psi.phi(n_prev) > 0:
            ratio_trace.append(psi.phi(n) / psi.phi(n_prev))
    checks = {
        "zero_block_positive": all(d - 1 - 3 * M >= 1 for d in ds[:-1]) if len(ds) > 1 else True,
        "seed_threshold": threshold,
    }
    if variant is Variant.CASE2 and ratio_trace:
        checks["phi_ratio_last"] = ratio_trace[-1]
        checks["phi_ratio_target"] = b / a
    params = {"a": float(a), "b": float(b), "P": int(P), "n0": n0, "psi": psi.to_dict()}
    return LevelSequences(variant, sft, params, M, choose_marker(sft), n0, levels, ns, ds, psi, checks)


def build_sequences(
    variant,
    sft: Sft,
    psi: Optional[TargetFunction] = None,
    a: float = 0.0,
    b: float = 0.0,
    P: int = 3,
    k0: Optional[int] = None,
    n1: Optional[int] = None,
    n0: Optional[int] = None,
    depth_budget: int = 10**6,
) -> LevelSequences:
    """Build level sequences up to the largest level with ``N_k <= depth_budget``.

    Parameters
    ----------
    variant : Variant or str
    sft : Sft
    psi : TargetFunction, optional
        Required for CASE2..CASE6 (``Phi`` strictly increasing, ``Phi(N)/N -> 0``).
    a, b : float
        Prescribed liminf and limsup (``math.inf`` for an infinite limsup).
    P : int
        Block multiplicity for CASE2..CASE6 (``>= 3``).
    k0, n1 : int, optional
        SECTION4 seeding overrides; defaults are the least admissible values.
    n0 : int, optional
        CASE2..CASE6 seeding override.

    Raises
    ------
    EmptyRegime
        SECTION4 with ``b < a/(1-a)``.
    ConstructionError
        Parameters on the boundary or seeds that break block positivity.
    SeedSearchFailure
        No seed ``n0 <= 10**9`` meets the seeding inequality.
    """
    variant = Variant(variant)
    if variant is Variant.SECTION4:
        return _build_section4(sft, a, b, k0, n1, depth_budget)
    return _build_case(variant, sft, psi, a, b, P, n0, depth_budget)


def log_mass(seq: LevelSequences, k: int) -> float:
    """``log lambda`` of a level-``k`` cylinder (``0`` at ``k = 0``)."""
    if k == 0:
        return 0.0
    return seq.level(k).log_mass


def local_dimension(seq: LevelSequences, k: int) -> float:
    """``-log lambda(I_{N_k}) / (N_k log m)`` at the end of level ``k``."""
    if k < 1:
        raise DepthExceeded("local dimension needs k >= 1")
    lev = seq.level(k)
    return -lev.log_mass / (lev.N * math.log(seq.sft.m))


def local_dimension_min(seq: LevelSequences, k: int) -> float:
    """Local dimension at the end of the constant-mass stretch after level ``k``.

    The mass stays equal to ``lambda(I_{N_k})`` up to ``stretch_end``, so this
    is where the ratio dips lowest; its limit is the dimension lower bound.
    """
    if k < 1:
        raise DepthExceeded("local dimension needs k >= 1")
    lev = seq.level(k)
    return -lev.log_mass / (lev.stretch_end * math.log(seq.sft.m))


# -- sample points ---------------------------------------------------------------


class _Writer:
    def __init__(self, seq: LevelSequences, length: int, seed: int, measure: Optional[ParryMeasure]):
        self.seq = seq
        self.sft = seq.sft
        self.buf = np.zeros(length, dtype=np.uint8 if seq.sft.m <= 256 else np.int32)
        self.pos = 0
        self.stream = UniformStream(seed)
        self.words = UniformWords(measure if measure is not None else parry_measure(seq.sft))
        self._bridges = {}

    @property
    def full(self):
        return self.pos >= self.buf.size

    def last(self):
        return int(self.buf[self.pos - 1])

    def put(self, symbols):
        n = min(len(symbols), self.buf.size - self.pos)
        self.buf[self.pos : self.pos + n] = symbols[:n]
        self.pos += n

    def zeros(self, count):
        self.pos = min(self.pos + count, self.buf.size)  # buffer is zero-initialised

    def bridge(self, right):
        key = (self.last(), right)
        if key not in self._bridges:
            self._bridges[key] = bridge_symbols(self.sft, key[0], right)
        self.put(self._bridges[key])

    def free(self, length):
        """Uniform admissible word, bridged from the current end."""
        if self.full:
            return
        word = self.words.sample(length, self.stream)
        self.bridge(int(word[0]))
        self.put(word)


def _section4_level(wr: _Writer, lev: Level, M: int, omega: int):
    gap = lev.width - lev.n
    zero_len = gap - 2 * M - 1
    wr.bridge(omega)  # epsilon_k
    wr.put([omega])
    wr.bridge(0)
    wr.zeros(zero_len)
    for _ in range(lev.blocks):
        if wr.full:
            return
        wr.bridge(omega)
        wr.put([omega])
        wr.free(zero_len)
    wr.bridge(omega)
    wr.put([omega])
    wr.free(lev.tail)


def _case_level(wr: _Writer, lev: Level, d_prev: int, M: int, P: int, omega: int):
    wr.bridge(omega)  # epsilon_k
    wr.put([omega])
    wr.bridge(0)
    wr.zeros(d_prev - 1 - 3 * M)
    for _ in range(lev.blocks):
        if wr.full:
            return
        wr.bridge(omega)
        wr.put([omega])
        wr.free(d_prev - 1 - 2 * M)
    r = lev.tail
    if r == 0:
        wr.bridge(None)
    elif r <= P:
        wr.bridge(0)
        wr.zeros(r)
    else:
        wr.bridge(omega)
        wr.put([omega])
        wr.zeros(r - 1)


def sample_point(
    seq: LevelSequences, seed: int, length: int, measure: Optional[ParryMeasure] = None
) -> np.ndarray:
    """Prefix of length ``length`` of a random point of the constructed set.

    Free blocks are uniform admissible words drawn from a Philox stream seeded
    with ``seed``; everything else (zero blocks, markers, bridges) is forced.
    """
    top = seq.levels[-1].N if seq.levels else seq.prefix
    if length > top:
        raise DepthExceeded(f"length {length} exceeds the built depth (N_K = {top})")
    wr = _Writer(seq, length, seed, measure)
    wr.zeros(seq.prefix)
    M = seq.gap
    for i, lev in enumerate(seq.levels):
        if wr.full:
            break
        if seq.variant is Variant.SECTION4:
            _section4_level(wr, lev, M, seq.marker)
        else:
            _case_level(wr, lev, seq.width_seq[i], M, seq.params["P"], seq.marker)
    return wr.buf


def target_dimension(seq: LevelSequences) -> float:
    """Limit of the local dimensions predicted by the closed-form formula."""
    from .dimensions import hausdorff_dimension

    dim = hausdorff_dimension(seq.sft)
    if seq.variant is Variant.SECTION4:
        a, b = seq.params["a"], seq.params["b"]
        return (b * (1 - a) - a) / ((1 + b) * (b - a)) * dim
    return (1 - 2 / seq.params["P"]) * dim


def construction_report(seq: LevelSequences) -> dict:
    """JSON-ready summary of the levels and their masses."""
    levels = []
    for lev in seq.levels:
        levels.append(
            {
                "k": lev.k,
                "n_k": lev.n,
                "m_k_or_d_k": lev.width,
                "t_k_or_l_k": lev.blocks,
                "r_k": lev.tail,
                "N_k": lev.N,
                "stretch_end": lev.stretch_end,
                "log_count": lev.log_count,
                "log_mass": lev.log_mass,
                "local_dim": local_dimension(seq, lev.k),
                "local_dim_min": local_dimension_min(seq, lev.k),
            }
        )
    return {
        "variant": seq.variant.value,
        "params": dict(seq.params, M=seq.gap, marker=seq.marker),
        "levels": levels,
        "target_dim": target_dimension(seq),
        "checks": seq.checks,
    }
