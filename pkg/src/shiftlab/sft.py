"""Subshifts of finite type over the alphabet {0, ..., m-1}.

A subshift is described by a 0/1 transition matrix ``allowed`` where
``allowed[i, j] == 1`` iff symbol ``j`` may follow symbol ``i``.  Words are
plain numpy integer arrays; anything word-like (a digit string, a list, a
tuple) is accepted by the public functions and normalised with :func:`as_word`.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import NamedTuple, Sequence, Union

import numpy as np

from .errors import InvalidSft, NotPrimitive, SymbolOutOfRange

#: word counts up to this length are returned as exact integers by default
EXACT_COUNT_LIMIT = 256

WordLike = Union[str, Sequence[int], np.ndarray]


def as_word(w: WordLike) -> np.ndarray:
    """Return ``w`` as a 1-d integer array.

    Strings are read one digit per symbol (``"0101"``); sequences and arrays
    are taken as symbol lists.
    """
    if isinstance(w, np.ndarray):
        arr = w.ravel()
        if arr.dtype.kind not in "iu":
            arr = arr.astype(np.int64)
        return arr
    if isinstance(w, str):
        if w and not w.isdigit():
            raise SymbolOutOfRange(f"cannot parse word {w!r}: digits only")
        return np.frombuffer(w.encode("ascii"), dtype=np.uint8) - ord("0") if w else np.zeros(0, np.uint8)
    arr = np.asarray(list(w), dtype=np.int64)
    return arr.astype(np.uint8) if arr.size and arr.min() >= 0 and arr.max() < 256 else arr


def format_word(w: WordLike, m: int) -> Union[str, list]:
    """Serialise a word: digit string when ``m <= 10``, else a list of ints."""
    arr = as_word(w)
    if m <= 10:
        return "".join(map(str, arr.tolist()))
    return [int(x) for x in arr]


def primitivity_index(allowed: np.ndarray) -> int:
    """Least ``k >= 1`` with ``allowed**k`` entrywise positive.

    Powers are checked up to ``m**2``, which dominates Wielandt's bound
    ``(m-1)**2 + 1``.
    """
    a = np.asarray(allowed) > 0
    m = a.shape[0]
    power = a.copy()
    for k in range(1, m * m + 1):
        if power.all():
            return k
        power = (power.astype(np.int64) @ a.astype(np.int64)) > 0
    raise NotPrimitive(f"no power of the {m}x{m} transition matrix up to {m * m} is positive")


@dataclass(frozen=True, eq=False)
class Sft:
    """One-sided subshift of finite type.

    Parameters
    ----------
    m : int
        Alphabet size, at least 2.
    allowed : array_like
        ``m x m`` matrix of zeros and ones.

    Raises
    ------
    InvalidSft
        If the matrix has the wrong shape, non-binary entries, a dead symbol,
        or forbids the transition ``0 -> 0`` (the point ``0^inf`` must exist).
    NotPrimitive
        If no power of the matrix is entrywise positive.
    """

    m: int
    allowed: np.ndarray

    def __post_init__(self):
        m = self.m
        if not isinstance(m, (int, np.integer)) or isinstance(m, bool) or m < 2:
            raise InvalidSft(f"alphabet size must be an integer >= 2, got {m!r}")
        try:
            a = np.array(self.allowed, dtype=np.int64)
        except (TypeError, ValueError) as exc:
            raise InvalidSft(f"transition matrix is not numeric: {exc}") from None
        if a.shape != (m, m):
            raise InvalidSft(f"transition matrix must be {m}x{m}, got shape {a.shape}")
        if not np.isin(a, (0, 1)).all():
            raise InvalidSft("transition matrix entries must be 0 or 1")
        dead_rows = np.flatnonzero(a.sum(axis=1) == 0)
        dead_cols = np.flatnonzero(a.sum(axis=0) == 0)
        if dead_rows.size or dead_cols.size:
            raise InvalidSft(
                f"dead symbols: rows {dead_rows.tolist()} / columns {dead_cols.tolist()} have no 1"
            )
        if a[0, 0] != 1:
            raise InvalidSft("allowed[0][0] must be 1 so that 0^inf belongs to the subshift")
        a.setflags(write=False)
        object.__setattr__(self, "m", int(m))
        object.__setattr__(self, "allowed", a)
        primitivity_index(a)

    # -- constructors ---------------------------------------------------

    @classmethod
    def full_shift(cls, m: int) -> "Sft":
        return cls(m, np.ones((m, m), dtype=np.int64))

    @classmethod
    def golden_mean(cls) -> "Sft":
        """The golden-mean shift: no two consecutive 1s."""
        return cls(2, [[1, 1], [1, 0]])

    @classmethod
    def from_dict(cls, data: dict) -> "Sft":
        try:
            return cls(data["m"], data["allowed"])
        except (KeyError, TypeError) as exc:
            raise InvalidSft(f"SFT JSON needs keys 'm' and 'allowed': {exc}") from None

    @classmethod
    def from_json(cls, text: str) -> "Sft":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidSft(f"malformed SFT JSON: {exc}") from None
        if not isinstance(data, dict):
            raise InvalidSft("SFT JSON must be an object")
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return {"m": self.m, "allowed": self.allowed.tolist()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    # -- cached structure -----------------------------------------------

    @cached_property
    def gap(self) -> int:
        """Specification gap ``M`` (see :func:`specification_gap`)."""
        return primitivity_index(self.allowed) - 1

    @cached_property
    def _reach(self) -> list:
        # _reach[k][i, j]: a path of exactly k edges leads from i to j
        a = self.allowed.astype(bool)
        out = [np.eye(self.m, dtype=bool)]
        for _ in range(self.gap + 1):
            out.append((out[-1].astype(np.int64) @ a.astype(np.int64)) > 0)
        return out

    @cached_property
    def _log_counts(self) -> dict:
        return {}

    @cached_property
    def spectral_radius(self) -> float:
        return float(np.max(np.abs(np.linalg.eigvals(self.allowed.astype(float)))))

    def __repr__(self):
        return f"Sft(m={self.m}, allowed={self.allowed.tolist()})"


class WordCount(NamedTuple):
    value: Union[int, None]  # exact count, None when only the log was computed
    log: float


def _exact_count(a: np.ndarray, n: int) -> int:
    obj = a.astype(object)
    vec = np.ones(a.shape[0], dtype=object)
    e = n - 1
    power = obj
    while e:
        if e & 1:
            vec = power.dot(vec)
        e >>= 1
        if e:
            power = power.dot(power)
    return int(sum(vec))


def _log_count(a: np.ndarray, n: int) -> float:
    # log(1^T A^(n-1) 1) by repeated squaring with rescaling
    power = a.astype(float)
    log_power = 0.0
    vec = np.ones(a.shape[0])
    log_vec = 0.0
    e = n - 1
    while e:
        if e & 1:
            vec = power @ vec
            s = vec.max()
            vec /= s
            log_vec += log_power + math.log(s)
        e >>= 1
        if e:
            power = power @ power
            s = power.max()
            power /= s
            log_power = 2 * log_power + math.log(s)
    return log_vec + math.log(vec.sum())


def count_words(sft: Sft, n: int, exact: Union[bool, None] = None) -> WordCount:
    """Number of admissible words of length ``n`` and its natural log.

    The count is the sum of the entries of ``allowed**(n-1)``.  It is exact
    (arbitrary precision) for ``n <= EXACT_COUNT_LIMIT`` or when ``exact`` is
    true; beyond that only the log is computed, in the log domain.
    """
    if n < 1:
        raise ValueError(f"word length must be >= 1, got {n}")
    if exact is None:
        exact = n <= EXACT_COUNT_LIMIT
    if exact:
        value = _exact_count(sft.allowed, n)
        return WordCount(value, math.log(value))
    return WordCount(None, log_count_words(sft, n))


def log_count_words(sft: Sft, n: int) -> float:
    """Natural log of the number of admissible words of length ``n`` (cached)."""
    if n < 1:
        raise ValueError(f"word length must be >= 1, got {n}")
    cache = sft._log_counts
    if n not in cache:
        if n <= EXACT_COUNT_LIMIT:
            cache[n] = math.log(_exact_count(sft.allowed, n))
        else:
            cache[n] = _log_count(sft.allowed, n)
    return cache[n]


def entropy(sft: Sft) -> float:
    """Topological entropy in nats: the log of the spectral radius."""
    return math.log(sft.spectral_radius)


def entropy_estimate(sft: Sft, n: int) -> float:
    """Finite-n estimate ``log(#words of length n) / n``; never below the entropy."""
    return log_count_words(sft, n) / n


def specification_gap(sft: Sft) -> int:
    """Least ``M >= 0`` such that ``allowed**(M+1)`` is entrywise positive.

    Any two admissible words ``u, v`` can then be joined by a bridge ``w`` of
    length exactly ``M`` with ``u w v`` admissible.
    """
    return primitivity_index(sft.allowed) - 1


def is_admissible(sft: Sft, w: WordLike) -> bool:
    arr = as_word(w)
    if arr.size and (arr.min() < 0 or arr.max() >= sft.m):
        raise SymbolOutOfRange(f"symbols must lie in 0..{sft.m - 1}")
    if arr.size < 2:
        return True
    return bool(sft.allowed[arr[:-1], arr[1:]].all())


def bridge_symbols(sft: Sft, left: Union[int, None], right: Union[int, None]) -> np.ndarray:
    """Lexicographically least word ``w`` of length ``M`` with ``left w right`` admissible.

    Either end may be ``None``, meaning no constraint on that side.
    """
    M = sft.gap
    out = np.empty(M, dtype=np.int64)
    prev = left
    a = sft.allowed
    reach = sft._reach
    for i in range(M):
        remaining = M - i  # edges from the symbol chosen now to ``right``
        for s in range(sft.m):
            if prev is not None and not a[prev, s]:
                continue
            if right is not None and not reach[remaining][s, right]:
                continue
            out[i] = s
            prev = s
            break
        else:  # pragma: no cover - excluded by primitivity
            raise NotPrimitive("no bridge exists")
    return out


def bridge(sft: Sft, u: WordLike, v: WordLike) -> np.ndarray:
    """Lexicographically least ``w`` of length ``M`` such that ``u w v`` is admissible.

    ``u`` and ``v`` must be admissible and nonempty.  Only the last symbol of
    ``u`` and the first of ``v`` matter.
    """
    u, v = as_word(u), as_word(v)
    if u.size == 0 or v.size == 0:
        raise ValueError("bridge needs nonempty words on both sides")
    for w in (u, v):
        if not is_admissible(sft, w):
            raise ValueError(f"word {format_word(w, sft.m)!r} is not admissible")
    w = bridge_symbols(sft, int(u[-1]), int(v[0]))
    if sft.gap == 0 and not sft.allowed[u[-1], v[0]]:  # pragma: no cover
        raise NotPrimitive("gap 0 but concatenation inadmissible")
    return w.astype(u.dtype if u.dtype.kind in "iu" else np.int64)


@dataclass(frozen=True, eq=False)
class Cylinder:
    """The set of points of the subshift whose first ``depth`` symbols are ``base``."""

    base: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "base", as_word(self.base))
        if self.base.size < 1:
            raise ValueError("a cylinder needs depth >= 1")

    @property
    def depth(self) -> int:
        return int(self.base.size)


def cylinder(sft: Sft, base: WordLike) -> Cylinder:
    c = Cylinder(base)
    if not is_admissible(sft, c.base):
        raise ValueError("cylinder base is not admissible, so the cylinder is empty")
    return c


def branching_offset(sft: Sft, symbol: int) -> int:
    """Least ``t >= 1`` at which continuations of ``symbol`` can first differ."""
    a = sft.allowed
    s = symbol
    for t in range(1, sft.m + 2):
        succ = np.flatnonzero(a[s])
        if succ.size > 1:
            return t
        s = int(succ[0])
    raise NotPrimitive("continuation tree never branches")  # pragma: no cover


def cylinder_diameter(sft: Sft, c: Cylinder) -> Fraction:
    """Exact diameter ``m**-(n+t)`` of a depth-``n`` cylinder.

    ``t`` is the branching offset of the cylinder's final symbol; the result
    lies between ``m**-(n+M+K)`` and ``m**-(n+1)`` (see :func:`diameter_constant`).
    """
    t = branching_offset(sft, int(c.base[-1]))
    return Fraction(1, sft.m ** (c.depth + t))


def diameter_constant(sft: Sft) -> tuple[int, int]:
    """Return ``(M, K)`` where ``K`` is least with ``#words(K) > m**M``.

    Every depth-``n`` cylinder has diameter at least ``m**-(n+M+K)``.
    """
    M = sft.gap
    K = 1
    while count_words(sft, K, exact=True).value <= sft.m**M:
        K += 1
    return M, K


def enumerate_words(sft: Sft, n: int, budget: int = 1 << 22) -> np.ndarray:
    """All admissible words of length ``n`` as rows of a 2-d array (lex order)."""
    total = count_words(sft, n, exact=True).value
    if total > budget:
        from .errors import BudgetExceeded

        raise BudgetExceeded(f"{total} words of length {n} exceed the budget {budget}")
    words = np.arange(sft.m, dtype=np.int64)[:, None]
    a = sft.allowed.astype(bool)
    for _ in range(n - 1):
        parts = []
        last = words[:, -1]
        ok = a[last]  # rows: words, cols: next symbol
        idx, sym = np.nonzero(ok)
        parts = np.concatenate([words[idx], sym[:, None]], axis=1)
        words = parts
    return words
