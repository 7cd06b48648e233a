"""Perron eigendata and the Parry measure (measure of maximal entropy).

For the constant potential the transfer operator of an SFT reduces to the
transition matrix, so the Gibbs measure is the stationary Markov chain

    pi_i = u_i v_i / sum_j u_j v_j,    p_ij = A_ij v_j / (lam v_i)

built from the left (u) and right (v) Perron vectors of ``A``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels
from .errors import BudgetExceeded, ConvergenceFailure, WindowOverlap
from .sft import Sft, WordLike, as_word, is_admissible

DENSE_LIMIT = 64


@dataclass(frozen=True, eq=False)
class PerronData:
    """Leading eigenvalue and vectors of the transition matrix.

    Attributes
    ----------
    lam : float
        Perron root, equal to ``exp(entropy)``.
    right_vec, left_vec : ndarray
        Positive eigenvectors with ``right_vec.sum() == 1`` and ``left_vec @ right_vec == 1``.
    theta : float
        ``|lambda_2| / lam``, the mixing rate.
    entropy : float
        ``log(lam)`` in nats.
    """

    lam: float
    right_vec: np.ndarray
    left_vec: np.ndarray
    theta: float
    entropy: float


def _normalise(right, left):
    right = np.abs(np.real(right))
    left = np.abs(np.real(left))
    right = right / right.sum()
    left = left / (left @ right)
    return right, left


def _refine(a, lam, vec, steps=3):
    # a couple of power steps polish eigenvectors from the dense solver
    for _ in range(steps):
        vec = a @ vec / lam
        vec = vec / vec.sum()
    return vec


def _perron_dense(a):
    vals, vecs = np.linalg.eig(a)
    order = np.argsort(-np.abs(vals))
    lead = order[0]
    lam = float(np.real(vals[lead]))
    lvals, lvecs = np.linalg.eig(a.T)
    llead = int(np.argmax(np.abs(lvals)))
    right, left = _normalise(vecs[:, lead], lvecs[:, llead])
    right = _refine(a, lam, right)
    left = _refine(a.T, lam, left)
    right, left = _normalise(right, left)
    second = float(np.abs(vals[order[1]])) if len(vals) > 1 else 0.0
    return lam, right, left, second


def _power(a, max_iter, tol):
    m = a.shape[0]
    vec = np.full(m, 1.0 / m)
    lam = 0.0
    for _ in range(max_iter):
        nxt = a @ vec
        new_lam = nxt.sum()
        nxt /= new_lam
        if np.max(np.abs(nxt - vec)) <= tol * np.max(nxt) and abs(new_lam - lam) <= tol * new_lam:
            return new_lam, nxt
        vec, lam = nxt, new_lam
    raise ConvergenceFailure(f"power iteration did not converge in {max_iter} iterations")


def _second_radius(a, lam, right, left, max_iter, tol):
    # two-vector subspace iteration on the deflated matrix; the Ritz values of
    # the block capture a complex-conjugate subdominant pair as well
    b = a - lam * np.outer(right, left)
    m = a.shape[0]
    if m == 1:
        return 0.0
    rng = np.random.default_rng(0)
    q, _ = np.linalg.qr(rng.standard_normal((m, 2)))
    prev = None
    for _ in range(max_iter):
        z = b @ q
        if np.max(np.abs(z)) < 1e-300:
            return 0.0
        q, _ = np.linalg.qr(z)
        est = float(np.max(np.abs(np.linalg.eigvals(q.T @ b @ q))))
        if est < 1e-14 * lam:
            return 0.0
        if prev is not None and abs(est - prev) <= max(tol, 1e-13) * lam:
            return est
        prev = est
    raise ConvergenceFailure("deflated subspace iteration did not converge")


def perron(sft: Sft, method: str = "auto", max_iter: int = 100_000, tol: float = 1e-14) -> PerronData:
    """Perron eigendata of the transition matrix.

    ``method`` is ``"dense"`` (full eigensolve), ``"power"`` (power iteration
    with deflation for the second eigenvalue) or ``"auto"``, which picks the
    dense solver for alphabets up to 64 symbols.

    Raises
    ------
    ConvergenceFailure
        If power iteration exhausts ``max_iter``.
    """
    a = sft.allowed.astype(float)
    if method == "auto":
        method = "dense" if sft.m <= DENSE_LIMIT else "power"
    if method == "dense":
        lam, right, left, second = _perron_dense(a)
    elif method == "power":
        lam, right = _power(a, max_iter, tol)
        _, left = _power(a.T.copy(), max_iter, tol)
        right, left = _normalise(right, left)
        second = _second_radius(a, lam, right, left, max_iter, tol)
    else:
        raise ValueError(f"unknown eigensolver {method!r}")
    theta = second / lam
    if theta < 1e-13:
        theta = 0.0
    return PerronData(lam, right, left, float(theta), math.log(lam))


@dataclass(frozen=True, eq=False)
class ParryMeasure:
    """Stationary Markov measure of maximal entropy."""

    sft: Sft
    perron: PerronData
    pi: np.ndarray
    trans: np.ndarray

    @property
    def lam(self):
        return self.perron.lam

    @property
    def theta(self):
        return self.perron.theta

    @property
    def entropy(self):
        return self.perron.entropy

    def to_dict(self) -> dict:
        return {
            "pi": self.pi.tolist(),
            "trans": self.trans.tolist(),
            "lambda": self.lam,
            "theta": self.theta,
            "entropy": self.entropy,
        }

    def thresholds(self):
        """Integer cumulative thresholds (initial, transition) for uint32 draws."""
        return _scaled_cumsum(self.pi[None, :], np.ones((1, self.sft.m)))[0], _scaled_cumsum(
            self.trans, self.sft.allowed
        )


def _scaled_cumsum(prob, support):
    cum = np.rint(np.cumsum(prob, axis=1) * kernels.SCALE).astype(np.int64)
    for i in range(prob.shape[0]):
        last = np.flatnonzero(support[i])[-1]
        cum[i, last:] = kernels.SCALE
    return cum


def parry_measure(sft: Sft, data: Optional[PerronData] = None) -> ParryMeasure:
    data = data if data is not None else perron(sft)
    u, v = data.left_vec, data.right_vec
    pi = u * v
    pi /= pi.sum()
    a = sft.allowed
    trans = a * v[None, :] / (data.lam * v[:, None])
    trans /= trans.sum(axis=1, keepdims=True)
    trans[a == 0] = 0.0
    pi.setflags(write=False)
    trans.setflags(write=False)
    return ParryMeasure(sft, data, pi, trans)


def cylinder_measure(measure: ParryMeasure, w: WordLike) -> float:
    """mu(I_n(w)); exactly 0 for inadmissible words, 1 for the empty word."""
    w = as_word(w)
    if w.size == 0:
        return 1.0
    if not is_admissible(measure.sft, w):
        return 0.0
    return float(measure.pi[w[0]] * np.prod(measure.trans[w[:-1], w[1:]]))


def gibbs_ratio_bounds(measure: ParryMeasure, n: int, budget: int = 1 << 22) -> tuple[float, float]:
    """Extremes of ``mu(I_n(w)) * lam**n`` over all admissible words of length n.

    Words are enumerated level by level (only the running product and the last
    symbol are kept).  Raises BudgetExceeded when a level would hold more than
    ``budget`` words.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    from .sft import count_words

    total = count_words(measure.sft, n, exact=True).value
    if total > budget:
        raise BudgetExceeded(f"{total} words of length {n} exceed the budget {budget}")
    lam = measure.lam
    vals = measure.pi * lam
    last = np.arange(measure.sft.m)
    a = measure.sft.allowed.astype(bool)
    for _ in range(n - 1):
        idx, sym = np.nonzero(a[last])
        vals = vals[idx] * measure.trans[last[idx], sym] * lam
        last = sym
    return float(vals.min()), float(vals.max())


def correlation(measure: ParryMeasure, e: WordLike, f: WordLike, n: int) -> float:
    """``mu(I(e) & shift^-n I(f)) - mu(I(e)) mu(I(f))`` for ``n >= len(e)``.

    Computed as ``mu(e) * prod_f(p) * D^g[e_last, f_first]`` with
    ``D = P - 1 pi`` and ``g = n - len(e) + 1``, which avoids cancellation.
    """
    e, f = as_word(e), as_word(f)
    if e.size == 0 or f.size == 0:
        raise ValueError("correlation needs nonempty words")
    if n < e.size:
        raise WindowOverlap(f"shift {n} is smaller than len(e) = {e.size}")
    mu_e = cylinder_measure(measure, e)
    mu_f = cylinder_measure(measure, f)
    if mu_e == 0.0 or mu_f == 0.0:
        return 0.0
    tail = mu_f / measure.pi[f[0]]
    d = measure.trans - measure.pi[None, :]
    dg = np.linalg.matrix_power(d, n - e.size + 1)
    return float(mu_e * tail * dg[e[-1], f[0]])


# -- sampling ------------------------------------------------------------


def derive_seed(master: int, index: int) -> int:
    """Per-sample 64-bit seed from (master seed, sample index).

    Uses numpy's SeedSequence spawn keys, so the seed of sample ``i`` does not
    depend on how many samples are drawn or on the worker schedule.
    """
    ss = np.random.SeedSequence(int(master), spawn_key=(int(index),))
    return int(ss.generate_state(1, np.uint64)[0])


def seed_list(master: int, count: int) -> list[int]:
    return [derive_seed(master, i) for i in range(count)]


class UniformStream:
    """Prefix-consistent stream of uint32 uniforms from a Philox generator.

    Each raw 64-bit output supplies two uniforms (low half first), so
    ``take(a)`` followed by ``take(b)`` equals ``take(a + b)``.
    """

    def __init__(self, seed: int):
        self._bitgen = np.random.Philox(np.random.SeedSequence(int(seed)))
        self._spare = None

    def take(self, count: int) -> np.ndarray:
        out = np.empty(count, dtype=np.int64)
        pos = 0
        if count and self._spare is not None:
            out[0] = self._spare
            self._spare = None
            pos = 1
        need = count - pos
        if need > 0:
            raw = self._bitgen.random_raw((need + 1) // 2)
            halves = np.stack([raw & 0xFFFFFFFF, raw >> 32], axis=1).ravel()
            out[pos:] = halves[:need]
            if halves.size > need:
                self._spare = int(halves[need])
        return out


class OrbitSampler:
    """Extendable sample path of the Parry chain for one seed."""

    def __init__(self, measure: ParryMeasure, seed: int):
        self.measure = measure
        self._init_cum, self._cum = measure.thresholds()
        self._stream = UniformStream(seed)
        dtype = np.uint8 if measure.sft.m <= 256 else np.int32
        self._buf = np.empty(0, dtype=dtype)
        self._len = 0

    @property
    def word(self) -> np.ndarray:
        return self._buf[: self._len]

    def extend_to(self, length: int) -> np.ndarray:
        if length <= self._len:
            return self._buf[:length]
        if length > self._buf.size:
            buf = np.empty(max(length, 2 * self._buf.size), dtype=self._buf.dtype)
            buf[: self._len] = self._buf[: self._len]
            self._buf = buf
        if self._len == 0:
            u0 = self._stream.take(1)[0]
            start = kernels.pick(u0, self._init_cum)
            steps = self._stream.take(length - 1)
            kernels.walk(start, steps, self._cum, self._buf, 0)
        else:
            start = int(self._buf[self._len - 1])
            steps = self._stream.take(length - self._len)
            kernels.walk(start, steps, self._cum, self._buf, self._len - 1)
        self._len = length
        return self._buf[:length]


def sample_orbit(measure: ParryMeasure, seed: int, length: int) -> np.ndarray:
    """Length-``length`` prefix of a mu-typical point, deterministic in ``seed``."""
    if length < 1:
        raise ValueError("length must be >= 1")
    return OrbitSampler(measure, seed).extend_to(length).copy()


class UniformWords:
    """Sampler of uniformly distributed admissible words of a given length.

    A uniform word of length L is a Markov chain whose step ``i`` from ``s``
    goes to ``t`` with weight ``A[s, t] * c_{L-1-i}(t)``, where ``c_j = A**j 1``
    counts continuations.  Normalised ``c_j`` converges to the right Perron
    vector, so far from the end the steps follow the Parry kernel and only the
    last few steps need their own tables.
    """

    def __init__(self, measure: ParryMeasure, tol: float = 1e-15, max_tail: int = 100_000):
        a = measure.sft.allowed.astype(float)
        v = measure.perron.right_vec / measure.perron.right_vec.sum()
        vecs = [np.ones(a.shape[0]) / a.shape[0]]
        while np.max(np.abs(vecs[-1] - v)) > tol * np.max(v):
            nxt = a @ vecs[-1]
            vecs.append(nxt / nxt.sum())
            if len(vecs) > max_tail:
                raise ConvergenceFailure("continuation counts do not converge to the Perron vector")
        self.measure = measure
        self._vecs = vecs  # vecs[j] ~ A**j 1, for j < tail
        self.tail = len(vecs) - 1
        support = measure.sft.allowed
        self._tail_cum = np.stack(
            [_scaled_cumsum(support * vec[None, :] / (support @ vec)[:, None], support) for vec in vecs]
        ) if vecs else None
        _, self._bulk_cum = measure.thresholds()

    def _first_cum(self, length):
        j = min(length - 1, self.tail)
        vec = self._vecs[j] if j < self.tail else self._vecs[-1]
        return _scaled_cumsum((vec / vec.sum())[None, :], np.ones((1, vec.size)))[0]

    def sample(self, length: int, stream: UniformStream, out: Optional[np.ndarray] = None, offset: int = 0):
        """Write a uniform word of ``length`` symbols into ``out[offset:]`` (allocated if None)."""
        if out is None:
            out = np.empty(length, dtype=np.uint8 if self.measure.sft.m <= 256 else np.int32)
            offset = 0
        if length == 0:
            return out
        u = stream.take(length)
        s = kernels.pick(u[0], self._first_cum(length))
        # steps i = 1..length-1 look j = length-1-i symbols ahead
        bulk = max(0, length - 1 - self.tail)
        s = kernels.walk(s, u[1 : 1 + bulk], self._bulk_cum, out, offset)
        tail = length - 1 - bulk
        if tail:
            js = np.arange(tail - 1, -1, -1)
            kernels.walk_steps(s, u[1 + bulk :], self._tail_cum[js], out, offset + bulk)
        return out
