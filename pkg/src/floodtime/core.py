"""Model parameters and the scalar kernels shared by every solver."""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from typing import Optional

import numpy as np


class ParameterError(ValueError):
    """Raised when a model parameter is outside its valid range."""


def stationary_probability(lam: float, mu_inv: float) -> float:
    """Steady-state probability that an edge is ON.

    ``lam`` is the intermeeting rate (mean OFF time ``1/lam``) and ``mu_inv``
    the mean contact duration. Returns ``mu_inv / (mu_inv + 1/lam)``.
    """
    if not lam > 0 or not math.isfinite(lam):
        raise ParameterError(f"lambda must be positive and finite, got {lam!r}")
    if not mu_inv >= 0:
        raise ParameterError(f"mu_inv must be nonnegative, got {mu_inv!r}")
    if mu_inv == 0:
        return 0.0
    if math.isinf(mu_inv):
        return 1.0
    # same value as mu_inv / (mu_inv + 1/lam), without forming 1/lam
    return lam * mu_inv / (lam * mu_inv + 1.0)


@dataclass(frozen=True)
class ModelParams:
    """Network size, intermeeting rate and stationary ON probability.

    Build with :meth:`from_contact` when the mean contact duration is known,
    or :meth:`from_p` to give the ON probability directly. ``mu_inv`` is
    ``None`` in the second case; ``p == 0`` means point-like contacts.
    """

    n_nodes: int
    lam: float
    p: float
    mu_inv: Optional[float] = None

    def __post_init__(self):
        if isinstance(self.n_nodes, bool) or int(self.n_nodes) != self.n_nodes:
            raise ParameterError(f"n_nodes must be an integer, got {self.n_nodes!r}")
        object.__setattr__(self, "n_nodes", int(self.n_nodes))
        if self.n_nodes < 1:
            raise ParameterError(f"n_nodes must be >= 1, got {self.n_nodes}")
        if not (self.lam > 0 and math.isfinite(self.lam)):
            raise ParameterError(f"lambda must be positive and finite, got {self.lam!r}")
        if not 0.0 <= self.p <= 1.0:
            raise ParameterError(f"p must lie in [0, 1], got {self.p!r}")
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "p", float(self.p))
        if self.mu_inv is not None:
            expected = stationary_probability(self.lam, self.mu_inv)
            if not math.isclose(expected, self.p, rel_tol=1e-12, abs_tol=1e-15):
                raise ParameterError(
                    f"p={self.p!r} is inconsistent with lambda={self.lam!r}, "
                    f"mu_inv={self.mu_inv!r} (expected {expected!r})"
                )

    @classmethod
    def from_contact(cls, n_nodes: int, lam: float, mu_inv: float) -> "ModelParams":
        return cls(n_nodes, lam, stationary_probability(lam, mu_inv), float(mu_inv))

    @classmethod
    def from_p(cls, n_nodes: int, lam: float, p: float) -> "ModelParams":
        return cls(n_nodes, lam, p)

    @property
    def point_like(self) -> bool:
        return self.p == 0.0

    def with_nodes(self, n_nodes: int) -> "ModelParams":
        return ModelParams(n_nodes, self.lam, self.p, self.mu_inv)


_harmonic_prefix = [0.0]
_harmonic_lock = threading.Lock()


def harmonic(n: int) -> float:
    """n-th harmonic number, summed in ascending order.

    Prefix sums are cached, so ``harmonic(n)`` is the same float whichever
    ``n`` was requested first.
    """
    if n < 1:
        raise ParameterError(f"harmonic(n) needs n >= 1, got {n}")
    if n >= len(_harmonic_prefix):
        with _harmonic_lock:
            total = _harmonic_prefix[-1]
            for k in range(len(_harmonic_prefix), n + 1):
                total += 1.0 / k
                _harmonic_prefix.append(total)
    return _harmonic_prefix[n]


def survive_pow(p: float, k: int) -> float:
    """``(1 - p) ** k`` with ``0 ** 0 == 1``.

    Evaluated as ``exp(k * log1p(-p))`` so long products of small survival
    factors do not drift.
    """
    if k == 0:
        return 1.0
    if p == 0.0:
        return 1.0
    if p == 1.0:
        return 0.0
    return math.exp(k * math.log1p(-p))


def _pmf_rows(m: int, log_q: np.ndarray, log_s: np.ndarray) -> np.ndarray:
    """Binomial(m, q) rows for a batch of success probabilities.

    ``log_q`` and ``log_s`` hold ``log(q)`` and ``log(1 - q)`` per row; passing
    both avoids the cancellation in ``1 - q`` when q is within rounding of 1.
    The ratio recurrence ``t[c+1]/t[c] = (m-c)/(c+1) * q/(1-q)`` is accumulated
    in log space, shifted to its row maximum and renormalised, so rows whose
    end terms underflow are still exact to rounding.
    """
    log_q = np.atleast_1d(np.asarray(log_q, dtype=float))
    log_s = np.atleast_1d(np.asarray(log_s, dtype=float))
    rows = np.zeros((log_q.size, m + 1))
    if m == 0:
        rows[:, 0] = 1.0
        return rows
    zero_q = np.isneginf(log_q)
    one_q = np.isneginf(log_s)
    inner = ~(zero_q | one_q)
    rows[zero_q, 0] = 1.0
    rows[one_q & ~zero_q, m] = 1.0
    if inner.any():
        c = np.arange(m)
        step = np.log((m - c) / (c + 1.0))
        log_odds = (log_q[inner] - log_s[inner])[:, None]
        log_t = np.empty((int(inner.sum()), m + 1))
        log_t[:, 0] = 0.0
        np.cumsum(step[None, :] + log_odds, axis=1, out=log_t[:, 1:])
        log_t -= log_t.max(axis=1, keepdims=True)
        t = np.exp(log_t)
        rows[inner] = t / t.sum(axis=1, keepdims=True)
    return rows


def binomial_pmf_row(m: int, q: float) -> np.ndarray:
    """Return ``[C(m,c) q^c (1-q)^(m-c)]`` for ``c = 0..m``."""
    if m < 0:
        raise ParameterError(f"m must be >= 0, got {m}")
    if not 0.0 <= q <= 1.0:
        raise ParameterError(f"q must lie in [0, 1], got {q!r}")
    log_q = math.log(q) if q > 0 else -math.inf
    log_s = math.log1p(-q) if q < 1 else -math.inf
    return _pmf_rows(m, np.array([log_q]), np.array([log_s]))[0]


def active_pmf_rows(p: float, m: int, actives) -> np.ndarray:
    """Weights of Binomial(m, 1 - (1-p)^a), one row per active count ``a``.

    Row ``a`` is the law of the number of uninformed nodes (out of ``m``) with
    an ON edge to at least one of ``a`` active nodes.
    """
    a = np.asarray(actives, dtype=float)
    if p == 0.0:
        log_s = np.zeros_like(a)
    elif p == 1.0:
        log_s = np.where(a == 0, 0.0, -np.inf)
    else:
        log_s = a * math.log1p(-p)
    with np.errstate(divide="ignore"):
        log_q = np.where(np.isneginf(log_s), 0.0, np.log(-np.expm1(log_s)))
    return _pmf_rows(m, log_q, log_s)
