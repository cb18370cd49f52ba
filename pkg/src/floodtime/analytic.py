"""Closed-form and recursive expected flooding times.

Notation used throughout:

* ``i``: number of informed nodes, ``m = N - i`` uninformed nodes.
* ``a``: number of *active* informed nodes, the only ones whose edges to
  uninformed nodes may currently be ON (each independently with prob. ``p``).
* ``F0``: sparse-regime time (point-like contacts), ``F``: exact time,
  ``F_lower`` / ``F_upper``: the cheaper lower and upper bounds.

Every solver runs the same kind of backward recursion. From a state with
``a`` active nodes and ``m`` uninformed nodes, the number ``c`` of uninformed
nodes hit instantly is Binomial(m, 1 - (1-p)^a). ``c = 0`` costs an
exponential wait of mean ``1/(lam * i * m)`` and leaves one fresh active node;
``c >= 1`` is free and leaves ``c`` fresh active nodes. The ``c = 0`` and
``c = 1`` branches lead to the same successor, so their weights are merged
before the dot product; the operation counters count one multiplication and
one addition per merged dependency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .core import ModelParams, ParameterError, active_pmf_rows, harmonic, survive_pow


@dataclass(frozen=True)
class OpCounts:
    multiplications: int = 0
    additions: int = 0


@dataclass(frozen=True)
class FaTable:
    """Auxiliary times ``F^(a)(i)`` of the exact recursion.

    ``rows[i]`` holds the values for ``a = 1..i-1`` (index ``a - 1``); the
    root row ``rows[1]`` holds the single value ``F(1)``.
    """

    n_nodes: int
    rows: Dict[int, np.ndarray] = field(repr=False)

    def __getitem__(self, key: Tuple[int, int]) -> float:
        i, a = key
        row = self.rows[i]
        if not 1 <= a <= row.size:
            raise KeyError(key)
        return float(row[a - 1])

    def __len__(self) -> int:
        return sum(row.size for row in self.rows.values())

    def items(self):
        for i in sorted(self.rows, reverse=True):
            for a, value in enumerate(self.rows[i], start=1):
                yield (i, a), float(value)


@dataclass(frozen=True)
class UpperTable:
    """Upper-bound table ``G(a, m)``: ``a`` active nodes, ``m`` uninformed.

    ``rows[m]`` holds ``G(a, m)`` for ``a = 1..len(rows[m])``. ``G(1, K-1)``
    is the upper bound for a network of ``K`` nodes.
    """

    n_nodes: int
    rows: Dict[int, np.ndarray] = field(repr=False)
    ops: OpCounts = OpCounts()

    def __getitem__(self, key: Tuple[int, int]) -> float:
        a, m = key
        row = self.rows[m]
        if not 1 <= a <= row.size:
            raise KeyError(key)
        return float(row[a - 1])

    def __len__(self) -> int:
        return sum(row.size for row in self.rows.values())

    def flooding_time(self, n_nodes: int) -> float:
        """Upper bound for ``n_nodes`` nodes, read off this table."""
        if n_nodes < 1 or n_nodes > self.n_nodes:
            raise ParameterError(f"table covers N in [1, {self.n_nodes}], got {n_nodes}")
        if n_nodes == 1:
            return 0.0
        return self[1, n_nodes - 1]


@dataclass(frozen=True)
class SparseSystem:
    """Unit lower-triangular system ``T F = d`` in Psi order (0-based storage)."""

    n_nodes: int
    dimension: int
    t_offdiag: Dict[Tuple[int, int], float]
    d: np.ndarray

    def forward_substitution(self) -> np.ndarray:
        by_row: Dict[int, List[Tuple[int, float]]] = {}
        for (row, col), value in self.t_offdiag.items():
            by_row.setdefault(row, []).append((col, value))
        x = np.zeros(self.dimension)
        for row in range(self.dimension):
            acc = self.d[row]
            for col, value in by_row.get(row, ()):
                acc -= value * x[col]
            x[row] = acc
        return x


def _check_nodes(params: ModelParams, minimum: int) -> int:
    n = params.n_nodes
    if n < minimum:
        raise ParameterError(f"need at least {minimum} nodes, got {n}")
    return n


def sparse_flooding_time(params: ModelParams) -> float:
    """Flooding time with point-like contacts, ``2 H_{N-1} / (lam N)``."""
    n = params.n_nodes
    if n == 1:
        return 0.0
    return 2.0 / (params.lam * n) * harmonic(n - 1)


def sparse_envelope(params: ModelParams) -> Tuple[float, float]:
    """Logarithmic bracket ``(2 ln N, 2 (1 + ln(N-1))) / (lam N)`` around F0."""
    n = _check_nodes(params, 2)
    scale = 2.0 / (params.lam * n)
    return scale * math.log(n), scale * (1.0 + math.log(n - 1))


def _merged(weights: np.ndarray) -> np.ndarray:
    """Fold the c=0 and c=1 columns together; drop the absorbing column c=m."""
    coef = weights[:, 1:-1].copy()
    coef[:, 0] += weights[:, 0]
    return coef


def exact_flooding_time(params: ModelParams) -> Tuple[float, FaTable, OpCounts]:
    """Exact expected flooding time via dynamic programming over ``(i, a)``.

    Rows are filled for ``i = N-1`` down to the root ``(1, 1)``. Within a row
    every ``a`` shares the same dependency vector
    ``[F^(1)(i+1), F^(2)(i+2), ..., F^(m-1)(i+m-1)]``.
    """
    n, lam, p = params.n_nodes, params.lam, params.p
    if n == 1:
        return 0.0, FaTable(1, {1: np.zeros(1)}), OpCounts()
    rows: Dict[int, np.ndarray] = {}
    mults = 0
    for i in range(n - 1, 0, -1):
        m = n - i
        actives = np.arange(1, max(i - 1, 1) + 1)
        d = np.array([survive_pow(p, int(a) * m) for a in actives]) / (lam * i * m)
        if m == 1:
            rows[i] = d
            continue
        coef = _merged(active_pmf_rows(p, m, actives))
        deps = np.array([rows[i + c][c - 1] for c in range(1, m)])
        rows[i] = d + coef @ deps
        mults += actives.size * (m - 1)
    table = FaTable(n, rows)
    return float(rows[1][0]), table, OpCounts(mults, mults)


def psi_index(n_nodes: int, i: int, a: int) -> int:
    """1-based position of ``F^(a)(i)`` in the stacked unknown vector."""
    valid = (2 <= i <= n_nodes - 1 and 1 <= a <= i - 1) or (i == 1 and a == 1)
    if not valid:
        raise ParameterError(f"(i={i}, a={a}) outside the index domain for N={n_nodes}")
    return ((n_nodes - 1) * (n_nodes - 2) - i * (i - 1)) // 2 + a


def assemble_system(params: ModelParams) -> SparseSystem:
    """Explicit ``T F = d`` form of the exact recursion.

    Coefficients are built from binomial coefficients and powers directly, not
    from the pmf rows used by :func:`exact_flooding_time`, so solving this
    system is an independent route to the same numbers.
    """
    n = _check_nodes(params, 3)
    lam, p = params.lam, params.p
    dim = (n - 2) * (n - 1) // 2 + 1
    d = np.zeros(dim)
    t: Dict[Tuple[int, int], float] = {}
    states = [(i, a) for i in range(n - 1, 1, -1) for a in range(1, i)] + [(1, 1)]
    for i, a in states:
        row = psi_index(n, i, a) - 1
        m = n - i
        d[row] = survive_pow(p, a * m) / (lam * i * m)
        if i == n - 1:
            continue
        hit = 1.0 - survive_pow(p, a)
        t[row, psi_index(n, i + 1, 1) - 1] = (
            -survive_pow(p, a * m) - m * hit * survive_pow(p, a * (m - 1))
        )
        for c in range(2, m):
            t[row, psi_index(n, i + c, c) - 1] = (
                -math.comb(m, c) * hit**c * survive_pow(p, a * (m - c))
            )
    return SparseSystem(n, dim, t, d)


def complexity_exact(n_nodes: int) -> int:
    """Operation count of the exact solve, ``(N^3 - 6N^2 + 17N - 18) / 6``."""
    if n_nodes < 3:
        raise ParameterError(f"complexity_exact needs N >= 3, got {n_nodes}")
    n = n_nodes
    return (n**3 - 6 * n**2 + 17 * n - 18) // 6


def small_p_exact(params: ModelParams) -> float:
    """First-order expansion ``F0 - H_{N-1} p / lam`` of the exact time."""
    n = _check_nodes(params, 2)
    return sparse_flooding_time(params) - harmonic(n - 1) / params.lam * params.p


def _lower_solve(params: ModelParams) -> Tuple[np.ndarray, OpCounts]:
    n, lam, p = params.n_nodes, params.lam, params.p
    values = np.zeros(n + 1)  # values[i] = F_lower(i); values[N] = 0
    ops = 0
    for i in range(n - 1, 0, -1):
        m = n - i
        d = survive_pow(p, i * m) / (lam * i * m)
        if m == 1:
            values[i] = d
            continue
        coef = _merged(active_pmf_rows(p, m, [i]))[0]
        values[i] = d + coef @ values[i + 1 : n]
        ops += m - 1
    return values, OpCounts(ops, ops)


def lower_bound_flooding_time(params: ModelParams) -> float:
    """Lower bound: every informed node is treated as active after each step."""
    return lower_bound_with_counts(params)[0]


def lower_bound_with_counts(params: ModelParams) -> Tuple[float, OpCounts]:
    values, ops = _lower_solve(params)
    return float(values[1]), ops


def small_p_lower(params: ModelParams) -> float:
    """First-order expansion ``F0 - (N-1) p / lam`` of the lower bound."""
    n = _check_nodes(params, 2)
    return sparse_flooding_time(params) - (n - 1) / params.lam * params.p


def complexity_lower(n_nodes: int) -> int:
    if n_nodes < 2:
        raise ParameterError(f"complexity_lower needs N >= 2, got {n_nodes}")
    return math.comb(n_nodes - 1, 2)


def upper_bound_table(params: ModelParams) -> UpperTable:
    """Fill ``G(a, m)`` for ``a + m <= N - 1`` plus ``G(1, N - 1)``.

    Those are exactly the entries the bound for ``N`` nodes depends on, and
    they already contain the bound for every smaller network.
    """
    n, lam, p = params.n_nodes, params.lam, params.p
    rows: Dict[int, np.ndarray] = {}
    ops = 0
    for m in range(1, n):
        top = n - 1 - m if m < n - 1 else 1
        actives = np.arange(1, top + 1)
        d = np.array([survive_pow(p, int(a) * m) for a in actives]) / (lam * actives * m)
        if m == 1:
            rows[m] = d
            continue
        coef = _merged(active_pmf_rows(p, m, actives))
        deps = np.array([rows[m - c][c - 1] for c in range(1, m)])
        rows[m] = d + coef @ deps
        ops += actives.size * (m - 1)
    return UpperTable(n, rows, OpCounts(ops, ops))


def upper_bound_flooding_time(params: ModelParams) -> Tuple[float, UpperTable]:
    """Upper bound: informed nodes drop out once they have passed the message on."""
    table = upper_bound_table(params)
    return table.flooding_time(params.n_nodes), table


def complexity_upper(n_nodes: int) -> int:
    if n_nodes < 3:
        raise ParameterError(f"complexity_upper needs N >= 3, got {n_nodes}")
    return complexity_exact(n_nodes)


def incremental_upper(n_nodes: int) -> int:
    """Extra operations to extend the upper-bound table from N-1 to N nodes."""
    if n_nodes < 3:
        raise ParameterError(f"incremental_upper needs N >= 3, got {n_nodes}")
    n = n_nodes
    return (n - 1) * (n - 2) // 2 - n + 3


def crossover_n(lam: float, p: float, n_max: int) -> Optional[int]:
    """Smallest N^ with ``F_upper < F0`` for every N in ``(N^, n_max]``.

    Returns ``None`` when the strict inequality fails at ``n_max`` itself;
    without that rule ``N^ = n_max`` would always qualify vacuously.
    """
    if n_max < 3:
        raise ParameterError(f"n_max must be >= 3, got {n_max}")
    params = ModelParams.from_p(n_max, lam, p)
    table = upper_bound_table(params)
    last_failure = None
    for k in range(3, n_max + 1):
        f0 = sparse_flooding_time(params.with_nodes(k))
        if not table.flooding_time(k) < f0:
            last_failure = k
    if last_failure is None:
        return 2
    if last_failure == n_max:
        return None
    return last_failure
