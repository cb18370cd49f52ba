"""Exact flooding time of the Markovian edge process for tiny networks.

With exponential contact durations every edge is a two-state chain
(OFF -> ON at rate ``lam``, ON -> OFF at rate ``mu``), so the pair
(edge configuration, informed set) is a finite Markov chain. Flooding is
instantaneous, so only *closed* states are kept: states where no ON edge
joins an informed node to an uninformed one. A flip that opens such an edge
is composed with the closure on the spot.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Dict, List, Tuple

import numpy as np

from .analytic import (
    exact_flooding_time,
    lower_bound_flooding_time,
    sparse_flooding_time,
    upper_bound_flooding_time,
)
from .core import ModelParams, ParameterError
from .stochastic import edge_list

MAX_NODES = 4

ChainState = Tuple[int, int]  # (ON-edge bitmask, informed-node bitmask)


class UnsupportedSizeError(ParameterError):
    pass


def _closure(config: int, informed: int, edges: List[Tuple[int, int]]) -> int:
    grown = True
    while grown:
        grown = False
        for e, (u, v) in enumerate(edges):
            if config >> e & 1 and (informed >> u & 1) != (informed >> v & 1):
                informed |= (1 << u) | (1 << v)
                grown = True
    return informed


def ctmc_exact_flooding(n_nodes: int, lam: float, mu: float) -> float:
    """Expected flooding time from steady state, by an absorption-time solve."""
    if not 2 <= n_nodes <= MAX_NODES:
        raise UnsupportedSizeError(f"chain oracle supports 2 <= N <= {MAX_NODES}, got {n_nodes}")
    if not (lam > 0 and mu > 0):
        raise ParameterError(f"rates must be positive, got lam={lam!r}, mu={mu!r}")
    edges = edge_list(n_nodes)
    n_edges = len(edges)
    everyone = (1 << n_nodes) - 1

    index: Dict[ChainState, int] = {}
    for config in range(1 << n_edges):
        for informed in range(1, everyone, 2):  # source (node 0) always informed
            if _closure(config, informed, edges) == informed:
                index[config, informed] = len(index)

    size = len(index)
    generator = np.zeros((size, size))
    for (config, informed), row in index.items():
        for e in range(n_edges):
            rate = mu if config >> e & 1 else lam
            generator[row, row] += rate
            flipped = config ^ (1 << e)
            target = _closure(flipped, informed, edges)
            if target != everyone:
                generator[row, index[flipped, target]] -= rate
    try:
        hitting = np.linalg.solve(generator, np.ones(size))
    except np.linalg.LinAlgError as exc:  # pragma: no cover - lam, mu > 0 keeps it regular
        raise RuntimeError("absorption system is singular") from exc

    p = lam / (lam + mu)
    expected = 0.0
    for config in range(1 << n_edges):
        on = bin(config).count("1")
        weight = p**on * (1.0 - p) ** (n_edges - on)
        informed = _closure(config, 1, edges)
        if informed != everyone:
            expected += weight * hitting[index[config, informed]]
    return float(expected)


@dataclass(frozen=True)
class OracleReport:
    n_nodes: int
    lam: float
    mu: float
    p: float
    ctmc: float
    exact: float
    lower: float
    upper: float
    sparse: float
    dev_exact: float
    dev_lower: float
    dev_upper: float
    dev_sparse: float
    ctmc_position: str

    def as_row(self) -> dict:
        return asdict(self)


def oracle_report(n_nodes: int, lam: float, mu: float) -> OracleReport:
    """Compare the chain value with the analytic time, both bounds and F0.

    Deviations are relative to the chain value, ``(x - ctmc) / ctmc``.
    ``ctmc_position`` says where the chain value sits with respect to the
    analytic bounds.
    """
    ctmc = ctmc_exact_flooding(n_nodes, lam, mu)
    params = ModelParams.from_contact(n_nodes, lam, 1.0 / mu)
    exact = exact_flooding_time(params)[0]
    lower = lower_bound_flooding_time(params)
    upper = upper_bound_flooding_time(params)[0]
    sparse = sparse_flooding_time(params)
    if not lower <= exact <= upper:
        raise AssertionError(f"analytic ordering violated: {lower} <= {exact} <= {upper}")

    def dev(x: float) -> float:
        return (x - ctmc) / ctmc if ctmc != 0 else math.nan

    if ctmc < lower:
        position = "below_lower"
    elif ctmc > upper:
        position = "above_upper"
    else:
        position = "within_bounds"
    return OracleReport(
        n_nodes, float(lam), float(mu), params.p, ctmc, exact, lower, upper, sparse,
        dev(exact), dev(lower), dev(upper), dev(sparse), position,
    )
