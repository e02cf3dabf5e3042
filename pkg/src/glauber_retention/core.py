"""Topologies, spin configurations and the Glauber heat-bath kernel.

A configuration of ``n`` dipoles is a tuple of ``+1``/``-1`` spins. Its energy
is ``-sum_i H_i A_i - sum_{(i,j) in E} s_ij A_i A_j`` and the local field felt
by dipole ``i`` is ``H_i + sum_j s_ij A_j``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "TopologyError",
    "Topology",
    "ModelParams",
    "energy",
    "local_field",
    "heat_bath_up_probability",
    "magnetization",
    "is_failed",
    "all_up",
    "uncoupled",
    "triangle",
    "linear_chain",
    "parse_topology",
    "load_topology",
]


class TopologyError(ValueError):
    """Invalid topology, state, or topology-file content."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class Topology:
    """Undirected coupling graph with per-node external fields.

    ``edges`` holds ``(i, j, s)`` triples normalized to ``i < j``.
    """

    n: int
    edges: tuple[tuple[int, int, float], ...] = ()
    fields: tuple[float, ...] = ()

    def __post_init__(self):
        if self.n < 1:
            raise TopologyError(f"n must be positive, got {self.n}")
        fields = tuple(float(h) for h in self.fields) if self.fields else (0.0,) * self.n
        if len(fields) != self.n:
            raise TopologyError(f"expected {self.n} fields, got {len(fields)}")
        seen = set()
        edges = []
        for i, j, s in self.edges:
            i, j = int(i), int(j)
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise TopologyError(f"edge ({i}, {j}) out of range for n={self.n}")
            if i == j:
                raise TopologyError(f"self-loop at node {i}")
            if i > j:
                i, j = j, i
            if (i, j) in seen:
                raise TopologyError(f"duplicate edge ({i}, {j})")
            seen.add((i, j))
            edges.append((i, j, float(s)))
        object.__setattr__(self, "fields", fields)
        object.__setattr__(self, "edges", tuple(edges))

    @property
    def uniform_field(self) -> bool:
        return all(h == self.fields[0] for h in self.fields)

    def neighbors(self, i: int) -> list[tuple[int, float]]:
        out = []
        for a, b, s in self.edges:
            if a == i:
                out.append((b, s))
            elif b == i:
                out.append((a, s))
        return out

    def scaled(self, beta: float) -> "Topology":
        """Multiply every coupling and field by ``beta``."""
        return Topology(
            self.n,
            tuple((i, j, beta * s) for i, j, s in self.edges),
            tuple(beta * h for h in self.fields),
        )

    def with_field(self, h: float) -> "Topology":
        return Topology(self.n, self.edges, (float(h),) * self.n)

    def with_coupling(self, s: float) -> "Topology":
        """Set every edge to coupling ``s``."""
        return Topology(self.n, tuple((i, j, float(s)) for i, j, _ in self.edges), self.fields)

    def csr(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Symmetric adjacency as ``(indptr, indices, weights)`` arrays."""
        nbrs = [self.neighbors(i) for i in range(self.n)]
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        indptr[1:] = np.cumsum([len(x) for x in nbrs])
        indices = np.array([j for x in nbrs for j, _ in x], dtype=np.int64)
        weights = np.array([s for x in nbrs for _, s in x], dtype=np.float64)
        return indptr, indices, weights


@dataclass(frozen=True)
class ModelParams:
    beta: float = 1.0
    lambda0: float = 1.0
    tie_is_failure: bool = True

    def __post_init__(self):
        if not self.beta >= 0:
            raise ValueError(f"beta must be >= 0, got {self.beta}")
        if not self.lambda0 > 0:
            raise ValueError(f"lambda0 must be > 0, got {self.lambda0}")


def _check_state(topology: Topology, state: Sequence[int]) -> None:
    if len(state) != topology.n:
        raise TopologyError(f"state has {len(state)} spins, topology has {topology.n}")


def energy(topology: Topology, state: Sequence[int]) -> float:
    _check_state(topology, state)
    e = -sum(h * a for h, a in zip(topology.fields, state))
    e -= sum(s * state[i] * state[j] for i, j, s in topology.edges)
    return e


def local_field(topology: Topology, state: Sequence[int], i: int) -> float:
    _check_state(topology, state)
    if not 0 <= i < topology.n:
        raise IndexError(f"node {i} out of range for n={topology.n}")
    return topology.fields[i] + sum(s * state[j] for j, s in topology.neighbors(i))


def heat_bath_up_probability(delta: float, beta: float) -> float:
    """Probability that an excited dipole with local field ``delta`` ends at +1.

    Equals ``exp(b d) / (exp(b d) + exp(-b d))``, i.e. ``logistic(2 b d)``,
    evaluated so that only non-positive exponents are taken.
    """
    x = 2.0 * beta * delta
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    z = math.exp(x)
    return z / (1.0 + z)


def magnetization(state: Iterable[int]) -> int:
    return int(sum(state))


def is_failed(state: Iterable[int], params: ModelParams) -> bool:
    m = magnetization(state)
    return m < 0 or (m == 0 and params.tie_is_failure)


def all_up(n: int) -> tuple[int, ...]:
    return (1,) * n


# Canonical graphs. Node 1 is the middle of the linear chain.

def uncoupled(n: int = 3, h: float = 0.0) -> Topology:
    return Topology(n, (), (h,) * n)


def triangle(s: float = 1.0, h: float = 0.0) -> Topology:
    return Topology(3, ((0, 1, s), (0, 2, s), (1, 2, s)), (h,) * 3)


def linear_chain(s: float = 1.0, h: float = 0.0) -> Topology:
    return Topology(3, ((0, 1, s), (1, 2, s)), (h,) * 3)


def parse_topology(text: str) -> Topology:
    """Parse the line-oriented topology format.

    ::

        n 3
        h 0.5          # uniform field
        h 2 -1.0       # field on node 2 only
        edge 0 1 1.0
    """
    n = None
    uniform = None
    per_node: dict[int, float] = {}
    edges = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, *args = line.split()
        try:
            if key == "n":
                if len(args) != 1:
                    raise TopologyError("expected 'n <int>'", lineno)
                if n is not None:
                    raise TopologyError("'n' given twice", lineno)
                n = int(args[0])
            elif key == "h":
                if len(args) == 1:
                    uniform = float(args[0])
                elif len(args) == 2:
                    per_node[int(args[0])] = float(args[1])
                else:
                    raise TopologyError("expected 'h <float>' or 'h <node> <float>'", lineno)
            elif key == "edge":
                if len(args) != 3:
                    raise TopologyError("expected 'edge <i> <j> <s>'", lineno)
                edges.append((int(args[0]), int(args[1]), float(args[2]), lineno))
            else:
                raise TopologyError(f"unknown key {key!r}", lineno)
        except ValueError as exc:
            if isinstance(exc, TopologyError):
                raise
            raise TopologyError(f"bad number in {raw.strip()!r}", lineno) from None
    if n is None:
        raise TopologyError("missing 'n' line")
    if n < 1:
        raise TopologyError(f"n must be positive, got {n}")
    fields = [uniform if uniform is not None else 0.0] * n
    for node, h in per_node.items():
        if not 0 <= node < n:
            raise TopologyError(f"field node {node} out of range for n={n}")
        fields[node] = h
    seen = set()
    for i, j, _, lineno in edges:
        key = (min(i, j), max(i, j))
        if key in seen:
            raise TopologyError(f"duplicate edge ({i}, {j})", lineno)
        seen.add(key)
        if not (0 <= i < n and 0 <= j < n) or i == j:
            raise TopologyError(f"invalid edge ({i}, {j}) for n={n}", lineno)
    return Topology(n, tuple(e[:3] for e in edges), tuple(fields))


def load_topology(path) -> Topology:
    with open(path, encoding="utf-8") as fh:
        return parse_topology(fh.read())
