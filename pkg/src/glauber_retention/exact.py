"""Exact expected hitting times on the full {+1,-1}^n configuration space.

States are n-bit integers with bit ``i`` set iff spin ``i`` is +1, so the
all-up start state is ``2**n - 1``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .core import ModelParams, Topology

__all__ = [
    "CapacityError",
    "SingularChainError",
    "ChainModel",
    "HittingTimeSolution",
    "MAX_CHAIN_N",
    "MAX_DENSE_N",
    "decode_state",
    "encode_state",
    "build_chain",
    "solve_hitting_times",
    "retention_time_exact",
]

MAX_CHAIN_N = 20
MAX_DENSE_N = 12


class CapacityError(ValueError):
    pass


class SingularChainError(ArithmeticError):
    """A transient state cannot reach the failure set."""

    def __init__(self, state: int, n: int):
        self.state = state
        spins = decode_state(state, n)
        super().__init__(f"state {state} {spins} has no path to a failed state")


def encode_state(spins) -> int:
    return sum(1 << i for i, a in enumerate(spins) if a == 1)


def decode_state(x: int, n: int) -> tuple[int, ...]:
    return tuple(1 if (x >> i) & 1 else -1 for i in range(n))


@dataclass(frozen=True)
class ChainModel:
    """Embedded jump chain of the Glauber dynamics.

    ``transition`` is CSR with the self-loop on the diagonal; ``escape`` holds
    each row's total off-diagonal mass, which is ``1 - P[x, x]`` without the
    cancellation of forming that difference.
    """

    n: int
    transition: sp.csr_matrix
    escape: np.ndarray
    absorbing_mask: np.ndarray

    @property
    def n_states(self) -> int:
        return 1 << self.n


@dataclass(frozen=True)
class HittingTimeSolution:
    n: int
    expected_events: np.ndarray

    def at(self, spins) -> float:
        return float(self.expected_events[encode_state(spins)])

    @property
    def from_all_up(self) -> float:
        return float(self.expected_events[(1 << self.n) - 1])


def _failed_mask(n: int, tie_is_failure: bool) -> np.ndarray:
    x = np.arange(1 << n, dtype=np.int64)
    ups = np.zeros_like(x)
    for i in range(n):
        ups += (x >> i) & 1
    m = 2 * ups - n
    return (m < 0) | ((m == 0) & tie_is_failure)


def build_chain(topology: Topology, params: ModelParams) -> ChainModel:
    n = topology.n
    if n > MAX_CHAIN_N:
        raise CapacityError(f"n={n} exceeds chain-construction cap {MAX_CHAIN_N}")
    n_states = 1 << n
    x = np.arange(n_states, dtype=np.int64)
    spins = np.stack([np.where((x >> i) & 1, 1.0, -1.0) for i in range(n)], axis=1)
    fields = np.array(topology.fields)
    coupling = np.zeros((n, n))
    for i, j, s in topology.edges:
        coupling[i, j] = coupling[j, i] = s
    deltas = fields[None, :] + spins @ coupling  # local field of every node in every state

    # probability of actually flipping node i: logistic(-2 beta delta A_i),
    # same branch-free overflow guard as core.heat_bath_up_probability
    arg = -2.0 * params.beta * deltas * spins
    z = np.exp(-np.abs(arg))
    flip = np.where(arg >= 0, 1.0 / (1.0 + z), z / (1.0 + z)) / n

    # each row holds its n flip targets followed by the self-loop
    cols = np.concatenate([x[:, None] ^ (1 << np.arange(n, dtype=np.int64))[None, :], x[:, None]], axis=1)
    escape = flip.sum(axis=1)
    vals = np.concatenate([flip, (1.0 - escape)[:, None]], axis=1)
    indptr = np.arange(0, (n + 1) * n_states + 1, n + 1, dtype=np.int64)
    P = sp.csr_matrix((vals.ravel(), cols.ravel(), indptr), shape=(n_states, n_states))
    P.eliminate_zeros()
    return ChainModel(n, P, escape, _failed_mask(n, params.tie_is_failure))


def _check_reachability(chain: ChainModel) -> None:
    # level-synchronous reverse BFS from the absorbing set: x joins the
    # frontier once it has a nonzero transition into an already reached state
    P = chain.transition
    reached = chain.absorbing_mask.astype(np.float64)
    count = reached.sum()
    while True:
        reached = np.maximum(reached, (P @ reached > 0).astype(np.float64))
        new_count = reached.sum()
        if new_count == count:
            break
        count = new_count
    stuck = np.flatnonzero(reached == 0)
    if stuck.size:
        raise SingularChainError(int(stuck[0]), chain.n)


def solve_hitting_times(chain: ChainModel) -> HittingTimeSolution:
    """Expected events to absorption from every state: ``(I - Q) t = 1``."""
    if chain.n > MAX_DENSE_N:
        raise CapacityError(f"n={chain.n} exceeds dense-solve cap {MAX_DENSE_N}")
    _check_reachability(chain)
    transient = np.flatnonzero(~chain.absorbing_mask)
    t = np.zeros(chain.n_states)
    if transient.size:
        pos = np.full(chain.n_states, -1)
        pos[transient] = np.arange(transient.size)
        P = chain.transition.tocoo()
        keep = (pos[P.row] >= 0) & (pos[P.col] >= 0) & (P.row != P.col)
        A = np.zeros((transient.size, transient.size))
        A[pos[P.row[keep]], pos[P.col[keep]]] = -P.data[keep]
        A[np.diag_indices_from(A)] = chain.escape[transient]
        lu = scipy.linalg.lu_factor(A, check_finite=True)
        t[transient] = scipy.linalg.lu_solve(lu, np.ones(transient.size))
    return HittingTimeSolution(chain.n, t)


def retention_time_exact(topology: Topology, params: ModelParams) -> float:
    return solve_hitting_times(build_chain(topology, params)).from_all_up
