"""Monte Carlo first-passage simulation of the Glauber jump chain.

Each event excites one dipole chosen uniformly and resamples its spin from the
heat-bath conditional. Every event has the same exponential holding rate
``n * lambda0``, so wall-clock time is recovered as ``events / (n * lambda0)``
and holding times are never sampled.

Random numbers come from SplitMix64 (Steele, Lea & Flood 2014). Sample ``k``
of a run with master seed ``seed`` uses the stream whose initial state is
``sample_seed(seed, k)``; per event the stream yields two doubles, first the
node choice and then the spin draw, each as ``(x >> 11) * 2**-53``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numba import njit

from .core import ModelParams, Topology, heat_bath_up_probability, local_field

__all__ = [
    "DEFAULT_MAX_EVENTS",
    "AllCensoredError",
    "SimulationConfig",
    "RetentionEstimate",
    "SplitMix64",
    "sample_seed",
    "step",
    "first_passage_events",
    "sample_first_passage",
    "summarize",
    "estimate_retention",
]

DEFAULT_MAX_EVENTS = 10**9

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB


def _mix64(z: int) -> int:
    z = ((z ^ (z >> 30)) * _M1) & _MASK
    z = ((z ^ (z >> 27)) * _M2) & _MASK
    return z ^ (z >> 31)


def sample_seed(seed: int, k: int) -> int:
    """Initial stream state for sample ``k`` of master seed ``seed``."""
    return _mix64((_mix64(seed & _MASK) + (k + 1) * _GOLDEN) & _MASK)


class SplitMix64:
    """Pure-Python twin of the stream used inside the compiled kernel."""

    def __init__(self, state: int):
        self.state = state & _MASK

    def next_u64(self) -> int:
        self.state = (self.state + _GOLDEN) & _MASK
        return _mix64(self.state)

    def random(self) -> float:
        return (self.next_u64() >> 11) * 2.0**-53


class AllCensoredError(RuntimeError):
    def __init__(self, n_censored: int):
        self.n_censored = n_censored
        super().__init__(f"no estimate: all {n_censored} trajectories hit max_events")


@dataclass(frozen=True)
class SimulationConfig:
    seed: int = 0
    n_samples: int = 10_000
    max_events: int = DEFAULT_MAX_EVENTS

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        if self.max_events < 1:
            raise ValueError("max_events must be >= 1")


@dataclass(frozen=True)
class RetentionEstimate:
    mean_events: float
    std_error: float
    n_samples: int
    n_censored: int
    mean_time: float

    @property
    def n_used(self) -> int:
        return self.n_samples - self.n_censored


def step(topology: Topology, state, params: ModelParams, rng):
    """Excite one uniformly chosen dipole and heat-bath resample it.

    ``rng`` needs a ``random()`` method returning a double in [0, 1), e.g. a
    :class:`numpy.random.Generator` or :class:`SplitMix64`. Returns the new
    state tuple and the excited node.
    """
    n = topology.n
    i = min(int(rng.random() * n), n - 1)
    p_up = heat_bath_up_probability(local_field(topology, state, i), params.beta)
    new = list(state)
    new[i] = 1 if rng.random() < p_up else -1
    return tuple(new), i


# --- compiled kernel -------------------------------------------------------

_U_GOLDEN = np.uint64(_GOLDEN)
_U_M1 = np.uint64(_M1)
_U_M2 = np.uint64(_M2)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV53 = 2.0**-53


@njit(cache=True, nogil=True)
def _mix64_u(z):
    z = (z ^ (z >> _S30)) * _U_M1
    z = (z ^ (z >> _S27)) * _U_M2
    return z ^ (z >> _S31)


@njit(cache=True, nogil=True)
def _trajectory(state0, n, indptr, indices, weights, fields, beta, tie_is_failure, max_events, spins):
    """Events until failure from all-up, or -1 if ``max_events`` is reached."""
    for i in range(n):
        spins[i] = 1
    m = n
    s = state0
    for event in range(1, max_events + 1):
        s = s + _U_GOLDEN
        u = float(_mix64_u(s) >> _S11) * _INV53
        i = int(u * n)
        if i >= n:
            i = n - 1
        delta = fields[i]
        for p in range(indptr[i], indptr[i + 1]):
            delta += weights[p] * spins[indices[p]]
        x = 2.0 * beta * delta
        if x >= 0.0:
            p_up = 1.0 / (1.0 + math.exp(-x))
        else:
            z = math.exp(x)
            p_up = z / (1.0 + z)
        s = s + _U_GOLDEN
        u = float(_mix64_u(s) >> _S11) * _INV53
        new = 1 if u < p_up else -1
        if new != spins[i]:
            spins[i] = new
            m += 2 * new
        if m < 0 or (m == 0 and tie_is_failure):
            return event
    return -1


@njit(cache=True, nogil=True)
def _run_batch(seeds, n, indptr, indices, weights, fields, beta, tie_is_failure, max_events, out):
    spins = np.empty(n, dtype=np.int8)
    for k in range(seeds.shape[0]):
        out[k] = _trajectory(
            seeds[k], n, indptr, indices, weights, fields, beta, tie_is_failure, max_events, spins
        )


def _kernel_args(topology: Topology, params: ModelParams):
    indptr, indices, weights = topology.csr()
    fields = np.asarray(topology.fields, dtype=np.float64)
    return topology.n, indptr, indices, weights, fields, float(params.beta), bool(params.tie_is_failure)


def first_passage_events(
    topology: Topology, params: ModelParams, seed: int, max_events: int = DEFAULT_MAX_EVENTS
) -> int | None:
    """Events from all-up until the first failed state, counting the failing
    event. ``seed`` is the raw SplitMix64 stream state. Returns ``None`` when
    censored at ``max_events``."""
    seeds = np.array([seed & _MASK], dtype=np.uint64)
    out = np.empty(1, dtype=np.int64)
    _run_batch(seeds, *_kernel_args(topology, params), int(max_events), out)
    return None if out[0] < 0 else int(out[0])


def sample_first_passage(
    topology: Topology, params: ModelParams, config: SimulationConfig, workers: int = 1
) -> np.ndarray:
    """Event counts of ``config.n_samples`` trajectories; -1 marks censoring.

    Entry ``k`` depends only on ``(topology, params, config.seed, k,
    config.max_events)``, so the result does not depend on ``workers``.
    """
    seeds = np.array(
        [sample_seed(config.seed, k) for k in range(config.n_samples)], dtype=np.uint64
    )
    out = np.empty(config.n_samples, dtype=np.int64)
    args = _kernel_args(topology, params)
    max_events = int(config.max_events)
    if workers <= 1:
        _run_batch(seeds, *args, max_events, out)
        return out
    bounds = np.linspace(0, config.n_samples, workers + 1).astype(int)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        jobs = [
            pool.submit(_run_batch, seeds[a:b], *args, max_events, out[a:b])
            for a, b in zip(bounds[:-1], bounds[1:])
            if b > a
        ]
        for job in jobs:
            job.result()
    return out


def summarize(counts: np.ndarray, n: int, lambda0: float) -> RetentionEstimate:
    ok = counts[counts >= 0]
    n_censored = int(counts.size - ok.size)
    if ok.size == 0:
        raise AllCensoredError(n_censored)
    # exact summation keeps the result independent of evaluation order
    mean = math.fsum(ok.tolist()) / ok.size
    if ok.size > 1:
        var = math.fsum(((ok - mean) ** 2).tolist()) / (ok.size - 1)
        se = math.sqrt(var / ok.size)
    else:
        se = math.inf
    return RetentionEstimate(
        mean_events=mean,
        std_error=se,
        n_samples=int(counts.size),
        n_censored=n_censored,
        mean_time=mean / (n * lambda0),
    )


def estimate_retention(
    topology: Topology, params: ModelParams, config: SimulationConfig, workers: int = 1
) -> RetentionEstimate:
    counts = sample_first_passage(topology, params, config, workers)
    return summarize(counts, topology.n, params.lambda0)
