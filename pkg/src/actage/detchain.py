"""Exact occupancy chain for the pool under deterministic service times.

With fixed service times, departures are not memoryless, so the chain state
must carry the remaining slots of every active task. Each class keeps an
execution pipeline: a bit vector whose k-th position marks an instance with
exactly k+1 slots of work left. One slot of progress is a right shift; a
newly admitted task enters at the top position. States are packed into one
machine word per class, which keeps breadth-first enumeration hash-cheap;
the warning sign is the state count, which grows like 2^(D1+D2) until the
capacity constraint bites.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from math import comb

import numpy as np
from scipy.sparse import csr_matrix, eye as sparse_eye
from scipy.sparse.linalg import splu

from .channel import effective_arrivals
from .config import SystemConfig
from .errors import NumericalError, ResourceLimitError
from .statespace import SteadyState, availability, write_states, write_triplets

__all__ = [
    "DetState",
    "StateSpace",
    "count_states",
    "enumerate_states",
    "admission_kernel",
    "next_state",
    "transition_matrix",
    "solve_steady_state",
    "availability_prob",
]

DEFAULT_STATE_CAP = 5_000_000


@dataclass(frozen=True)
class DetState:
    """Execution pipelines of both classes, packed least-significant-first.

    Bit j of pipe_i corresponds to an instance with j+1 slots remaining.
    """

    pipe1: int
    pipe2: int

    def counts(self) -> tuple[int, int]:
        return self.pipe1.bit_count(), self.pipe2.bit_count()

    def bits(self, depth1: int, depth2: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
        """Expand to explicit 0/1 vectors (position k = k+1 slots remaining)."""
        v1 = tuple((self.pipe1 >> k) & 1 for k in range(depth1))
        v2 = tuple((self.pipe2 >> k) & 1 for k in range(depth2))
        return v1, v2

    @staticmethod
    def from_bits(v1, v2) -> "DetState":
        p1 = sum(b << k for k, b in enumerate(v1))
        p2 = sum(b << k for k, b in enumerate(v2))
        return DetState(p1, p2)


def count_states(d1: int, d2: int, capacity: int, task2_units: int) -> int:
    """Closed-form size of the feasible pipeline state space.

    Sums binomial(d1, n1) * binomial(d2, n2) over all occupancies with
    n1 + N*n2 <= C.
    """
    total = 0
    for n2 in range(min(d2, capacity // task2_units) + 1):
        for n1 in range(min(d1, capacity - task2_units * n2) + 1):
            total += comb(d1, n1) * comb(d2, n2)
    return total


def _shift(pipe: int, admit: int, depth: int) -> int:
    return (pipe >> 1) | (admit << (depth - 1))


def next_state(state: DetState, a1: int, a2: int, d1: int, d2: int) -> DetState:
    """One slot of progress: shift both pipelines, enter admissions on top.

    The instance at position 1 (bit 0) completes and leaves in the same
    transition.
    """
    return DetState(_shift(state.pipe1, a1, d1), _shift(state.pipe2, a2, d2))


def admission_kernel(
    state: DetState, a1: float, a2: float, capacity: int, task2_units: int
) -> dict[tuple[int, int], float]:
    """Distribution over admission outcomes {(0,0), (1,0), (0,1)}.

    The capacity indicators are evaluated on the current (pre-departure)
    occupancy: a task that would free units in the same slot does not make
    room for the arrival.
    """
    n1, n2 = state.counts()
    used = n1 + task2_units * n2
    p10 = a1 if used + 1 <= capacity else 0.0
    p01 = a2 if used + task2_units <= capacity else 0.0
    return {(1, 0): p10, (0, 1): p01, (0, 0): 1.0 - p10 - p01}


@dataclass(frozen=True, eq=False)
class StateSpace:
    """Reachable pipeline states in breadth-first order from the empty state."""

    states: list          # list[(pipe1, pipe2)]
    index: dict           # (pipe1, pipe2) -> ordinal
    depth1: int
    depth2: int
    capacity: int
    task2_units: int

    def __len__(self) -> int:
        return len(self.states)

    def occupancy(self) -> np.ndarray:
        occ = np.empty((len(self.states), 2), dtype=np.int64)
        for k, (p1, p2) in enumerate(self.states):
            occ[k, 0] = p1.bit_count()
            occ[k, 1] = p2.bit_count()
        return occ


def enumerate_states(
    a1: float,
    a2: float,
    d1: int,
    d2: int,
    capacity: int,
    task2_units: int,
    max_states: int = DEFAULT_STATE_CAP,
) -> StateSpace:
    """Breadth-first traversal of the chain from the empty state.

    Only transitions with positive probability are followed, so classes
    with zero arrival probability never populate their pipeline. Raises
    ResourceLimitError when the reachable set exceeds max_states; the
    memoryless-service model is the intended fallback at that scale.
    """
    start = (0, 0)
    index = {start: 0}
    states = [start]
    queue = deque([start])
    while queue:
        p1, p2 = queue.popleft()
        used = p1.bit_count() + task2_units * p2.bit_count()
        p10 = a1 if used + 1 <= capacity else 0.0
        p01 = a2 if used + task2_units <= capacity else 0.0
        for b1, b2, prob in ((1, 0, p10), (0, 1, p01), (0, 0, 1.0 - p10 - p01)):
            if prob <= 0.0:
                continue
            succ = (_shift(p1, b1, d1), _shift(p2, b2, d2))
            if succ not in index:
                if len(states) >= max_states:
                    raise ResourceLimitError(
                        f"state space exceeds cap of {max_states} states "
                        f"(d1={d1}, d2={d2}, C={capacity}); use the "
                        "memoryless-service model instead"
                    )
                index[succ] = len(states)
                states.append(succ)
                queue.append(succ)
    return StateSpace(states, index, d1, d2, capacity, task2_units)


def transition_matrix(space: StateSpace, a1: float, a2: float) -> csr_matrix:
    """Sparse row-stochastic transition matrix over the enumerated states."""
    d1, d2 = space.depth1, space.depth2
    cap, n_units = space.capacity, space.task2_units
    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []
    for i, (p1, p2) in enumerate(space.states):
        used = p1.bit_count() + n_units * p2.bit_count()
        p10 = a1 if used + 1 <= cap else 0.0
        p01 = a2 if used + n_units <= cap else 0.0
        for b1, b2, prob in ((1, 0, p10), (0, 1, p01), (0, 0, 1.0 - p10 - p01)):
            if prob <= 0.0:
                continue
            succ = (_shift(p1, b1, d1), _shift(p2, b2, d2))
            rows.append(i)
            cols.append(space.index[succ])
            vals.append(prob)
    n = len(space)
    return csr_matrix((vals, (rows, cols)), shape=(n, n))


def _power_iteration(P: csr_matrix, tol: float = 1e-12, max_iter: int = 10 ** 6):
    n = P.shape[0]
    pi = np.full(n, 1.0 / n)
    PT = P.T.tocsr()
    for _ in range(max_iter):
        nxt = PT @ pi
        nxt /= nxt.sum()
        if np.max(np.abs(nxt - pi)) < tol:
            return nxt
        pi = nxt
    raise NumericalError(f"power iteration did not converge in {max_iter} iterations")


def stationary_distribution(P: csr_matrix, residual_tol: float = 1e-10) -> np.ndarray:
    """Solve pi (P - I) = 0 with sum(pi) = 1 for a row-stochastic sparse P.

    Sparse LU on the transposed balance system with one equation replaced
    by normalization; falls back to power iteration when the factorization
    fails or goes non-finite.
    """
    n = P.shape[0]
    if n == 1:
        return np.ones(1)
    A = (P.T - sparse_eye(n, format="csr")).tolil()
    A[n - 1, :] = 1.0
    b = np.zeros(n)
    b[n - 1] = 1.0
    pi = None
    try:
        pi = splu(A.tocsc()).solve(b)
    except (RuntimeError, ValueError):
        pi = None
    if pi is None or not np.all(np.isfinite(pi)) or pi.min() < -1e-9:
        pi = _power_iteration(P)
    pi = np.clip(pi, 0.0, None)
    pi /= pi.sum()
    residual = float(np.max(np.abs(pi @ P - pi)))
    if residual > residual_tol:
        raise NumericalError(
            f"stationary solve residual {residual:.3e} exceeds {residual_tol:.1e} "
            f"on a {n}-state chain"
        )
    return pi


def solve_steady_state(
    config: SystemConfig,
    pu_override: tuple[float, float] | None = None,
    max_states: int = DEFAULT_STATE_CAP,
    space: StateSpace | None = None,
) -> SteadyState:
    """Stationary distribution of the deterministic-service chain.

    Pass a pre-enumerated `space` to reuse the traversal across solves that
    share everything but the arrival probabilities.
    """
    a1, a2 = effective_arrivals(config, pu_override)
    if space is None:
        space = enumerate_states(
            a1,
            a2,
            config.task1.service_slots,
            config.task2.service_slots,
            config.compute.capacity,
            config.task2.units_required,
            max_states=max_states,
        )
    P = transition_matrix(space, a1, a2)
    probs = stationary_distribution(P)
    return SteadyState(
        probs=probs,
        occupancy=space.occupancy(),
        capacity=space.capacity,
        task2_units=space.task2_units,
        engine="det",
        labels=tuple(space.states),
    )


def availability_prob(steady: SteadyState, units_needed: int) -> float:
    """Probability an arrival of the given unit demand is not blocked."""
    return availability(steady, units_needed)


def dump_chain(space: StateSpace, a1: float, a2: float, states_path, matrix_path) -> None:
    """Write the enumerated states and the sparse transition matrix as text."""
    occ = space.occupancy()
    steady_like = SteadyState(
        probs=np.zeros(len(space)),
        occupancy=occ,
        capacity=space.capacity,
        task2_units=space.task2_units,
        labels=tuple(space.states),
    )
    write_states(states_path, steady_like)
    P = transition_matrix(space, a1, a2).tocoo()
    write_triplets(matrix_path, P.row, P.col, P.data, P.shape)
