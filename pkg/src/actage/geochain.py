"""Memoryless-service occupancy chain and its matrix-geometric solver.

Approximating the fixed service times by per-slot completion probabilities
mu_i = 1/service_slots collapses the state to the occupancy pair (n1, n2),
at most one arrival and a binomial batch of departures per slot. Two
solvers are provided: a direct dense balance solve, and a level-partitioned
matrix-geometric recursion that exploits the block lower Hessenberg
structure induced by single arrivals. The recursion is vectorized over a
batch of arrival-probability pairs so parameter sweeps amortize the level
bookkeeping.
"""

from __future__ import annotations

from math import comb

import numpy as np

from .channel import effective_arrivals
from .config import SystemConfig
from .errors import NumericalError
from .statespace import SteadyState, availability, write_states, write_triplets

__all__ = [
    "count_states_geo",
    "states_geo",
    "level_sizes",
    "binomial_departure",
    "transition_prob",
    "transition_matrix_geo",
    "solve_direct",
    "solve_matrix_geometric",
    "mg_steady_batch",
    "availability_prob_geo",
    "service_rates",
]


def count_states_geo(capacity: int, task2_units: int) -> int:
    """Closed-form count of occupancy pairs with n1 + N*n2 <= C."""
    c, n = capacity, task2_units
    full_levels = c // n
    return ((c + 1) + (c + 1 - n * full_levels)) * (full_levels + 1) // 2


def level_sizes(capacity: int, task2_units: int) -> list[int]:
    """Number of feasible n2 values for each task-1 occupancy level."""
    return [(capacity - n1) // task2_units + 1 for n1 in range(capacity + 1)]


def states_geo(capacity: int, task2_units: int) -> list[tuple[int, int]]:
    """All occupancy pairs, ordered by level (n1) then n2."""
    return [
        (n1, n2)
        for n1 in range(capacity + 1)
        for n2 in range((capacity - n1) // task2_units + 1)
    ]


def service_rates(config: SystemConfig) -> tuple[float, float]:
    """Per-slot completion probabilities matching the deterministic means."""
    return 1.0 / config.task1.service_slots, 1.0 / config.task2.service_slots


def binomial_departure(n: int, mu: float, kappa: int) -> float:
    """Probability that kappa of n active tasks remain after one slot.

    Each task completes independently with probability mu, so the remainder
    count is binomial with survival probability 1 - mu.
    """
    if kappa < 0 or kappa > n:
        return 0.0
    return comb(n, kappa) * (1.0 - mu) ** kappa * mu ** (n - kappa)


def transition_prob(
    src: tuple[int, int],
    dst: tuple[int, int],
    a1: float,
    a2: float,
    mu1: float,
    mu2: float,
    capacity: int,
    task2_units: int,
) -> float:
    """One-slot transition probability between occupancy pairs.

    Sums over the three admission outcomes, with capacity indicators taken
    on the pre-departure occupancy, times independent binomial remainders.
    """
    n1, n2 = src
    nu, phi = dst
    used = n1 + task2_units * n2
    p10 = a1 if used + 1 <= capacity else 0.0
    p01 = a2 if used + task2_units <= capacity else 0.0
    p00 = 1.0 - p10 - p01
    total = p00 * binomial_departure(n1, mu1, nu) * binomial_departure(n2, mu2, phi)
    if p10 > 0.0:
        total += p10 * binomial_departure(n1, mu1, nu - 1) * binomial_departure(n2, mu2, phi)
    if p01 > 0.0:
        total += p01 * binomial_departure(n1, mu1, nu) * binomial_departure(n2, mu2, phi - 1)
    return total


def transition_matrix_geo(
    a1: float, a2: float, mu1: float, mu2: float, capacity: int, task2_units: int
) -> np.ndarray:
    """Dense row-stochastic matrix built entrywise from transition_prob."""
    states = states_geo(capacity, task2_units)
    n = len(states)
    P = np.zeros((n, n))
    for i, src in enumerate(states):
        for j, dst in enumerate(states):
            P[i, j] = transition_prob(src, dst, a1, a2, mu1, mu2, capacity, task2_units)
    return P


def _steady_from_probs(probs, capacity, task2_units, engine) -> SteadyState:
    occ = np.array(states_geo(capacity, task2_units), dtype=np.int64)
    return SteadyState(
        probs=np.asarray(probs, dtype=float),
        occupancy=occ,
        capacity=capacity,
        task2_units=task2_units,
        engine=engine,
        labels=tuple(map(tuple, occ.tolist())),
    )


def solve_direct(
    config: SystemConfig,
    pu_override: tuple[float, float] | None = None,
    residual_tol: float = 1e-12,
) -> SteadyState:
    """Stationary distribution via a dense balance solve (the reference path)."""
    a1, a2 = effective_arrivals(config, pu_override)
    mu1, mu2 = service_rates(config)
    c, n = config.compute.capacity, config.task2.units_required
    P = transition_matrix_geo(a1, a2, mu1, mu2, c, n)
    size = P.shape[0]
    A = P.T - np.eye(size)
    A[size - 1, :] = 1.0
    b = np.zeros(size)
    b[size - 1] = 1.0
    try:
        pi = np.linalg.solve(A, b)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"balance system is singular: {exc}") from exc
    residual = float(np.max(np.abs(pi @ P - pi)))
    if residual > residual_tol:
        raise NumericalError(
            f"direct solve residual {residual:.3e} exceeds {residual_tol:.1e}"
        )
    pi = np.clip(pi, 0.0, None)
    pi /= pi.sum()
    return _steady_from_probs(pi, c, n, "geo-direct")


# --- matrix-geometric solver ---------------------------------------------

def _level_block_polys(mu1, mu2, capacity, task2_units):
    """Transition blocks as affine functions of the arrival probabilities.

    Admission probabilities enter each entry linearly, so every level block
    decomposes as c0 + a1*c1 + a2*c2 with coefficient matrices that depend
    only on (mu1, mu2, C, N). Blocks exist for target levels k <= j + 1.
    """
    c, n_units = capacity, task2_units
    sizes = level_sizes(c, n_units)
    polys = {}
    for j in range(c + 1):
        for k in range(min(j + 1, c) + 1):
            rj, rk = sizes[j], sizes[k]
            c0 = np.zeros((rj, rk))
            c1 = np.zeros((rj, rk))
            c2 = np.zeros((rj, rk))
            b1_stay = binomial_departure(j, mu1, k)
            b1_up = binomial_departure(j, mu1, k - 1)
            for i in range(rj):
                n2 = i
                used = j + n_units * n2
                fits1 = used + 1 <= c
                fits2 = used + n_units <= c
                for i2 in range(rk):
                    phi = i2
                    b2_stay = binomial_departure(n2, mu2, phi)
                    base = b1_stay * b2_stay
                    c0[i, i2] = base
                    if fits1:
                        c1[i, i2] = b1_up * b2_stay - base
                    if fits2:
                        c2[i, i2] = b1_stay * binomial_departure(n2, mu2, phi - 1) - base
            polys[(j, k)] = (c0, c1, c2)
    return polys


def mg_steady_batch(
    a1, a2, mu1: float, mu2: float, capacity: int, task2_units: int
) -> np.ndarray:
    """Matrix-geometric stationary distributions for a batch of arrival pairs.

    Partitions states by task-1 occupancy level. The generator Q = P - I is
    block lower Hessenberg, so rate matrices R_k propagate each level from
    the one below while censored-level matrices fold every excursion
    through higher levels into local transitions. Returns an array of shape
    (K, S) aligned with states_geo ordering; scalars broadcast to K = 1.

    Raises NumericalError naming the level whose censored matrix is
    singular.
    """
    a1 = np.atleast_1d(np.asarray(a1, dtype=float))
    a2 = np.atleast_1d(np.asarray(a2, dtype=float))
    a1, a2 = np.broadcast_arrays(a1, a2)
    batch = a1.shape[0]
    c, n_units = capacity, task2_units
    sizes = level_sizes(c, n_units)
    polys = _level_block_polys(mu1, mu2, c, n_units)
    A1 = a1[:, None, None]
    A2 = a2[:, None, None]
    eye_cache = {r: np.eye(r) for r in set(sizes)}

    def block(j, k):
        c0, c1, c2 = polys[(j, k)]
        q = c0 + A1 * c1 + A2 * c2
        if j == k:
            q = q - eye_cache[sizes[k]]
        return q

    def solve_right(mat, rhs, what):
        # X @ mat = rhs  ->  mat.T X.T = rhs.T
        try:
            xt = np.linalg.solve(np.swapaxes(mat, 1, 2), np.swapaxes(rhs, 1, 2))
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"censored matrix at {what} is singular") from exc
        return np.swapaxes(xt, 1, 2)

    rate = [None] * (c + 1)       # rate[k]: (K, r_{k-1}, r_k)
    censored = block(c, c)
    for k in range(c, 0, -1):
        rate[k] = -solve_right(censored, block(k - 1, k), f"level {k}")
        # censored matrix for level k-1: local block plus folded excursions
        acc = block(k - 1, k - 1)
        prod = None
        for n1 in range(k, c + 1):
            prod = rate[k] if n1 == k else prod @ rate[n1]
            acc = acc + prod @ block(n1, k - 1)
        censored = acc

    # boundary level: S0 @ censored0 = 0 plus global normalization
    r0 = sizes[0]
    weight = np.broadcast_to(np.ones(r0), (batch, r0)).copy()
    prod = None
    for n1 in range(1, c + 1):
        prod = rate[1] if n1 == 1 else prod @ rate[n1]
        weight = weight + prod @ np.ones(sizes[n1])
    bound = censored.copy()
    bound[:, :, r0 - 1] = weight
    rhs = np.zeros((batch, r0, 1))
    rhs[:, r0 - 1, 0] = 1.0
    try:
        s_level = np.linalg.solve(np.swapaxes(bound, 1, 2), rhs)[:, :, 0]
    except np.linalg.LinAlgError as exc:
        raise NumericalError("boundary system is singular") from exc

    pieces = [s_level]
    for k in range(1, c + 1):
        s_level = (s_level[:, None, :] @ rate[k])[:, 0, :]
        pieces.append(s_level)
    full = np.concatenate(pieces, axis=1)
    if not np.all(np.isfinite(full)):
        raise NumericalError("matrix-geometric solve produced non-finite mass")
    if full.min() < -1e-9:
        raise NumericalError(
            f"matrix-geometric solve produced negative mass {full.min():.3e}"
        )
    full = np.clip(full, 0.0, None)
    full /= full.sum(axis=1, keepdims=True)
    return full


def solve_matrix_geometric(
    config: SystemConfig, pu_override: tuple[float, float] | None = None
) -> SteadyState:
    """Stationary distribution via the level recursion (the fast path)."""
    a1, a2 = effective_arrivals(config, pu_override)
    mu1, mu2 = service_rates(config)
    c, n = config.compute.capacity, config.task2.units_required
    probs = mg_steady_batch(a1, a2, mu1, mu2, c, n)[0]
    return _steady_from_probs(probs, c, n, "geo-mg")


def availability_prob_geo(steady: SteadyState, units_needed: int) -> float:
    """Probability an arrival of the given unit demand is not blocked."""
    return availability(steady, units_needed)


def dump_chain(config: SystemConfig, states_path, matrix_path,
               pu_override: tuple[float, float] | None = None) -> None:
    """Write the occupancy states and dense transition matrix as text."""
    a1, a2 = effective_arrivals(config, pu_override)
    mu1, mu2 = service_rates(config)
    c, n = config.compute.capacity, config.task2.units_required
    steady_like = _steady_from_probs(
        np.zeros(count_states_geo(c, n)), c, n, "geo")
    write_states(states_path, steady_like)
    P = transition_matrix_geo(a1, a2, mu1, mu2, c, n)
    rows, cols = np.nonzero(P)
    write_triplets(matrix_path, rows, cols, P[rows, cols], P.shape)
