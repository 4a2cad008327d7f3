"""Shared test oracles: brute-force enumerations kept independent of the
implementations they check."""

import numpy as np
import pytest

from actage.config import default_config


@pytest.fixture
def base_config():
    return default_config()


def brute_force_det_count(d1, d2, capacity, task2_units):
    """Count feasible pipeline pairs by enumerating every bit vector."""
    pop1 = np.array([bin(m).count("1") for m in range(1 << d1)])
    pop2 = np.array([bin(m).count("1") for m in range(1 << d2)])
    used = pop1[:, None] + task2_units * pop2[None, :]
    return int((used <= capacity).sum())


def brute_force_det_reachable(a1_pos, a2_pos, d1, d2, capacity, task2_units):
    """Reachable pipeline states via an independent tuple-based traversal.

    States are explicit 0/1 tuples (position k holds the instance with k+1
    slots remaining); the shift is re-derived here rather than reusing the
    packed-word implementation.
    """
    def shift(vec, admit):
        return vec[1:] + (admit,)

    start = ((0,) * d1, (0,) * d2)
    seen = {start}
    frontier = [start]
    while frontier:
        v1, v2 = frontier.pop()
        used = sum(v1) + task2_units * sum(v2)
        moves = [(0, 0)]
        if a1_pos and used + 1 <= capacity:
            moves.append((1, 0))
        if a2_pos and used + task2_units <= capacity:
            moves.append((0, 1))
        for b1, b2 in moves:
            succ = (shift(v1, b1), shift(v2, b2))
            if succ not in seen:
                seen.add(succ)
                frontier.append(succ)
    return seen


def brute_force_geo_states(capacity, task2_units):
    return [
        (n1, n2)
        for n1 in range(capacity + 1)
        for n2 in range(capacity + 1)
        if n1 + task2_units * n2 <= capacity
    ]
