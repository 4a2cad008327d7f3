"""Shared steady-state container and the text dump format.

Every queue engine produces a SteadyState: a probability vector indexed by
an enumerated state space together with the per-state occupancy counts
needed for availability queries.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["SteadyState", "availability", "write_states", "write_triplets"]


@dataclass(frozen=True, eq=False)
class SteadyState:
    """Stationary distribution over an enumerated state space.

    probs[k] is the probability of states[k]; occupancy[k] = (n1, n2) gives
    the active task counts of that state.
    """

    probs: np.ndarray            # (S,), nonnegative, sums to 1
    occupancy: np.ndarray        # (S, 2) int
    capacity: int
    task2_units: int
    engine: str = "unknown"
    labels: tuple = field(default=(), repr=False)  # optional raw state labels


def availability(steady: SteadyState, units_needed: int) -> float:
    """Probability that an arriving task finds units_needed free units.

    Sums steady-state mass over states with n1 + N*n2 + units_needed <= C.
    """
    occ = steady.occupancy
    used = occ[:, 0] + steady.task2_units * occ[:, 1]
    fits = used + units_needed <= steady.capacity
    return float(steady.probs @ fits)


def write_states(path, steady: SteadyState) -> None:
    """Dump the enumerated state space: `index n1 n2 [label...]` per line."""
    occ = steady.occupancy
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# states {len(occ)} capacity {steady.capacity} "
                 f"task2_units {steady.task2_units}\n")
        for k in range(len(occ)):
            label = ""
            if steady.labels:
                label = " " + " ".join(str(x) for x in steady.labels[k])
            fh.write(f"{k} {occ[k, 0]} {occ[k, 1]}{label}\n")


def write_triplets(path, rows, cols, vals, shape) -> None:
    """Dump a sparse matrix as `row col value` triplets (one per line)."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# matrix {shape[0]} {shape[1]} nnz {len(vals)}\n")
        for r, c, v in zip(rows, cols, vals):
            fh.write(f"{int(r)} {int(c)} {float(v)!r}\n")
