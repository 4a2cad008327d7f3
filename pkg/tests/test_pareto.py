import math
from dataclasses import replace

import numpy as np
import pytest

from actage import pareto
from actage.channel import uplink_success_prob
from actage.config import apply_overrides, default_config
from actage.engines import compute_report
from actage.pareto import (GridSpec, default_grid, dominates, evaluate_point,
                           front_indices_bruteforce, search)


def _front_from_columns(coma, aoa1, feasible=None):
    n = len(coma)
    columns = {
        "tx_power1": np.arange(n, dtype=float),
        "tx_power2": np.zeros(n),
        "admit1": np.ones(n),
        "admit2": np.ones(n),
        "feasible": np.ones(n, bool) if feasible is None else np.asarray(feasible),
        "coma": np.asarray(coma, float),
        "aoa1": np.asarray(aoa1, float),
    }
    return pareto._extract_front(columns, "geo-mg")


def test_single_point_front():
    front = _front_from_columns([0.5], [10.0])
    assert len(front) == 1
    assert front[0].coma == 0.5


def test_dominated_point_removed():
    front = _front_from_columns([0.5, 0.6], [10.0, 11.0])
    assert len(front) == 1
    assert front[0].aoa1 == 10.0


def test_incomparable_points_kept():
    front = _front_from_columns([0.6, 0.5], [10.0, 11.0])
    assert len(front) == 2
    assert [p.aoa1 for p in front] == [10.0, 11.0]
    assert [p.coma for p in front] == [0.6, 0.5]


def test_equal_objectives_keep_one():
    front = _front_from_columns([0.5, 0.5], [10.0, 10.0])
    assert len(front) == 1
    assert front[0].tx_power1 == 0.0  # lexicographically smallest decision


def test_infeasible_and_unbounded_excluded():
    front = _front_from_columns(
        [0.4, 0.5, 0.6], [9.0, math.inf, 10.0],
        feasible=[False, True, True])
    assert len(front) == 1
    assert front[0].coma == 0.6


@pytest.mark.parametrize("seed", [0, 1, 2, 3])
def test_front_matches_bruteforce_on_random_sets(seed):
    rng = np.random.default_rng(seed)
    n = 150
    coma = np.round(rng.uniform(0, 1, n), 2)   # rounding forces ties
    aoa1 = np.round(rng.uniform(5, 25, n), 1)
    fast = _front_from_columns(coma, aoa1)
    fast_set = {(p.coma, p.aoa1) for p in fast}
    brute = front_indices_bruteforce(coma, aoa1)
    brute_set = {(coma[i], aoa1[i]) for i in brute}
    assert fast_set == brute_set


def test_dominates_definition():
    assert dominates(0.5, 10.0, 0.6, 10.0)
    assert dominates(0.5, 9.0, 0.5, 10.0)
    assert not dominates(0.5, 10.0, 0.5, 10.0)
    assert not dominates(0.4, 11.0, 0.5, 10.0)


def test_scale_invariance_of_front_membership():
    rng = np.random.default_rng(9)
    coma = rng.uniform(0.1, 1, 120)
    aoa1 = rng.uniform(5, 25, 120)
    base = {(p.tx_power1) for p in _front_from_columns(coma, aoa1)}
    scaled = {(p.tx_power1) for p in _front_from_columns(coma * 37.5, aoa1)}
    assert base == scaled


def test_evaluate_point_bounds(base_config):
    with pytest.raises(ValueError):
        evaluate_point(base_config, 0.05, 0.2, 0.0, 1.0)
    with pytest.raises(ValueError):
        evaluate_point(base_config, -0.05, 0.2, 0.5, 1.0)


def test_evaluate_point_composition_oracle(base_config):
    point = evaluate_point(base_config, 0.03, 0.15, 0.6, 0.9, engine="geo-mg")
    manual = compute_report(
        replace(base_config,
                task1=replace(base_config.task1, tx_power=0.03, admit_prob=0.6),
                task2=replace(base_config.task2, tx_power=0.15, admit_prob=0.9)),
        "geo-mg")
    assert point.coma == pytest.approx(manual.coma, rel=1e-12)
    assert point.aoa1 == pytest.approx(manual.aoa[0], rel=1e-12)
    drawn = 0.4 * 0.6 * 0.03 + 0.1 * 0.9 * 0.15
    assert point.feasible == (drawn <= base_config.energy_rate)


def test_vanishing_gate_limits(base_config):
    # closing the class-1 gate starves its age; the miss cost approaches
    # the full class-1 penalty plus the class-2 losses of the chain it
    # leaves behind
    from actage.geochain import mg_steady_batch, states_geo

    point = evaluate_point(base_config, 0.05, 0.2, 1e-9, 0.8, engine="geo-mg")
    assert point.aoa1 > 1e8
    assert point.coma > 1.0 * 0.4  # class-1 misses alone already saturate

    pu2 = uplink_success_prob(base_config.channel, 0.2)
    a2 = 0.1 * 0.8 * pu2
    probs = mg_steady_batch(0.0, a2, 0.1, 0.1, 8, 4)[0]
    occ = np.array(states_geo(8, 4))
    fits2 = occ[:, 0] + 4 * occ[:, 1] + 4 <= 8
    avail2 = float(probs @ fits2)
    expected = 1.0 * 0.4 + 10.0 * 0.1 * (1 - 0.8 * pu2 * avail2)
    assert point.coma == pytest.approx(expected, rel=1e-6)


def test_feasibility_boundary_equality(base_config):
    # the flag flips exactly at the budget: set the budget to the draw
    p1, p2, eta = 0.45, 0.45, 0.8
    drawn = 0.4 * eta * p1 + 0.1 * eta * p2
    at_boundary = replace(base_config, energy_rate=drawn)
    assert evaluate_point(at_boundary, p1, p2, eta, eta).feasible
    below = replace(base_config, energy_rate=drawn * (1 - 1e-12))
    assert not evaluate_point(below, p1, p2, eta, eta).feasible


@pytest.mark.parametrize("engine", ["geo-mg", "erlang"])
def test_batched_search_matches_pointwise(base_config, engine):
    grid = GridSpec(power_levels=(0.01, 0.1, 0.5), eta_levels=(0.4, 1.0))
    result = search(base_config, grid, engine=engine)
    cols = result.columns
    assert len(cols["coma"]) == grid.n_points
    for k in range(grid.n_points):
        point = evaluate_point(
            base_config, cols["tx_power1"][k], cols["tx_power2"][k],
            cols["admit1"][k], cols["admit2"][k], engine=engine)
        assert cols["coma"][k] == pytest.approx(point.coma, rel=1e-9, abs=1e-12)
        assert cols["aoa1"][k] == pytest.approx(point.aoa1, rel=1e-9)
        assert bool(cols["feasible"][k]) == point.feasible


def test_front_points_not_dominated_by_any_grid_point(base_config):
    result = search(base_config, GridSpec(
        power_levels=tuple(np.geomspace(1e-3, 1, 8)),
        eta_levels=tuple(np.linspace(0.125, 1, 8))), engine="geo-mg")
    cols = result.columns
    eligible = cols["feasible"] & np.isfinite(cols["aoa1"])
    for p in result.front:
        dominated = (
            eligible
            & (cols["coma"] <= p.coma) & (cols["aoa1"] <= p.aoa1)
            & ((cols["coma"] < p.coma) | (cols["aoa1"] < p.aoa1))
        )
        assert not dominated.any()


def test_monotone_feasibility_in_budget(base_config):
    grid = GridSpec(power_levels=(0.01, 0.1, 0.5), eta_levels=(0.5, 1.0))
    masks = []
    for budget in (0.01, 0.05, 0.18, 1.0):
        cfg = replace(base_config, energy_rate=budget)
        masks.append(search(cfg, grid, engine="erlang").columns["feasible"])
    for lo, hi in zip(masks, masks[1:]):
        assert np.all(hi | ~lo)  # larger budget keeps every feasible point
        assert hi.sum() >= lo.sum()


def test_empty_feasible_set_not_fatal(base_config):
    cfg = replace(base_config, energy_rate=0.0)
    result = search(cfg, GridSpec((0.05,), (0.5, 1.0)), engine="geo-mg")
    assert result.front == ()
    assert result.baseline is None
    assert result.n_feasible == 0


def test_starved_class_unbounded_everywhere():
    cfg = apply_overrides(default_config(), {"task1.gen_prob": "0.0",
                                             "task2.gen_prob": "0.1"})
    result = search(cfg, GridSpec((0.05, 0.2), (1.0,)), engine="geo-mg")
    assert result.front == ()
    assert np.isinf(result.columns["aoa1"]).all()
    assert len(result.columns["coma"]) == 4


def test_baseline_is_diagonal_and_feasible(base_config):
    grid = GridSpec(power_levels=(0.01, 0.1, 0.3), eta_levels=(0.5, 1.0))
    result = search(base_config, grid, engine="geo-mg")
    b = result.baseline
    assert b is not None
    assert b.tx_power1 == b.tx_power2
    assert b.admit1 == b.admit2
    assert b.feasible
    # it is the min-coma diagonal point among feasible ones
    for p in grid.power_levels:
        for e in grid.eta_levels:
            drawn = (0.4 + 0.1) * e * p
            if drawn <= base_config.energy_rate:
                other = evaluate_point(base_config, p, p, e, e, "geo-mg")
                assert b.coma <= other.coma + 1e-12


def test_default_grid_shape():
    grid = default_grid()
    assert len(grid.power_levels) == 20
    assert len(grid.eta_levels) == 20
    assert grid.power_levels[0] == pytest.approx(1e-3)
    assert grid.power_levels[-1] == pytest.approx(1.0)
    assert grid.eta_levels[0] == pytest.approx(0.05)
    assert grid.eta_levels[-1] == 1.0
    assert grid.n_points == 160_000
