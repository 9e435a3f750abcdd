import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from plaqsym.lattice import BoundaryCondition, LatticeGeometry, assemble_parity_matrix, build_realization, named_region, parity_rows
from plaqsym.symmetry import (
    boundary_mutual_info,
    boundary_tableau,
    config_entropy,
    operator_size,
    snapshot_grid,
    solve_symmetry_group,
    sym_entropy,
    sym_mutual_info_cond,
    top_bottom_mutual_info,
)

SMALL = [
    ("rtpm", "torus", None, 4, 4),
    ("rtpm", "torus", None, 3, 5),
    ("rxpm", "torus", None, 4, 4),
    ("rxpm", "torus", None, 5, 3),
    ("rtpm", "cylinder", BoundaryCondition(), 4, 4),
    ("rtpm", "cylinder", BoundaryCondition("free", "fixed"), 5, 4),
    ("rxpm", "cylinder", BoundaryCondition(), 4, 5),
    ("rxpm", "cylinder", BoundaryCondition("free", "fixed"), 4, 4),
]


def realization(case, p, seed):
    model, topo, bc, L, lt = case
    return build_realization(LatticeGeometry(L, lt, topo, model), bc, p, seed)


def elements(t):
    return oracles.group_elements(oracles.row_ints(t.t.to_dense().T))


@pytest.mark.parametrize("case", SMALL)
@pytest.mark.parametrize("p", [0.0, 0.3, 0.7, 1.0])
def test_scf_counts_ground_states(case, p):
    r = realization(case, p, seed=int(p * 10) + case[3])
    t = solve_symmetry_group(assemble_parity_matrix(r))
    count = oracles.ground_state_count(parity_rows(r), r.geometry.n_sites)
    assert 2 ** config_entropy(t) == count


@given(st.sampled_from(SMALL), st.floats(0.3, 1.0), st.integers(0, 10**6), st.data())
@settings(max_examples=40, deadline=None)
def test_entropies_match_group_enumeration(case, p, seed, data):
    r = realization(case, p, seed)
    g = r.geometry
    t = solve_symmetry_group(assemble_parity_matrix(r))
    if t.total_rank > 14:
        return
    els = elements(t)
    sites = list(range(g.n_sites))
    a = data.draw(st.lists(st.sampled_from(sites), unique=True, max_size=g.n_sites - 1))
    assert sym_entropy(t, a) == oracles.sym_entropy(els, a, sites)
    rest = [s for s in sites if s not in a]
    b = data.draw(st.lists(st.sampled_from(rest), unique=True)) if rest else []
    assert sym_mutual_info_cond(t, a, b) == oracles.sym_mutual_info(els, a, b, sites)


@pytest.mark.parametrize("L", [4, 8, 16])
def test_newman_moore_ground_state_unique_for_power_of_two(L):
    # (1 + S)^L = 1 + S^L = 0 on a ring of L = 2^k sites, so only x = 0 is periodic
    r = build_realization(LatticeGeometry(L, L, "torus", "rtpm"), None, 1.0, 0)
    assert config_entropy(solve_symmetry_group(assemble_parity_matrix(r))) == 0


def test_newman_moore_three_by_three():
    r = build_realization(LatticeGeometry(3, 3, "torus", "rtpm"), None, 1.0, 0)
    t = solve_symmetry_group(assemble_parity_matrix(r))
    assert 2 ** config_entropy(t) == oracles.ground_state_count(parity_rows(r), 9) == 4


def test_all_single_site_terms_kill_every_symmetry():
    r = build_realization(LatticeGeometry(6, 6), None, 0.0, 0)
    assert config_entropy(solve_symmetry_group(assemble_parity_matrix(r))) == 0


@pytest.mark.parametrize("case", SMALL[:4])
def test_monotonicity_bounds(case):
    for seed in range(5):
        r = realization(case, 0.8, seed)
        g = r.geometry
        t = solve_symmetry_group(assemble_parity_matrix(r))
        a, b = named_region(g, "antipodal_pair", 1)
        s = sym_entropy(t, a)
        assert 0 <= s <= 2 * min(len(a), g.n_sites - len(a))
        assert 0 <= sym_mutual_info_cond(t, a, b) <= min(t.rank_on(a), t.rank_on(b))


def test_boundary_quantities_against_enumeration():
    r = build_realization(LatticeGeometry(4, 6, "cylinder", "rxpm"), BoundaryCondition(), 0.8, 5)
    g = r.geometry
    t = solve_symmetry_group(assemble_parity_matrix(r))
    bd = np.concatenate([g.top_boundary(), g.bottom_boundary()])
    t_bd, log_g = boundary_tableau(t, bd)
    restricted = {sum(((e >> int(s)) & 1) << k for k, s in enumerate(bd)) for e in elements(t)}
    assert log_g == oracles.log2_size(restricted)
    top = list(range(8))
    bot = list(range(8, 16))
    expected = oracles.log2_size(restricted) - oracles.log2_size(oracles.supported_in(restricted, top)) - oracles.log2_size(oracles.supported_in(restricted, bot))
    assert top_bottom_mutual_info(t_bd, g.top_boundary(), g.bottom_boundary()) == expected
    a, b = [0, 4], [2, 6]
    ab = a + b
    full = list(range(16))
    ent = lambda reg: oracles.sym_entropy(restricted, [bd.tolist().index(s) for s in reg], full)  # noqa: E731
    assert boundary_mutual_info(t_bd, a, b) == ent(a) + ent(b) - ent(ab)


def test_operator_size_and_snapshot(rng):
    r = build_realization(LatticeGeometry(6, 6), None, 1.0, 0)
    t = solve_symmetry_group(assemble_parity_matrix(r))
    size = operator_size(t, rng, 50)
    assert 0 < size <= 1
    grid = snapshot_grid(t, 6, 6, rng)
    assert len(grid.strip().splitlines()) == 6
    empty = solve_symmetry_group(assemble_parity_matrix(build_realization(LatticeGeometry(6, 6), None, 0.0, 0)))
    with pytest.raises(ValueError):
        operator_size(empty, rng)


def test_region_errors():
    r = build_realization(LatticeGeometry(4, 4), None, 1.0, 0)
    t = solve_symmetry_group(assemble_parity_matrix(r))
    with pytest.raises(ValueError):
        sym_mutual_info_cond(t, [0, 1], [1, 2])
    with pytest.raises(ValueError):
        t.rank_on([99])
