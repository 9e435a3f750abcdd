import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from plaqsym.lattice import assemble_parity_matrix
from plaqsym.stabilizer import (
    MeasurementPattern,
    StabilizerTableau,
    build_cluster_state,
    check_equivalence,
    commutator_matrix,
    entanglement_entropy,
    interval_endpoints,
    mbqc_realization,
    measure,
    measure_all,
    pauli_from_string,
    pauli_product,
    pauli_to_string,
    post_measurement_group,
    single_qubit_pauli,
    symplectic_product,
)

MATS = {k: oracles._P[k] for k in "IXYZ"}


def dense_pauli(s: str) -> np.ndarray:
    sign = -1 if s[0] == "-" else 1
    body = s.lstrip("+-")
    out = np.array([[1]], dtype=complex)
    for c in body:
        out = np.kron(out, MATS[c])
    return sign * out


def cluster_edges(Lx, Ly, topology):
    edges = []
    for y, x in itertools.product(range(Ly), range(Lx)):
        q = y * Lx + x
        if x + 1 < Lx or (topology != "open" and Lx > 1):
            edges.append((q, y * Lx + (x + 1) % Lx))
        if y + 1 < Ly or (topology == "torus" and Ly > 1):
            edges.append((q, ((y + 1) % Ly) * Lx + x))
    return [(a, b) for a, b in edges if a != b]


@given(st.text("IXYZ", min_size=1, max_size=4), st.text("IXYZ", min_size=1, max_size=4), st.booleans(), st.booleans())
@settings(max_examples=200, deadline=None)
def test_pauli_product_matches_matrices(a, b, sa, sb):
    n = min(len(a), len(b))
    a, b = a[:n], b[:n]
    ra, rb = pauli_from_string(a)[0], pauli_from_string(b)[0]
    anti = symplectic_product(ra, rb)[0, 0]
    ma, mb = dense_pauli(("-" if sa else "+") + a), dense_pauli(("-" if sb else "+") + b)
    assert anti == (not np.allclose(ma @ mb, mb @ ma))
    if anti:
        with pytest.raises(ValueError):
            pauli_product(ra, sa, rb, sb)
        return
    row, sign = pauli_product(ra, int(sa), rb, int(sb))
    assert np.allclose(dense_pauli(pauli_to_string(row, sign)), ma @ mb)


def test_string_round_trip_and_errors():
    row, s = pauli_from_string("-XIZY")
    assert pauli_to_string(row, s) == "-XIZY"
    assert pauli_to_string(single_qubit_pauli(3, 1, "Y")) == "+IYI"
    with pytest.raises(ValueError):
        pauli_from_string("XQ")


@pytest.mark.parametrize("Lx,Ly,topology", [(3, 3, "open"), (4, 3, "cylinder"), (3, 4, "torus"), (2, 3, "cylinder"), (2, 2, "torus")])
def test_cluster_state_matches_graph_state(Lx, Ly, topology):
    t = build_cluster_state(Lx, Ly, topology)
    assert t.is_pure()
    n = Lx * Ly
    psi = oracles.graph_state(n, cluster_edges(Lx, Ly, topology))
    for s in t.to_strings():
        assert np.allclose(dense_pauli(s) @ psi, psi)


def random_patch(rng):
    Lx, Ly = [(3, 4), (4, 3), (2, 6), (3, 3), (4, 2), (6, 2)][rng.integers(6)]
    topology = ["open", "cylinder"][rng.integers(2)]
    return Lx, Ly, topology


@pytest.mark.parametrize("case", range(50))
def test_symplectic_entropy_matches_state_vector(case):
    rng = np.random.default_rng(1000 + case)
    Lx, Ly, topology = random_patch(rng)
    n = Lx * Ly
    t = build_cluster_state(Lx, Ly, topology)
    psi = oracles.graph_state(n, cluster_edges(Lx, Ly, topology))
    measured = rng.choice(n, size=rng.integers(0, n), replace=False)
    for q in measured:
        kind = "XYZ"[rng.integers(3)]
        t, outcome, random = measure(t, single_qubit_pauli(n, q, kind), rng)
        psi, prob = oracles.project(psi, n, q, kind, outcome)
        assert prob == pytest.approx(0.5 if random else 1.0, abs=1e-9)
    assert t.is_pure()
    for s in t.to_strings():
        assert np.allclose(dense_pauli(s) @ psi, psi)
    for _ in range(4):
        region = rng.choice(n, size=rng.integers(1, n), replace=False)
        assert entanglement_entropy(t, region) == pytest.approx(oracles.entropy_bits(psi, n, region), abs=1e-8)


@pytest.mark.parametrize("obs", ["ZZ", "XX", "YY", "-YY"])
def test_deterministic_measurement_sign(obs):
    t = StabilizerTableau.from_strings(["-ZZ", "+XX"])
    _, outcome, random = measure(t, pauli_from_string(obs)[0])
    # common eigenvector of the stabilizers, then the expectation of the unsigned observable
    w, v = np.linalg.eigh(dense_pauli("-ZZ") + dense_pauli("+XX"))
    psi = v[:, np.argmax(w)]
    expect = np.vdot(psi, dense_pauli(obs.lstrip("-")) @ psi).real
    assert not random
    assert outcome == int(expect < 0)


def test_measuring_outside_a_mixed_group_raises():
    with pytest.raises(ValueError):
        measure(StabilizerTableau.from_strings(["ZI"]), pauli_from_string("IZ")[0])


@pytest.mark.parametrize("seed", range(5))
def test_commutator_matrix_is_rxpm_parity_matrix(seed):
    r = mbqc_realization(6, 5, 0.7, seed)
    pattern = MeasurementPattern.from_realization(r)
    cluster = build_cluster_state(6, 5, "cylinder")
    assert commutator_matrix(cluster, pattern.observables()) == assemble_parity_matrix(r)
    group = post_measurement_group(cluster, pattern.observables())
    assert not symplectic_product(group, group).any()


def test_measure_all_leaves_boundary_row_unmeasured():
    r = mbqc_realization(4, 4, 0.5, 1)
    pattern = MeasurementPattern.from_realization(r)
    assert pattern.measured_qubits().min() == 4
    assert set(pattern.bases[-1]) == {"Z"}
    post = measure_all(build_cluster_state(4, 4), pattern)
    assert post.is_pure()
    assert "bases:" in pattern.to_record()


@pytest.mark.parametrize("seed", range(10))
def test_equivalence_bound_small(seed):
    r = mbqc_realization(6, 6, 0.743, seed)
    rep = check_equivalence(r, MeasurementPattern.from_realization(r))
    assert rep.parity_matches and rep.ok


def test_equivalence_input_checks():
    r = mbqc_realization(4, 4, 0.7, 0)
    with pytest.raises(ValueError):
        check_equivalence(r, MeasurementPattern.sample(4, 4, 0.7, 1))
    with pytest.raises(ValueError):
        MeasurementPattern.from_realization(mbqc_realization(4, 4, 0.7, 0).__class__(r.geometry, None, 0.7, 0, r.plaquette))


@pytest.mark.parametrize("x1,n,L,expected", [(0, 0, 8, 0), (3, 8, 8, 0), (0, 3, 8, 2), (6, 4, 8, 2), (7, 1, 8, 2)])
def test_interval_endpoints(x1, n, L, expected):
    assert interval_endpoints(x1, n, L) == expected


def test_entropy_of_product_state_is_zero():
    t = StabilizerTableau.from_strings(["ZII", "IXI", "IIY"])
    assert entanglement_entropy(t, [0, 2]) == 0
    bell = StabilizerTableau.from_strings(["XX", "ZZ"])
    assert entanglement_entropy(bell, [0]) == 1
    with pytest.raises(ValueError):
        entanglement_entropy(bell, [2])
