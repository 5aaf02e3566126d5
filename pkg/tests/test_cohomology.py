import json
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bismutkit.cohomology import (
    DATA_DIR,
    T4_J_ON_FORMS,
    GradedIntegerMap,
    HodgeTable,
    borel_e2,
    borel_window,
    determinant,
    identity,
    induced_map_t4_rotation,
    k3_fixed_space,
    kunneth_with_s3,
    load_cohomology_job,
    load_hodge,
    mapping_torus_cohomology,
    matmul,
    parity_check_b1,
    poincare_symmetric,
    product_with_s3_identity,
    smith_normal_form,
)
from bismutkit.errors import InputError, PreconditionError


def test_smith_form_classic_example():
    A = [[2, 4, 4], [-6, 6, 12], [10, -4, -16]]
    snf = smith_normal_form(A)
    assert snf.diagonal == [2, 6, 12]
    assert matmul(matmul(snf.U, A), snf.V) == snf.D
    assert abs(determinant(snf.U)) == 1 and abs(determinant(snf.V)) == 1


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 5), st.integers(1, 5), st.data())
def test_smith_form_multiplies_back(m, n, data):
    A = data.draw(st.lists(st.lists(st.integers(-20, 20), min_size=n, max_size=n), min_size=m, max_size=m))
    snf = smith_normal_form(A)
    assert matmul(matmul(snf.U, A), snf.V) == snf.D
    assert abs(determinant(snf.U)) == 1 and abs(determinant(snf.V)) == 1
    d = snf.diagonal
    assert all(x >= 0 for x in d)
    assert all(d[i + 1] % d[i] == 0 for i in range(len(d) - 1) if d[i])
    assert all(snf.D[i][j] == 0 for i in range(m) for j in range(n) if i != j)
    assert snf.rank == np.linalg.matrix_rank(np.array(A, dtype=float))


def unimodular(data, n):
    """A random element of SL(n, Z) from elementary row operations."""
    M = np.eye(n, dtype=int)
    for _ in range(data.draw(st.integers(0, 8))):
        i, j = data.draw(st.integers(0, n - 1)), data.draw(st.integers(0, n - 1))
        if i != j:
            M[i] += data.draw(st.integers(-2, 2)) * M[j]
    return M.tolist()


def test_t4_rotation_cohomology():
    mt = mapping_torus_cohomology(induced_map_t4_rotation())
    assert mt.kernel_dims == [1, 0, 4, 0, 1]
    assert mt.cokernel_torsion == [[], [2, 2], [], [2, 2], []]
    assert mt.betti == [1, 1, 4, 4, 1, 1]
    assert mt.euler_characteristic == 0


def test_identity_gives_product_with_circle():
    mt = mapping_torus_cohomology(GradedIntegerMap.from_linear_map(identity(4)))
    assert mt.betti == [1, 5, 10, 10, 5, 1]


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4), st.data())
def test_mapping_torus_invariants_on_random_torus_maps(n, data):
    A = unimodular(data, n)
    psi = GradedIntegerMap.from_linear_map(A)
    mt = mapping_torus_cohomology(psi)
    # rational ranks from floating-point linear algebra, independently of the Smith form
    for r, M in enumerate(psi.matrices):
        Mf = np.array(M, dtype=float) - np.eye(len(M))
        assert mt.kernel_dims[r] == len(M) - np.linalg.matrix_rank(Mf)
    assert mt.betti[0] == 1
    assert mt.euler_characteristic == 0
    assert poincare_symmetric(mt.betti)  # det A = 1 keeps the mapping torus orientable
    via_kunneth = kunneth_with_s3(mt.betti)
    assert via_kunneth == mapping_torus_cohomology(product_with_s3_identity(psi)).betti


def test_kunneth_example():
    assert kunneth_with_s3([1, 1, 4, 4, 1, 1]) == [1, 1, 4, 5, 2, 5, 4, 1, 1]


def complex_matrix_as_real(re, im):
    """(a + ib) acting on C^m, realized on R^2m with J(e_2k) = e_2k+1."""
    m = len(re)
    M = [[0] * (2 * m) for _ in range(2 * m)]
    for i in range(m):
        for j in range(m):
            a, b = re[i][j], im[i][j]
            M[2 * i][2 * j], M[2 * i][2 * j + 1] = a, -b
            M[2 * i + 1][2 * j], M[2 * i + 1][2 * j + 1] = b, a
    return M


def standard_J(m):
    return complex_matrix_as_real([[int(i == j) * 0 for j in range(m)] for i in range(m)],
                                  [[int(i == j) for j in range(m)] for i in range(m)])


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 3), st.data())
def test_parity_for_random_commuting_pairs(m, data):
    ints = st.integers(-2, 2)
    re = data.draw(st.lists(st.lists(ints, min_size=m, max_size=m), min_size=m, max_size=m))
    im = data.draw(st.lists(st.lists(ints, min_size=m, max_size=m), min_size=m, max_size=m))
    psi1, J = complex_matrix_as_real(re, im), standard_J(m)
    v = parity_check_b1(psi1, J)
    # oracle: the fixed space is a complex subspace, so its real dimension is even
    dim = 2 * m - np.linalg.matrix_rank(np.array(psi1, dtype=float) - np.eye(2 * m))
    assert v.kernel_dim == dim
    assert v.kernel_even and v.b1_odd and v.b1 == dim + 1


def test_parity_on_t4_rotation_and_preconditions():
    psi1 = induced_map_t4_rotation().matrices[1]
    v = parity_check_b1(psi1, T4_J_ON_FORMS)
    assert (v.kernel_dim, v.b1) == (0, 1)
    with pytest.raises(PreconditionError):
        parity_check_b1(psi1, identity(4))
    swap = [[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]
    with pytest.raises(PreconditionError):
        parity_check_b1(swap, T4_J_ON_FORMS)


def test_k3_fixed_space():
    A = identity(22)
    A[0][0], A[0][1], A[1][0], A[1][1] = 0, 1, 1, 0
    assert k3_fixed_space(A) == 21
    with pytest.raises(PreconditionError):
        k3_fixed_space(identity(22))
    with pytest.raises(InputError):
        k3_fixed_space(identity(3))


def brute_e2(base, fiber, p, q, u, v):
    """sum of h^{a,b}(B) h^{c,d}(F) over a + c = p, b + d = q, a + b = u, c + d = v."""
    total = 0
    for a, b, c, d in product(range(5), repeat=4):
        if a + c == p and b + d == q and a + b == u and c + d == v:
            total += base.h(a, b) * fiber.h(c, d)
    return total


def test_borel_table_matches_brute_force_on_bundled_data():
    base, fiber = load_hodge("hopf_surface.json"), load_hodge("t4.json")
    for p, q, u, v in product(range(5), repeat=4):
        assert borel_e2(base, fiber, p, q, u, v) == brute_e2(base, fiber, p, q, u, v)
    assert borel_e2(base, fiber, 0, 1, 0, 1) == 2
    assert borel_e2(base, fiber, 0, 1, 1, 0) == 1


hodge_tables = st.dictionaries(st.tuples(st.integers(0, 2), st.integers(0, 2)), st.integers(0, 3), max_size=9)


@settings(max_examples=60, deadline=None)
@given(hodge_tables, hodge_tables)
def test_borel_formula_matches_brute_force(hb, hf):
    base, fiber = HodgeTable(hb, 2), HodgeTable(hf, 2)
    for p, q, u in product(range(5), repeat=3):
        for v in range(5):
            assert borel_e2(base, fiber, p, q, u, v) == brute_e2(base, fiber, p, q, u, v)


def test_borel_with_point_fibre_is_base():
    base = load_hodge("hopf_surface.json")
    for (p, q, u, v), n in borel_window(base, HodgeTable.point(), range(3), range(3)).items():
        assert (u, v) == (p + q, 0) and n == base.h(p, q)


def test_hodge_validation(tmp_path):
    with pytest.raises(InputError):
        HodgeTable({(3, 0): 1}, 2)
    with pytest.raises(InputError):
        HodgeTable({(0, 0): -1}, 2)
    with pytest.raises(InputError):
        HodgeTable.from_json({"hodge": {}})
    with pytest.raises(InputError):
        HodgeTable.from_json({"complex_dim": 1, "hodge": {"a,b": 1}})
    with pytest.raises(InputError):
        load_hodge("nowhere.json")
    assert load_hodge({"complex_dim": 1, "hodge": {"0,0": 1}}).h(0, 0) == 1


def test_cohomology_job_files(tmp_path):
    job = load_cohomology_job(DATA_DIR / "t4_rotation.json")
    assert job.betti == [1, 4, 6, 4, 1] and job.j_matrix is not None
    assert job.psi.matrices == induced_map_t4_rotation().matrices
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"betti": [1, 1], "psi": [[[1]]]}))
    with pytest.raises(InputError, match="Betti"):
        load_cohomology_job(bad)
    bad.write_text(json.dumps({"psi": [[[1]]]}))
    with pytest.raises(InputError, match="betti"):
        load_cohomology_job(bad)
    bad.write_text(json.dumps({"betti": [1, 1], "psi": [[[1]], [[0]]]}))
    with pytest.raises(InputError, match="singular"):
        load_cohomology_job(bad)
