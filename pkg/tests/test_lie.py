import json
import time
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bismutkit.errors import InputError, PreconditionError
from bismutkit.lie import (
    LieAlgebraModel,
    abelian,
    algebraic_nijenhuis,
    cartan_torsion,
    ce_differential,
    determinant,
    fundamental_form,
    inverse,
    invariant_bismut_connection,
    identity,
    levi_civita_invariant,
    lie_checks,
    load_algebra,
    matmul,
    pfaffian,
    samelson_su2_r,
    su2_su2_r2,
)


def test_cartan_form_of_su2_r_by_substitution():
    # H(e1, e2, e3) = -b([e1, e2], e3) = -b(2 e3, e3)
    assert cartan_torsion(samelson_su2_r()) == {(1, 2, 3): Fraction(-2)}


def test_fundamental_form_of_su2_r():
    # omega(X, Y) = b(JX, Y) with J e1 = e2, J e3 = e0
    assert fundamental_form(samelson_su2_r()) == {(0, 3): Fraction(-1), (1, 2): Fraction(1)}


def test_levi_civita_is_half_bracket_for_biinvariant_metric():
    la = samelson_su2_r()
    lc = levi_civita_invariant(la)
    for i in range(4):
        for j in range(4):
            assert lc.covariant(la.basis(i), la.basis(j)) == [x / 2 for x in la.bracket(la.basis(i), la.basis(j))]


@pytest.mark.parametrize("build", [samelson_su2_r, su2_su2_r2], ids=["su2+R", "su2+su2+R2"])
def test_all_exact_checks_pass(build):
    results = lie_checks(build())
    assert len(results) == 15
    assert all(ok for ok, _ in results.values()), {k: v for k, v in results.items() if not v[0]}


def test_su2_r_checks_are_fast():
    start = time.perf_counter()
    lie_checks(samelson_su2_r())
    assert time.perf_counter() - start < 1.0


def test_abelian_algebra_only_lacks_torsion():
    results = lie_checks(abelian(4))
    assert [k for k, (ok, _) in results.items() if not ok] == ["TORSION_NONZERO"]


def test_bismut_connection_vanishes_but_levi_civita_does_not():
    la = samelson_su2_r()
    assert invariant_bismut_connection(la).is_zero()
    assert not levi_civita_invariant(la).is_zero()
    assert levi_civita_invariant(la).curvature()


def test_cross_block_complex_structure_is_not_integrable():
    la = su2_su2_r2()
    J = [[Fraction(0)] * 8 for _ in range(8)]
    for a, b in ((1, 5), (2, 6), (3, 7), (0, 4)):
        J[b][a], J[a][b] = Fraction(1), Fraction(-1)
    twisted = LieAlgebraModel(8, la.c, la.b, J, "twisted")
    assert algebraic_nijenhuis(twisted)
    assert not lie_checks(twisted)["INTEGRABLE"][0]


def test_invalid_algebras_are_rejected():
    with pytest.raises(InputError, match="jacobi"):
        # [e0,e1]=e2, [e1,e2]=e0, [e0,e2]=e0 breaks Jacobi
        LieAlgebraModel.from_brackets(3, [(0, 1, 2, 1), (1, 2, 0, 1), (0, 2, 0, 1)]).validate()
    with pytest.raises(InputError, match="ad_invariance"):
        # Heisenberg algebra has no bi-invariant positive metric
        LieAlgebraModel.from_brackets(3, [(0, 1, 2, 1)]).validate()
    with pytest.raises(InputError):
        LieAlgebraModel.from_brackets(2, [(0, 1, 1, 0.5)])
    with pytest.raises(InputError):
        LieAlgebraModel.from_brackets(2, [(0, 0, 1, 1)])
    bad_J = samelson_su2_r()
    bad_J.J = [[2 * x for x in row] for row in bad_J.J]
    with pytest.raises(InputError, match="J_squared"):
        bad_J.validate()
    with pytest.raises(PreconditionError):
        cartan_torsion(LieAlgebraModel.from_brackets(3, [(0, 1, 2, 1), (1, 2, 0, 1), (2, 0, 1, 1)]))


def test_opposite_is_an_involution():
    la = samelson_su2_r()
    assert la.opposite().opposite().c == la.c
    assert all(la.opposite().invariant_residuals().values())


antisym = st.lists(st.integers(-5, 5), min_size=15, max_size=15)


def _antisym(entries, n):
    A = [[Fraction(0)] * n for _ in range(n)]
    it = iter(entries)
    for i in range(n):
        for j in range(i + 1, n):
            v = Fraction(next(it))
            A[i][j], A[j][i] = v, -v
    return A


@settings(max_examples=60, deadline=None)
@given(antisym, st.sampled_from([2, 4, 6]))
def test_pfaffian_squared_is_determinant(entries, n):
    A = _antisym(entries, n)
    assert pfaffian(A) ** 2 == determinant(A)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(-4, 4), min_size=9, max_size=9))
def test_inverse_is_exact(entries):
    M = [[Fraction(entries[3 * i + j]) for j in range(3)] for i in range(3)]
    if determinant(M) == 0:
        return
    assert matmul(M, inverse(M)) == identity(3)


@settings(max_examples=30, deadline=None)
@given(st.dictionaries(st.sampled_from([(0, 1), (0, 2), (1, 3), (2, 3), (0, 3), (1, 2)]),
                       st.integers(-3, 3), max_size=6),
       st.sampled_from([samelson_su2_r, lambda: abelian(4)]))
def test_chevalley_eilenberg_d_squared(form, build):
    la = build()
    a = {k: Fraction(v) for k, v in form.items() if v}
    assert not ce_differential(la, ce_differential(la, a, 2), 3)


def test_load_algebra_roundtrip_and_errors(tmp_path):
    good = tmp_path / "a.json"
    good.write_text(json.dumps({
        "dim": 4,
        "brackets": [[1, 2, 3, 2], [2, 3, 1, 2], [3, 1, 2, 2]],
        "complex_structure": [[0, 0, 0, 1], [0, 0, -1, 0], [0, 1, 0, 0], [-1, 0, 0, 0]],
    }))
    la = load_algebra(good)
    assert la.J == samelson_su2_r().J and la.c == samelson_su2_r().c
    cases = {
        "nodim.json": ({"brackets": []}, "dim"),
        "brackets.json": ({"dim": 2, "brackets": [[0, 1, 1]]}, "brackets"),
        "float.json": ({"dim": 2, "brackets": [[0, 1, 1, 0.5]]}, "floating"),
    }
    for name, (data, needle) in cases.items():
        path = tmp_path / name
        path.write_text(json.dumps(data))
        with pytest.raises(InputError, match=needle):
            load_algebra(path)
    (tmp_path / "broken.json").write_text("{")
    with pytest.raises(InputError):
        load_algebra(tmp_path / "broken.json")
    with pytest.raises(InputError):
        load_algebra(tmp_path / "missing.json")
