"""Exact invariant geometry on Lie algebras with rational structure constants.

Left-invariant tensors are identified with tensors on the algebra. Forms are
dictionaries from strictly increasing index tuples to :class:`Fraction`;
linear maps are nested lists ``M[a][b]`` (row ``a``, column ``b``), so a
complex structure has ``J e_b = sum_a J[a][b] e_a``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, permutations
from pathlib import Path

from .errors import InputError, PreconditionError

Vector = list  # list[Fraction]
Form = dict  # {increasing tuple: Fraction}


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        raise InputError(f"floating-point entry {x!r}; use integers or 'p/q' strings")
    try:
        return Fraction(x)
    except (TypeError, ValueError) as exc:
        raise InputError(f"cannot read {x!r} as a rational number") from exc


def _sort_sign(seq):
    seq = list(seq)
    if len(set(seq)) < len(seq):
        return 0, tuple(sorted(seq))
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign, tuple(sorted(seq))


def form_value(a: Form, idx) -> Fraction:
    """Value of a form on basis vectors ``e_idx[0], ...`` (any order)."""
    s, key = _sort_sign(idx)
    return s * a.get(key, Fraction(0)) if s else Fraction(0)


def _clean(a: Form) -> Form:
    return {k: v for k, v in a.items() if v != 0}


@dataclass
class LieAlgebraModel:
    """Structure constants ``c[k][i][j]`` with ``[e_i, e_j] = sum_k c[k][i][j] e_k``,
    a metric Gram matrix ``b`` and an optional complex structure ``J``."""

    dim: int
    c: list
    b: list
    J: list | None = None
    name: str = ""

    def __post_init__(self):
        m = self.dim
        self.c = [[[_frac(self.c[k][i][j]) for j in range(m)] for i in range(m)] for k in range(m)]
        self.b = [[_frac(x) for x in row] for row in self.b]
        if self.J is not None:
            self.J = [[_frac(x) for x in row] for row in self.J]
        for what, mat in (("metric", self.b), ("complex structure", self.J)):
            if mat is not None and (len(mat) != m or any(len(r) != m for r in mat)):
                raise InputError(f"{what} must be a {m}x{m} matrix")

    # construction
    @classmethod
    def from_brackets(cls, dim: int, brackets, b=None, J=None, name=""):
        """Build from entries ``(i, j, k, value)`` meaning ``[e_i, e_j] += value e_k``.

        The antisymmetric partner ``[e_j, e_i]`` is filled in automatically.
        """
        c = [[[Fraction(0)] * dim for _ in range(dim)] for _ in range(dim)]
        for entry in brackets:
            i, j, k, v = entry
            i, j, k = int(i), int(j), int(k)
            if not all(0 <= x < dim for x in (i, j, k)):
                raise InputError(f"bracket index out of range in {entry!r}")
            if i == j:
                raise InputError(f"bracket [e_{i}, e_{i}] must vanish")
            v = _frac(v)
            c[k][i][j] += v
            c[k][j][i] -= v
        b = identity(dim) if b is None else b
        return cls(dim, c, b, J, name)

    # basic algebra
    def bracket(self, X: Vector, Y: Vector) -> Vector:
        m = self.dim
        out = [Fraction(0)] * m
        for i in range(m):
            if X[i] == 0:
                continue
            for j in range(m):
                if Y[j] == 0:
                    continue
                s = X[i] * Y[j]
                for k in range(m):
                    if self.c[k][i][j]:
                        out[k] += s * self.c[k][i][j]
        return out

    def basis(self, i: int) -> Vector:
        v = [Fraction(0)] * self.dim
        v[i] = Fraction(1)
        return v

    def metric(self, X: Vector, Y: Vector) -> Fraction:
        return sum((X[i] * self.b[i][j] * Y[j] for i in range(self.dim) for j in range(self.dim)
                    if X[i] and Y[j]), Fraction(0))

    def apply_J(self, X: Vector) -> Vector:
        if self.J is None:
            raise PreconditionError(f"algebra {self.name!r} has no complex structure")
        return matvec(self.J, X)

    def opposite(self) -> "LieAlgebraModel":
        """The algebra of right-invariant fields: structure constants negated."""
        m = self.dim
        c = [[[-self.c[k][i][j] for j in range(m)] for i in range(m)] for k in range(m)]
        return LieAlgebraModel(m, c, self.b, self.J, f"{self.name}^op")

    # invariants
    def invariant_residuals(self) -> dict:
        """Exact defects of every type invariant (all must be zero)."""
        m = self.dim
        e = [self.basis(i) for i in range(m)]
        anti = any(self.c[k][i][j] != -self.c[k][j][i] for i in range(m) for j in range(m) for k in range(m))
        jacobi = []
        for i, j, k in combinations(range(m), 3):
            t = add(add(self.bracket(e[i], self.bracket(e[j], e[k])),
                        self.bracket(e[j], self.bracket(e[k], e[i]))),
                    self.bracket(e[k], self.bracket(e[i], e[j])))
            if any(t):
                jacobi.append((i, j, k))
        sym = any(self.b[i][j] != self.b[j][i] for i in range(m) for j in range(m))
        adinv = []
        for i in range(m):
            for j in range(m):
                for k in range(m):
                    v = self.metric(self.bracket(e[i], e[j]), e[k]) + self.metric(e[j], self.bracket(e[i], e[k]))
                    if v:
                        adinv.append((i, j, k))
        out = {"antisymmetry": not anti, "jacobi": not jacobi, "metric_symmetric": not sym,
               "ad_invariance": not adinv, "positive_definite": _positive_definite(self.b)}
        if self.J is not None:
            JJ = matmul(self.J, self.J)
            out["J_squared"] = JJ == [[-x for x in row] for row in identity(m)]
            out["J_compatible"] = all(
                self.metric(self.apply_J(e[i]), self.apply_J(e[j])) == self.b[i][j]
                for i in range(m) for j in range(m))
        return out

    def validate(self) -> "LieAlgebraModel":
        bad = [k for k, ok in self.invariant_residuals().items() if not ok]
        if bad:
            raise InputError(f"algebra {self.name or '?'} violates: {', '.join(bad)}")
        return self


# small exact linear algebra -------------------------------------------------------------

def identity(m: int) -> list:
    return [[Fraction(int(i == j)) for j in range(m)] for i in range(m)]


def add(x: Vector, y: Vector) -> Vector:
    return [a + b for a, b in zip(x, y)]


def scale(s, x: Vector) -> Vector:
    return [s * a for a in x]


def matvec(M, x: Vector) -> Vector:
    return [sum((M[a][b] * x[b] for b in range(len(x)) if x[b]), Fraction(0)) for a in range(len(M))]


def matmul(A, B) -> list:
    n, k, m = len(A), len(B), len(B[0])
    return [[sum((A[i][t] * B[t][j] for t in range(k)), Fraction(0)) for j in range(m)] for i in range(n)]


def inverse(M) -> list:
    """Exact inverse by Gauss-Jordan elimination."""
    n = len(M)
    A = [list(map(Fraction, row)) + identity(n)[i] for i, row in enumerate(M)]
    for col in range(n):
        piv = next((r for r in range(col, n) if A[r][col] != 0), None)
        if piv is None:
            raise InputError("matrix is singular")
        A[col], A[piv] = A[piv], A[col]
        p = A[col][col]
        A[col] = [x / p for x in A[col]]
        for r in range(n):
            if r != col and A[r][col] != 0:
                f = A[r][col]
                A[r] = [x - f * y for x, y in zip(A[r], A[col])]
    return [row[n:] for row in A]


def _positive_definite(M) -> bool:
    """Sylvester's criterion with exact leading minors."""
    n = len(M)
    for k in range(1, n + 1):
        if determinant([row[:k] for row in M[:k]]) <= 0:
            return False
    return True


def determinant(M) -> Fraction:
    n = len(M)
    A = [list(map(Fraction, row)) for row in M]
    det = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if A[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            A[col], A[piv] = A[piv], A[col]
            det = -det
        det *= A[col][col]
        for r in range(col + 1, n):
            f = A[r][col] / A[col][col]
            if f:
                A[r] = [x - f * y for x, y in zip(A[r], A[col])]
    return det


def pfaffian(A) -> Fraction:
    """Exact Pfaffian of an antisymmetric matrix by expansion along the first row."""
    n = len(A)
    if n == 0:
        return Fraction(1)
    if n % 2:
        return Fraction(0)
    total = Fraction(0)
    for j in range(1, n):
        if A[0][j] == 0:
            continue
        keep = [k for k in range(1, n) if k != j]
        minor = [[A[r][s] for s in keep] for r in keep]
        total += (-1) ** (j + 1) * A[0][j] * pfaffian(minor)
    return total


# Chevalley-Eilenberg calculus -----------------------------------------------------------

def ce_differential(la: LieAlgebraModel, a: Form, degree: int) -> Form:
    """``(da)(X_0..X_k) = sum_{i<j} (-1)^{i+j} a([X_i, X_j], X_0..^i..^j..X_k)``."""
    m = la.dim
    out = {}
    for idx in combinations(range(m), degree + 1):
        total = Fraction(0)
        for i in range(degree + 1):
            for j in range(i + 1, degree + 1):
                rest = idx[:i] + idx[i + 1:j] + idx[j + 1:]
                sign = (-1) ** (i + j)
                br = [la.c[k][idx[i]][idx[j]] for k in range(m)]
                for k in range(m):
                    if br[k]:
                        total += sign * br[k] * form_value(a, (k,) + rest)
        if total:
            out[idx] = total
    return out


def apply_J_to_form(la: LieAlgebraModel, a: Form, degree: int) -> Form:
    """``a(J., ..., J.)``."""
    m = la.dim
    cols = [la.apply_J(la.basis(i)) for i in range(m)]
    out = {}
    for idx in combinations(range(m), degree):
        total = Fraction(0)
        for key, val in a.items():
            # a(J e_idx) = sum over permutations assigning key entries to slots
            for perm in permutations(range(degree)):
                prod = Fraction(val)
                sgn, _ = _sort_sign(perm)
                for slot in range(degree):
                    prod *= cols[idx[slot]][key[perm[slot]]]
                    if not prod:
                        break
                total += sgn * prod
        if total:
            out[idx] = total
    return out


def fundamental_form(la: LieAlgebraModel) -> Form:
    """``omega(X, Y) = b(JX, Y)``."""
    m = la.dim
    e = [la.basis(i) for i in range(m)]
    return _clean({(i, j): la.metric(la.apply_J(e[i]), e[j]) for i, j in combinations(range(m), 2)})


def dc_form(la: LieAlgebraModel, a: Form, degree: int) -> Form:
    """``d^c a = -(da)(J., ..., J.)`` on the Chevalley-Eilenberg complex."""
    da = ce_differential(la, a, degree)
    return _clean({k: -v for k, v in apply_J_to_form(la, da, degree + 1).items()})


def cartan_torsion(la: LieAlgebraModel) -> Form:
    """``H(X, Y, Z) = -b([X, Y], Z)``; requires a complex structure."""
    if la.J is None:
        raise PreconditionError("cartan_torsion needs a complex structure")
    return _cartan(la)


def _cartan(la: LieAlgebraModel) -> Form:
    m = la.dim
    e = [la.basis(i) for i in range(m)]
    return _clean({(i, j, k): -la.metric(la.bracket(e[i], e[j]), e[k])
                   for i, j, k in combinations(range(m), 3)})


def cartan_is_alternating(la: LieAlgebraModel) -> bool:
    m = la.dim
    e = [la.basis(i) for i in range(m)]
    full = {(i, j, k): -la.metric(la.bracket(e[i], e[j]), e[k])
            for i in range(m) for j in range(m) for k in range(m)}
    return all(full[idx] == form_value(_cartan(la), idx) for idx in full)


def algebraic_nijenhuis(la: LieAlgebraModel) -> dict:
    """Nonzero values of ``N(e_i, e_j) = [Je_i,Je_j] - J[Je_i,e_j] - J[e_i,Je_j] - [e_i,e_j]``."""
    m = la.dim
    e = [la.basis(i) for i in range(m)]
    J = la.apply_J
    out = {}
    for i, j in combinations(range(m), 2):
        X, Y = e[i], e[j]
        n = add(add(la.bracket(J(X), J(Y)), scale(-1, J(la.bracket(J(X), Y)))),
                add(scale(-1, J(la.bracket(X, J(Y)))), scale(-1, la.bracket(X, Y))))
        if any(n):
            out[(i, j)] = n
    return out


# connections on invariant fields ------------------------------------------------------

@dataclass
class InvariantConnection:
    """``gamma[i][j] = nabla_{e_i} e_j`` for left-invariant fields."""

    la: LieAlgebraModel
    gamma: list

    def covariant(self, X: Vector, Y: Vector) -> Vector:
        m = self.la.dim
        out = [Fraction(0)] * m
        for i in range(m):
            if not X[i]:
                continue
            for j in range(m):
                if Y[j]:
                    out = add(out, scale(X[i] * Y[j], self.gamma[i][j]))
        return out

    def is_zero(self) -> bool:
        return not any(any(v) for row in self.gamma for v in row)

    def curvature(self) -> dict:
        """Nonzero ``R(e_i, e_j) e_k`` (constant coefficients: no derivative terms)."""
        la, m = self.la, self.la.dim
        e = [la.basis(i) for i in range(m)]
        out = {}
        for i in range(m):
            for j in range(m):
                for k in range(m):
                    r = add(add(self.covariant(e[i], self.covariant(e[j], e[k])),
                                scale(-1, self.covariant(e[j], self.covariant(e[i], e[k])))),
                            scale(-1, self.covariant(la.bracket(e[i], e[j]), e[k])))
                    if any(r):
                        out[(i, j, k)] = r
        return out

    def metric_defect(self) -> list:
        """Triples with ``b(nabla_X Y, Z) + b(Y, nabla_X Z) != 0``."""
        la, m = self.la, self.la.dim
        e = [la.basis(i) for i in range(m)]
        return [(i, j, k) for i in range(m) for j in range(m) for k in range(m)
                if la.metric(self.covariant(e[i], e[j]), e[k]) + la.metric(e[j], self.covariant(e[i], e[k]))]

    def complex_defect(self) -> list:
        """Pairs with ``nabla_X (JY) - J nabla_X Y != 0``."""
        la, m = self.la, self.la.dim
        e = [la.basis(i) for i in range(m)]
        return [(i, j) for i in range(m) for j in range(m)
                if any(add(self.covariant(e[i], la.apply_J(e[j])), scale(-1, la.apply_J(self.covariant(e[i], e[j])))))]

    def torsion_form(self) -> Form:
        """``b(nabla_X Y - nabla_Y X - [X, Y], Z)`` on basis triples, if alternating."""
        la, m = self.la, self.la.dim
        e = [la.basis(i) for i in range(m)]
        full = {}
        for i in range(m):
            for j in range(m):
                T = add(add(self.covariant(e[i], e[j]), scale(-1, self.covariant(e[j], e[i]))),
                        scale(-1, la.bracket(e[i], e[j])))
                for k in range(m):
                    full[(i, j, k)] = la.metric(T, e[k])
        comp = {idx: full[idx] for idx in combinations(range(m), 3)}
        if any(full[idx] != form_value(comp, idx) for idx in full):
            raise InputError("torsion is not totally skew")
        return _clean(comp)


def levi_civita_invariant(la: LieAlgebraModel) -> InvariantConnection:
    """Koszul formula on invariant fields; equals ``1/2 [X, Y]`` for bi-invariant ``b``."""
    m = la.dim
    e = [la.basis(i) for i in range(m)]
    binv = inverse(la.b)
    gamma = []
    for i in range(m):
        row = []
        for j in range(m):
            # 2 b(nabla_X Y, Z) = b([X,Y],Z) - b([Y,Z],X) + b([Z,X],Y)
            low = [(la.metric(la.bracket(e[i], e[j]), e[k]) - la.metric(la.bracket(e[j], e[k]), e[i])
                    + la.metric(la.bracket(e[k], e[i]), e[j])) / 2 for k in range(m)]
            row.append(matvec(binv, low))
        gamma.append(row)
    return InvariantConnection(la, gamma)


def invariant_bismut_connection(la: LieAlgebraModel) -> InvariantConnection:
    """``b(nabla^B_X Y, Z) = b(nabla^LC_X Y, Z) + 1/2 H(X, Y, Z)`` with ``H = -d^c omega``."""
    lc = levi_civita_invariant(la)
    H = _clean({k: -v for k, v in dc_form(la, fundamental_form(la), 2).items()})
    binv = inverse(la.b)
    m = la.dim
    gamma = [[add(lc.gamma[i][j], matvec(binv, [form_value(H, (i, j, k)) / 2 for k in range(m)]))
              for j in range(m)] for i in range(m)]
    return InvariantConnection(la, gamma)


# checks ---------------------------------------------------------------------------------

@dataclass
class GKAlgebraResult:
    torsion_sum: Form
    pluriclosed_left: Form
    pluriclosed_right: Form
    orientation_ratio: Fraction


def left_right_gk_check(la: LieAlgebraModel) -> GKAlgebraResult:
    """``d^c_L omega_L + d^c_R omega_R`` (right model: negated constants), ``dd^c_L omega_L``
    and the ratio of top powers of the two fundamental forms."""
    right = la.opposite()
    wl, wr = fundamental_form(la), fundamental_form(right)
    dcl, dcr = dc_form(la, wl, 2), dc_form(right, wr, 2)
    keys = set(dcl) | set(dcr)
    total = _clean({k: dcl.get(k, 0) + dcr.get(k, 0) for k in keys})
    m = la.dim

    def mat(w):
        return [[form_value(w, (i, j)) if i != j else Fraction(0) for j in range(m)] for i in range(m)]

    pl, pr = pfaffian(mat(wl)), pfaffian(mat(wr))
    if pr == 0:
        raise InputError("fundamental form is degenerate")
    return GKAlgebraResult(total, ce_differential(la, dcl, 3), ce_differential(right, dcr, 3), pl / pr)


def torsion_nonexactness_witness(la: LieAlgebraModel):
    """``(True, (i, j, k))`` for the first nonzero ``-b([e_i, e_j], e_k)``, else ``(False, None)``."""
    H = _cartan(la)
    for idx in combinations(range(la.dim), 3):
        if H.get(idx):
            return True, idx
    return False, None


def lie_checks(la: LieAlgebraModel) -> dict:
    """Every exact claim, as ``name -> (passed, detail)``."""
    la.validate()
    inv = la.invariant_residuals()
    H = cartan_torsion(la)
    omega = fundamental_form(la)
    minus_dc = _clean({k: -v for k, v in dc_form(la, omega, 2).items()})
    bis = invariant_bismut_connection(la)
    gk = left_right_gk_check(la)
    witness, triple = torsion_nonexactness_witness(la)
    out = {
        "JACOBI": (inv["jacobi"], "cyclic sum of nested brackets"),
        "AD_INVARIANCE": (inv["ad_invariance"], "b([X,Y],Z) + b(Y,[X,Z])"),
        "INTEGRABLE": (not algebraic_nijenhuis(la), "Nijenhuis tensor on basis pairs"),
        "TORSION_ALTERNATING": (cartan_is_alternating(la), "-b([X,Y],Z) alternating"),
        "TORSION_EQUALS_MINUS_DC_OMEGA": (minus_dc == H, "-d^c omega = -b([X,Y],Z)"),
        "DH": (not ce_differential(la, H, 3), "Chevalley-Eilenberg dH"),
        "BISMUT_ZERO": (bis.is_zero(), "nabla^B on invariant fields"),
        "BISMUT_FLAT": (not bis.curvature(), "R^B on invariant fields"),
        "BISMUT_METRIC": (not bis.metric_defect(), "nabla^B b"),
        "BISMUT_COMPLEX": (not bis.complex_defect(), "nabla^B J"),
        "BISMUT_TORSION_IS_H": (bis.torsion_form() == H, "b(T^B(X,Y),Z) = H"),
        "GK_TORSION": (not gk.torsion_sum, "d^c_L omega_L + d^c_R omega_R"),
        "ORIENTATION_SAME": (gk.orientation_ratio > 0, f"Pf ratio {gk.orientation_ratio}"),
        "SKT": (not gk.pluriclosed_left and not gk.pluriclosed_right, "d d^c omega"),
        "TORSION_NONZERO": (witness, f"witness {triple}"),
    }
    return out


# models and file format -----------------------------------------------------------------

def abelian(m: int) -> LieAlgebraModel:
    J = None
    if m % 2 == 0:
        J = [[Fraction(0)] * m for _ in range(m)]
        for a in range(0, m, 2):
            J[a + 1][a], J[a][a + 1] = Fraction(1), Fraction(-1)
    return LieAlgebraModel.from_brackets(m, [], J=J, name=f"R^{m}")


SU2_BRACKETS = [(1, 2, 3, 2), (2, 3, 1, 2), (3, 1, 2, 2)]


def samelson_su2_r() -> LieAlgebraModel:
    """su(2) + R with ``e_0`` spanning R, ``[e_1, e_2] = 2 e_3`` cyclically, ``b = Id``,
    ``J e_1 = e_2`` and ``J e_3 = e_0``."""
    J = [[Fraction(0)] * 4 for _ in range(4)]
    J[2][1], J[1][2] = Fraction(1), Fraction(-1)   # J e1 = e2
    J[0][3], J[3][0] = Fraction(1), Fraction(-1)   # J e3 = e0
    return LieAlgebraModel.from_brackets(4, SU2_BRACKETS, J=J, name="su(2)+R").validate()


def direct_sum(a: LieAlgebraModel, b: LieAlgebraModel, name: str = "") -> LieAlgebraModel:
    m, n = a.dim, b.dim
    N = m + n
    c = [[[Fraction(0)] * N for _ in range(N)] for _ in range(N)]
    for k in range(m):
        for i in range(m):
            for j in range(m):
                c[k][i][j] = a.c[k][i][j]
    for k in range(n):
        for i in range(n):
            for j in range(n):
                c[m + k][m + i][m + j] = b.c[k][i][j]

    def block(x, y):
        out = [[Fraction(0)] * N for _ in range(N)]
        for i in range(m):
            for j in range(m):
                out[i][j] = x[i][j]
        for i in range(n):
            for j in range(n):
                out[m + i][m + j] = y[i][j]
        return out

    J = block(a.J, b.J) if a.J is not None and b.J is not None else None
    return LieAlgebraModel(N, c, block(a.b, b.b), J, name or f"{a.name}+{b.name}")


def su2_su2_r2() -> LieAlgebraModel:
    """su(2) + su(2) + R^2 as the direct sum of two Samelson blocks."""
    return direct_sum(samelson_su2_r(), samelson_su2_r(), "su(2)+su(2)+R^2").validate()


def load_algebra(path) -> LieAlgebraModel:
    """Read a JSON algebra file.

    Keys: ``dim``; ``brackets`` as ``[i, j, k, value]`` entries meaning
    ``[e_i, e_j] += value e_k``; ``metric`` (defaults to the identity) and
    ``complex_structure`` as matrices of integers or ``"p/q"`` strings.
    """
    try:
        data = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise InputError(f"algebra file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"algebra file {path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict) or "dim" not in data:
        raise InputError("algebra file: missing field 'dim'")
    try:
        dim = int(data["dim"])
    except (TypeError, ValueError):
        raise InputError("algebra file: field 'dim' must be an integer") from None
    brackets = data.get("brackets", [])
    if not isinstance(brackets, list) or any(not isinstance(e, list) or len(e) != 4 for e in brackets):
        raise InputError("algebra file: field 'brackets' must be a list of [i, j, k, value]")
    la = LieAlgebraModel.from_brackets(dim, brackets, data.get("metric"), data.get("complex_structure"),
                                       data.get("name", Path(path).stem))
    return la.validate()
