"""Exact integer topology: Smith normal form, mapping-torus Betti numbers and
Borel E2 dimensions.

Matrices are lists of rows of Python ints. Exterior powers use the
lexicographic basis of increasing index tuples, and a map ``x -> A x`` on
coordinates acts on 1-forms by ``A^T`` in the basis ``dx_1, ..., dx_n``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations
from math import comb
from pathlib import Path

from .errors import InputError, PreconditionError

Matrix = list  # list[list[int]]


def identity(n: int) -> Matrix:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def matmul(A: Matrix, B: Matrix) -> Matrix:
    if not A or not B:
        return [[0] * (len(B[0]) if B else 0) for _ in A]
    return [[sum(A[i][t] * B[t][j] for t in range(len(B))) for j in range(len(B[0]))]
            for i in range(len(A))]


def transpose(A: Matrix) -> Matrix:
    return [list(r) for r in zip(*A)] if A else []


def subtract_identity(A: Matrix) -> Matrix:
    return [[A[i][j] - int(i == j) for j in range(len(A))] for i in range(len(A))]


def _as_int_matrix(A, what="matrix") -> Matrix:
    try:
        rows = [[int(x) for x in row] for row in A]
    except (TypeError, ValueError):
        raise InputError(f"{what} must contain integers") from None
    for row in A:
        for x in row:
            if isinstance(x, float) and x != int(x):
                raise InputError(f"{what} has non-integer entry {x}")
    if rows and any(len(r) != len(rows[0]) for r in rows):
        raise InputError(f"{what} is not rectangular")
    return rows


# Smith normal form ---------------------------------------------------------------------

@dataclass
class SmithForm:
    U: Matrix
    D: Matrix
    V: Matrix

    @property
    def diagonal(self) -> list:
        return [self.D[i][i] for i in range(min(len(self.D), len(self.D[0]) if self.D else 0))]

    @property
    def rank(self) -> int:
        return sum(1 for d in self.diagonal if d != 0)

    @property
    def torsion(self) -> list:
        return [d for d in self.diagonal if d > 1]


def smith_normal_form(A) -> SmithForm:
    """``U A V = D`` with ``D`` diagonal, ``d_i | d_{i+1}``, ``d_i >= 0`` and ``U``, ``V`` unimodular."""
    D = [list(r) for r in _as_int_matrix(A)]
    m = len(D)
    n = len(D[0]) if m else 0
    U, V = identity(m), identity(n)

    def swap_rows(i, j):
        D[i], D[j] = D[j], D[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for M in (D, V):
            for row in M:
                row[i], row[j] = row[j], row[i]

    def add_row(src, dst, f):  # row_dst += f * row_src
        D[dst] = [a + f * b for a, b in zip(D[dst], D[src])]
        U[dst] = [a + f * b for a, b in zip(U[dst], U[src])]

    def add_col(src, dst, f):  # col_dst += f * col_src
        for M in (D, V):
            for row in M:
                row[dst] += f * row[src]

    for t in range(min(m, n)):
        while True:
            entries = [(abs(D[i][j]), i, j) for i in range(t, m) for j in range(t, n) if D[i][j]]
            if not entries:
                break
            _, i, j = min(entries)
            swap_rows(t, i)
            swap_cols(t, j)
            p = D[t][t]
            dirty = False
            for i in range(t + 1, m):
                if D[i][t]:
                    add_row(t, i, -(D[i][t] // p))
                    dirty |= D[i][t] != 0
            for j in range(t + 1, n):
                if D[t][j]:
                    add_col(t, j, -(D[t][j] // p))
                    dirty |= D[t][j] != 0
            if dirty:
                continue
            bad = next(((i, j) for i in range(t + 1, m) for j in range(t + 1, n) if D[i][j] % p), None)
            if bad is None:
                break
            add_row(bad[0], t, 1)
        if t < m and t < n and D[t][t] < 0:
            D[t] = [-x for x in D[t]]
            U[t] = [-x for x in U[t]]
    return SmithForm(U, D, V)


def determinant(A: Matrix) -> int:
    """Exact integer determinant (fraction-free Bareiss elimination)."""
    M = [list(r) for r in A]
    n = len(M)
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if M[k][k] == 0:
            swap = next((r for r in range(k + 1, n) if M[r][k]), None)
            if swap is None:
                return 0
            M[k], M[swap] = M[swap], M[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) // prev
        prev = M[k][k]
    return sign * M[n - 1][n - 1]


def kernel_dim(A: Matrix) -> int:
    """Dimension over Q of the kernel of ``A`` (columns are the domain)."""
    if not A:
        return 0
    return len(A[0]) - smith_normal_form(A).rank


# graded maps ---------------------------------------------------------------------------

def exterior_power(M: Matrix, r: int) -> Matrix:
    """``Lambda^r M`` in the lexicographic basis: entries are ``r x r`` minors."""
    n = len(M)
    basis = list(combinations(range(n), r))
    return [[determinant([[M[i][j] for j in J] for i in I]) for J in basis] for I in basis]


@dataclass
class GradedIntegerMap:
    """Matrices of an automorphism on each ``H^r(K; Z)/torsion``."""

    matrices: list
    name: str = ""

    def __post_init__(self):
        self.matrices = [_as_int_matrix(M, f"degree-{r} matrix") for r, M in enumerate(self.matrices)]
        for r, M in enumerate(self.matrices):
            if any(len(row) != len(M) for row in M):
                raise InputError(f"degree-{r} matrix is not square")
            if M and determinant(M) == 0:
                raise InputError(f"degree-{r} matrix is singular; a diffeomorphism acts invertibly")

    @property
    def betti(self) -> list:
        return [len(M) for M in self.matrices]

    def check_betti(self, betti) -> None:
        if list(betti) != self.betti:
            raise InputError(f"matrix sizes {self.betti} do not match Betti vector {list(betti)}")

    @classmethod
    def from_linear_map(cls, A: Matrix, name: str = "") -> "GradedIntegerMap":
        """Pullback on ``Lambda^r Z^n`` for the linear map ``x -> A x``."""
        At = transpose(_as_int_matrix(A))
        return cls([exterior_power(At, r) for r in range(len(At) + 1)], name)


T4_ROTATION = [[0, 1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, 1], [0, 0, -1, 0]]
# J on 1-forms of the flat torus: transpose of J d1 = d2, J d3 = -d4
T4_J_ON_FORMS = [[0, 1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]]


def induced_map_t4_rotation() -> GradedIntegerMap:
    return GradedIntegerMap.from_linear_map(T4_ROTATION, "psi*")


@dataclass
class MappingTorusCohomology:
    kernel_dims: list      # dim N^r
    cokernel_dims: list    # dim C^r tensor Q
    cokernel_torsion: list  # torsion invariants of C^r
    betti: list            # b_r of the mapping torus, r = 0..d+1

    @property
    def euler_characteristic(self) -> int:
        return sum((-1) ** r * b for r, b in enumerate(self.betti))


def mapping_torus_cohomology(psi: GradedIntegerMap) -> MappingTorusCohomology:
    """``H^r = N^r + C^{r-1}`` with ``N^r = ker(psi_r - 1)``, ``C^r = coker(psi_r - 1)``."""
    N, C, T = [], [], []
    for M in psi.matrices:
        if not M:
            N.append(0)
            C.append(0)
            T.append([])
            continue
        snf = smith_normal_form(subtract_identity(M))
        N.append(len(M) - snf.rank)
        C.append(len(M) - snf.rank)
        T.append(snf.torsion)
    d = len(psi.matrices) - 1
    betti = [(N[r] if r <= d else 0) + (C[r - 1] if r >= 1 else 0) for r in range(d + 2)]
    return MappingTorusCohomology(N, C, T, betti)


def kunneth_with_s3(betti) -> list:
    """``b_r(M x S^3) = b_r(M) + b_{r-3}(M)``."""
    b = list(betti)
    out = [0] * (len(b) + 3)
    for r, x in enumerate(b):
        out[r] += x
        out[r + 3] += x
    return out


def product_with_s3_identity(psi: GradedIntegerMap) -> GradedIntegerMap:
    """``psi x Id`` on ``H^r(K x S^3) = H^r(K) + H^{r-3}(K)`` as block matrices."""
    d = len(psi.matrices) - 1
    mats = []
    for r in range(d + 4):
        a = psi.matrices[r] if r <= d else []
        b = psi.matrices[r - 3] if 0 <= r - 3 <= d else []
        n = len(a) + len(b)
        M = [[0] * n for _ in range(n)]
        for i in range(len(a)):
            M[i][: len(a)] = a[i]
        for i in range(len(b)):
            M[len(a) + i][len(a):] = b[i]
        mats.append(M)
    return GradedIntegerMap(mats, f"{psi.name}xId")


def poincare_symmetric(betti) -> bool:
    return list(betti) == list(reversed(betti))


@dataclass
class ParityVerdict:
    kernel_dim: int
    b1: int

    @property
    def kernel_even(self) -> bool:
        return self.kernel_dim % 2 == 0

    @property
    def b1_odd(self) -> bool:
        return self.b1 % 2 == 1


def parity_check_b1(psi1, Jmat) -> ParityVerdict:
    """``dim ker(psi1 - 1)`` and ``b_1 = dim N^1 + 1`` under ``J^2 = -1`` and ``psi1 J = J psi1``.

    Refuses to run when the hypotheses fail.
    """
    psi1 = _as_int_matrix(psi1, "psi_1")
    Jmat = _as_int_matrix(Jmat, "J-matrix")
    n = len(psi1)
    if len(Jmat) != n:
        raise PreconditionError("J-matrix and psi_1 have different sizes")
    if matmul(Jmat, Jmat) != [[-x for x in row] for row in identity(n)]:
        raise PreconditionError("J-matrix does not square to -1")
    if matmul(psi1, Jmat) != matmul(Jmat, psi1):
        raise PreconditionError("psi_1 does not commute with the J-matrix")
    k = kernel_dim(subtract_identity(psi1))
    return ParityVerdict(k, k + 1)


def k3_fixed_space(A) -> int:
    """``dim ker(A - 1)`` for a non-identity 22 x 22 integer matrix."""
    A = _as_int_matrix(A, "K3 isometry")
    if len(A) != 22 or any(len(r) != 22 for r in A):
        raise InputError("K3 lattice matrices are 22 x 22")
    if A == identity(22):
        raise PreconditionError("the matrix is the identity; the fixed-space bound needs psi* != Id")
    return kernel_dim(subtract_identity(A))


# Hodge tables and Borel E2 ---------------------------------------------------------------

@dataclass
class HodgeTable:
    numbers: dict          # (p, q) -> h^{p,q}
    complex_dim: int
    name: str = ""
    source: str = ""

    def __post_init__(self):
        for (p, q), h in self.numbers.items():
            if not (0 <= p <= self.complex_dim and 0 <= q <= self.complex_dim):
                raise InputError(f"Hodge number h^{p},{q} outside 0..{self.complex_dim}")
            if h < 0:
                raise InputError(f"Hodge number h^{p},{q} is negative")

    def h(self, p: int, q: int) -> int:
        return self.numbers.get((p, q), 0)

    @classmethod
    def from_json(cls, data: dict, name: str = "") -> "HodgeTable":
        try:
            dim = int(data["complex_dim"])
            raw = data["hodge"]
        except (KeyError, TypeError, ValueError):
            raise InputError("Hodge table needs 'complex_dim' and 'hodge'") from None
        numbers = {}
        for key, val in raw.items():
            try:
                p, q = (int(s) for s in key.split(","))
                numbers[(p, q)] = int(val)
            except ValueError:
                raise InputError(f"bad Hodge entry {key!r}: {val!r}") from None
        return cls(numbers, dim, data.get("name", name), data.get("_source", ""))

    @classmethod
    def point(cls) -> "HodgeTable":
        return cls({(0, 0): 1}, 0, "point")


def borel_e2(base: HodgeTable, fiber: HodgeTable, p: int, q: int, u: int, v: int) -> int:
    """``sum_k h^{k, u-k}(B) h^{p-k, q-u+k}(F)``; zero off ``p + q = u + v`` or for negative indices."""
    if min(p, q, u, v) < 0 or p + q != u + v:
        return 0
    return sum(base.h(k, u - k) * fiber.h(p - k, q - u + k) for k in range(0, u + 1))


def borel_window(base: HodgeTable, fiber: HodgeTable, prange, qrange) -> dict:
    """All nonzero ``E2`` entries with ``p, q`` in the given ranges."""
    out = {}
    for p in prange:
        for q in qrange:
            for u in range(0, p + q + 1):
                val = borel_e2(base, fiber, p, q, u, p + q - u)
                if val:
                    out[(p, q, u, p + q - u)] = val
    return out


DATA_DIR = Path(__file__).resolve().parent / "data"


def load_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise InputError(f"file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from None


def load_hodge(ref, relative_to=None) -> HodgeTable:
    """A Hodge table from an inline dict or a file path (relative paths resolve
    against ``relative_to`` and then the bundled data directory)."""
    if isinstance(ref, dict):
        return HodgeTable.from_json(ref)
    if not isinstance(ref, str):
        raise InputError(f"Hodge table reference must be a path or a table, got {ref!r}")
    candidates = [Path(ref)]
    if relative_to is not None:
        candidates.insert(0, Path(relative_to).parent / ref)
    candidates.append(DATA_DIR / ref)
    for c in candidates:
        if c.exists():
            return HodgeTable.from_json(load_json(c), c.stem)
    raise InputError(f"Hodge table not found: {ref}")


@dataclass
class CohomologyJob:
    betti: list
    psi: GradedIntegerMap
    j_matrix: Matrix | None = None
    k3_matrix: Matrix | None = None
    name: str = ""


def load_cohomology_job(path) -> CohomologyJob:
    data = load_json(path)
    if not isinstance(data, dict):
        raise InputError("cohomology job must be a JSON object")
    for key in ("betti", "psi"):
        if key not in data:
            raise InputError(f"cohomology job: missing field '{key}'")
    psi = GradedIntegerMap(data["psi"], data.get("name", ""))
    psi.check_betti(data["betti"])
    return CohomologyJob(list(data["betti"]), psi, data.get("j_matrix"), data.get("k3_matrix"),
                         data.get("name", Path(path).stem))
