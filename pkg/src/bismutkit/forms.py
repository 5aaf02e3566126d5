"""Pointwise exterior calculus on coordinate charts.

Every field here is lazy: it is a rule ``(point, order) -> Jet`` evaluated on
demand. ``order`` is the jet order used to seed the chart coordinates; each
derivative taken downstream costs one order, so a field built with two nested
exterior derivatives and evaluated at seed order 3 comes back at order 1.

Differential forms are stored by strictly increasing index tuples in
lexicographic order; :meth:`DifferentialForm.tensor` expands them to the full
antisymmetric array with the determinant convention
``(dx_1 ^ dx_2)(d_1, d_2) = 1``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations, permutations
from math import comb
from typing import Callable, Mapping

import numpy as np

from .errors import ChartMismatchError, DegreeError, ExcludedLocusError, NumericalAbort
from .jets import MAX_ORDER, Jet, jeinsum, jet_space


# charts and points --------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Chart:
    """A real coordinate chart, optionally with an excluded locus.

    ``locus`` maps a coordinate array ``(dim, *batch)`` to an array that must be
    strictly positive at admitted points. ``sampler(rng, count)`` returns
    admitted coordinates of shape ``(dim, count)``.
    """

    name: str
    dim: int
    locus: Callable[[np.ndarray], np.ndarray] | None = None
    sampler: Callable[[np.random.Generator, int], np.ndarray] | None = None
    labels: tuple = ()

    def __repr__(self):
        return f"Chart({self.name!r}, dim={self.dim})"

    def point(self, coords) -> "ChartPoint":
        return ChartPoint(self, np.asarray(coords, dtype=float))

    def sample(self, count: int, seed: int = 0) -> "ChartPoint":
        """A batch of ``count`` seeded points (coordinates shape ``(dim, count)``)."""
        rng = np.random.default_rng(seed)
        if self.sampler is None:
            coords = rng.uniform(-1.0, 1.0, size=(self.dim, count))
        else:
            coords = self.sampler(rng, count)
        return ChartPoint(self, coords)

    def product(self, other: "Chart", name: str | None = None) -> "Chart":
        """Cartesian product chart; loci and samplers combine componentwise."""
        n1 = self.dim

        def locus(x):
            out = np.ones(x.shape[1:])
            if self.locus is not None:
                out = np.minimum(out, self.locus(x[:n1]))
            if other.locus is not None:
                out = np.minimum(out, other.locus(x[n1:]))
            return out

        def sampler(rng, count):
            a = self.sample(count, int(rng.integers(2**31))).coords
            b = other.sample(count, int(rng.integers(2**31))).coords
            return np.concatenate([a, b], axis=0)

        has_locus = self.locus is not None or other.locus is not None
        return Chart(
            name or f"{self.name}x{other.name}",
            self.dim + other.dim,
            locus if has_locus else None,
            sampler,
            tuple(self.labels) + tuple(other.labels),
        )


@dataclass(frozen=True, eq=False)
class ChartPoint:
    """Coordinates of one point (shape ``(dim,)``) or a batch (``(dim, *batch)``)."""

    chart: Chart
    coords: np.ndarray

    def __post_init__(self):
        if self.coords.shape[:1] != (self.chart.dim,):
            raise ValueError(
                f"chart {self.chart.name!r} has dimension {self.chart.dim}, "
                f"got coordinates of shape {self.coords.shape}"
            )
        if not np.all(np.isfinite(self.coords)):
            raise NumericalAbort(f"non-finite coordinates on chart {self.chart.name!r}")
        if self.chart.locus is not None:
            bad = ~(self.chart.locus(self.coords) > 0)
            if np.any(bad):
                raise ExcludedLocusError(
                    f"point(s) on the excluded locus of chart {self.chart.name!r}"
                )

    @property
    def batch_shape(self):
        return self.coords.shape[1:]

    def jet(self, order: int = MAX_ORDER) -> Jet:
        return Jet.variables(jet_space(self.chart.dim), self.coords, order)

    def split(self):
        """Iterate over the individual points of a batch."""
        flat = self.coords.reshape(self.chart.dim, -1)
        for k in range(flat.shape[1]):
            yield ChartPoint(self.chart, flat[:, k])


def _check_finite(jet: Jet, what: str, p: ChartPoint) -> Jet:
    if not jet.is_finite():
        raise NumericalAbort(f"{what} is not finite at a point of chart {p.chart.name!r}")
    return jet


def _same_chart(what: str, a: Chart, b: Chart):
    if a is not b:
        raise ChartMismatchError(what, a.name, b.name)


# fields -------------------------------------------------------------------------------

class TensorField:
    """A tensor field of type ``(contra, co)``; values have shape ``(dim,) * (contra + co)``.

    Contravariant indices come first. A ``(1, 1)`` field ``A`` has ``A[a, b] = A^a_b``.
    """

    def __init__(self, chart: Chart, rank: tuple[int, int], rule, name: str = ""):
        self.chart = chart
        self.rank = tuple(rank)
        self._rule = rule
        self.name = name

    @classmethod
    def from_coordinates(cls, chart, rank, fn, name=""):
        """Build from ``fn(x)``, where ``x`` is the jet of the chart coordinates."""
        return cls(chart, rank, lambda p, order: fn(p.jet(order)), name)

    @classmethod
    def constant(cls, chart, rank, array, name=""):
        array = np.asarray(array, dtype=float)
        return cls.from_coordinates(chart, rank, lambda x: x.constant(array), name)

    def evaluate(self, p: ChartPoint, order: int = MAX_ORDER) -> Jet:
        _same_chart(f"evaluating {self.name or 'tensor field'}", self.chart, p.chart)
        return _check_finite(self._rule(p, order), self.name or "tensor field", p)

    def __call__(self, p, order=MAX_ORDER):
        return self.evaluate(p, order)


class ScalarField(TensorField):
    def __init__(self, chart, rule, name=""):
        super().__init__(chart, (0, 0), rule, name)

    @classmethod
    def from_coordinates(cls, chart, fn, name=""):
        return cls(chart, lambda p, order: fn(p.jet(order)), name)


class VectorField(TensorField):
    def __init__(self, chart, rule, name=""):
        super().__init__(chart, (1, 0), rule, name)

    @classmethod
    def from_coordinates(cls, chart, fn, name=""):
        return cls(chart, lambda p, order: fn(p.jet(order)), name)

    @classmethod
    def coordinate(cls, chart, i: int):
        e = np.zeros(chart.dim)
        e[i] = 1.0
        return cls.from_coordinates(chart, lambda x: x.constant(e), name=f"d/dx{i}")


# combinatorial tables -----------------------------------------------------------------

@lru_cache(maxsize=None)
def basis(n: int, k: int) -> tuple:
    return tuple(combinations(range(n), k))


@lru_cache(maxsize=None)
def _basis_index(n: int, k: int) -> dict:
    return {c: i for i, c in enumerate(basis(n, k))}


def _sort_sign(seq) -> tuple[int, tuple]:
    """Sign of the permutation sorting ``seq`` (0 if an index repeats) and the sorted tuple."""
    seq = list(seq)
    if len(set(seq)) < len(seq):
        return 0, tuple(sorted(seq))
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign, tuple(sorted(seq))


@lru_cache(maxsize=None)
def _expand_table(n: int, k: int):
    """Flat positions in ``n**k`` and signs for expanding components to a full tensor."""
    pos, src, sgn = [], [], []
    for ci, c in enumerate(basis(n, k)):
        for perm in permutations(range(k)):
            idx = tuple(c[p] for p in perm)
            s, _ = _sort_sign(idx)
            pos.append(int(np.ravel_multi_index(idx, (n,) * k)) if k else 0)
            src.append(ci)
            sgn.append(s)
    return np.array(pos, dtype=int), np.array(src, dtype=int), np.array(sgn, dtype=float)


@lru_cache(maxsize=None)
def _d_table(n: int, k: int):
    """Rows ``(out, var, src, sign)`` for the exterior derivative of a k-form."""
    out, var, src, sgn = [], [], [], []
    idx_k = _basis_index(n, k)
    for oi, c in enumerate(basis(n, k + 1)):
        for j, i in enumerate(c):
            rest = c[:j] + c[j + 1:]
            out.append(oi)
            var.append(i)
            src.append(idx_k[rest])
            sgn.append((-1) ** j)
    return (np.array(out, dtype=int), np.array(var, dtype=int), np.array(src, dtype=int),
            np.array(sgn, dtype=float))


@lru_cache(maxsize=None)
def _wedge_table(n: int, k: int, l: int):
    out, ia, ib, sgn = [], [], [], []
    idx = _basis_index(n, k + l)
    for ai, a in enumerate(basis(n, k)):
        for bi, b in enumerate(basis(n, l)):
            s, merged = _sort_sign(a + b)
            if s:
                out.append(idx[merged])
                ia.append(ai)
                ib.append(bi)
                sgn.append(s)
    return tuple(np.array(a, dtype=int if t < 3 else float) for t, a in enumerate((out, ia, ib, sgn)))


@lru_cache(maxsize=None)
def _interior_table(n: int, k: int):
    out, var, src, sgn = [], [], [], []
    idx = _basis_index(n, k)
    for oi, c in enumerate(basis(n, k - 1)):
        for i in range(n):
            if i in c:
                continue
            s, merged = _sort_sign((i,) + c)
            out.append(oi)
            var.append(i)
            src.append(idx[merged])
            sgn.append(s)
    return tuple(np.array(a) for a in (out, var, src, sgn))


def _scatter(size: int, rows: np.ndarray, vals: Jet) -> Jet:
    c = np.zeros((size,) + vals.c.shape[1:])
    np.add.at(c, rows, vals.c)
    return Jet(vals.space, c, vals.order)


def components_to_tensor(comps: Jet, n: int, k: int) -> Jet:
    """Expand increasing-index components ``(C(n,k), ...)`` to a full antisymmetric tensor."""
    if k == 0:
        return comps[0]
    pos, src, sgn = _expand_table(n, k)
    rest = comps.c.shape[1:]
    flat = np.zeros((n**k,) + rest)
    flat[pos] = comps.c[src] * sgn.reshape((-1,) + (1,) * len(rest))
    return Jet(comps.space, flat.reshape((n,) * k + rest), comps.order)


def tensor_to_components(t: Jet, n: int, k: int) -> Jet:
    """Read off increasing-index components of an antisymmetric ``k``-tensor."""
    if k == 0:
        return Jet(t.space, t.c[None], t.order)
    rest = t.c.shape[k:]
    flat = t.c.reshape((n**k,) + rest)
    pos = [int(np.ravel_multi_index(c, (n,) * k)) for c in basis(n, k)]
    return Jet(t.space, flat[pos], t.order)


# differential forms -------------------------------------------------------------------

class DifferentialForm:
    """A k-form on a chart, evaluated lazily to its increasing-index components."""

    def __init__(self, chart: Chart, degree: int, rule, name: str = ""):
        if not 0 <= degree <= chart.dim:
            raise DegreeError(f"degree {degree} out of range for chart of dimension {chart.dim}")
        self.chart = chart
        self.degree = degree
        self._rule = rule
        self.name = name

    @property
    def dim(self) -> int:
        return self.chart.dim

    @classmethod
    def from_components(cls, chart: Chart, degree: int, components: Mapping, name: str = ""):
        """Build from ``{increasing tuple: coefficient}``.

        Coefficients may be numbers, :class:`ScalarField` objects or callables of
        the coordinate jet. Tuples that are not increasing are sorted with sign.
        """
        n = chart.dim
        idx = _basis_index(n, degree)
        entries = []
        for key, coef in components.items():
            s, key_sorted = _sort_sign(tuple(key))
            if s == 0:
                continue
            entries.append((idx[key_sorted], s, coef))

        def rule(p, order):
            x = p.jet(order)
            zero = x.constant(0.0) if p.batch_shape else Jet.from_value(x.space, 0.0, order)
            comps = [zero] * comb(n, degree)
            for i, s, coef in entries:
                if isinstance(coef, TensorField):
                    val = coef.evaluate(p, order)
                elif callable(coef):
                    val = coef(x)
                else:
                    val = x.constant(float(coef)) if p.batch_shape else Jet.from_value(x.space, float(coef), order)
                comps[i] = comps[i] + s * val
            return Jet.stack(comps)

        return cls(chart, degree, rule, name)

    @classmethod
    def from_tensor_rule(cls, chart, degree, tensor_rule, name=""):
        """Build from a rule returning the full antisymmetric tensor."""
        n = chart.dim
        return cls(chart, degree, lambda p, order: tensor_to_components(tensor_rule(p, order), n, degree), name)

    def evaluate(self, p: ChartPoint, order: int = MAX_ORDER) -> Jet:
        """Increasing-index components, shape ``(C(n, k), *batch)``."""
        _same_chart(f"evaluating {self.name or 'form'}", self.chart, p.chart)
        return _check_finite(self._rule(p, order), self.name or "form", p)

    def tensor(self, p: ChartPoint, order: int = MAX_ORDER) -> Jet:
        """Full antisymmetric component array ``(n,) * k``."""
        return components_to_tensor(self.evaluate(p, order), self.dim, self.degree)

    def component(self, idx) -> ScalarField:
        s, key = _sort_sign(tuple(idx))
        pos = _basis_index(self.dim, self.degree).get(key)
        return ScalarField(self.chart, lambda p, order: self.evaluate(p, order)[pos] * s, f"{self.name}{idx}")

    def on(self, p: ChartPoint, *vectors) -> np.ndarray:
        """Value of the form on numeric tangent vectors at ``p``."""
        if len(vectors) != self.degree:
            raise DegreeError(f"{self.degree}-form evaluated on {len(vectors)} vectors")
        t = self.tensor(p, 0).value
        for v in vectors:
            t = np.tensordot(np.asarray(v, dtype=float), t, axes=(0, 0))
        return t

    # algebra
    def __add__(self, other):
        _same_chart("adding forms", self.chart, other.chart)
        if other.degree != self.degree:
            raise DegreeError("cannot add forms of different degree")
        return DifferentialForm(self.chart, self.degree,
                                lambda p, o: self.evaluate(p, o) + other.evaluate(p, o))

    def __neg__(self):
        return DifferentialForm(self.chart, self.degree, lambda p, o: -self.evaluate(p, o), self.name)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, factor: float) -> "DifferentialForm":
        return DifferentialForm(self.chart, self.degree, lambda p, o: self.evaluate(p, o) * factor)

    def __repr__(self):
        return f"DifferentialForm({self.name or '?'}, degree={self.degree}, chart={self.chart.name!r})"


def wedge(a: DifferentialForm, b: DifferentialForm) -> DifferentialForm:
    """Exterior product ``a ^ b``."""
    _same_chart("wedge", a.chart, b.chart)
    n, k, l = a.dim, a.degree, b.degree
    if k + l > n:
        raise DegreeError(f"wedge of degrees {k} and {l} exceeds chart dimension {n}")
    out, ia, ib, sgn = _wedge_table(n, k, l)

    def rule(p, order):
        A, B = a.evaluate(p, order), b.evaluate(p, order)
        vals = A[ia] * B[ib]
        vals = vals * sgn.reshape((-1,) + (1,) * (vals.c.ndim - 2))
        return _scatter(comb(n, k + l), out, vals)

    return DifferentialForm(a.chart, k + l, rule, f"({a.name}^{b.name})")


def exterior_derivative(a: DifferentialForm) -> DifferentialForm:
    """``(da)_{i0..ik} = sum_j (-1)^j d_{i_j} a_{i0..^i_j..ik}``."""
    n, k = a.dim, a.degree
    if k >= n:
        return DifferentialForm(a.chart, n, lambda p, o: a.evaluate(p, o).partial(0) * 0.0)
    out, var, src, sgn = _d_table(n, k)

    def rule(p, order):
        grad = a.evaluate(p, order).gradient()  # (n, C(n,k), *batch)
        vals = Jet(grad.space, grad.c[var, src], grad.order)
        vals = vals * sgn.reshape((-1,) + (1,) * (vals.c.ndim - 2)).astype(float)
        return _scatter(comb(n, k + 1), out, vals)

    return DifferentialForm(a.chart, k + 1, rule, f"d{a.name}")


def interior_product(X: VectorField, a: DifferentialForm) -> DifferentialForm:
    """``(i_X a)(v2, ..., vk) = a(X, v2, ..., vk)``."""
    _same_chart("interior product", X.chart, a.chart)
    if a.degree == 0:
        raise DegreeError("interior product of a 0-form is undefined")
    n, k = a.dim, a.degree
    out, var, src, sgn = _interior_table(n, k)

    def rule(p, order):
        A, V = a.evaluate(p, order), X.evaluate(p, order)
        vals = V[var] * A[src]
        vals = vals * sgn.reshape((-1,) + (1,) * (vals.c.ndim - 2)).astype(float)
        return _scatter(comb(n, k - 1), out, vals)

    return DifferentialForm(a.chart, k - 1, rule, f"i_{X.name}{a.name}")


def lie_bracket(X: VectorField, Y: VectorField) -> VectorField:
    """``[X, Y]^i = X^j d_j Y^i - Y^j d_j X^i``."""
    _same_chart("Lie bracket", X.chart, Y.chart)

    def rule(p, order):
        x, y = X.evaluate(p, order), Y.evaluate(p, order)
        return bracket_jets(x, y)

    return VectorField(X.chart, rule, f"[{X.name},{Y.name}]")


def bracket_jets(x: Jet, y: Jet) -> Jet:
    """Lie bracket of vector-valued jets of shape ``(n, *rest)``."""
    dx, dy = x.gradient(), y.gradient()  # (j, i, ...)
    return jeinsum("j,ji->i", x, dy) - jeinsum("j,ji->i", y, dx)


# smooth maps and pullback -------------------------------------------------------------

class SmoothMap:
    """A smooth map between charts given by a rule on coordinate jets."""

    def __init__(self, source: Chart, target: Chart, fn, name: str = ""):
        self.source = source
        self.target = target
        self._fn = fn
        self.name = name

    def evaluate(self, p: ChartPoint, order: int = MAX_ORDER) -> tuple[ChartPoint, Jet]:
        """Image point and the jet of the target coordinates (order-0 part = image)."""
        _same_chart(f"evaluating map {self.name}", self.source, p.chart)
        jet = _check_finite(self._jet(p.jet(order)), f"map {self.name}", p)
        return ChartPoint(self.target, jet.value), jet

    def _jet(self, x: Jet) -> Jet:
        out = self._fn(x)
        if out.shape[0] != self.target.dim:
            raise ValueError(f"map {self.name} returned {out.shape[0]} components")
        return out

    def jacobian(self, p: ChartPoint) -> np.ndarray:
        """``J[a, i] = d f^a / d x^i`` (batch axes last)."""
        _, jet = self.evaluate(p, 1)
        return np.moveaxis(jet.gradient().value, 0, 1)

    def __matmul__(self, inner: "SmoothMap") -> "SmoothMap":
        """Composition ``self o inner`` by forward-mode chaining."""
        _same_chart("composing maps", inner.target, self.source)
        return SmoothMap(inner.source, self.target, lambda x: self._fn(inner._fn(x)),
                         f"{self.name}o{inner.name}")

    @classmethod
    def identity(cls, chart: Chart) -> "SmoothMap":
        return cls(chart, chart, lambda x: x, "id")

    @classmethod
    def linear(cls, source: Chart, target: Chart, matrix, offset=None, name=""):
        matrix = np.asarray(matrix, dtype=float)
        offset = np.zeros(target.dim) if offset is None else np.asarray(offset, dtype=float)

        return cls(source, target, lambda x: _affine(matrix, offset, x), name)


def _affine(matrix, offset, x: Jet) -> Jet:
    y = jeinsum("ai,i->a", matrix, x)
    nb = x.c.ndim - 2
    return y + offset.reshape(offset.shape + (1,) * nb)


def _pull_indices(A: Jet, jac: Jet, k: int) -> Jet:
    """Contract each of the first ``k`` axes of ``A`` with ``jac[a, i]``."""
    if A.order == 0 and jac.order == 0 and k > 0:
        # plain values: batched matmul is far faster than broadcasting einsum
        vals, jv = A.c[..., 0], jac.c[..., 0]
        n, m = jv.shape[:2]
        batch = np.broadcast_shapes(vals.shape[k:], jv.shape[2:])
        nb = len(batch)
        vals = np.broadcast_to(vals, vals.shape[:k] + batch)
        T = np.moveaxis(vals, tuple(range(k)), tuple(range(nb, nb + k)))
        Jb = np.moveaxis(np.broadcast_to(jv, (n, m) + batch), (0, 1), (-2, -1))
        for _ in range(k):
            shp = T.shape
            out = np.matmul(T.reshape(shp[:nb] + (-1, shp[-1])), Jb)
            T = np.moveaxis(out.reshape(shp[:-1] + (m,)), -1, nb)
        T = np.moveaxis(T, tuple(range(nb, nb + k)), tuple(range(k)))
        return Jet(A.space, T[..., None].copy(), 0)
    letters, outs = "abcdefgh"[:k], "pqrstuvw"[:k]
    t = A
    for s in range(k):
        cur = outs[:s] + letters[s:]
        new = outs[: s + 1] + letters[s + 1:]
        t = jeinsum(f"{cur},{letters[s]}{outs[s]}->{new}", t, jac)
    return t


def pullback(f: SmoothMap, a: DifferentialForm) -> DifferentialForm:
    """``(f* a)(v1..vk) = a(df v1, ..., df vk)`` via Taylor composition of jets."""
    _same_chart(f"pullback along {f.name}", f.target, a.chart)
    n, m, k = f.target.dim, f.source.dim, a.degree

    def rule(p, order):
        q, F = f.evaluate(p, order)
        A = a.tensor(q, order)
        A = A.compose(F)
        if k == 0:
            return Jet(A.space, A.c[None], A.order)
        jac = F.gradient()  # jac[i, a] = d F^a / d x^i
        jac = Jet(jac.space, np.swapaxes(jac.c, 0, 1), jac.order)  # (a, i)
        return tensor_to_components(_pull_indices(A, jac, k), m, k)

    return DifferentialForm(f.source, k, rule, f"{f.name}*{a.name}")


def pullback_covariant(f: SmoothMap, T: TensorField) -> TensorField:
    """Pullback of a covariant tensor field of type ``(0, s)``."""
    _same_chart(f"pullback along {f.name}", f.target, T.chart)
    if T.rank[0] != 0:
        raise DegreeError("only covariant tensors can be pulled back")
    s = T.rank[1]

    def rule(p, order):
        q, F = f.evaluate(p, order)
        A = T.evaluate(q, order).compose(F)
        jac = F.gradient()
        jac = Jet(jac.space, np.swapaxes(jac.c, 0, 1), jac.order)
        return _pull_indices(A, jac, s)

    return TensorField(f.source, (0, s), rule, f"{f.name}*{T.name}")
