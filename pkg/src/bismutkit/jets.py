"""Truncated multivariate Taylor arithmetic (forward-mode AD up to order 3).

A :class:`Jet` stores Taylor coefficients ``c[alpha] = d^alpha f / alpha!``
over a dense, degree-graded list of multi-indices. Because the list is graded,
a jet that is only valid to order ``o`` keeps just the first ``M_o``
coefficients, so differentiating shrinks the storage.

Coefficient arrays have shape ``(*tensor_axes, *batch_axes, M_o)``. Tensor
axes are always addressed from the front and the jet axis is always last, so
numpy broadcasting lines batches of points up with each other while scalar
jets broadcast across tensor axes. Constants meant to mix with batched jets
carry singleton batch axes (see :meth:`Jet.constant`).
"""
from __future__ import annotations

import math
from functools import lru_cache
from itertools import combinations_with_replacement

import numpy as np

from .errors import JetOrderError

MAX_ORDER = 3
MAX_DIM = 12


class JetSpace:
    """Multi-index bookkeeping for jets in ``dim`` variables up to ``max_order``."""

    def __init__(self, dim: int, max_order: int = MAX_ORDER):
        if not 1 <= dim <= MAX_DIM:
            raise ValueError(f"jet dimension must be in 1..{MAX_DIM}, got {dim}")
        self.dim = dim
        self.max_order = max_order
        alphas = []
        for deg in range(max_order + 1):
            for combo in combinations_with_replacement(range(dim), deg):
                alpha = [0] * dim
                for i in combo:
                    alpha[i] += 1
                alphas.append(tuple(alpha))
        self.alphas = alphas
        self.index = {a: k for k, a in enumerate(alphas)}
        self.degree = np.array([sum(a) for a in alphas])
        self.alpha_factorial = np.array(
            [math.prod(math.factorial(x) for x in a) for a in alphas], dtype=float
        )
        # size[o] = number of coefficients of a jet valid to order o
        self.size = [int(np.sum(self.degree <= o)) for o in range(max_order + 1)]
        self._products = {}
        self._derivs = {}

    def __repr__(self):
        return f"JetSpace(dim={self.dim}, max_order={self.max_order})"

    def product_table(self, order: int):
        """Gather indices ``(I, J)`` and scatter matrix ``S`` for products at ``order``."""
        if order not in self._products:
            m = self.size[order]
            rows_i, rows_j, rows_k = [], [], []
            for a in range(m):
                for b in range(m):
                    if self.degree[a] + self.degree[b] <= order:
                        s = tuple(x + y for x, y in zip(self.alphas[a], self.alphas[b]))
                        rows_i.append(a)
                        rows_j.append(b)
                        rows_k.append(self.index[s])
            scatter = np.zeros((len(rows_k), m))
            scatter[np.arange(len(rows_k)), rows_k] = 1.0
            self._products[order] = (np.array(rows_i), np.array(rows_j), scatter)
        return self._products[order]

    def derivative_table(self, order: int):
        """Source indices and factors mapping an order-``order`` jet to its partials."""
        if order < 1:
            raise JetOrderError("cannot differentiate an order-0 jet")
        if order not in self._derivs:
            m = self.size[order - 1]
            src = np.zeros((self.dim, m), dtype=int)
            fac = np.zeros((self.dim, m))
            for t in range(m):
                alpha = self.alphas[t]
                for i in range(self.dim):
                    up = list(alpha)
                    up[i] += 1
                    src[i, t] = self.index[tuple(up)]
                    fac[i, t] = alpha[i] + 1
            self._derivs[order] = (src, fac)
        return self._derivs[order]


@lru_cache(maxsize=None)
def jet_space(dim: int, max_order: int = MAX_ORDER) -> JetSpace:
    return JetSpace(dim, max_order)


def _is_jet(x) -> bool:
    return isinstance(x, Jet)


class Jet:
    """A (possibly tensor- and batch-shaped) array of truncated Taylor series."""

    __slots__ = ("space", "c", "order")
    __array_priority__ = 1000

    def __init__(self, space: JetSpace, c: np.ndarray, order: int):
        if c.shape[-1] != space.size[order]:
            raise ValueError(
                f"coefficient axis has length {c.shape[-1]}, expected {space.size[order]}"
            )
        self.space = space
        self.c = c
        self.order = order

    # construction -----------------------------------------------------------------
    @classmethod
    def variables(cls, space: JetSpace, coords, order: int = MAX_ORDER) -> "Jet":
        """Seed the coordinate functions at ``coords`` (shape ``(dim,)`` or ``(dim, *batch)``)."""
        coords = np.asarray(coords, dtype=float)
        if coords.shape[0] != space.dim:
            raise ValueError(f"expected {space.dim} coordinates, got {coords.shape[0]}")
        c = np.zeros(coords.shape + (space.size[order],))
        c[..., 0] = coords
        if order >= 1:
            for i in range(space.dim):
                c[i, ..., 1 + i] = 1.0
        return cls(space, c, order)

    @classmethod
    def from_value(cls, space: JetSpace, value, order: int = MAX_ORDER) -> "Jet":
        """A jet with the given value and vanishing derivatives (shape taken verbatim)."""
        value = np.asarray(value, dtype=float)
        c = np.zeros(value.shape + (space.size[order],))
        c[..., 0] = value
        return cls(space, c, order)

    def constant(self, value) -> "Jet":
        """A constant shaped to broadcast against this jet's batch axes.

        ``self`` must be the coordinate jet (shape ``(dim, *batch)``); the
        returned jet has shape ``value.shape + (1,) * len(batch)``.
        """
        value = np.asarray(value, dtype=float)
        nbatch = self.c.ndim - 2
        return Jet.from_value(self.space, value.reshape(value.shape + (1,) * nbatch), self.order)

    @staticmethod
    def stack(items, axis: int = 0) -> "Jet":
        """Stack jets (and plain numbers) along a new leading tensor axis."""
        jets = [x for x in items if _is_jet(x)]
        if not jets:
            raise ValueError("stack needs at least one Jet")
        space = jets[0].space
        order = min(j.order for j in jets)
        m = space.size[order]
        arrays = []
        for x in items:
            if _is_jet(x):
                arrays.append(x.c[..., :m])
            else:
                a = np.zeros((m,))
                a[0] = float(x)
                arrays.append(a)
        arrays = np.broadcast_arrays(*arrays)
        return Jet(space, np.stack(arrays, axis=axis), order)

    # basic accessors ----------------------------------------------------------------
    @property
    def shape(self):
        return self.c.shape[:-1]

    @property
    def value(self) -> np.ndarray:
        return self.c[..., 0]

    def __getitem__(self, key) -> "Jet":
        if not isinstance(key, tuple):
            key = (key,)
        return Jet(self.space, self.c[key + (Ellipsis, slice(None))], self.order)

    def __repr__(self):
        return f"Jet(shape={self.shape}, order={self.order}, dim={self.space.dim})"

    def truncate(self, order: int) -> "Jet":
        if order > self.order:
            raise JetOrderError(f"cannot raise jet order {self.order} to {order}")
        if order == self.order:
            return self
        return Jet(self.space, self.c[..., : self.space.size[order]], order)

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.c)))

    # arithmetic ---------------------------------------------------------------------
    def _coerce(self, other):
        if _is_jet(other):
            if other.space is not self.space:
                raise ValueError("jets live in different jet spaces")
            o = min(self.order, other.order)
            return self.truncate(o), other.truncate(o)
        return self, other

    def __add__(self, other):
        a, b = self._coerce(other)
        if _is_jet(b):
            return Jet(a.space, a.c + b.c, a.order)
        b = np.asarray(b, dtype=float)
        c = a.c + np.zeros(b.shape + (1,))
        c[..., 0] += b
        return Jet(a.space, c, a.order)

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.space, -self.c, self.order)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        a, b = self._coerce(other)
        if not _is_jet(b):
            return Jet(a.space, a.c * np.asarray(b, dtype=float)[..., None], a.order)
        if a.order == 0:
            return Jet(a.space, a.c * b.c, 0)
        rows_i, rows_j, scatter = a.space.product_table(a.order)
        return Jet(a.space, (a.c[..., rows_i] * b.c[..., rows_j]) @ scatter, a.order)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if _is_jet(other):
            return self * other.reciprocal()
        return self * (1.0 / np.asarray(other, dtype=float))

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, k):
        if isinstance(k, (int, np.integer)) and k >= 0:
            out = None
            for _ in range(int(k)):
                out = self if out is None else out * self
            return out if out is not None else self * 0.0 + 1.0
        return self.power(float(k))

    # univariate composition -------------------------------------------------------
    def _univariate(self, derivs) -> "Jet":
        """Compose with a scalar function given its derivatives at the value."""
        h = Jet(self.space, self.c.copy(), self.order)
        h.c[..., 0] = 0.0
        out = Jet.from_value(self.space, derivs[0], self.order)
        hk = None
        for k in range(1, self.order + 1):
            hk = h if hk is None else hk * h
            out = out + hk * (derivs[k] / math.factorial(k))
        return out

    def reciprocal(self) -> "Jet":
        v = self.value
        return self._univariate([1 / v, -1 / v**2, 2 / v**3, -6 / v**4])

    def power(self, r: float) -> "Jet":
        v = self.value
        return self._univariate(
            [v**r, r * v ** (r - 1), r * (r - 1) * v ** (r - 2), r * (r - 1) * (r - 2) * v ** (r - 3)]
        )

    def sqrt(self) -> "Jet":
        return self.power(0.5)

    def exp(self) -> "Jet":
        e = np.exp(self.value)
        return self._univariate([e, e, e, e])

    def log(self) -> "Jet":
        v = self.value
        return self._univariate([np.log(v), 1 / v, -1 / v**2, 2 / v**3])

    def sin(self) -> "Jet":
        s, c = np.sin(self.value), np.cos(self.value)
        return self._univariate([s, c, -s, -c])

    def cos(self) -> "Jet":
        s, c = np.sin(self.value), np.cos(self.value)
        return self._univariate([c, -s, -c, s])

    # differentiation --------------------------------------------------------------
    def partial(self, i: int) -> "Jet":
        """Partial derivative along coordinate ``i``; loses one order."""
        src, fac = self.space.derivative_table(self.order)
        return Jet(self.space, self.c[..., src[i]] * fac[i], self.order - 1)

    def gradient(self) -> "Jet":
        """All first partials, stacked on a new leading axis (derivative index first)."""
        src, fac = self.space.derivative_table(self.order)
        d = self.c[..., src] * fac  # (..., dim, M)
        return Jet(self.space, np.moveaxis(d, -2, 0), self.order - 1)

    def compose(self, inner: "Jet") -> "Jet":
        """Substitute ``inner`` (shape ``(dim_self, *batch)``) for this jet's variables.

        ``self`` is a jet in the target variables around ``inner.value``; the
        result is a jet in ``inner``'s variables. Both must carry the same batch.
        """
        if inner.shape[0] != self.space.dim:
            raise ValueError("inner map has wrong number of components")
        order = min(self.order, inner.order)
        target = self.space
        h = inner.truncate(order)
        h = Jet(h.space, h.c.copy(), order)
        h.c[..., 0] = 0.0
        one = Jet.from_value(h.space, np.ones(h.shape[1:]), order)
        monos = [one]
        for k in range(1, target.size[order]):
            alpha = target.alphas[k]
            i = next(j for j, a in enumerate(alpha) if a)
            lower = list(alpha)
            lower[i] -= 1
            monos.append(monos[target.index[tuple(lower)]] * h[i])
        mono = np.stack([m.c for m in monos], axis=-2)  # (*batch, M_target, M_source)
        coeff = self.c[..., : target.size[order]]
        out = (coeff[..., None, :] @ mono)[..., 0, :]
        return Jet(h.space, out, order)

    def derivative_values(self, k: int) -> np.ndarray:
        """Dense array of k-th partial derivatives (k <= 2), derivative axes last."""
        n = self.space.dim
        if k == 0:
            return self.value
        if k == 1:
            return np.moveaxis(self.gradient().value, 0, -1)
        if k == 2:
            g = self.gradient()
            hess = np.stack([g[i].gradient().value for i in range(n)], axis=0)
            return np.moveaxis(np.moveaxis(hess, 0, -1), 0, -1)
        raise ValueError("only k <= 2 supported")


def jeinsum(spec: str, *operands) -> Jet:
    """``np.einsum`` over tensor axes with truncated Taylor products on the jet axis.

    At most two operands may be jets; the remaining ones must be plain numeric
    arrays without batch axes. Batch axes are matched through an implicit
    ellipsis placed just before the jet axis.
    """
    inputs, output = spec.replace(" ", "").split("->")
    terms = inputs.split(",")
    if len(terms) != len(operands):
        raise ValueError("operand count does not match einsum spec")
    jet_pos = [k for k, x in enumerate(operands) if _is_jet(x)]
    if not jet_pos or len(jet_pos) > 2:
        raise ValueError("jeinsum needs one or two Jet operands")
    new_terms = list(terms)
    arrays = [np.asarray(x, dtype=float) if not _is_jet(x) else None for x in operands]
    if len(jet_pos) == 1:
        (k,) = jet_pos
        jet = operands[k]
        new_terms[k] = terms[k] + "...Z"
        arrays[k] = jet.c
        out = np.einsum(",".join(new_terms) + "->" + output + "...Z", *arrays, optimize=True)
        return Jet(jet.space, out, jet.order)
    a, b = operands[jet_pos[0]], operands[jet_pos[1]]
    a, b = a._coerce(b)
    # a constant operand needs no Taylor product: contract its values directly,
    # preferring one without batch extent so einsum can dispatch to BLAS
    candidates = []
    for k, this, other in ((jet_pos[1], b, a), (jet_pos[0], a, b)):
        if not np.any(this.c[..., 1:]):
            vals = this.c[..., 0]
            rank = len(terms[k])
            candidates.append((not all(s == 1 for s in vals.shape[rank:]), k, vals, rank, other))
    if candidates:
        batched, k, vals, rank, other = min(candidates, key=lambda c: c[0])
        if batched:
            new_terms[k] = terms[k] + "..."
            arrays[k] = vals
        else:
            new_terms[k] = terms[k]
            arrays[k] = vals.reshape(vals.shape[:rank])
        (j,) = [x for x in jet_pos if x != k]
        new_terms[j] = terms[j] + "...Z"
        arrays[j] = other.c
        out = np.einsum(",".join(new_terms) + "->" + output + "...Z", *arrays, optimize=True)
        return Jet(a.space, out, a.order)
    if a.order == 0:
        pa, pb, scatter = a.c, b.c, None
    else:
        rows_i, rows_j, scatter = a.space.product_table(a.order)
        pa, pb = a.c[..., rows_i], b.c[..., rows_j]
    arrays[jet_pos[0]], arrays[jet_pos[1]] = pa, pb
    for k in jet_pos:
        new_terms[k] = terms[k] + "...Z"
    out = np.einsum(",".join(new_terms) + "->" + output + "...Z", *arrays, optimize=True)
    if scatter is not None:
        out = out @ scatter
    return Jet(a.space, out, a.order)


def jet_inverse(a: Jet) -> Jet:
    """Matrix inverse of a square jet matrix ``a[i, j]`` (batch allowed)."""
    v = np.moveaxis(np.moveaxis(a.value, 0, -1), 0, -1)  # (*batch, i, j)
    inv0 = np.linalg.inv(v)
    inv0 = np.moveaxis(np.moveaxis(inv0, -1, 0), -1, 0)  # back to (i, j, *batch)
    b0 = Jet.from_value(a.space, inv0, a.order)
    if a.order == 0:
        return b0
    e = Jet(a.space, a.c.copy(), a.order)
    e.c[..., 0] = 0.0
    x = -jeinsum("ij,jk->ik", b0, e)
    term = b0
    out = b0
    for _ in range(a.order):
        term = jeinsum("ij,jk->ik", x, term)
        out = out + term
    return out
