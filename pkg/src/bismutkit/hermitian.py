"""Hermitian structures, the Gauduchon family of connections and their curvature.

Index conventions (all arrays carry batch axes after the tensor axes):

* ``g[i, j] = g(d_i, d_j)``; ``J[a, b] = J^a_b`` so ``J d_b = J^a_b d_a``.
* ``omega(X, Y) = g(JX, Y)``.
* ``christoffel[k, i, j] = Gamma^k_ij`` with ``nabla_{d_i} d_j = Gamma^k_ij d_k``.
* ``R[i, j, k, w] = g(R(d_i, d_j) d_k, d_w)`` with
  ``R(X, Y) = nabla_X nabla_Y - nabla_Y nabla_X - nabla_[X, Y]``.
* ``d^c a = -(da)(J., ..., J.)`` and ``H = -d^c omega``.

Residuals are reported as the largest absolute coordinate component at each
point.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping
import warnings
from math import comb

import numpy as np

from .errors import ChartMismatchError, DegenerateMetricError, InputError, PreconditionError
from .forms import (
    Chart,
    ChartPoint,
    DifferentialForm,
    TensorField,
    _d_table,
    components_to_tensor,
    exterior_derivative,
    tensor_to_components,
    wedge,
)
from .jets import MAX_ORDER, Jet, jeinsum, jet_inverse

FIRST_DERIVATIVE_TOL = 1e-8
CURVATURE_TOL = 1e-7
STRUCTURE_TOL = 1e-10
KERNEL_RTOL = 1e-8

GAUDUCHON_SAMPLE_T = (-1.0, -0.5, 0.0, 0.5, 1.0)


def pointwise_max(arr: np.ndarray, ntensor: int) -> np.ndarray:
    """Max of ``|arr|`` over the leading ``ntensor`` axes (one value per point)."""
    a = np.abs(np.asarray(arr))
    if ntensor == 0:
        return a
    return a.max(axis=tuple(range(ntensor)))


def _dc_tensor(da: Jet, J: Jet, k1: int) -> Jet:
    """``-(da)(J., ..., J.)`` for a full ``k1``-tensor ``da``."""
    letters, outs = "abcdefgh"[:k1], "pqrstuvw"[:k1]
    t = da
    for s in range(k1):
        cur = outs[:s] + letters[s:]
        new = outs[: s + 1] + letters[s + 1:]
        t = jeinsum(f"{cur},{letters[s]}{outs[s]}->{new}", t, J)
    return -t


class HermitianStructure:
    """A metric ``g`` (type (0,2)) and almost-complex structure ``J`` (type (1,1)) on a chart."""

    def __init__(self, chart: Chart, metric: TensorField, complex_structure: TensorField,
                 name: str = ""):
        for what, f in (("metric", metric), ("complex structure", complex_structure)):
            if f.chart is not chart:
                raise ChartMismatchError(what, chart.name, f.chart.name)
        if metric.rank != (0, 2) or complex_structure.rank != (1, 1):
            raise InputError("metric must be of type (0,2) and J of type (1,1)")
        if chart.dim % 2:
            raise InputError("a Hermitian structure needs an even-dimensional chart")
        self.chart = chart
        self.metric = metric
        self.J = complex_structure
        self.name = name or chart.name

    @property
    def dim(self) -> int:
        return self.chart.dim

    def __repr__(self):
        return f"HermitianStructure({self.name!r}, dim={self.dim})"

    def geometry(self, p: ChartPoint, order: int = MAX_ORDER) -> "PointGeometry":
        if p.chart is not self.chart:
            raise ChartMismatchError("geometry", self.chart.name, p.chart.name)
        return PointGeometry(self, p, order)

    def check_invariants(self, p: ChartPoint, tol: float = STRUCTURE_TOL) -> dict:
        """Verify symmetry, positivity, ``J^2 = -1`` and ``g(J., J.) = g``; raise on failure."""
        g = self.metric.evaluate(p, 0).value
        J = self.J.evaluate(p, 0).value
        n = self.dim
        sym = pointwise_max(g - np.swapaxes(g, 0, 1), 2)
        gb = np.moveaxis(np.moveaxis(g, 0, -1), 0, -1)
        eig = np.linalg.eigvalsh(0.5 * (gb + np.swapaxes(gb, -1, -2)))
        if np.any(~(eig > 0)):
            raise DegenerateMetricError(f"metric of {self.name} is not positive definite at a sampled point")
        jj = np.einsum("ab...,bc...->ac...", J, J) + np.eye(n).reshape((n, n) + (1,) * (J.ndim - 2))
        compat = np.einsum("ai...,bj...,ab...->ij...", J, J, g) - g
        res = {
            "symmetry": float(np.max(sym)),
            "J_squared": float(np.max(pointwise_max(jj, 2))),
            "compatibility": float(np.max(pointwise_max(compat, 2))),
            "min_eigenvalue": float(np.min(eig)),
        }
        for key in ("symmetry", "J_squared", "compatibility"):
            if res[key] > tol:
                raise InputError(f"{self.name}: {key} residual {res[key]:.3e} exceeds {tol:g}")
        return res


class PointGeometry:
    """All jets derived from a Hermitian structure at one point (or batch), computed lazily.

    Each derivative costs one jet order, so with seed order 3 the metric and
    ``J`` are known to order 3, the connection to order 2 and curvature to
    order 1.
    """

    def __init__(self, hs: HermitianStructure, p: ChartPoint, order: int):
        self.hs = hs
        self.point = p
        self.order = order
        self.n = hs.dim
        self.nbatch = len(p.batch_shape)

    # primary fields
    @cached_property
    def g(self) -> Jet:
        return self.hs.metric.evaluate(self.point, self.order)

    @cached_property
    def J(self) -> Jet:
        return self.hs.J.evaluate(self.point, self.order)

    @cached_property
    def ginv(self) -> Jet:
        v = np.moveaxis(np.moveaxis(self.g.value, 0, -1), 0, -1)
        if np.any(~(np.linalg.eigvalsh(0.5 * (v + np.swapaxes(v, -1, -2))) > 0)):
            raise DegenerateMetricError(f"metric of {self.hs.name} is degenerate at a sampled point")
        return jet_inverse(self.g.truncate(max(self.connection_order, 0)))

    @cached_property
    def omega(self) -> Jet:
        """Full tensor ``omega[i, j] = g(J d_i, d_j)``."""
        return jeinsum("ai,aj->ij", self.J, self.g)

    @cached_property
    def domega(self) -> Jet:
        """Full antisymmetric tensor of ``d omega``."""
        comps = tensor_to_components(self.omega, self.n, 2)
        grad = comps.gradient()
        return _d_from_gradient(grad, self.n, 2)

    @cached_property
    def dc_omega(self) -> Jet:
        return _dc_tensor(self.domega, self.J, 3)

    @cached_property
    def H(self) -> Jet:
        """Torsion 3-form ``H = -d^c omega = d omega(J., J., J.)``."""
        return -self.dc_omega

    @cached_property
    def dH(self) -> Jet:
        grad = tensor_to_components(self.H, self.n, 3).gradient()
        return _d_from_gradient(grad, self.n, 3)

    # connections
    @property
    def connection_order(self) -> int:
        """Connections are kept to order 1: enough for curvature values."""
        return min(self.order - 1, 1)

    @cached_property
    def christoffel_lc_lowered(self) -> Jet:
        """``Gamma_{l, ij} = g(nabla_i d_j, d_l)``."""
        dg = self.g.truncate(self.connection_order + 1).gradient()  # dg[i, a, b] = d_i g_ab
        return 0.5 * _permute_sum(dg)

    @cached_property
    def christoffel_lc(self) -> Jet:
        ginv = self.ginv.truncate(self.connection_order)
        return jeinsum("kl,lij->kij", ginv, self.christoffel_lc_lowered)

    def gauduchon_lowered(self, t: float) -> Jet:
        """``g(nabla^t_i d_j, d_l)`` as ``[l, i, j]``."""
        lc = self.christoffel_lc_lowered
        dc = self.dc_omega.truncate(lc.order)
        J = self.J.truncate(lc.order)
        # dc(X, JY, JZ) with X = d_i, Y = d_j, Z = d_l
        dcJJ = jeinsum("iab,aj->ijb", dc, J)
        dcJJ = jeinsum("ijb,bl->ijl", dcJJ, J)
        corr = dc * ((t - 1.0) / 4.0) + dcJJ * ((t + 1.0) / 4.0)
        return lc + _transpose(corr, (2, 0, 1))

    def christoffel(self, t: float | None) -> Jet:
        """Christoffel symbols of the Gauduchon connection ``t`` (``None`` for Levi-Civita)."""
        if t is None:
            return self.christoffel_lc
        key = ("gauduchon", float(t))
        cache = self.__dict__.setdefault("_conn_cache", {})
        if key not in cache:
            cache[key] = jeinsum("kl,lij->kij", self.ginv.truncate(self.connection_order),
                                 self.gauduchon_lowered(float(t)))
        return cache[key]

    def curvature(self, t: float | None) -> Jet:
        """Lowered curvature ``R[i, j, k, w]`` of connection ``t`` (``None`` for Levi-Civita)."""
        key = ("curv", None if t is None else float(t))
        cache = self.__dict__.setdefault("_curv_cache", {})
        if key not in cache:
            G = self.christoffel(t)
            dG = G.gradient()  # dG[i, l, j, k] = d_i Gamma^l_jk
            GG = jeinsum("lim,mjk->lkij", G, G)
            up = (_transpose(dG, (1, 3, 0, 2)) - _transpose(dG, (1, 3, 2, 0))
                  + GG - _transpose(GG, (0, 1, 3, 2)))  # up[l, k, i, j] = R^l_kij
            cache[key] = jeinsum("lkij,lw->ijkw", up, self.g)
        return cache[key]

    def covariant_derivative_3form(self, T: Jet, t: float | None) -> Jet:
        """``(nabla_w T)_{xyz}`` as ``[w, x, y, z]`` for a full 3-tensor ``T``."""
        G = self.christoffel(t)
        dT = T.gradient()
        G = G.truncate(dT.order)
        out = dT - jeinsum("mwx,myz->wxyz", G, T)
        out = out - jeinsum("mwy,xmz->wxyz", G, T)
        out = out - jeinsum("mwz,xym->wxyz", G, T)
        return out

    def orthonormal_frame(self) -> np.ndarray:
        """Gram-Schmidt on the coordinate frame; ``E[:, i]`` is the i-th vector (batch last)."""
        g = self.g.value
        n = self.n
        E = np.zeros((n, n) + g.shape[2:])
        for i in range(n):
            v = np.zeros((n,) + g.shape[2:])
            v[i] = 1.0
            for j in range(i):
                e = E[:, j]
                v = v - np.einsum("a...,ab...,b...->...", v, g, e) * e
            norm = np.sqrt(np.einsum("a...,ab...,b...->...", v, g, v))
            E[:, i] = v / norm
        return E


def _d_from_gradient(grad: Jet, n: int, k: int) -> Jet:
    """Full tensor of ``d a`` from the gradient ``grad[i, c]`` of the components of a k-form."""
    out, var, src, sgn = _d_table(n, k)
    vals = grad.c[var, src] * sgn.reshape((-1,) + (1,) * (grad.c.ndim - 2))
    c = np.zeros((comb(n, k + 1),) + grad.c.shape[2:])
    np.add.at(c, out, vals)
    return components_to_tensor(Jet(grad.space, c, grad.order), n, k + 1)


def _transpose(a: Jet, axes) -> Jet:
    nt = len(axes)
    full = tuple(axes) + tuple(range(nt, a.c.ndim))
    return Jet(a.space, np.transpose(a.c, full), a.order)


def _permute_sum(dg: Jet) -> Jet:
    """``d_i g_jl + d_j g_il - d_l g_ij`` arranged as ``[l, i, j]``."""
    # dg[i, a, b]
    t1 = _transpose(dg, (2, 0, 1))  # [l, i, j] <- dg[i, j, l]
    t2 = _transpose(dg, (2, 1, 0))  # [l, i, j] <- dg[j, i, l]
    t3 = _transpose(dg, (0, 1, 2))  # [l, i, j] <- dg[l, i, j]
    return t1 + t2 - t3


# ----------------------------------------------------------------------------------------
# values returned to callers

@dataclass
class ConnectionValue:
    """Connection coefficients at a point (or batch), with their first-order jet."""

    point: ChartPoint
    t: float | None
    christoffel_jet: Jet
    geometry: PointGeometry = field(repr=False)

    @property
    def christoffel(self) -> np.ndarray:
        return self.christoffel_jet.value

    def torsion_lowered(self) -> np.ndarray:
        """``T[i, j, l] = g(T(d_i, d_j), d_l)`` with ``T(X, Y) = nabla_X Y - nabla_Y X - [X, Y]``."""
        G = self.christoffel
        T = G - np.swapaxes(G, 1, 2)
        return np.einsum("kij...,kl...->ijl...", T, self.geometry.g.value)

    def metric_residual(self) -> np.ndarray:
        """``(nabla_i g)_jk`` at the base point."""
        g = self.geometry.g
        dg = g.gradient().value
        G = self.christoffel
        gv = g.value
        return dg - np.einsum("mij...,mk...->ijk...", G, gv) - np.einsum("mik...,jm...->ijk...", G, gv)

    def complex_residual(self) -> np.ndarray:
        """``(nabla_i J)^a_b`` at the base point."""
        J = self.geometry.J
        dJ = J.gradient().value
        G = self.christoffel
        Jv = J.value
        return dJ + np.einsum("aim...,mb...->iab...", G, Jv) - np.einsum("mib...,am...->iab...", G, Jv)


@dataclass
class CurvatureValue:
    point: ChartPoint
    kind: str
    R: np.ndarray

    def max_abs(self) -> np.ndarray:
        return pointwise_max(self.R, 4)


def _t_of(kind) -> float | None:
    if kind in (None, "levi_civita", "lc"):
        return None
    if kind == "bismut":
        return -1.0
    if kind == "chern":
        return 1.0
    if isinstance(kind, (int, float)):
        return float(kind)
    raise InputError(f"unknown connection kind {kind!r}")


# ----------------------------------------------------------------------------------------
# operations

def fundamental_form(hs: HermitianStructure) -> DifferentialForm:
    """``omega(X, Y) = g(JX, Y)``."""
    return DifferentialForm.from_tensor_rule(
        hs.chart, 2, lambda p, o: hs.geometry(p, o).omega, f"omega[{hs.name}]")


def dc_form(hs: HermitianStructure, a: DifferentialForm) -> DifferentialForm:
    """``(d^c a)(X_0..X_k) = -(da)(J X_0, ..., J X_k)``."""
    if a.chart is not hs.chart:
        raise ChartMismatchError("d^c", hs.chart.name, a.chart.name)
    da = exterior_derivative(a)
    k1 = da.degree

    def rule(p, order):
        t = da.tensor(p, order)
        J = hs.J.evaluate(p, order)
        return _dc_tensor(t, J, k1)

    return DifferentialForm.from_tensor_rule(hs.chart, k1, rule, f"dc{a.name}")


def torsion_3form(hs: HermitianStructure) -> DifferentialForm:
    """``H = -d^c omega``."""
    return DifferentialForm.from_tensor_rule(
        hs.chart, 3, lambda p, o: hs.geometry(p, o).H, f"H[{hs.name}]")


def levi_civita(hs: HermitianStructure, p: ChartPoint, order: int = MAX_ORDER) -> ConnectionValue:
    geo = hs.geometry(p, order)
    return ConnectionValue(p, None, geo.christoffel(None), geo)


def gauduchon_connection(hs: HermitianStructure, t: float, p: ChartPoint,
                         order: int = MAX_ORDER) -> ConnectionValue:
    """Connection ``g(nabla^t_X Y, Z) = g(LC) + (t-1)/4 d^c omega(X,Y,Z) + (t+1)/4 d^c omega(X,JY,JZ)``."""
    geo = hs.geometry(p, order)
    return ConnectionValue(p, float(t), geo.christoffel(float(t)), geo)


def curvature(hs: HermitianStructure, kind, p: ChartPoint, order: int = MAX_ORDER) -> CurvatureValue:
    """Curvature of ``kind`` in {"levi_civita", "bismut", "chern"} or a Gauduchon parameter."""
    geo = hs.geometry(p, order)
    return CurvatureValue(p, str(kind), geo.curvature(_t_of(kind)).value)


def bismut_curvature_via_formula(hs: HermitianStructure, p: ChartPoint,
                                 order: int = MAX_ORDER, dh_tol: float = FIRST_DERIVATIVE_TOL
                                 ) -> CurvatureValue:
    """Bismut curvature assembled from Levi-Civita data and ``H``.

    ``R^B = R^LC + 1/2 nabla_X H(Y,Z,W) - 1/2 nabla_Y H(X,Z,W)
    - 1/4 g(H(X,W), H(Y,Z)) + 1/4 g(H(Y,W), H(X,Z))`` where ``H(X, W)`` is the
    vector dual to ``H(X, W, .)``.
    """
    geo = hs.geometry(p, order)
    dh = float(np.max(pointwise_max(geo.dH.value, 4)))
    if dh > dh_tol:
        warnings.warn(f"dH residual {dh:.3e} on {hs.name}; closed-torsion hypothesis fails",
                      RuntimeWarning, stacklevel=2)
    RLC = geo.curvature(None).value
    H = geo.H.value
    nH = geo.covariant_derivative_3form(geo.H, None).value  # [x, y, z, w]
    ginv = geo.ginv.value
    HH = np.einsum("xwa...,ab...,yzb...->xyzw...", H, ginv, H)
    R = RLC + 0.5 * nH - 0.5 * np.swapaxes(nH, 0, 1) - 0.25 * HH + 0.25 * np.swapaxes(HH, 0, 1)
    return CurvatureValue(p, "bismut_formula", R)


def bismut_ricci(hs: HermitianStructure, p: ChartPoint, frame: np.ndarray | None = None,
                 order: int = MAX_ORDER) -> np.ndarray:
    """``rho(X, Y) = 1/2 sum_i R^B(X, Y, J e_i, e_i)`` over a g-orthonormal frame.

    ``frame[:, i]`` is the i-th frame vector; the default is Gram-Schmidt on the
    coordinate frame.
    """
    return _ricci(hs.geometry(p, order), frame)


def _ricci(geo: PointGeometry, frame=None) -> np.ndarray:
    E = geo.orthonormal_frame() if frame is None else np.asarray(frame, dtype=float)
    R = geo.curvature(-1.0).value
    J = geo.J.value
    JE = np.einsum("ab...,bi...->ai...", J, E)
    return 0.5 * np.einsum("xyab...,ai...,bi...->xy...", R, JE, E)


def nijenhuis_tensor(hs: HermitianStructure, p: ChartPoint, order: int = MAX_ORDER) -> np.ndarray:
    """``N[k, i, j]``: the d_k component of ``[JX,JY] - J[JX,Y] - J[X,JY] - [X,Y]`` on ``X=d_i, Y=d_j``."""
    J = hs.J.evaluate(p, order)
    dJ = J.gradient().value  # dJ[m, k, j] = d_m J^k_j
    Jv = J.value
    a = np.einsum("mi...,mkj...->kij...", Jv, dJ)
    b = np.einsum("km...,jmi...->kij...", Jv, dJ)
    return a - np.swapaxes(a, 1, 2) + b - np.swapaxes(b, 1, 2)


def kernel_distribution_rank(hs: HermitianStructure, p: ChartPoint, rtol: float = KERNEL_RTOL) -> np.ndarray:
    """Dimension of ``{X : i_X H = 0}`` by singular-value thresholding (one integer per point)."""
    H = hs.geometry(p, 1).H.value
    n = hs.dim
    M = H.reshape((n, n * n) + H.shape[3:])
    M = np.moveaxis(M, (0, 1), (-2, -1))
    s = np.linalg.svd(M, compute_uv=False)  # (*batch, n)
    smax = s.max(axis=-1, keepdims=True)
    nonzero = (s > rtol * smax) & (s > 1e-14)
    return n - nonzero.sum(axis=-1)


def pfaffian_ratio(omega_a: np.ndarray, omega_b: np.ndarray) -> np.ndarray:
    """``omega_a^m / omega_b^m`` for top powers, via determinant and Pfaffian signs."""
    return _pfaffian(omega_a) / _pfaffian(omega_b)


def _pfaffian(A: np.ndarray) -> np.ndarray:
    """Pfaffian of antisymmetric ``A[i, j, *batch]`` by expansion along the first row."""
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    if n == 0:
        return np.ones(A.shape[2:])
    if n % 2:
        return np.zeros(A.shape[2:])
    total = np.zeros(A.shape[2:])
    for j in range(1, n):
        keep = [k for k in range(1, n) if k != j]
        minor = A[np.ix_(keep, keep)]
        total = total + (-1) ** (j + 1) * A[0, j] * _pfaffian(minor)
    return total


# ----------------------------------------------------------------------------------------
# reports

@dataclass
class ConditionResult:
    name: str
    residuals: np.ndarray
    threshold: float

    @property
    def max_residual(self) -> float:
        return float(np.max(self.residuals)) if self.residuals.size else 0.0

    @property
    def passed(self) -> bool:
        return bool(self.max_residual < self.threshold)


DEFAULT_THRESHOLDS = {
    "KAHLER": FIRST_DERIVATIVE_TOL,
    "SKT": FIRST_DERIVATIVE_TOL,
    "CYT": CURVATURE_TOL,
    "BTP": CURVATURE_TOL,
    "BIANCHI1": CURVATURE_TOL,
    "TYPE": CURVATURE_TOL,
}


def condition_residuals(hs: HermitianStructure, p: ChartPoint, order: int = MAX_ORDER) -> dict:
    """Per-point residual arrays for KAHLER, SKT, CYT, BTP, BIANCHI1 and TYPE."""
    geo = hs.geometry(p, order)
    RB = geo.curvature(-1.0).value
    J = geo.J.value
    ddc = _d_from_gradient(tensor_to_components(geo.dc_omega, hs.dim, 3).gradient(), hs.dim, 3)
    bianchi = RB + np.transpose(RB, (1, 2, 0, 3) + tuple(range(4, RB.ndim))) \
        + np.transpose(RB, (2, 0, 1, 3) + tuple(range(4, RB.ndim)))
    type_defect = RB - np.einsum("ai...,bj...,abkw...->ijkw...", J, J, RB)
    return {
        "KAHLER": pointwise_max(geo.domega.value, 3),
        "SKT": pointwise_max(ddc.value, 4),
        "CYT": pointwise_max(_ricci(geo), 2),
        "BTP": pointwise_max(geo.covariant_derivative_3form(geo.H, -1.0).value, 4),
        "BIANCHI1": pointwise_max(bianchi, 4),
        "TYPE": pointwise_max(type_defect, 4),
    }


def condition_report(hs: HermitianStructure, points: ChartPoint,
                     thresholds: Mapping[str, float] | None = None) -> dict:
    """Residual maxima and verdicts; BKL is the conjunction of BIANCHI1 and TYPE."""
    th = dict(DEFAULT_THRESHOLDS)
    th.update(thresholds or {})
    hs.check_invariants(points)
    res = condition_residuals(hs, points)
    out = {name: ConditionResult(name, np.atleast_1d(r), th[name]) for name, r in res.items()}
    out["BKL"] = out["BIANCHI1"].passed and out["TYPE"].passed
    return out


@dataclass
class GKResult:
    torsion_identity: np.ndarray
    pluriclosed_plus: np.ndarray
    pluriclosed_minus: np.ndarray
    commutator: np.ndarray
    orientation_ratio: np.ndarray


def generalized_kahler_check(plus: HermitianStructure, minus: HermitianStructure,
                             points: ChartPoint, order: int = MAX_ORDER) -> GKResult:
    """Residuals of ``d^c_+ omega_+ + d^c_- omega_-``, ``dd^c_+ omega_+``, ``[J_+, J_-]`` and
    the sign of ``omega_+^m / omega_-^m``."""
    if plus.chart is not minus.chart:
        raise ChartMismatchError("generalized Kahler check", plus.chart.name, minus.chart.name)
    gp = plus.metric.evaluate(points, 0).value
    gm = minus.metric.evaluate(points, 0).value
    if np.max(np.abs(gp - gm)) > STRUCTURE_TOL:
        raise PreconditionError("the two structures do not share a metric")
    plus.check_invariants(points)
    minus.check_invariants(points)
    a, b = plus.geometry(points, order), minus.geometry(points, order)
    n = plus.dim
    ddc = lambda geo: _d_from_gradient(tensor_to_components(geo.dc_omega, n, 3).gradient(), n, 3)
    Jp, Jm = a.J.value, b.J.value
    comm = np.einsum("ab...,bc...->ac...", Jp, Jm) - np.einsum("ab...,bc...->ac...", Jm, Jp)
    return GKResult(
        torsion_identity=pointwise_max(a.dc_omega.value + b.dc_omega.value, 3),
        pluriclosed_plus=pointwise_max(ddc(a).value, 4),
        pluriclosed_minus=pointwise_max(ddc(b).value, 4),
        commutator=pointwise_max(comm, 2),
        orientation_ratio=np.atleast_1d(pfaffian_ratio(a.omega.value, b.omega.value)),
    )
