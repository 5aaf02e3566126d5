"""Explicit charts, Hermitian structures and maps used by the verification suites.

Coordinates:

* ``t4``: ``(x1, x2, x3, x4)`` on a fundamental domain of the flat torus.
* ``c2*``: ``(x1, y1, x2, y2)`` on C^2 minus the origin, ``z_k = x_k + i y_k``.
* ``t4xc2*``: the eight coordinates of the product, torus first.
* ``su2r``: ``(s, eta, xi1, xi2)`` with
  ``(z1, z2) = e^s (cos(eta) e^{i xi1}, sin(eta) e^{i xi2})``, i.e. the Hopf
  metric in logarithmic Hopf coordinates.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import InputError, PreconditionError
from .forms import (
    Chart,
    ChartPoint,
    DifferentialForm,
    SmoothMap,
    TensorField,
    pullback,
    pullback_covariant,
)
from .hermitian import HermitianStructure, fundamental_form, torsion_3form
from .jets import Jet

VARIANTS = ("minus", "plus")

PSI = np.array([[0, 1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, 1], [0, 0, -1, 0]], dtype=float)


# charts -------------------------------------------------------------------------------

def _sample_torus(rng, count):
    return rng.uniform(0.0, 1.0, size=(4, count))


def _sample_annulus(rng, count, r0=0.5, r1=2.0):
    """Uniform in volume on ``r0 <= |x| <= r1`` in R^4."""
    direction = rng.normal(size=(4, count))
    direction /= np.linalg.norm(direction, axis=0)
    u = rng.uniform(0.0, 1.0, size=count)
    radius = (r0**4 + u * (r1**4 - r0**4)) ** 0.25
    return direction * radius


def _sample_su2r(rng, count):
    s = rng.uniform(-0.7, 0.7, size=count)
    eta = rng.uniform(0.2, np.pi / 2 - 0.2, size=count)
    xi = rng.uniform(0.0, 2 * np.pi, size=(2, count))
    return np.vstack([s, eta, xi])


T4_CHART = Chart("t4", 4, None, _sample_torus, ("x1", "x2", "x3", "x4"))
C2_CHART = Chart("c2*", 4, lambda x: np.sum(x**2, axis=0), _sample_annulus,
                 ("x1", "y1", "x2", "y2"))
PRODUCT_CHART = T4_CHART.product(C2_CHART, "t4xc2*")
SU2R_CHART = Chart("su2r", 4, lambda x: np.sin(2 * x[1]), _sample_su2r,
                   ("s", "eta", "xi1", "xi2"))


def _assemble(x: Jet, n: int, entries: dict) -> Jet:
    """An ``(n, n)`` jet matrix with the given entries (jets or numbers) and zeros elsewhere."""
    c = np.zeros((n, n) + x.c.shape[1:])
    for (i, j), v in entries.items():
        if isinstance(v, Jet):
            c[i, j] = v.c
        else:
            c[i, j, ..., 0] = v
    return Jet(x.space, c, x.order)


# constant blocks
J_T4 = np.zeros((4, 4))
J_T4[1, 0], J_T4[0, 1] = 1.0, -1.0  # J d1 = d2
J_T4[3, 2], J_T4[2, 3] = -1.0, 1.0  # J d3 = -d4

J_C2 = {"minus": np.zeros((4, 4)), "plus": np.zeros((4, 4))}
for _v, _s in (("minus", 1.0), ("plus", -1.0)):
    J_C2[_v][1, 0], J_C2[_v][0, 1] = 1.0, -1.0
    J_C2[_v][3, 2], J_C2[_v][2, 3] = _s, -_s


def _check_variant(variant: str) -> str:
    if variant not in VARIANTS:
        raise InputError(f"variant must be one of {VARIANTS}, got {variant!r}")
    return variant


# metrics are built once so that structures sharing a chart share the identical field
@lru_cache(maxsize=None)
def _t4_metric() -> TensorField:
    return TensorField.constant(T4_CHART, (0, 2), np.eye(4), "g_t4")


@lru_cache(maxsize=None)
def _hopf_metric() -> TensorField:
    def fn(x):
        inv = (x[0] ** 2 + x[1] ** 2 + x[2] ** 2 + x[3] ** 2).reciprocal()
        return _assemble(x, 4, {(i, i): inv for i in range(4)})

    return TensorField.from_coordinates(C2_CHART, (0, 2), fn, "g_E/R^2")


@lru_cache(maxsize=None)
def _product_metric(conformal: bool = True) -> TensorField:
    def fn(x):
        entries = {(i, i): 1.0 for i in range(4)}
        if conformal:
            inv = (x[4] ** 2 + x[5] ** 2 + x[6] ** 2 + x[7] ** 2).reciprocal()
            entries.update({(i, i): inv for i in range(4, 8)})
        else:
            entries.update({(i, i): 1.0 for i in range(4, 8)})
        return _assemble(x, 8, entries)

    return TensorField.from_coordinates(PRODUCT_CHART, (0, 2), fn,
                                        "g_t4+g_E/R^2" if conformal else "g_E")


# constructors -------------------------------------------------------------------------

def flat_t4() -> HermitianStructure:
    """Flat torus with ``J d1 = d2``, ``J d3 = -d4``; Kahler and flat."""
    J = TensorField.constant(T4_CHART, (1, 1), J_T4, "J_t4")
    return HermitianStructure(T4_CHART, _t4_metric(), J, "flat_t4")


def hopf_c2(variant: str = "minus") -> HermitianStructure:
    """``g_E / R^2`` on C^2 minus the origin with the standard (minus) or
    second-factor-conjugated (plus) complex structure."""
    variant = _check_variant(variant)
    J = TensorField.constant(C2_CHART, (1, 1), J_C2[variant], f"J_{variant}")
    return HermitianStructure(C2_CHART, _hopf_metric(), J, f"hopf_c2_{variant}")


def product_t4_hopf(variant: str = "minus") -> HermitianStructure:
    """Block product of :func:`flat_t4` and :func:`hopf_c2` on the 8-dimensional chart."""
    variant = _check_variant(variant)
    J = TensorField.constant(PRODUCT_CHART, (1, 1), _block(J_T4, J_C2[variant]), f"J_t4xJ_{variant}")
    return HermitianStructure(PRODUCT_CHART, _product_metric(True), J, f"product_t4_hopf_{variant}")


def product_t4_euclidean() -> HermitianStructure:
    """Flat Kahler control on the product chart (Euclidean metric, standard J)."""
    J = TensorField.constant(PRODUCT_CHART, (1, 1), _block(J_T4, J_C2["minus"]), "J_flat")
    return HermitianStructure(PRODUCT_CHART, _product_metric(False), J, "product_t4_euclidean")


def euclidean_c2() -> HermitianStructure:
    J = TensorField.constant(C2_CHART, (1, 1), J_C2["minus"], "J_minus")
    g = TensorField.constant(C2_CHART, (0, 2), np.eye(4), "g_E")
    return HermitianStructure(C2_CHART, g, J, "euclidean_c2")


def su2_r_chart() -> HermitianStructure:
    """The Hopf structure in logarithmic Hopf coordinates: an S^3 x R chart.

    ``g = ds^2 + d eta^2 + cos^2(eta) d xi1^2 + sin^2(eta) d xi2^2`` and ``J`` is
    the pushforward of the standard structure on C^2.
    """

    def metric(x):
        c, s = x[1].cos(), x[1].sin()
        return _assemble(x, 4, {(0, 0): 1.0, (1, 1): 1.0, (2, 2): c * c, (3, 3): s * s})

    def cplx(x):
        c, s = x[1].cos(), x[1].sin()
        return _assemble(x, 4, {
            (2, 0): 1.0, (3, 0): 1.0,
            (2, 1): -(s / c), (3, 1): c / s,
            (0, 2): -(c * c), (1, 2): s * c,
            (0, 3): -(s * s), (1, 3): -(s * c),
        })

    g = TensorField.from_coordinates(SU2R_CHART, (0, 2), metric, "g_round+ds^2")
    J = TensorField.from_coordinates(SU2R_CHART, (1, 1), cplx, "J_hopf")
    return HermitianStructure(SU2R_CHART, g, J, "su2_r_chart")


def _block(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    out = np.zeros((a.shape[0] + b.shape[0],) * 2)
    out[: a.shape[0], : a.shape[0]] = a
    out[a.shape[0]:, a.shape[0]:] = b
    return out


# maps ---------------------------------------------------------------------------------

def psi_rotation_t4() -> SmoothMap:
    """``(x1, x2, x3, x4) -> (x2, -x1, x4, -x3)``."""
    return SmoothMap.linear(T4_CHART, T4_CHART, PSI, name="psi")


def deck_map(n: int) -> SmoothMap:
    """``(x, z) -> (psi^n x, 2^n z)`` on the product chart."""
    n = int(n)
    rot = np.linalg.matrix_power(PSI, n) if n >= 0 else np.linalg.matrix_power(PSI.T, -n)
    return SmoothMap.linear(PRODUCT_CHART, PRODUCT_CHART, _block(rot, 2.0**n * np.eye(4)),
                            name=f"deck{n}")


def map_metric_residual(f: SmoothMap, hs_src: HermitianStructure, hs_tgt: HermitianStructure,
                        p: ChartPoint) -> np.ndarray:
    """``f* g_tgt - g_src`` at ``p`` (values)."""
    pulled = pullback_covariant(f, hs_tgt.metric).evaluate(p, 1).value
    return pulled - hs_src.metric.evaluate(p, 0).value


def map_form_residual(f: SmoothMap, a_src: DifferentialForm, a_tgt: DifferentialForm,
                      p: ChartPoint) -> np.ndarray:
    """``f* a_tgt - a_src`` at ``p`` (component values)."""
    return pullback(f, a_tgt).evaluate(p, 1).value - a_src.evaluate(p, 0).value


def map_holomorphy_residual(f: SmoothMap, hs_src: HermitianStructure, hs_tgt: HermitianStructure,
                            p: ChartPoint) -> np.ndarray:
    """``df . J_src(p) - J_tgt(f(p)) . df``."""
    q, _ = f.evaluate(p, 0)
    D = f.jacobian(p)
    Js = hs_src.J.evaluate(p, 0).value
    Jt = hs_tgt.J.evaluate(q, 0).value
    return np.einsum("ai...,ib...->ab...", D, Js) - np.einsum("ac...,cb...->ab...", Jt, D)


# sphere quadrature --------------------------------------------------------------------

S3_CHART = Chart("s3_hopf", 3, None, None, ("eta", "xi2", "xi1"))
S3_VOLUME = 2 * np.pi**2


def sphere_embedding(target: Chart, p=None, t: float = 0.0) -> SmoothMap:
    """``(eta, xi2, xi1) -> (p, 2^t (cos eta e^{i xi1}, sin eta e^{i xi2}))``.

    The coordinate order makes the parametrization positively oriented for the
    outward-normal orientation of the unit sphere in C^2.
    """
    scale = 2.0**t
    torus = None
    if target.dim == 8:
        torus = np.zeros(4) if p is None else np.asarray(p, dtype=float)
    elif target.dim != 4:
        raise InputError(f"cannot embed S^3 into chart {target.name!r}")

    def fn(x):
        eta, xi2, xi1 = x[0], x[1], x[2]
        ce, se = eta.cos(), eta.sin()
        parts = [ce * xi1.cos() * scale, ce * xi1.sin() * scale,
                 se * xi2.cos() * scale, se * xi2.sin() * scale]
        if torus is not None:
            zero = x[0] * 0.0
            parts = [zero + float(v) for v in torus] + parts
        return Jet.stack(parts)

    return SmoothMap(S3_CHART, target, fn, f"iota_{t:g}")


@dataclass
class QuadratureResult:
    value: float
    error_estimate: float
    nodes: int
    coarse_value: float = field(default=0.0)


def integrate_over_sphere3(form: DifferentialForm, embedding: SmoothMap, nodes: int = 32,
                           chunk: int = 4096) -> QuadratureResult:
    """Iterated Gauss-Legendre quadrature of ``embedding* form`` over the Hopf box.

    The error estimate is the difference to the same rule with half the nodes.
    """
    if form.degree != 3:
        raise InputError("only 3-forms can be integrated over S^3")
    pulled = pullback(embedding, form)

    def rule(m):
        x, w = np.polynomial.legendre.leggauss(m)
        box = [(0.0, np.pi / 2), (0.0, 2 * np.pi), (0.0, 2 * np.pi)]
        pts, wts = [], []
        for a, b in box:
            pts.append(0.5 * (b - a) * x + 0.5 * (b + a))
            wts.append(0.5 * (b - a) * w)
        grid = np.stack(np.meshgrid(*pts, indexing="ij")).reshape(3, -1)
        weight = np.einsum("i,j,k->ijk", *wts).reshape(-1)
        total = 0.0
        for start in range(0, grid.shape[1], chunk):
            sl = slice(start, start + chunk)
            vals = pulled.evaluate(ChartPoint(S3_CHART, grid[:, sl]), 1).value[0]
            total += float(np.dot(vals, weight[sl]))
        return total

    fine = rule(nodes)
    coarse = rule(nodes // 2)
    return QuadratureResult(fine, abs(fine - coarse), nodes, coarse)


def integrate_h_over_sphere3(hs: HermitianStructure | None = None, p=None, t: float = 0.0,
                             nodes: int = 32) -> QuadratureResult:
    """Integral of the pulled-back torsion 3-form over the sphere ``{p} x 2^t S^3``."""
    hs = product_t4_hopf("minus") if hs is None else hs
    return integrate_over_sphere3(torsion_3form(hs), sphere_embedding(hs.chart, p, t), nodes)


def sphere_volume_form() -> DifferentialForm:
    """``i_r (dx1^dy1^dx2^dy2)`` restricted to spheres, as a 3-form on C^2 minus 0.

    At unit radius this is the Riemannian volume form of ``S^3``.
    """
    def comp(sign, i):
        return lambda x: x[i] * sign

    # i_E (dx0^dx1^dx2^dx3) with E = sum x_i d_i
    return DifferentialForm.from_components(C2_CHART, 3, {
        (1, 2, 3): comp(1.0, 0), (0, 2, 3): comp(-1.0, 1),
        (0, 1, 3): comp(1.0, 2), (0, 1, 2): comp(-1.0, 3),
    }, "vol_S3")


# registry -----------------------------------------------------------------------------

@dataclass(frozen=True)
class ModelSpec:
    """A named model with the conditions it is expected to fail."""

    name: str
    build: Callable[[], HermitianStructure]
    expected_fail: frozenset = frozenset()
    description: str = ""


MODELS = {
    "flat_t4": ModelSpec("flat_t4", flat_t4, frozenset(), "flat Kahler torus"),
    "hopf_c2_minus": ModelSpec("hopf_c2_minus", lambda: hopf_c2("minus"), frozenset({"KAHLER"}),
                               "g_E/R^2 on C^2 minus 0, standard J"),
    "hopf_c2_plus": ModelSpec("hopf_c2_plus", lambda: hopf_c2("plus"), frozenset({"KAHLER"}),
                              "g_E/R^2 on C^2 minus 0, second factor conjugated"),
    "product_t4_hopf": ModelSpec("product_t4_hopf", lambda: product_t4_hopf("minus"),
                                 frozenset({"KAHLER"}), "flat T^4 times the Hopf factor (minus)"),
    "product_t4_hopf_plus": ModelSpec("product_t4_hopf_plus", lambda: product_t4_hopf("plus"),
                                      frozenset({"KAHLER"}), "flat T^4 times the Hopf factor (plus)"),
    "su2_r_chart": ModelSpec("su2_r_chart", su2_r_chart, frozenset({"KAHLER"}),
                             "Hopf structure in logarithmic Hopf coordinates"),
}

# pairs (plus, minus) used by the generalized Kahler check
GK_PAIRS = {
    "product_t4_hopf": (lambda: product_t4_hopf("plus"), lambda: product_t4_hopf("minus")),
    "hopf_c2": (lambda: hopf_c2("plus"), lambda: hopf_c2("minus")),
    "flat_t4": (flat_t4, flat_t4),
}


def get_model(name: str) -> ModelSpec:
    try:
        return MODELS[name]
    except KeyError:
        raise InputError(f"unknown model {name!r}; known: {', '.join(sorted(MODELS))}") from None


def chart_models() -> list[HermitianStructure]:
    return [spec.build() for spec in MODELS.values()]


def coefficient_fields(hs: HermitianStructure) -> list[TensorField]:
    """The coefficient fields a model feeds into the engine (metric and J)."""
    return [hs.metric, hs.J]


def finite_difference_check(f: TensorField, p: ChartPoint, h: float = 1e-5) -> dict:
    """Compare AD first and second derivatives with central differences.

    First derivatives use central differences of values. Second derivatives are
    compared two ways: central differences of the AD first derivatives
    (``order2``, rounding error near ``eps / h``) and the four-point mixed
    difference of values alone (``order2_values``, step ``3e-5``). Errors are
    relative to the largest entry of the same derivative block.
    """
    n = p.chart.dim
    jet = f.evaluate(p, 3)
    d1 = jet.derivative_values(1)
    d2 = jet.derivative_values(2)
    fd1 = np.zeros_like(d1)
    fd2 = np.zeros_like(d2)
    for i in range(n):
        e = np.zeros((n,) + (1,) * len(p.batch_shape))
        e[i] = h
        hi = ChartPoint(p.chart, p.coords + e)
        lo = ChartPoint(p.chart, p.coords - e)
        fd1[..., i] = (f.evaluate(hi, 0).value - f.evaluate(lo, 0).value) / (2 * h)
        g_hi = f.evaluate(hi, 1).derivative_values(1)
        g_lo = f.evaluate(lo, 1).derivative_values(1)
        fd2[..., i] = (g_hi - g_lo) / (2 * h)

    # second derivatives purely from values: the four-point mixed central difference
    fd2v = np.zeros_like(d2)
    h2 = 3e-5
    val = lambda shift: f.evaluate(ChartPoint(p.chart, p.coords + shift), 0).value
    for i in range(n):
        for j in range(i, n):
            ei = np.zeros((n,) + (1,) * len(p.batch_shape))
            ej = np.zeros_like(ei)
            ei[i] = h2
            ej[j] = h2
            est = (val(ei + ej) - val(ei - ej) - val(ej - ei) + val(-ei - ej)) / (4 * h2 * h2)
            fd2v[..., i, j] = est
            fd2v[..., j, i] = est

    def rel(a, b):
        scale = max(float(np.max(np.abs(a))), 1e-300)
        return float(np.max(np.abs(a - b))) / scale if np.max(np.abs(a)) > 0 else float(np.max(np.abs(b)))

    return {"order1": rel(d1, fd1), "order2": rel(d2, fd2), "order2_values": rel(d2, fd2v)}
