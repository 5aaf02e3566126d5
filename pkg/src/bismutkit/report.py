"""Job descriptions, check records and the job runner behind the CLI."""
from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .cohomology import (
    borel_e2,
    borel_window,
    DATA_DIR,
    k3_fixed_space,
    kunneth_with_s3,
    load_cohomology_job,
    load_hodge,
    load_json,
    mapping_torus_cohomology,
    parity_check_b1,
    poincare_symmetric,
    product_with_s3_identity,
)
from .errors import InputError
from .forms import ChartPoint
from .hermitian import (
    CURVATURE_TOL,
    FIRST_DERIVATIVE_TOL,
    GAUDUCHON_SAMPLE_T,
    STRUCTURE_TOL,
    HermitianStructure,
    bismut_curvature_via_formula,
    condition_residuals,
    fundamental_form,
    gauduchon_connection,
    generalized_kahler_check,
    kernel_distribution_rank,
    nijenhuis_tensor,
    pointwise_max,
)
from .lie import lie_checks, load_algebra
from .models import (
    GK_PAIRS,
    MODELS,
    PRODUCT_CHART,
    deck_map,
    get_model,
    integrate_h_over_sphere3,
    map_form_residual,
    map_holomorphy_residual,
    map_metric_residual,
    product_t4_euclidean,
    product_t4_hopf,
)

JOB_KINDS = ("verify-model", "gk-check", "lie-algebra", "cohomology", "borel-e2", "sphere-integral")
JET_ORDER = 3
DEFAULT_POINTS = {"verify-model": 200, "gk-check": 200, "sphere-integral": 5}
CHUNK = 50
TWO_PI_SQUARED_TIMES_TWO = 4 * np.pi**2

# short identities naming what each check certifies
ANCHORS = {
    "STRUCTURE": "J^2 = -1, g(J., J.) = g, g > 0",
    "KAHLER": "d omega = 0",
    "SKT": "d d^c omega = 0",
    "CYT": "rho^B(X,Y) = 1/2 sum R^B(X,Y,Je_i,e_i) = 0",
    "BTP": "nabla^B H = 0",
    "BIANCHI1": "cyclic sum R^B(X,Y,Z,W) = 0",
    "TYPE": "R^B(X,Y,Z,W) = R^B(JX,JY,Z,W)",
    "BKL": "BIANCHI1 and TYPE",
    "BKL_EQUIVALENCE": "BKL <=> (SKT and BTP)",
    "GAUDUCHON_METRIC": "nabla^t g = 0 for t in {-1,-1/2,0,1/2,1}",
    "GAUDUCHON_COMPLEX": "nabla^t J = 0 for t in {-1,-1/2,0,1/2,1}",
    "BISMUT_TORSION": "g(T^{-1}(X,Y),Z) = H(X,Y,Z) = -d^c omega(X,Y,Z)",
    "CURVATURE_FORMULA": "R^B = R^LC + 1/2 nabla_X H - 1/2 nabla_Y H - 1/4 <H,H> + 1/4 <H,H>",
    "NIJENHUIS": "[JX,JY] - J[JX,Y] - J[X,JY] - [X,Y] = 0",
    "KERNEL_RANK_CONSTANT": "dim ker H constant",
    "BISMUT_FLAT": "R^B = 0",
    "CURVATURE_SPLITTING": "R^B(X1+X2,...) = R^LC_1(X1,...) + R^B_2(X2,...)",
    "TORSION_NO_TORUS_LEGS": "i_X H = 0 for X tangent to T^4",
    "DECK_METRIC": "phi_n^* h = h, n in -2..2",
    "DECK_FORM": "phi_n^* Omega = Omega, n in -2..2",
    "DECK_HOLOMORPHIC": "d phi_n I = I d phi_n, n in -2..2",
    "GK_TORSION": "d^c_+ omega_+ = -d^c_- omega_-",
    "GK_PLURICLOSED": "d d^c_+ omega_+ = 0 = d d^c_- omega_-",
    "GK_COMMUTE": "[J_+, J_-] = 0",
    "GK_ORIENTATION": "sign(omega_+^m / omega_-^m)",
    "SPHERE_INTEGRAL": "int_{S^3} iota_{p,t}^* H = 2 vol(S^3) = 4 pi^2",
    "SPHERE_INDEPENDENCE": "integral independent of (p, t)",
    "SPHERE_KAHLER_CONTROL": "int_{S^3} iota^* H = 0 when H = 0",
    "KERNEL_DIMS": "N^r = ker(psi_r^* - 1)",
    "BETTI": "H^r(M_psi) = N^r + C^{r-1}",
    "B0": "b_0(M_psi) = 1",
    "EULER": "sum (-1)^r b_r(M_psi) = 0",
    "POINCARE": "b_r = b_{top-r}",
    "KUNNETH": "b(M_psi x S^3) = b(mapping torus of psi x Id on K x S^3)",
    "PARITY_B1": "dim N^1 even, b_1 = dim N^1 + 1 odd",
    "K3_FIXED": "dim ker(A - 1) < 22",
    "E2_VANISHING": "E2^{u,v} = 0 unless p+q = u+v",
    "E2_TABLE": "E2 = sum_k h^{k,u-k}(B) h^{p-k,q-u+k}(F)",
    "JACOBI": "[X,[Y,Z]] + cyclic = 0",
    "AD_INVARIANCE": "b([X,Y],Z) + b(Y,[X,Z]) = 0",
    "INTEGRABLE": "N_J = 0",
    "TORSION_ALTERNATING": "-b([X,Y],Z) alternating",
    "TORSION_EQUALS_MINUS_DC_OMEGA": "-d^c omega_L(X,Y,Z) = -b([X,Y],Z)",
    "DH": "dH = 0",
    "BISMUT_ZERO": "nabla^B = 0 on invariant fields",
    "BISMUT_METRIC": "nabla^B b = 0",
    "BISMUT_COMPLEX": "nabla^B J_L = 0",
    "BISMUT_TORSION_IS_H": "b(T^B(X,Y),Z) = H(X,Y,Z)",
    "ORIENTATION_SAME": "omega_L^m / omega_R^m > 0",
    "TORSION_NONZERO": "H(e_i,e_j,e_k) != 0 for some triple",
}


@dataclass
class JobSpec:
    kind: str
    target: str | None = None
    points: int | None = None
    seed: int = 0
    tolerances: dict = field(default_factory=dict)
    jet_order: int = JET_ORDER
    window: tuple | None = None
    expect_fail: tuple = ()

    def __post_init__(self):
        if self.kind not in JOB_KINDS:
            raise InputError(f"job kind must be one of {JOB_KINDS}, got {self.kind!r}")
        if self.points is None:
            self.points = DEFAULT_POINTS.get(self.kind, 1)
        if int(self.points) < 1:
            raise InputError("points must be at least 1")
        for name, val in self.tolerances.items():
            if not (isinstance(val, (int, float)) and val > 0 and np.isfinite(val)):
                raise InputError(f"tolerance {name} must be a positive number, got {val!r}")
        if self.jet_order != JET_ORDER:
            raise InputError(f"jet order is fixed at {JET_ORDER}")


@dataclass
class CheckRecord:
    name: str
    passed: bool
    anchor: str = ""
    points: int | None = None
    max_residual: float | None = None
    threshold: float | None = None
    verdict: bool | None = None
    value: object = None
    expected: str = "pass"
    note: str = ""

    def to_dict(self) -> dict:
        d = {"name": self.name, "pass": bool(self.passed), "anchor": self.anchor, "expected": self.expected}
        for key in ("points", "max_residual", "threshold", "verdict", "value", "note"):
            val = getattr(self, key)
            if val is not None and val != "":
                d[key] = val
        return d


@dataclass
class Report:
    job: dict
    records: list
    wall_time: float = 0.0
    engine_version: str = __version__

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    @property
    def anomalies(self) -> list:
        return [r.name for r in self.records if r.expected == "fail" and not r.passed]

    def to_dict(self) -> dict:
        return {
            "job": self.job,
            "engine_version": self.engine_version,
            "jet_order": JET_ORDER,
            "pass": self.passed,
            "anomalies": self.anomalies,
            "records": [r.to_dict() for r in self.records],
            "wall_time": round(self.wall_time, 3),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _residual_record(name, residuals, threshold, npoints, expected="pass", note=""):
    r = float(np.max(residuals)) if np.size(residuals) else 0.0
    ok = r < threshold
    passed = ok if expected == "pass" else not ok
    if expected == "fail" and ok:
        note = (note + "; " if note else "") + "expected to fail but passed"
    return CheckRecord(name, passed, ANCHORS.get(name, ""), npoints, r, threshold,
                       expected=expected, note=note)


def _exact_record(name, verdict, value=None, expected="pass", note=""):
    verdict = bool(verdict)
    passed = verdict if expected == "pass" else not verdict
    return CheckRecord(name, passed, ANCHORS.get(name, ""), verdict=verdict, value=value,
                       expected=expected, note=note)


def _tol(spec: JobSpec, name: str, default: float) -> float:
    return float(spec.tolerances.get(name, default))


def _chunks(points: ChartPoint, size: int = CHUNK):
    n = points.coords.shape[1]
    for start in range(0, n, size):
        yield ChartPoint(points.chart, points.coords[:, start:start + size])


# verify-model ---------------------------------------------------------------------------

def verify_model(spec: JobSpec) -> list:
    model = get_model(spec.target)
    hs = model.build()
    expected_fail = set(model.expected_fail) | set(spec.expect_fail)
    pts = hs.chart.sample(spec.points, spec.seed)
    acc = {}

    def push(name, arr):
        acc.setdefault(name, []).append(np.atleast_1d(arr))

    ranks = []
    for p in _chunks(pts):
        inv = hs.check_invariants(p, _tol(spec, "STRUCTURE", STRUCTURE_TOL))
        push("STRUCTURE", max(inv["J_squared"], inv["compatibility"], inv["symmetry"]))
        geo = hs.geometry(p)
        for name, arr in condition_residuals(hs, p).items():
            push(name, arr)
        gm, gc = [], []
        for t in GAUDUCHON_SAMPLE_T:
            c = gauduchon_connection(hs, t, p)
            gm.append(pointwise_max(c.metric_residual(), 3))
            gc.append(pointwise_max(c.complex_residual(), 3))
        push("GAUDUCHON_METRIC", np.max(gm, axis=0))
        push("GAUDUCHON_COMPLEX", np.max(gc, axis=0))
        bis = gauduchon_connection(hs, -1.0, p)
        push("BISMUT_TORSION", pointwise_max(bis.torsion_lowered() - geo.H.value, 3))
        RB = geo.curvature(-1.0).value
        push("CURVATURE_FORMULA", pointwise_max(RB - bismut_curvature_via_formula(hs, p).R, 4))
        push("NIJENHUIS", pointwise_max(nijenhuis_tensor(hs, p), 3))
        ranks.append(np.atleast_1d(kernel_distribution_rank(hs, p)))
        if hs.name.startswith(("hopf_c2", "su2_r")):
            push("BISMUT_FLAT", pointwise_max(RB, 4))
        if hs.chart is PRODUCT_CHART:
            split = RB.copy()
            split[:4, :4, :4, :4] -= geo.curvature(None).value[:4, :4, :4, :4]
            push("CURVATURE_SPLITTING", pointwise_max(split, 4))
            push("TORSION_NO_TORUS_LEGS", pointwise_max(geo.H.value[:4], 3))
            omega = fundamental_form(hs)
            dm, df, dh = [], [], []
            for n in range(-2, 3):
                f = deck_map(n)
                dm.append(pointwise_max(map_metric_residual(f, hs, hs, p), 2))
                df.append(pointwise_max(map_form_residual(f, omega, omega, p), 1))
                dh.append(pointwise_max(map_holomorphy_residual(f, hs, hs, p), 2))
            push("DECK_METRIC", np.max(dm, axis=0))
            push("DECK_FORM", np.max(df, axis=0))
            push("DECK_HOLOMORPHIC", np.max(dh, axis=0))
        if hs.name == "flat_t4":
            push("FLAT", pointwise_max(geo.curvature(None).value, 4))

    defaults = {
        "STRUCTURE": STRUCTURE_TOL, "NIJENHUIS": STRUCTURE_TOL,
        "KAHLER": FIRST_DERIVATIVE_TOL, "SKT": FIRST_DERIVATIVE_TOL,
        "GAUDUCHON_METRIC": FIRST_DERIVATIVE_TOL, "GAUDUCHON_COMPLEX": FIRST_DERIVATIVE_TOL,
        "BISMUT_TORSION": FIRST_DERIVATIVE_TOL, "TORSION_NO_TORUS_LEGS": FIRST_DERIVATIVE_TOL,
        "DECK_METRIC": 1e-9, "DECK_FORM": 1e-9, "DECK_HOLOMORPHIC": 1e-9,
    }
    records = []
    for name, parts in acc.items():
        res = np.concatenate(parts)
        th = _tol(spec, name, defaults.get(name, CURVATURE_TOL))
        records.append(_residual_record(name, res, th, spec.points,
                                        "fail" if name in expected_fail else "pass"))
    byname = {r.name: r for r in records}
    ok = lambda n: byname[n].max_residual < byname[n].threshold
    bkl = ok("BIANCHI1") and ok("TYPE")
    records.append(_exact_record("BKL", bkl, expected="fail" if "BKL" in expected_fail else "pass"))
    records.append(_exact_record("BKL_EQUIVALENCE", bkl == (ok("SKT") and ok("BTP")),
                                 value={"BKL": bkl, "SKT_and_BTP": ok("SKT") and ok("BTP")}))
    ranks = np.concatenate(ranks)
    records.append(_exact_record("KERNEL_RANK_CONSTANT", len(set(ranks.tolist())) == 1,
                                 value=sorted(set(int(r) for r in ranks))))
    return records


# gk-check --------------------------------------------------------------------------------

EXPECTED_ORIENTATION = {"product_t4_hopf": -1.0, "hopf_c2": -1.0, "flat_t4": 1.0}


def gk_check(spec: JobSpec) -> list:
    if spec.target not in GK_PAIRS:
        raise InputError(f"no generalized Kahler pair for model {spec.target!r}; known: {sorted(GK_PAIRS)}")
    build_plus, build_minus = GK_PAIRS[spec.target]
    plus, minus = build_plus(), build_minus()
    pts = plus.chart.sample(spec.points, spec.seed)
    parts = {"GK_TORSION": [], "GK_PLURICLOSED": [], "GK_COMMUTE": [], "ratio": []}
    for p in _chunks(pts):
        r = generalized_kahler_check(plus, minus, p)
        parts["GK_TORSION"].append(r.torsion_identity)
        parts["GK_PLURICLOSED"].append(np.maximum(r.pluriclosed_plus, r.pluriclosed_minus))
        parts["GK_COMMUTE"].append(r.commutator)
        parts["ratio"].append(r.orientation_ratio)
    records = [
        _residual_record("GK_TORSION", np.concatenate(parts["GK_TORSION"]),
                         _tol(spec, "GK_TORSION", FIRST_DERIVATIVE_TOL), spec.points),
        _residual_record("GK_PLURICLOSED", np.concatenate(parts["GK_PLURICLOSED"]),
                         _tol(spec, "GK_PLURICLOSED", FIRST_DERIVATIVE_TOL), spec.points),
        _residual_record("GK_COMMUTE", np.concatenate(parts["GK_COMMUTE"]),
                         _tol(spec, "GK_COMMUTE", STRUCTURE_TOL), spec.points),
    ]
    ratio = np.concatenate(parts["ratio"])
    want = EXPECTED_ORIENTATION[spec.target]
    records.append(CheckRecord("GK_ORIENTATION", bool(np.all(np.sign(ratio) == want)),
                               ANCHORS["GK_ORIENTATION"], spec.points, verdict=bool(np.all(np.sign(ratio) == want)),
                               value={"expected_sign": int(want), "min_ratio": float(ratio.min()),
                                      "max_ratio": float(ratio.max())}))
    return records


# sphere-integral -------------------------------------------------------------------------

def sphere_integral(spec: JobSpec) -> list:
    rng = np.random.default_rng(spec.seed)
    count = spec.points
    hs = product_t4_hopf("minus")
    tol = _tol(spec, "SPHERE_INTEGRAL", 1e-4)
    values, errs, samples = [], [], []
    for _ in range(count):
        p = rng.uniform(0.0, 1.0, size=4)
        t = float(rng.uniform(-1.0, 1.0))
        q = integrate_h_over_sphere3(hs, p, t)
        values.append(q.value)
        errs.append(q.error_estimate)
        samples.append({"p": [round(float(x), 6) for x in p], "t": round(t, 6), "value": q.value})
    values = np.array(values)
    control = integrate_h_over_sphere3(product_t4_euclidean(), np.zeros(4), 0.0)
    return [
        CheckRecord("SPHERE_INTEGRAL", bool(np.max(np.abs(values - TWO_PI_SQUARED_TIMES_TWO)) < tol),
                    ANCHORS["SPHERE_INTEGRAL"], count, float(np.max(np.abs(values - TWO_PI_SQUARED_TIMES_TWO))),
                    tol, value={"target": TWO_PI_SQUARED_TIMES_TWO, "samples": samples,
                                "quadrature_error_estimate": float(max(errs))}),
        _residual_record("SPHERE_INDEPENDENCE", [float(values.max() - values.min())],
                         _tol(spec, "SPHERE_INDEPENDENCE", 1e-6), count),
        _residual_record("SPHERE_KAHLER_CONTROL", [abs(control.value)],
                         _tol(spec, "SPHERE_KAHLER_CONTROL", 1e-4), 1),
    ]


# exact jobs --------------------------------------------------------------------------------

def lie_job(spec: JobSpec) -> list:
    la = load_algebra(_existing(spec.target))
    return [_exact_record(name, ok, value=detail) for name, (ok, detail) in lie_checks(la).items()]


def cohomology_job(spec: JobSpec) -> list:
    path = _existing(spec.target)
    job = load_cohomology_job(path)
    expect = load_json(path).get("expect", {})
    mt = mapping_torus_cohomology(job.psi)
    recs = []
    recs.append(_exact_record("KERNEL_DIMS", expect.get("kernel_dims", mt.kernel_dims) == mt.kernel_dims,
                              value=mt.kernel_dims))
    recs.append(_exact_record("BETTI", expect.get("betti", mt.betti) == mt.betti,
                              value={"betti": mt.betti, "cokernel_torsion": mt.cokernel_torsion}))
    recs.append(_exact_record("B0", mt.betti[0] == 1, value=mt.betti[0]))
    recs.append(_exact_record("EULER", mt.euler_characteristic == 0, value=mt.euler_characteristic))
    recs.append(_exact_record("POINCARE", poincare_symmetric(mt.betti), value=mt.betti))
    via_kunneth = kunneth_with_s3(mt.betti)
    direct = mapping_torus_cohomology(product_with_s3_identity(job.psi)).betti
    recs.append(_exact_record("KUNNETH", via_kunneth == direct,
                              value={"kunneth": via_kunneth, "direct": direct}))
    if job.j_matrix is not None:
        v = parity_check_b1(job.psi.matrices[1], job.j_matrix)
        recs.append(_exact_record("PARITY_B1", v.kernel_even and v.b1_odd,
                                  value={"dim_N1": v.kernel_dim, "b1": v.b1}))
    if job.k3_matrix is not None:
        k = k3_fixed_space(job.k3_matrix)
        recs.append(_exact_record("K3_FIXED", k < 22, value=k))
    return recs


def parse_window(text: str):
    """``"p0..p1,q0..q1"`` -> ``(range(p0, p1 + 1), range(q0, q1 + 1))``."""
    try:
        ps, qs = text.split(",")
        p0, p1 = (int(x) for x in ps.split(".."))
        q0, q1 = (int(x) for x in qs.split(".."))
    except ValueError:
        raise InputError(f"window must look like p0..p1,q0..q1, got {text!r}") from None
    if p0 < 0 or q0 < 0 or p1 < p0 or q1 < q0:
        raise InputError(f"window {text!r} must be nonnegative and increasing")
    return range(p0, p1 + 1), range(q0, q1 + 1)


def borel_job(spec: JobSpec) -> list:
    path = _existing(spec.target)
    data = load_json(path)
    for key in ("base", "fiber"):
        if key not in data:
            raise InputError(f"borel file: missing field '{key}'")
    base, fiber = load_hodge(data["base"], path), load_hodge(data["fiber"], path)
    pr, qr = spec.window or (range(0, 5), range(0, 5))
    offdiag = [borel_e2(base, fiber, p, q, u, v) for p in pr for q in qr
               for u in range(0, 2 * (base.complex_dim + fiber.complex_dim) + 1)
               for v in range(0, 2 * (base.complex_dim + fiber.complex_dim) + 1) if p + q != u + v]
    table = borel_window(base, fiber, pr, qr)
    return [
        _exact_record("E2_VANISHING", not any(offdiag), value=len(offdiag)),
        _exact_record("E2_TABLE", True, value={f"{p},{q},{u},{v}": n for (p, q, u, v), n in sorted(table.items())},
                      note=f"base {base.name}, fibre {fiber.name}"),
    ]


def _existing(target) -> Path:
    if target is None:
        raise InputError("this job needs a file argument")
    path = Path(target)
    if not path.exists():
        bundled = DATA_DIR / target
        if bundled.exists():
            return bundled
        raise InputError(f"file not found: {target}")
    return path


RUNNERS = {
    "verify-model": verify_model,
    "gk-check": gk_check,
    "lie-algebra": lie_job,
    "cohomology": cohomology_job,
    "borel-e2": borel_job,
    "sphere-integral": sphere_integral,
}


def run_job(spec: JobSpec) -> Report:
    """Run one job; deterministic in ``spec`` apart from ``wall_time``."""
    start = time.perf_counter()
    records = RUNNERS[spec.kind](spec)
    job = {"kind": spec.kind, "target": spec.target, "points": spec.points, "seed": spec.seed,
           "tolerances": dict(sorted(spec.tolerances.items())), "jet_order": spec.jet_order}
    if spec.window is not None:
        pr, qr = spec.window
        job["window"] = [pr.start, pr.stop - 1, qr.start, qr.stop - 1]
    if spec.expect_fail:
        job["expect_fail"] = sorted(spec.expect_fail)
    return Report(job, records, time.perf_counter() - start)
