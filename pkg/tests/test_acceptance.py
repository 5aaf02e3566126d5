"""One test per acceptance criterion; tolerances are pinned here, not configurable."""
import time
from itertools import product

import numpy as np

from bismutkit.cohomology import (
    DATA_DIR,
    borel_e2,
    kunneth_with_s3,
    load_cohomology_job,
    load_hodge,
    load_json,
    mapping_torus_cohomology,
    parity_check_b1,
    product_with_s3_identity,
)
from bismutkit.hermitian import (
    GAUDUCHON_SAMPLE_T,
    condition_residuals,
    curvature,
    fundamental_form,
    gauduchon_connection,
    generalized_kahler_check,
    kernel_distribution_rank,
    pointwise_max,
)
from bismutkit.lie import lie_checks, left_right_gk_check, samelson_su2_r
from bismutkit.models import (
    T4_CHART,
    chart_models,
    coefficient_fields,
    deck_map,
    finite_difference_check,
    flat_t4,
    hopf_c2,
    integrate_h_over_sphere3,
    map_form_residual,
    map_holomorphy_residual,
    map_metric_residual,
    product_t4_euclidean,
    product_t4_hopf,
)

SEED = 42


def report(fn, ok, detail):
    fn.detail = detail
    print(f"{'PASS' if ok else 'FAIL'} {fn.__name__}: {detail}")


def product_model():
    return product_t4_hopf("minus")


def residual_max(hs, npoints, names, seed=SEED, chunk=50):
    pts = hs.chart.sample(npoints, seed)
    out = {n: 0.0 for n in names}
    for start in range(0, npoints, chunk):
        p = type(pts)(pts.chart, pts.coords[:, start:start + chunk])
        res = condition_residuals(hs, p)
        for n in names:
            out[n] = max(out[n], float(np.max(res[n])))
    return out


def test_c01_skt():
    """SKT: max |dd^c Omega| < 1e-8 over 200 points on the product model, under 30 s."""
    start = time.perf_counter()
    r = residual_max(product_model(), 200, ["SKT"])["SKT"]
    elapsed = time.perf_counter() - start
    ok = r < 1e-8 and elapsed < 30.0
    report(test_c01_skt, ok, f"max={r:.2e}, {elapsed:.1f}s")
    assert r < 1e-8
    assert elapsed < 30.0


def test_c02_cyt():
    """CYT: max |rho^B| < 1e-7 over 100 points on the product model."""
    r = residual_max(product_model(), 100, ["CYT"])["CYT"]
    report(test_c02_cyt, r < 1e-7, f"max={r:.2e}")
    assert r < 1e-7


def test_c03_btp():
    """BTP: max |nabla^B H| < 1e-7 over 100 points on the product model."""
    r = residual_max(product_model(), 100, ["BTP"])["BTP"]
    report(test_c03_btp, r < 1e-7, f"max={r:.2e}")
    assert r < 1e-7


def test_c04_bkl():
    """BKL: Bianchi and type defects of R^B < 1e-7, jointly with SKT and BTP."""
    r = residual_max(product_model(), 100, ["BIANCHI1", "TYPE", "SKT", "BTP"])
    bkl = r["BIANCHI1"] < 1e-7 and r["TYPE"] < 1e-7
    skt_btp = r["SKT"] < 1e-8 and r["BTP"] < 1e-7
    report(test_c04_bkl, bkl and skt_btp, ", ".join(f"{k}={v:.2e}" for k, v in r.items()))
    assert r["BIANCHI1"] < 1e-7 and r["TYPE"] < 1e-7
    assert bkl == skt_btp


def test_c05_hopf_bismut_flat():
    """Hopf factor: max |R^B| < 1e-7 over 100 points."""
    hs = hopf_c2("minus")
    r = float(np.max(np.abs(curvature(hs, "bismut", hs.chart.sample(100, SEED)).R)))
    report(test_c05_hopf_bismut_flat, r < 1e-7, f"max={r:.2e}")
    assert r < 1e-7


def test_c06_curvature_splitting():
    """Product curvature: |R^B - (R^LC_1 + 0)| < 1e-7 at 50 points."""
    hs = product_model()
    p = hs.chart.sample(50, SEED)
    RB = curvature(hs, "bismut", p).R
    torus_point = T4_CHART.point(p.coords[:4])
    want = np.zeros_like(RB)
    want[:4, :4, :4, :4] = curvature(flat_t4(), "levi_civita", torus_point).R
    r = float(np.max(np.abs(RB - want)))
    report(test_c06_curvature_splitting, r < 1e-7, f"max={r:.2e}")
    assert r < 1e-7


def test_c07_gauduchon_line():
    """Gauduchon line: |nabla^t g|, |nabla^t J| < 1e-8 on every chart model; T^{-1} = H."""
    worst, torsion = 0.0, 0.0
    for hs in chart_models():
        p = hs.chart.sample(50, SEED)
        for t in GAUDUCHON_SAMPLE_T:
            c = gauduchon_connection(hs, t, p)
            worst = max(worst, float(np.max(np.abs(c.metric_residual()))),
                        float(np.max(np.abs(c.complex_residual()))))
        H = hs.geometry(p).H.value
        torsion = max(torsion, float(np.max(np.abs(gauduchon_connection(hs, -1.0, p).torsion_lowered() - H))))
    ok = worst < 1e-8 and torsion < 1e-8
    report(test_c07_gauduchon_line, ok, f"hermitian={worst:.2e}, torsion={torsion:.2e}")
    assert worst < 1e-8
    assert torsion < 1e-8


def test_c08_generalized_kahler():
    """Generalized Kahler: |d^c_+ Omega_+ + d^c_- Omega_-| < 1e-8, orientation ratio -1 everywhere."""
    plus, minus = product_t4_hopf("plus"), product_t4_hopf("minus")
    r = generalized_kahler_check(plus, minus, plus.chart.sample(100, SEED))
    tor = float(np.max(r.torsion_identity))
    ratio_err = float(np.max(np.abs(r.orientation_ratio + 1.0)))
    report(test_c08_generalized_kahler, tor < 1e-8 and ratio_err < 1e-12,
           f"torsion={tor:.2e}, |ratio+1|={ratio_err:.1e}")
    assert tor < 1e-8
    assert ratio_err < 1e-12


def test_c09_twistedness():
    """Sphere integral of H = 4 pi^2 within 1e-4 at 5 random (p, t); 0 for the Kahler control."""
    rng = np.random.default_rng(SEED)
    hs = product_model()
    errs = []
    for _ in range(5):
        q = integrate_h_over_sphere3(hs, rng.uniform(0.0, 1.0, 4), float(rng.uniform(-1.0, 1.0)))
        errs.append(abs(q.value - 4 * np.pi**2))
    control = abs(integrate_h_over_sphere3(product_t4_euclidean(), np.zeros(4), 0.0).value)
    ok = max(errs) < 1e-4 and control < 1e-4
    report(test_c09_twistedness, ok, f"max err={max(errs):.2e}, control={control:.2e}")
    assert max(errs) < 1e-4
    assert control < 1e-4


def test_c10_deck_invariance():
    """Deck maps n in -2..2 preserve h, Omega and I to within 1e-9."""
    hs = product_model()
    omega = fundamental_form(hs)
    p = hs.chart.sample(50, SEED)
    worst = 0.0
    for n in range(-2, 3):
        f = deck_map(n)
        worst = max(worst,
                    float(np.max(np.abs(map_metric_residual(f, hs, hs, p)))),
                    float(np.max(np.abs(map_form_residual(f, omega, omega, p)))),
                    float(np.max(np.abs(map_holomorphy_residual(f, hs, hs, p)))))
    report(test_c10_deck_invariance, worst < 1e-9, f"max={worst:.2e}")
    assert worst < 1e-9


def test_c11_kernel_distribution():
    """Kernel of H has rank 4 at all 100 sampled points of the product model."""
    hs = product_model()
    ranks = kernel_distribution_rank(hs, hs.chart.sample(100, SEED))
    seen = sorted(set(int(r) for r in ranks))
    ok = seen == [4]
    report(test_c11_kernel_distribution, ok, f"ranks observed={seen}")
    assert seen == [4]


def test_c12_lie_side():
    """su(2)+R: exact Jacobi, dH, Bismut flatness and parallelism, GK torsion, orientation +1, SKT, H != 0, < 1 s."""
    start = time.perf_counter()
    la = samelson_su2_r()
    checks = lie_checks(la)
    ratio = left_right_gk_check(la).orientation_ratio
    elapsed = time.perf_counter() - start
    names = ["JACOBI", "DH", "BISMUT_ZERO", "BISMUT_FLAT", "BISMUT_COMPLEX", "GK_TORSION", "SKT", "TORSION_NONZERO"]
    failed = [n for n in names if not checks[n][0]]
    ok = not failed and ratio == 1 and elapsed < 1.0
    report(test_c12_lie_side, ok, f"failed={failed}, ratio={ratio}, {elapsed:.3f}s")
    assert not failed
    assert ratio == 1
    assert elapsed < 1.0


def test_c13_cohomology():
    """T^4 rotation: N = (1,0,4,0,1), b = (1,1,4,4,1,1), b_1 odd, Euler 0, Kunneth paths agree."""
    path = DATA_DIR / "t4_rotation.json"
    job = load_cohomology_job(path)
    mt = mapping_torus_cohomology(job.psi)
    parity = parity_check_b1(job.psi.matrices[1], job.j_matrix)
    kunneth = kunneth_with_s3(mt.betti)
    direct = mapping_torus_cohomology(product_with_s3_identity(job.psi)).betti
    ok = (mt.kernel_dims == [1, 0, 4, 0, 1] and mt.betti == [1, 1, 4, 4, 1, 1] and parity.b1_odd
          and mt.betti[1] % 2 == 1 and mt.euler_characteristic == 0 and kunneth == direct)
    report(test_c13_cohomology, ok, f"N={mt.kernel_dims}, b={mt.betti}, kunneth={kunneth}")
    assert mt.kernel_dims == [1, 0, 4, 0, 1]
    assert mt.betti == [1, 1, 4, 4, 1, 1]
    assert parity.b1_odd and mt.betti[1] % 2 == 1
    assert mt.euler_characteristic == 0
    assert kunneth == direct


def test_c14_borel_e2():
    """Borel E2 over p, q, u, v in [0, 4] equals a brute-force convolution of the Hodge tables."""
    spec = load_json(DATA_DIR / "borel_hopf_t4.json")
    base = load_hodge(spec["base"], DATA_DIR / "borel_hopf_t4.json")
    fiber = load_hodge(spec["fiber"], DATA_DIR / "borel_hopf_t4.json")
    mismatches = []
    for p, q, u, v in product(range(5), repeat=4):
        brute = 0
        for a, b, c, d in product(range(base.complex_dim + 1), range(base.complex_dim + 1),
                                  range(fiber.complex_dim + 1), range(fiber.complex_dim + 1)):
            if (a + c, b + d, a + b, c + d) == (p, q, u, v):
                brute += base.h(a, b) * fiber.h(c, d)
        if borel_e2(base, fiber, p, q, u, v) != brute:
            mismatches.append((p, q, u, v))
    report(test_c14_borel_e2, not mismatches, f"{len(mismatches)} mismatches of 625")
    assert not mismatches


def test_c15_ad_foundation():
    """Order-1 and order-2 jets agree with central differences to relative 1e-6 at 100 points per field."""
    worst = {"order1": 0.0, "order2": 0.0, "order2_values": 0.0}
    for hs in chart_models():
        p = hs.chart.sample(100, SEED)
        for f in coefficient_fields(hs):
            for k, v in finite_difference_check(f, p).items():
                worst[k] = max(worst[k], v)
    ok = max(worst.values()) < 1e-6
    report(test_c15_ad_foundation, ok, ", ".join(f"{k}={v:.1e}" for k, v in worst.items()))
    assert max(worst.values()) < 1e-6
