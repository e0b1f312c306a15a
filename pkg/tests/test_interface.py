import numpy as np
import pytest

from gkhydro.conductivity import DiffusionTable
from gkhydro.interface import (FrontCurve, InterfaceError, MobilityTensor,
                               StepProfile, evolve, evolve_front,
                               extract_level_set, hausdorff_torus,
                               layer_width_1d, sharp_vs_diffuse,
                               stable_step_size, torus_delta)
from gkhydro.rates import glauber_kawasaki_bistable, reaction_term

D_ID = DiffusionTable.constant(np.eye(2))
A = 16.0
CUBIC = reaction_term(glauber_kawasaki_bistable(d=2, K=1.0, amplitude=A))


def make_mob(n_quad=2049):
    return MobilityTensor(D=D_ID, f=CUBIC, rho_minus=0.25, rho_plus=0.75,
                          n_quad=n_quad)


def w_exact(rho):
    # with a_e = 1: W = -2 int f = 2A (u^4/4 - u^2/32 + 1/1024), u = rho - 1/2,
    # which factors as 2A (u^2/2 - 1/32)^2
    u = rho - 0.5
    return 2.0 * A * (u**2 / 2.0 - 1.0 / 32.0) ** 2


def test_w_closed_form():
    mob = make_mob()
    for rho in (0.25, 0.3, 0.5, 0.6, 0.75):
        assert mob.w([1.0, 0.0], rho) == pytest.approx(w_exact(rho), abs=1e-12)
    with pytest.raises(InterfaceError):
        mob.w([1.0, 0.0], 0.9)


def test_lambda_closed_form():
    # sqrt(W) = sqrt(2A)(1/32 - u^2/2) integrates to sqrt(2A)/96
    mob = make_mob()
    expect = np.sqrt(2.0 * A) / 96.0
    assert mob.lambda_e([1.0, 0.0]) == pytest.approx(expect, rel=1e-6)
    # invariance under the direction for an isotropic D
    assert mob.lambda_e([0.0, 1.0]) == pytest.approx(expect, rel=1e-6)


def test_mu_identity_for_isotropic_D():
    mob = make_mob()
    for ang in np.linspace(0.0, 2 * np.pi, 7, endpoint=False):
        e = np.array([np.cos(ang), np.sin(ang)])
        assert np.allclose(mob.mu(e), np.eye(2), atol=1e-5)
    assert mob.tangential_bound([1.0, 0.0]) == pytest.approx(1.0, abs=1e-5)


def test_mu_symmetric_and_quadrature_stable():
    D = DiffusionTable.constant(np.diag([1.0, 2.0]))
    mob = MobilityTensor(D=D, f=CUBIC, rho_minus=0.25, rho_plus=0.75)
    e = np.array([1.0, 1.0]) / np.sqrt(2.0)
    m = mob.mu(e)
    assert np.allclose(m, m.T, atol=1e-8)
    fine = MobilityTensor(D=D, f=CUBIC, rho_minus=0.25, rho_plus=0.75,
                          n_quad=20481)
    assert np.allclose(m, fine.mu(e), atol=1e-6)


def test_unbalanced_reaction_rejected():
    f = np.polynomial.Polynomial([-0.2, 1.0]) * np.polynomial.Polynomial(
        [-0.5, 1.0]
    ) * np.polynomial.Polynomial([-0.75, 1.0]) * (-16.0)
    mob = MobilityTensor(D=D_ID, f=f, rho_minus=0.2, rho_plus=0.75)
    with pytest.raises(InterfaceError):
        mob.lambda_e([1.0, 0.0])


def test_torus_delta():
    assert torus_delta(np.array([0.9, 0.1]), np.array([0.1, 0.9])) == pytest.approx(
        [0.2, -0.2]
    )
    assert torus_delta(np.array([0.3]), np.array([0.4]))[0] == pytest.approx(0.1)


def test_circle_geometry():
    c = FrontCurve.circle((0.5, 0.5), 0.3, 512)
    assert c.length() == pytest.approx(2 * np.pi * 0.3, rel=1e-3)
    assert c.area() == pytest.approx(np.pi * 0.09, rel=1e-3)
    kappa = c.curvature()
    assert np.allclose(kappa, 1.0 / 0.3, rtol=1e-2)
    _, normal = c.tangents_normals()
    outward = (c.vertices - 0.5) * normal
    assert np.all(outward.sum(axis=1) > 0)


def test_circle_across_periodic_seam():
    c = FrontCurve.circle((0.05, 0.95), 0.2, 256)
    assert c.length() == pytest.approx(2 * np.pi * 0.2, rel=1e-3)
    assert abs(c.area()) == pytest.approx(np.pi * 0.04, rel=1e-3)
    r = c.resample(128)
    assert len(r) == 128
    assert r.length() == pytest.approx(c.length(), rel=1e-2)


def test_smoothing_removes_noise():
    rng = np.random.default_rng(0)
    base = FrontCurve.circle((0.5, 0.5), 0.25, 256)
    noisy = FrontCurve(base.vertices + 0.004 * rng.standard_normal((256, 2)))
    sm = noisy.smoothed(passes=30)
    assert hausdorff_torus(sm.vertices, base.vertices) < hausdorff_torus(
        noisy.vertices, base.vertices
    )
    assert np.abs(sm.curvature()).max() < np.abs(noisy.curvature()).max()


def test_is_simple():
    assert FrontCurve.circle((0.5, 0.5), 0.2).is_simple()
    bow = FrontCurve(np.array([[0.3, 0.3], [0.7, 0.7], [0.3, 0.7], [0.7, 0.3]]))
    assert not bow.is_simple()


def test_front_validation():
    with pytest.raises(InterfaceError):
        FrontCurve(np.zeros((3, 2)))
    with pytest.raises(InterfaceError):
        FrontCurve(np.zeros((8, 3)))


def test_circle_shrinks_at_exact_rate():
    R0, t_end = 0.3, 0.02
    curve = FrontCurve.circle((0.5, 0.5), R0, 256)
    dt = stable_step_size(curve)
    _, final = evolve(curve, np.eye(2), horizon=t_end, dt=dt)
    radii = np.linalg.norm(final.vertices - 0.5, axis=1)
    assert radii.mean() == pytest.approx(np.sqrt(R0**2 - 2 * t_end), rel=0.01)


def test_area_rate_minus_two_pi():
    # d(area)/dt = -2 pi for curvature flow of any convex curve
    curve = FrontCurve.ellipse((0.5, 0.5), 0.3, 0.2, 512)
    dt = stable_step_size(curve)
    t_end = 0.01
    a0 = curve.area()
    _, final = evolve(curve, np.eye(2), horizon=t_end, dt=dt)
    assert a0 - final.area() == pytest.approx(2 * np.pi * t_end, rel=0.02)


def test_evolve_front_callable_and_batch_agree():
    mob = make_mob()
    ev = mob.tabulate(n_angles=128)
    curve = FrontCurve.circle((0.5, 0.5), 0.25, 128)
    a = evolve_front(curve, ev, 1e-5)
    b = evolve_front(curve, lambda n: ev(n), 1e-5)
    assert np.allclose(a.vertices, b.vertices, atol=1e-10)


def test_extract_level_set_droplet():
    M, R0 = 128, 0.3
    x = np.arange(M) / M
    gx, gy = np.meshgrid(x, x, indexing="ij")
    r = np.sqrt((gx - 0.5) ** 2 + (gy - 0.5) ** 2)
    field = 0.25 + 0.5 * 0.5 * (1.0 - np.tanh((r - R0) / 0.03))
    front = extract_level_set(field, 0.5)
    radii = np.linalg.norm(front.vertices - 0.5, axis=1)
    assert np.abs(radii - R0).max() < 1.5 / M
    # outward normal must point toward the high-density interior: clockwise
    assert front.area() < 0.0
    with pytest.raises(InterfaceError):
        extract_level_set(np.full((16, 16), 0.5), 0.9)


def test_extract_level_set_across_seam():
    M, R0 = 128, 0.2
    x = np.arange(M) / M
    gx, gy = np.meshgrid(x, x, indexing="ij")
    dx = (gx - 0.05 + 0.5) % 1.0 - 0.5
    dy = (gy - 0.95 + 0.5) % 1.0 - 0.5
    r = np.sqrt(dx**2 + dy**2)
    field = 0.25 + 0.5 * 0.5 * (1.0 - np.tanh((r - R0) / 0.03))
    front = extract_level_set(field, 0.5)
    d = np.linalg.norm(
        torus_delta(front.vertices, np.array([0.05, 0.95])), axis=1
    )
    assert np.abs(d - R0).max() < 2.0 / M


def test_step_profile_roundtrip_and_pairing():
    R0 = 0.25
    circle = FrontCurve.circle((0.5, 0.5), R0, 256)
    # counterclockwise circle: outward normal away from center, so the
    # plus phase fills the exterior
    step = StepProfile(circle, 0.25, 0.75)
    M = 256
    vals = step.rasterize(M)
    assert vals[M // 2, M // 2] == 0.25
    assert vals[0, 0] == 0.75
    area = np.pi * R0**2
    expect = 0.75 * (1 - area) + 0.25 * area
    assert step.pairing(lambda v: np.ones(v.shape[:-1])) == pytest.approx(
        expect, abs=2.0 / M
    )
    back = extract_level_set(vals, 0.5)
    assert hausdorff_torus(back.vertices, circle.vertices) < 2.0 / M


def test_hausdorff_torus():
    a = np.array([[0.01, 0.5]])
    b = np.array([[0.99, 0.5]])
    assert hausdorff_torus(a, a) == 0.0
    assert hausdorff_torus(a, b) == pytest.approx(0.02, abs=1e-12)


def test_layer_width_synthetic_tanh():
    delta = 0.05
    x = np.linspace(-0.5, 0.5, 4001)
    vals = 0.5 + 0.25 * np.tanh(x / delta)
    width = layer_width_1d(x, vals, 0.25, 0.75)
    assert width == pytest.approx(2.0 * delta * np.arctanh(0.8), rel=1e-3)
    with pytest.raises(InterfaceError):
        layer_width_1d(x, np.full_like(x, 0.5), 0.25, 0.75)


def test_sharp_vs_diffuse_smoke():
    report = sharp_vs_diffuse(D_ID, CUBIC, K_list=[64.0], horizon=0.02,
                              M=64, R0=0.3, n_vertices=128,
                              snapshot_times=[0.01, 0.02])
    assert report["roots"] == pytest.approx((0.25, 0.5, 0.75), abs=1e-10)
    entries = report["K"][64.0]
    assert len(entries) == 2
    for entry in entries:
        assert entry["hausdorff"] < 0.05
