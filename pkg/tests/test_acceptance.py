"""Acceptance suite: one end-to-end check per criterion, each printing a
single PASS line with the measured numbers (run with -s to see them)."""

import numpy as np
import pytest

from gkhydro import interface, kmc, pde
from gkhydro.cltvar import (cross_identity_check, dirichlet_identity_check,
                            spectral_gap_sweep, standard_zetas)
from gkhydro.conductivity import (DiffusionTable, diffusion_matrix, minimize,
                                  remainder_from_results)
from gkhydro.harness import ExperimentConfig, run_interface_pipeline
from gkhydro.interface import MobilityTensor, layer_width_1d
from gkhydro.localfn import LocalFunction, VectorLocalFunction
from gkhydro.measures import equivalence_gap
from gkhydro.pde import PdeProblem, solve
from gkhydro.rates import (glauber_kawasaki_bistable, model_from_dict,
                           nongradient_model_1d, reaction_term, ssep_model,
                           validate)

D1 = DiffusionTable.constant(np.eye(1))


def test_criterion_01_exact_identities():
    # both identities close to <= 1e-9 on the non-gradient model, d=1,
    # ell in {2,3}, every filling, 11 boundary fills, F in {0, random r=1}
    model = nongradient_model_1d()
    r = model.radius()
    rng = np.random.default_rng(3)
    F_rand = VectorLocalFunction(
        (LocalFunction([(0,), (1,)], rng.standard_normal(4)),)
    )
    worst = 0.0
    n_checked = 0
    for ell in (2, 3):
        vol = 2 * ell + 1
        for _, zeta in standard_zetas(ell, r, 1, n_random=8):
            for m in range(vol + 1):
                for F in (VectorLocalFunction.zero(1), F_rand):
                    _, _, g1 = dirichlet_identity_check(
                        model, F, ell, zeta, m, [1.0]
                    )
                    _, _, g2, _ = cross_identity_check(
                        model, F, ell, zeta, m, [1.0], [1.0]
                    )
                    worst = max(worst, g1, g2)
                    n_checked += 1
    assert worst <= 1e-9
    print(f"\ncriterion 01 PASS: worst identity gap {worst:.2e} "
          f"over {n_checked} cases (tol 1e-9)")


def test_criterion_02_ssep_exactness():
    worst = 0.0
    for d, n in ((1, 1), (1, 2)):
        model = ssep_model(d=d)
        b = validate(model)
        for rho in np.linspace(0.1, 0.9, 9):
            # bounds= makes diffusion_matrix assert the uniform eigenvalue
            # band on every returned matrix
            D = diffusion_matrix(minimize(model, float(rho), n=n), bounds=b)
            worst = max(worst, float(np.abs(D - np.eye(d)).max()))
    assert worst <= 1e-10
    print(f"\ncriterion 02 PASS: max |D - I| = {worst:.2e} "
          f"over 9 densities, n in {{1,2}} (tol 1e-10)")


def test_criterion_03_monotonicity_and_remainder_decay():
    model = nongradient_model_1d()
    rhos = (0.1, 0.3, 0.5, 0.7, 0.9)
    results = {
        n: {rho: minimize(model, rho, n=n) for rho in rhos}
        for n in (0, 1, 2, 3)
    }
    for rho in rhos:
        vals = [results[n][rho].c_hat[0, 0] for n in (0, 1, 2, 3)]
        for a, b in zip(vals, vals[1:]):
            assert b <= a + 1e-12
    # remainder against the richest corrector class available
    sups = []
    for n in (0, 1, 2):
        sups.append(max(
            float(np.abs(remainder_from_results(
                results[n][rho], results[3][rho]
            )).max())
            for rho in rhos
        ))
    assert sups[0] > sups[1] > sups[2] > 0.0
    print(f"\ncriterion 03 PASS: quadratic form monotone in n; "
          f"sup_rho |R| = {sups[0]:.3e} > {sups[1]:.3e} > {sups[2]:.3e}")


def test_criterion_04_equivalence_of_ensembles():
    h = LocalFunction.occupancy((0,)) * LocalFunction.occupancy((1,))
    ells = np.arange(2, 7)
    gaps = []
    for ell in ells:
        vol = 2 * ell + 1
        m = round(0.5 * vol)
        gaps.append(equivalence_gap(h, int(ell), m, 1))
    slope = float(np.polyfit(np.log(ells), np.log(gaps), 1)[0])
    assert -1.3 <= slope <= -0.7
    print(f"\ncriterion 04 PASS: equivalence gap slope {slope:.3f} "
          f"(target -1 +- 0.3)")


def test_criterion_05_spectral_gap_trend():
    rows, slope = spectral_gap_sweep(ssep_model(d=1), [2, 3, 4, 5])
    assert all(g > 0 for _, _, g in rows)
    assert -2.3 <= slope <= -1.7
    print(f"\ncriterion 05 PASS: spectral gap slope {slope:.3f} "
          f"(target -2 +- 0.3)")


def test_criterion_06_pde_oracles():
    # heat mode against the continuum rate (the discrete-symbol correction
    # is far below the tolerance at M=256)
    M, a, t = 256, 0.1, 0.02
    prob = PdeProblem(D=D1, f=None, K=0.0, d=1, M=M)
    res = solve(prob, lambda v: 0.5 + a * np.sin(2 * np.pi * v[..., 0]),
                horizon=t)
    amp = float(np.max(res.final.values) - 0.5)
    heat_err = abs(amp / (a * np.exp(-4 * np.pi**2 * t)) - 1.0)
    assert heat_err <= 0.005

    from scipy.integrate import solve_ivp
    f = reaction_term(glauber_kawasaki_bistable(d=1, K=1.0))
    K = 8.0
    prob2 = PdeProblem(D=D1, f=f, K=K, d=1, M=32)
    res2 = solve(prob2, 0.6, horizon=0.05)
    ref = solve_ivp(lambda _, y: K * f(y), (0.0, 0.05), [0.6],
                    rtol=1e-12, atol=1e-14).y[0, -1]
    ode_err = float(np.abs(res2.final.values - ref).max())
    assert ode_err <= 1e-6

    rng = np.random.default_rng(0)
    vals = np.clip(0.5 + 0.3 * rng.standard_normal(64), 0.05, 0.95)
    prob3 = PdeProblem(D=D1, f=None, K=0.0, d=1, M=64)
    res3 = solve(prob3, vals, horizon=0.005)
    assert res3.mass_drift <= 1e-13

    prob4 = PdeProblem(D=D1, f=f, K=16.0, d=1, M=64)
    res4 = solve(prob4, lambda v: 0.5 + 0.3 * np.sin(2 * np.pi * v[..., 0]),
                 horizon=0.01)
    rep = res4.report
    overshoot = max(0.0, float(res4.final.values.max()) - rep.upper,
                    rep.lower - float(res4.final.values.min()))
    assert not rep.violated and overshoot <= 1e-10
    print(f"\ncriterion 06 PASS: heat mode {heat_err:.2e}, "
          f"ODE {ode_err:.2e}, mass drift {res3.mass_drift:.2e}, "
          f"monitor overshoot {overshoot:.2e}")


def test_criterion_07_interface_scaling():
    A = 64.0
    f = reaction_term(glauber_kawasaki_bistable(d=1, K=1.0, amplitude=A))
    fp = f.deriv()(0.5)
    M = 512
    x = np.arange(M) / M
    widths = {}
    for K in (64.0, 256.0):
        t_K = np.log(K) / (2 * K * fp)
        prob = PdeProblem(D=D1, f=f, K=K, d=1, M=M)
        res = solve(prob, lambda v: 0.5 + 0.2 * np.sin(2 * np.pi * v[..., 0]),
                    horizon=4.0 * t_K)
        widths[K] = layer_width_1d(x, res.final.values, 0.25, 0.75)
    ratio = widths[64.0] / widths[256.0]
    assert 1.6 <= ratio <= 2.4

    K = 256.0
    t_K = np.log(K) / (2 * K * fp)
    prob = PdeProblem(D=D1, f=f, K=K, d=1, M=M)
    res = solve(prob, lambda v: 0.5 + 0.2 * np.sin(2 * np.pi * v[..., 0]),
                horizon=1.5 * t_K)
    # the initial sine crosses 1/2 at v = 0 and v = 1/2; cells outside a
    # K^{-1/2} strip around the crossings must have reached rho_pm
    strip = K ** -0.5
    outside = np.minimum(
        np.abs((x + 0.5) % 1.0 - 0.5), np.abs((x - 0.5 + 0.5) % 1.0 - 0.5)
    ) > strip
    vals = res.final.values[outside]
    frac = float(
        (np.minimum(np.abs(vals - 0.25), np.abs(vals - 0.75)) <= 0.05).mean()
    )
    assert frac >= 0.95
    print(f"\ncriterion 07 PASS: width ratio {ratio:.3f} (target 2 +- 0.4); "
          f"generated fraction {frac:.3f} (>= 0.95)")


def test_criterion_08_anisotropic_flow():
    f = reaction_term(glauber_kawasaki_bistable(d=2, K=1.0, amplitude=16.0))
    mob = MobilityTensor(D=DiffusionTable.constant(np.eye(2)), f=f,
                         rho_minus=0.25, rho_plus=0.75)
    mu_err = max(
        float(np.abs(mob.mu([np.cos(a), np.sin(a)]) - np.eye(2)).max())
        for a in np.linspace(0.0, 2 * np.pi, 64, endpoint=False)
    )
    assert mu_err <= 1e-6

    R0, t_end = 0.3, 0.02
    curve = interface.FrontCurve.circle((0.5, 0.5), R0, 512)
    _, final = interface.evolve(curve, np.eye(2), horizon=t_end,
                                dt=interface.stable_step_size(curve))
    radii = np.linalg.norm(final.vertices - 0.5, axis=1)
    circ_err = abs(radii.mean() / np.sqrt(R0**2 - 2 * t_end) - 1.0)
    assert circ_err <= 0.01

    ell = interface.FrontCurve.ellipse((0.5, 0.5), 0.3, 0.2, 512)
    a0 = ell.area()
    _, fin = interface.evolve(ell, np.eye(2), horizon=0.01,
                              dt=interface.stable_step_size(ell))
    rate_err = abs((a0 - fin.area()) / (2 * np.pi * 0.01) - 1.0)
    assert rate_err <= 0.02
    print(f"\ncriterion 08 PASS: |mu - I| {mu_err:.2e}, circle radius "
          f"error {circ_err:.2e}, area rate error {rate_err:.2e}")


def test_criterion_09_hydrodynamic_trend():
    one = LocalFunction.constant(1.0)
    model = ssep_model(d=1, K=2.0, flip_plus=one, flip_minus=one)
    f = reaction_term(model)
    phis = {
        "one": lambda v: np.ones(v.shape[:-1]),
        "sin": lambda v: np.sin(2 * np.pi * v[..., 0]),
        "cos": lambda v: np.cos(2 * np.pi * v[..., 0]),
    }
    profile = lambda v: 0.5 + 0.2 * np.sin(2 * np.pi * v[..., 0])
    times = [0.02, 0.04, 0.06, 0.08, 0.1]
    n_seeds = 16
    results = {}
    for N in (128, 256, 512):
        prob = PdeProblem(D=D1, f=f, K=2.0, d=1, M=N)
        res = solve(prob, profile, 0.1, snapshot_times=times)
        acc = {name: np.zeros(len(times)) for name in phis}
        for seed in range(n_seeds):
            state = kmc.init(model, N, profile, seed)
            t_prev = 0.0
            for k, fld in enumerate(res.snapshots):
                kmc.advance(state, fld.t - t_prev)
                t_prev = fld.t
                for name, phi in phis.items():
                    acc[name][k] += abs(
                        kmc.empirical_pairing(state, phi) - fld.pairing(phi)
                    )
        results[N] = {name: float((acc[name] / n_seeds).max())
                      for name in phis}
    for name in phis:
        vals = [results[N][name] for N in (128, 256, 512)]
        assert vals[0] > vals[1] > vals[2]
        assert vals[2] <= 0.02
    final = {k: round(v, 4) for k, v in results[512].items()}
    print(f"\ncriterion 09 PASS: discrepancies decrease over "
          f"N=128,256,512; at N=512: {final} (tol 0.02)")


def test_criterion_10_front_tracks_sharp_flow(tmp_path):
    raw = {
        "model": {"preset": "bistable", "d": 2, "K": 16.0,
                  "amplitude": 256.0},
        "interface": {
            # ensemble averaging estimates the mean (hydrodynamic) front;
            # a single run is dominated by flip-noise shape fluctuations
            "N": 192, "seeds": list(range(24)), "n_times": 5,
            "block_ell": 2, "sigma": 4.0, "R0": 0.3,
            "n_vertices": 256, "smooth_passes": 30,
        },
    }
    cfg = ExperimentConfig(model=model_from_dict(raw["model"]), raw=raw)
    report = run_interface_pipeline(cfg, tmp_path / "c10")
    cells = report["max_grid_cells"]
    span = (report["distances"][0]["t"], report["distances"][-1]["t"])
    assert cells <= 4.0
    print(f"\ncriterion 10 PASS: max front distance {cells:.2f} grid cells "
          f"over t in [{span[0]:.4f}, {span[1]:.4f}] (tol 4)")
