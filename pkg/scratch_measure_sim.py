"""Measure everything test_sim.py will freeze."""
import time

import numpy as np

from arcwave.dispersion import ModelParams
from arcwave.equations import TruncatedSystem
from arcwave.kernels import default_params, first_block_symbol, rho_extremes, theta_inv_hat
from arcwave.nls import EnvelopeField, nls_coefficients, solve as nls_solve
from arcwave.sim import (
    ScanTemplate,
    SimConfig,
    SimState,
    consistency_residual,
    energy_diagnostic,
    error_scan,
    packet_initial_state,
    run,
    scan_grid_length,
)
from arcwave.spectral import Grid1D, SpectralField, hermitian_symmetrize
from arcwave.wavepacket import build, wave_packet

rng = np.random.default_rng(42)


def random_state(grid, scale, seed):
    r = np.random.default_rng(seed)
    rows = []
    for _ in range(4):
        c = (r.normal(size=grid.n_points) + 1j * r.normal(size=grid.n_points)) * scale
        c[~grid.dealias_keep] = 0.0
        f = hermitian_symmetrize(SpectralField.from_coefficients(grid, c, is_real=False))
        rows.append(f)
    return SimState(*rows, t=0.0)


# ---- A: reality drift over 1e4 steps --------------------------------------
t0 = time.time()
cfgA = SimConfig(eps=0.1, k0=2.0, b=0.13, n=256, length=8 * np.pi, dt=0.01,
                 t_end=100.0)
stA = random_state(cfgA.grid, 1e-4, 7)
outA = run(cfgA, stA)
elA = time.time() - t0
print(f"A reality: steps={outA.steps} defect={outA.final.reality_defect():.3e} "
      f"maxamp={np.max(np.abs(outA.final.matrix)):.3e} time={elA:.1f}s")

# ---- B: dt self-convergence ------------------------------------------------
grB = Grid1D(128, 8 * np.pi)
stB = random_state(grB, 0.05, 13)
finals = {}
for dt in (0.05, 0.025, 0.0125):
    cfg = SimConfig(eps=0.1, k0=2.0, b=0.13, n=128, length=8 * np.pi, dt=dt,
                    t_end=1.0)
    finals[dt] = run(cfg, stB).final.matrix
e1 = np.max(np.abs(finals[0.05] - finals[0.025]))
e2 = np.max(np.abs(finals[0.025] - finals[0.0125]))
print(f"B dt-conv: e1={e1:.3e} e2={e2:.3e} ratio={e1/e2:.3f} "
      f"order={np.log2(e1/e2):.3f}")

# ---- C: linear exactness ----------------------------------------------------
cfgC = SimConfig(eps=0.1, k0=2.0, b=0.13, n=256, length=8 * np.pi, dt=0.05,
                 t_end=10.0)
stC = random_state(cfgC.grid, 0.5, 3)
outC = run(cfgC, stC, linear_only=True)
lam = cfgC.system.linear_symbols
exact = np.exp(lam * 10.0) * stC.matrix
print(f"C linear: err={np.max(np.abs(outC.final.matrix - exact)):.3e}")

# ---- G: single-mode rhs oracle ---------------------------------------------
for b in (0.0, 0.13):
    grG = Grid1D(256, 8 * np.pi)
    sysG = TruncatedSystem(grG, b)
    U = np.zeros((4, 256), dtype=complex)
    U[0, grG.mode_index(2.0)] = 0.5
    U[0, grG.mode_index(-2.0)] = 0.5
    N = sysG.nonlinear(U)
    v_m1 = N[0, grG.mode_index(4.0)]
    v_p1 = N[1, grG.mode_index(4.0)]
    ex_m1 = first_block_symbol(-1, -1, 2.0, 2.0, b) / 8.0
    ex_p1 = first_block_symbol(1, -1, 2.0, 2.0, b) / 8.0
    print(f"G b={b}: m1 err={abs(v_m1 - ex_m1):.2e} p1 err={abs(v_p1 - ex_p1):.2e} "
          f"mode0max={np.max(np.abs(N[:, 0])):.1e} "
          f"block2max={np.max(np.abs(N[2:])):.1e}")
    # off-target support
    mask = np.ones(256, dtype=bool)
    for kk in (4.0, -4.0, 0.0):
        mask[grG.mode_index(kk)] = False
    print(f"   off-target max={np.max(np.abs(N[:2][:, mask])):.2e}")

# ---- D: consistency residual -----------------------------------------------
print("D consistency scaling (t=0):")
for eps in (0.2, 0.1, 0.05):
    L = scan_grid_length(eps, 12.0)
    cfg = SimConfig(eps=eps, k0=2.0, b=0.05, n=1024, length=L, dt=0.04,
                    t_end=0.0)
    env = Grid1D(256, eps * L)
    xi = env.alpha - env.length / 2.0
    A = EnvelopeField(env, (1.0 / np.cosh(xi)).astype(complex))
    pk = wave_packet(A, eps, cfg.model, corrections=True)
    st = packet_initial_state(pk, cfg)
    c1, c2 = consistency_residual(st, 0.05)
    size = float(np.sqrt(L * np.sum(np.abs(st.matrix) ** 2)))
    print(f"  eps={eps}: c1={c1:.4e} c2={c2:.4e} size={size:.3f} "
          f"c1/(e2 size)={c1/(eps**2*size):.4f} c2/(e2 size)={c2/(eps**2*size):.4f}")

# monitored run t <= 1/eps
eps = 0.1
L = scan_grid_length(eps, 12.0)
cfgD = SimConfig(eps=eps, k0=2.0, b=0.05, n=512, length=L, dt=0.04, t_end=10.0)
env = Grid1D(128, eps * L)
xi = env.alpha - env.length / 2.0
A = EnvelopeField(env, (1.0 / np.cosh(xi)).astype(complex))
pk = wave_packet(A, eps, cfgD.model, corrections=True)
stD = packet_initial_state(pk, cfgD)
outD = run(cfgD, stD, sample_every=25)
c0 = consistency_residual(outD.samples[0], 0.05)
ratios1, ratios2 = [], []
for s in outD.samples:
    c1, c2 = consistency_residual(s, 0.05)
    ratios1.append(c1 / c0[0])
    ratios2.append(c2 / c0[1])
print(f"D monitored: c0={c0[0]:.3e},{c0[1]:.3e} max ratio1={max(ratios1):.3f} "
      f"max ratio2={max(ratios2):.3f} n_samples={len(outD.samples)}")

# ---- E: energy diagnostic ---------------------------------------------------
print("E energy:")
eps = 0.1
for b in (0.0, 0.05):
    L = scan_grid_length(eps, 12.0)
    cfg = SimConfig(eps=eps, k0=2.0, b=b, n=512, length=L, dt=0.04, t_end=0.0)
    env = Grid1D(128, eps * L)
    xi = env.alpha - env.length / 2.0
    A = EnvelopeField(env, (1.0 / np.cosh(xi)).astype(complex))
    pk = wave_packet(A, eps, cfg.model, corrections=True)
    st0 = packet_initial_state(pk, cfg)
    params = default_params(2.0, b, eps)
    # zero error
    for l in (0, 2):
        e0 = energy_diagnostic(st0, pk, l, params)
        print(f"  b={b} l={l}: E(R=0)={e0!r}")
    # equivalence: perturb second block
    k = cfg.grid.wavenumbers
    tinv = theta_inv_hat(k, eps, params.delta0)
    for seed in (1, 2):
        r = np.random.default_rng(seed)
        pert = []
        for i in range(4):
            if i < 2:
                pert.append(np.zeros(cfg.n, dtype=complex))
                continue
            c = (r.normal(size=cfg.n) + 1j * r.normal(size=cfg.n)) * 1e-4
            c *= np.exp(-0.1 * np.abs(k))  # smooth
            c[~cfg.grid.dealias_keep] = 0.0
            f = hermitian_symmetrize(
                SpectralField.from_coefficients(cfg.grid, c, is_real=False))
            pert.append(f.coefficients)
        mat = st0.matrix + np.array(pert)
        st = SimState.from_matrix(cfg.grid, mat, 0.0)
        approx = build(pk, cfg.grid, 0.0)
        R = [(st.fields[i].coefficients - approx[i].coefficients) * tinv / eps**2.5
             for i in range(4)]
        for l in (0, 2):
            dl = (1j * k) ** l
            plain = 0.5 * L * sum(float(np.sum(np.abs(dl * R[i]) ** 2))
                                  for i in (2, 3))
            E = energy_diagnostic(st, pk, l, params)
            print(f"  b={b} seed={seed} l={l}: ratio E/plain={E/plain:.6f}")
    if b > 0:
        for l in (0, 2):
            lo, hi = rho_extremes(-2, l, params)
            print(f"  b={b} l={l}: rho extremes=({lo:.4f},{hi:.4f})")

# growth run
b = 0.05
L = scan_grid_length(0.1, 12.0)
cfgE = SimConfig(eps=0.1, k0=2.0, b=b, n=512, length=L, dt=0.04, t_end=10.0,
                 band_halfwidth=None)
env = Grid1D(128, 0.1 * L)
xi = env.alpha - env.length / 2.0
A = EnvelopeField(env, (1.0 / np.cosh(xi)).astype(complex))
pk = wave_packet(A, 0.1, cfgE.model, corrections=True)
params = default_params(2.0, b, 0.1)
coeffs = nls_coefficients(2.0, b)
outE = run(cfgE, packet_initial_state(pk, cfgE), sample_every=50)
A_now = A
vals = {0: [], 2: []}
prev_t = 0.0
for s in outE.samples:
    if s.t > prev_t:
        nsteps = max(1, round((s.t - prev_t) * 0.1**2 / (0.1**2 * cfgE.dt)))
        A_now = nls_solve(A_now, coeffs, dtau=0.1**2 * cfgE.dt,
                          tau_end=A_now.tau + 0.1**2 * (s.t - prev_t),
                          sample_every=nsteps).final()
        prev_t = s.t
    pk_now = wave_packet(EnvelopeField(env, A_now.values), 0.1, cfgE.model,
                         corrections=True)
    for l in (0, 2):
        vals[l].append(energy_diagnostic(s, pk_now, l, params))
for l in (0, 2):
    v = np.array(vals[l])
    print(f"E growth l={l}: E0={v[0]:.4e} Emax={v.max():.4e} "
          f"rel growth={(v.max() - v[0]) / max(abs(v[0]), 1e-300):.3f}")
    print(f"   values={np.array2string(v, precision=3)}")

# ---- F: fast-CI error scan smoke -------------------------------------------
t0 = time.time()
tpl = ScanTemplate(b=0.0, n=512, n_env=128, horizon="tau0_over_eps")
res = error_scan((0.2, 0.15), tpl)
print(f"F smoke: errors={[f'{r.sup_error:.4g}' for r in res.rows]} "
      f"slope={res.slope:+.3f} time={time.time()-t0:.1f}s")
