"""Measure consistency drift, energy diagnostics, scan smoke (masked runs)."""
import time

import numpy as np

from arcwave.kernels import default_params, rho_extremes, theta_inv_hat
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


def sech_env(n, length):
    g = Grid1D(n, length)
    xi = g.alpha - length / 2.0
    return EnvelopeField(g, (1.0 / np.cosh(xi)).astype(complex))


# ---- D monitored: consistency drift over t <= 1/eps (masked) ---------------
eps, b = 0.1, 0.05
L = scan_grid_length(eps, 12.0)
cfgD = SimConfig(eps=eps, k0=2.0, b=b, n=512, length=L, dt=0.04, t_end=10.0,
                 band_halfwidth=0.9)
A = sech_env(128, eps * L)
pk = wave_packet(A, eps, cfgD.model, corrections=True)
stD = packet_initial_state(pk, cfgD)
size0 = float(np.sqrt(L * np.sum(np.abs(stD.matrix) ** 2)))
outD = run(cfgD, stD, sample_every=10)
print(f"D monitored: size0={size0:.4f} eps2size={eps**2 * size0:.4e}")
worst1 = worst2 = 0.0
for s in outD.samples:
    c1, c2 = consistency_residual(s, b)
    worst1, worst2 = max(worst1, c1), max(worst2, c2)
print(f"  max c1={worst1:.4e} ({worst1/(eps**2*size0):.4f} of eps^2 size)")
print(f"  max c2={worst2:.4e} ({worst2/(eps**2*size0):.4f} of eps^2 size)")

# same at eps=0.2 to see the scaling of the plateau
eps2 = 0.2
L2 = scan_grid_length(eps2, 12.0)
cfg2 = SimConfig(eps=eps2, k0=2.0, b=b, n=512, length=L2, dt=0.04, t_end=5.0,
                 band_halfwidth=0.9)
A2 = sech_env(128, eps2 * L2)
pk2 = wave_packet(A2, eps2, cfg2.model, corrections=True)
st2 = packet_initial_state(pk2, cfg2)
size2 = float(np.sqrt(L2 * np.sum(np.abs(st2.matrix) ** 2)))
out2 = run(cfg2, st2, sample_every=10)
w1 = max(consistency_residual(s, b)[0] for s in out2.samples)
w2 = max(consistency_residual(s, b)[1] for s in out2.samples)
print(f"  eps=0.2: max c1={w1:.4e} ({w1/(eps2**2*size2):.4f}) "
      f"c2={w2:.4e} ({w2/(eps2**2*size2):.4f})")

# ---- E energy: zero, equivalence, growth ------------------------------------
print("E energy:")
eps = 0.1
for bb in (0.0, 0.05):
    L = scan_grid_length(eps, 12.0)
    cfg = SimConfig(eps=eps, k0=2.0, b=bb, n=512, length=L, dt=0.04, t_end=0.0)
    A = sech_env(128, eps * L)
    pk = wave_packet(A, eps, cfg.model, corrections=True)
    st0 = packet_initial_state(pk, cfg)
    params = default_params(2.0, bb, eps)
    for l in (0, 2):
        print(f"  b={bb} l={l}: E(R=0)={energy_diagnostic(st0, pk, l, params)!r}")
    k = cfg.grid.wavenumbers
    tinv = theta_inv_hat(k, eps, params.delta0)
    for seed in (1, 2):
        r = np.random.default_rng(seed)
        pert = [np.zeros(cfg.n, dtype=complex) for _ in range(2)]
        for _ in range(2):
            c = (r.normal(size=cfg.n) + 1j * r.normal(size=cfg.n)) * 1e-4
            c *= np.exp(-0.1 * np.abs(k))
            c[~cfg.grid.dealias_keep] = 0.0
            f = hermitian_symmetrize(
                SpectralField.from_coefficients(cfg.grid, c, is_real=False))
            pert.append(f.coefficients)
        st = SimState.from_matrix(cfg.grid, st0.matrix + np.array(pert), 0.0)
        approx = build(pk, cfg.grid, 0.0)
        R = [(st.fields[i].coefficients - approx[i].coefficients) * tinv / eps**2.5
             for i in range(4)]
        for l in (0, 2):
            dl = (1j * k) ** l
            plain = 0.5 * L * sum(float(np.sum(np.abs(dl * R[i]) ** 2))
                                  for i in (2, 3))
            E = energy_diagnostic(st, pk, l, params)
            print(f"  b={bb} seed={seed} l={l}: E/plain={E/plain:.6f}")
    if bb > 0:
        for l in (0, 2):
            lo, hi = rho_extremes(-2, l, params)
            print(f"  b={bb} l={l}: rho extremes=({lo:.4f},{hi:.4f})")

# growth run (masked dynamics, envelope co-advanced)
eps, b = 0.1, 0.05
L = scan_grid_length(eps, 12.0)
cfgE = SimConfig(eps=eps, k0=2.0, b=b, n=512, length=L, dt=0.04, t_end=10.0,
                 band_halfwidth=0.9)
A = sech_env(128, eps * L)
pk = wave_packet(A, eps, cfgE.model, corrections=True)
params = default_params(2.0, b, eps)
coeffs = nls_coefficients(2.0, b)
outE = run(cfgE, packet_initial_state(pk, cfgE), sample_every=50)
A_now = A
vals = {0: [], 2: []}
prev_t = 0.0
for s in outE.samples:
    if s.t > prev_t:
        steps = round((s.t - prev_t) / cfgE.dt)
        A_now = nls_solve(A_now, coeffs, dtau=eps**2 * cfgE.dt,
                          tau_end=A_now.tau + eps**2 * (s.t - prev_t),
                          sample_every=steps).final()
        prev_t = s.t
    pk_now = wave_packet(EnvelopeField(A.grid, A_now.values), eps, cfgE.model,
                         corrections=True)
    for l in (0, 2):
        vals[l].append(energy_diagnostic(s, pk_now, l, params))
for l in (0, 2):
    v = np.array(vals[l])
    print(f"E growth l={l}: E0={v[0]:.4e} Emax={v.max():.4e}")
    print(f"   values={np.array2string(v, precision=4)}")

# ---- F fast-CI error scan smoke ---------------------------------------------
t0 = time.time()
tpl = ScanTemplate(b=0.0, n=512, n_env=128, horizon="tau0_over_eps")
res = error_scan((0.2, 0.15), tpl)
print(f"F smoke: errors={[f'{r.sup_error:.5g}' for r in res.rows]} "
      f"flags={[r.flagged for r in res.rows]} slope={res.slope:+.3f} "
      f"time={time.time()-t0:.1f}s")
