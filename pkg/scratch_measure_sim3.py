"""Consistency-drift time series; seeded modified-energy growth runs."""
import numpy as np

from arcwave.kernels import default_params, theta_inv_hat
from arcwave.nls import EnvelopeField, nls_coefficients, solve as nls_solve
from arcwave.sim import (
    SimConfig,
    SimState,
    consistency_residual,
    energy_diagnostic,
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


# ---- D: consistency defect time series --------------------------------------
for eps in (0.2, 0.1):
    b = 0.05
    L = scan_grid_length(eps, 12.0)
    cfg = SimConfig(eps=eps, k0=2.0, b=b, n=512, length=L, dt=0.04,
                    t_end=round(1.0 / eps, 2), band_halfwidth=0.9)
    A = sech_env(128, eps * L)
    pk = wave_packet(A, eps, cfg.model, corrections=True)
    st = packet_initial_state(pk, cfg)
    size0 = float(np.sqrt(L * np.sum(np.abs(st.matrix) ** 2)))
    out = run(cfg, st, sample_every=max(1, cfg.n_steps // 10))
    ts = [s.t for s in out.samples]
    c1s = [consistency_residual(s, b)[0] for s in out.samples]
    c2s = [consistency_residual(s, b)[1] for s in out.samples]
    print(f"D eps={eps}: size0={size0:.3f} eps*size={eps*size0:.3f}")
    print("   t=", np.array2string(np.array(ts), precision=2))
    print("  c1=", np.array2string(np.array(c1s), precision=4))
    print("  c2=", np.array2string(np.array(c2s), precision=4))
    print(f"  max c1/(eps*size)={max(c1s)/(eps*size0):.4f} "
          f"c2/(eps*size)={max(c2s)/(eps*size0):.4f}")

# ---- E: seeded modified-energy growth ---------------------------------------
eps, b = 0.1, 0.05
L = scan_grid_length(eps, 12.0)
A = sech_env(128, eps * L)
params = default_params(2.0, b, eps)
coeffs = nls_coefficients(2.0, b)

for l, e_target in ((0, 100 * 2.1e7), (2, 100 * 1.25e10)):
    cfg = SimConfig(eps=eps, k0=2.0, b=b, n=512, length=L, dt=0.04,
                    t_end=10.0, band_halfwidth=0.9)
    pk = wave_packet(A, eps, cfg.model, corrections=True)
    st0 = packet_initial_state(pk, cfg)
    k = cfg.grid.wavenumbers
    r = np.random.default_rng(5)
    pert = [np.zeros(cfg.n, dtype=complex) for _ in range(2)]
    for _ in range(2):
        c = (r.normal(size=cfg.n) + 1j * r.normal(size=cfg.n)) * 1e-4
        c *= np.exp(-0.5 * np.abs(np.abs(k) - 2.0))  # centered on the carrier band
        c[~cfg.grid.dealias_keep] = 0.0
        f = hermitian_symmetrize(
            SpectralField.from_coefficients(cfg.grid, c, is_real=False))
        pert.append(f.coefficients)
    pert = np.array(pert)
    trial = SimState.from_matrix(cfg.grid, st0.matrix + pert, 0.0)
    e_trial = energy_diagnostic(trial, pk, l, params)
    scale = np.sqrt(e_target / e_trial)
    pert *= scale
    st = SimState.from_matrix(cfg.grid, st0.matrix + pert, 0.0)
    print(f"E l={l}: delta={1e-4*scale:.2e} max|pert|={np.max(np.abs(pert)):.3e} "
          f"(packet max={np.max(np.abs(st0.matrix)):.3e})")
    out = run(cfg, st, sample_every=25)
    A_now = A
    prev_t = 0.0
    Es, plains = [], []
    tinv = theta_inv_hat(k, eps, params.delta0)
    for s in out.samples:
        if s.t > prev_t:
            steps = round((s.t - prev_t) / cfg.dt)
            A_now = nls_solve(A_now, coeffs, dtau=eps**2 * cfg.dt,
                              tau_end=A_now.tau + eps**2 * (s.t - prev_t),
                              sample_every=steps).final()
            prev_t = s.t
        pk_now = wave_packet(EnvelopeField(A.grid, A_now.values), eps,
                             cfg.model, corrections=True)
        Es.append(energy_diagnostic(s, pk_now, l, params))
        approx = build(pk_now, cfg.grid, s.t)
        dl = (1j * k) ** l
        plain = 0.0
        for i in (2, 3):
            R = (s.fields[i].coefficients - approx[i].coefficients) * tinv / eps**2.5
            plain += 0.5 * L * float(np.sum(np.abs(dl * R) ** 2))
        plains.append(plain)
    Es, plains = np.array(Es), np.array(plains)
    print(f"   E/E0   ={np.array2string(Es / Es[0], precision=4)}")
    print(f"   pl/pl0 ={np.array2string(plains / plains[0], precision=4)}")
    print(f"   max |E/E0-1|={np.max(np.abs(Es / Es[0] - 1.0)):.4f} "
          f"(C*eps with C={np.max(np.abs(Es / Es[0] - 1.0)) / eps:.2f})")
