"""Fine-grained modified-energy series on the unperturbed packet run."""
import time

import numpy as np

from arcwave.kernels import default_params
from arcwave.nls import EnvelopeField, nls_coefficients, solve as nls_solve
from arcwave.sim import SimConfig, energy_diagnostic, packet_initial_state, run, scan_grid_length
from arcwave.spectral import Grid1D
from arcwave.wavepacket import wave_packet

eps, b = 0.1, 0.05
L = scan_grid_length(eps, 12.0)
cfg = SimConfig(eps=eps, k0=2.0, b=b, n=512, length=L, dt=0.04, t_end=10.0,
                band_halfwidth=0.9)
g = Grid1D(128, eps * L)
xi = g.alpha - g.length / 2.0
A = EnvelopeField(g, (1.0 / np.cosh(xi)).astype(complex))
pk = wave_packet(A, eps, cfg.model, corrections=True)
params = default_params(2.0, b, eps)
coeffs = nls_coefficients(2.0, b)

t0 = time.time()
out = run(cfg, packet_initial_state(pk, cfg), sample_every=25)  # dt=1 samples
A_now = A
prev_t = 0.0
rows = {0: [], 2: []}
for s in out.samples:
    if s.t > prev_t:
        steps = round((s.t - prev_t) / cfg.dt)
        A_now = nls_solve(A_now, coeffs, dtau=eps**2 * cfg.dt,
                          tau_end=A_now.tau + eps**2 * (s.t - prev_t),
                          sample_every=steps).final()
        prev_t = s.t
    pk_now = wave_packet(EnvelopeField(g, A_now.values), eps, cfg.model,
                         corrections=True)
    for l in (0, 2):
        rows[l].append(energy_diagnostic(s, pk_now, l, params))
el = time.time() - t0
for l in (0, 2):
    v = np.array(rows[l])
    print(f"l={l}: {np.array2string(v, precision=4)}")
    base = v[6]
    late = v[6:]
    print(f"   max={v.max():.4e}  |late/base-1| max={np.max(np.abs(late/base-1)):.4f}")
    print(f"   increments={np.array2string(np.diff(v), precision=3)}")
print(f"time={el:.1f}s")
