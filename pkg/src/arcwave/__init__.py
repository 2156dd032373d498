"""arcwave: spectral tools for a diagonalized arc-length water-wave model.

The package collects the pieces used in our capillary-gravity wavepacket
study: dispersion-relation utilities, resonance diagnostics, the bilinear
interaction kernels of the quadratic-truncated diagonalized system, normal
form weights, three-wave interaction ODEs, a cubic Schrodinger envelope
solver, wavepacket assembly, and the time-stepping loop itself.
"""

__version__ = "0.1.0"
