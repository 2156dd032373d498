"""Zeros and geometry of the quadratic resonance function.

For a carrier wavenumber ``k0`` the central object is

    r(k, b) = omega(k, b) - omega(k - k0, b) - omega(k0, b)

whose nontrivial zeros mark wavenumbers that exchange energy with the carrier
at leading order.  The module locates those zeros, classifies the zero
structure as the Bond number varies, computes the two critical Bond numbers
where the structure changes (both are fold points, i.e. tangencies of r), and
issues the stability verdict for the carrier.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .dispersion import omega, omega_deriv

__all__ = [
    "ResonanceReport",
    "CriticalBonds",
    "InflectionPoints",
    "NonresonanceResult",
    "StabilityVerdict",
    "Classification",
    "r_hat",
    "r_general",
    "find_zeros",
    "critical_bonds",
    "k1_of_b",
    "inflection_points",
    "nonresonance_check",
    "stability",
]

#: bisection tolerance for zeros in k
ZERO_XTOL = 1e-12
#: tolerance for the critical Bond numbers
BOND_XTOL = 1e-12
#: |r| threshold below which a stationary point counts as a double zero
TANGENCY_TOL = 1e-8


class Classification(str, enum.Enum):
    """Qualitative zero structure of r on [k0/2, k_max]."""

    ONLY_K0 = "only_k0"
    TWO_ZEROS = "two_zeros"
    EXTRA_ZERO_PAIR = "extra_zero_pair"
    TANGENCY = "tangency"


@dataclass(frozen=True)
class ResonanceReport:
    k0: float
    b: float
    zeros: tuple[float, ...]
    double_zeros: tuple[float, ...]
    classification: Classification
    k1: Optional[float] = None

    def __post_init__(self) -> None:
        if list(self.zeros) != sorted(self.zeros):
            raise ValueError("zeros must be sorted ascending")
        if self.k1 is not None and not self.k1 > self.k0:
            raise ValueError(f"k1={self.k1} must exceed k0={self.k0}")


@dataclass(frozen=True)
class CriticalBonds:
    b0: float
    b1: float

    def __post_init__(self) -> None:
        if not (0.0 < self.b0 < self.b1 < 1.0 / 3.0):
            raise ValueError(
                f"critical Bond numbers must satisfy 0 < b0 < b1 < 1/3, got "
                f"b0={self.b0}, b1={self.b1}"
            )


@dataclass(frozen=True)
class InflectionPoints:
    k3: float
    k4: float


@dataclass(frozen=True)
class NonresonanceResult:
    ok: bool
    failures: tuple[str, ...]
    margins: dict[str, float]


@dataclass(frozen=True)
class StabilityVerdict:
    stable: bool
    ratio: Optional[float]
    characterization_agrees: bool
    reason: str = ""


# --------------------------------------------------------------------------
# the resonance functions
# --------------------------------------------------------------------------


def r_hat(k, b: float, k0: float):
    """r(k,b) = omega(k,b) - omega(k-k0,b) - omega(k0,b); vectorized in k."""
    return omega(k, b) - omega(np.asarray(k) - k0, b) - omega(k0, b)


def _r_hat_deriv(k, b: float, k0: float):
    return omega_deriv(k, b, 1) - omega_deriv(np.asarray(k) - k0, b, 1)


def r_general(j1: int, j2: int, k: float, l: float, m: float, b: float) -> complex:
    """Three-frequency combination i*(j1*omega(k) + omega(l) - j2*omega(m)).

    ``j1, j2`` are the component signs (only their sign enters).  The value is
    purely imaginary for real arguments.
    """
    s1 = 1.0 if j1 > 0 else -1.0
    s2 = 1.0 if j2 > 0 else -1.0
    return 1j * (s1 * omega(k, b) + omega(l, b) - s2 * omega(m, b))


# --------------------------------------------------------------------------
# zero finding
# --------------------------------------------------------------------------


def _stationary_point(k_seed: float, b: float, k0: float,
                      lo: float, hi: float) -> Optional[float]:
    """Newton iteration for a zero of d(r)/dk started at ``k_seed``.

    Returns the converged stationary point inside [lo, hi], or None.
    """
    k = k_seed
    for _ in range(60):
        g = float(_r_hat_deriv(k, b, k0))
        h = 1e-6 * max(1.0, abs(k))
        gp = (float(_r_hat_deriv(k + h, b, k0)) - float(_r_hat_deriv(k - h, b, k0))) / (2 * h)
        if gp == 0.0:
            return None
        step = g / gp
        k -= step
        if not (lo - 1e-6 <= k <= hi + 1e-6):
            return None
        if abs(step) < 1e-13 * max(1.0, abs(k)):
            return k
    return None


def find_zeros(k0: float, b: float, k_max: float) -> ResonanceReport:
    """Locate all zeros of r(.,b) on [k0/2, k_max].

    Sign-change zeros are bracketed on a scan grid and bisected; tangential
    (double) zeros — where r and its k-derivative vanish together — are found
    by a Newton iteration on the stationarity condition seeded from scan
    minima of |r|, plus explicit checks at the two symmetry points k0/2 and
    k0 where folds occur.  k0 itself is always a zero and is included
    analytically.

    Raises ValueError when the scan tail has not settled into a monotone
    approach of its limit, which signals that zeros may hide beyond k_max.
    """
    if not k_max > k0:
        raise ValueError(f"k_max={k_max} must exceed k0={k0}")

    lo = k0 / 2.0
    step = 0.01
    n_samples = int(np.ceil((k_max - lo) / step)) + 1
    if n_samples > 500_000:
        n_samples = 500_000
    ks = np.linspace(lo, k_max, n_samples)
    rv = r_hat(ks, b, k0)

    # --- tail sanity: monotone and not heading toward an out-of-window zero
    tail = rv[-max(10, n_samples // 50):]
    diffs = np.diff(tail)
    if not (np.all(diffs >= 0) or np.all(diffs <= 0)):
        raise ValueError(
            f"k_max={k_max} too small: r is not yet monotone near the window end"
        )
    if (np.all(diffs >= 0) and rv[-1] < -TANGENCY_TOL) or (
        np.all(diffs <= 0) and rv[-1] > TANGENCY_TOL
    ):
        raise ValueError(
            f"k_max={k_max} too small: r is monotone but has not crossed its "
            f"limit sign yet (r(k_max)={rv[-1]:.3e}); a zero may lie beyond"
        )

    def rfun(k: float) -> float:
        return float(r_hat(k, b, k0))

    zeros: list[float] = [k0]

    # --- transversal zeros by bracketing
    sign_change = np.where(rv[:-1] * rv[1:] < 0.0)[0]
    for i in sign_change:
        z = brentq(rfun, ks[i], ks[i + 1], xtol=ZERO_XTOL)
        if abs(z - k0) > 1e-7:
            zeros.append(float(z))

    # --- tangential zeros: scan minima of |r| away from sign changes
    double_zeros: list[float] = []
    absr = np.abs(rv)
    interior = (absr[1:-1] <= absr[:-2]) & (absr[1:-1] <= absr[2:]) & (absr[1:-1] < 1e-4)
    candidates = [float(ks[i + 1]) for i in np.where(interior)[0]]
    candidates.extend([k0 / 2.0, k0])  # the two fold locations
    for seed in candidates:
        ks_star = _stationary_point(seed, b, k0, lo, k_max)
        if ks_star is None:
            continue
        if abs(rfun(ks_star)) > TANGENCY_TOL:
            continue
        if any(abs(ks_star - d) < 1e-6 for d in double_zeros):
            continue
        is_transversal = any(
            abs(ks_star - z) < 1e-6 and abs(float(_r_hat_deriv(z, b, k0))) > 1e-6
            for z in zeros
        )
        if is_transversal:
            continue
        double_zeros.append(float(ks_star))
        if not any(abs(ks_star - z) < 1e-6 for z in zeros):
            zeros.append(float(ks_star))

    zeros_sorted = tuple(sorted(zeros))
    doubles_sorted = tuple(sorted(double_zeros))

    above = [z for z in zeros_sorted if z > k0 + 1e-7]
    below = [z for z in zeros_sorted if z < k0 - 1e-7]
    if doubles_sorted:
        cls = Classification.TANGENCY
    elif above:
        cls = Classification.TWO_ZEROS
    elif below:
        cls = Classification.EXTRA_ZERO_PAIR
    else:
        cls = Classification.ONLY_K0
    k1 = max(above) if above else None

    return ResonanceReport(
        k0=k0, b=b, zeros=zeros_sorted, double_zeros=doubles_sorted,
        classification=cls, k1=k1,
    )


# --------------------------------------------------------------------------
# critical Bond numbers
# --------------------------------------------------------------------------


def _fold_newton(k_seed: float, b_seed: float, k0: float,
                 steps: int = 30) -> tuple[float, float]:
    """Newton iteration on the 2-system (r, dr/dk) = 0 in the (k,b) plane.

    Fold points are regular zeros of this system even though they are
    degenerate zeros of r alone.  Jacobian by central differences.
    """
    x = np.array([k_seed, b_seed], dtype=float)

    def F(v: np.ndarray) -> np.ndarray:
        return np.array([
            float(r_hat(v[0], v[1], k0)),
            float(_r_hat_deriv(v[0], v[1], k0)),
        ])

    for _ in range(steps):
        f0 = F(x)
        J = np.empty((2, 2))
        for j, h in enumerate((1e-7 * max(1.0, abs(x[0])), 1e-8)):
            dv = np.zeros(2)
            dv[j] = h
            J[:, j] = (F(x + dv) - F(x - dv)) / (2 * h)
        try:
            delta = np.linalg.solve(J, f0)
        except np.linalg.LinAlgError:
            break
        x -= delta
        if np.max(np.abs(delta)) < 1e-14:
            break
    return float(x[0]), float(x[1])


@lru_cache(maxsize=64)
def critical_bonds(k0: float) -> CriticalBonds:
    """The two Bond numbers where the zero structure of r changes.

    Both are fold points of the zero set:

    * at ``b1`` the mirror pair of extra zeros is born in a tangency at the
      symmetry point k0/2 (dr/dk vanishes there identically, so the fold
      reduces to the scalar condition r(k0/2, b) = 0);
    * at ``b0`` the extra zero crosses the trivial zero at k0, where the fold
      reduces to dr/dk(k0, b) = 0 (r(k0, b) = 0 holds for every b).

    The scalar conditions are solved by bracketed bisection and the results
    polished/validated by a 2D Newton iteration on (r, dr/dk) = 0 in (k, b).
    """
    if not k0 > 0:
        raise ValueError(f"k0 must be positive, got {k0}")

    def at_half(b: float) -> float:
        return float(r_hat(k0 / 2.0, b, k0))

    def slope_at_k0(b: float) -> float:
        return float(_r_hat_deriv(k0, b, k0))

    third = 1.0 / 3.0
    blo, bhi = 1e-12, third - 1e-12
    if at_half(blo) * at_half(bhi) > 0:
        trace = [(bb, at_half(bb)) for bb in np.linspace(0.01, third - 0.01, 9)]
        raise ValueError(f"failed to bracket b1 for k0={k0}; scan trace {trace}")
    b1 = brentq(at_half, blo, bhi, xtol=BOND_XTOL)

    if slope_at_k0(blo) * slope_at_k0(bhi) > 0:
        trace = [(bb, slope_at_k0(bb)) for bb in np.linspace(0.01, third - 0.01, 9)]
        raise ValueError(f"failed to bracket b0 for k0={k0}; scan trace {trace}")
    b0 = brentq(slope_at_k0, blo, bhi, xtol=BOND_XTOL)

    # fold-point polish: both seeds should already satisfy the 2-system
    k1_star, b1_star = _fold_newton(k0 / 2.0, b1, k0)
    k0_star, b0_star = _fold_newton(k0, b0, k0)
    if abs(b1_star - b1) < 1e-6 and abs(k1_star - k0 / 2.0) < 1e-6:
        b1 = b1_star
    if abs(b0_star - b0) < 1e-6 and abs(k0_star - k0) < 1e-6:
        b0 = b0_star

    return CriticalBonds(b0=float(b0), b1=float(b1))


def k1_of_b(k0: float, b: float) -> float:
    """The resonant partner wavenumber: largest zero of r on (k0, inf).

    Exists exactly for 0 < b < b0(k0); decreasing in b and diverging like
    1/b as b -> 0.
    """
    bonds = critical_bonds(k0)
    if not (0.0 < b < bonds.b0):
        raise ValueError(
            f"k1 exists only for Bond numbers in (0, b0={bonds.b0:.6g}); got {b}"
        )

    def rfun(k: float) -> float:
        return float(r_hat(k, b, k0))

    lo = k0 * (1.0 + 1e-9)
    hi = k0 + 1.0
    while rfun(hi) < 0.0:
        hi = k0 + 2.0 * (hi - k0)
        if hi > 1e9:
            raise ValueError(f"no sign change located below k={hi:.3g}")
    return float(brentq(rfun, lo, hi, xtol=ZERO_XTOL, maxiter=200))


def inflection_points(b: float) -> InflectionPoints:
    """Concavity landmarks of the dispersion curve: k3 (omega''=0), k4 (omega'''=0).

    Defined for 0 < b < 1/3; as b -> 1/3 the inflection k3 slides to 0 and
    the curve becomes globally convex, so larger b is rejected.
    """
    if not (0.0 < b < 1.0 / 3.0):
        raise ValueError(f"inflection points require 0 < b < 1/3, got b={b}")

    def d2(k: float) -> float:
        return float(omega_deriv(k, b, 2))

    def d3(k: float) -> float:
        return float(omega_deriv(k, b, 3))

    lo = 1e-4
    hi = 1.0
    while d2(hi) < 0.0:
        hi *= 2.0
        if hi > 1e6:
            raise ValueError(f"failed to bracket k3 for b={b}")
    k3 = brentq(d2, lo, hi, xtol=1e-12)

    hi4 = max(2.0 * k3, 1.0)
    while d3(hi4) > 0.0:
        hi4 *= 2.0
        if hi4 > 1e6:
            raise ValueError(f"failed to bracket k4 for b={b}")
    k4 = brentq(d3, k3, hi4, xtol=1e-12)
    return InflectionPoints(k3=float(k3), k4=float(k4))


# --------------------------------------------------------------------------
# nonresonance and stability
# --------------------------------------------------------------------------


def nonresonance_check(k0: float, b: float, M: int = 6,
                       tol: float = 1e-9) -> NonresonanceResult:
    """Margins of the three scalar nonresonance conditions.

    Checks, each with margin >= tol:

    * ``nrb1``: group velocity at k0 differs from the long-wave speed 1;
    * ``nrb3``: the dispersion curve is genuinely curved at k0;
    * ``nrb4``: no harmonic collision +/- omega(m k0) = m omega(k0) for
      integer m in [2, M).
    """
    margins: dict[str, float] = {}
    failures: list[str] = []

    m1 = abs(float(omega_deriv(k0, b, 1)) - 1.0)
    margins["nrb1"] = m1
    if m1 < tol:
        failures.append("nrb1")

    m3 = abs(float(omega_deriv(k0, b, 2)))
    margins["nrb3"] = m3
    if m3 < tol:
        failures.append("nrb3")

    w0 = float(omega(k0, b))
    m4 = np.inf
    for m in range(2, M):
        wm = float(omega(m * k0, b))
        m4 = min(m4, abs(wm - m * w0), abs(wm + m * w0))
    margins["nrb4"] = float(m4)
    if m4 < tol:
        failures.append("nrb4")

    return NonresonanceResult(ok=not failures, failures=tuple(failures),
                              margins=margins)


def stability(k0: float, b: float) -> StabilityVerdict:
    """Three-wave stability verdict for the carrier wavenumber.

    For b in (0, b0) the carrier resonates with the pair (k1, k0-k1) and the
    verdict is the sign of the interaction-coefficient ratio at that triad
    (negative ratio = stable); the ratio comes from numerical kernel
    extraction of the first-block equation.  The equivalent closed
    characterization — k0 is stable iff it is not the largest wavenumber of
    its triad — is evaluated alongside and reported as
    ``characterization_agrees``.

    Outside (0, b0) there is no resonant partner above k0 and the carrier is
    reported stable by absence of extra resonances.
    """
    bonds = critical_bonds(k0)
    if not (0.0 < b < bonds.b0):
        return StabilityVerdict(
            stable=True, ratio=None, characterization_agrees=True,
            reason="no resonant partner above k0 for this Bond number",
        )

    from . import kernels  # deferred: kernels imports this module

    k1 = k1_of_b(k0, b)
    c1, c2, triad = kernels.stability_ratio_coefficients(k0, b, k1)
    if abs(c2) == 0.0:
        raise ValueError(
            f"kernel extraction returned a zero denominator at triad {triad}"
        )
    ratio = float((c1 / c2).real)
    stable = ratio < 0.0
    max_criterion_stable = k0 < max(k1, abs(k0 - k1))
    return StabilityVerdict(
        stable=stable,
        ratio=ratio,
        characterization_agrees=(stable == max_criterion_stable),
        reason=f"triad ({k0}, {triad[0]}, {triad[1]})",
    )
