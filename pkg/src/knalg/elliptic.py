"""Numerical Weierstrass sigma function and local Laurent expansions.

The sigma function for the lattice ``2*omega1*Z + 2*omega2*Z`` is built
from its Taylor series about the origin,

    sigma(z) = z * exp( - sum_{k>=2} G_{2k} z^{2k} / (2k) ),

where ``G_{2k}`` are the lattice Eisenstein sums.  ``G_4`` and ``G_6``
come from rapidly convergent nome series in ``tau = omega2/omega1``, the
higher weights from the standard quadratic recurrence.  Points far from
the origin are first reduced to the nearest cell with the quasi-period
law ``sigma(z + 2*omega) = -sigma(z) * exp(2*eta*(z + omega))``.

Everything is computed for the normalized lattice with half-periods
``(1, tau)`` and rescaled, so conditioning is independent of the overall
lattice scale.
"""

from __future__ import annotations

import cmath
import math
from typing import Callable

import numpy as np

from .errors import BasisError, ConfigError, LeadingOrderError
from .series import DEFAULT_ABS_TOL, LaurentSeries

_POLYVAL = np.polynomial.polynomial.polyval

#: Taylor length of the internal sigma series.  Coefficients up to this
#: degree are exact; the entire-function tail beyond it is negligible for
#: all points produced by cell reduction on reasonable lattices.
DEFAULT_SIGMA_TERMS = 180


def _eisenstein_lambert(tau: complex, power: int) -> complex:
    """``sum_{n>=1} n**power * q**n / (1 - q**n)`` with ``q = exp(2*pi*i*tau)``."""
    q = cmath.exp(2j * math.pi * tau)
    if abs(q) >= 0.995:
        raise ConfigError(
            f"Im(tau) = {tau.imag:g} is too small for the nome series to converge")
    total = 0.0 + 0.0j
    qn = 1.0 + 0.0j
    for n in range(1, 6000):
        qn *= q
        term = (n ** power) * qn / (1.0 - qn)
        total += term
        if abs(term) < 1e-20 * max(1.0, abs(total)):
            return total
    raise ConfigError("nome series failed to converge; tau is too extreme")


def _g_weights(tau: complex, count: int) -> list[complex]:
    """Eisenstein sums ``G_4, G_6, ..., G_{2*(count+1)}`` for the lattice
    with half-periods (1, tau), i.e. periods (2, 2*tau)."""
    e4 = 1.0 + 240.0 * _eisenstein_lambert(tau, 3)
    e6 = 1.0 - 504.0 * _eisenstein_lambert(tau, 5)
    # G_{2k} for Z + tau*Z, then rescale by 2**(-2k) for the doubled lattice.
    g = [0j] * (count + 2)  # g[k] holds G_{2k}; slots 0,1 unused
    g[2] = (math.pi ** 4 / 45.0) * e4 / 16.0
    g[3] = (2.0 * math.pi ** 6 / 945.0) * e6 / 64.0
    for k in range(4, count + 2):
        acc = 0.0 + 0.0j
        for j in range(2, k - 1):
            acc += (2 * j - 1) * (2 * (k - j) - 1) * g[j] * g[k - j]
        g[k] = 3.0 * acc / ((2 * k + 1) * (k - 3) * (2 * k - 1))
    return g[2:]


def _sigma_taylor(tau: complex, n_terms: int) -> np.ndarray:
    """Taylor coefficients of sigma for half-periods (1, tau), degrees
    0 .. n_terms (inclusive)."""
    n_weights = n_terms // 2
    gs = _g_weights(tau, n_weights)
    # log(sigma(z)/z) = -sum G_{2k} z^{2k} / (2k), exponentiated termwise.
    p = np.zeros(n_terms + 1, dtype=complex)
    for i, gval in enumerate(gs):
        two_k = 2 * (i + 2)
        if two_k <= n_terms:
            p[two_k] = -gval / two_k
    e = np.zeros(n_terms + 1, dtype=complex)
    e[0] = 1.0
    for n in range(1, n_terms + 1):
        acc = 0.0 + 0.0j
        for j in range(4, n + 1, 2):
            if p[j] != 0:
                acc += j * p[j] * e[n - j]
        e[n] = acc / n
    sig = np.zeros(n_terms + 2, dtype=complex)
    sig[1:] = e
    return sig


class Lattice:
    """Period lattice ``2*omega1*Z + 2*omega2*Z`` with quasi-period data.

    ``tau = omega2/omega1`` must have positive imaginary part.  The
    quasi-period constants ``eta1, eta2`` (values of the Weierstrass zeta
    function at the half-periods) are computed from the sigma series and
    validated against the Legendre relation
    ``eta1*omega2 - eta2*omega1 = i*pi/2``.
    """

    def __init__(self, omega1: complex, omega2: complex,
                 n_terms: int = DEFAULT_SIGMA_TERMS,
                 legendre_tol: float = DEFAULT_ABS_TOL):
        omega1 = complex(omega1)
        omega2 = complex(omega2)
        if omega1 == 0:
            raise ConfigError("omega1 must be nonzero")
        tau = omega2 / omega1
        if not (tau.imag > 0.0):
            raise ConfigError(
                f"Im(omega2/omega1) = {tau.imag:g} must be positive")
        self.omega1 = omega1
        self.omega2 = omega2
        self.tau = tau
        self.n_terms = int(n_terms)
        self._sig = _sigma_taylor(tau, self.n_terms)
        self._dsig = self._sig[1:] * np.arange(1, self._sig.size)
        # Quasi-period constants of the normalized lattice, from zeta = sigma'/sigma
        # evaluated directly at the half-periods 1 and tau.
        eta1n = _POLYVAL(1.0 + 0j, self._dsig) / _POLYVAL(1.0 + 0j, self._sig)
        eta2n = _POLYVAL(tau, self._dsig) / _POLYVAL(tau, self._sig)
        self._eta1n = eta1n
        self._eta2n = eta2n
        self.eta1 = eta1n / omega1
        self.eta2 = eta2n / omega1
        residual = abs(self.eta1 * self.omega2 - self.eta2 * self.omega1 - 0.5j * math.pi)
        self.legendre_residual = residual
        if residual > legendre_tol:
            raise BasisError(
                f"Legendre residual {residual:.3e} exceeds {legendre_tol:g}; "
                "the lattice is outside the accurate regime (bring tau closer "
                "to the fundamental domain or raise n_terms)")

    @classmethod
    def from_tau(cls, tau: complex, **kwargs) -> "Lattice":
        return cls(1.0, tau, **kwargs)

    # ------------------------------------------------------------------

    def _reduce(self, zn: np.ndarray):
        """Shift normalized points by lattice vectors to the nearest copy
        of the origin.  Returns (z0, m, n) with ``zn = z0 + 2m + 2n*tau``."""
        tau = self.tau
        b = zn.imag / (2.0 * tau.imag)
        a = (zn.real - 2.0 * b * tau.real) / 2.0
        m = np.round(a)
        n = np.round(b)
        z0 = zn - 2.0 * m - 2.0 * n * tau
        best = np.abs(z0)
        for dm in (-1.0, 0.0, 1.0):
            for dn in (-1.0, 0.0, 1.0):
                if dm == 0.0 and dn == 0.0:
                    continue
                cand = zn - 2.0 * (m + dm) - 2.0 * (n + dn) * tau
                d = np.abs(cand)
                better = d < best
                if np.any(better):
                    z0 = np.where(better, cand, z0)
                    m = np.where(better, m + dm, m)
                    n = np.where(better, n + dn, n)
                    best = np.where(better, d, best)
        return z0, m, n

    def distance_to_lattice(self, z: complex) -> float:
        """Distance from ``z`` to the nearest lattice point (in lattice units)."""
        zn = np.asarray([complex(z) / self.omega1])
        z0, _, _ = self._reduce(zn)
        return float(np.abs(z0)[0] * abs(self.omega1))

    def min_period(self) -> float:
        """Length of the shortest nonzero lattice vector."""
        c: list[complex] = []
        for mm in (-1, 0, 1):
            for nn in (-1, 0, 1):
                if mm == 0 and nn == 0:
                    continue
                c.append(2 * mm * self.omega1 + 2 * nn * self.omega2)
        return min(abs(v) for v in c)


class SigmaEvaluator:
    """Evaluator for sigma, sigma' and zeta on a fixed lattice.

    Values are exact-scale: ``sigma(z)`` is the sigma function of the
    lattice itself, with ``sigma(0) = 0`` and ``sigma'(0) = 1``.
    Evaluation is pure and accepts scalars or numpy arrays.
    """

    def __init__(self, lattice: Lattice):
        self.lattice = lattice

    def _eval_normalized(self, zn: np.ndarray):
        lat = self.lattice
        z0, m, n = lat._reduce(zn)
        s0 = _POLYVAL(z0, lat._sig)
        s1 = _POLYVAL(z0, lat._dsig)
        eta_lin = 2.0 * m * lat._eta1n + 2.0 * n * lat._eta2n
        expo = np.exp(eta_lin * (z0 + m + n * lat.tau))
        parity = np.mod(m + n + m * n, 2.0)
        sign = 1.0 - 2.0 * parity
        f = sign * expo
        return f * s0, f * (s1 + s0 * eta_lin)

    def _pair(self, z):
        lat = self.lattice
        arr = np.atleast_1d(np.asarray(z, dtype=complex)) / lat.omega1
        sig, dsig = self._eval_normalized(arr)
        return sig * lat.omega1, dsig

    def sigma(self, z):
        """sigma(z); scalar in, scalar out (arrays pass through)."""
        val, _ = self._pair(z)
        return complex(val[0]) if np.isscalar(z) or np.ndim(z) == 0 else val

    def sigma_prime(self, z):
        _, val = self._pair(z)
        return complex(val[0]) if np.isscalar(z) or np.ndim(z) == 0 else val

    def zeta(self, z):
        """Weierstrass zeta = sigma'/sigma (quasi-additive under periods)."""
        s, ds = self._pair(z)
        val = ds / s
        return complex(val[0]) if np.isscalar(z) or np.ndim(z) == 0 else val


def expand_around(f: Callable[[np.ndarray], np.ndarray], center: complex,
                  known_leading_order: int, depth: int, radius: float = 1.0,
                  abs_tol: float = DEFAULT_ABS_TOL,
                  n_samples: int | None = None) -> LaurentSeries:
    """Laurent expansion of a meromorphic ``f`` in the local coordinate
    ``z - center``, given its exact leading order there.

    ``z**(-leading) * f`` is analytic and nonzero at the center, so its
    Taylor coefficients are recovered by contour sampling and shifted
    back.  ``radius`` must keep every other singularity of ``f`` strictly
    outside the sampling circle.
    """
    lead = int(known_leading_order)

    def g(points: np.ndarray) -> np.ndarray:
        return np.asarray(f(points), dtype=complex) * (points - center) ** (-lead)

    base = LaurentSeries.from_samples(g, center, radius, 0, depth,
                                      n_samples=n_samples)
    # Weight by radius**k: in these units all recovered coefficients share
    # the scale of the sampled values and the comparison is meaningful.
    weighted = np.abs(base.coeffs) * radius ** np.arange(depth, dtype=float)
    scale = float(np.max(weighted)) if weighted.size else 0.0
    if abs(base.leading()) <= abs_tol * max(1.0, scale):
        raise LeadingOrderError(
            f"declared leading order {lead} at {center:g} is inconsistent: "
            f"leading coefficient {base.leading():.3e} vanishes")
    return base.shift(lead)
