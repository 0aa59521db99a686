"""Truncated Laurent series over complex coefficients.

A series keeps an explicit window of known exponents: coefficients of
``z**k`` are stored for ``min_exp <= k < trunc_order``.  Below the window
the function is exactly zero (that is part of what the series *is*); at or
above ``trunc_order`` nothing is known, and queries there raise
:class:`~knalg.errors.WindowError`.  Every arithmetic operation computes
the tightest honest output window instead of padding with zeros, so
truncation loss is tracked rather than hidden.

Series are immutable; all operations return new objects and are safe to
share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DegenerateParameterError, SamplingError, WindowError

#: Default absolute tolerance for verification comparisons.  Double
#: precision residue pipelines with <= 1e3 terms stay well below this.
DEFAULT_ABS_TOL = 1e-9


@dataclass(frozen=True)
class Tolerance:
    """Magnitude below which a complex value counts as zero in checks."""

    abs_tol: float = DEFAULT_ABS_TOL

    def __post_init__(self) -> None:
        if not (self.abs_tol > 0.0):
            raise ValueError("abs_tol must be positive")

    def is_zero(self, value: complex) -> bool:
        return abs(value) < self.abs_tol


class LaurentSeries:
    """A truncated Laurent expansion in one local coordinate.

    ``coeffs[i]`` is the coefficient of ``z**(min_exp + i)`` and
    ``len(coeffs) == trunc_order - min_exp``.
    """

    __slots__ = ("min_exp", "trunc_order", "_coeffs")

    def __init__(self, min_exp: int, coeffs: Sequence[complex] | np.ndarray,
                 trunc_order: int | None = None):
        arr = np.asarray(coeffs, dtype=complex).copy()
        if arr.ndim != 1:
            raise ValueError("coeffs must be one-dimensional")
        if trunc_order is None:
            trunc_order = min_exp + arr.size
        if trunc_order - min_exp != arr.size:
            raise ValueError(
                f"window [{min_exp}, {trunc_order}) holds {trunc_order - min_exp} "
                f"coefficients, got {arr.size}")
        arr.flags.writeable = False
        object.__setattr__(self, "min_exp", int(min_exp))
        object.__setattr__(self, "trunc_order", int(trunc_order))
        object.__setattr__(self, "_coeffs", arr)

    def __setattr__(self, name, value):  # pragma: no cover - immutability guard
        raise AttributeError("LaurentSeries is immutable")

    # ------------------------------------------------------------------
    # constructors
    # ------------------------------------------------------------------

    @staticmethod
    def monomial(exponent: int, depth: int = 1, coeff: complex = 1.0) -> "LaurentSeries":
        """``coeff * z**exponent`` with an exactly-known window of ``depth``."""
        if depth < 1:
            raise ValueError("depth must be >= 1")
        c = np.zeros(depth, dtype=complex)
        c[0] = coeff
        return LaurentSeries(exponent, c)

    @staticmethod
    def zero(min_exp: int, trunc_order: int) -> "LaurentSeries":
        return LaurentSeries(min_exp, np.zeros(trunc_order - min_exp, dtype=complex))

    @staticmethod
    def from_samples(f: Callable[[np.ndarray], np.ndarray], center: complex,
                     radius: float, min_exp: int, trunc_order: int,
                     n_samples: int | None = None) -> "LaurentSeries":
        """Recover Laurent coefficients of ``f`` about ``center`` numerically.

        Uniform samples on the circle ``|z - center| = radius`` feed the
        trapezoidal approximation of the Cauchy coefficient integrals,
        which is spectrally accurate for ``f`` analytic in an annulus
        around the circle.  ``f`` must accept a complex numpy array.

        ``n_samples`` defaults to four times the requested coefficient
        count and must be at least twice that count.
        """
        n_coeff = trunc_order - min_exp
        if n_coeff <= 0:
            raise ValueError("trunc_order must exceed min_exp")
        if radius <= 0.0:
            raise ValueError("radius must be positive")
        if n_samples is None:
            n_samples = 4 * n_coeff
        if n_samples < 2 * n_coeff:
            raise SamplingError(
                f"{n_samples} samples cannot resolve {n_coeff} coefficients; "
                f"need at least {2 * n_coeff}")
        angles = 2.0 * np.pi * np.arange(n_samples) / n_samples
        points = center + radius * np.exp(1j * angles)
        values = np.asarray(f(points), dtype=complex)
        if values.shape != points.shape:
            raise SamplingError("sampled function returned a mismatched shape")
        if not (np.all(np.isfinite(values.real)) and np.all(np.isfinite(values.imag))):
            raise SamplingError(
                "non-finite sample on the contour: a singularity lies on or "
                "numerically too close to the sampling circle")
        hat = np.fft.fft(values) / n_samples
        ks = np.arange(min_exp, trunc_order)
        coeffs = hat[np.mod(ks, n_samples)] * radius ** (-ks.astype(float))
        return LaurentSeries(min_exp, coeffs)

    # ------------------------------------------------------------------
    # queries
    # ------------------------------------------------------------------

    @property
    def coeffs(self) -> np.ndarray:
        return self._coeffs

    def coefficient(self, k: int) -> complex:
        """Coefficient of ``z**k``.

        Exponents below the window are exactly zero.  Exponents at or
        above ``trunc_order`` are unknown and raise :class:`WindowError`.
        """
        if k >= self.trunc_order:
            raise WindowError(
                f"coefficient of z^{k} is beyond the truncation order "
                f"{self.trunc_order}")
        if k < self.min_exp:
            return 0.0 + 0.0j
        return complex(self._coeffs[k - self.min_exp])

    def residue(self) -> complex:
        """Coefficient of ``z**-1`` (the value of ``(1/2*pi*i) * contour integral``)."""
        return self.coefficient(-1)

    def evaluate(self, z: complex) -> complex:
        """Sum the stored window at a point (mostly for tests and checks)."""
        total = 0.0 + 0.0j
        zp = z ** self.min_exp
        for c in self._coeffs:
            total += c * zp
            zp *= z
        return total

    def leading(self) -> complex:
        """Coefficient at ``min_exp`` (zero-length windows have none)."""
        if self._coeffs.size == 0:
            raise WindowError("empty window has no leading coefficient")
        return complex(self._coeffs[0])

    # ------------------------------------------------------------------
    # arithmetic
    # ------------------------------------------------------------------

    def __add__(self, other: "LaurentSeries") -> "LaurentSeries":
        if not isinstance(other, LaurentSeries):
            return NotImplemented
        min_exp = min(self.min_exp, other.min_exp)
        trunc = min(self.trunc_order, other.trunc_order)
        out = np.zeros(max(trunc - min_exp, 0), dtype=complex)
        for s in (self, other):
            lo = max(s.min_exp, min_exp)
            hi = min(s.trunc_order, trunc)
            if hi > lo:
                out[lo - min_exp:hi - min_exp] += s._coeffs[lo - s.min_exp:hi - s.min_exp]
        return LaurentSeries(min_exp, out, max(trunc, min_exp))

    def __neg__(self) -> "LaurentSeries":
        return LaurentSeries(self.min_exp, -self._coeffs, self.trunc_order)

    def __sub__(self, other: "LaurentSeries") -> "LaurentSeries":
        if not isinstance(other, LaurentSeries):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, LaurentSeries):
            min_exp = self.min_exp + other.min_exp
            trunc = min(self.trunc_order + other.min_exp,
                        other.trunc_order + self.min_exp)
            n = max(trunc - min_exp, 0)
            if self._coeffs.size == 0 or other._coeffs.size == 0 or n == 0:
                return LaurentSeries.zero(min_exp, max(trunc, min_exp))
            full = np.convolve(self._coeffs, other._coeffs)
            return LaurentSeries(min_exp, full[:n])
        if isinstance(other, (int, float, complex)):
            return LaurentSeries(self.min_exp, self._coeffs * other, self.trunc_order)
        return NotImplemented

    __rmul__ = __mul__

    def shift(self, d: int) -> "LaurentSeries":
        """Multiply by ``z**d`` exactly (an exponent relabeling)."""
        return LaurentSeries(self.min_exp + d, self._coeffs, self.trunc_order + d)

    def scale_arg(self, lam: complex) -> "LaurentSeries":
        """Replace ``f(z)`` by ``f(lam * z)``: coefficient of ``z**k`` gains ``lam**k``."""
        if lam == 0:
            raise DegenerateParameterError("scale_arg with lambda = 0 collapses the expansion")
        ks = np.arange(self.min_exp, self.trunc_order)
        if isinstance(lam, complex) and lam.imag != 0.0:
            factors = np.array([lam ** int(k) for k in ks], dtype=complex)
        else:
            lam = float(lam.real) if isinstance(lam, complex) else float(lam)
            factors = np.power(lam, ks.astype(float)).astype(complex)
        return LaurentSeries(self.min_exp, self._coeffs * factors, self.trunc_order)

    def derivative(self) -> "LaurentSeries":
        """Term-by-term ``k * z**(k-1)``; the window shifts down by one."""
        ks = np.arange(self.min_exp, self.trunc_order)
        return LaurentSeries(self.min_exp - 1, self._coeffs * ks, self.trunc_order - 1)

    def q_derivative(self, q_eff: float) -> "LaurentSeries":
        """Symmetric q-difference ``(f(zq) - f(z/q)) / (z (q - 1/q))``.

        Sends ``z**k`` to ``[k]_q * z**(k-1)``, so it has the same window
        behaviour as :meth:`derivative` and reduces to it as ``q_eff -> 1``.
        """
        if not (q_eff > 0.0):
            raise DegenerateParameterError("q-derivative needs q_eff > 0")
        if q_eff == 1.0:
            raise DegenerateParameterError(
                "q-derivative is singular at q_eff = 1; use derivative()")
        t = math.log(q_eff)
        ks = np.arange(self.min_exp, self.trunc_order)
        brackets = np.sinh(ks * t) / math.sinh(t)
        return LaurentSeries(self.min_exp - 1, self._coeffs * brackets,
                             self.trunc_order - 1)

    # ------------------------------------------------------------------
    # serialization and comparison
    # ------------------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "minExp": self.min_exp,
            "truncOrder": self.trunc_order,
            "coeffs": [[float(c.real), float(c.imag)] for c in self._coeffs],
        }

    @staticmethod
    def from_dict(data: dict) -> "LaurentSeries":
        coeffs = [complex(re, im) for re, im in data["coeffs"]]
        return LaurentSeries(int(data["minExp"]), coeffs, int(data["truncOrder"]))

    def allclose(self, other: "LaurentSeries", tol: float = DEFAULT_ABS_TOL) -> bool:
        """Compare as functions-with-windows on the overlap of known data."""
        lo = min(self.min_exp, other.min_exp)
        hi = min(self.trunc_order, other.trunc_order)
        for k in range(lo, hi):
            if abs(self.coefficient(k) - other.coefficient(k)) > tol:
                return False
        return True

    def __repr__(self) -> str:
        return (f"LaurentSeries(min_exp={self.min_exp}, "
                f"trunc_order={self.trunc_order}, n={self._coeffs.size})")

    def __str__(self) -> str:
        terms = []
        for i, c in enumerate(self._coeffs):
            if c == 0:
                continue
            k = self.min_exp + i
            mag = f"({c.real:g}{c.imag:+g}j)" if c.imag else f"{c.real:g}"
            terms.append(mag if k == 0 else f"{mag}*z^{k}")
        body = " + ".join(terms) if terms else "0"
        return f"{body}  [window {self.min_exp}..{self.trunc_order})"
