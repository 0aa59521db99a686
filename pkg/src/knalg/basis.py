"""Construction of the vector-field / quadratic-differential / function
bases as local Laurent expansions at the two marked points.

Index conventions
-----------------
Indices are exact rationals (`fractions.Fraction`): integers when the
genus is even, half-odd integers when it is odd.  With ``g0 = 3g/2`` the
local exponent laws at the in-point ``P+`` are

    e_n      starts at  n - g0 + 1     (vector fields)
    omega_n  starts at  -n + g0 - 2    (quadratic differentials)

and the families are dual under the residue pairing
``res(e_m * omega_n) = delta_{mn}``.

Genus 0
-------
``P+`` is the origin of the coordinate plane and the bases are exact
monomials: ``e_n = z^(n+1)``, ``omega_n = z^(-n-2)``, ``a_n = z^n``.

Genus 1
-------
``P+-`` sit at ``+-z0`` on the torus and every basis element is a ratio
of Weierstrass sigma factors.  For vector fields,

    e_n(z) = sigma(z - z0)^(n-1/2) * sigma(z + 2 n z0)
             / sigma(z + z0)^(n+1/2) * sigma(2 z0)^(n+1/2) / sigma((2n+1) z0)

for n != -1/2, while ``e_{-1/2} = sigma(z)^2 / (sigma(z+z0) sigma(z-z0))``
(times constants).  The dual differentials follow the mirror pattern
``omega_n = sigma(z-z0)^(-n-1/2) sigma(z+z0)^(n-1/2) sigma(z - 2 n z0)``
whose moving zero ``2 n z0`` is forced by the degree-zero and divisor-sum
constraints on the torus; the two middle indices degenerate and are built
separately (``omega_{-1/2} = 1``, ``omega_{1/2}`` is a zeta-difference
with an additive constant fixed by duality orthogonality).  Since the
canonical bundle of the torus is trivial, the function basis ``a_n`` uses
the same local data as ``e_n``.

All expansions are normalized to leading coefficient 1 at ``P+`` (for e
and a) and to an exactly diagonal duality pairing (for omega), then the
full pairing matrix is re-verified numerically.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .elliptic import Lattice, SigmaEvaluator, expand_around
from .errors import BasisError, ConfigError, SchemaError, WindowError
from .series import DEFAULT_ABS_TOL, LaurentSeries

DEFAULT_DEPTH = 48

#: Sampling-radius factors relative to the distance to the nearest foreign
#: singularity: one for elements with a pole at the mirror point (radius
#: limited by |2 z0|), one for elements whose only poles are lattice
#: translates of the expansion point.  The second is kept at half the
#: shortest period so that FFT aliasing of the slowly decaying high-order
#: tail stays far below coefficient noise.
RADIUS_FACTOR_MIRROR = 0.7
RADIUS_FACTOR_OWN = 0.5

#: Samples per requested coefficient for basis expansions (the generic
#: series sampler defaults to 4; basis elements are cheap to sample and
#: benefit from the extra aliasing margin).
BASIS_SAMPLE_FACTOR = 8

#: Construction-time gate on the duality pairing matrix.  This catches
#: construction blunders (wrong exponent, degenerate surface data), which
#: produce residuals of order 1e-2 or worse; the verification suite
#: separately checks duality on the reporting range at the tighter
#: documented tolerance.  Extreme-index pairs (|n| ~ 10) legitimately
#: cancel through terms ~1e6 times their result, so their residuals sit
#: a few orders above the double-precision floor by conditioning alone.
DEFAULT_BUILD_DUALITY_TOL = 1e-5

HALF = Fraction(1, 2)


def as_half(value) -> Fraction:
    """Exact (half-)integer from int, Fraction, float or string."""
    f = Fraction(value)
    if f.denominator not in (1, 2):
        raise ConfigError(f"{value!r} is not an integer or half-integer")
    return f


def g0_for_genus(genus: int) -> Fraction:
    return Fraction(3 * genus, 2)


def index_range(genus: int, bound) -> tuple[Fraction, ...]:
    """All admissible indices with |n| <= bound, respecting the parity
    rule: integral for even genus, half-odd-integral for odd genus."""
    b = as_half(bound)
    if genus % 2 == 0:
        if b.denominator != 1:
            raise ConfigError(
                f"genus {genus} uses integer indices; bound {b} is not an integer")
        return tuple(Fraction(k) for k in range(-int(b), int(b) + 1))
    if b.denominator != 2:
        raise ConfigError(
            f"genus {genus} uses half-odd indices; bound {b} should be one "
            "(e.g. 7/2)")
    top = b.numerator  # odd
    return tuple(Fraction(j, 2) for j in range(-top, top + 1, 2))


@dataclass(frozen=True)
class SurfaceSpec:
    """Surface data: genus, the marked-point parameter z0 (the points sit
    at +-z0 on the torus) and the period lattice for genus 1."""

    genus: int
    z0: complex = 0.0j
    lattice: Lattice | None = None

    def __post_init__(self) -> None:
        if self.genus not in (0, 1):
            raise ConfigError(
                "built-in construction supports genus 0 and 1; load other "
                "surfaces from a basis file")
        if self.genus == 1:
            if self.lattice is None:
                raise ConfigError("genus 1 needs a lattice")
            if self.z0 == 0:
                raise ConfigError("genus 1 needs a nonzero z0")

    @property
    def g0(self) -> Fraction:
        return g0_for_genus(self.genus)


@dataclass
class BasisFamily:
    """Indexed local expansions of the three families at ``P+`` (and
    optionally at ``P-``).  Immutable in use: treat as read-only."""

    genus: int
    g0: Fraction
    indices: tuple[Fraction, ...]
    e_plus: dict[Fraction, LaurentSeries]
    omega_plus: dict[Fraction, LaurentSeries]
    a_plus: dict[Fraction, LaurentSeries]
    e_minus: dict[Fraction, LaurentSeries] = field(default_factory=dict)
    omega_minus: dict[Fraction, LaurentSeries] = field(default_factory=dict)
    a_minus: dict[Fraction, LaurentSeries] = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    def _get(self, table: dict, n, kind: str) -> LaurentSeries:
        key = as_half(n)
        try:
            return table[key]
        except KeyError:
            raise BasisError(f"{kind} series for index {key} is not in the family "
                             f"(stored range {self.indices[0]}..{self.indices[-1]})") from None

    def e(self, n) -> LaurentSeries:
        return self._get(self.e_plus, n, "e+")

    def omega(self, n) -> LaurentSeries:
        return self._get(self.omega_plus, n, "omega+")

    def a(self, n) -> LaurentSeries:
        return self._get(self.a_plus, n, "a+")

    def e_m(self, n) -> LaurentSeries:
        return self._get(self.e_minus, n, "e-")

    def omega_m(self, n) -> LaurentSeries:
        return self._get(self.omega_minus, n, "omega-")

    def a_m(self, n) -> LaurentSeries:
        return self._get(self.a_minus, n, "a-")

    @property
    def has_minus(self) -> bool:
        return bool(self.e_minus)

    def duality_deltas(self, side: str = "plus"):
        """Yield ``(m, n, pairing - delta_mn)`` over all stored pairs.

        On the plus side the pairing is ``res(e_m omega_n)``; on the minus
        side the oriented pairing is ``-res`` of the mirror expansions.
        """
        for m in self.indices:
            for n in self.indices:
                if side == "plus":
                    pairing = (self.e(m) * self.omega(n)).residue()
                else:
                    pairing = -(self.e_m(m) * self.omega_m(n)).residue()
                delta = 1.0 if m == n else 0.0
                yield m, n, pairing - delta

    def max_duality_residual(self, side: str = "plus"):
        worst = 0.0
        witness = (self.indices[0], self.indices[0])
        for m, n, err in self.duality_deltas(side):
            if abs(err) > worst:
                worst, witness = abs(err), (m, n)
        return worst, witness


def extract_e_coeff(family: BasisFamily, m, k: int) -> complex:
    """Expansion coefficient ``e^+_{m,k}``: the residue pairing of ``e_m``
    against ``z^(-m-k+g0-1)``, i.e. the coefficient of ``z^(m-g0+1+k)``."""
    if k < 0:
        raise ValueError("coefficient label k must be nonnegative")
    m = as_half(m)
    expo = m - family.g0 + 1 + k
    if expo.denominator != 1:
        raise BasisError(f"index {m} has the wrong parity for genus {family.genus}")
    return family.e(m).coefficient(int(expo))


# ----------------------------------------------------------------------
# genus 0: exact monomials
# ----------------------------------------------------------------------

def build_genus0(bound, depth: int = DEFAULT_DEPTH) -> BasisFamily:
    """Monomial bases on the sphere: ``e_n = z^(n+1)``, ``omega_n =
    z^(-n-2)``, ``a_n = z^n``, all with exactly-known windows of ``depth``."""
    indices = index_range(0, bound)
    e_plus, omega_plus, a_plus = {}, {}, {}
    for n in indices:
        k = int(n)
        e_plus[n] = LaurentSeries.monomial(k + 1, depth)
        omega_plus[n] = LaurentSeries.monomial(-k - 2, depth)
        a_plus[n] = LaurentSeries.monomial(k, depth)
    return BasisFamily(
        genus=0, g0=Fraction(0), indices=indices,
        e_plus=e_plus, omega_plus=omega_plus, a_plus=a_plus,
        metadata={"depth": depth, "normalization": "unit leading coefficient at P+"})


# ----------------------------------------------------------------------
# genus 1: sigma-function closed forms, expanded numerically
# ----------------------------------------------------------------------

def _check_torus_geometry(surface: SurfaceSpec, indices: Sequence[Fraction]) -> None:
    lat = surface.lattice
    assert lat is not None
    geo_tol = 1e-6 * lat.min_period()
    z0 = complex(surface.z0)

    def require_off_lattice(point: complex, label: str) -> None:
        if lat.distance_to_lattice(point) < geo_tol:
            raise BasisError(
                f"degenerate surface: {label} = {point:g} lies on the period "
                "lattice; move z0")

    require_off_lattice(z0, "z0")
    require_off_lattice(2 * z0, "2*z0")
    for n in indices:
        if n in (HALF, -HALF):
            continue  # middle indices are built without a moving zero
        require_off_lattice(2 * float(n) * z0, f"moving zero 2*({n})*z0")
        require_off_lattice((2 * float(n) - 1) * z0, f"(2*({n})-1)*z0")
        require_off_lattice((2 * float(n) + 1) * z0, f"(2*({n})+1)*z0")


def build_genus1(surface: SurfaceSpec, bound, depth: int = DEFAULT_DEPTH,
                 include_minus: bool = True,
                 duality_tol: float = DEFAULT_BUILD_DUALITY_TOL) -> BasisFamily:
    """Build the torus families over all indices ``|n| <= bound``.

    Expansions are recovered by contour sampling around each marked
    point, with the radius set by the distance to the nearest foreign
    singularity.  After normalization the full duality matrix is
    re-verified; a residual above ``duality_tol`` aborts construction.
    """
    if surface.genus != 1:
        raise ConfigError("build_genus1 needs a genus-1 surface")
    indices = index_range(1, bound)
    _check_torus_geometry(surface, indices)
    lat = surface.lattice
    assert lat is not None
    sig = SigmaEvaluator(lat)
    z0 = complex(surface.z0)

    # Foreign singularities as seen from a marked point: lattice translates
    # of the point itself (distance = shortest period) and, only for
    # elements with a pole there, the mirror point (distance |2 z0| mod
    # the lattice).  Elements without a mirror pole get the larger radius,
    # which keeps high-order coefficient noise down.
    d_mirror = min(lat.min_period(), lat.distance_to_lattice(2 * z0))
    d_own = lat.min_period()

    def radius_for(mirror_pole: bool) -> float:
        if mirror_pole:
            return RADIUS_FACTOR_MIRROR * d_mirror
        return RADIUS_FACTOR_OWN * d_own

    n_samples = BASIS_SAMPLE_FACTOR * depth

    def expand(f, center, lead, mirror_pole: bool) -> LaurentSeries:
        return expand_around(f, center, lead, depth, radius_for(mirror_pole),
                             n_samples=n_samples)

    def sigma(v):
        return sig.sigma(v)

    def e_callable(n: Fraction) -> Callable[[np.ndarray], np.ndarray]:
        if n == -HALF:
            norm = sigma(2 * z0) / sigma(z0) ** 2

            def f(z):
                return sigma(z) ** 2 / (sigma(z + z0) * sigma(z - z0)) * norm
            return f
        p = int(n - HALF)
        norm = sigma(2 * z0) ** (p + 1) / sigma((2 * float(n) + 1) * z0)

        def f(z):
            return (sigma(z - z0) ** p * sigma(z + 2 * float(n) * z0)
                    / sigma(z + z0) ** (p + 1) * norm)
        return f

    def omega_callable(n: Fraction) -> Callable[[np.ndarray], np.ndarray] | None:
        if n == -HALF:
            return None  # constant 1
        if n == HALF:
            return None  # zeta difference, built separately
        p_plus = int(-n - HALF)
        p_minus = int(n - HALF)

        def f(z):
            return (sigma(z - z0) ** p_plus * sigma(z + z0) ** p_minus
                    * sigma(z - 2 * float(n) * z0))
        return f

    def lead_exponents(n: Fraction):
        """(plus, minus) leading orders for e_n and omega_n, including the
        two exceptional middle indices."""
        e_lead_p = int(n - surface.g0 + 1)
        o_lead_p = int(-n + surface.g0 - 2)
        if n == HALF:
            e_lead_m, o_lead_m = 0, -1
        elif n == -HALF:
            e_lead_m, o_lead_m = -1, 0
        else:
            e_lead_m = int(-n - surface.g0 + 1)
            o_lead_m = int(n + surface.g0 - 2)
        return e_lead_p, e_lead_m, o_lead_p, o_lead_m

    e_plus: dict[Fraction, LaurentSeries] = {}
    e_minus: dict[Fraction, LaurentSeries] = {}
    omega_plus: dict[Fraction, LaurentSeries] = {}
    omega_minus: dict[Fraction, LaurentSeries] = {}

    constant = LaurentSeries.monomial(0, depth)

    # --- vector fields -------------------------------------------------
    for n in indices:
        e_lead_p, e_lead_m, _, _ = lead_exponents(n)
        if n == HALF:
            # the closed form collapses to the constant field
            e_plus[n] = constant
            if include_minus:
                e_minus[n] = constant
            continue
        f = e_callable(n)
        # e_n has a pole at the mirror point iff the sigma(z + z0) power
        # n + 1/2 is positive (plus the double-pole middle element).
        plus = expand(f, z0, e_lead_p, n >= -HALF)
        scale = 1.0 / plus.leading()
        e_plus[n] = plus * scale
        if include_minus:
            e_minus[n] = expand(f, -z0, e_lead_m, n <= -HALF) * scale

    # --- quadratic differentials ---------------------------------------
    zeta_const = 0.0 + 0.0j
    for n in indices:
        _, _, o_lead_p, o_lead_m = lead_exponents(n)
        if n == -HALF:
            plus: LaurentSeries = constant
            minus: LaurentSeries | None = constant if include_minus else None
        elif n == HALF:
            def zdiff(z):
                return sig.zeta(z - z0) - sig.zeta(z + z0)
            # simple poles at both marked points
            zplus = expand(zdiff, z0, -1, True)
            # additive constant: orthogonality against e_{-1/2}, whose own
            # pairing with the constant differential is exactly 1
            zeta_const = -(e_plus[-HALF] * zplus).residue()
            plus = zplus + zeta_const * constant
            if include_minus:
                zminus = expand(zdiff, -z0, -1, True)
                minus = zminus + zeta_const * constant
            else:
                minus = None
        else:
            f = omega_callable(n)
            assert f is not None
            # omega_n has a mirror pole iff the sigma(z + z0) power
            # n - 1/2 is negative.
            plus = expand(f, z0, o_lead_p, n <= -HALF)
            minus = (expand(f, -z0, o_lead_m, n >= HALF)
                     if include_minus else None)
        pairing = (e_plus[n] * plus).residue()
        if pairing == 0:
            raise BasisError(f"duality normalization failed at index {n}: "
                             "diagonal pairing vanished")
        scale = 1.0 / pairing
        omega_plus[n] = plus * scale
        if include_minus and minus is not None:
            omega_minus[n] = minus * scale

    family = BasisFamily(
        genus=1, g0=surface.g0, indices=indices,
        e_plus=e_plus, omega_plus=omega_plus,
        a_plus=dict(e_plus),
        e_minus=e_minus, omega_minus=omega_minus,
        a_minus=dict(e_minus),
        metadata={
            "depth": depth,
            "z0": [z0.real, z0.imag],
            "omega1": [lat.omega1.real, lat.omega1.imag],
            "omega2": [lat.omega2.real, lat.omega2.imag],
            "radius": [radius_for(True), radius_for(False)],
            "zeta_constant": [zeta_const.real, zeta_const.imag],
            "normalization": ("leading coefficient 1 at P+ for e and a; "
                              "omega scaled to a unit diagonal duality pairing"),
        })
    _validate_family(family, duality_tol)
    return family


def _validate_family(family: BasisFamily, duality_tol: float) -> None:
    check_exponent_laws(family)
    worst, witness = family.max_duality_residual("plus")
    if worst > duality_tol:
        raise BasisError(
            f"duality pairing residual {worst:.3e} at (m, n) = {witness} "
            f"exceeds {duality_tol:g}")


def check_exponent_laws(family: BasisFamily, abs_tol: float = DEFAULT_ABS_TOL) -> None:
    """Verify the leading-exponent laws at ``P+`` with nonzero leading
    coefficients for every stored index."""
    for n in family.indices:
        e_lead = n - family.g0 + 1
        o_lead = -n + family.g0 - 2
        for kind, series, lead in (("e", family.e(n), e_lead),
                                   ("omega", family.omega(n), o_lead)):
            if lead.denominator != 1:
                raise BasisError(f"index {n} breaks the parity rule")
            if series.min_exp != int(lead):
                raise BasisError(
                    f"{kind}_{n} starts at exponent {series.min_exp}, "
                    f"expected {int(lead)}")
            if abs(series.leading()) <= abs_tol:
                raise BasisError(f"{kind}_{n} has a vanishing leading coefficient")


# ----------------------------------------------------------------------
# basis files
# ----------------------------------------------------------------------

_SERIES_KEYS = {"e": ("e_plus", True), "omega": ("omega_plus", True),
                "a": ("a_plus", True), "eMinus": ("e_minus", False),
                "omegaMinus": ("omega_minus", False), "aMinus": ("a_minus", False)}


def family_to_dict(family: BasisFamily) -> dict:
    elements: dict[str, dict] = {}
    for n in family.indices:
        entry = {"e": family.e(n).to_dict(),
                 "omega": family.omega(n).to_dict(),
                 "a": family.a(n).to_dict()}
        if n in family.e_minus:
            entry["eMinus"] = family.e_minus[n].to_dict()
        if n in family.omega_minus:
            entry["omegaMinus"] = family.omega_minus[n].to_dict()
        if n in family.a_minus:
            entry["aMinus"] = family.a_minus[n].to_dict()
        elements[str(n)] = entry
    return {
        "genus": family.genus,
        "g0": str(family.g0),
        "indices": [str(n) for n in family.indices],
        "metadata": family.metadata,
        "elements": elements,
    }


def family_from_dict(data: dict, duality_tol: float = 1e-8) -> BasisFamily:
    try:
        genus = int(data["genus"])
        g0 = Fraction(data["g0"])
        raw_indices = list(data["indices"])
        elements = data["elements"]
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"basis file is missing or mangles a required field: {exc}") from exc
    if g0 != g0_for_genus(genus):
        raise SchemaError(f"g0 = {g0} is inconsistent with genus {genus} "
                          f"(expected {g0_for_genus(genus)})")
    indices: list[Fraction] = []
    for raw in raw_indices:
        n = as_half(raw)
        expected_den = 1 if genus % 2 == 0 else 2
        if n.denominator != expected_den:
            raise SchemaError(f"index {n} has the wrong parity for genus {genus}")
        indices.append(n)
    tables: dict[str, dict[Fraction, LaurentSeries]] = {
        attr: {} for attr, _ in _SERIES_KEYS.values()}
    for n in indices:
        entry = elements.get(str(n))
        if entry is None:
            raise SchemaError(f"element block for index {n} is missing")
        for key, (attr, required) in _SERIES_KEYS.items():
            if key in entry:
                try:
                    tables[attr][n] = LaurentSeries.from_dict(entry[key])
                except (KeyError, TypeError, ValueError) as exc:
                    raise SchemaError(f"bad series data for {key}[{n}]: {exc}") from exc
            elif required:
                raise SchemaError(f"element {n} lacks the required '{key}' series")
    family = BasisFamily(
        genus=genus, g0=g0, indices=tuple(indices),
        e_plus=tables["e_plus"], omega_plus=tables["omega_plus"],
        a_plus=tables["a_plus"], e_minus=tables["e_minus"],
        omega_minus=tables["omega_minus"], a_minus=tables["a_minus"],
        metadata=dict(data.get("metadata", {})))
    check_exponent_laws(family)
    worst, witness = family.max_duality_residual("plus")
    if worst > duality_tol:
        raise BasisError(
            f"loaded basis violates duality: residual {worst:.3e} at "
            f"(m, n) = {witness} exceeds {duality_tol:g}")
    return family


def save_basis_file(family: BasisFamily, path: str | Path) -> None:
    from .serialize import dumps_canonical
    Path(path).write_text(dumps_canonical(family_to_dict(family)) + "\n")


def load_basis_file(path: str | Path, duality_tol: float = 1e-8) -> BasisFamily:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise SchemaError(f"{path}: top level must be a JSON object")
    return family_from_dict(data, duality_tol=duality_tol)


def build_family(surface: SurfaceSpec, bound, depth: int = DEFAULT_DEPTH,
                 include_minus: bool = True,
                 duality_tol: float = DEFAULT_BUILD_DUALITY_TOL) -> BasisFamily:
    """Dispatch on genus."""
    if surface.genus == 0:
        return build_genus0(bound, depth)
    return build_genus1(surface, bound, depth, include_minus=include_minus,
                        duality_tol=duality_tol)


def table_family_bound(genus: int, table_range) -> Fraction:
    """Index bound a family needs so a structure table over
    ``|m|, |n| <= table_range`` never misses a dual element: the
    commutator of two range-limited fields spreads over indices up to
    ``2 * range + g0``."""
    return 2 * as_half(table_range) + g0_for_genus(genus)
