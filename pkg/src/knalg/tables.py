"""Structure constants, central terms and their q-deformations.

Every quantity is a residue of local Laurent data at the in-point; the
orientation is fixed once by the genus-0 check ``c^0_{m,n} = m - n`` for
the monomial basis, and the same orientation is used for all other
contour integrals.  The mirror-point evaluation of a classical integrand
is ``-residue`` of the mirror expansions (the two contours are
homologous with opposite orientation around the other point).

Deformed quantities act on the *local coordinate*: argument scalings and
symmetric q-differences are applied to the expansions at the in-point,
which is what reduces every deformed commutator to a residue there.

The shifted band convention is used throughout: a commutator of indices
``(m, n)`` spreads over targets ``m + n - s`` with ``s`` running through
the ``2*g0 + 1`` values ``-g0, -g0 + 1, ..., g0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .basis import BasisFamily, as_half, extract_e_coeff
from .errors import BasisError, DegenerateParameterError
from .qcalc import DeformationParams, c_coeff, kappa, q_bracket
from .series import LaurentSeries

HALF = Fraction(1, 2)


def band(g0: Fraction) -> tuple[Fraction, ...]:
    """The ``2*g0 + 1`` band offsets ``-g0 .. g0`` in unit steps."""
    count = int(2 * g0) + 1
    return tuple(-g0 + k for k in range(count))


# ----------------------------------------------------------------------
# classical tables
# ----------------------------------------------------------------------

def classical_structure_constant(family: BasisFamily, m, n, s,
                                 side: str = "plus") -> complex:
    """``c^s_{m,n}``: residue of ``(e_m' e_n - e_m e_n') * omega_{m+n-s}``."""
    m, n, s = as_half(m), as_half(n), as_half(s)
    if side == "plus":
        em, en, om = family.e(m), family.e(n), family.omega(m + n - s)
        orient = 1.0
    else:
        em, en, om = family.e_m(m), family.e_m(n), family.omega_m(m + n - s)
        orient = -1.0
    integrand = (em.derivative() * en - em * en.derivative()) * om
    return orient * integrand.residue()


def classical_cocycle(family: BasisFamily, m, n, side: str = "plus") -> complex:
    """Central 2-cocycle ``(1/12) * residue(e_m''' * e_n)``."""
    m, n = as_half(m), as_half(n)
    if side == "plus":
        em, en = family.e(m), family.e(n)
        orient = 1.0
    else:
        em, en = family.e_m(m), family.e_m(n)
        orient = -1.0
    e3 = em.derivative().derivative().derivative()
    return orient * (e3 * en).residue() / 12.0


def heisenberg_gamma(family: BasisFamily, m, n, side: str = "plus") -> complex:
    """Oscillator pairing ``gamma_{mn} = residue(a_m' * a_n)``."""
    m, n = as_half(m), as_half(n)
    if side == "plus":
        am, an = family.a(m), family.a(n)
        orient = 1.0
    else:
        am, an = family.a_m(m), family.a_m(n)
        orient = -1.0
    return orient * (am.derivative() * an).residue()


def q_heisenberg_gamma(family: BasisFamily, m, n, q: float) -> complex:
    """Deformed pairing ``residue(dq a_m * a_n)`` with the symmetric
    q-difference in the local coordinate; -> gamma_{mn} as q -> 1."""
    m, n = as_half(m), as_half(n)
    if q == 1.0:
        raise DegenerateParameterError(
            "q = 1 is the classical point; use heisenberg_gamma")
    return (family.a(m).q_derivative(q) * family.a(n)).residue()


# ----------------------------------------------------------------------
# deformed structure constants
# ----------------------------------------------------------------------

def q_structure_d(family: BasisFamily, m, n, s, b: float, c: float, d: float,
                  q: float) -> complex:
    """Deformed structure kernel ``D^s_{m,n}(b, c, d)``.

    ``(kappa/2) * residue`` of the three-term integrand::

        q^-c [d-b-c]_q  dq^{q^(d-b-c)} e_m(w)  * e_n(w q^-b)
      - q^-c [b]_q      e_m(w q^(b+c-d))      * dq^{q^-b} e_n(w)
      - [c]_q           e_m(w q^(b+c-d)) e_n(w q^b) / w

    all multiplied by ``omega_{m+n-s}(w)``.  A vanishing bracket
    prefactor ([0]_q = 0) removes its term before the corresponding
    q-difference parameter can degenerate to 1.
    """
    m, n, s = as_half(m), as_half(n), as_half(s)
    if not (q > 0.0):
        raise DegenerateParameterError("q must be positive")
    if q == 1.0:
        raise DegenerateParameterError(
            "q = 1 is the classical point; use classical_structure_constant")
    em, en = family.e(m), family.e(n)
    om = family.omega(m + n - s)
    window = em * en * om
    total = LaurentSeries.zero(window.min_exp - 1, window.trunc_order - 1)
    e1 = d - b - c
    if e1 != 0.0:
        term = em.q_derivative(q ** e1) * en.scale_arg(q ** (-b)) * om
        total = total + (q ** (-c) * q_bracket(e1, q)) * term
    if b != 0.0:
        term = em.scale_arg(q ** (b + c - d)) * en.q_derivative(q ** (-b)) * om
        total = total - (q ** (-c) * q_bracket(b, q)) * term
    if c != 0.0:
        term = (em.scale_arg(q ** (b + c - d)) * en.scale_arg(q ** b) * om).shift(-1)
        total = total - q_bracket(c, q) * term
    return 0.5 * kappa(q) * total.residue()


#: Branch descriptors of the deformed commutator: argument triple
#: (b, c, d) as functions of (alpha, beta), overall sign, and the label
#: of the target generator family.
_BRANCHES = (
    (lambda a, b: ((a + 1) / 2, (b - a) / 2, b + 1), +1.0, "alpha+beta+1"),
    (lambda a, b: ((a + 1) / 2, (-b - a) / 2, -b + 1), +1.0, "-alpha+beta+1"),
    (lambda a, b: ((a - 1) / 2, (b - a) / 2, b - 1), -1.0, "-alpha-beta+1"),
    (lambda a, b: ((a - 1) / 2, (-b - a) / 2, -b - 1), -1.0, "alpha-beta-1"),
)

BRANCH_LABELS = tuple(label for _, _, label in _BRANCHES)


@dataclass(frozen=True)
class QCommutatorBranch:
    label: str
    sign: float
    b: float
    c: float
    d: float
    coeffs: dict[Fraction, complex]


@dataclass(frozen=True)
class QCommutatorExpansion:
    """The deformed commutator of a fixed index pair: four branch
    coefficient maps over the band, plus the central value when the
    central coefficients are defined for (alpha, beta)."""

    m: Fraction
    n: Fraction
    params: DeformationParams
    branches: tuple[QCommutatorBranch, ...]
    central: complex | None

    def classical_combination(self, s) -> complex:
        """Signed sum of the four branch coefficients at ``s`` (under the
        collapse of all target labels onto the single classical family)."""
        s = as_half(s)
        return sum(br.sign * br.coeffs[s] for br in self.branches)


def q_commutator(family: BasisFamily, m, n, params: DeformationParams,
                 compute_central: bool = True) -> QCommutatorExpansion:
    """Assemble the four deformed branches over the band ``|s| <= g0``
    and, optionally, the central term."""
    m, n = as_half(m), as_half(n)
    alpha, beta, q = params.alpha, params.beta, params.q
    branches = []
    for args, sign, label in _BRANCHES:
        b, c, d = args(alpha, beta)
        coeffs = {s: q_structure_d(family, m, n, s, b, c, d, q)
                  for s in band(family.g0)}
        branches.append(QCommutatorBranch(label, sign, b, c, d, coeffs))
    central: complex | None = None
    if compute_central:
        central = q_central_term(family, m, n, params)
    return QCommutatorExpansion(m, n, params, tuple(branches), central)


# ----------------------------------------------------------------------
# central terms
# ----------------------------------------------------------------------

def q_central_term(family: BasisFamily, m, n, params: DeformationParams) -> complex:
    """Deformed central term::

        chi^q_{m,n} = -1/(16 log(q)^2) * sum_{k=0}^{2 g0 - m - n}
            e+_{m,k} e+_{n, 2 g0 - m - n - k}
            * ( C^{alpha,beta}_{m+1}(g0; k) + C^{alpha,-beta}_{m+1}(g0; k) )

    The sum is empty (result 0) when ``m + n > 2 g0``.  Degenerate
    central coefficients (alpha +- beta in {-2, 0, 2}) raise.
    """
    m, n = as_half(m), as_half(n)
    g0 = family.g0
    top = 2 * g0 - m - n
    if top.denominator != 1:
        raise DegenerateParameterError(
            f"indices ({m}, {n}) have the wrong parity for g0 = {g0}")
    top = int(top)
    if top < 0:
        return 0.0 + 0.0j
    q, alpha, beta = params.q, params.alpha, params.beta
    t = math.log(q)
    total = 0.0 + 0.0j
    for k in range(top + 1):
        weight = (c_coeff(m + 1, alpha, beta, g0, k, q)
                  + c_coeff(m + 1, alpha, -beta, g0, k, q))
        total += (extract_e_coeff(family, m, k)
                  * extract_e_coeff(family, n, top - k) * weight)
    return -total / (16.0 * t * t)


def classical_limit_central(family: BasisFamily, m, n) -> complex:
    """Classical central term as the coefficient sum::

        chi_{m,n} = (1/12) * sum_k e+_{m,k} e+_{n, 2 g0 - m - n - k}
                    * (x - 1) x (x + 1),   x = m - g0 + k

    which agrees with the residue form of the cocycle.
    """
    m, n = as_half(m), as_half(n)
    g0 = family.g0
    top = 2 * g0 - m - n
    if top.denominator != 1:
        raise DegenerateParameterError(
            f"indices ({m}, {n}) have the wrong parity for g0 = {g0}")
    top = int(top)
    if top < 0:
        return 0.0 + 0.0j
    total = 0.0 + 0.0j
    for k in range(top + 1):
        x = float(m - g0 + k)
        total += (extract_e_coeff(family, m, k)
                  * extract_e_coeff(family, n, top - k)
                  * (x - 1.0) * x * (x + 1.0))
    return total / 12.0


# ----------------------------------------------------------------------
# assembled tables
# ----------------------------------------------------------------------

@dataclass
class StructureTable:
    """Sparse map ``(m, n, s) -> coefficient`` plus run metadata."""

    entries: dict[tuple[Fraction, Fraction, Fraction], complex]
    metadata: dict = field(default_factory=dict)

    def antisymmetry_residual(self):
        worst, witness = 0.0, None
        for (m, n, s), v in self.entries.items():
            partner = self.entries.get((n, m, s))
            if partner is None:
                continue
            r = abs(v + partner)
            if r > worst:
                worst, witness = r, (m, n, s)
        return worst, witness


@dataclass
class CentralTable:
    """Sparse map ``(m, n) -> value`` for pairings and central terms."""

    entries: dict[tuple[Fraction, Fraction], complex]
    deformed: bool = False
    metadata: dict = field(default_factory=dict)

    def support_residual(self, g0: Fraction, form: str = "sum"):
        """Largest entry outside the locality band.

        ``form="sum"`` checks the band ``|m + n| <= 2 g0`` (the support
        law that actually follows from the order counts at the two
        points); ``form="diff"`` checks ``|m - n| <= 2 g0`` instead.
        """
        worst, witness = 0.0, None
        for (m, n), v in self.entries.items():
            key = abs(m + n) if form == "sum" else abs(m - n)
            if key > 2 * g0 and abs(v) > worst:
                worst, witness = abs(v), (m, n)
        return worst, witness


def build_structure_table(family: BasisFamily, bound, side: str = "plus",
                          extra_band: int = 0,
                          metadata: dict | None = None) -> StructureTable:
    """Classical table over ``|m|, |n| <= bound`` and the band (optionally
    widened by ``extra_band`` on each side, for decay checks)."""
    indices = [n for n in family.indices if abs(n) <= as_half(bound)]
    g0 = family.g0
    offsets = list(band(g0))
    for j in range(1, extra_band + 1):
        offsets = [-g0 - j] + offsets + [g0 + j]
    entries = {}
    for m in indices:
        for n in indices:
            for s in offsets:
                idx = m + n - s
                if idx not in family.omega_plus:
                    if abs(s) <= g0:
                        raise BasisError(
                            f"family (bound {family.indices[-1]}) is too "
                            f"narrow for a table over |m|, |n| <= {bound}: "
                            f"omega_{idx} is missing")
                    continue  # widened-band probe beyond family coverage
                entries[(m, n, s)] = classical_structure_constant(
                    family, m, n, s, side)
    return StructureTable(entries, metadata or {})


def build_q_table(family: BasisFamily, bound, params: DeformationParams,
                  metadata: dict | None = None):
    """Deformed commutator expansions for all pairs in range; the central
    values are included only when defined for (alpha, beta)."""
    indices = [n for n in family.indices if abs(n) <= as_half(bound)]
    try:
        c_coeff(0, params.alpha, params.beta, family.g0, 0, params.q)
        c_coeff(0, params.alpha, -params.beta, family.g0, 0, params.q)
        central_ok = True
    except DegenerateParameterError:
        central_ok = False
    out: dict[tuple[Fraction, Fraction], QCommutatorExpansion] = {}
    for m in indices:
        for n in indices:
            out[(m, n)] = q_commutator(family, m, n, params,
                                       compute_central=central_ok)
    return out


def build_central_table(family: BasisFamily, bound,
                        params: DeformationParams | None = None,
                        metadata: dict | None = None) -> CentralTable:
    """Classical cocycle values (params None) or deformed central terms."""
    indices = [n for n in family.indices if abs(n) <= as_half(bound)]
    entries = {}
    for m in indices:
        for n in indices:
            if params is None:
                entries[(m, n)] = classical_cocycle(family, m, n)
            else:
                entries[(m, n)] = q_central_term(family, m, n, params)
    return CentralTable(entries, deformed=params is not None,
                        metadata=metadata or {})


def build_heisenberg_table(family: BasisFamily, bound,
                           q: float | None = None,
                           metadata: dict | None = None) -> CentralTable:
    """Oscillator pairings, classical (q None) or deformed."""
    indices = [n for n in family.indices if abs(n) <= as_half(bound)]
    entries = {}
    for m in indices:
        for n in indices:
            if q is None:
                entries[(m, n)] = heisenberg_gamma(family, m, n)
            else:
                entries[(m, n)] = q_heisenberg_gamma(family, m, n, q)
    return CentralTable(entries, deformed=q is not None, metadata=metadata or {})


# ----------------------------------------------------------------------
# consistency sums
# ----------------------------------------------------------------------

# ----------------------------------------------------------------------
# support laws
#
# At the in-point every element obeys its exponent law, so commutators
# never spread above offset +g0.  At the mirror point the two middle
# elements of an odd-genus family deviate from the generic law by one
# order each (the double-poled e_{-1/2} and its zeta-difference dual
# omega_{1/2} are one order more singular; their partners one order less),
# which widens the band downward by the summed deviations: up to -g0 - 2
# for a doubly exceptional integrand.
# ----------------------------------------------------------------------

def _mirror_deviation_e(n: Fraction) -> int:
    if n == -HALF:
        return -1
    if n == HALF:
        return 1
    return 0


def _mirror_deviation_omega(n: Fraction) -> int:
    if n == HALF:
        return -1
    if n == -HALF:
        return 1
    return 0


def structure_band(family: BasisFamily, m: Fraction, n: Fraction):
    """Exact support interval ``[s_min, g0]`` of ``c^s_{m,n}``: offsets
    outside it vanish by order counting at the two points."""
    g0 = family.g0
    lows = []
    for s in band(g0) + tuple(-g0 - j for j in (1, 2)):
        dev = (_mirror_deviation_e(m) + _mirror_deviation_e(n)
               + _mirror_deviation_omega(m + n - s))
        if s >= -g0 + dev:
            lows.append(s)
    return (min(lows), g0) if lows else (-g0, g0)


def structure_constant_supported(family: BasisFamily, m, n, s) -> complex:
    """``c^s_{m,n}`` evaluated only where the order counts allow a nonzero
    value; outside that support the exact zero is returned instead of a
    conditioning-noise residue."""
    m, n, s = as_half(m), as_half(n), as_half(s)
    g0 = family.g0
    if s > g0:
        return 0.0 + 0.0j
    dev = (_mirror_deviation_e(m) + _mirror_deviation_e(n)
           + _mirror_deviation_omega(m + n - s))
    if s < -g0 + dev:
        return 0.0 + 0.0j
    return classical_structure_constant(family, m, n, s)


def cocycle_supported(family: BasisFamily, m, n) -> complex:
    """Central cocycle with its exact support law applied: zero unless
    ``-2 g0 + deviations <= m + n <= 2 g0``."""
    m, n = as_half(m), as_half(n)
    g0 = family.g0
    if m + n > 2 * g0:
        return 0.0 + 0.0j
    if m + n < -2 * g0 + _mirror_deviation_e(m) + _mirror_deviation_e(n):
        return 0.0 + 0.0j
    return classical_cocycle(family, m, n)


def jacobi_residual(family: BasisFamily, m, n, k) -> float:
    """Cyclic consistency of the bracket including its center.

    For the triple ``(m, n, k)`` this accumulates, for every reachable
    target offset, the cyclic sum of nested bracket coefficients, plus
    the cyclic central sum; the returned residual is the largest
    magnitude.  The inner sums run over the exact (support-aware) band,
    so middle-element contributions below ``-g0`` are included and
    mathematically vanishing entries contribute no noise.  The family
    must cover indices out to roughly ``|m|+|n|+|k| + 2 g0 + 2``.
    """
    m, n, k = as_half(m), as_half(n), as_half(k)
    g0 = family.g0
    offsets = tuple(-g0 - 2 + j for j in range(int(2 * g0) + 3))
    total_targets: dict[Fraction, complex] = {}
    central_sum = 0.0 + 0.0j
    for (a, b, cc) in ((m, n, k), (n, k, m), (k, m, n)):
        for s in offsets:
            inner = structure_constant_supported(family, a, b, s)
            if inner == 0.0:
                continue
            central_sum += inner * cocycle_supported(family, a + b - s, cc)
            for u in offsets:
                outer = structure_constant_supported(family, a + b - s, cc, u)
                t = s + u  # total degree drop relative to m + n + k
                total_targets[t] = total_targets.get(t, 0.0 + 0.0j) + inner * outer
    worst = max((abs(v) for v in total_targets.values()), default=0.0)
    return max(worst, abs(central_sum))
