"""Bilateral q-series with certified truncation bounds.

The central object is the multiplicatively periodic function

    W(w, q) = sum over all integers m of  w*q**m / (1 - w*q**m)**2,

meromorphic on the punctured w-plane for 0 < |q| < 1, with double poles
on w in q**Z, invariant under w -> w*q and under the joint involution
(w, q) -> (1/w, 1/q).  Alongside it live the logarithmic derivative
W'(w, q) = (w d/dw) W, the weight 2/4/6 Eisenstein series in their
divisor-sum q-expansions, the Weierstrass invariants g2 and g3, and the
bilateral hypergeometric partial sums tied to W by
(1-w)**2/w * W(w, q).

Every truncated evaluation returns a :class:`SeriesValue` carrying a
rigorous bound on the omitted tail, derived from geometric majorants of
the term moduli on the fundamental annulus.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from .coords import Nome, WPoint, reduce_annulus
from .errors import DomainError, NonConvergenceError, PoleProximityError

#: Default certified tolerance for series evaluation.
DEFAULT_TOL = 1e-12
#: Default cap on the truncation order searched by the planners.
DEFAULT_MAX_TERMS = 10**6
#: Minimum allowed distance |1 - w*q**m| from the double poles.
EPS_POLE = 1e-8


@dataclass(frozen=True)
class TruncationPlan:
    """Symmetric truncation order [-n_terms, n_terms] plus a rigorous
    bound on the modulus of the omitted tail."""

    n_terms: int
    tail_bound: float


@dataclass(frozen=True)
class SeriesValue:
    """A truncated series value with its certified tail bound."""

    value: complex
    tail_bound: float
    n_terms: int


def _wval(w) -> complex:
    return w.w if isinstance(w, WPoint) else complex(w)


def _qval(q) -> complex:
    return q.q if isinstance(q, Nome) else complex(q)


def _canonical_wq(w, q) -> tuple[complex, complex]:
    """Coerce inputs, mapping |q| > 1 through (w, q) -> (1/w, 1/q)."""
    wv, qv = _wval(w), _qval(q)
    if wv == 0:
        raise DomainError("w must be nonzero")
    aq = abs(qv)
    if aq == 0.0 or aq == 1.0 or not math.isfinite(aq):
        raise DomainError(f"q must satisfy 0 < |q| < 1 (or |q| > 1), got {qv!r}")
    if aq > 1.0:
        wv, qv = 1.0 / wv, 1.0 / qv
    return wv, qv


def w_term(w, q, m: int) -> complex:
    """Single term w*q**m / (1 - w*q**m)**2 of the bilateral sum.

    Raises
    ------
    PoleProximityError
        If |1 - w*q**m| < EPS_POLE.
    """
    t = _wval(w) * _qval(q) ** m
    d = 1.0 - t
    if abs(d) < EPS_POLE:
        raise PoleProximityError(f"1 - w*q**{m} = {d!r} is within {EPS_POLE} of a pole")
    return t / (d * d)


def _term_pole2(t: complex) -> complex:
    """t/(1-t)**2, the double-pole summand."""
    d = 1.0 - t
    if abs(d) < EPS_POLE:
        raise PoleProximityError(f"1 - w*q**m = {d!r} is within {EPS_POLE} of a pole")
    return t / (d * d)


def _term_pole3(t: complex) -> complex:
    """t(1+t)/(1-t)**3, the summand of (w d/dw) applied termwise."""
    d = 1.0 - t
    if abs(d) < EPS_POLE:
        raise PoleProximityError(f"1 - w*q**m = {d!r} is within {EPS_POLE} of a pole")
    return t * (1.0 + t) / (d * d * d)


def _sum_symmetric(w: complex, q: complex, n: int, term) -> complex:
    """Compensated symmetric sum over m in [-n, n], added outside-in so
    the dominant near-pole terms enter last.  q**m is powered afresh for
    each m to keep per-term roundoff at a few ulp."""
    s = 0j
    c = 0j
    for k in range(n, 0, -1):
        qk = q**k
        for t in (w * qk, w / qk):
            y = term(t) - c
            tt = s + y
            c = (tt - s) - y
            s = tt
    y = term(w) - c
    return s + y


def w_symmetric_sum(w, q, n_terms: int) -> complex:
    """Raw symmetric partial sum of the double-pole series over
    m in [-n_terms, n_terms], with no annulus reduction.

    Works for any nonzero q off the unit circle; the m <-> m term
    bijection under (w, q) -> (1/w, 1/q) holds exactly, so the partial
    sum is invariant under the involution up to roundoff.
    """
    if n_terms < 0:
        raise DomainError("n_terms must be >= 0")
    wv, qv = _wval(w), _qval(q)
    if wv == 0 or qv == 0:
        raise DomainError("w and q must be nonzero")
    return _sum_symmetric(wv, qv, n_terms, _term_pole2)


def _tail_bound_sym(aq: float, n: int, order: int) -> float:
    """Bound on the omitted |m| > n tail of the symmetric sum, valid on
    the closed annulus |q| <= |w| <= 1.

    Positive side: |w*q**m| <= |q|**m and |1 - w*q**m| >= 1 - |q|.
    Negative side: rewrite term(-k) through the termwise involution as a
    term in 1/w, whose modulus is <= |q|**(k-1), and factor out the worst
    denominator 1 - |q|**n of the tail.
    """
    aqn = aq**n
    if order == 2:
        pos = aq ** (n + 1) / (1.0 - aq) ** 3
        neg = aqn / ((1.0 - aqn) ** 2 * (1.0 - aq))
    elif order == 3:
        pos = aq ** (n + 1) * (1.0 + aq) / (1.0 - aq) ** 4
        neg = aqn * (1.0 + aqn) / ((1.0 - aqn) ** 3 * (1.0 - aq))
    else:  # pragma: no cover
        raise ValueError(order)
    return pos + neg


def _plan_sym(aq: float, tol: float, max_terms: int, order: int) -> TruncationPlan:
    # plain increment keeps the returned order minimal, hence monotone in tol
    n = 1
    while True:
        bound = _tail_bound_sym(aq, n, order)
        if bound <= tol:
            return TruncationPlan(n, bound)
        if n >= max_terms:
            raise NonConvergenceError(
                f"tolerance {tol} not certified within {max_terms} terms (|q| = {aq})"
            )
        n += 1


def plan_truncation(w_red, q, tol: float, *, max_terms: int = DEFAULT_MAX_TERMS) -> TruncationPlan:
    """Truncation order and certified tail bound for the double-pole sum.

    Parameters
    ----------
    w_red : WPoint or complex
        Point already reduced to the annulus |q| < |w_red| <= 1.
    q : Nome or complex
        Multiplier with 0 < |q| < 1.
    tol : float
        Target bound for the omitted tail.
    max_terms : int
        Cap on the symmetric truncation order.

    Raises
    ------
    DomainError
        If w_red is not reduced, or tol is not positive.
    NonConvergenceError
        If no order up to max_terms certifies the tolerance.
    """
    wv, qv = _wval(w_red), _qval(q)
    aw, aq = abs(wv), abs(qv)
    if not 0.0 < aq < 1.0:
        raise DomainError(f"q must satisfy 0 < |q| < 1, got {qv!r}")
    if not (aq * (1.0 - 1e-12) < aw <= 1.0 + 1e-12):
        raise DomainError(f"w_red with |w_red| = {aw} is not reduced to the annulus (|q| = {aq})")
    if not tol > 0.0:
        raise DomainError(f"tol must be positive, got {tol}")
    return _plan_sym(aq, tol, max_terms, order=2)


def _check_pole_reduced(w_red: complex, q: complex) -> None:
    """Reject reduced points within EPS_POLE of the pole set w in q**Z.

    On the annulus only the multipliers q**m with m in {-1, 0, 1} can
    bring w_red near 1.
    """
    for t in (w_red, w_red * q, w_red / q):
        if abs(1.0 - t) < EPS_POLE:
            raise PoleProximityError(
                f"reduced point {w_red!r} is within {EPS_POLE} of a pole (|q| = {abs(q)})"
            )


def eval_W(w, q, tol: float = DEFAULT_TOL, *, max_terms: int = DEFAULT_MAX_TERMS) -> SeriesValue:
    """Evaluate the q-periodic double-pole sum W(w, q).

    The point is first reduced to the fundamental annulus (which realizes
    the invariance under w -> w*q exactly), then summed symmetrically at
    the order chosen by :func:`plan_truncation`.  Inputs with |q| > 1 are
    mapped through the involution (w, q) -> (1/w, 1/q), which leaves the
    sum invariant.

    Returns
    -------
    SeriesValue
        Value, certified tail bound (<= tol), and the truncation order.

    Raises
    ------
    PoleProximityError
        If the reduced point is within EPS_POLE of the pole set q**Z.
    NonConvergenceError
        If the tolerance cannot be certified within max_terms.
    """
    wv, qv = _canonical_wq(w, q)
    w_red, _ = reduce_annulus(WPoint(wv), Nome(qv))
    _check_pole_reduced(w_red.w, qv)
    plan = plan_truncation(w_red, qv, tol, max_terms=max_terms)
    value = _sum_symmetric(w_red.w, qv, plan.n_terms, _term_pole2)
    return SeriesValue(value, plan.tail_bound, plan.n_terms)


def eval_W_prime(w, q, tol: float = DEFAULT_TOL, *, max_terms: int = DEFAULT_MAX_TERMS) -> SeriesValue:
    """Evaluate W'(w, q) = (w d/dw) W(w, q), termwise
    sum of w*q**m (1 + w*q**m) / (1 - w*q**m)**3.

    Same reduction, pole handling, and planning as :func:`eval_W`, with
    the cubic-denominator tail majorant.
    """
    wv, qv = _canonical_wq(w, q)
    sign = 1.0
    if abs(_qval(q)) > 1.0:
        # the involution flips the sign of the logarithmic derivative
        sign = -1.0
    w_red, _ = reduce_annulus(WPoint(wv), Nome(qv))
    _check_pole_reduced(w_red.w, qv)
    aq = abs(qv)
    if not tol > 0.0:
        raise DomainError(f"tol must be positive, got {tol}")
    plan = _plan_sym(aq, tol, max_terms, order=3)
    value = _sum_symmetric(w_red.w, qv, plan.n_terms, _term_pole3)
    return SeriesValue(sign * value, plan.tail_bound, plan.n_terms)


@lru_cache(maxsize=None)
def _sigma(k: int, n: int) -> int:
    """Divisor power sum sigma_k(n) by direct divisor enumeration."""
    s = 0
    d = 1
    while d * d <= n:
        if n % d == 0:
            s += d**k
            e = n // d
            if e != d:
                s += e**k
        d += 1
    return s


def _plan_sigma_series(coeff: float, p: int, aq: float, tol: float, max_terms: int) -> TruncationPlan:
    """Order N with coeff * sum_{n>N} sigma(n)|q|**n <= tol, using
    sigma_{p-1}(n) <= n**p and the ratio bound
    a_{n+1}/a_n <= |q| * ((n+2)/(n+1))**p on a_n = n**p |q|**n."""
    n = 1
    an = coeff * aq  # coeff * 1**p * aq
    while True:
        a_next = coeff * float(n + 1) ** p * aq ** (n + 1)
        r = aq * ((n + 2) / (n + 1)) ** p
        if r < 1.0:
            bound = a_next / (1.0 - r)
            if bound <= tol:
                return TruncationPlan(n, bound)
        if n >= max_terms:
            raise NonConvergenceError(
                f"tolerance {tol} not certified within {max_terms} terms (|q| = {aq})"
            )
        n += 1
        an = a_next


def _eisenstein(q, tol: float, max_terms: int, coeff: int, k: int, sign: int) -> SeriesValue:
    """Shared evaluator for 1 + sign*coeff*sum sigma_k(n) q**n."""
    qv = _qval(q)
    aq = abs(qv)
    if not 0.0 < aq < 1.0:
        raise DomainError(f"q must satisfy 0 < |q| < 1, got {qv!r}")
    if not tol > 0.0:
        raise DomainError(f"tol must be positive, got {tol}")
    plan = _plan_sigma_series(float(coeff), k + 1, aq, tol, max_terms)
    s = 0j
    for n in range(plan.n_terms, 0, -1):
        s += _sigma(k, n) * qv**n
    return SeriesValue(1.0 + sign * coeff * s, plan.tail_bound, plan.n_terms)


def eval_E2(q, tol: float = DEFAULT_TOL, *, max_terms: int = DEFAULT_MAX_TERMS) -> SeriesValue:
    """Weight-2 Eisenstein series 1 - 24 sum sigma_1(n) q**n.

    The tail bound uses sigma_1(n) <= n**2 and a geometric ratio bound on
    n**2 |q|**n.
    """
    return _eisenstein(q, tol, max_terms, coeff=24, k=1, sign=-1)


def eval_E4(q, tol: float = DEFAULT_TOL, *, max_terms: int = DEFAULT_MAX_TERMS) -> SeriesValue:
    """Weight-4 Eisenstein series 1 + 240 sum sigma_3(n) q**n."""
    return _eisenstein(q, tol, max_terms, coeff=240, k=3, sign=1)


def eval_E6(q, tol: float = DEFAULT_TOL, *, max_terms: int = DEFAULT_MAX_TERMS) -> SeriesValue:
    """Weight-6 Eisenstein series 1 - 504 sum sigma_5(n) q**n."""
    return _eisenstein(q, tol, max_terms, coeff=504, k=5, sign=-1)


_G2_SCALE = (4.0 / 3.0) * math.pi**4
_G3_SCALE = (8.0 / 27.0) * math.pi**6


def g2(tau, tol: float = DEFAULT_TOL, *, max_terms: int = DEFAULT_MAX_TERMS) -> complex:
    """Weierstrass invariant g2(tau) = (4/3) pi**4 E4(q) for the lattice
    Z + Z*tau; the result is within tol of the exact value."""
    from .coords import UpperHalfTau, nome

    t = tau if isinstance(tau, UpperHalfTau) else UpperHalfTau(tau)
    q = nome(t)
    return _G2_SCALE * eval_E4(q, tol / _G2_SCALE, max_terms=max_terms).value


def g3(tau, tol: float = DEFAULT_TOL, *, max_terms: int = DEFAULT_MAX_TERMS) -> complex:
    """Weierstrass invariant g3(tau) = (8/27) pi**6 E6(q); within tol of
    the exact value."""
    from .coords import UpperHalfTau, nome

    t = tau if isinstance(tau, UpperHalfTau) else UpperHalfTau(tau)
    q = nome(t)
    return _G3_SCALE * eval_E6(q, tol / _G3_SCALE, max_terms=max_terms).value


def eval_psi2(w, q, n_max: int) -> complex:
    """Symmetric partial sum of the bilateral series
    sum_n (1-w)**2 / (1 - w*q**n)**2 * q**n over n in [-n_max, n_max].

    Termwise it equals (1-w)**2/w times the double-pole summand, so the
    partial sums converge to (1-w)**2/w * W(w, q).

    Raises
    ------
    PoleProximityError
        If any denominator 1 - w*q**n over the range is within EPS_POLE
        of zero.
    """
    if n_max < 0:
        raise DomainError("n_max must be >= 0")
    wv, qv = _wval(w), _qval(q)
    if wv == 0:
        raise DomainError("w must be nonzero")
    aq = abs(qv)
    if aq == 0.0 or aq == 1.0 or not math.isfinite(aq):
        raise DomainError(f"q must satisfy 0 < |q| < 1 (or |q| > 1), got {qv!r}")
    c = (1.0 - wv) ** 2

    def term(t: complex, qn: complex) -> complex:
        d = 1.0 - t
        if abs(d) < EPS_POLE:
            raise PoleProximityError(f"1 - w*q**n = {d!r} is within {EPS_POLE} of a pole")
        return c * qn / (d * d)

    s = 0j
    comp = 0j
    for k in range(n_max, 0, -1):
        qk = qv**k
        for t, qn in ((wv * qk, qk), (wv / qk, 1.0 / qk)):
            y = term(t, qn) - comp
            tt = s + y
            comp = (tt - s) - y
            s = tt
    if abs(1.0 - wv) < EPS_POLE:
        raise PoleProximityError(f"1 - w = {1.0 - wv!r} is within {EPS_POLE} of a pole")
    return s + (1.0 + 0j)  # n = 0 term is exactly 1
