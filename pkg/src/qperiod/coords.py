"""Coordinates on the covering tower of the punctured plane.

The exponential map projects the plane of ``Log z`` values onto the
punctured ``z``-plane.  On the covering plane two commuting translation
groups act: deck transformations ``Log z -> Log z + 2*pi*i*n`` and the
invariance group ``Log z -> Log z + (2*pi*i/tau)*n`` of the multiplicative
period map ``w = exp(tau*Log z)``.  This module holds the value types for
those coordinates, the two group actions, the fundamental-annulus
reduction for the ``q**Z`` action on the ``w``-plane, and branch-tracked
analytic continuation of the logarithm along polylines.

All values are plain double-precision complex scalars; every operation is
a pure function, safe to map over grids from multiple threads.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .errors import ContinuationError, DomainError

TWO_PI = 2.0 * math.pi
TWO_PI_I = complex(0.0, TWO_PI)

#: Relative mismatch allowed between exp(start.logz) and the first path vertex.
START_MATCH_RTOL = 1e-9

# Subdividing a straight segment halves its angular extent as seen from the
# origin, so 64 levels is unreachable for any path accepted by PathSpec.
_MAX_SUBDIVISION_DEPTH = 64


def _as_complex(value, name: str) -> complex:
    z = complex(value)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise DomainError(f"{name} must be finite, got {z!r}")
    return z


@dataclass(frozen=True)
class UpperHalfTau:
    """Modulus tau restricted to the open upper half plane."""

    tau: complex

    def __post_init__(self):
        t = _as_complex(self.tau, "tau")
        if t.imag <= 0.0:
            raise DomainError(f"tau must satisfy Im(tau) > 0, got {t!r}")
        object.__setattr__(self, "tau", t)


@dataclass(frozen=True)
class Nome:
    """Multiplier q with 0 < |q| < 1."""

    q: complex

    def __post_init__(self):
        qv = _as_complex(self.q, "q")
        aq = abs(qv)
        if not 0.0 < aq < 1.0:
            raise DomainError(f"q must satisfy 0 < |q| < 1, got {qv!r}")
        object.__setattr__(self, "q", qv)


@dataclass(frozen=True)
class CoveringPoint:
    """A value of Log z on the covering plane; projects to exp(logz) != 0."""

    logz: complex

    def __post_init__(self):
        object.__setattr__(self, "logz", _as_complex(self.logz, "logz"))


@dataclass(frozen=True)
class WPoint:
    """A nonzero point w of the multiplicative plane."""

    w: complex

    def __post_init__(self):
        wv = _as_complex(self.w, "w")
        if wv == 0:
            raise DomainError("w must be nonzero")
        object.__setattr__(self, "w", wv)


def _segment_origin_distance(a: complex, b: complex) -> float:
    d = b - a
    len2 = d.real * d.real + d.imag * d.imag
    if len2 == 0.0:
        return abs(a)
    # parameter of the closest point to 0 on the line through a, b
    t = -(a.real * d.real + a.imag * d.imag) / len2
    t = min(1.0, max(0.0, t))
    return abs(a + t * d)


@dataclass(frozen=True)
class PathSpec:
    """A polyline in the punctured plane, given by its vertices.

    No vertex may be 0 and no segment may pass through 0; both are
    checked at construction time.
    """

    vertices: tuple

    def __post_init__(self):
        verts = tuple(_as_complex(v, "vertex") for v in self.vertices)
        if not verts:
            raise DomainError("path needs at least one vertex")
        for v in verts:
            if v == 0:
                raise DomainError("path vertex at the origin")
        for a, b in zip(verts, verts[1:]):
            if _segment_origin_distance(a, b) <= 0.0:
                raise DomainError(f"path segment {a!r} -> {b!r} passes through the origin")
        object.__setattr__(self, "vertices", verts)

    @property
    def is_closed(self) -> bool:
        return self.vertices[0] == self.vertices[-1]


def nome(tau: UpperHalfTau) -> Nome:
    """Multiplier q = exp(2*pi*i*tau) of the modulus tau.

    Raises
    ------
    DomainError
        If Im(tau) <= 0, or if q underflows to zero in double precision
        (Im(tau) beyond roughly 340).
    """
    q = cmath.exp(TWO_PI_I * tau.tau)
    if q == 0:
        raise DomainError(f"q = exp(2*pi*i*tau) underflows for tau = {tau.tau!r}")
    return Nome(q)


def period_lift(p: CoveringPoint, tau: UpperHalfTau) -> WPoint:
    """Value w = exp(tau * logz) of the lifted period map at p."""
    return WPoint(cmath.exp(tau.tau * p.logz))


def u_coord(p: CoveringPoint, tau: UpperHalfTau) -> complex:
    """Torus coordinate u = tau/(2*pi*i) * logz; exp(2*pi*i*u) recovers
    period_lift(p, tau)."""
    return tau.tau / TWO_PI_I * p.logz


def monodromy_act(p: CoveringPoint, n: int) -> CoveringPoint:
    """Deck transformation logz -> logz + 2*pi*i*n."""
    if n == 0:
        return p
    return CoveringPoint(p.logz + TWO_PI_I * n)


def winding_act(p: CoveringPoint, n: int, tau: UpperHalfTau) -> CoveringPoint:
    """Translation logz -> logz + (2*pi*i/tau)*n; leaves period_lift fixed."""
    if n == 0:
        return p
    return CoveringPoint(p.logz + TWO_PI_I / tau.tau * n)


def reduce_annulus(w: WPoint, q: Nome) -> tuple[WPoint, int]:
    """Reduce w into the fundamental annulus |q| < |w_red| <= 1.

    Returns ``(w_red, k)`` with ``w_red = w * q**k``.  The annulus is
    half open; |w| = 1 stays put with k = 0, so reducing an already
    reduced point is the identity.
    """
    aw = abs(w.w)
    aq = abs(q.q)
    k = -math.floor(math.log(aw) / math.log(aq))
    if k == 0:
        return w, 0
    if abs(k * math.log(aq)) < 600.0:
        w_red = w.w * q.q**k
    else:
        # direct powering would over/underflow; go through logarithms
        w_red = cmath.exp(cmath.log(w.w) + k * cmath.log(q.q))
    return WPoint(w_red), k


def _continue_segment(logz: complex, a: complex, b: complex) -> complex:
    """Continue log along the straight segment a -> b, starting from the
    branch value ``logz`` at a.  Subdivides until every piece turns by
    less than pi/2, which rules out branch jumps."""
    stack = [(a, b, 0)]
    while stack:
        za, zb, depth = stack.pop()
        ratio = zb / za
        dphi = cmath.phase(ratio)
        if abs(dphi) < 0.5 * math.pi:
            logz = logz + cmath.log(ratio)
            continue
        if depth >= _MAX_SUBDIVISION_DEPTH:
            raise ContinuationError(
                f"segment {a!r} -> {b!r} passes too close to the origin to track"
            )
        mid = 0.5 * (za + zb)
        # process za->mid first, then mid->zb
        stack.append((mid, zb, depth + 1))
        stack.append((za, mid, depth + 1))
    return logz


def continue_log(path: PathSpec, start: CoveringPoint) -> tuple[CoveringPoint, int]:
    """Track a branch of log along ``path``, starting from ``start``.

    Parameters
    ----------
    path : PathSpec
        Polyline in the punctured plane.  Its first vertex must equal
        exp(start.logz) up to a small relative tolerance.
    start : CoveringPoint
        Branch value of log at the first vertex.

    Returns
    -------
    (CoveringPoint, int)
        The continued branch value at the last vertex and the number of
        complete turns of the argument around the origin (the winding
        number; exact when the path is a closed loop).

    Raises
    ------
    ContinuationError
        If exp(start.logz) does not match the first vertex.
    """
    v0 = path.vertices[0]
    z0 = cmath.exp(start.logz)
    if abs(z0 - v0) > START_MATCH_RTOL * max(1.0, abs(v0)):
        raise ContinuationError(
            f"start point exp({start.logz!r}) = {z0!r} does not match first vertex {v0!r}"
        )
    logz = start.logz
    for a, b in zip(path.vertices, path.vertices[1:]):
        logz = _continue_segment(logz, a, b)
    winding = round((logz.imag - start.logz.imag) / TWO_PI)
    return CoveringPoint(logz), int(winding)
