"""Real root bracketing/bisection and zero counting by the argument principle."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import (
    InvalidBracket,
    InvalidRectangle,
    LostBracket,
    NonFiniteSample,
    NoPhaseConvergence,
    ZeroOnContour,
)
from .numerics import LogDet, log_det

ZERO_TOL = 1e-13


@dataclass(frozen=True)
class Bracket:
    a: float
    b: float
    fa: float
    fb: float

    def __post_init__(self):
        if not self.a < self.b:
            raise InvalidBracket(f"need a < b, got [{self.a}, {self.b}]")
        if not self.fa * self.fb < 0:
            raise InvalidBracket("f must change sign on the bracket")


@dataclass(frozen=True)
class Rectangle:
    lower_left: complex
    upper_right: complex

    def __post_init__(self):
        d = complex(self.upper_right) - complex(self.lower_left)
        if not (d.real > 0 and d.imag > 0):
            raise InvalidRectangle("rectangle must have positive width and height")

    @classmethod
    def around(cls, center: complex, half_width: float, half_height: float | None = None) -> "Rectangle":
        hh = half_width if half_height is None else half_height
        c = complex(center)
        return cls(c - complex(half_width, hh), c + complex(half_width, hh))

    @property
    def width(self) -> float:
        return (self.upper_right - self.lower_left).real

    @property
    def height(self) -> float:
        return (self.upper_right - self.lower_left).imag

    @property
    def center(self) -> complex:
        return 0.5 * (self.lower_left + self.upper_right)

    def corners(self) -> list[complex]:
        ll, ur = complex(self.lower_left), complex(self.upper_right)
        return [ll, complex(ur.real, ll.imag), ur, complex(ll.real, ur.imag)]

    def contains(self, w: complex) -> bool:
        return (self.lower_left.real < w.real < self.upper_right.real
                and self.lower_left.imag < w.imag < self.upper_right.imag)


def bracket_scan(f: Callable[[float], float], a: float, b: float, n_samples: int) -> list[Bracket]:
    """One bracket per sign change of ``f`` between consecutive points of a
    uniform grid on ``[a, b]``.  An exact zero at a sample opens a bracket with
    its neighbours instead of being skipped."""
    if not a < b:
        raise InvalidBracket(f"need a < b, got [{a}, {b}]")
    if n_samples < 2:
        raise InvalidBracket("n_samples must be at least 2")
    xs = np.linspace(a, b, n_samples)
    fs = [float(f(x)) for x in xs]
    if not all(math.isfinite(v) for v in fs):
        raise NonFiniteSample("f is not finite on the sample grid")
    out: list[Bracket] = []
    i = 0
    while i < n_samples - 1:
        fa, fb = fs[i], fs[i + 1]
        if fa * fb < 0:
            out.append(Bracket(float(xs[i]), float(xs[i + 1]), fa, fb))
            i += 1
            continue
        if fb == 0 and fa != 0:
            # zero sits on a grid point: look past it for the sign
            j = i + 1
            while j < n_samples and fs[j] == 0:
                j += 1
            if j < n_samples and fa * fs[j] < 0:
                out.append(Bracket(float(xs[i]), float(xs[j]), fa, fs[j]))
            i = j
            continue
        i += 1
    return out


def bisect(f: Callable[[float], float], bracket: Bracket, xtol: float | None = None,
           max_iter: int = 200) -> float:
    """Bisection keeping the sign change at every step.

    The default tolerance is ``1e-12 * (1 + |root|)``.  The returned point is
    whichever final endpoint has the smaller ``|f|``.
    """
    a, b, fa, fb = bracket.a, bracket.b, bracket.fa, bracket.fb
    for _ in range(max_iter):
        tol = xtol if xtol is not None else 1e-12 * (1.0 + max(abs(a), abs(b)))
        if b - a <= tol:
            break
        c = 0.5 * (a + b)
        if c <= a or c >= b:  # no representable midpoint left
            break
        fc = float(f(c))
        if not math.isfinite(fc):
            raise LostBracket(f"f is not finite at {c}")
        if fc == 0:
            return c
        if fa * fc < 0:
            b, fb = c, fc
        else:
            a, fa = c, fc
    return a if abs(fa) <= abs(fb) else b


# -- argument principle ----------------------------------------------------

def _log_and_phase(value) -> tuple[float, complex]:
    """Split a complex number or :class:`LogDet` into (log|value|, unit phase)."""
    if isinstance(value, LogDet):
        return value.log_modulus, value.phase
    value = complex(value)
    if not (math.isfinite(value.real) and math.isfinite(value.imag)):
        raise NonFiniteSample(f"non-finite value {value}")
    r = abs(value)
    if r == 0:
        return -math.inf, 1 + 0j
    return math.log(r), value / r


def _edge_points(p: complex, q: complex, n: int) -> list[complex]:
    """``n`` points from ``p`` (included) towards ``q`` (excluded).

    Interior points are always computed from the lexicographically smaller
    end, so an edge shared by two cells yields bit-identical points.
    """
    if (q.real, q.imag) < (p.real, p.imag):
        inner = [q + (p - q) * (j / n) for j in range(n - 1, 0, -1)]
    else:
        inner = [p + (q - p) * (j / n) for j in range(1, n)]
    return [p] + inner


def winding_number(f: Callable[[complex], object], rect: Rectangle,
                   initial_samples_per_side: int = 16, max_evaluations: int = 200_000,
                   cache: dict | None = None) -> int:
    """Number of zeros of ``f`` inside ``rect`` (with multiplicity).

    ``f`` may return complex values or :class:`LogDet`.  The counterclockwise
    boundary is sampled and each segment is halved until the phase increment
    along it, and along both of its halves, is below pi/2.  Like any sampling
    scheme this can be fooled when the initial sampling is far too coarse for
    the number of zeros enclosed.  ``cache`` maps points to evaluations and
    may be shared between calls on neighbouring rectangles.
    """
    if initial_samples_per_side < 1:
        raise InvalidRectangle("initial_samples_per_side must be positive")
    corners = [complex(w) for w in rect.corners()]
    if cache is None:
        cache = {}
    budget = len(cache) + max_evaluations

    def evaluate(w: complex) -> tuple[float, complex]:
        if w not in cache:
            if len(cache) >= budget:
                raise NoPhaseConvergence("evaluation budget exhausted on contour")
            cache[w] = _log_and_phase(f(w))
        return cache[w]

    # initial polygon
    pts: list[complex] = []
    for k in range(4):
        pts.extend(_edge_points(corners[k], corners[(k + 1) % 4], initial_samples_per_side))
    vals = [evaluate(w) for w in pts]

    log_scale = max(v[0] for v in vals)
    _check_contour(vals, log_scale)

    total = 0.0
    min_seg = 1e-15 * max(rect.width, rect.height, abs(rect.center))
    stack = [(pts[i], pts[(i + 1) % len(pts)]) for i in range(len(pts))]
    stack.reverse()
    while stack:
        p, q = stack.pop()
        (lp, ph_p), (lq, ph_q) = evaluate(p), evaluate(q)
        log_scale = max(log_scale, lp, lq)
        _check_contour([(lp, ph_p), (lq, ph_q)], log_scale)
        step = cmath.phase(ph_q / ph_p)
        mid = 0.5 * (p + q)
        if abs(step) < math.pi / 2:
            # an undersampled segment can alias a full turn into a small step;
            # accept only if the halves reproduce it
            lm, ph_m = evaluate(mid)
            _check_contour([(lm, ph_m)], max(log_scale, lm))
            s1, s2 = cmath.phase(ph_m / ph_p), cmath.phase(ph_q / ph_m)
            if abs(s1) < math.pi / 2 and abs(s2) < math.pi / 2 and abs(s1 + s2 - step) < 1e-8:
                total += step
                continue
        if abs(q - p) < min_seg:
            raise NoPhaseConvergence("phase does not resolve on a vanishing segment")
        stack.append((mid, q))
        stack.append((p, mid))
    count = total / (2 * math.pi)
    rounded = round(count)
    if abs(count - rounded) > 1e-6:
        raise NoPhaseConvergence(f"non-integral phase change {count}")
    return int(rounded)


def _check_contour(vals, log_scale: float) -> None:
    floor = log_scale + math.log(ZERO_TOL)
    for lv, _ in vals:
        if lv == -math.inf or lv < floor:
            raise ZeroOnContour("function vanishes on the contour")


def split_rectangle(rect: Rectangle, fx: float = 0.5, fy: float = 0.5) -> list[Rectangle]:
    ll = complex(rect.lower_left)
    xm = ll.real + fx * rect.width
    ym = ll.imag + fy * rect.height
    ur = complex(rect.upper_right)
    return [
        Rectangle(ll, complex(xm, ym)),
        Rectangle(complex(xm, ll.imag), complex(ur.real, ym)),
        Rectangle(complex(xm, ym), ur),
        Rectangle(complex(ll.real, ym), complex(xm, ur.imag)),
    ]


# off-centre split points so zeros placed on a symmetric lattice do not land on internal edges
_SPLITS = ((0.5, 0.5), (0.4713, 0.5287), (0.5419, 0.4581), (0.3819, 0.6181))


def locate_zeros(f: Callable[[complex], object], rect: Rectangle, size_tol: float,
                 initial_samples_per_side: int = 8, max_depth: int = 80,
                 cell_samples_per_side: int = 4) -> list[tuple[complex, int, float]]:
    """Isolate zeros inside ``rect`` by recursive subdivision with winding counts.

    The outer contour starts from ``initial_samples_per_side`` points per side
    and sub-cells from ``cell_samples_per_side``; adaptive refinement does the
    rest, and child counts must add up to the parent count.  A split whose
    edges pass too close to a zero is retried at another split point.

    Returns ``(center, count, half_diagonal)`` for each final cell, where the
    cell diagonal is below ``size_tol``, or is below ``1000 * size_tol`` and can
    no longer be split because the phase of ``f`` does not resolve.
    """
    out: list[tuple[complex, int, float]] = []
    cache: dict = {}
    total = winding_number(f, rect, initial_samples_per_side, cache=cache)
    if total == 0:
        return out
    work = [(rect, total, 0)]
    while work:
        cell, count, depth = work.pop()
        half_diag = 0.5 * math.hypot(cell.width, cell.height)
        if 2 * half_diag <= size_tol or depth >= max_depth:
            out.append((cell.center, count, half_diag))
            continue
        for fx, fy in _SPLITS:
            try:
                parts = split_rectangle(cell, fx, fy)
                counts = [winding_number(f, r, cell_samples_per_side, cache=cache) for r in parts]
            except (ZeroOnContour, NoPhaseConvergence):
                continue
            if sum(counts) != count:
                continue
            break
        else:
            if 2 * half_diag <= 1e3 * size_tol:
                # rounding noise in f defeats the phase at this scale
                out.append((cell.center, count, half_diag))
                continue
            raise NoPhaseConvergence("could not split cell without hitting a zero")
        if len(cache) > 100_000:
            cache.clear()
        for r, c in zip(parts, counts):
            if c:
                work.append((r, c, depth + 1))
    out.sort(key=lambda t: (t[0].real, t[0].imag))
    return out


# -- Hermitian matrix functions increasing in a real parameter ---------------

def _negative_count(K: np.ndarray) -> int:
    return int(np.count_nonzero(np.linalg.eigvalsh(0.5 * (K + K.conj().T)) < 0))


def increasing_hermitian_zeros(K: Callable[[float], np.ndarray], a: float, b: float,
                               n_samples: int = 64, xtol_rel: float = 1e-12) -> list[tuple[float, int]]:
    """Zeros of ``det K(x)`` on ``[a, b]`` for a continuous Hermitian matrix
    function whose eigenvalues strictly increase with ``x``.

    Sign changes of the determinant are bracketed on a uniform grid and
    bisected.  The number of negative eigenvalues of ``K`` can only drop as
    ``x`` grows, and the size of the drop across a cell is the number of zeros
    in it: cells holding more than one zero are rescanned more finely, and a
    cell that shrinks below the tolerance with a drop of ``k`` is a zero of
    multiplicity ``k`` (placed by bisection on the count).  Returns
    ``(x, multiplicity)`` pairs in increasing order.
    """
    if not a < b:
        raise InvalidBracket(f"need a < b, got [{a}, {b}]")

    def proxy(x: float) -> float:
        return log_det(K(x)).real_proxy()

    def count(x: float) -> int:
        return _negative_count(K(x))

    found: list[tuple[float, int]] = []
    cells = [(a, b, max(n_samples, 2))]
    while cells:
        ca, cb, ns = cells.pop()
        xs = np.linspace(ca, cb, ns)
        counts = [count(x) for x in xs]
        for x0, x1, n0, n1 in zip(xs[:-1], xs[1:], counts[:-1], counts[1:]):
            drop = n0 - n1
            if drop <= 0:
                continue
            x0, x1 = float(x0), float(x1)
            if drop == 1:
                f0, f1 = proxy(x0), proxy(x1)
                if f0 * f1 < 0:
                    # to machine precision: near a pole of K the slope is large
                    found.append((bisect(proxy, Bracket(x0, x1, f0, f1), xtol=0.0), 1))
                    continue
            if x1 - x0 <= xtol_rel * (1.0 + abs(x0)):
                found.append((_count_bisect(count, x0, x1, n0), drop))
            else:
                cells.append((x0, x1, 16))
    found.sort()
    return found


def _count_bisect(count: Callable[[float], int], a: float, b: float, n_left: int) -> float:
    for _ in range(200):
        c = 0.5 * (a + b)
        if b - a <= 1e-13 * (1.0 + abs(a)) or c <= a or c >= b:
            break
        if count(c) < n_left:
            b = c
        else:
            a = c
    return 0.5 * (a + b)
