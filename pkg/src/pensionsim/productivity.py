"""Age-dependent productivity via a univariate Akima spline."""
from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Iterable, Sequence

# (age in ticks, productivity) hump peaking in the mid-30s
DEFAULT_KNOTS: tuple[tuple[float, float], ...] = (
    (0, 0.60), (20, 0.85), (30, 0.98), (35, 1.00), (45, 0.95),
    (55, 0.85), (65, 0.70), (80, 0.50), (100, 0.35),
)


class KnotError(ValueError):
    pass


def akima_tangents(xs: Sequence[float], ys: Sequence[float]) -> list[float]:
    """Node tangents for Akima's 1970 scheme.

    Segment slopes are extended by two quadratic ghost slopes on each side;
    where both weights vanish the tangent falls back to the mean of the
    adjacent slopes.
    """
    n = len(xs)
    m = [(ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]) for i in range(n - 1)]
    # pad so that slope of segment i sits at ext[i + 2]
    left1 = 2.0 * m[0] - m[1]
    left2 = 2.0 * left1 - m[0]
    right1 = 2.0 * m[-1] - m[-2]
    right2 = 2.0 * right1 - m[-1]
    ext = [left2, left1, *m, right1, right2]
    tangents = []
    for i in range(n):
        d_im2, d_im1, d_i, d_ip1 = ext[i], ext[i + 1], ext[i + 2], ext[i + 3]
        w1 = abs(d_ip1 - d_i)
        w2 = abs(d_im1 - d_im2)
        if w1 + w2 == 0.0:
            tangents.append((d_im1 + d_i) / 2.0)
        else:
            tangents.append((w1 * d_im1 + w2 * d_i) / (w1 + w2))
    return tangents


@dataclass(frozen=True)
class ProductivityCurve:
    xs: tuple[float, ...]
    ys: tuple[float, ...]
    tangents: tuple[float, ...]
    # per interval: (c0, c1, c2, c3) in powers of (x - xs[i])
    coeffs: tuple[tuple[float, float, float, float], ...] = field(repr=False)

    def raw(self, x: float) -> float:
        """Unclamped spline value with constant extension outside the knots."""
        xs = self.xs
        if x <= xs[0]:
            return self.ys[0]
        if x >= xs[-1]:
            return self.ys[-1]
        i = bisect_right(xs, x) - 1
        c0, c1, c2, c3 = self.coeffs[i]
        s = x - xs[i]
        return c0 + s * (c1 + s * (c2 + s * c3))

    def derivative(self, x: float) -> float:
        xs = self.xs
        if x < xs[0] or x > xs[-1]:
            return 0.0
        i = min(bisect_right(xs, x) - 1, len(xs) - 2)
        _, c1, c2, c3 = self.coeffs[i]
        s = x - xs[i]
        return c1 + s * (2.0 * c2 + s * 3.0 * c3)

    def __call__(self, age: float) -> float:
        v = self.raw(age)
        return 0.0 if v < 0.0 else 1.0 if v > 1.0 else v


def build_akima(knots: Iterable[tuple[float, float]]) -> ProductivityCurve:
    pts = [(float(a), float(v)) for a, v in knots]
    if len(pts) < 3:
        raise KnotError(f"need at least 3 knots, got {len(pts)}")
    for (a0, _), (a1, _) in zip(pts, pts[1:]):
        if not a1 > a0:
            raise KnotError(f"knot ages must be strictly increasing ({a0} then {a1})")
    for a, v in pts:
        if not 0.0 < v <= 1.0:
            raise KnotError(f"productivity {v} at age {a} outside (0, 1]")
    xs = tuple(a for a, _ in pts)
    ys = tuple(v for _, v in pts)
    t = akima_tangents(xs, ys)
    coeffs = []
    for i in range(len(xs) - 1):
        h = xs[i + 1] - xs[i]
        slope = (ys[i + 1] - ys[i]) / h
        coeffs.append((ys[i], t[i],
                       (3.0 * slope - 2.0 * t[i] - t[i + 1]) / h,
                       (t[i] + t[i + 1] - 2.0 * slope) / (h * h)))
    return ProductivityCurve(xs, ys, tuple(t), tuple(coeffs))


def productivity_at(curve: ProductivityCurve, age: float) -> float:
    if age < 0:
        raise ValueError("age must be non-negative")
    return curve(age)


def parse_knots(text: str) -> list[tuple[float, float]]:
    """``age value`` per line; blank lines and ``#`` comments ignored."""
    knots = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise KnotError(f"line {lineno}: expected 'age value', got {line!r}")
        try:
            knots.append((float(parts[0]), float(parts[1])))
        except ValueError:
            raise KnotError(f"line {lineno}: non-numeric knot {line!r}") from None
    return knots


def load_knots(path) -> ProductivityCurve:
    with open(path, encoding="utf-8") as fh:
        return build_akima(parse_knots(fh.read()))


def default_curve() -> ProductivityCurve:
    return build_akima(DEFAULT_KNOTS)
