"""Interval-arithmetic audit of the constant chain behind the density bound.

Every claim is re-derived either with exact rational/integer arithmetic or
with outward-rounded intervals, and recorded as an :class:`AuditStep`. Claims
of the form "for all r >= 1" are reduced to comparisons of polynomial
coefficients, never to spot checks at sampled radii.

The literal bounds being certified live in :data:`BOUNDS`; passing a modified
copy (see :func:`tighten`) re-runs the audit against different targets.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from . import __version__

TRANSCENDENTAL_ULPS = 4


def _widen(x: float, k: int, direction: float) -> float:
    for _ in range(k):
        x = math.nextafter(x, direction)
    return x


@dataclass(frozen=True)
class Interval:
    """Closed interval [lo, hi]; arithmetic widens each result by one ulp per side."""

    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @classmethod
    def exact(cls, q) -> "Interval":
        """Tightest float enclosure of a rational (a point when representable)."""
        q = Fraction(q)
        f = float(q)
        if Fraction(f) == q:
            return cls(f, f)
        if Fraction(f) < q:
            return cls(f, math.nextafter(f, math.inf))
        return cls(math.nextafter(f, -math.inf), f)

    @classmethod
    def around(cls, x: float, ulps: int) -> "Interval":
        return cls(_widen(x, ulps, -math.inf), _widen(x, ulps, math.inf))

    @staticmethod
    def _out(lo: float, hi: float) -> "Interval":
        return Interval(math.nextafter(lo, -math.inf), math.nextafter(hi, math.inf))

    @staticmethod
    def coerce(x) -> "Interval":
        return x if isinstance(x, Interval) else Interval.exact(x)

    def __add__(self, other):
        o = Interval.coerce(other)
        return Interval._out(self.lo + o.lo, self.hi + o.hi)

    __radd__ = __add__

    def __neg__(self):
        return Interval(-self.hi, -self.lo)

    def __sub__(self, other):
        o = Interval.coerce(other)
        return Interval._out(self.lo - o.hi, self.hi - o.lo)

    def __rsub__(self, other):
        return Interval.coerce(other) - self

    def __mul__(self, other):
        o = Interval.coerce(other)
        p = (self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi)
        return Interval._out(min(p), max(p))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = Interval.coerce(other)
        if o.lo <= 0.0 <= o.hi:
            raise ZeroDivisionError("interval divisor contains 0")
        q = (self.lo / o.lo, self.lo / o.hi, self.hi / o.lo, self.hi / o.hi)
        return Interval._out(min(q), max(q))

    def __rtruediv__(self, other):
        return Interval.coerce(other) / self

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("only non-negative integer powers")
        if n == 0:
            return Interval(1.0, 1.0)
        if n % 2 == 0 and self.lo < 0.0 < self.hi:
            m = max(-self.lo, self.hi)
            return Interval(0.0, (Interval(m, m) ** n).hi)
        result = self
        for _ in range(n - 1):
            result = result * self
        return result

    def sqrt(self, ulps: int = TRANSCENDENTAL_ULPS) -> "Interval":
        if self.lo < 0:
            raise ValueError("sqrt of negative interval")
        return Interval(
            max(0.0, _widen(math.sqrt(self.lo), ulps, -math.inf)),
            _widen(math.sqrt(self.hi), ulps, math.inf),
        )

    def acos(self, ulps: int = TRANSCENDENTAL_ULPS) -> "Interval":
        if self.lo < -1.0 or self.hi > 1.0:
            raise ValueError("acos outside [-1, 1]")
        # decreasing function
        return Interval(
            _widen(math.acos(self.hi), ulps, -math.inf),
            _widen(math.acos(self.lo), ulps, math.inf),
        )

    def contains(self, x) -> bool:
        if isinstance(x, Interval):
            return self.lo <= x.lo and x.hi <= self.hi
        return self.lo <= x <= self.hi

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def hull(self, other: "Interval") -> "Interval":
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi))

    def as_list(self) -> list[float]:
        return [self.lo, self.hi]


def pi_interval(ulps: int = TRANSCENDENTAL_ULPS) -> Interval:
    return Interval.around(math.pi, ulps)


def sqrt2_interval(ulps: int = TRANSCENDENTAL_ULPS) -> Interval:
    return Interval.exact(2).sqrt(ulps)


# Literal bounds certified by the audit: key -> (value, kind).
# kind is "upper" (claim <= value), "lower" (claim >= value) or "exact" (claim == value).
BOUNDS: dict[str, tuple[Fraction, str]] = {
    "1.0120": (Fraction("1.0120"), "lower"),
    "1.0121": (Fraction("1.0121"), "upper"),
    "0.02541": (Fraction("0.02541"), "lower"),
    "0.02542": (Fraction("0.02542"), "upper"),
    "0.0255": (Fraction("0.0255"), "upper"),
    "1.013": (Fraction("1.013"), "upper"),
    "1.231": (Fraction("1.231"), "lower"),
    "1.232": (Fraction("1.232"), "upper"),
    "56/3": (Fraction(56, 3), "upper"),
    "30": (Fraction(30), "exact"),
    "250": (Fraction(250), "exact"),
    "1120": (Fraction(1120), "upper"),
    "2240": (Fraction(2240), "exact"),
    "24": (Fraction(24), "exact"),
    "128": (Fraction(128), "exact"),
    "3.52": (Fraction("3.52"), "exact"),
    "63/13": (Fraction(63, 13), "exact"),
    "1394.1": (Fraction("1394.1"), "upper"),
    "11315.6": (Fraction("11315.6"), "upper"),
    "12710": (Fraction(12710), "upper"),
    "56": (Fraction(56), "lower"),
    "56.1": (Fraction("56.1"), "lower"),
    "56.2": (Fraction("56.2"), "upper"),
    "27720": (Fraction(27720), "exact"),
    "0.01": (Fraction("0.01"), "exact"),
    "2079": (Fraction(2079), "exact"),
    "17325": (Fraction(17325), "exact"),
    "19404": (Fraction(19404), "upper"),
    "32114": (Fraction(32114), "exact"),
    "34402": (Fraction(34402), "upper"),
    "63": (Fraction(63), "exact"),
    "21": (Fraction(21), "exact"),
    "24373": (Fraction(24373), "upper"),
}


def _unit(key: str) -> Fraction:
    if "/" in key:
        return Fraction(1, int(key.split("/")[1]))
    if "." in key:
        return Fraction(1, 10 ** len(key.split(".")[1]))
    return Fraction(1)


def tighten(key: str, bounds: Mapping[str, tuple[Fraction, str]] = BOUNDS, to=None):
    """Copy of `bounds` with one bound made stricter (by one unit in its last digit by default)."""
    value, kind = bounds[key]
    if to is None:
        to = value + _unit(key) if kind == "lower" else value - _unit(key)
    out = dict(bounds)
    out[key] = (Fraction(to), kind)
    return out


@dataclass(frozen=True)
class AuditStep:
    name: str
    claim: str
    relation: str
    computed: Interval
    bound: Interval
    passed: bool
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "claim": self.claim,
            "relation": self.relation,
            "computed": self.computed.as_list(),
            "bound": self.bound.as_list(),
            "pass": self.passed,
            "note": self.note,
        }


_CHECKS = {
    "<=": lambda c, b: c.hi <= b.lo,
    "<": lambda c, b: c.hi < b.lo,
    ">=": lambda c, b: c.lo >= b.hi,
    ">": lambda c, b: c.lo > b.hi,
    "in": lambda c, b: b.lo <= c.lo and c.hi <= b.hi,
}


def interval_step(name, claim, relation, computed, bound, note="") -> AuditStep:
    computed, bound = Interval.coerce(computed), Interval.coerce(bound)
    return AuditStep(name, claim, relation, computed, bound, _CHECKS[relation](computed, bound), note)


def exact_step(name, claim, relation, computed, bound, note="") -> AuditStep:
    """Step decided in exact rational arithmetic; intervals are only for display."""
    c, b = Fraction(computed), Fraction(bound)
    ok = {"==": c == b, "<=": c <= b, "<": c < b, ">=": c >= b}[relation]
    return AuditStep(name, claim, relation, Interval.exact(c), Interval.exact(b), ok, note)


def _shell_poly(shift: int) -> list[Fraction]:
    """Coefficients [c0, c1, c2, c3] of (r + shift)^3 - (r - shift)^3."""
    return [
        Fraction(math.comb(3, k) * (shift ** (3 - k) - (-shift) ** (3 - k)))
        for k in range(4)
    ]


def _dominate_r2(coeffs: list[Fraction]) -> Fraction:
    """C with c2 r^2 + c1 r + c0 <= C r^2 for every r >= 1."""
    if len(coeffs) > 3 and any(coeffs[3:]):
        raise ValueError("degree > 2")
    return sum((max(c, Fraction(0)) for c in coeffs[:3]), Fraction(0))


def _b(bounds, key) -> Fraction:
    return bounds[key][0]


def _I(bounds, key) -> Interval:
    return Interval.exact(_b(bounds, key))


@dataclass(frozen=True)
class _Consts:
    pi: Interval
    sqrt2: Interval
    sol0: Interval
    tau0: Interval
    m1: Interval
    m2: Interval


def constant_enclosures(ulps: int = TRANSCENDENTAL_ULPS) -> _Consts:
    pi = pi_interval(ulps)
    sqrt2 = sqrt2_interval(ulps)
    theta = (Interval.exact(1) / 3).acos(ulps)
    sol0 = 3 * theta - pi
    tau0 = 4 * pi - 20 * sol0
    m1 = sol0 * 2 * sqrt2 / tau0
    m2 = (6 * sol0 - pi) * sqrt2 / (6 * tau0)
    return _Consts(pi, sqrt2, sol0, tau0, m1, m2)


H0 = Fraction("1.26")
H_PLUS = Fraction("1.3254")


def _m_minus_l(h: Interval, sqrt2: Interval) -> Interval:
    m = (sqrt2 - h) / (sqrt2 - 1) * ((H_PLUS - h) / (H_PLUS - 1)) * ((17 * h - 9 * h**2 - 3) / 5)
    return m - (H0 - h) / (H0 - 1)


def _m_minus_l_slope(h: Interval, sqrt2: Interval) -> Interval:
    a = (sqrt2 - h) / (sqrt2 - 1)
    b = (H_PLUS - h) / (H_PLUS - 1)
    c = (17 * h - 9 * h**2 - 3) / 5
    da = Interval(-1.0, -1.0) / (sqrt2 - 1)
    db = Interval.exact(-1 / (H_PLUS - 1))
    dc = (17 - 18 * h) / 5
    return da * b * c + a * db * c + a * b * dc + Interval.exact(1 / (H0 - 1))


def h_minus_enclosure(ulps: int = TRANSCENDENTAL_ULPS, lo=Fraction("1.231"), hi=Fraction("1.232")) -> Interval:
    """Interval bisection for the root of M - L between lo and hi."""
    sqrt2 = sqrt2_interval(ulps)
    a, b = Interval.exact(lo), Interval.exact(hi)
    fa = _m_minus_l(a, sqrt2)
    for _ in range(60):
        mid = Interval.exact(Fraction(a.lo) / 2 + Fraction(b.hi) / 2)
        fm = _m_minus_l(mid, sqrt2)
        if fm.lo <= 0.0 <= fm.hi or mid.lo <= a.lo or mid.hi >= b.hi:
            break
        if (fm.hi < 0) == (fa.hi < 0):
            a, fa = mid, fm
        else:
            b = mid
    return Interval(a.lo, b.hi)


def _inner_range(bounds, lo_key, hi_key) -> Interval:
    """Float interval inside the rational range [lo, hi], so containment in it is rigorous."""
    lo, hi = _b(bounds, lo_key), _b(bounds, hi_key)
    a, b = Interval.exact(lo).hi, Interval.exact(hi).lo
    if a > b:
        # a range tightened past empty holds nothing; collapse it to one endpoint
        a = b
    return Interval(a, b)


def _fcc_identity_residual() -> tuple[Fraction, Fraction]:
    """8 m1 - 96 m2 - 4 sqrt(2) as (sqrt(2)/tau0) (a sol0 + b pi); returns (a, b)."""
    # in units of sqrt(2)/tau0, as (sol0, pi) coefficient pairs
    m1 = (Fraction(2), Fraction(0))
    m2 = (Fraction(1), Fraction(-1, 6))
    fcc = (Fraction(-80), Fraction(16))  # 4 tau0 = 16 pi - 80 sol0
    return tuple(8 * a - 96 * b - c for a, b, c in zip(m1, m2, fcc))


def audit_constants(bounds=BOUNDS, ulps: int = TRANSCENDENTAL_ULPS) -> list[AuditStep]:
    k = constant_enclosures(ulps)
    lo_b, hi_b = _b(bounds, "1.231"), _b(bounds, "1.232")
    outer = Interval(Interval.exact(min(lo_b, hi_b)).lo, Interval.exact(max(lo_b, hi_b)).hi)
    hm = h_minus_enclosure(ulps)
    return [
        interval_step("m1_range", "m1 = 2*sqrt(2)*sol0/tau0 lies in [1.0120, 1.0121]", "in",
                      k.m1, _inner_range(bounds, "1.0120", "1.0121")),
        interval_step("m2_range", "m2 = (6*sol0 - pi)*sqrt(2)/(6*tau0) lies in [0.02541, 0.02542]", "in",
                      k.m2, _inner_range(bounds, "0.02541", "0.02542")),
        interval_step("m2_cap", "m2 <= 0.0255", "<=", k.m2, _I(bounds, "0.0255")),
        interval_step("m1_cap", "m1 <= 1.013", "<=", k.m1, _I(bounds, "1.013")),
        exact_step("fcc_identity", "8*m1 - 96*m2 = 4*sqrt(2) (coefficients of sol0 and pi cancel)", "==",
                   sum(abs(c) for c in _fcc_identity_residual()), 0),
        interval_step("fcc_identity_numeric", "|8*m1 - 96*m2 - 4*sqrt(2)| <= 1e-10", "in",
                      8 * k.m1 - 96 * k.m2 - 4 * k.sqrt2, Interval(-1e-10, 1e-10)),
        interval_step("h_minus_left_sign", "M(h) - L(h) < 0 at h = 1.231", "<",
                      _m_minus_l(Interval.exact(lo_b), k.sqrt2), 0.0),
        interval_step("h_minus_right_sign", "M(h) - L(h) > 0 at h = 1.232", ">",
                      _m_minus_l(Interval.exact(hi_b), k.sqrt2), 0.0),
        interval_step("h_minus_unique", "d/dh (M - L) > 0 on [1.231, 1.232], so the root is unique", ">",
                      _m_minus_l_slope(outer, k.sqrt2), 0.0),
        interval_step("h_minus_range", "h_minus lies in [1.231, 1.232]", "in",
                      hm, _inner_range(bounds, "1.231", "1.232")),
        interval_step("h_minus_value", "h_minus = 1.23175 +- 5e-4", "in", hm,
                      Interval(Interval.exact(Fraction("1.23125")).hi, Interval.exact(Fraction("1.23225")).lo)),
    ]


def audit_c2(bounds=BOUNDS, ulps: int = TRANSCENDENTAL_ULPS) -> list[AuditStep]:
    k = constant_enclosures(ulps)
    # (4/3)(r^3 - (r - 2)^3)
    inner = [Fraction(math.comb(3, j) * (-2) ** (3 - j)) for j in range(4)]
    ball_shell = [Fraction(4, 3) * (c - d) for c, d in zip([0, 0, 0, 1], inner)]
    count_shell = _shell_poly(5)
    n30, n250 = _b(bounds, "30"), _b(bounds, "250")
    c2 = -(Interval.exact(Fraction(56, 3)) + 2240 * k.m1)
    return [
        exact_step("c2_volume_shell", "(4/3)(r^3 - (r-2)^3) = 8r^2 - 16r + 32/3 <= (56/3) r^2 for r >= 1",
                   "<=", _dominate_r2(ball_shell), _b(bounds, "56/3")),
        exact_step("c2_count_shell_r2", "(r+5)^3 - (r-5)^3 has r^2 coefficient 30", "==", count_shell[2], n30),
        exact_step("c2_count_shell_r", "(r+5)^3 - (r-5)^3 has r coefficient 0", "==", count_shell[1], 0),
        exact_step("c2_count_shell_r3", "(r+5)^3 - (r-5)^3 has r^3 coefficient 0", "==", count_shell[3], 0),
        exact_step("c2_count_shell_r0", "(r+5)^3 - (r-5)^3 has constant term 250", "==", count_shell[0], n250),
        exact_step("c2_solid_angle_shell", "(30r^2 + 250) 4pi <= 1120 pi r^2 for r >= 1",
                   "<=", 4 * _dominate_r2([n250, Fraction(0), n30]), _b(bounds, "1120")),
        exact_step("c2_m1_coefficient", "(2 m1/pi) 1120 pi r^2 = 2240 m1 r^2",
                   "==", 2 * _b(bounds, "1120"), _b(bounds, "2240")),
        interval_step("c2_value", "c2 = -56/3 - 2240 m1 lies in [-2286, -2285]", "in", c2, Interval(-2286.0, -2285.0)),
    ]


def _alpha_parts(bounds, ulps):
    pi = pi_interval(ulps)
    factor = (
        _I(bounds, "3.52") ** 3 * 8 * _I(bounds, "63/13") * _I(bounds, "0.0255")
    )
    r2 = _b(bounds, "30") * factor + Interval.exact(Fraction(4, 3) * _b(bounds, "24")) * pi
    r0 = _b(bounds, "250") * factor + Interval.exact(Fraction(4, 3) * _b(bounds, "128")) * pi
    return r2, r0


def audit_alpha(bounds=BOUNDS, ulps: int = TRANSCENDENTAL_ULPS) -> list[AuditStep]:
    shell4 = _shell_poly(4)
    r2, r0 = _alpha_parts(bounds, ulps)
    return [
        exact_step("alpha_shell_r2", "(r+4)^3 - (r-4)^3 has r^2 coefficient 24", "==", shell4[2], _b(bounds, "24")),
        exact_step("alpha_shell_r0", "(r+4)^3 - (r-4)^3 has constant term 128", "==", shell4[0], _b(bounds, "128")),
        exact_step("alpha_shell_odd", "(r+4)^3 - (r-4)^3 has no r or r^3 term", "==", abs(shell4[1]) + abs(shell4[3]), 0),
        exact_step("alpha_volume_r2", "(4/3) pi 24 r^2 = 32 pi r^2", "==", Fraction(4, 3) * shell4[2], 32),
        exact_step("alpha_volume_r0", "(4/3) pi 128 = 512 pi / 3", "==", Fraction(4, 3) * shell4[0], Fraction(512, 3)),
        exact_step("alpha_neighbor_radius", "2 h0 + 1 = 3.52 (ball holding every unit ball centered within 2.52)",
                   "==", 2 * H0 + 1, _b(bounds, "3.52")),
        exact_step("alpha_L_max", "max L on edges = L(1) ... bounded by 1.26/0.26 = 63/13",
                   "==", H0 / (H0 - 1), _b(bounds, "63/13")),
        exact_step("alpha_edge_factor", "(1/2) 16 m2 = 8 m2", "==", Fraction(1, 2) * 16, 8),
        interval_step("alpha_r2_coefficient",
                      "30 * 3.52^3 * 8 * (63/13) * 0.0255 + 32 pi <= 1394.1", "<=", r2, _I(bounds, "1394.1")),
        interval_step("alpha_constant",
                      "250 * 3.52^3 * 8 * (63/13) * 0.0255 + 512 pi / 3 <= 11315.6", "<=", r0, _I(bounds, "11315.6")),
        exact_step("alpha_total", "1394.1 r^2 + 11315.6 <= 12710 r^2 for r >= 1", "<=",
                   _dominate_r2([_b(bounds, "11315.6"), Fraction(0), _b(bounds, "1394.1")]), _b(bounds, "12710")),
    ]


def audit_zeta(bounds=BOUNDS, ulps: int = TRANSCENDENTAL_ULPS) -> list[AuditStep]:
    sqrt2 = sqrt2_interval(ulps)
    cube = (2 * sqrt2 + 1) ** 3
    n_pts = _b(bounds, "56")
    n_pts_int = int(n_pts) if n_pts.denominator == 1 else 0
    hm = h_minus_enclosure(ulps)
    n30, n250 = _b(bounds, "30"), _b(bounds, "250")
    per_cell = _b(bounds, "0.01")
    c27720 = _b(bounds, "27720")
    return [
        interval_step("zeta_cube_enclosure", "(2 sqrt(2) + 1)^3 lies in [56.1, 56.2]", "in",
                      cube, _inner_range(bounds, "56.1", "56.2")),
        interval_step("zeta_floor_lower", "(2 sqrt(2) + 1)^3 > 56", ">", cube, _I(bounds, "56")),
        interval_step("zeta_floor_upper", "(2 sqrt(2) + 1)^3 < 57", "<", cube, Interval.exact(n_pts + 1)),
        exact_step("zeta_binomial", "C(56, 3) = 27720", "==", math.comb(n_pts_int, 3), c27720),
        interval_step("zeta_beta_nonnegative", "h_minus >= 2 h0 - h_plus, so beta0 >= 0 on critical edges", ">=",
                      hm, Interval.exact(2 * H0 - H_PLUS)),
        exact_step("zeta_beta_cap", "beta0 <= beta0(h0) = 0.005, two critical edges: 2 * 0.005 = 0.01", "==",
                   2 * Fraction("0.005"), per_cell),
        exact_step("zeta_r2", "(30/4) * 27720 * 0.01 = 2079", "==", n30 / 4 * c27720 * per_cell, _b(bounds, "2079")),
        exact_step("zeta_constant", "(250/4) * 27720 * 0.01 = 17325", "==", n250 / 4 * c27720 * per_cell,
                   _b(bounds, "17325")),
        exact_step("zeta_total", "2079 r^2 + 17325 <= 19404 r^2 for r >= 1", "<=",
                   _dominate_r2([_b(bounds, "17325"), Fraction(0), _b(bounds, "2079")]), _b(bounds, "19404")),
    ]


def audit_c0_c1_final(bounds=BOUNDS, ulps: int = TRANSCENDENTAL_ULPS) -> list[AuditStep]:
    k = constant_enclosures(ulps)
    c1 = Interval.exact(Fraction(56, 3)) + _b(bounds, "2240") * k.m1 + _I(bounds, "32114")
    # (1 + 3/r)^3 = 1 + 9/r + 27/r^2 + 27/r^3
    expansion = [math.comb(3, j) * 3**j for j in range(4)]
    final = (_b(bounds, "21") * k.pi + _I(bounds, "34402")) / k.sqrt2
    return [
        exact_step("c0", "19404 + 12710 = 32114, so c0 = -32114", "==",
                   _b(bounds, "19404") + _b(bounds, "12710"), _b(bounds, "32114")),
        interval_step("c1_enclosure", "c1 = 56/3 + 2240 m1 + 32114 <= 34402", "<=", c1, _I(bounds, "34402")),
        exact_step("c1_rounded_line", "56/3 + 1.013 * 2240 + 32114 <= 34402", "<=",
                   Fraction(56, 3) + _b(bounds, "1.013") * _b(bounds, "2240") + _b(bounds, "32114"),
                   _b(bounds, "34402")),
        exact_step("density_expansion", "(1 + 3/r)^3 - 1 <= (9 + 27 + 27)/r = 63/r for r >= 1", "==",
                   sum(expansion[1:]), _b(bounds, "63")),
        exact_step("density_pi_coefficient", "63 pi / sqrt(18) = 63 pi / (3 sqrt(2)) = 21 pi / sqrt(2)", "==",
                   _b(bounds, "63") / 3, _b(bounds, "21")),
        exact_step("density_c1_coefficient", "(r+1)^2 / (4 sqrt(2) r^3) <= (1+2+1)/(4 sqrt(2) r) = 1/(sqrt(2) r)",
                   "==", Fraction(sum(math.comb(2, j) for j in range(3)), 4), 1),
        interval_step("final_constant", "(21 pi + 34402)/sqrt(2) <= 24373", "<=", final, _I(bounds, "24373")),
    ]


def fcc_density_interval(ulps: int = TRANSCENDENTAL_ULPS) -> Interval:
    """pi / sqrt(18)."""
    return pi_interval(ulps) / (3 * sqrt2_interval(ulps))


def audit_bound_on_packing(p, r_list, bounds=BOUNDS, ulps: int = TRANSCENDENTAL_ULPS) -> list[AuditStep]:
    """Check density(V, 0, r) against the final bound and the intermediate density inequality."""
    from .packing import density

    k = constant_enclosures(ulps)
    base = fcc_density_interval(ulps)
    steps = []
    for r in r_list:
        r = float(r)
        d = density(p, r)
        # the exact-density sum carries at most a few hundred rounding errors
        dens = Interval(d - 1e-12, d + 1e-12)
        ri = Interval.exact(r)
        final = base + _I(bounds, "24373") / ri
        inter = base * (1 + 3 / ri) ** 3 + _I(bounds, "34402") * (ri + 1) ** 2 / (ri**3 * 4 * k.sqrt2)
        for name, claim, rhs in (
            (f"bound_final_r{r:g}", f"density(V,0,{r:g}) <= pi/sqrt(18) + 24373/r", final),
            (f"bound_intermediate_r{r:g}",
             f"density(V,0,{r:g}) <= pi/sqrt(18) (1+3/r)^3 + 34402 (r+1)^2/(4 sqrt(2) r^3)", inter),
        ):
            note = "vacuous at this scale" if rhs.lo > 1.0 else ""
            steps.append(interval_step(name, claim, "<=", dens, rhs, note))
    return steps


@dataclass(frozen=True)
class Certificate:
    steps: list[AuditStep]

    @property
    def passed(self) -> bool:
        return all(s.passed for s in self.steps)

    def failures(self) -> list[AuditStep]:
        return [s for s in self.steps if not s.passed]

    def to_list(self) -> list[dict]:
        return [s.to_dict() for s in self.steps]


def full_report(bounds=BOUNDS, ulps: int = TRANSCENDENTAL_ULPS, packing=None, r_list=()) -> Certificate:
    """Run every audit group; the certificate passes iff every step does."""
    steps = (
        audit_constants(bounds, ulps)
        + audit_c2(bounds, ulps)
        + audit_alpha(bounds, ulps)
        + audit_zeta(bounds, ulps)
        + audit_c0_c1_final(bounds, ulps)
    )
    if packing is not None:
        steps += audit_bound_on_packing(packing, r_list, bounds, ulps)
    return Certificate(steps)
