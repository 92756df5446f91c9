"""Binary-action congestion design: equilibria, the feasible-pair curve,
and the correlated-equilibrium design problem, exactly.

The game is parameterized by a rational-coefficient polynomial f mapping
the fraction of agents choosing action 1 to that action's payoff; action 0
pays 0.  Feasible (welfare, incentive) pairs trace the curve
theta -> (theta*f(theta), (1-theta)*f(theta)); the design optimum is the
rightmost point of the curve's convex hull in the lower half-plane.

Exactness discipline: feasibility and LP values are exact rationals; the
only approximations are the reported locations of irrational roots and
optimizers, isolated by exact methods to stated widths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import sympy

from .exchangeable import SymmetricLpResult, per_urn_agent_payoff, urn_lp
from .games import AnonymousForm, Game, all_profiles
from .linalg import LpProblem, LpStatus, RationalMatrix, lp_solve
from .rational import ONE, ZERO, Rat, rat, rat_str

__all__ = [
    "CongestionFn",
    "PhiPoint",
    "BinaryEquilibria",
    "MixedSymmetricNash",
    "LimitDesign",
    "TwoPointDesign",
    "FiniteDesign",
    "build_binary_game",
    "binary_anonymous_form",
    "enumerate_binary_nash",
    "nash_payoff_bound_check",
    "phi_curve",
    "emit_phi_csv",
    "emit_phi_svg",
    "limit_ce_lp",
    "two_point_solve",
    "finite_n_ce",
]

ROOT_WIDTH = rat(1, 10**12)
OPTIMIZER_WIDTH = rat(1, 10**9)


# -- exact polynomial helpers (coefficient tuples, ascending powers) --------


def _poly_eval(coeffs: Sequence[Rat], x: Rat) -> Rat:
    acc = ZERO
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def _poly_derivative(coeffs: Sequence[Rat]) -> tuple[Rat, ...]:
    return tuple(rat(k) * c for k, c in enumerate(coeffs) if k >= 1)


def _poly_add(a: Sequence[Rat], b: Sequence[Rat]) -> tuple[Rat, ...]:
    out = [ZERO] * max(len(a), len(b))
    for i, c in enumerate(a):
        out[i] += c
    for i, c in enumerate(b):
        out[i] += c
    return tuple(out)


def _poly_mul(a: Sequence[Rat], b: Sequence[Rat]) -> tuple[Rat, ...]:
    out = [ZERO] * (len(a) + len(b) - 1) if a and b else []
    for i, ca in enumerate(a):
        if ca:
            for j, cb in enumerate(b):
                if cb:
                    out[i + j] += ca * cb
    return tuple(out)


def _poly_scale(a: Sequence[Rat], s: Rat) -> tuple[Rat, ...]:
    return tuple(s * c for c in a)


def _isolate_roots(
    coeffs: Sequence[Rat], lo: Rat, hi: Rat, width: Rat
) -> list[tuple[Rat, Rat]]:
    """Isolating intervals (exact rational endpoints, each containing one
    distinct real root) of the polynomial on [lo, hi], refined to ``width``.

    Rational roots come back as degenerate intervals.  Backed by sympy's
    exact real-root isolation.
    """
    if all(c == 0 for c in coeffs):
        raise ValueError("cannot isolate roots of the zero polynomial")
    x = sympy.Symbol("x")
    poly = sympy.Poly(
        [sympy.Rational(int(c.numerator), int(c.denominator)) for c in reversed(coeffs)],
        x,
        domain="QQ",
    )
    if poly.degree() < 1:
        return []
    intervals = poly.intervals(
        inf=sympy.Rational(int(lo.numerator), int(lo.denominator)),
        sup=sympy.Rational(int(hi.numerator), int(hi.denominator)),
        eps=sympy.Rational(int(width.numerator), int(width.denominator)),
    )
    out = []
    for (a, b), _mult in intervals:
        out.append((rat(int(a.p), int(a.q)), rat(int(b.p), int(b.q))))
    return out


@dataclass(frozen=True)
class CongestionFn:
    """Exact polynomial payoff of action 1 as a function of its usage share.

    Coefficients ascending: f(theta) = c0 + c1*theta + ...; the setup
    requires f(1) < 0 (action 1 cannot pay off when everyone takes it).
    """

    coeffs: tuple[Rat, ...]

    def __post_init__(self):
        if not self.coeffs:
            raise ValueError("at least one coefficient required")
        if self(ONE) >= 0:
            raise ValueError("the setup requires f(1) < 0")

    @classmethod
    def from_coeffs(cls, coeffs) -> "CongestionFn":
        return cls(tuple(rat(c) for c in coeffs))

    def __call__(self, theta) -> Rat:
        return _poly_eval(self.coeffs, rat(theta))

    @property
    def degree(self) -> int:
        d = len(self.coeffs) - 1
        while d > 0 and self.coeffs[d] == 0:
            d -= 1
        return d

    def lipschitz_bound(self) -> Rat:
        """Valid (not tight) bound on max |f'| over [0,1]: sum |f' coeffs|."""
        return sum((c if c >= 0 else -c for c in _poly_derivative(self.coeffs)), ZERO)


def build_binary_game(f: CongestionFn, n: int) -> Game:
    """Explicit normal form: u_i = f(#ones/n) if a_i = 1 else 0."""
    if n < 1:
        raise ValueError("need at least one agent")
    counts = (2,) * n
    values = [f(rat(k, n)) for k in range(n + 1)]
    tables = []
    for i in range(n):
        table = []
        for profile in all_profiles(counts):
            table.append(values[sum(profile)] if profile[i] == 1 else ZERO)
        tables.append(tuple(table))
    return Game(counts, tuple(tables))


def binary_anonymous_form(f: CongestionFn, n: int) -> AnonymousForm:
    """Anonymous payoff table of `build_binary_game` without materializing
    the 2^n profile space: g(1; k opponents on 1) = f((k+1)/n), g(0; .) = 0.
    """
    table = []
    for k in range(n):  # opponents' ones count; composition (zeros, ones)
        comp = (n - 1 - k, k)
        table.append((0, comp, ZERO))
        table.append((1, comp, f(rat(k + 1, n))))
    return AnonymousForm(n=n, m=2, table=tuple(table))


@dataclass(frozen=True)
class MixedSymmetricNash:
    """Symmetric mixed equilibrium probability, isolated to ROOT_WIDTH.

    ``exact`` is set when the probability is rational.  The equilibrium
    payoff is exactly 0 regardless (indifference with the zero action).
    """

    low: Rat
    high: Rat
    exact: Optional[Rat] = None

    @property
    def midpoint(self) -> Rat:
        return self.exact if self.exact is not None else (self.low + self.high) / 2


@dataclass(frozen=True)
class BinaryEquilibria:
    pure_counts: tuple[int, ...]
    mixed: tuple[MixedSymmetricNash, ...]


def _indifference_polynomial(f: CongestionFn, n: int) -> tuple[Rat, ...]:
    """E[f((K+1)/n)] for K ~ Binomial(n-1, p), as a polynomial in p.

    Expanded through factorial moments, so the degree equals deg f, not
    n - 1.
    """
    deg = f.degree
    big_n = n - 1
    # w_s: coefficient of E[K^s]
    w = [ZERO] * (deg + 1)
    for t in range(deg + 1):
        c = f.coeffs[t] if t < len(f.coeffs) else ZERO
        if not c:
            continue
        scale = c / rat(n) ** t
        for s in range(t + 1):
            w[s] += scale * math.comb(t, s)
    # Stirling numbers of the second kind, S2[s][r]
    s2 = [[0] * (deg + 1) for _ in range(deg + 1)]
    s2[0][0] = 1
    for s in range(1, deg + 1):
        for r in range(1, s + 1):
            s2[s][r] = s2[s - 1][r - 1] + r * s2[s - 1][r]
    out = [ZERO] * (deg + 1)
    falling = ONE
    for r in range(deg + 1):
        if r > 0:
            falling *= big_n - (r - 1)
        acc = ZERO
        for s in range(r, deg + 1):
            if w[s] and s2[s][r]:
                acc += w[s] * s2[s][r]
        out[r] = acc * falling
    return tuple(out)


def enumerate_binary_nash(f: CongestionFn, n: int) -> BinaryEquilibria:
    """Pure and symmetric mixed Nash equilibria of the n-agent binary game.

    A profile with k agents on action 1 is a pure equilibrium iff
    f(k/n) >= 0 (or k = 0) and f((k+1)/n) <= 0 (or k = n), checked exactly.
    Symmetric mixed equilibria are the p in (0,1) solving the exact
    indifference condition E[f((K+1)/n)] = 0, isolated to width 1e-12.
    """
    if n < 1:
        raise ValueError("need at least one agent")
    pure = []
    for k in range(n + 1):
        stay_one = k == 0 or f(rat(k, n)) >= 0
        stay_zero = k == n or f(rat(k + 1, n)) <= 0
        if stay_one and stay_zero:
            pure.append(k)
    mixed: list[MixedSymmetricNash] = []
    coeffs = _indifference_polynomial(f, n)
    # the condition at p=1 equals f(1) < 0, so the polynomial is never zero
    if any(c for c in coeffs[1:]):
        for lo, hi in _isolate_roots(coeffs, ZERO, ONE, ROOT_WIDTH):
            if lo == hi:
                if lo == 0 or lo == 1:
                    continue  # boundary roots are not mixed equilibria
                mixed.append(MixedSymmetricNash(low=lo, high=hi, exact=lo))
            else:
                mixed.append(MixedSymmetricNash(low=lo, high=hi))
    return BinaryEquilibria(pure_counts=tuple(pure), mixed=tuple(mixed))


def nash_payoff_bound_check(f: CongestionFn, n: int, lipschitz: Rat) -> bool:
    """Every enumerated equilibrium pays every agent within [0, L/n].

    Pure equilibria are checked exactly; symmetric mixed equilibria pay
    exactly 0 by indifference with the zero-payoff action.
    """
    lipschitz = rat(lipschitz)
    if lipschitz < 0:
        raise ValueError("a Lipschitz bound must be nonnegative")
    cap = lipschitz / n
    eqs = enumerate_binary_nash(f, n)
    for k in eqs.pure_counts:
        # agents on action 0 earn exactly 0, inside the band
        if k >= 1:
            payoff = f(rat(k, n))
            if payoff < 0 or payoff > cap:
                return False
    return True  # mixed payoffs are identically 0


@dataclass(frozen=True)
class PhiPoint:
    theta: Rat
    welfare: Rat
    incentive: Rat


def phi_curve(f: CongestionFn, grid: int) -> list[PhiPoint]:
    """Exact feasible-pair curve samples at theta = 0, 1/G, ..., 1."""
    if grid < 2:
        raise ValueError("need a grid of at least 2")
    points = []
    for t in range(grid + 1):
        theta = rat(t, grid)
        value = f(theta)
        points.append(
            PhiPoint(theta=theta, welfare=theta * value, incentive=(1 - theta) * value)
        )
    return points


def emit_phi_csv(points: Sequence[PhiPoint], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("theta,W,IC\n")
        for p in points:
            fh.write(f"{rat_str(p.theta)},{rat_str(p.welfare)},{rat_str(p.incentive)}\n")


def _hull(points: list[tuple[Rat, Rat]]) -> list[tuple[Rat, Rat]]:
    """Convex hull (counterclockwise) by exact monotone chain."""
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def emit_phi_svg(
    points: Sequence[PhiPoint], path, optimum: Optional[tuple[Rat, Rat]] = None
) -> None:
    """Deterministic SVG: curve polyline, hull polygon, optional optimum dot.

    Floating point appears only in coordinate formatting.
    """
    xy = [(p.welfare, p.incentive) for p in points]
    hull = _hull(list(xy))
    xs = [float(x) for x, _ in xy]
    ys = [float(y) for _, y in xy]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    span_x = (x1 - x0) or 1.0
    span_y = (y1 - y0) or 1.0
    size, margin = 600.0, 40.0

    def sx(v) -> str:
        return f"{margin + (float(v) - x0) / span_x * (size - 2 * margin):.3f}"

    def sy(v) -> str:
        return f"{size - margin - (float(v) - y0) / span_y * (size - 2 * margin):.3f}"

    curve = " ".join(f"{sx(x)},{sy(y)}" for x, y in xy)
    poly = " ".join(f"{sx(x)},{sy(y)}" for x, y in hull)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {size:.0f} {size:.0f}">',
        f'<polygon points="{poly}" fill="#dddddd" stroke="none"/>',
        f'<polyline points="{curve}" fill="none" stroke="#000000" stroke-width="2"/>',
        f'<line x1="{sx(0)}" y1="{margin:.3f}" x2="{sx(0)}" y2="{size - margin:.3f}" stroke="#888888"/>',
        f'<line x1="{margin:.3f}" y1="{sy(0)}" x2="{size - margin:.3f}" y2="{sy(0)}" stroke="#888888"/>',
    ]
    if optimum is not None:
        parts.append(
            f'<circle cx="{sx(optimum[0])}" cy="{sy(optimum[1])}" r="6" '
            f'fill="#ffffff" stroke="#000000" stroke-width="2"/>'
        )
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts))
        fh.write("\n")


@dataclass(frozen=True)
class LimitDesign:
    """Grid relaxation of the large-population design problem."""

    w_star: Rat
    atoms: tuple[tuple[Rat, Rat], ...]  # (theta, probability), positive only


def limit_ce_lp(f: CongestionFn, grid: int) -> LimitDesign:
    """Maximize E[theta f(theta)] over grid distributions with
    E[(1-theta) f(theta)] <= 0, exactly.

    The optimum is an LP vertex; with one binding incentive row it mixes at
    most two atoms (Caratheodory).
    """
    points = phi_curve(f, grid)
    num = len(points)
    problem = LpProblem(
        objective=tuple(p.welfare for p in points),
        eq=RationalMatrix.from_rows([[ONE] * num], cols=num),
        eq_rhs=(ONE,),
        ineq=RationalMatrix.from_rows([[p.incentive for p in points]], cols=num),
        ineq_rhs=(ZERO,),
    )
    solution = lp_solve(problem)
    if solution.status is not LpStatus.OPTIMAL:
        raise RuntimeError(f"design LP unexpectedly {solution.status.value}")
    atoms = tuple(
        (points[i].theta, w) for i, w in enumerate(solution.point) if w
    )
    return LimitDesign(w_star=solution.value, atoms=atoms)


@dataclass(frozen=True)
class TwoPointDesign:
    """Two-atom optimum {0, theta*} of the limit design problem.

    theta*, p*, w_star are rational approximations of the (generally
    irrational) optimum, accurate to OPTIMIZER_WIDTH; feasibility of the
    reported pair is exact by construction of the constraint.
    """

    theta_star: Rat
    p_star: Rat
    w_star: Rat
    first_best_theta: Rat


def _sign_changes(f: CongestionFn) -> int:
    """Number of sign alternations of f on [0, 1], via exact root isolation.

    Probes the gaps between isolating intervals; the isolation width is
    shrunk until every gap has positive length, so no probe can be a root.
    """
    width = rat(1, 10**15)
    while True:
        roots = _isolate_roots(f.coeffs, ZERO, ONE, width)
        gaps_ok = all(
            roots[k][1] < roots[k + 1][0] for k in range(len(roots) - 1)
        )
        if gaps_ok:
            break
        width /= 10**6
    probes = [ZERO]
    for k in range(len(roots) - 1):
        probes.append((roots[k][1] + roots[k + 1][0]) / 2)
    probes.append(ONE)
    signs = []
    for x in probes:
        v = f(x)
        if v > 0:
            signs.append(1)
        elif v < 0:
            signs.append(-1)
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def two_point_solve(f: CongestionFn) -> TwoPointDesign:
    """Closed-form-style solution when f starts and ends negative with
    exactly two sign changes.

    The optimum places p* on theta* and 1-p* on 0, where the incentive
    constraint binds: (1-p) f(0) + p (1-theta) f(theta) = 0.  theta* is the
    stationary point of the resulting one-dimensional objective, isolated
    by exact means and bisected to 1e-9; the first-best argmax of
    theta*f(theta) is returned for comparison.
    """
    if f(ZERO) >= 0 or f(ONE) >= 0:
        raise ValueError(
            "two-point construction needs f(0) < 0 and f(1) < 0; "
            "use limit_ce_lp for the general problem"
        )
    if _sign_changes(f) != 2:
        raise ValueError(
            "two-point construction needs exactly two sign changes on [0,1]; "
            "use limit_ce_lp for the general problem"
        )
    c = -f(ZERO)  # positive
    # W(theta) = c*theta*f / (c + (1-theta)*f); stationarity polynomial:
    # N' D - N D' with N = c*theta*f, D = c + (1-theta)*f
    fc = f.coeffs
    n_poly = _poly_scale(_poly_mul((ZERO, ONE), fc), c)
    d_poly = _poly_add((c,), _poly_mul((ONE, -ONE), fc))
    n_prime = _poly_derivative(n_poly)
    d_prime = _poly_derivative(d_poly)
    stationarity = _poly_add(
        _poly_mul(n_prime, d_poly), _poly_scale(_poly_mul(n_poly, d_prime), -ONE)
    )

    def w_of(theta: Rat) -> Rat:
        val = f(theta)
        return c * theta * val / (c + (1 - theta) * val)

    def p_of(theta: Rat) -> Rat:
        return c / (c + (1 - theta) * f(theta))

    candidates = []
    for lo, hi in _isolate_roots(stationarity, ZERO, ONE, OPTIMIZER_WIDTH * rat(1, 1000)):
        theta = lo if lo == hi else (lo + hi) / 2
        if f(theta) > 0:
            candidates.append(theta)
    if not candidates:
        raise ValueError("no stationary point with positive payoff found")
    theta_star = max(candidates, key=lambda t: (w_of(t), -t))

    fb_poly = _poly_add(fc, _poly_mul((ZERO, ONE), _poly_derivative(fc)))
    fb_candidates = [ZERO, ONE]
    for lo, hi in _isolate_roots(fb_poly, ZERO, ONE, OPTIMIZER_WIDTH * rat(1, 1000)):
        fb_candidates.append(lo if lo == hi else (lo + hi) / 2)
    first_best = max(fb_candidates, key=lambda t: (t * f(t), -t))

    return TwoPointDesign(
        theta_star=theta_star,
        p_star=p_of(theta_star),
        w_star=w_of(theta_star),
        first_best_theta=first_best,
    )


@dataclass(frozen=True)
class FiniteDesign:
    n: int
    result: SymmetricLpResult

    @property
    def w_n(self) -> Rat:
        return self.result.value


def finite_n_ce(f: CongestionFn, n: int) -> FiniteDesign:
    """Per-capita-welfare-optimal symmetric CE of the n-agent binary game.

    Runs the urn LP on the game's anonymous form (built directly from f;
    identical to detect_symmetry(build_binary_game(f, n)), which is
    asserted in tests for small n).  Urns are the compositions
    (n - k, k); the value reported is W_n.
    """
    form = binary_anonymous_form(f, n)
    objective = per_urn_agent_payoff(form)  # per-capita welfare per urn
    return FiniteDesign(n=n, result=urn_lp(form, objective))
