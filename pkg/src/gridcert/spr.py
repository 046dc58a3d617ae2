"""Positive-realness tests and the decentralized per-bus stability certificate.

A bus with dynamics ``p`` is certified for a budget ``gamma`` when

    h(s) * (gamma/2 * s + p(s))

is strictly positive real for a fixed, network-wide filter ``h`` with
``s*h(s)`` positive real.  It may then join any network in which the total
susceptance of its incident lines is at most ``1/gamma``.  Since ``h`` has
relative degree one the condition is checked on the imaginary axis:

    Re{ h(jw) (gamma/2 jw + p(jw)) } > 0   for all w.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .buses import BusModel, bus_eval, bus_internal_stability, bus_rational
from .errors import (AssumptionViolated, EvaluationAtPole, InvalidDesign,
                     InvalidParameter, NoCertificate, NoFeasibleH, TailUnbounded)
from .tf import (FrequencyGrid, Polynomial, RationalTF, default_grid,
                 freq_response, poles, relative_degree, tf_eval)

__all__ = ["PRVerdict", "is_pr", "is_spr", "HFilter", "MarginResult",
           "certify_bus", "margin_curve", "min_gamma", "admit", "Certificate",
           "FirstOrderDesign", "first_order_protocol", "min_gamma_first_order",
           "EnvelopeResult", "envelope_check", "fit_envelope", "choose_h",
           "GAMMA_BOUNDS"]

GAMMA_BOUNDS = (1e-6, 1e6)
BISECTION_ITERS = 60
BISECTION_RTOL = 1e-4
TAIL_EXTENSION_LIMIT = 1e10


def default_tol(values) -> float:
    """Strictness tolerance ``1e-6 * (1 + max |value|)`` over a sweep."""
    return 1e-6 * (1.0 + float(np.max(np.abs(values))))


# -- positive realness -------------------------------------------------------

@dataclass(frozen=True)
class PRVerdict:
    passed: bool
    min_real: float
    at_omega: float
    tol: float
    reason: str = ""

    def __bool__(self):
        return self.passed


def _real_part_numerator(g: RationalTF):
    """Polynomials E(w), Q(w) in w with Re g(jw) = E(w) / Q(w)."""
    def at_jw(c, sign):
        k = np.arange(len(c))
        return np.asarray(c) * (sign * 1j) ** k
    n_pos = at_jw(g.num.coeffs, 1)
    d_pos = at_jw(g.den.coeffs, 1)
    d_neg = at_jw(g.den.coeffs, -1)
    e = np.polynomial.polynomial.polymul(n_pos, d_neg).real
    q = np.polynomial.polynomial.polymul(d_pos, d_neg).real
    return Polynomial(e), Polynomial(q)


def _refine_min(fun, w, vals, idx, count=3, points=33, rounds=6):
    """Polish the lowest local minima of a sampled curve in log-frequency.

    ``fun`` is vectorized.  Each candidate bracket (the neighbours of a low
    sample) is resampled at ``points`` log-spaced frequencies and shrunk
    around the best one, ``rounds`` times.
    """
    best_v, best_w = float(vals[idx]), float(w[idx])
    order = np.argsort(vals)
    seen = []
    for k in order:
        if len(seen) >= count:
            break
        if any(abs(k - j) <= 1 for j in seen):
            continue
        seen.append(k)
        lo = np.log(w[max(k - 1, 0)])
        hi = np.log(w[min(k + 1, len(w) - 1)])
        for _ in range(rounds):
            if hi <= lo:
                break
            x = np.linspace(lo, hi, points)
            v = fun(np.exp(x))
            m = int(np.argmin(v))
            if v[m] < best_v:
                best_v, best_w = float(v[m]), float(np.exp(x[m]))
            step = x[1] - x[0]
            lo, hi = x[m] - step, x[m] + step
    return best_v, best_w


def is_pr(g: RationalTF, grid: FrequencyGrid | None = None, tol: float | None = None) -> PRVerdict:
    """Positive-realness of a real rational ``g`` by imaginary-axis sweep.

    Checks that ``g`` has no open right half plane poles, that imaginary-axis
    poles (including infinity) are simple with positive residue, that ``Re g(jw) >= -tol`` on the
    (refined) grid and that the real part does not go negative beyond it.
    Interior right half plane points are not sampled.
    """
    grid = grid or default_grid()
    w = grid.omegas
    pl = poles(g)
    scale = np.maximum(1.0, np.abs(pl))
    if np.any(pl.real > 1e-9 * scale):
        return PRVerdict(False, -np.inf, float("nan"), tol or 0.0, "pole in open RHP")
    on_axis = pl[np.abs(pl.real) <= 1e-9 * scale]
    dden = Polynomial(np.polynomial.polynomial.polyder(g.den.coeffs))
    for p in on_axis:
        if np.sum(np.abs(on_axis - p) <= 1e-6 * max(1.0, abs(p))) > 1:
            return PRVerdict(False, -np.inf, abs(p.imag), tol or 0.0,
                             "repeated imaginary-axis pole")
        res = g.num(p) / dden(p)
        if res.real <= 0 or abs(res.imag) > 1e-6 * abs(res):
            return PRVerdict(False, -np.inf, abs(p.imag), tol or 0.0,
                             "imaginary-axis pole with non-positive residue")
    rd = g.den.degree - g.num.degree
    if rd < -1:
        return PRVerdict(False, -np.inf, np.inf, tol or 0.0, "pole of order > 1 at infinity")
    if rd == -1 and g.num.lead / g.den.lead <= 0:
        return PRVerdict(False, -np.inf, np.inf, tol or 0.0,
                         "pole at infinity with non-positive residue")
    keep = np.ones(w.size, dtype=bool)
    for p in on_axis:
        keep &= np.abs(w - abs(p.imag)) > 1e-9 * max(1.0, abs(p.imag))
    w = w[keep]

    def re_g(x):
        return np.real(tf_eval(g, 1j * np.asarray(x)))

    vals = re_g(w)
    if tol is None:
        tol = default_tol(vals)
    idx = int(np.argmin(vals))
    vmin, wmin = _refine_min(re_g, w, vals, idx)
    if vmin < -tol:
        return PRVerdict(False, vmin, wmin, tol, "negative real part on the grid")
    # behaviour of Re g(jw) as w -> infinity
    e, q = _real_part_numerator(g)
    if not e.is_zero():
        if e.degree > q.degree and e.lead < 0:
            return PRVerdict(False, -np.inf, np.inf, tol, "real part tends to -infinity")
        if e.degree == q.degree and e.lead / q.lead < -tol:
            return PRVerdict(False, e.lead / q.lead, np.inf, tol,
                             "negative real part at infinity")
        if e.degree < q.degree and e.lead < 0:
            return PRVerdict(False, 0.0, np.inf, tol,
                             "real part approaches zero from below at infinity")
    return PRVerdict(True, vmin, wmin, tol)


def is_spr(g: RationalTF, grid: FrequencyGrid | None = None, tol: float | None = None,
           shift: float = 1e-6) -> PRVerdict:
    """Strict positive realness: ``g(s - shift)`` must be positive real.

    The shifted function is tested with zero slack (``tol`` only sets the
    reported tolerance), so margins that merely touch zero fail.
    """
    if shift <= 0:
        raise InvalidParameter("shift must be > 0")
    v = is_pr(g.shift(shift), grid, tol=0.0)
    if not v.passed:
        return v
    if tol is not None and v.min_real <= tol:
        return PRVerdict(False, v.min_real, v.at_omega, tol, "margin within tolerance")
    return v


# -- the per-bus certificate ------------------------------------------------

@dataclass(frozen=True)
class HFilter:
    """Network-wide multiplier ``h`` (must have ``s*h`` PR, relative degree 1)."""

    h: RationalTF
    omega0: float | None = None

    def __post_init__(self):
        if relative_degree(self.h) != 1:
            raise InvalidParameter("h must have relative degree 1")
        if any(z.real >= 0 for z in poles(self.h)):
            raise InvalidParameter("h must be stable")
        sh = RationalTF(self.h.num * Polynomial((0.0, 1.0)), self.h.den)
        if not is_pr(sh):
            raise InvalidParameter("s*h(s) is not positive real")

    @classmethod
    def canonical(cls, omega0: float) -> "HFilter":
        """``h(s) = 1 / (s/omega0 + 1)``."""
        if not omega0 > 0:
            raise InvalidParameter("omega0 must be > 0")
        return cls(RationalTF((1.0,), (1.0, 1.0 / omega0)), float(omega0))

    def __call__(self, s):
        return tf_eval(self.h, s)


def _response(p, s):
    if isinstance(p, BusModel):
        return bus_eval(p, s)
    return tf_eval(p, s)


def _check_stable(p, grid=None):
    if isinstance(p, BusModel):
        verdict = bus_internal_stability(p, grid if grid is not None and
                                         grid.wmin <= 1e-4 and grid.wmax >= 1e4 else None)
        if not verdict.stable:
            raise AssumptionViolated(f"bus is not internally stable: {verdict.detail}")
    elif any(z.real >= 0 for z in poles(p)):
        raise AssumptionViolated("model has closed RHP poles")


def _abs_tail_bound(p, wmax):
    """Upper bound on |p(jw)| for all w >= wmax."""
    if isinstance(p, BusModel) and not p.delayed:
        p = bus_rational(p, check=False)
    if isinstance(p, RationalTF):
        rd = relative_degree(p)
        if rd < 0:
            return np.inf
        at_inf = abs(p.num.lead / p.den.lead) if rd == 0 else 0.0
        w = np.logspace(np.log10(wmax), np.log10(wmax) + 6, 400)
        return 1.05 * max(float(np.max(np.abs(tf_eval(p, 1j * w)))), at_inf)
    c = p.controller
    if c.kind.value == "virtual_inertia":
        lin, const = c.Knu, c.K
    else:
        lin, const = 0.0, max(c.K, c.Knu)
    lower = (p.M - lin) * wmax - p.D - const if p.M > lin else p.D - const
    if p.M <= lin and lin > 0:
        return np.inf
    return 1.0 / lower if lower > 0 else np.inf


@dataclass(frozen=True)
class MarginResult:
    """Minimum of ``Re{h(jw)(gamma/2 jw + p(jw))}`` over the frequency axis."""

    margin: float
    omega: float
    tol: float
    tail_bound: float
    wmax: float

    @property
    def valid(self) -> bool:
        return self.margin > self.tol

    def __float__(self):
        return self.margin


def margin_curve(h: HFilter, p, gamma: float, omegas) -> np.ndarray:
    """Pointwise ``Re{h(jw)(gamma/2 jw + p(jw))}``."""
    sj = 1j * np.asarray(omegas, dtype=float)
    return np.real(h(sj) * (0.5 * gamma * sj + _response(p, sj)))


class _Test:
    """Cached sweep of the certificate's two ingredients for one (h, p)."""

    def __init__(self, h, p, grid):
        self.h, self.p = h, p
        self.w = grid.omegas
        self._fill(self.w)

    def _fill(self, w):
        sj = 1j * w
        hv = self.h(sj)
        self.a = np.real(hv * sj) * 0.5     # multiplies gamma
        self.b = np.real(hv * _response(self.p, sj))
        self.mag_b = np.abs(hv * _response(self.p, sj))

    def extend(self, wmax):
        extra = np.logspace(np.log10(self.w[-1]), np.log10(wmax), 60)[1:]
        self.w = np.concatenate([self.w, extra])
        self._fill(self.w)

    def margin(self, gamma, tol=None):
        vals = gamma * self.a + self.b
        if tol is None:
            tol = 1e-6 * (1.0 + float(np.max(self.mag_b)))
        idx = int(np.argmin(vals))
        fun = lambda x: margin_curve(self.h, self.p, gamma, x)  # noqa: E731
        vmin, wmin = _refine_min(fun, self.w, vals, idx)
        return vmin, wmin, tol

    def tail(self, gamma):
        wmax = float(self.w[-1])
        sj = 1j * wmax
        hv = complex(self.h(sj))
        lim = self.h.h.num.lead / self.h.h.den.lead   # lim s*h(s)
        re_sh = min(float(np.real(hv * sj)), float(lim))
        return 0.5 * gamma * re_sh - abs(hv) * _abs_tail_bound(self.p, wmax)


def certify_bus(h: HFilter, bus, gamma: float, grid: FrequencyGrid | None = None,
                tol: float | None = None, *, _test: _Test | None = None,
                _checked=False) -> MarginResult:
    """Certificate margin of ``bus`` (a :class:`BusModel` or a stable
    :class:`RationalTF`) at budget ``gamma``.

    The grid minimum is polished by bounded scalar minimization around the
    lowest samples.  Beyond the grid the term ``gamma/2 * Re{jw h(jw)}``
    must dominate ``|h p|``; the grid is extended by decades until it does.
    """
    if not gamma > 0:
        raise InvalidParameter("gamma must be > 0")
    grid = grid or default_grid()
    if not _checked:
        _check_stable(bus, grid)
    test = _test or _Test(h, bus, grid)
    tail = test.tail(gamma)
    while not tail > 0:
        if test.w[-1] >= TAIL_EXTENSION_LIMIT:
            raise TailUnbounded(f"cannot bound the certificate beyond w={test.w[-1]:.3g}")
        test.extend(test.w[-1] * 10)
        tail = test.tail(gamma)
    vmin, wmin, tol = test.margin(gamma, tol)
    return MarginResult(vmin, wmin, tol, tail, float(test.w[-1]))


def min_gamma(h: HFilter, bus, grid: FrequencyGrid | None = None,
              tol: float = BISECTION_RTOL) -> float:
    """Smallest certifying budget, by bisection on ``log(gamma)``.

    Returns the upper end of the final bracket, so the returned value itself
    certifies.
    """
    grid = grid or default_grid()
    _check_stable(bus, grid)
    test = _Test(h, bus, grid)
    ok = lambda g: certify_bus(h, bus, g, grid, _test=test, _checked=True).valid  # noqa: E731
    lo, hi = GAMMA_BOUNDS
    if not ok(hi):
        raise NoCertificate(f"certificate fails even at gamma={hi:g}")
    if ok(lo):
        return lo
    for _ in range(BISECTION_ITERS):
        if hi / lo - 1.0 <= tol:
            break
        mid = math.sqrt(lo * hi)
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


def admit(gamma_min: float, susceptance_sum: float) -> bool:
    """Admission rule ``1/gamma_min >= [L_B]_ii``."""
    if not (gamma_min > 0 and susceptance_sum >= 0):
        raise InvalidParameter("need gamma_min > 0 and susceptance_sum >= 0")
    return gamma_min * susceptance_sum <= 1.0 + 1e-12


@dataclass(frozen=True)
class Certificate:
    """Outcome of the admission protocol for one bus."""

    bus_id: str
    gamma_min: float | None
    margin: float | None
    tol: float
    diag_susceptance: float
    admitted: bool
    route: str = "direct"
    grid: FrequencyGrid | None = field(default=None, repr=False)
    reason: str = ""
    eps: float | None = None

    @property
    def susceptance_budget(self) -> float:
        return 1.0 / self.gamma_min if self.gamma_min else 0.0


# -- first-order relaxation ---------------------------------------------------

@dataclass(frozen=True)
class FirstOrderDesign:
    """Bus response approximated as ``a/(s+b)`` within ``eps*|1 + jw/omega0|``."""

    a: float
    b: float
    eps: float
    omega0: float

    def __post_init__(self):
        for name in ("a", "b", "omega0"):
            if not getattr(self, name) > 0:
                raise InvalidDesign(f"{name} must be > 0")
        if self.eps < 0:
            raise InvalidDesign("eps must be >= 0")

    def nominal(self) -> RationalTF:
        return RationalTF((self.a,), (self.b, 1.0))

    def relaxed_test(self, gamma: float) -> RationalTF:
        """``h(s) (gamma/2 s + a/(s+b)) - eps`` as a rational function."""
        h = HFilter.canonical(self.omega0).h
        inner = RationalTF((0.0, 0.5 * gamma)) + self.nominal()
        return h * inner - self.eps


def first_order_protocol(d: FirstOrderDesign, gamma: float) -> bool:
    """Closed-form positive realness of ``h (gamma/2 s + a/(s+b)) - eps``.

    With ``x = w**2`` the real part on the imaginary axis is a quadratic in
    ``x`` over a positive denominator, so the test reduces to

        a - eps b >= 0,
        b (gamma w0 - 2 eps) - 2 eps w0
            >= 2 w0/(b + w0) (sqrt(a - eps b) - sqrt(b (gamma w0/2 - eps)))**2,

    together with ``gamma w0/2 - eps >= 0``.
    """
    a, b, eps, w0 = d.a, d.b, d.eps, d.omega0
    if a - eps * b < 0:
        return False
    hf = gamma * w0 / 2 - eps
    if hf < 0:
        return False
    lhs = b * (gamma * w0 - 2 * eps) - 2 * eps * w0
    rhs = 2 * w0 / (b + w0) * (math.sqrt(a - eps * b) - math.sqrt(b * hf)) ** 2
    return lhs >= rhs


def min_gamma_first_order(d: FirstOrderDesign, tol: float = BISECTION_RTOL) -> float:
    """Smallest ``gamma`` passing :func:`first_order_protocol` (bisection)."""
    lo, hi = GAMMA_BOUNDS
    if not first_order_protocol(d, hi):
        raise NoCertificate("first-order test fails for every gamma up to the cap")
    if first_order_protocol(d, lo):
        return lo
    for _ in range(BISECTION_ITERS):
        if hi / lo - 1.0 <= tol:
            break
        mid = math.sqrt(lo * hi)
        if first_order_protocol(d, mid):
            hi = mid
        else:
            lo = mid
    return hi


@dataclass(frozen=True)
class EnvelopeResult:
    passed: bool
    worst_ratio: float
    worst_omega: float

    def __bool__(self):
        return self.passed


def _envelope_ratio(bus, a, b, omega0, omegas):
    sj = 1j * np.asarray(omegas, dtype=float)
    delta = np.abs(_response(bus, sj) - a / (sj + b))
    return delta / np.sqrt(1.0 + (omegas / omega0) ** 2)


def envelope_check(bus, d: FirstOrderDesign, grid: FrequencyGrid | None = None) -> EnvelopeResult:
    """Check ``|p(jw) - a/(jw+b)| < eps sqrt(1 + w**2/omega0**2)`` on the grid."""
    grid = grid or FrequencyGrid.log(1e-3, 1e3, 2000)
    _check_stable(bus)
    w = grid.omegas
    ratio = _envelope_ratio(bus, d.a, d.b, d.omega0, w)
    if d.eps == 0:
        k = int(np.argmax(ratio))
        return EnvelopeResult(False, np.inf if ratio[k] > 0 else 0.0, float(w[k]))
    ratio = ratio / d.eps
    k = int(np.argmax(ratio))
    return EnvelopeResult(bool(ratio[k] < 1.0), float(ratio[k]), float(w[k]))


def fit_envelope(bus, a: float, b: float, omega0: float,
                 grid: FrequencyGrid | None = None, safety: float = 1.01) -> float:
    """Smallest envelope radius (times ``safety``) containing ``bus`` on the grid."""
    grid = grid or FrequencyGrid.log(1e-3, 1e3, 2000)
    _check_stable(bus)
    return safety * float(np.max(_envelope_ratio(bus, a, b, omega0, grid.omegas)))


# -- choosing h ------------------------------------------------------------------

def choose_h(expected_models, candidate_omega0s, grid: FrequencyGrid | None = None,
             gamma: float = 1.0) -> HFilter:
    """Canonical ``h`` maximizing the worst certificate margin at ``gamma``
    over a set of expected bus models; ties go to the smaller ``omega0``."""
    candidates = sorted(float(w) for w in candidate_omega0s)
    if not candidates:
        raise NoFeasibleH("no candidate omega0 given")
    models = list(expected_models)
    if not models:
        raise InvalidParameter("expected model set is empty")
    grid = grid or default_grid()
    for p in models:
        _check_stable(p, grid)
    best, best_margin = None, -np.inf
    for w0 in candidates:
        h = HFilter.canonical(w0)
        worst = np.inf
        for p in models:
            try:
                r = certify_bus(h, p, gamma, grid, _checked=True)
            except (TailUnbounded, EvaluationAtPole):
                worst = -np.inf
                break
            worst = min(worst, r.margin - r.tol)
        if worst > best_margin:
            best, best_margin = h, worst
    if best is None or not best_margin > 0:
        raise NoFeasibleH(f"no candidate certifies every expected model at gamma={gamma:g}")
    return best
