"""Real-rational SISO transfer functions.

Polynomials are stored with coefficients in *ascending* powers of ``s``
(``coeffs[k]`` multiplies ``s**k``), the convention of
:mod:`numpy.polynomial.polynomial`, which does the heavy lifting here.
"""

from __future__ import annotations

from dataclasses import dataclass
from numbers import Number

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import (DegenerateFeedback, EvaluationAtPole, InvalidParameter,
                     NotInvertible, RootSolverFailure)

__all__ = ["Polynomial", "RationalTF", "FrequencyGrid", "default_grid",
           "tf_eval", "freq_response", "tf_add", "tf_mul", "tf_inv",
           "tf_feedback", "poles", "zeros", "relative_degree", "s"]

#: relative distance under which a pole and a zero are treated as equal
CANCEL_RTOL = 1e-8
#: relative size of |den(s)| (w.r.t. sum |d_k||s|^k) treated as a pole
POLE_RTOL = 1e-13


def _trim(coeffs, rtol=1e-14):
    c = np.atleast_1d(np.asarray(coeffs, dtype=float))
    if c.ndim != 1:
        raise InvalidParameter("polynomial coefficients must be 1-D")
    if not np.all(np.isfinite(c)):
        raise InvalidParameter("polynomial coefficients must be finite")
    if c.size == 0:
        return (0.0,)
    scale = np.max(np.abs(c))
    if scale == 0.0:
        return (0.0,)
    nz = np.nonzero(np.abs(c) > rtol * scale)[0]
    return tuple(float(x) for x in c[:nz[-1] + 1])


@dataclass(frozen=True)
class Polynomial:
    """Real polynomial, ascending coefficients, trailing zeros trimmed."""

    coeffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _trim(self.coeffs))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def lead(self) -> float:
        return self.coeffs[-1]

    def is_zero(self) -> bool:
        return self.coeffs == (0.0,)

    def __call__(self, s):
        return P.polyval(s, self.coeffs)

    def roots(self) -> np.ndarray:
        if self.degree < 1:
            return np.empty(0, dtype=complex)
        try:
            r = P.polyroots(self.coeffs)
        except np.linalg.LinAlgError as exc:
            raise RootSolverFailure(str(exc)) from exc
        return _tidy_roots(r)

    def __add__(self, other):
        return Polynomial(P.polyadd(self.coeffs, _coeffs(other)))

    __radd__ = __add__

    def __sub__(self, other):
        return Polynomial(P.polysub(self.coeffs, _coeffs(other)))

    def __mul__(self, other):
        return Polynomial(P.polymul(self.coeffs, _coeffs(other)))

    __rmul__ = __mul__

    def __neg__(self):
        return Polynomial([-c for c in self.coeffs])

    def scale(self, k: float) -> "Polynomial":
        return Polynomial([k * c for c in self.coeffs])

    def shift(self, sigma: float) -> "Polynomial":
        """Return the polynomial q(s) = p(s - sigma)."""
        out = np.zeros(1)
        base = np.array([-sigma, 1.0])
        power = np.ones(1)
        for c in self.coeffs:
            out = P.polyadd(out, c * power)
            power = P.polymul(power, base)
        return Polynomial(out)


def _coeffs(x):
    if isinstance(x, Polynomial):
        return x.coeffs
    if isinstance(x, Number):
        return (float(x),)
    return tuple(x)


def _tidy_roots(r):
    r = np.asarray(r, dtype=complex)
    small = np.abs(r.imag) <= 1e-12 * np.maximum(1.0, np.abs(r))
    r = np.where(small, r.real + 0j, r)
    return r[np.lexsort((r.imag, r.real))]


def _divide_out(poly, root, remainder=False):
    """Divide ``poly`` by the real factor associated with ``root``."""
    if root.imag == 0.0:
        factor = [-root.real, 1.0]
    else:
        factor = [abs(root) ** 2, -2.0 * root.real, 1.0]
    quo, rem = P.polydiv(poly, factor)
    if remainder:
        return quo, np.linalg.norm(rem) / np.linalg.norm(poly)
    return quo


def _common_root(n_c, d_c, candidates):
    """Candidate root leaving the smallest division remainders in both polynomials.

    Repeated roots are found to only about sqrt(eps), so the better
    conditioned of the pole and the zero is preferred over either estimate
    blindly.
    """
    best = None
    for root in candidates:
        qn, rn = _divide_out(n_c, root, remainder=True)
        qd, rd = _divide_out(d_c, root, remainder=True)
        if best is None or rn + rd < best[0]:
            best = (rn + rd, qn, qd)
    return best[1], best[2]


def _cancel(num, den, rtol=CANCEL_RTOL):
    """Remove pole/zero pairs closer than ``rtol`` (relative to magnitude)."""
    if num.is_zero():
        return Polynomial((0.0,)), Polynomial((1.0,))
    if num.degree < 1 or den.degree < 1:
        return num, den
    zs = list(num.roots())
    ps = list(den.roots())
    n_c, d_c = np.array(num.coeffs), np.array(den.coeffs)
    for p in ps:
        if p.imag < 0:
            continue  # handled with its conjugate
        tol = rtol * max(1.0, abs(p))
        dist = [abs(z - p) for z in zs]
        if not dist:
            break
        k = int(np.argmin(dist))
        if dist[k] > tol:
            continue
        z = zs.pop(k)
        if p.imag != 0.0:
            # drop the conjugate zero as well
            j = int(np.argmin([abs(w - np.conj(z)) for w in zs]))
            zs.pop(j)
            z = complex(z.real, abs(z.imag))
        else:
            p, z = complex(p.real, 0.0), complex(z.real, 0.0)
        n_c, d_c = _common_root(n_c, d_c, (p, z, 0.5 * (p + z)))
    return Polynomial(n_c), Polynomial(d_c)


@dataclass(frozen=True, init=False)
class RationalTF:
    """Ratio ``num(s)/den(s)`` of real polynomials in reduced form.

    The denominator is made monic and near-coincident pole/zero pairs are
    cancelled at construction, so two transfer functions describing the same
    map compare equal up to floating point noise (see :meth:`isclose`).
    """

    num: Polynomial
    den: Polynomial

    def __init__(self, num, den=(1.0,), *, cancel=True):
        num = num if isinstance(num, Polynomial) else Polynomial(_coeffs(num))
        den = den if isinstance(den, Polynomial) else Polynomial(_coeffs(den))
        if den.is_zero():
            raise InvalidParameter("denominator is the zero polynomial")
        if cancel:
            num, den = _cancel(num, den)
        lead = den.lead
        object.__setattr__(self, "num", num.scale(1.0 / lead))
        object.__setattr__(self, "den", den.scale(1.0 / lead))

    @classmethod
    def constant(cls, k: float) -> "RationalTF":
        return cls((k,), (1.0,))

    def __repr__(self):
        return f"RationalTF(num={list(self.num.coeffs)}, den={list(self.den.coeffs)})"

    def __call__(self, s):
        return tf_eval(self, s)

    def __add__(self, other):
        return tf_add(self, _as_tf(other))

    __radd__ = __add__

    def __sub__(self, other):
        return tf_add(self, -_as_tf(other))

    def __rsub__(self, other):
        return tf_add(_as_tf(other), -self)

    def __mul__(self, other):
        return tf_mul(self, _as_tf(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return tf_mul(self, tf_inv(_as_tf(other)))

    def __rtruediv__(self, other):
        return tf_mul(_as_tf(other), tf_inv(self))

    def __neg__(self):
        return RationalTF(-self.num, self.den, cancel=False)

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_proper(self) -> bool:
        return relative_degree(self) >= 0

    def shift(self, sigma: float) -> "RationalTF":
        """Return ``g(s - sigma)``."""
        return RationalTF(self.num.shift(sigma), self.den.shift(sigma))

    def isclose(self, other, rtol=1e-9) -> bool:
        """Coefficient-wise comparison after normalization."""
        other = _as_tf(other)
        if (self.num.degree, self.den.degree) != (other.num.degree, other.den.degree):
            return False
        a = np.concatenate([self.num.coeffs, self.den.coeffs])
        b = np.concatenate([other.num.coeffs, other.den.coeffs])
        return bool(np.allclose(a, b, rtol=rtol, atol=rtol * np.max(np.abs(a))))


def _as_tf(x):
    if isinstance(x, RationalTF):
        return x
    if isinstance(x, Polynomial):
        return RationalTF(x)
    if isinstance(x, Number) and not isinstance(x, complex):
        return RationalTF.constant(float(x))
    raise TypeError(f"cannot interpret {x!r} as a real rational transfer function")


#: the Laplace variable, handy for building transfer functions by hand
s = RationalTF((0.0, 1.0))


@dataclass(frozen=True, init=False)
class FrequencyGrid:
    """Strictly increasing, positive, finite frequencies in rad/s."""

    omegas: np.ndarray

    def __init__(self, omegas):
        w = np.array(omegas, dtype=float).ravel()
        if w.size == 0:
            raise InvalidParameter("frequency grid is empty")
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise InvalidParameter("grid frequencies must be finite and > 0")
        if np.any(np.diff(w) <= 0):
            raise InvalidParameter("grid frequencies must be strictly increasing")
        w.setflags(write=False)
        object.__setattr__(self, "omegas", w)

    @classmethod
    def log(cls, wmin=1e-4, wmax=1e5, points=2000) -> "FrequencyGrid":
        if not 0 < wmin < wmax:
            raise InvalidParameter("need 0 < wmin < wmax")
        return cls(np.logspace(np.log10(wmin), np.log10(wmax), int(points)))

    def __len__(self):
        return self.omegas.size

    def __iter__(self):
        return iter(self.omegas)

    @property
    def wmin(self) -> float:
        return float(self.omegas[0])

    @property
    def wmax(self) -> float:
        return float(self.omegas[-1])

    def __eq__(self, other):
        return isinstance(other, FrequencyGrid) and np.array_equal(self.omegas, other.omegas)

    def __hash__(self):
        return hash(self.omegas.tobytes())


def default_grid(points: int = 2000) -> FrequencyGrid:
    return FrequencyGrid.log(1e-4, 1e5, points)


def tf_eval(tf: RationalTF, s):
    """Evaluate ``tf`` at the complex point(s) ``s``."""
    s = np.asarray(s, dtype=complex)
    d = P.polyval(s, tf.den.coeffs)
    scale = P.polyval(np.abs(s), np.abs(tf.den.coeffs))
    bad = np.abs(d) <= POLE_RTOL * scale
    if np.any(bad):
        where = s[bad].ravel()[0] if s.ndim else s
        raise EvaluationAtPole(complex(where))
    out = P.polyval(s, tf.num.coeffs) / d
    return complex(out) if out.ndim == 0 else out


def freq_response(tf: RationalTF, grid) -> np.ndarray:
    """Return ``tf(j w)`` for each ``w`` in ``grid``, in grid order."""
    w = grid.omegas if isinstance(grid, FrequencyGrid) else np.asarray(grid, dtype=float)
    try:
        return np.atleast_1d(tf_eval(tf, 1j * w))
    except EvaluationAtPole as exc:
        raise EvaluationAtPole(exc.s, f"imaginary-axis pole at omega={exc.s.imag:g} rad/s") from None


def tf_add(a: RationalTF, b: RationalTF) -> RationalTF:
    if a.den == b.den:
        return RationalTF(a.num + b.num, a.den)
    return RationalTF(a.num * b.den + b.num * a.den, a.den * b.den)


def tf_mul(a: RationalTF, b: RationalTF) -> RationalTF:
    return RationalTF(a.num * b.num, a.den * b.den)


def tf_inv(a: RationalTF) -> RationalTF:
    if a.num.is_zero():
        raise NotInvertible("transfer function is identically zero")
    return RationalTF(a.den, a.num)


def tf_feedback(a: RationalTF, b: RationalTF) -> RationalTF:
    """Negative feedback ``a / (1 + a b)``."""
    a, b = _as_tf(a), _as_tf(b)
    den = a.den * b.den + a.num * b.num
    if den.is_zero():
        raise DegenerateFeedback("1 + a*b is identically zero")
    return RationalTF(a.num * b.den, den)


def poles(tf: RationalTF) -> np.ndarray:
    return tf.den.roots()


def zeros(tf: RationalTF) -> np.ndarray:
    return tf.num.roots()


def relative_degree(tf: RationalTF) -> int:
    if tf.is_zero():
        return 0
    return tf.den.degree - tf.num.degree
