"""Argument-principle helpers for imaginary-axis sweeps."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GridTooCoarse, Inconclusive

MAX_JUMP = np.pi / 4


@dataclass(frozen=True)
class ContourScan:
    """Result of sweeping a conjugate-symmetric function along ``j*omega``.

    ``rhp_zeros`` is the number of zeros enclosed by the standard Nyquist
    D-contour (imaginary axis closed through the right half plane), i.e.
    minus the winding number of the image around the origin.
    """

    rhp_zeros: int
    winding: float
    min_abs: float
    omegas: np.ndarray
    values: np.ndarray


def _refine(f, w, v, max_jump, max_rounds):
    for _ in range(max_rounds):
        jump = np.abs(np.angle(v[1:] / v[:-1]))
        bad = np.nonzero(jump > max_jump)[0]
        if bad.size == 0:
            return w, v
        lo, hi = w[bad], w[bad + 1]
        mid = np.where(lo > 0, np.sqrt(lo * hi), 0.5 * (lo + hi))
        vm = f(mid)
        w = np.insert(w, bad + 1, mid)
        v = np.insert(v, bad + 1, vm)
    raise GridTooCoarse(
        f"phase still jumps by more than {max_jump:.3g} rad after {max_rounds} refinements")


def scan_imaginary_axis(f, omegas, *, rtol=1e-10, max_jump=MAX_JUMP, max_rounds=40):
    """Count right-half-plane zeros of ``f`` from samples on ``j*omega``.

    ``f`` maps an array of nonnegative frequencies to complex values of a
    function with real coefficients (so ``f(-jw) = conj(f(jw))``), with no
    poles in the closed right half plane, and whose image on the large
    right half circle does not wind around the origin (callers normalize,
    e.g. by dividing by ``(s+1)**k``).  The grid is refined until
    consecutive samples differ in phase by less than ``max_jump``.  The scan
    is inconclusive if ``|f|`` drops below ``rtol`` times its largest sample.
    """
    w = np.concatenate([[0.0], np.asarray(omegas, dtype=float)])
    v = np.asarray(f(w), dtype=complex)
    w, v = _refine(f, w, v, max_jump, max_rounds)
    min_abs = float(np.min(np.abs(v)))
    tol = rtol * float(np.max(np.abs(v)))
    if min_abs < tol:
        raise Inconclusive(f"|f(jw)| = {min_abs:.3g} below tolerance {tol:.3g} "
                           f"near omega = {w[np.argmin(np.abs(v))]:.6g}")
    # full closed curve: w from -wmax..wmax then back through infinity
    full = np.concatenate([np.conj(v[:0:-1]), v])
    steps = np.angle(full[1:] / full[:-1])
    closing = np.angle(full[0] / full[-1])
    winding = (np.sum(steps) + closing) / (2 * np.pi)
    n = int(np.rint(winding))
    if abs(winding - n) > 1e-6:
        raise Inconclusive(f"non-integer winding number {winding:.6f}")
    return ContourScan(rhp_zeros=-n, winding=float(winding), min_abs=min_abs,
                       omegas=w, values=v)
