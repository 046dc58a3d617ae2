"""Bus dynamics: swing equation plus local inverter control and input delay.

A bus with inertia ``M``, damping ``D`` and controller ``c(s)`` acting on the
locally measured frequency through a delay ``tau`` has the input-output map
from net power injection to frequency deviation

    p(s) = 1 / (M s + D + exp(-s tau) c(s)).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .contour import scan_imaginary_axis
from .errors import EvaluationAtPole, InternallyUnstable, InvalidParameter
from .tf import FrequencyGrid, Polynomial, RationalTF, poles

__all__ = ["ControllerType", "Controller", "BusModel", "BusStability",
           "controller_tf", "bus_rational", "bus_eval", "bus_internal_stability",
           "characteristic"]


class ControllerType(str, Enum):
    NONE = "none"
    DROOP = "droop"
    VIRTUAL_INERTIA = "virtual_inertia"
    IDROOP = "idroop"


@dataclass(frozen=True)
class Controller:
    """Local frequency feedback ``x = -c(s) w``.

    ``K`` is the droop gain, ``Knu`` the virtual inertia (or iDroop
    high-frequency) gain and ``Kdelta`` the iDroop filter pole.
    """

    kind: ControllerType = ControllerType.NONE
    K: float = 0.0
    Knu: float = 0.0
    Kdelta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", ControllerType(self.kind))
        for name in ("K", "Knu", "Kdelta"):
            val = float(getattr(self, name))
            if not np.isfinite(val) or val < 0:
                raise InvalidParameter(f"controller gain {name}={val} must be >= 0")
            object.__setattr__(self, name, val)
        if self.kind is ControllerType.NONE and (self.K or self.Knu or self.Kdelta):
            raise InvalidParameter("controller 'none' takes no gains")
        if self.kind is ControllerType.DROOP and (self.Knu or self.Kdelta):
            raise InvalidParameter("droop control uses only K")
        if self.kind is ControllerType.VIRTUAL_INERTIA and self.Kdelta:
            raise InvalidParameter("virtual inertia uses only K and Knu")
        if self.kind is ControllerType.IDROOP and self.Kdelta <= 0:
            raise InvalidParameter("iDroop requires Kdelta > 0")
        object.__setattr__(self, "_parts", self._build_parts())

    @classmethod
    def none(cls):
        return cls()

    @classmethod
    def droop(cls, K):
        return cls(ControllerType.DROOP, K=K)

    @classmethod
    def virtual_inertia(cls, K, Knu):
        return cls(ControllerType.VIRTUAL_INERTIA, K=K, Knu=Knu)

    @classmethod
    def idroop(cls, K, Knu, Kdelta):
        return cls(ControllerType.IDROOP, K=K, Knu=Knu, Kdelta=Kdelta)

    def parts(self):
        """Numerator and denominator polynomials of ``c(s)`` (unreduced)."""
        return self._parts

    def _build_parts(self):
        if self.kind is ControllerType.NONE:
            return Polynomial((0.0,)), Polynomial((1.0,))
        if self.kind is ControllerType.DROOP:
            return Polynomial((self.K,)), Polynomial((1.0,))
        if self.kind is ControllerType.VIRTUAL_INERTIA:
            return Polynomial((self.K, self.Knu)), Polynomial((1.0,))
        return (Polynomial((self.Kdelta * self.K, self.Knu)),
                Polynomial((self.Kdelta, 1.0)))

    def __call__(self, s):
        n, d = self.parts()
        return n(s) / d(s)


def controller_tf(c: Controller) -> RationalTF:
    """Return ``c(s)`` as a rational function (virtual inertia is improper)."""
    n, d = c.parts()
    return RationalTF(n, d)


@dataclass(frozen=True)
class BusModel:
    M: float
    D: float
    controller: Controller = field(default_factory=Controller)
    tau: float = 0.0

    def __post_init__(self):
        for name in ("M", "D", "tau"):
            val = float(getattr(self, name))
            if not np.isfinite(val) or val < 0:
                raise InvalidParameter(f"bus parameter {name}={val} must be >= 0")
            object.__setattr__(self, name, val)
        if self.D <= 0:
            raise InvalidParameter("bus damping D must be > 0")

    @property
    def delayed(self) -> bool:
        return self.tau > 0

    def __call__(self, s):
        return bus_eval(self, s)


def characteristic(bus: BusModel):
    """Split ``p = num / F`` with ``F(s) = (Ms+D) dc(s) + exp(-s tau) nc(s)``.

    Returns ``(num, base, delayed)`` polynomials such that
    ``F(s) = base(s) + exp(-s tau) delayed(s)`` and ``p = num / F``.  For a
    delay-free bus the virtual-inertia derivative is absorbed into ``base``.
    """
    nc, dc = bus.controller.parts()
    swing = Polynomial((bus.D, bus.M))
    base = swing * dc
    if bus.tau == 0:
        return dc, base + nc, Polynomial((0.0,))
    return dc, base, nc


def bus_rational(bus: BusModel, *, check=True) -> RationalTF:
    """Exact rational ``p(s)`` of a delay-free bus."""
    if bus.delayed:
        raise InvalidParameter("bus_rational requires tau = 0; use bus_eval")
    num, den, _ = characteristic(bus)
    p = RationalTF(num, den)
    if check:
        unstable = [z for z in poles(p) if z.real >= 0]
        if unstable:
            raise InternallyUnstable(f"bus has closed RHP poles {unstable}")
    return p


def bus_eval(bus: BusModel, s):
    """Pointwise ``p(s)``; the delay multiplies the whole controller."""
    s = np.asarray(s, dtype=complex)
    nc, dc = bus.controller.parts()
    c = nc(s) / dc(s)
    if bus.tau:
        c = c * np.exp(-s * bus.tau)
    den = bus.M * s + bus.D + c
    if np.any(np.abs(den) < 1e-14 * (bus.M * np.abs(s) + bus.D)):
        raise EvaluationAtPole(complex(np.ravel(s)[np.argmin(np.abs(den))]))
    out = 1.0 / den
    return complex(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class BusStability:
    stable: bool
    rhp_roots: int
    method: str
    detail: str = ""

    def __bool__(self):
        return self.stable


def bus_internal_stability(bus: BusModel, grid: FrequencyGrid | None = None) -> BusStability:
    """Check that ``p`` has no closed right half plane poles.

    Delay-free buses use the poles of :func:`bus_rational`.  Delayed buses
    count the right half plane roots of the characteristic function
    ``F(s) = base(s) + exp(-s tau) delayed(s)`` by the argument principle,
    sweeping ``F(jw)/(jw+1)**k`` over the grid.
    """
    if not bus.delayed:
        p = bus_rational(bus, check=False)
        bad = [z for z in poles(p) if z.real >= -1e-12 * max(1.0, abs(z))]
        return BusStability(not bad, len(bad), "poles",
                            f"closed RHP poles {bad}" if bad else "")
    grid = grid if grid is not None else FrequencyGrid.log(1e-4, 1e5, 2000)
    if grid.wmin > 1e-4 or grid.wmax < 1e4:
        raise InvalidParameter("grid must span at least [1e-4, 1e4] rad/s")
    _, base, delayed = characteristic(bus)
    k = base.degree
    if delayed.degree > k:
        return BusStability(False, -1, "asymptotic",
                            "delayed term dominates at high frequency (advanced type)")
    if delayed.degree == k and abs(delayed.lead) >= abs(base.lead):
        return BusStability(False, -1, "asymptotic",
                            "neutral-type characteristic with |delayed| >= |base| at infinity")

    def f(w):
        sj = 1j * w
        return (base(sj) + np.exp(-sj * bus.tau) * delayed(sj)) / (sj + 1.0) ** k

    scan = scan_imaginary_axis(f, grid.omegas)
    return BusStability(scan.rhp_zeros == 0, scan.rhp_zeros, "winding",
                        f"{scan.rhp_zeros} characteristic roots in the closed RHP")
