"""Bus models: swing dynamics closed by droop, virtual inertia or iDroop.

Each bus maps power injection to frequency through
``1/(M s + D + exp(-s tau) c(s))``.  The script prints the controller
transfer functions, a short Bode table, and checks the internal stability of
a delayed bus.
"""

import numpy as np

from gridcert import (BusModel, Controller, bus_eval, bus_internal_stability, bus_rational,
                      controller_tf)

controllers = {
    "droop": Controller.droop(1.0),
    "virtual inertia": Controller.virtual_inertia(1.0, 0.5),
    "iDroop": Controller.idroop(0.65, 1.3, 8.0),
}
for name, c in controllers.items():
    print(f"{name:16s} c(s) = {controller_tf(c)}")

# delay-free buses are rational and can be inspected as such
bus = BusModel(1.0, 0.1, controllers["droop"])
print("\ndroop bus p(s) =", bus_rational(bus))

# a delayed iDroop bus is evaluated pointwise
designed = BusModel(1.0, 0.1, controllers["iDroop"], tau=0.5)
print("\nBode table of the delayed iDroop bus")
for w in np.logspace(-2, 2, 9):
    p = bus_eval(designed, 1j * w)
    print(f"  w = {w:8.3f}   |p| = {abs(p):.4f}   phase = {np.degrees(np.angle(p)):8.2f} deg")

# internal stability: zeros of the characteristic quasi-polynomial in the RHP
for tau in (0.0, 0.05):
    aggressive = BusModel(1.0, 0.1, Controller.idroop(30.0, 1.0, 5.0), tau)
    v = bus_internal_stability(aggressive)
    print(f"\naggressive iDroop, tau = {tau}: stable = {v.stable}, "
          f"RHP roots = {v.rhp_roots} ({v.method})")
