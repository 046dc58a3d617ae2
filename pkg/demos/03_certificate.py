"""Per-bus certificate and plug-and-play admission.

A bus is certified at ``gamma`` when ``Re{h(jw)(gamma/2 jw + p(jw))}`` stays
positive; it may join the network when ``gamma`` times its total incident
susceptance does not exceed one.
"""

import numpy as np

from gridcert import BusModel, Controller, FrequencyGrid, HFilter, admit, certify_bus, margin_curve, min_gamma

h = HFilter.canonical(30.0)
bus = BusModel(1.0, 0.1, Controller.idroop(0.65, 1.3, 8.0), tau=0.5)

g = min_gamma(h, bus)
print(f"smallest certifying gamma: {g:.5f}")
print(f"susceptance budget 1/gamma: {1 / g:.3f}")

for gamma in (0.5 * g, g, 2 * g):
    r = certify_bus(h, bus, gamma)
    print(f"gamma = {gamma:.4f}: margin {r.margin:+.3e} at w = {r.omega:.3f}, "
          f"valid = {r.valid}")

# the margin curve rises pointwise with gamma
w = FrequencyGrid.log(1e-2, 1e3, 6).omegas
for gamma in (g, 2 * g):
    print(f"margins at gamma = {gamma:.3f}:", np.array2string(margin_curve(h, bus, gamma, w),
                                                             precision=4))

for susceptance in (1.0, 5.0, 10.0):
    print(f"incident susceptance {susceptance:5.1f}: admitted = {admit(g, susceptance)}")
