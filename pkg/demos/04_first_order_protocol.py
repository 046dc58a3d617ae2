"""Closed-form certificate for a first-order model with a frequency envelope.

The bus is summarized by ``a/(s+b)`` plus an error bounded by
``eps |1 + jw/w0|``.  The closed form gives the smallest admissible gamma
without a frequency sweep; the envelope check confirms that the real bus
stays within the stated error, and a refit supplies a radius when it does not.
"""

from gridcert import (BusModel, Controller, FirstOrderDesign, FrequencyGrid, envelope_check,
                      first_order_protocol, fit_envelope, is_pr, min_gamma_first_order)

design = FirstOrderDesign(1.37, 1.0, 0.08, 30.0)
g = min_gamma_first_order(design)
print(f"closed-form gamma_min: {g:.6f}")
for gamma in (0.18, 0.181, 0.19):
    sweep = is_pr(design.relaxed_test(gamma))
    print(f"gamma = {gamma}: closed form {first_order_protocol(design, gamma)}, "
          f"sweep {sweep.passed} (min real part {sweep.min_real:+.2e})")

bus = BusModel(1.0, 0.1, Controller.idroop(0.65, 1.3, 8.0), tau=0.5)
r = envelope_check(bus, design, FrequencyGrid.log(1e-3, 1e3, 2000))
print(f"\nenvelope eps = 0.08: passed = {r.passed}, worst ratio {r.worst_ratio:.6f} "
      f"at w = {r.worst_omega:.3f}")

eps = fit_envelope(bus, 1.37, 1.0, 30.0)
fitted = FirstOrderDesign(1.37, 1.0, eps, 30.0)
print(f"fitted radius eps = {eps:.6f}: envelope passed = {envelope_check(bus, fitted).passed}, "
      f"gamma_min = {min_gamma_first_order(fitted):.5f}")
