"""Real-rational transfer function algebra.

Builds a few transfer functions from the Laplace variable ``s``, combines
them, and evaluates them on the imaginary axis.
"""

import numpy as np

from gridcert import FrequencyGrid, freq_response, poles, relative_degree, s, tf_feedback, zeros

# a lag and a lead-lag written with the Laplace variable
lag = 1 / (s + 1)
lead_lag = (2 * s + 1) / (0.1 * s + 1)
print("lag          :", lag)
print("lead-lag     :", lead_lag)

# products and sums stay in reduced form; common factors cancel
loop = lag * lead_lag
print("series       :", loop)
print("cancellation :", (s + 1) * lag)

# unity negative feedback around the series connection
closed = tf_feedback(loop, 1)
print("closed loop  :", closed)
print("  poles      :", np.round(poles(closed), 4))
print("  zeros      :", np.round(zeros(closed), 4))
print("  rel. degree:", relative_degree(closed))

# frequency response on a log grid
grid = FrequencyGrid.log(1e-2, 1e2, 5)
for w, g in zip(grid.omegas, freq_response(closed, grid)):
    print(f"  w = {w:8.3f}   |G| = {abs(g):.4f}   phase = {np.degrees(np.angle(g)):8.2f} deg")
