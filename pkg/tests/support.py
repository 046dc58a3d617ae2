"""Shared builders and independent oracles for the test suite."""

import numpy as np

from gridcert import BusModel, Controller, Line, NetworkModel

#: one "PASS/FAIL criterion N: ..." line per acceptance criterion run
ACCEPTANCE = []

DESIGNED = dict(M=1.0, D=0.1, K=0.65, Knu=1.3, Kdelta=8.0, tau=0.5)
AGGRESSIVE = dict(K=30.0, Knu=1.0, Kdelta=5.0)


def designed_bus(tau=DESIGNED["tau"]):
    c = Controller.idroop(DESIGNED["K"], DESIGNED["Knu"], DESIGNED["Kdelta"])
    return BusModel(DESIGNED["M"], DESIGNED["D"], c, tau)


def aggressive_bus(tau=0.05):
    return BusModel(1.0, 0.1, Controller.idroop(**AGGRESSIVE), tau)


def two_bus(bus, B=1.0, other=None):
    return NetworkModel({"1": bus, "2": other or bus}, (Line("1", "2", B),))


def log_uniform(rng, lo=0.05, hi=10.0, size=None):
    return np.exp(rng.uniform(np.log(lo), np.log(hi), size))


def random_controller(rng, kinds=("none", "droop", "virtual_inertia", "idroop")):
    kind = kinds[rng.integers(len(kinds))]
    if kind == "none":
        return Controller.none()
    if kind == "droop":
        return Controller.droop(log_uniform(rng))
    if kind == "virtual_inertia":
        return Controller.virtual_inertia(log_uniform(rng), log_uniform(rng))
    return Controller.idroop(log_uniform(rng), log_uniform(rng), log_uniform(rng))


def random_bus(rng, tau=0.0, **kw):
    return BusModel(log_uniform(rng), log_uniform(rng), random_controller(rng, **kw), tau)


def random_connected_network(rng, n_range=(2, 5), tau=0.0, extra_edge_prob=0.3, **kw):
    n = int(rng.integers(n_range[0], n_range[1] + 1))
    buses = {str(k): random_bus(rng, tau, **kw) for k in range(n)}
    lines = []
    for k in range(1, n):                   # random spanning tree
        j = int(rng.integers(k))
        lines.append(Line(str(j), str(k), log_uniform(rng)))
    have = {frozenset((ln.i, ln.j)) for ln in lines}
    for i in range(n):
        for j in range(i + 1, n):
            if frozenset((str(i), str(j))) not in have and rng.random() < extra_edge_prob:
                lines.append(Line(str(i), str(j), log_uniform(rng)))
    return NetworkModel(buses, tuple(lines))


def dense_margin(h, p_eval, gamma, omegas):
    """Re{h(jw)(gamma/2 jw + p(jw))} evaluated directly, no shortcuts."""
    sj = 1j * np.asarray(omegas)
    return np.real(h(sj) * (0.5 * gamma * sj + p_eval(sj)))


def linear_scan_min_gamma(h, p_eval, omegas, lo=1e-6, hi=1e6, strict=0.0):
    """Smallest certifying gamma by scanning a ladder, no bisection.

    A geometric ladder (ratio 1.05) brackets the first passing rung, then a
    linear ladder of 2000 rungs inside that bracket locates it to about
    2.5e-5 relative.  The margin is affine in gamma, so each rung costs one
    vector operation on the precomputed frequency samples.  A rung passes
    when the margin exceeds ``strict`` everywhere.
    """
    sj = 1j * np.asarray(omegas)
    a = np.real(h(sj) * sj) / 2
    b = np.real(h(sj) * p_eval(sj))

    def passes(gs):
        return np.array([np.min(g * a + b) > strict for g in gs])

    coarse = np.geomspace(lo, hi, int(np.log(hi / lo) / np.log(1.05)) + 1)
    ok = passes(coarse)
    if not ok.any():
        return np.inf
    k = int(np.argmax(ok))
    if k == 0:
        return float(coarse[0])
    fine = np.linspace(coarse[k - 1], coarse[k], 2001)
    return float(fine[int(np.argmax(passes(fine)))])
