"""Fixed-step time-domain simulation of the networked swing equations.

Delayed buses read their own frequency ``tau`` seconds in the past from the
stored trajectory (method of steps, linear interpolation, zero history
before ``t = 0``).  iDroop is integrated in the proper form

    x = -Knu w_d - z,    dz/dt = Kdelta ((K - Knu) w_d - z),

where ``w_d`` is the (possibly delayed) measured frequency, so no derivative
of a delayed signal is needed.  Delayed virtual inertia differentiates
``w_d`` through the filter ``s / (eta s + 1)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .buses import ControllerType
from .errors import InvalidParameter, NotSettled, StepTooLarge, TooShort
from .network import NetworkModel, laplacian

__all__ = ["SimConfig", "Trajectory", "simulate", "StabilityVerdict",
           "detect_stability", "frequency_metrics", "DIVERGENCE_CAP"]

DIVERGENCE_CAP = 1e12


@dataclass(frozen=True)
class SimConfig:
    dt: float = 1e-3
    t_end: float = 20.0
    disturbance: dict = field(default_factory=dict)
    derivative_filter_eta: float = 0.01
    initial: dict = field(default_factory=dict)   # e.g. {"theta_1": 0.1}

    def __post_init__(self):
        if not self.dt > 0:
            raise InvalidParameter("dt must be > 0")
        if not self.t_end > self.dt:
            raise InvalidParameter("t_end must exceed dt")
        if not self.derivative_filter_eta > 0:
            raise InvalidParameter("derivative_filter_eta must be > 0")
        object.__setattr__(self, "disturbance",
                           {str(k): float(v) for k, v in self.disturbance.items()})


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    bus_ids: tuple
    theta: np.ndarray      # (T, n)
    omega: np.ndarray
    x: np.ndarray          # inverter power injection
    z: np.ndarray          # iDroop filter states (zero for other buses)
    q: np.ndarray          # derivative-filter states (delayed virtual inertia)
    truncated: bool = False
    reason: str = ""

    def __len__(self):
        return self.times.size

    def column(self, name: str, bus_id) -> np.ndarray:
        return getattr(self, name)[:, self.bus_ids.index(str(bus_id))]


class _Model:
    """Per-bus coefficient arrays for the vectorized right-hand side."""

    def __init__(self, net: NetworkModel, eta: float):
        self.ids = net.ids
        self.L = laplacian(net)
        buses = [net.buses[i] for i in self.ids]
        n = len(buses)
        self.n = n
        self.tau = np.array([b.tau for b in buses])
        self.delayed = self.tau > 0
        self.M = np.zeros(n)          # effective inertia
        self.Dtot = np.zeros(n)       # damping incl. instantaneous feedback
        self.k_inst = np.zeros(n)
        self.k_wd = np.zeros(n)       # x_rest = -k_wd w_d - z + k_q q
        self.k_q = np.zeros(n)
        self.has_z = np.zeros(n, dtype=bool)
        self.has_q = np.zeros(n, dtype=bool)
        self.vi_absorbed = np.zeros(n)  # Knu of delay-free virtual inertia
        self.Kd = np.zeros(n)
        self.Kz = np.zeros(n)         # K - Knu for iDroop
        self.eta = eta
        for k, b in enumerate(buses):
            c = b.controller
            self.M[k] = b.M
            kind, d = c.kind, b.tau > 0
            if kind is ControllerType.DROOP:
                self.k_inst[k], self.k_wd[k] = (0.0, c.K) if d else (c.K, 0.0)
            elif kind is ControllerType.VIRTUAL_INERTIA:
                if d:
                    self.k_wd[k] = c.K + c.Knu / eta
                    self.k_q[k] = c.Knu / eta
                    self.has_q[k] = True
                else:
                    self.k_inst[k] = c.K
                    self.M[k] = b.M + c.Knu
                    self.vi_absorbed[k] = c.Knu
            elif kind is ControllerType.IDROOP:
                self.has_z[k] = True
                self.Kd[k], self.Kz[k] = c.Kdelta, c.K - c.Knu
                self.k_inst[k], self.k_wd[k] = (0.0, c.Knu) if d else (c.Knu, 0.0)
            self.Dtot[k] = b.D + self.k_inst[k]
        self.has_w = self.M > 0

    def natural_rate(self) -> float:
        """Crude upper estimate of the fastest closed-loop rate (1/s)."""
        rates = [1e-9]
        diagL = np.diag(self.L)
        m = self.has_w
        if np.any(m):
            rates.append(np.max(self.Dtot[m] / self.M[m]))
            rates.append(np.max(np.sqrt(diagL[m] / self.M[m])))
            kk = np.abs(self.k_wd[m]) + np.sqrt(self.Kd[m] * np.abs(self.Kz[m]) * self.M[m])
            rates.append(np.max(kk / self.M[m]))
        if np.any(~m):
            rates.append(np.max(diagL[~m] / self.Dtot[~m]))
        rates.append(np.max(self.Kd))
        if np.any(self.has_q):
            rates.append(1.0 / self.eta)
        return float(max(rates))

    def split(self, y):
        n = self.n
        return y[:n], y[n:2 * n], y[2 * n:3 * n], y[3 * n:]

    def algebra(self, y, wd, d):
        """Frequencies, frequency derivatives and controller outputs."""
        theta, w_state, z, q = self.split(y)
        flow = self.L @ theta
        x_rest = -self.k_wd * wd - np.where(self.has_z, z, 0.0) + self.k_q * q
        net_in = -flow + x_rest + d
        w = np.where(self.has_w, w_state, net_in / self.Dtot)
        safe_m = np.where(self.has_w, self.M, 1.0)
        wdot = np.where(self.has_w, (net_in - self.Dtot * w) / safe_m, 0.0)
        x = -self.k_inst * w + x_rest - self.vi_absorbed * wdot
        return w, wdot, x

    def rhs(self, y, wd, d):
        _, _, z, q = self.split(y)
        w, wdot, _ = self.algebra(y, wd, d)
        u = np.where(self.delayed, wd, w)
        zdot = np.where(self.has_z, self.Kd * (self.Kz * u - z), 0.0)
        qdot = np.where(self.has_q, (wd - q) / self.eta, 0.0)
        return np.concatenate([w, wdot, zdot, qdot])


def simulate(net: NetworkModel, cfg: SimConfig) -> Trajectory:
    """Integrate from a flat start with step injections ``cfg.disturbance``.

    Classical RK4 with fixed step.  Runs that exceed ``DIVERGENCE_CAP`` are
    truncated and flagged rather than raising, since divergence is a
    legitimate outcome for an unstable network.
    """
    model = _Model(net, cfg.derivative_filter_eta)
    n, dt = model.n, cfg.dt
    for bus_id in cfg.disturbance:
        if bus_id not in net.buses:
            raise InvalidParameter(f"disturbance on unknown bus {bus_id!r}")
    if np.any(model.delayed) and dt > np.min(model.tau[model.delayed]) / 20:
        raise StepTooLarge(f"dt={dt:g} exceeds min(tau)/20")
    rate = model.natural_rate()
    if dt > 0.1 / rate:
        raise StepTooLarge(f"dt={dt:g} exceeds 0.1/{rate:.3g} (fastest rate estimate)")
    d = np.array([cfg.disturbance.get(i, 0.0) for i in model.ids])
    steps = int(round(cfg.t_end / dt))
    times = dt * np.arange(steps + 1)

    y = np.zeros(4 * n)
    for label, val in cfg.initial.items():
        kind, _, bus_id = label.partition("_")
        blocks = {"theta": 0, "omega": 1, "z": 2, "q": 3}
        if kind not in blocks or bus_id not in net.buses:
            raise InvalidParameter(f"unknown initial state {label!r}")
        y[blocks[kind] * n + model.ids.index(bus_id)] = float(val)

    Y = np.zeros((steps + 1, 4 * n))
    W = np.zeros((steps + 1, n))
    X = np.zeros((steps + 1, n))
    cols = np.arange(n)

    def delayed_w(t, upto):
        """w_i(t - tau_i), linear interpolation of stored samples."""
        out = np.zeros(n)
        if not np.any(model.delayed):
            return out
        tq = t - model.tau
        pos = tq / dt
        ok = model.delayed & (pos > 0)
        if np.any(ok):
            i0 = np.minimum(np.floor(pos[ok]).astype(int), upto)
            i1 = np.minimum(i0 + 1, upto)
            frac = np.clip(pos[ok] - i0, 0.0, 1.0)
            out[ok] = (1 - frac) * W[i0, cols[ok]] + frac * W[i1, cols[ok]]
        return out

    w0, _, x0 = model.algebra(y, delayed_w(0.0, 0), d)
    Y[0], W[0], X[0] = y, w0, x0
    last = steps
    truncated, reason = False, ""
    for k in range(steps):
        t = times[k]
        wd0 = delayed_w(t, k)
        wdh = delayed_w(t + 0.5 * dt, k)
        wd1 = delayed_w(t + dt, k)
        k1 = model.rhs(y, wd0, d)
        k2 = model.rhs(y + 0.5 * dt * k1, wdh, d)
        k3 = model.rhs(y + 0.5 * dt * k2, wdh, d)
        k4 = model.rhs(y + dt * k3, wd1, d)
        y = y + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        w, _, x = model.algebra(y, wd1, d)
        Y[k + 1], W[k + 1], X[k + 1] = y, w, x
        if not np.all(np.isfinite(y)) or np.max(np.abs(y)) > DIVERGENCE_CAP:
            last, truncated = k + 1, True
            reason = f"state magnitude exceeded {DIVERGENCE_CAP:g} at t={times[k + 1]:.4g}s"
            break
    sl = slice(0, last + 1)
    return Trajectory(times[sl], tuple(model.ids), Y[sl, :n], W[sl], X[sl],
                      Y[sl, 2 * n:3 * n], Y[sl, 3 * n:], truncated, reason)


@dataclass(frozen=True)
class StabilityVerdict:
    verdict: str      # "decaying", "growing" or "inconclusive"
    ratio: float

    def __str__(self):
        return self.verdict


def detect_stability(traj: Trajectory, split: float = 0.5) -> StabilityVerdict:
    """Compare peak ``|dw/dt|`` after ``split`` of the horizon with the peak before.

    The rate of change is used rather than ``|w|`` itself because a step
    injection leaves a nonzero synchronous frequency offset in stable runs.
    """
    if len(traj) < 100:
        raise TooShort(f"trajectory has {len(traj)} samples, need >= 100")
    if not 0 < split < 1:
        raise InvalidParameter("split must lie in (0, 1)")
    if traj.truncated:
        return StabilityVerdict("growing", np.inf)
    rate = np.abs(np.diff(traj.omega, axis=0))
    cut = int(split * len(rate))
    lead = float(np.max(rate[:cut]))
    trail = float(np.max(rate[cut:]))
    if lead == 0.0:
        return StabilityVerdict("inconclusive" if trail == 0.0 else "growing",
                                np.nan if trail == 0.0 else np.inf)
    ratio = trail / lead
    if ratio > 2.0:
        return StabilityVerdict("growing", ratio)
    if ratio < 0.5:
        return StabilityVerdict("decaying", ratio)
    return StabilityVerdict("inconclusive", ratio)


def frequency_metrics(traj: Trajectory, settle_rtol: float = 1e-3) -> dict:
    """Per-bus nadir, steady-state offset and maximum rate of change of frequency.

    The offset is the mean over the final 10% of the horizon; the run counts
    as settled when the standard deviation there is below ``settle_rtol``
    times the peak ``|w|`` of that bus.
    """
    verdict = detect_stability(traj)
    if verdict.verdict != "decaying":
        raise NotSettled(f"trajectory is {verdict.verdict} (ratio {verdict.ratio:.3g})")
    tail = traj.omega[int(0.9 * len(traj)):]
    dt = np.diff(traj.times)
    out = {}
    for k, bus_id in enumerate(traj.bus_ids):
        w = traj.omega[:, k]
        peak = float(np.max(np.abs(w)))
        if float(np.std(tail[:, k])) > settle_rtol * max(peak, 1e-300):
            raise NotSettled(f"bus {bus_id} still moving at the end of the horizon")
        out[bus_id] = {
            "nadir": float(np.min(w)),
            "offset": float(np.mean(tail[:, k])),
            "max_rocof": float(np.max(np.abs(np.diff(w) / dt))),
        }
    return out
