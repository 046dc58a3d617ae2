"""Time-domain response to a step in power injection.

The simulator integrates the delayed network with a fixed-step fourth-order
method and a history buffer for the delayed signals.  A growth test compares
the late and early rate of change of the frequencies.
"""

from gridcert import (BusModel, Controller, Line, NetworkModel, SimConfig, detect_stability,
                      frequency_metrics, simulate)


def two_bus(bus):
    return NetworkModel({"1": bus, "2": bus}, (Line("1", "2", 1.0),))


step = {"1": -1.0}

designed = two_bus(BusModel(1.0, 0.1, Controller.idroop(0.65, 1.3, 8.0), tau=0.5))
tr = simulate(designed, SimConfig(dt=5e-3, t_end=40.0, disturbance=step))
print("designed network:", detect_stability(tr).verdict)
for bus_id, m in frequency_metrics(tr).items():
    print(f"  bus {bus_id}: nadir {m['nadir']:+.4f}, offset {m['offset']:+.4f}, "
          f"max rate of change {m['max_rocof']:.3f} per s")

aggressive = two_bus(BusModel(1.0, 0.1, Controller.idroop(30.0, 1.0, 5.0), tau=0.05))
tr = simulate(aggressive, SimConfig(dt=2.5e-3, t_end=20.0, disturbance=step))
v = detect_stability(tr)
print(f"aggressive network with 50 ms delay: {v.verdict} (growth ratio {v.ratio:.1f})")
if tr.truncated:
    print("  stopped early:", tr.reason)
