"""Network assembly and the two global stability checks.

Delay-free networks are checked through the eigenvalues of the assembled
state matrix; networks with delays through a winding count of the
closed-loop characteristic function.  The protocol certifies each bus from
local data only.
"""

from gridcert import (BusModel, Controller, HFilter, Line, NetworkModel, assemble_state_space,
                      laplacian, nyquist_global_check, protocol_certify_network,
                      spectral_stability)


def two_bus(bus, B=1.0):
    return NetworkModel({"1": bus, "2": bus}, (Line("1", "2", B),))


droop = two_bus(BusModel(1.0, 0.1, Controller.droop(1.0)))
print("Laplacian:\n", laplacian(droop))
v = spectral_stability(assemble_state_space(droop))
print(f"droop network: stable = {v.stable}, spectral abscissa = {v.abscissa:.4f}")

for tau in (0.0, 0.05):
    net = two_bus(BusModel(1.0, 0.1, Controller.idroop(30.0, 1.0, 5.0), tau))
    g = nyquist_global_check(net)
    print(f"aggressive iDroop, tau = {tau}: stable = {g.stable}, RHP roots = {g.rhp_roots}")

designed = two_bus(BusModel(1.0, 0.1, Controller.idroop(0.65, 1.3, 8.0), tau=0.5))
h = HFilter.canonical(30.0)
for B in (1.0, 10.0):
    cert = protocol_certify_network(two_bus(designed.buses["1"], B), h)
    print(f"\nline susceptance {B}: {cert.verdict}")
    for bus_id, c in cert.certificates.items():
        print(f"  bus {bus_id}: gamma_min {c.gamma_min:.4f}, budget {c.susceptance_budget:.3f}, "
              f"load {c.diag_susceptance:.1f}, admitted = {c.admitted}")
print("global check of the designed network:", nyquist_global_check(designed).stable)
