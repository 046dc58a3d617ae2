"""Decentralized stability certificates for inverter-based power networks.

The package provides real-rational transfer function algebra, swing-equation
bus models with droop, virtual inertia and iDroop control under input delay,
a per-bus positive-realness certificate with a plug-and-play admission rule,
network-level stability checks, and a delay-aware time-domain simulator.
"""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .tf import (Polynomial, RationalTF, FrequencyGrid, default_grid, s, tf_eval,
                 freq_response, tf_add, tf_mul, tf_inv, tf_feedback, poles, zeros,
                 relative_degree)
from .buses import (ControllerType, Controller, BusModel, BusStability, controller_tf,
                    bus_rational, bus_eval, bus_internal_stability, characteristic)
from .spr import (PRVerdict, is_pr, is_spr, HFilter, MarginResult, margin_curve,
                  certify_bus, min_gamma, admit, Certificate, FirstOrderDesign,
                  first_order_protocol, min_gamma_first_order, EnvelopeResult,
                  envelope_check, fit_envelope, choose_h)
from .network import (Line, NetworkModel, laplacian, diag_susceptance, components,
                      StateSpace, assemble_state_space, SpectralVerdict,
                      spectral_stability, GlobalVerdict, nyquist_global_check,
                      NetworkCertificate, protocol_certify_network)
from .sim import (SimConfig, Trajectory, simulate, StabilityVerdict, detect_stability,
                  frequency_metrics)
from .config import NetworkConfig, parse_config, load_config, emit_config
