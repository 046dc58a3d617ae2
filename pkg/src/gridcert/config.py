"""Network configuration files.

A configuration is a JSON document::

    {
      "buses": [{"id": "1", "M": 1.0, "D": 0.1, "tau": 0.5,
                 "controller": {"type": "idroop", "K": 0.65, "Knu": 1.3, "Kdelta": 8.0}}],
      "lines": [{"from": "1", "to": "2", "B": 1.0}],
      "h": {"omega0": 30.0},
      "sim": {"dt": 0.001, "t_end": 20.0, "disturbance": {"1": -1.0}}
    }

``tau`` and ``controller`` default to a delay-free uncontrolled bus, ``h``
defaults to ``omega0 = 30`` and ``sim`` is optional.  Numbers are emitted
with ``repr`` so that ``load_config(emit_config(cfg)) == cfg``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .buses import BusModel, Controller, ControllerType
from .errors import GridCertError, ParseError, ValidationError
from .network import Line, NetworkModel
from .sim import SimConfig
from .spr import HFilter

__all__ = ["NetworkConfig", "parse_config", "load_config", "emit_config", "DEFAULT_OMEGA0"]

DEFAULT_OMEGA0 = 30.0

_BUS_KEYS = {"id", "M", "D", "tau", "controller"}
_CTRL_KEYS = {"type", "K", "Knu", "Kdelta"}
_LINE_KEYS = {"from", "to", "B"}
_SIM_KEYS = {"dt", "t_end", "disturbance"}


@dataclass(frozen=True)
class NetworkConfig:
    network: NetworkModel
    omega0: float = DEFAULT_OMEGA0
    sim: SimConfig | None = None

    @property
    def h(self) -> HFilter:
        return HFilter.canonical(self.omega0)

    def sim_or_default(self) -> SimConfig:
        return self.sim if self.sim is not None else SimConfig()


def _number(obj, key, where, default=None):
    if key not in obj:
        if default is None:
            raise ValidationError(f"{where}.{key}: missing")
        return default
    val = obj[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ValidationError(f"{where}.{key}: expected a number, got {val!r}")
    return float(val)


def _mapping(obj, where, allowed):
    if not isinstance(obj, dict):
        raise ValidationError(f"{where}: expected an object")
    extra = set(obj) - allowed
    if extra:
        raise ValidationError(f"{where}: unknown key(s) {sorted(extra)}")
    return obj


def _bus(obj, where):
    _mapping(obj, where, _BUS_KEYS)
    if "id" not in obj:
        raise ValidationError(f"{where}.id: missing")
    ctrl = _mapping(obj.get("controller", {"type": "none"}), f"{where}.controller", _CTRL_KEYS)
    try:
        kind = ControllerType(ctrl.get("type", "none"))
    except ValueError:
        raise ValidationError(f"{where}.controller.type: unknown type {ctrl.get('type')!r}")
    gains = {k: _number(ctrl, k, f"{where}.controller", 0.0) for k in ("K", "Knu", "Kdelta")}
    try:
        c = Controller(kind, **gains)
    except GridCertError as exc:
        raise ValidationError(f"{where}.controller: {exc}") from None
    vals = {k: _number(obj, k, where, 0.0 if k == "tau" else None) for k in ("M", "D", "tau")}
    if vals["D"] <= 0:
        raise ValidationError(f"{where}.D: damping must be > 0, got {vals['D']}")
    try:
        return str(obj["id"]), BusModel(controller=c, **vals)
    except GridCertError as exc:
        raise ValidationError(f"{where}: {exc}") from None


def load_config(text: str) -> NetworkConfig:
    """Parse and validate configuration text."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    _mapping(doc, "config", {"buses", "lines", "h", "sim"})
    if not isinstance(doc.get("buses"), list) or not doc["buses"]:
        raise ValidationError("buses: expected a nonempty list")
    buses = {}
    for k, obj in enumerate(doc["buses"]):
        bus_id, bus = _bus(obj, f"buses[{k}]")
        if bus_id in buses:
            raise ValidationError(f"buses[{k}].id: duplicate id {bus_id!r}")
        buses[bus_id] = bus
    raw_lines = doc.get("lines", [])
    if not isinstance(raw_lines, list):
        raise ValidationError("lines: expected a list")
    lines = []
    for k, obj in enumerate(raw_lines):
        where = f"lines[{k}]"
        _mapping(obj, where, _LINE_KEYS)
        for end in ("from", "to"):
            if end not in obj:
                raise ValidationError(f"{where}.{end}: missing")
            if str(obj[end]) not in buses:
                raise ValidationError(f"{where}.{end}: unknown bus {obj[end]!r}")
        B = _number(obj, "B", where)
        if B <= 0:
            raise ValidationError(f"{where}.B: susceptance must be > 0, got {B}")
        try:
            lines.append(Line(str(obj["from"]), str(obj["to"]), B))
        except GridCertError as exc:
            raise ValidationError(f"{where}: {exc}") from None
    try:
        net = NetworkModel(buses, tuple(lines))
    except GridCertError as exc:
        raise ValidationError(f"lines: {exc}") from None

    h = _mapping(doc.get("h", {}), "h", {"omega0"})
    omega0 = _number(h, "omega0", "h", DEFAULT_OMEGA0)
    if omega0 <= 0:
        raise ValidationError(f"h.omega0: must be > 0, got {omega0}")

    sim = None
    if "sim" in doc:
        raw = _mapping(doc["sim"], "sim", _SIM_KEYS)
        dist = _mapping(raw.get("disturbance", {}), "sim.disturbance", set(buses))
        dist = {str(k): _number(dist, k, "sim.disturbance") for k in dist}
        defaults = SimConfig()
        try:
            sim = SimConfig(dt=_number(raw, "dt", "sim", defaults.dt),
                            t_end=_number(raw, "t_end", "sim", defaults.t_end),
                            disturbance=dist)
        except GridCertError as exc:
            raise ValidationError(f"sim: {exc}") from None
    return NetworkConfig(net, omega0, sim)


def parse_config(path) -> NetworkConfig:
    """Read and validate a configuration file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror or exc}") from None
    return load_config(text)


def emit_config(cfg: NetworkConfig) -> str:
    """Serialize ``cfg`` so that :func:`load_config` reproduces it exactly."""
    buses = []
    for bus_id, bus in cfg.network.buses.items():
        c = bus.controller
        buses.append({"id": bus_id, "M": bus.M, "D": bus.D, "tau": bus.tau,
                      "controller": {"type": c.kind.value, "K": c.K, "Knu": c.Knu,
                                     "Kdelta": c.Kdelta}})
    doc = {"buses": buses,
           "lines": [{"from": ln.i, "to": ln.j, "B": ln.B} for ln in cfg.network.lines],
           "h": {"omega0": cfg.omega0}}
    if cfg.sim is not None:
        doc["sim"] = {"dt": cfg.sim.dt, "t_end": cfg.sim.t_end,
                      "disturbance": dict(cfg.sim.disturbance)}
    return json.dumps(doc, indent=2)
