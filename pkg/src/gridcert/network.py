"""Transmission network model, closed-loop assembly and global stability checks."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .buses import BusModel, ControllerType, characteristic
from .contour import scan_imaginary_axis
from .errors import (DanglingEndpoint, DelayPresent, DisconnectedNetwork,
                     DuplicateLine, GridCertError, InvalidParameter,
                     SingularMassMatrix, UnknownBus)
from .spr import (Certificate, FirstOrderDesign, HFilter, admit, certify_bus, envelope_check,
                  fit_envelope, min_gamma, min_gamma_first_order)
from .tf import FrequencyGrid, default_grid

__all__ = ["Line", "NetworkModel", "laplacian", "diag_susceptance", "components",
           "StateSpace", "assemble_state_space", "SpectralVerdict",
           "spectral_stability", "GlobalVerdict", "nyquist_global_check",
           "NetworkCertificate", "protocol_certify_network"]


@dataclass(frozen=True)
class Line:
    i: str
    j: str
    B: float

    def __post_init__(self):
        object.__setattr__(self, "i", str(self.i))
        object.__setattr__(self, "j", str(self.j))
        if self.i == self.j:
            raise InvalidParameter(f"line {self.i}-{self.j} is a self loop")
        if not (np.isfinite(self.B) and self.B > 0):
            raise InvalidParameter(f"line {self.i}-{self.j} needs susceptance B > 0")
        object.__setattr__(self, "B", float(self.B))

    @property
    def key(self):
        return frozenset((self.i, self.j))


@dataclass(frozen=True)
class NetworkModel:
    """Buses (keyed by identifier, in insertion order) and weighted lines."""

    buses: dict
    lines: tuple = ()

    def __post_init__(self):
        buses = {str(k): v for k, v in dict(self.buses).items()}
        for k, v in buses.items():
            if not isinstance(v, BusModel):
                raise InvalidParameter(f"bus {k!r} is not a BusModel")
        lines = tuple(self.lines)
        seen = set()
        for ln in lines:
            for end in (ln.i, ln.j):
                if end not in buses:
                    raise DanglingEndpoint(f"line {ln.i}-{ln.j} references unknown bus {end!r}")
            if ln.key in seen:
                raise DuplicateLine(f"duplicate line {ln.i}-{ln.j}")
            seen.add(ln.key)
        object.__setattr__(self, "buses", buses)
        object.__setattr__(self, "lines", lines)

    @property
    def ids(self) -> list:
        return list(self.buses)

    @property
    def n(self) -> int:
        return len(self.buses)

    def index(self, bus_id) -> int:
        try:
            return self.ids.index(str(bus_id))
        except ValueError:
            raise UnknownBus(bus_id) from None

    @property
    def delayed(self) -> bool:
        return any(b.delayed for b in self.buses.values())

    def scaled_lines(self, factor: float) -> "NetworkModel":
        return NetworkModel(self.buses, tuple(Line(l.i, l.j, l.B * factor) for l in self.lines))

    def replace_bus(self, bus_id, bus: BusModel) -> "NetworkModel":
        buses = dict(self.buses)
        buses[str(bus_id)] = bus
        return NetworkModel(buses, self.lines)


def laplacian(net: NetworkModel) -> np.ndarray:
    """Susceptance-weighted Laplacian ``L_B`` (ordered as ``net.ids``)."""
    n = net.n
    L = np.zeros((n, n))
    for ln in net.lines:
        a, b = net.index(ln.i), net.index(ln.j)
        L[a, b] -= ln.B
        L[b, a] -= ln.B
    L[np.diag_indices(n)] = -L.sum(axis=1)
    return L


def diag_susceptance(net: NetworkModel, bus_id) -> float:
    """Aggregate susceptance of the lines incident to ``bus_id``."""
    bus_id = str(bus_id)
    if bus_id not in net.buses:
        raise UnknownBus(bus_id)
    return float(sum(ln.B for ln in net.lines if bus_id in (ln.i, ln.j)))


def components(net: NetworkModel) -> list:
    """Connected components as lists of bus identifiers."""
    L = laplacian(net)
    adj = csr_matrix((L != 0) & ~np.eye(net.n, dtype=bool))
    k, labels = connected_components(adj, directed=False)
    ids = net.ids
    return [[ids[i] for i in np.nonzero(labels == c)[0]] for c in range(k)]


# -- delay-free state space -----------------------------------------------------

@dataclass(frozen=True)
class StateSpace:
    """``dx/dt = A x + B d`` with ``d`` the vector of bus power injections."""

    A: np.ndarray
    B: np.ndarray
    labels: tuple
    n_components: int = 1
    # rows mapping (x, d) to bus frequencies, algebraic buses included
    W: np.ndarray = field(default=None, repr=False)
    Wd: np.ndarray = field(default=None, repr=False)


def _effective(bus: BusModel):
    """Delay-free (inertia, damping) of a bus, with instantaneous feedback absorbed."""
    c = bus.controller
    if c.kind is ControllerType.VIRTUAL_INERTIA:
        return bus.M + c.Knu, bus.D + c.K
    if c.kind is ControllerType.DROOP:
        return bus.M, bus.D + c.K
    if c.kind is ControllerType.IDROOP:
        return bus.M, bus.D + c.Knu
    return bus.M, bus.D


def assemble_state_space(net: NetworkModel) -> StateSpace:
    """Linear swing-equation model of a delay-free network.

    States are all angles, then frequencies of buses with (effective)
    inertia, then iDroop filter states ``z`` with ``x = -Knu w - z``.
    Frequencies of inertia-free buses are eliminated algebraically.
    """
    if net.delayed:
        raise DelayPresent("network has delayed buses; use nyquist_global_check or simulate")
    ids, n = net.ids, net.n
    L = laplacian(net)
    buses = [net.buses[i] for i in ids]
    eff = [_effective(b) for b in buses]
    w_idx, z_idx = {}, {}
    labels = [f"theta_{i}" for i in ids]
    for k, (m, _) in enumerate(eff):
        if m > 0:
            w_idx[k] = len(labels)
            labels.append(f"omega_{ids[k]}")
    for k, b in enumerate(buses):
        if b.controller.kind is ControllerType.IDROOP:
            z_idx[k] = len(labels)
            labels.append(f"z_{ids[k]}")
    N = len(labels)
    # frequency of each bus as a linear function of state and injection
    W = np.zeros((n, N))
    Wd = np.zeros((n, n))
    for k, (m, d_eff) in enumerate(eff):
        if m > 0:
            W[k, w_idx[k]] = 1.0
            continue
        if d_eff <= 0:
            raise SingularMassMatrix(f"bus {ids[k]} has no inertia and no damping")
        W[k, :n] = -L[k] / d_eff
        if k in z_idx:
            W[k, z_idx[k]] = -1.0 / d_eff
        Wd[k, k] = 1.0 / d_eff
    A = np.zeros((N, N))
    B = np.zeros((N, n))
    A[:n] = W
    B[:n] = Wd
    for k, (m, d_eff) in enumerate(eff):
        if m > 0:
            r = w_idx[k]
            A[r, :n] -= L[k] / m
            A[r, r] -= d_eff / m
            if k in z_idx:
                A[r, z_idx[k]] -= 1.0 / m
            B[r, k] = 1.0 / m
    for k, r in z_idx.items():
        c = buses[k].controller
        A[r] += c.Kdelta * (c.K - c.Knu) * W[k]
        A[r, r] -= c.Kdelta
        B[r] += c.Kdelta * (c.K - c.Knu) * Wd[k]
    return StateSpace(A, B, tuple(labels), len(components(net)), W, Wd)


@dataclass(frozen=True)
class SpectralVerdict:
    stable: bool
    eigenvalues: np.ndarray
    abscissa: float      # largest real part once the angle mode is removed
    tol: float

    def __bool__(self):
        return self.stable


def spectral_stability(A, tol: float | None = None) -> SpectralVerdict:
    """Eigenvalue test modulo the uniform angle-translation mode.

    ``A`` is a matrix or a :class:`StateSpace`.  Stable iff exactly one
    eigenvalue lies within ``tol`` of zero and all others have real part
    below ``-tol``.
    """
    ncomp = 1
    if isinstance(A, StateSpace):
        ncomp = A.n_components
        A = A.A
    if ncomp > 1:
        raise DisconnectedNetwork([[f"component {i}"] for i in range(ncomp)])
    A = np.asarray(A, dtype=float)
    ev = np.linalg.eigvals(A)
    if tol is None:
        tol = 1e-7 * (1.0 + float(np.max(np.abs(ev))))
    near0 = np.abs(ev) <= tol
    rest = ev[~near0]
    abscissa = float(np.max(rest.real)) if rest.size else -np.inf
    stable = int(np.sum(near0)) == 1 and abscissa < -tol
    return SpectralVerdict(bool(stable), ev[np.argsort(-ev.real)], abscissa, tol)


# -- frequency-domain global check ---------------------------------------------------

@dataclass(frozen=True)
class GlobalVerdict:
    stable: bool
    rhp_roots: int
    min_abs: float
    omegas: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)

    def __bool__(self):
        return self.stable


def _closed_loop_characteristic(net: NetworkModel):
    """Closed-loop characteristic function on ``jw`` and its degree.

    With ``p_i = num_i / F_i`` the closed-loop poles (angle mode removed) are
    the zeros of ``chi(s) = det(s diag(F) + diag(num) L) / s``.  At ``s = 0``
    the angle direction is projected out analytically:
    ``chi(0) = prod F_i(0) * det(Q' P(0) Q Lq)`` with ``Q`` an orthonormal
    basis of the complement of the all-ones vector.
    """
    ids = net.ids
    L = laplacian(net)
    parts = [characteristic(net.buses[i]) for i in ids]
    taus = np.array([net.buses[i].tau for i in ids])
    k = sum(base.degree + 1 for _, base, _ in parts) - 1
    lam, V = np.linalg.eigh(L)
    Q, Lq = V[:, 1:], np.diag(lam[1:])

    def F_and_num(sj):
        F = np.stack([base(sj) + np.exp(-sj * t) * dl(sj)
                      for (_, base, dl), t in zip(parts, taus)], axis=-1)
        num = np.stack([num(sj) + 0 * sj for num, _, _ in parts], axis=-1)
        return F, num

    def chi(w):
        w = np.asarray(w, dtype=float)
        sj = 1j * w
        F, num = F_and_num(sj)
        out = np.empty(w.shape, dtype=complex)
        pos = w > 0
        if np.any(pos):
            M = (sj[pos, None, None] * (F[pos, :, None] * np.eye(len(ids)))
                 + num[pos, :, None] * L[None])
            out[pos] = np.linalg.det(M) / sj[pos]
        if np.any(~pos):
            F0, n0 = F[~pos][0], num[~pos][0]
            red = Q.T @ np.diag(n0 / F0) @ Q @ Lq
            out[~pos] = np.prod(F0) * np.linalg.det(red) if red.size else np.prod(F0)
        return out / (sj + 1.0) ** k

    return chi, k


def nyquist_global_check(net: NetworkModel, grid: FrequencyGrid | None = None) -> GlobalVerdict:
    """Closed-loop stability by the argument principle, delays included.

    Counts right half plane zeros of the closed-loop characteristic function
    (bus characteristic functions times the network determinant) along the
    imaginary axis.  Unstable buses are allowed and show up as roots.
    """
    comps = components(net)
    if len(comps) > 1:
        raise DisconnectedNetwork(comps)
    grid = grid or default_grid()
    chi, _ = _closed_loop_characteristic(net)
    scan = scan_imaginary_axis(chi, grid.omegas)
    return GlobalVerdict(scan.rhp_zeros == 0, scan.rhp_zeros, scan.min_abs,
                         scan.omegas, scan.values)


# -- decentralized protocol ------------------------------------------------------------

@dataclass(frozen=True)
class NetworkCertificate:
    certificates: dict
    certified: bool

    @property
    def verdict(self) -> str:
        return "certified" if self.certified else "uncertified"

    def __bool__(self):
        return self.certified


def _certify_one(bus_id, bus, h, grid, susceptance, design):
    if design is None:
        g = min_gamma(h, bus, grid)
        r = certify_bus(h, bus, g, grid)
        return Certificate(bus_id, g, r.margin, r.tol, susceptance, admit(g, susceptance),
                           "direct", grid)
    if not isinstance(design, FirstOrderDesign):
        a, b = design
        design = FirstOrderDesign(a, b, fit_envelope(bus, a, b, h.omega0), h.omega0)
        note = f"fitted eps={design.eps:.6g}"
    elif envelope_check(bus, design):
        note = f"eps={design.eps:.6g}"
    else:
        eps = fit_envelope(bus, design.a, design.b, design.omega0)
        note = f"envelope eps={design.eps:.6g} violated; refitted eps={eps:.6g}"
        design = FirstOrderDesign(design.a, design.b, eps, design.omega0)
    g = min_gamma_first_order(design)
    return Certificate(bus_id, g, None, 0.0, susceptance, admit(g, susceptance),
                       "first-order", grid, note, eps=design.eps)


def protocol_certify_network(net: NetworkModel, h: HFilter,
                             grid: FrequencyGrid | None = None,
                             first_order: dict | None = None) -> NetworkCertificate:
    """Run the admission protocol bus by bus.

    Each bus computes its smallest certifying ``gamma`` (directly, or via a
    first-order model ``a/(s+b)`` from ``first_order[bus_id]``) and is
    admitted iff ``gamma * [L_B]_ii <= 1``.  A bus whose test raises is
    recorded as not admitted with the reason.  The network is certified iff
    every bus is admitted; an uncertified network is not thereby unstable.
    """
    grid = grid or default_grid()
    first_order = {str(k): v for k, v in (first_order or {}).items()}
    certs = {}
    for bus_id, bus in net.buses.items():
        susceptance = diag_susceptance(net, bus_id)
        design = first_order.get(bus_id)
        if design is not None and h.omega0 is None:
            raise InvalidParameter("first-order route needs a canonical h")
        try:
            certs[bus_id] = _certify_one(bus_id, bus, h, grid, susceptance, design)
        except GridCertError as exc:
            certs[bus_id] = Certificate(bus_id, None, None, 0.0, susceptance, False,
                                        "first-order" if design is not None else "direct",
                                        grid, f"{type(exc).__name__}: {exc}")
    return NetworkCertificate(certs, all(c.admitted for c in certs.values()))
