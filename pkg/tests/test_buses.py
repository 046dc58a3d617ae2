import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import fsolve

from gridcert import (BusModel, Controller, ControllerType, FrequencyGrid, InvalidParameter,
                      RationalTF, bus_eval, bus_internal_stability,
                      bus_rational, controller_tf, relative_degree, tf_eval)

from support import AGGRESSIVE, aggressive_bus, designed_bus


# -- controllers -----------------------------------------------------------------------

def test_idroop_dc_gain_is_droop_gain():
    c = Controller.idroop(0.65, 1.3, 8.0)
    assert tf_eval(controller_tf(c), 0.0) == pytest.approx(0.65)


def test_droop_is_constant():
    g = controller_tf(Controller.droop(30.0))
    assert g.num.coeffs == (30.0,) and g.den.coeffs == (1.0,)


def test_idroop_partial_fraction_identity():
    K, Knu, Kd = 0.65, 1.3, 8.0
    c = Controller.idroop(K, Knu, Kd)
    w = np.logspace(-4, 5, 500)
    sj = 1j * w
    split = Knu + Kd * (K - Knu) / (sj + Kd)
    np.testing.assert_allclose(c(sj), split, rtol=1e-13)


def test_none_controller_is_zero():
    assert controller_tf(Controller.none()).num.is_zero()


@pytest.mark.parametrize("kwargs", [
    dict(kind="droop", K=-1.0),
    dict(kind="droop", K=1.0, Knu=1.0),
    dict(kind="virtual_inertia", K=1.0, Knu=1.0, Kdelta=1.0),
    dict(kind="idroop", K=1.0, Knu=1.0, Kdelta=0.0),
    dict(kind="none", K=1.0),
])
def test_controller_validation(kwargs):
    with pytest.raises(InvalidParameter):
        Controller(**kwargs)


def test_controller_kind_from_string():
    assert Controller("idroop", 1, 1, 1).kind is ControllerType.IDROOP


# -- bus construction --------------------------------------------------------------------

def test_uncontrolled_bus_is_first_order_lag():
    p = bus_rational(BusModel(1.0, 0.1))
    assert p.isclose(RationalTF((1.0,), (0.1, 1.0)))


def test_virtual_inertia_absorbed_into_inertia():
    p = bus_rational(BusModel(1.0, 0.1, Controller.virtual_inertia(1.0, 2.0)))
    assert p.isclose(RationalTF((1.0,), (1.1, 3.0)))
    q = bus_rational(BusModel(3.0, 0.1, Controller.droop(1.0)))
    assert p.isclose(q)


def test_static_load_bus():
    p = bus_rational(BusModel(0.0, 1.0, Controller.droop(0.0)))
    assert p.isclose(RationalTF((1.0,)))


@pytest.mark.parametrize("M, D", [(-1.0, 1.0), (1.0, 0.0), (1.0, -0.1), (1.0, np.nan)])
def test_bus_validation(M, D):
    with pytest.raises(InvalidParameter):
        BusModel(M, D)


def test_bus_rational_requires_no_delay():
    with pytest.raises(InvalidParameter):
        bus_rational(designed_bus())


def test_bus_eval_matches_rational_when_delay_free():
    rng = np.random.default_rng(7)
    buses = [BusModel(1.0, 0.1, Controller.idroop(0.65, 1.3, 8.0)),
             BusModel(2.0, 0.5, Controller.virtual_inertia(1.0, 0.3)),
             BusModel(0.0, 1.0, Controller.droop(2.0))]
    pts = rng.normal(size=50) + 1j * rng.normal(size=50)
    for bus in buses:
        p = bus_rational(bus)
        for z in pts:
            assert abs(bus_eval(bus, z) - tf_eval(p, z)) < 1e-10


def test_bus_eval_vanishes_at_large_real_s():
    bus = designed_bus()
    assert abs(bus_eval(bus, 1e8)) < 1e-7


def test_designed_bus_tracks_first_order_model():
    bus = designed_bus()
    w = np.logspace(-3, 3, 400)
    err = np.abs(bus_eval(bus, 1j * w) - 1.37 / (1j * w + 1))
    assert np.max(err / np.sqrt(1 + (w / 30) ** 2)) < 0.1


def test_delay_applies_to_controller_only():
    bus = designed_bus()
    sj = 2.0j
    c = Controller.idroop(0.65, 1.3, 8.0)
    expected = 1 / (sj + 0.1 + np.exp(-0.5 * sj) * c(sj))
    assert bus_eval(bus, sj) == pytest.approx(expected, rel=1e-14)


# -- internal stability ------------------------------------------------------------------

def test_uncontrolled_delayed_bus_is_stable():
    for tau in (0.01, 0.5, 3.0):
        assert bus_internal_stability(BusModel(1.0, 0.1, tau=tau)).stable


def test_designed_bus_is_stable():
    v = bus_internal_stability(designed_bus())
    assert v.stable and v.method == "winding"


def _rhp_roots_by_fsolve(M, D, K, Knu, Kd, tau):
    """Roots of (Ms+D)(s+Kd) + exp(-s tau)(Knu s + Kd K) with Re s > 0."""
    def F(v):
        z = complex(v[0], v[1])
        f = (M * z + D) * (z + Kd) + np.exp(-z * tau) * (Knu * z + Kd * K)
        return [f.real, f.imag]
    found = []
    for x0 in np.linspace(0.05, 20, 25):
        for y0 in np.linspace(-80, 80, 41):
            sol, info, ier, _ = fsolve(F, [x0, y0], full_output=True, xtol=1e-12)
            z = complex(*sol)
            if ier == 1 and z.real > 1e-6 and abs(complex(*F(sol))) < 1e-8:
                if all(abs(z - f) > 1e-6 for f in found):
                    found.append(z)
    return found


def test_aggressive_delayed_bus_has_rhp_roots():
    roots = _rhp_roots_by_fsolve(1.0, 0.1, AGGRESSIVE["K"], AGGRESSIVE["Knu"],
                                 AGGRESSIVE["Kdelta"], 0.05)
    v = bus_internal_stability(aggressive_bus())
    assert len(roots) >= 1
    assert not v.stable
    assert v.rhp_roots == len(roots)


def test_aggressive_bus_without_delay_is_stable():
    assert bus_internal_stability(aggressive_bus(tau=0.0)).stable


def test_neutral_type_flagged():
    # M = 0 with Knu >= D under delay: the delayed term dominates at infinity
    bus = BusModel(0.0, 0.1, Controller.idroop(0.5, 1.0, 2.0), tau=0.1)
    v = bus_internal_stability(bus)
    assert not v.stable and v.method == "asymptotic"


def test_stability_grid_must_span_required_band():
    with pytest.raises(InvalidParameter):
        bus_internal_stability(designed_bus(), FrequencyGrid.log(1e-2, 1e3, 100))


@settings(max_examples=25, deadline=None)
@given(M=st.floats(0.05, 10), D=st.floats(0.05, 10), K=st.floats(0, 10),
       Knu=st.floats(0, 10), Kd=st.floats(0.05, 10))
def test_dc_gain_property(M, D, K, Knu, Kd):
    for c in (Controller.droop(K), Controller.virtual_inertia(K, Knu),
              Controller.idroop(K, Knu, Kd)):
        bus = BusModel(M, D, c)
        assert bus_eval(bus, 0.0) == pytest.approx(1 / (D + K), rel=1e-12)
        assert relative_degree(bus_rational(bus)) >= 1

