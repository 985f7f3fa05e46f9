import math

import numpy as np
import pytest

from ccmorph import (
    DerivedSystem,
    MetamorphosisRule,
    ReparameterizationError,
    Rng,
    catalog,
    coincidence,
    conservation_drift,
    integrate,
    match_trajectories,
    time_map,
)
from ccmorph.core import ScalarField, sqrt
from ccmorph.errors import DomainError


def osc1(q, p):
    return 0.5 * (p[0] ** 2 + q[0] ** 2)


def kepler2d(q, p):
    return 0.5 * (p[0] ** 2 + p[1] ** 2) - 1 / sqrt(q[0] ** 2 + q[1] ** 2)


def test_oscillator_period():
    tr = integrate(osc1, [1.0, 0.0], 2 * math.pi, tol=1e-12)
    assert np.max(np.abs(tr.z[-1] - [1.0, 0.0])) < 1e-9


def test_free_particle():
    tr = integrate(lambda q, p: 0.5 * p[0] ** 2, [0.0, 1.0], 3.0)
    assert tr.z[-1][0] == pytest.approx(3.0, abs=1e-14)


def test_kepler_circular_radius():
    tr = integrate(kepler2d, [1.0, 0.0, 0.0, 1.0], 20.0, tol=1e-12)
    r = np.hypot(tr.z[:, 0], tr.z[:, 1])
    assert np.max(np.abs(r - 1)) < 1e-9


def test_dense_output_accuracy():
    tr = integrate(osc1, [1.0, 0.0], 10.0, tol=1e-12)
    t = np.linspace(0, 10, 777)
    Z = tr(t)
    exact = np.column_stack([np.cos(t), -np.sin(t)])
    assert np.max(np.abs(Z - exact)) < 1e-9
    # nodes reproduce stored samples bit for bit
    assert np.array_equal(tr(tr.t[3]), tr.z[3])


def test_dense_output_outside_span():
    tr = integrate(osc1, [1.0, 0.0], 1.0)
    with pytest.raises(DomainError):
        tr(1.5)


def test_fixed_step_global_order():
    errs = []
    for h in (0.2, 0.1, 0.05):
        tr = integrate(osc1, [1.0, 0.0], 4.0, adaptive=False, first_step=h)
        errs.append(np.max(np.abs(tr.z[-1] - [math.cos(4.0), -math.sin(4.0)])))
    orders = [math.log2(errs[i] / errs[i + 1]) for i in range(2)]
    assert min(orders) >= 4.0


def test_tolerance_reduces_error():
    exact = np.array([math.cos(20.0), -math.sin(20.0)])
    e1 = np.max(np.abs(integrate(osc1, [1.0, 0.0], 20.0, tol=1e-8).z[-1] - exact))
    e2 = np.max(np.abs(integrate(osc1, [1.0, 0.0], 20.0, tol=1e-10).z[-1] - exact))
    assert e2 < e1 / 10


def test_energy_drift_3d_oscillator():
    def H(q, p):
        return 0.5 * sum(p[i] ** 2 + q[i] ** 2 for i in range(3))

    tr = integrate(H, [1.0, 0.2, -0.3, 0.0, 0.5, 0.1], 200 * math.pi, tol=1e-12)
    assert conservation_drift(tr, ScalarField(H)) < 1e-8


def test_guard_exit():
    tr = integrate(kepler2d, [1.0, 0.0, 0.0, 0.0], 5.0,
                   guard=lambda z: math.hypot(z[0], z[1]) > 0.1)
    assert tr.exit == "guard" and tr.span < 5.0
    assert math.hypot(*tr.z[-1][:2]) > 0.1


def test_finite_time_blowup_ends_in_domain_exit():
    tr = integrate(lambda q, p: 0.5 * p[0] ** 2 - q[0] ** 4, [1.0, 0.0], 5.0, tol=1e-10)
    assert tr.exit == "domain" and tr.span < 1.0
    assert np.all(np.isfinite(tr.z))


def test_time_map_identity():
    e = catalog.kepler()
    sys = DerivedSystem(e.base, MetamorphosisRule.identity())
    tr = integrate(sys, [1.0, 0.0, 0.0, 0.0, 1.1, 0.0], 10.0)
    tm = time_map(tr, sys)
    assert np.array_equal(tm.t_nodes, tm.t_tilde_nodes)
    s = np.linspace(0, 10, 17)
    assert np.max(np.abs(tm.t(s) - s)) < 1e-14


def test_time_map_constant_omega():
    e = catalog.oscillator_iso(mu=0.1)
    # base circle of radius 1 at the solved frequency, E = 5/6
    x0 = [1.0, 0.0, 0.0, 0.0, math.sqrt(5 / 6), 0.0]
    assert e.system(x0) == pytest.approx(5 / 6, abs=1e-15)
    tr = integrate(e.system, x0, 20.0, tol=1e-12)
    tm = time_map(tr, e.system)
    s = np.linspace(0, 20, 11)
    assert np.max(np.abs(tm.t(s) - s / 1.1)) < 1e-10


def test_time_map_round_trip_and_monotone():
    e = catalog.kepler()
    tr = integrate(e.system, [1.0, 0.0, 0.0, 0.0, 1.1, 0.0], 30.0, tol=1e-12)
    tm = time_map(tr, e.system)
    assert np.all(np.diff(tm.t_nodes) > 0) and np.all(np.diff(tm.t_tilde_nodes) > 0)
    s = np.linspace(0, 30, 41)
    back = tm.t_tilde(tm.t(s))
    assert np.max(np.abs(back - s)) < 1e-10
    rate = np.diff(tm.t_nodes) / np.diff(tm.t_tilde_nodes)
    assert rate.max() / rate.min() > 1.01  # genuinely nonlinear


def test_match_identity_rule():
    e = catalog.kepler()
    sys = DerivedSystem(e.base, MetamorphosisRule.identity())
    r = coincidence(sys, [1.0, 0.0, 0.0, 0.0, 1.1, 0.0], 10.0, tol=1e-11)
    assert r.sup_q <= 2e-11 and r.sup_p <= 2e-11 and r.overlap == 1.0


def test_oscillator_coincidence_example():
    e = catalog.oscillator_iso(mu=0.1)
    r = coincidence(e.system, [0.3, 0, 0, 0, 0.4, 0], 20.0, tol=1e-11)
    assert r.sup_q < 1e-7 and r.sup_p < 1e-7
    m = match_trajectories(r.tilde, r.base, r.map, n=64)
    assert m.t_tilde.size == 64 and m.sup <= max(r.sup_q, r.sup_p) + 1e-12


def test_henon_heiles_coincidence():
    e = catalog.henon_heiles(case="i", A=1, B=1, D=0.1, a=0.05, b=0.02)
    x = e.sample(Rng(4), 1, dynamics=True)[0]
    r = coincidence(e.system, x, 30.0, tol=1e-11, guard=e.flow_guard())
    assert max(r.sup_q, r.sup_p) < 1e-6


def test_conservation_examples():
    tr = integrate(kepler2d, [1.0, 0.0, 0.0, 1.2], 20.0, tol=1e-11)
    H = ScalarField(kepler2d)
    assert conservation_drift(tr, H) <= 10 * 1e-11 * tr.steps
    L = ScalarField(lambda q, p: q[0] * p[1] - q[1] * p[0])
    assert conservation_drift(tr, L) < 1e-10


def test_lifted_henon_heiles_integral():
    e = catalog.henon_heiles(case="i", A=1, B=1, D=0.1, a=0.05, b=0.02)
    x = e.sample(Rng(2), 1, dynamics=True)[0]
    tr = integrate(e.system, x, 50.0, tol=1e-11, guard=e.flow_guard())
    assert tr.exit is None
    assert conservation_drift(tr, e.lifted("K")) < 1e-7


def test_reparameterization_breakdown():
    e = catalog.get("kepler")
    from ccmorph import Substitution

    sys = DerivedSystem(e.base, MetamorphosisRule((Substitution.affine("alpha", -1.0, 0.5),)))
    with pytest.raises(ReparameterizationError) as info:
        coincidence(sys, [1.0, 0.0, 0.0, -0.5, 0.05, 0.0], 5.0)
    assert 0 < info.value.crossing < 5


@pytest.mark.parametrize("eid", [i for i in catalog.ids() if i != "darboux_pair"])
def test_coincidence_every_entry(eid):
    e = catalog.get(eid)
    tol = 1e-10
    for x in e.sample(Rng(31), 5, dynamics=True):
        r = coincidence(e.system, x, 5.0, tol=tol, guard=e.flow_guard())
        assert max(r.sup_q, r.sup_p) < 100 * tol, (eid, r.sup_q, r.sup_p)
        s = np.linspace(0, r.tilde.span, 9)
        assert np.max(np.abs(r.map.t_tilde(r.map.t(s)) - s)) < 1e-10


def test_coincidence_darboux_short_horizon():
    # the derived flow escapes in finite time; stop it at |q| = 3
    e = catalog.get("darboux_pair")
    inside = e.flow_guard()
    for x in e.sample(Rng(31), 5, dynamics=True):
        r = coincidence(e.system, x, 5.0, tol=1e-10,
                        guard=lambda z: inside(z) and abs(z[0]) < 3.0)
        assert max(r.sup_q, r.sup_p) < 1e-8
