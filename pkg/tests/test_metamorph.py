import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ccmorph import (
    ConfigurationError,
    DegenerateMetamorphosisError,
    DerivedSystem,
    MetamorphosisRule,
    MultipleRootsError,
    Observable,
    ParamSystem,
    PhasePoint,
    Rng,
    Substitution,
    catalog,
    constant_shift_form,
    gradient_ratio_check,
    lift_observable,
    omega_field,
    solve_tilde,
)
from ccmorph.core import sqrt
from ccmorph.metamorph import fixed_point_residual


def linear_system():
    base = ParamSystem(1, ("lam",), lambda q, p, lam: 0.5 * p[0] ** 2 + lam[0] * q[0],
                       (0.0,), affine=True)
    return DerivedSystem(base, MetamorphosisRule((Substitution.affine("lam", 0.0, 1.0),)))


def test_oscillator_solve_and_omega():
    e = catalog.oscillator_iso(omega=1.0, mu=1.0)
    h, om = solve_tilde(e.system, PhasePoint([1, 0, 0], [0, 0, 0]))
    assert h == pytest.approx(0.25, abs=1e-15) and om == pytest.approx(2.0, abs=1e-15)


def test_linear_rule_example():
    h, om = solve_tilde(linear_system(), PhasePoint([0.5], [1.0]))
    assert h == pytest.approx(1.0, abs=1e-15) and om == pytest.approx(0.5, abs=1e-15)


def test_kepler_example():
    e = catalog.kepler(alpha=-1.0, beta=-0.5)
    x = PhasePoint([2, 0, 0], [0, 0.9, 0])
    h, om = solve_tilde(e.system, x)
    assert h == pytest.approx(-0.076, abs=1e-15)
    assert om == pytest.approx(1.25, abs=1e-15)
    # implicit-equation oracle: Omega = 1 - d/dh H(x, lam(h))
    H = e.base
    d = 1e-6
    dH = (H(x, (-1.0 - 0.5 * (h + d),)) - H(x, (-1.0 - 0.5 * (h - d),))) / (2 * d)
    assert om == pytest.approx(1 - dH, abs=1e-8)


def test_oscillator_omega_value():
    e = catalog.oscillator_iso(mu=0.1)
    assert omega_field(e.system, PhasePoint([1, 1, 1], [0.3, 0, 0])) == pytest.approx(1.3)


def test_identity_rule():
    e = catalog.kepler()
    sys = DerivedSystem(e.base, MetamorphosisRule.identity())
    for x in e.sample(Rng(1), 10):
        h, om = sys.solve(x)
        assert h == e.base(x) and om == 1.0
        assert gradient_ratio_check(sys, x) < 1e-15


@pytest.mark.parametrize("eid,kw", [("oscillator_iso", {}), ("henon_heiles", {"case": "i"})])
def test_gradient_ratio_examples(eid, kw):
    e = catalog.get(eid, **kw)
    assert max(gradient_ratio_check(e.system, x) for x in e.sample(Rng(5), 20)) < 1e-10


def test_fixed_point_residual_on_catalog():
    for eid in catalog.ids():
        e = catalog.get(eid)
        for x in e.sample(Rng(9), 10):
            h = e.system(x)
            assert fixed_point_residual(e.system, x) <= 1e-12 * (1 + abs(h)), eid


def test_newton_matches_closed_affine():
    e = catalog.kepler()
    newton = DerivedSystem(e.base, e.rule, solver="newton")
    for x in e.sample(Rng(2), 20):
        assert abs(newton(x) - e.system(x)) <= 1e-13 * (1 + abs(e.system(x)))


def test_closed_affine_requires_affine():
    e = catalog.relativistic_coulomb()
    with pytest.raises(ConfigurationError):
        DerivedSystem(e.base, e.rule, solver="closed_affine")


def test_omega_floor_raises():
    sys = linear_system()
    with pytest.raises(DegenerateMetamorphosisError):
        sys.solve(PhasePoint([1.0], [1.0]))


def test_multiple_roots_diagnostic():
    # h = p^2/2 + lam q with lam = h^2 has two roots for suitable (q, p)
    base = ParamSystem(1, ("lam",), lambda q, p, lam: 0.5 * p[0] ** 2 + lam[0] * q[0], (0.0,))
    rule = MetamorphosisRule((Substitution.general("lam", lambda h: h * h, lambda h: 2 * h),))
    sys = DerivedSystem(base, rule)
    x = PhasePoint([0.24], [1.0])
    h, _ = sys.solve(x)
    assert abs(h - (0.5 + 0.24 * h * h)) < 1e-12
    with pytest.raises(MultipleRootsError):
        sys.solve(x, diagnostic=True)


def test_rule_derivative_check():
    good = MetamorphosisRule((Substitution.general("a", lambda h: h**3, lambda h: 3 * h**2),))
    assert good.check_derivatives() < 1e-6
    bad = MetamorphosisRule((Substitution.general("a", lambda h: h**3, lambda h: 2 * h**2),))
    with pytest.raises(ConfigurationError):
        bad.check_derivatives()


def test_duplicate_substitution_rejected():
    with pytest.raises(ConfigurationError):
        MetamorphosisRule((Substitution.affine("a", 0, 1), Substitution.affine("a", 1, 1)))


def test_lift_of_coupling_free_observable_is_itself():
    e = catalog.oscillator_iso()
    L3 = Observable("L3", lambda q, p, lam: q[0] * p[1] - q[1] * p[0])
    lifted = lift_observable(e.system, L3)
    for x in e.sample(Rng(4), 10):
        assert lifted(x) == L3(x, e.base.defaults)


def test_lift_of_hamiltonian_is_tilde():
    e = catalog.kepler()
    lifted = lift_observable(e.system, Observable("H", e.base.hamiltonian))
    for x in e.sample(Rng(4), 10):
        h = e.system(x)
        assert abs(lifted(x) - h) <= 1e-12 * (1 + abs(h))


def test_runge_lenz_lift_closed_form():
    e = catalog.kepler()
    for x in e.sample(Rng(8), 20):
        for i in range(3):
            v = e.lifted(f"A{i + 1}")(x)
            cf = e.references["A_tilde"][i](x.q, x.p)
            assert abs(cf - v) / (1 + abs(v)) < 1e-10


def test_constant_shift_hietarinta():
    e = catalog.hietarinta(h=0.5)
    for x in e.sample(Rng(3), 20):
        q, p = x.q, x.p
        H0 = 0.5 * (p @ p + q @ q)
        assert e.system(x) == pytest.approx((H0 - 0.5) / (1 + 0.5 * q @ q), rel=1e-13)


def test_constant_shift_unit_is_pure_shift():
    e = catalog.hietarinta(h=0.5, F="unit")
    for x in e.sample(Rng(3), 10):
        H0 = 0.5 * (x.p @ x.p + x.q @ x.q)
        assert e.system(x) == pytest.approx(H0 - 0.5, abs=1e-14)


def test_constant_shift_henon_heiles_denominator():
    a, b = 0.05, 0.02
    e = catalog.henon_heiles(case="i", variant="C_tilde", a=a, b=b)
    x = PhasePoint([0.3, -0.4], [0.1, 0.2])
    _, om = e.system.solve(x)
    assert om == pytest.approx(a * 0.09 + b * 0.16, rel=1e-13)


def test_constant_shift_generic():
    base = ParamSystem(1, ("k",), lambda q, p, lam: 0.5 * p[0] ** 2 - lam[0] * q[0] ** 2,
                       (1.0,), affine=True)
    rule = MetamorphosisRule((Substitution.affine("k", 0.0, 1.0),))
    sys = constant_shift_form(base, rule, 2.0)
    x = PhasePoint([0.5], [1.0])
    # h = p^2/2 - h q^2 + (h - 2)  ->  h = (p^2/2 - 2)/q^2
    assert sys(x) == pytest.approx((0.5 - 2) / 0.25, rel=1e-14)


@settings(max_examples=60, deadline=None)
@given(
    q=st.lists(st.floats(-2, 2), min_size=3, max_size=3),
    p=st.lists(st.floats(-2, 2), min_size=3, max_size=3),
    mu=st.floats(0.0, 2.0),
)
def test_oscillator_closed_form_property(q, p, mu):
    e = catalog.oscillator_iso(mu=mu)
    x = PhasePoint(q, p)
    q2, p2 = float(np.dot(q, q)), float(np.dot(p, p))
    cf = 0.5 * (p2 + q2) / (1 + mu * q2)
    h, om = e.system.solve(x)
    assert abs(h - cf) <= 1e-13 * (1 + abs(cf))
    assert om == pytest.approx(1 + mu * q2, rel=1e-14)


@settings(max_examples=40, deadline=None)
@given(
    r=st.floats(0.8, 3.0),
    pr=st.floats(-0.5, 0.5),
)
def test_relativistic_newton_fixed_point(r, pr):
    e = catalog.relativistic_coulomb()
    x = PhasePoint([r, 0, 0], [pr, 0.3, 0])
    h = e.system(x)
    assert fixed_point_residual(e.system, x) <= 1e-12 * (1 + abs(h))
    m, c, a, D = 1.0, 10.0, -1.0, 9.95
    cf = 0.5 * (pr**2 + 0.09) / m - (a / r - D) ** 2 / (2 * m * c**2)
    assert abs(h - cf) <= 1e-12 * (1 + abs(cf))


def test_sqrt_dual_domain():
    from ccmorph import DomainError

    with pytest.raises(DomainError):
        sqrt(-1.0)
