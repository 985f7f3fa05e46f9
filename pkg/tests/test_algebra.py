import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ccmorph import (
    CLOSURE_FACTOR,
    PhasePoint,
    Rng,
    WindowError,
    algebra_residual,
    bracket_homomorphism_residual,
    catalog,
    conservation_drift,
    gell_mann_su3,
    integrate,
    poisson_bracket,
    su3_integrals,
)
from ccmorph.algebra import omega3_scaled, su3_bilinears
from ccmorph.core import ScalarField


def test_canonical_pair():
    q1 = ScalarField(lambda q, p: q[0])
    p1 = ScalarField(lambda q, p: p[0])
    assert poisson_bracket(q1, p1, PhasePoint([0.3, 1.0], [2.0, -1.0])) == 1.0


def test_bracket_with_itself_vanishes():
    H = catalog.kepler().base.field()
    assert poisson_bracket(H, H, PhasePoint([1, 0.5, 0.2], [0.1, 0.3, -0.2])) == 0.0


def test_gell_mann_orthogonality():
    lam, _ = gell_mann_su3()
    G = np.einsum("aij,bji->ab", lam, lam)
    assert np.allclose(G, 0.5 * np.eye(8), atol=1e-15)


def test_structure_constants():
    _, f = gell_mann_su3()
    assert f.f[0, 1, 2] == pytest.approx(1.0)
    assert f.antisymmetry_residual() == 0.0
    assert f.jacobi_residual() < 1e-12
    # totally antisymmetric
    assert np.max(np.abs(f.f + np.transpose(f.f, (0, 2, 1)))) < 1e-15


def test_base_su3_integrals_commute_with_hamiltonian():
    e = catalog.oscillator_iso()
    C = su3_integrals(e.frame, e.base)
    H = e.base.field()
    for x in e.sample(Rng(6), 20):
        assert max(abs(poisson_bracket(c, H, x)) for c in C) < 1e-12


def test_bilinears_are_real():
    for x in catalog.oscillator_iso().sample(Rng(1), 50):
        vals = su3_bilinears(list(x.q), list(x.p), 1.0)
        assert max(abs(np.imag(v)) for v in vals) < 1e-14


def test_base_su3_conserved():
    e = catalog.oscillator_iso()
    H = e.base.field()
    tr = integrate(H, [0.4, -0.2, 0.3, 0.1, 0.5, -0.3], 50.0, tol=1e-12)
    assert max(conservation_drift(tr, c) for c in su3_integrals(e.frame, e.base)) < 1e-10


def test_lifted_su3_conserved_in_window():
    e = catalog.oscillator_iso(mu=0.1)
    x0 = [0.3, 0.2, -0.4, 0.2, 0.3, 0.1]
    assert abs(e.system(x0) - 0.2) < 0.02 and e.frame.window == 5.0
    tr = integrate(e.system, x0, 50.0, tol=1e-11)
    assert max(conservation_drift(tr, c) for c in su3_integrals(e.frame, e.system)) < 1e-8


@pytest.mark.parametrize("eid", ["oscillator_iso", "oscillator_linear"])
def test_su3_closure(eid):
    e = catalog.get(eid)
    _, f = gell_mann_su3()
    pts = e.sample(Rng(11), 20)
    assert algebra_residual(su3_integrals(e.frame, e.base), f, pts, CLOSURE_FACTOR) < 1e-11
    assert algebra_residual(su3_integrals(e.frame, e.system), f, pts, CLOSURE_FACTOR) < 1e-9


def test_bare_constants_do_not_close():
    e = catalog.oscillator_iso()
    _, f = gell_mann_su3()
    pts = e.sample(Rng(11), 5)
    assert algebra_residual(su3_integrals(e.frame, e.base), f, pts, 1.0) > 1e-3


def test_window_violation():
    e = catalog.oscillator_iso(mu=0.1)
    C = su3_integrals(e.frame, e.system)
    with pytest.raises(WindowError, match="omega\\^2/2mu"):
        C[0]([0, 0, 0, 4.0, 0, 0])


def test_omega_cubed_finite_across_window():
    e = catalog.oscillator_iso(mu=0.1)
    S = omega3_scaled(e.frame, e.system)
    C = su3_integrals(e.frame, e.system)
    inside = [0, 0, 0, 1.0, 0.5, 0]
    outside = [0, 0, 0, 4.0, 0, 0]
    assert all(np.isfinite(s(outside)) for s in S)
    h = e.system(inside)
    w3 = (1 - 0.2 * h) ** 1.5
    assert abs(S[2](inside) - w3 * C[2](inside)) < 1e-12


def test_homomorphism():
    e = catalog.kepler()
    ob = {it.name: it.observable for it in e.integrals}
    pairs = [(ob["L1"], ob["L2"]), (ob["L3"], ob["A1"]), (ob["A1"], ob["A2"])]
    assert bracket_homomorphism_residual(e.system, pairs, e.sample(Rng(2), 50)) < 1e-9


_poly = st.lists(st.floats(-1, 1), min_size=6, max_size=6)


def _field(c):
    return ScalarField(lambda q, p: c[0] * q[0] ** 2 * p[1] + c[1] * q[1] * p[0] ** 3
                       + c[2] * q[0] * q[1] + c[3] * p[0] * p[1] + c[4] * q[1] ** 3 + c[5] * p[0])


@settings(max_examples=40, deadline=None)
@given(a=_poly, b=_poly, c=_poly, z=st.lists(st.floats(-1, 1), min_size=4, max_size=4))
def test_bracket_antisymmetry_and_leibniz(a, b, c, z):
    F, G, K = _field(a), _field(b), _field(c)
    x = np.array(z)
    assert abs(poisson_bracket(F, G, x) + poisson_bracket(G, F, x)) < 1e-12
    FG = ScalarField(lambda q, p: F.f(q, p) * G.f(q, p))
    lhs = poisson_bracket(FG, K, x)
    rhs = F(x) * poisson_bracket(G, K, x) + G(x) * poisson_bracket(F, K, x)
    assert abs(lhs - rhs) < 1e-12 * (1 + abs(lhs))
