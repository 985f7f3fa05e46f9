"""Relativistic charged particle and its nonrelativistic partner.

Substituting ``m^2 -> -2 m Ht/c^2`` and ``D -> Ht - D`` in
``H = c sqrt((p - eA/c)^2 + m^2 c^2) + e phi + D`` gives
``Ht = (p - eA/c)^2/2m - (e phi - D)^2/(2 m c^2)`` with ``Ht <= 0``.  A
nonrelativistic orbit at energy E coincides with a relativistic orbit of mass
``sqrt(-2 m E)/c`` on the level ``H = D``.

For the Coulomb case the orbit formulas below use the energy normalization
``E = Ht + D^2/(2 m c^2)`` (constant dropped from the planar form), in which
``m^2(E) = -2 m E/c^2 + D^2/c^4``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..core import sqrt
from ..errors import ConfigurationError
from ..metamorph import MetamorphosisRule, ParamSystem, Substitution
from .base import CatalogEntry, Guard, norm2, positive_guard
from .oscillator import _angular_momentum


def relativistic_em(
    m: float = 1.0,
    c: float = 10.0,
    e: float = 1.0,
    phi: Callable = None,
    A: Callable = None,
    D: float = 9.95,
    dim: int = 3,
    entry_id: str = "relativistic_em",
    tags=("Eq. (rel.1)", "Eq. (rel.2)", "Eq. (rel.3)", "Eq. (rel.7)", "Eq. (rel.9)"),
    box=None,
    dyn_box=None,
    extra_guards=(),
    references=None,
    params=None,
) -> CatalogEntry:
    """Pair built from potentials ``phi(q)`` and ``A(q)`` (lists of length dim).

    The base parameters are ``m2`` (squared mass) and ``D``; the rule is the
    normalization in which ``Ht <= 0``.
    """
    m, c, e, D = float(m), float(c), float(e), float(D)
    if m <= 0 or c <= 0:
        raise ConfigurationError("relativistic_em: m and c must be positive")
    if phi is None:
        raise ConfigurationError("relativistic_em: scalar potential phi is required")
    Avec = A

    def kin(q, p):
        if Avec is None:
            return norm2(p)
        a = Avec(q)
        return norm2([p[i] - e / c * a[i] for i in range(dim)])

    def H(q, p, lam):
        m2, Dp = lam
        return c * sqrt(kin(q, p) + m2 * c * c) + e * phi(q) + Dp

    base = ParamSystem(dim, ("m2", "D"), H, (m * m, D), affine=False, name="H_rel")
    rule = MetamorphosisRule(
        (Substitution.affine("m2", 0.0, -2 * m / c**2), Substitution.affine("D", -D, 1.0)),
        {"m": m, "c": c, "D": D},
    )

    def closed(q, p):
        u = e * phi(q) - D
        return kin(q, p) / (2 * m) - u * u / (2 * m * c * c)

    guards = [
        positive_guard("D - e phi", lambda z: D - e * phi(z[:dim]), desc="D - e phi > 1e-6"),
        *extra_guards,
    ]
    refs = {"omega": lambda q, p: m * c * c / (D - e * phi(q))}
    refs.update(references or {})
    return CatalogEntry(
        entry_id,
        "relativistic particle and nonrelativistic partner",
        params or {"m": m, "c": c, "e": e, "D": D, "dim": dim},
        base,
        rule,
        tags,
        box or [(-2, 2), (-1, 1)],
        tilde_closed_form=closed,
        closed_form_tag="Eq. (rel.7)",
        integrals=_angular_momentum() if dim == 3 and Avec is None else [],
        guards=guards,
        energy_guard=Guard("nonpositive energy", lambda h: h <= 0, "E~ <= 0"),
        dyn_box=dyn_box,
        references=refs,
    )


def relativistic_coulomb(
    m: float = 1.0, c: float = 10.0, alpha: float = -1.0, D: float = 9.95, dim: int = 3
) -> CatalogEntry:
    """Coulomb case ``A = 0``, ``e phi = alpha/r``."""
    m, c, alpha, D, dim = float(m), float(c), float(alpha), float(D), int(dim)
    if dim not in (2, 3):
        raise ConfigurationError("relativistic_coulomb: dim must be 2 or 3")

    def phi(q):
        return alpha / sqrt(norm2(q))

    if dim == 3:
        box = [(1.5, 3.0), (-0.5, 0.5), (-0.5, 0.5), (-0.3, 0.3), (-0.3, 0.3), (-0.3, 0.3)]
        dyn = [(1.8, 2.6), (-0.2, 0.2), (-0.2, 0.2), (-0.05, 0.05), (0.15, 0.25), (-0.05, 0.05)]
    else:
        box = [(1.5, 3.0), (-0.5, 0.5), (-0.3, 0.3), (-0.3, 0.3)]
        dyn = [(1.8, 2.6), (-0.2, 0.2), (-0.05, 0.05), (0.15, 0.25)]
    r_guard = positive_guard("r", lambda z: math.sqrt(float(np.sum(np.asarray(z[:dim]) ** 2))),
                             desc="r > 1e-6")
    refs = {
        "classify": lambda p_theta, E: classify_coulomb(alpha, D, p_theta, E, m, c),
        "orbit": lambda p_theta, E, phi0=0.0: coulomb_orbit_analytic(
            _branch(alpha, p_theta, c), alpha, D, p_theta, m2_of_energy(E, m, c, D), phi0, m, c
        ),
    }
    return relativistic_em(
        m, c, 1.0, phi, None, D, dim,
        entry_id="relativistic_coulomb",
        tags=("Eq. (rel.13)", "Eq. (rel.14)", "Eq. (rel.16)", "Eq. (rel.19)",
              "Eq. (rel.25)", "Eq. (rel.26)"),
        box=box,
        dyn_box=dyn,
        extra_guards=(r_guard,),
        references=refs,
        params={"m": m, "c": c, "alpha": alpha, "D": D, "dim": dim},
    )


# -- planar Coulomb orbits ------------------------------------------------------


def m2_of_energy(E: float, m: float, c: float, D: float) -> float:
    """Squared relativistic mass for planar energy ``E`` (normalization with D^2/2mc^2)."""
    return -2 * m * E / c**2 + D**2 / c**4


def planar_energy(h_tilde: float, m: float, c: float, D: float) -> float:
    """Planar-normalized energy from the ``Ht <= 0`` normalization."""
    return h_tilde + D**2 / (2 * m * c**2)


def u_eff(r, alpha, D, p_theta, m, c):
    return alpha * D / (m * c**2 * r) + (c**2 * p_theta**2 - alpha**2) / (2 * m * c**2 * r**2)


def _branch(alpha, p_theta, c):
    return "precessing" if c**2 * p_theta**2 > alpha**2 else "fall"


@dataclass(frozen=True)
class CoulombOrbit:
    """``r(phi)`` on one branch; ``degenerate`` marks ``c^2 p^2 = alpha^2``."""

    branch: str
    gamma: float
    amplitude: float
    numerator: float
    alpha_D: float
    phi0: float
    degenerate: bool = False

    def __call__(self, phi):
        x = self.gamma * (np.asarray(phi, dtype=float) - self.phi0)
        if self.branch == "precessing":
            return self.numerator / (self.amplitude * np.cos(x) - self.alpha_D)
        return self.numerator / (self.amplitude * np.cosh(x) + self.alpha_D)

    def printed(self, phi):
        """The precessing branch with ``+ alpha D`` as printed."""
        x = self.gamma * (np.asarray(phi, dtype=float) - self.phi0)
        if self.branch == "precessing":
            return self.numerator / (self.amplitude * np.cos(x) + self.alpha_D)
        return self(phi)

    @property
    def period(self) -> float:
        """Angle of one radial period (precessing branch)."""
        return 2 * math.pi / self.gamma if self.branch == "precessing" else math.inf


def coulomb_orbit_analytic(
    branch: str,
    alpha: float,
    D: float,
    p_theta: float,
    m2: float,
    phi0: float = 0.0,
    m: float = 1.0,
    c: float = 1.0,
) -> CoulombOrbit:
    """Closed-form ``r(phi)`` of the planar Coulomb orbit.

    ``precessing`` (``c^2 p^2 > alpha^2``):
    ``r = (c^2p^2 - alpha^2)/(c sqrt((pD)^2 - m^2 c^2 (c^2p^2 - alpha^2)) cos(g(phi-phi0)) - alpha D)``
    with ``g = sqrt(1 - alpha^2/(c p)^2)``.  ``fall`` (``c^2 p^2 <= alpha^2``):
    ``r = (alpha^2 - c^2p^2)/(c sqrt((pD)^2 + m^2 c^2 (alpha^2 - c^2p^2)) cosh(g(phi-phi0)) + alpha D)``
    with ``g = sqrt(alpha^2/(c p)^2 - 1)``.
    """
    K = c**2 * p_theta**2 - alpha**2
    if branch not in ("precessing", "fall"):
        raise ConfigurationError(f"unknown branch {branch!r}")
    # c p = |alpha| up to rounding is the branch boundary
    degenerate = abs(K) <= 1e-12 * (c**2 * p_theta**2 + alpha**2)
    if branch == "precessing" and (K <= 0 or degenerate):
        raise ConfigurationError("precessing branch needs c^2 p_theta^2 > alpha^2")
    if branch == "fall" and K > 0 and not degenerate:
        raise ConfigurationError("fall branch needs c^2 p_theta^2 <= alpha^2")
    if branch == "precessing":
        rad = (p_theta * D) ** 2 - m2 * c**2 * K
        g = math.sqrt(1 - alpha**2 / (c * p_theta) ** 2)
        num = K
    else:
        rad = (p_theta * D) ** 2 + m2 * c**2 * (-K)
        g = math.sqrt(max(alpha**2 / (c * p_theta) ** 2 - 1, 0.0))
        num = -K
    if rad < 0:
        raise ConfigurationError("no real orbit: amplitude radicand negative")
    return CoulombOrbit(branch, g, c * math.sqrt(rad), num, alpha * D, phi0, degenerate)


def classify_coulomb(
    alpha: float, D: float, p_theta: float, E: float, m: float = 1.0, c: float = 1.0
) -> dict:
    """Which planar orbits at energy E (planar normalization) admit a relativistic reading.

    Motion needs ``E >= U_eff(r)`` somewhere; a relativistic reading needs
    ``m^2(E) >= 0`` and ``D - alpha/r >= 0`` on the whole accessible radial
    interval.  Returns the label ``"none"``, ``"nonrelativistic only"`` or
    ``"relativistic"`` plus the radial intervals examined.
    """
    m2 = m2_of_energy(E, m, c, D)
    # E - U_eff >= 0  <=>  b u^2 + a u - E <= 0 in u = 1/r > 0
    a = alpha * D / (m * c**2)
    b = (c**2 * p_theta**2 - alpha**2) / (2 * m * c**2)
    comps = _allowed_u_intervals(a, b, E)
    if not comps:
        return {"label": "none", "m2": m2, "intervals": []}
    ok = []
    for lo, hi in comps:
        cond = m2 >= 0
        # D - alpha u >= 0 on [lo, hi] (linear in u: check ends)
        for u in (lo, hi):
            if math.isinf(u):
                cond &= alpha < 0 or (alpha == 0 and D >= 0)
            else:
                cond &= D - alpha * u >= -1e-14 * (abs(D) + abs(alpha * u))
        ok.append(cond)
    label = "relativistic" if any(ok) else "nonrelativistic only"
    return {
        "label": label,
        "m2": m2,
        "intervals": [(1 / hi if hi > 0 else math.inf, 1 / lo if lo > 0 else math.inf)
                      for lo, hi in comps],
        "relativistic_components": ok,
    }


def _allowed_u_intervals(a, b, E):
    """Maximal subintervals of ``u > 0`` where ``b u^2 + a u - E <= 0``."""
    inf = math.inf
    if b == 0:
        if a == 0:
            return [(0.0, inf)] if E >= 0 else []
        root = E / a
        if a > 0:
            return [(0.0, root)] if root > 0 else []
        return [(max(root, 0.0), inf)]
    disc = a * a + 4 * b * E
    if disc < 0:
        return [] if b > 0 else [(0.0, inf)]
    s = math.sqrt(disc)
    r1, r2 = sorted(((-a - s) / (2 * b), (-a + s) / (2 * b)))
    if b > 0:
        lo, hi = max(r1, 0.0), r2
        return [(lo, hi)] if hi > 0 and hi > lo else []
    out = []
    if r1 > 0:
        out.append((0.0, r1))
    out.append((max(r2, 0.0), inf))
    return out


# -- numeric orbit against the closed form -----------------------------------------


@dataclass(frozen=True)
class OrbitReport:
    """Numeric planar orbit of the derived flow against :func:`coulomb_orbit_analytic`.

    ``sup_rel_r`` is the worst ``|r_num - r(phi)|/r(phi)`` over the segment;
    ``mass_relation`` the worst relative gap between ``m^2`` read off each state
    of the relativistic level set and ``m^2(E)`` from that state's energy.
    """

    branch: str
    energy: float
    planar_energy: float
    m2: float
    phi_span: float
    sup_rel_r: float
    mass_relation: float
    samples: int
    degenerate: bool


def _orbit_phase(orbit: CoulombOrbit, K: float, u: float, du: float) -> float:
    """``gamma (phi - phi0)`` at a state with ``u = 1/r`` and ``du/dphi``."""
    A, g = orbit.amplitude, orbit.gamma
    if orbit.branch == "precessing":
        return math.atan2(-K * du / g, K * u + orbit.alpha_D)
    return math.asinh(-K * du / (A * g))


def coulomb_orbit_check(
    entry: CatalogEntry,
    p_theta: float,
    r0: float = 2.0,
    p_r0: float = 0.0,
    tol: float = 1e-11,
    r_stop: float = None,
    n: int = 2000,
) -> OrbitReport:
    """Integrate the planar derived flow and compare ``r(phi)`` with the closed form.

    The precessing branch is followed for one radial period in angle; the fall
    branch until ``r`` drops to ``r_stop`` (default ``r0/5``).
    """
    from ..dynamics import integrate

    P = entry.params
    m, c, alpha, D = P["m"], P["c"], P["alpha"], P["D"]
    if P["dim"] != 2:
        raise ConfigurationError("coulomb_orbit_check needs the planar (dim=2) entry")
    z0 = np.array([r0, 0.0, p_r0, p_theta / r0])
    Et = entry.system(z0)
    E = planar_energy(Et, m, c, D)
    m2 = m2_of_energy(E, m, c, D)
    branch = _branch(alpha, p_theta, c)
    orbit = coulomb_orbit_analytic(branch, alpha, D, p_theta, m2, 0.0, m, c)
    K = c**2 * p_theta**2 - alpha**2
    x0 = _orbit_phase(orbit, K if branch == "precessing" else -K, 1 / r0, -p_r0 / p_theta)
    phi0 = -x0 / orbit.gamma

    if branch == "precessing":
        target = orbit.period
        guard = entry.flow_guard()
    else:
        r_stop = r0 / 5 if r_stop is None else r_stop
        target = math.inf
        base_guard = entry.flow_guard()
        guard = lambda z: base_guard(z) and math.hypot(z[0], z[1]) > r_stop  # noqa: E731

    T = 20.0
    while True:
        tr = integrate(entry.system, z0, T, tol=tol, guard=guard, meta="coulomb orbit")
        ts = np.linspace(0.0, tr.span, n * 4)
        Z = tr(ts)
        phi = np.unwrap(np.arctan2(Z[:, 1], Z[:, 0]))
        if phi[-1] * np.sign(p_theta) >= target or tr.exit is not None or T > 1e5:
            break
        T *= 2
    end = tr.span
    if branch == "precessing":
        end = ts[min(int(np.searchsorted(phi * np.sign(p_theta), target)) + 1, ts.size - 1)]
    ts = np.linspace(0.0, end, n)
    Z = tr(ts)
    phi = np.unwrap(np.arctan2(Z[:, 1], Z[:, 0]))
    orbit = CoulombOrbit(orbit.branch, orbit.gamma, orbit.amplitude, orbit.numerator,
                         orbit.alpha_D, phi0, orbit.degenerate)
    r_num = np.hypot(Z[:, 0], Z[:, 1])
    r_an = orbit(np.sign(p_theta) * phi)
    sup = float(np.max(np.abs(r_num - r_an) / r_an))

    # relativistic reading of each state: c^2 m^2 = (D - alpha/r)^2/c^2 - p^2
    worst = 0.0
    for z, r in zip(Z, r_num):
        e_i = planar_energy(float(entry.system(z)), m, c, D)
        m2_i = m2_of_energy(e_i, m, c, D)
        m2_state = ((D - alpha / r) ** 2 / c**2 - (z[2] ** 2 + z[3] ** 2)) / c**2
        worst = max(worst, abs(m2_state - m2_i) / abs(m2_i))
    return OrbitReport(branch, Et, E, m2, float(abs(phi[-1] - phi[0])), sup, float(worst), len(ts),
                       orbit.degenerate)
