"""Registry of concrete systems, parameter schemas and the printed-formula screen."""

from __future__ import annotations

import inspect
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..core import Rng, ScalarField, sqrt
from ..errors import ConfigurationError
from .base import (
    GUARD_RADIUS,
    SCREEN_POINTS,
    SCREEN_SEED,
    SCREEN_TOL,
    CatalogEntry,
    Guard,
    Integral,
    PrintedFormula,
    norm2,
    positive_guard,
    screen_residual,
)
from .darboux import DarbouxReport, darboux_check, darboux_pair, hietarinta
from .henon_heiles import (
    henon_heiles,
    k_case_i,
    k_case_iii,
    k_tilde_printed_i,
    k_tilde_printed_iii,
)
from .kepler import (
    curved_sw,
    curved_to_flat,
    kepler,
    kepler_generalized,
    runge_lenz,
    s_kappa,
    t_kappa,
)
from .oscillator import (
    k4_action_angle,
    oscillator_general,
    oscillator_iso,
    oscillator_linear,
    oscillator_planar,
    smorodinsky_winternitz,
)
from .relativistic import (
    CoulombOrbit,
    classify_coulomb,
    coulomb_orbit_analytic,
    m2_of_energy,
    planar_energy,
    relativistic_coulomb,
    relativistic_em,
    u_eff,
)


def _relativistic_em_named(m=1.0, c=10.0, e=1.0, potential="coulomb", strength=-1.0,
                           B=0.0, D=9.95, dim=3):
    """Registry form of :func:`relativistic_em` with named potentials.

    ``potential="coulomb"`` is ``phi = strength/r``; ``"uniform"`` is
    ``phi = strength q1``.  ``B`` adds the symmetric-gauge vector potential of a
    uniform field along q3 (dim 3 only).
    """
    dim = int(dim)
    if potential == "coulomb":
        def phi(q):
            return strength / sqrt(norm2(q))
    elif potential == "uniform":
        def phi(q):
            return strength * q[0]
    else:
        raise ConfigurationError(
            f"relativistic_em: potential must be 'coulomb' or 'uniform', got {potential!r}"
        )
    if B and dim != 3:
        raise ConfigurationError("relativistic_em: B needs dim = 3")

    def A(q):
        return [-0.5 * B * q[1], 0.5 * B * q[0], 0.0 * q[2]]

    box = [(1.5, 3.0)] + [(-0.5, 0.5)] * (dim - 1) + [(-0.3, 0.3)] * dim
    guards = ()
    if potential == "coulomb":
        guards = (positive_guard("r", lambda z: math.sqrt(float(np.sum(np.asarray(z[:dim]) ** 2))),
                                 desc="r > 1e-6"),)
    return relativistic_em(
        m, c, e, phi, A if B else None, D, dim, box=box, extra_guards=guards,
        params={"m": m, "c": c, "e": e, "potential": potential, "strength": strength,
                "B": B, "D": D, "dim": dim},
    )


_FACTORIES: dict = {
    "oscillator_iso": oscillator_iso,
    "oscillator_linear": oscillator_linear,
    "oscillator_general": oscillator_general,
    "oscillator_planar": oscillator_planar,
    "smorodinsky_winternitz": smorodinsky_winternitz,
    "kepler": kepler,
    "kepler_generalized": kepler_generalized,
    "curved_sw": curved_sw,
    "henon_heiles": henon_heiles,
    "relativistic_em": _relativistic_em_named,
    "relativistic_coulomb": relativistic_coulomb,
    "darboux_pair": darboux_pair,
    "hietarinta": hietarinta,
}


def ids() -> list:
    """Registered entry ids in listing order."""
    return list(_FACTORIES)


def schema(entry_id: str) -> dict:
    """Parameter names and defaults of an entry constructor."""
    fn = _factory(entry_id)
    out = {}
    for name, par in inspect.signature(fn).parameters.items():
        d = par.default
        out[name] = list(d) if isinstance(d, tuple) else d
    return out


def _factory(entry_id: str) -> Callable:
    try:
        return _FACTORIES[entry_id]
    except KeyError:
        raise ConfigurationError(f"unknown catalog entry {entry_id!r}") from None


def get(entry_id: str, **params) -> CatalogEntry:
    """Construct a registered entry; unknown parameter names are rejected."""
    fn = _factory(entry_id)
    allowed = schema(entry_id)
    bad = sorted(set(params) - set(allowed))
    if bad:
        raise ConfigurationError(f"{entry_id}: unknown parameter(s) {', '.join(bad)}")
    try:
        return fn(**params)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigurationError):
            raise
        raise ConfigurationError(f"{entry_id}: {exc}") from exc


def listing() -> list:
    """Description of every default-constructed entry (ids, params, guards, tags)."""
    out = []
    for eid in ids():
        d = get(eid).describe()
        d["params"] = schema(eid)
        out.append(d)
    return out


# -- printed-formula screen -------------------------------------------------------


@dataclass(frozen=True)
class ScreenRecord:
    """One printed formula checked against the generic construction.

    ``status`` is ``"pass"`` when ``residual < tol``, else ``"discrepancy"``;
    ``expected`` is the status the library documents for that formula.
    """

    tag: str
    name: str
    residual: float
    tol: float
    status: str
    expected: str
    detail: dict

    @property
    def as_expected(self) -> bool:
        return self.status == self.expected

    def to_dict(self) -> dict:
        return {
            "tag": self.tag,
            "name": self.name,
            "residual": self.residual,
            "tol": self.tol,
            "status": self.status,
            "expected": self.expected,
            "detail": self.detail,
        }


def _record(tag, name, residual, expected, tol=SCREEN_TOL, **detail):
    status = "pass" if residual < tol else "discrepancy"
    return ScreenRecord(tag, name, float(residual), tol, status, expected, detail)


def _rel_diff(a, b):
    return abs(a - b) / (1 + abs(b))


def _field(fn, name):
    return ScalarField(fn, name)


def _hh_records(n, seed):
    out = []
    A, B, D, a, b = 1.0, 1.0, 0.1, 0.05, 0.02
    e = henon_heiles("i", A, B, D, a, b)
    pts = e.sample(Rng(seed), n)
    Ht = e.tilde_closed_form
    lift = e.lifted("K")

    # base K, printed last bracket
    for it in e.integrals:
        out.append(_record("Eq. (3.55)", f"henon_heiles(i).{it.name}", it.residual,
                           "discrepancy" if it.printed else "pass", note=it.note))

    # lifted K with the garbled coefficient read as kappa: least-squares fit
    num = den = 0.0
    for x in pts:
        h = e.system(x)
        gx = float(k_tilde_printed_i(x.q, x.p, h, A, B, D, a, b, 0.0))
        ref = float(lift(x))
        w = h * x.q[0] ** 2
        num += (gx - ref) * w
        den += w * w
    kappa = num / den
    kappa_ref = 16 * a * A
    printed = _field(lambda q, p: k_tilde_printed_i(q, p, Ht.f(q, p), A, B, D, a, b,
                                                    kappa_ref), "K~ (i) printed")
    diff = max(_rel_diff(float(printed(x)), float(lift(x))) for x in pts)
    out.append(_record(
        "Eq. (3.54)", "henon_heiles(i).K_tilde_printed", screen_residual(printed, Ht, pts), "pass",
        kappa_fit=kappa, kappa_over_aA=kappa / (a * A), kappa_used=kappa_ref, lift_difference=diff,
    ))

    # case (iii)
    A, D, a = 1.0, 0.1, 0.05
    e = henon_heiles("iii", A, None, D, a)
    pts = e.sample(Rng(seed), n)
    Ht = e.tilde_closed_form
    lift = e.lifted("K")
    for it in e.integrals:
        out.append(_record("Eq. (3.60)", f"henon_heiles(iii).{it.name}", it.residual,
                           "discrepancy" if it.printed else "pass", note=it.note))
    for corrected in (False, True):
        F = _field(lambda q, p, c=corrected: k_tilde_printed_iii(q, p, Ht.f(q, p), A, D, a, c),
                   "K~ (iii)")
        diff = max(_rel_diff(float(F(x)), float(lift(x))) for x in pts)
        out.append(_record(
            "Eq. (3.59)",
            "henon_heiles(iii).K_tilde_" + ("corrected" if corrected else "printed"),
            screen_residual(F, Ht, pts),
            "pass" if corrected else "discrepancy",
            lift_difference=diff,
            note="a^2 h^2 sign flipped" if corrected else "as printed",
        ))

    # closed form of the C_tilde variant in case (iii)
    e = henon_heiles("iii", A, None, D, a, variant="C_tilde")
    pts = e.sample(Rng(seed), n)
    pr = e.references["closed_printed"]
    off = e.references["closed_printed_offset"]
    raw = max(_rel_diff(float(pr(x.q, x.p)), e.system(x)) for x in pts)
    fixed = max(_rel_diff(float(pr(x.q, x.p)) + off, e.system(x)) for x in pts)
    out.append(_record("Eq. (3.61)", "henon_heiles(iii,C_tilde).closed_printed", raw,
                       "discrepancy", tol=1e-12, offset=off))
    out.append(_record("Eq. (3.61)", "henon_heiles(iii,C_tilde).closed_plus_A/2a", fixed,
                       "pass", tol=1e-12, offset=off))
    return out


def _sw_records(n, seed):
    e = smorodinsky_winternitz()
    out = []
    for it in e.integrals:
        if it.name.startswith("K4"):
            out.append(_record("Eq. (3.38)", f"smorodinsky_winternitz.{it.name}", it.residual,
                               "discrepancy" if it.printed else "pass", note=it.note))
    pts = e.sample(Rng(seed), n)
    aa = e.references["K4_action_angle"]
    k4 = e.integral("K4").observable
    diff = max(_rel_diff(float(aa(x.q, x.p)), float(k4(x, e.base.defaults))) for x in pts)
    out.append(_record("Eq. (3.41)", "smorodinsky_winternitz.K4_action_angle_vs_polynomial",
                       diff, "pass", tol=1e-12))
    return out


def _kepler_records(n, seed):
    e = kepler()
    pts = e.sample(Rng(seed), n)
    out = []
    for key, expected in (("A_tilde_printed", "discrepancy"), ("A_tilde", "pass")):
        worst = 0.0
        for i in range(3):
            lift = e.lifted(f"A{i + 1}")
            f = e.references[key][i]
            worst = max(worst, max(_rel_diff(float(f(x.q, x.p)), float(lift(x))) for x in pts))
        out.append(_record("Eq. (3.44)", f"kepler.{key}", worst, expected, tol=1e-10,
                           note="q/|q|^2 as printed" if expected == "discrepancy" else "q/|q|"))
    return out


def _coulomb_records():
    alpha, c, m, D, pth = -1.0, 10.0, 1.0, 9.95, 0.5
    r0 = 2.0
    e = relativistic_coulomb(m, c, alpha, D, dim=2)
    z0 = np.array([r0, 0.0, 0.0, pth / r0])
    Et = e.system(z0)
    E = planar_energy(Et, m, c, D)
    orbit = coulomb_orbit_analytic("precessing", alpha, D, pth, m2_of_energy(E, m, c, D),
                                   0.0, m, c)
    phi = np.linspace(0, orbit.period, 64)
    r_ok = orbit(phi)
    r_pr = orbit.printed(phi)
    # the correct branch starts at r0 (p_r = 0 at phi = 0)
    start = abs(r_ok[0] - r0) / r0
    out = [
        _record("Eq. (rel.26)", "coulomb_orbit.printed_sign",
                float(np.max(np.abs(r_pr - r_ok) / np.abs(r_ok))), "discrepancy", tol=1e-6,
                note="+alpha D in the denominator as printed"),
        _record("Eq. (rel.26)", "coulomb_orbit.initial_radius", start, "pass", tol=1e-12),
    ]
    r = np.linspace(0.5, 3.0, 11)
    first = u_eff(r, alpha, D, pth, m, c)
    second = alpha * D / (m * c**2 * r**2) + (c**2 * pth**2 - alpha**2) / (2 * m * c**2 * r**2)
    out.append(_record("Eq. (rel.18)", "u_eff.second_form",
                       float(np.max(np.abs(second - first) / (1 + np.abs(first)))), "discrepancy",
                       tol=1e-12, note="r^2 under alpha D as printed"))
    return out


def typo_screen(n: int = SCREEN_POINTS, seed: int = SCREEN_SEED) -> list:
    """Check every printed formula kept for cross-reference; returns ScreenRecords."""
    return _hh_records(n, seed) + _sw_records(n, seed) + _kepler_records(n, seed) + _coulomb_records()


__all__ = [
    "GUARD_RADIUS",
    "SCREEN_POINTS",
    "SCREEN_SEED",
    "SCREEN_TOL",
    "CatalogEntry",
    "CoulombOrbit",
    "DarbouxReport",
    "Guard",
    "Integral",
    "PrintedFormula",
    "ScreenRecord",
    "classify_coulomb",
    "coulomb_orbit_analytic",
    "curved_sw",
    "curved_to_flat",
    "darboux_check",
    "darboux_pair",
    "get",
    "henon_heiles",
    "hietarinta",
    "ids",
    "k4_action_angle",
    "k_case_i",
    "k_case_iii",
    "kepler",
    "kepler_generalized",
    "listing",
    "m2_of_energy",
    "oscillator_general",
    "oscillator_iso",
    "oscillator_linear",
    "oscillator_planar",
    "planar_energy",
    "relativistic_coulomb",
    "relativistic_em",
    "runge_lenz",
    "s_kappa",
    "schema",
    "screen_residual",
    "smorodinsky_winternitz",
    "t_kappa",
    "typo_screen",
    "u_eff",
]
