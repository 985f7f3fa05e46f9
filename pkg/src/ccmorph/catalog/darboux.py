"""Darboux pairs for natural Hamiltonians and the Hietarinta form."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..core import ScalarField, _as_z
from ..dynamics import integrate, time_map
from ..errors import ConfigurationError, DomainError
from ..metamorph import MetamorphosisRule, ParamSystem, Substitution, constant_shift_form
from .base import CatalogEntry, norm2, positive_guard

_EXAMPLES = ("1d", "2d", "free")


def _potential(example: str):
    if example == "1d":
        return 1, lambda q: 1 / (1 + q[0] * q[0])
    if example == "2d":
        return 2, lambda q: 1 / (1 + q[0] * q[0] + 2 * q[1] * q[1])
    if example == "free":
        return 1, lambda q: 1.0 + 0 * q[0]
    raise ConfigurationError(f"darboux_pair: example must be one of {_EXAMPLES}, got {example!r}")


def darboux_pair(example: str = "1d", lam: float = 1.0) -> CatalogEntry:
    """``H = p^2/2 - lam U`` with flat metric, ``lam -> Ht`` and constant ``lam - 1``.

    The derived Hamiltonian is ``Ht = (p^2/2 - 1)/U`` with ``Omega = U``.  The
    third member, ``H' = p^2/2 - U`` (Lagrangian ``L' = qdot^2/2 + U``), is in
    ``references["H_prime"]``; :func:`darboux_check` compares its flow with
    the derived one.
    """
    dim, U = _potential(example)
    lam = float(lam)

    def H(q, p, lmb):
        return 0.5 * norm2(p) - lmb[0] * U(q)

    base = ParamSystem(dim, ("lambda",), H, (lam,), affine=True, name=f"H_darboux_{example}")
    rule = MetamorphosisRule((Substitution.affine("lambda", 0.0, 1.0),), {})
    sys = constant_shift_form(base, rule, 1.0, name=f"darboux_{example}~")

    def closed(q, p):
        return (0.5 * norm2(p) - 1) / U(q)

    h_prime = ScalarField(lambda q, p: 0.5 * norm2(p) - U(q), f"H'_{example}")
    if dim == 1:
        box = [(-2, 2), (-2.5, 2.5)]
        dyn = [(-1, 1), (1.6, 2.2)]
    else:
        box = [(-2, 2), (-2, 2), (-2, 2), (-2, 2)]
        dyn = [(-1, 1), (-1, 1), (1.2, 1.6), (0.8, 1.2)]
    return CatalogEntry(
        "darboux_pair",
        f"Darboux pair ({example})",
        {"example": example, "lam": lam},
        sys.base,
        sys.rule,
        ("Eq. (4.54)", "Eq. (4.55)", "Eq. (4.58)", "Eq. (4.63)", "Eq. (4.64)", "Eq. (4.69)"),
        box,
        tilde_closed_form=closed,
        closed_form_tag="Eq. (4.55)",
        guards=[positive_guard("U", lambda z: U(z[:dim]), desc="U > 1e-6")],
        dyn_box=dyn,
        references={"U": U, "H_prime": h_prime, "L_base": base.field(),
                    "omega": lambda q, p: U(q)},
        system=sys,
    )


@dataclass(frozen=True)
class DarbouxReport:
    """Outcome of one Darboux comparison.

    ``product`` is ``E' * Et`` from the recorded energies; ``product_drift`` the
    worst ``|H'(z') Ht(z~) - 1|`` over matched samples; ``sup_q`` the worst
    configuration distance between ``q'(t)`` and ``q~(t~(t/sqrt(Et)))``.
    """

    energy: float
    energy_prime: float
    product: float
    product_drift: float
    sup_q: float
    samples: int


def darboux_check(entry: CatalogEntry, x0, T_tilde: float = 10.0, tol: float = 1e-11,
                  n: int = 512, q_max: float = 5.0) -> DarbouxReport:
    """Integrate the derived flow and the ``H'`` flow and compare them.

    The ``H'`` flow starts at ``(q0, p0/sqrt(Et))``; this is the rescaling
    ``q'(t) = q(t/sqrt(Et); Et)`` applied to the base flow at ``lam = Et``,
    which shares its states with the derived flow.  With ``U`` decaying at
    infinity the derived flow escapes in finite time, so it stops once
    ``max |q_i|`` reaches ``q_max`` and the comparison covers that span.
    """
    if "H_prime" not in entry.references:
        raise ConfigurationError(f"{entry.id} is not a Darboux entry")
    sys = entry.system
    z0 = _as_z(x0)
    N = z0.size // 2
    E, _ = sys.solve(z0)
    if not E > 0:
        raise DomainError(f"Darboux rescaling needs Et > 0, got {E:.6g}")
    inside = entry.flow_guard()

    def guard(z):
        return inside(z) and float(np.max(np.abs(z[:N]))) < q_max

    tilde = integrate(sys, z0, T_tilde, tol=tol, guard=guard, meta="tilde")
    tmap = time_map(tilde, sys)
    s = math.sqrt(E)
    zp0 = np.concatenate([z0[:N], z0[N:] / s])
    Hp = entry.references["H_prime"]
    Ep = float(Hp(zp0))
    T_prime = s * tmap.t_end
    prime = integrate(Hp, zp0, T_prime, tol=tol, guard=guard, meta="prime")
    T_prime = min(T_prime, prime.span)
    tp = np.linspace(0.0, T_prime, n)
    tt = np.array([tmap.t_tilde(v / s) for v in tp])
    tt = np.clip(tt, 0.0, tilde.span)
    Zp = prime(tp)
    Zt = tilde(tt)
    sup_q = float(np.max(np.abs(Zp[:, :N] - Zt[:, :N])))
    drift = max(abs(float(Hp(a)) * float(entry.tilde_closed_form(b)) - 1.0)
                for a, b in zip(Zp, Zt))
    return DarbouxReport(E, Ep, E * Ep, drift, sup_q, n)


def hietarinta(h: float = 0.5, F: str = "quadratic", g: float = 1.0) -> CatalogEntry:
    """``H = H0 - g F`` with ``g -> G`` and constant ``g - h``: ``G = (H0 - h)/F``.

    ``H0`` is the planar isotropic oscillator; ``F`` is ``1 + (q1^2 + q2^2)/2``
    (``"quadratic"``) or ``1`` (``"unit"``).
    """
    h, g = float(h), float(g)
    if F == "quadratic":
        Ff = lambda q: 1 + 0.5 * (q[0] * q[0] + q[1] * q[1])  # noqa: E731
    elif F == "unit":
        Ff = lambda q: 1.0 + 0 * q[0]  # noqa: E731
    else:
        raise ConfigurationError(f"hietarinta: F must be 'quadratic' or 'unit', got {F!r}")

    def H0(q, p):
        return 0.5 * norm2(p) + 0.5 * (q[0] * q[0] + q[1] * q[1])

    def H(q, p, lam):
        return H0(q, p) - lam[0] * Ff(q)

    base = ParamSystem(2, ("g",), H, (g,), affine=True, name="H_hietarinta")
    rule = MetamorphosisRule((Substitution.affine("g", 0.0, 1.0),), {})
    sys = constant_shift_form(base, rule, h, name="hietarinta~")

    def closed(q, p):
        return (H0(q, p) - h) / Ff(q)

    return CatalogEntry(
        "hietarinta",
        "Hietarinta coupling-constant form",
        {"h": h, "F": F, "g": g},
        sys.base,
        sys.rule,
        ("Eq. (4.70)", "Eq. (4.71)"),
        [(-1.5, 1.5)] * 4,
        tilde_closed_form=closed,
        closed_form_tag="Eq. (4.71)",
        guards=[positive_guard("F", lambda z: Ff(z[:2]), desc="F > 1e-6")],
        references={"omega": lambda q, p: Ff(q)},
        system=sys,
    )

