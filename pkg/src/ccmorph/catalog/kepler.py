"""Kepler-related systems with ``alpha -> alpha + beta Ht`` and the curved SW system."""

from __future__ import annotations

import math

from ..core import cos, sin, sinh, sqrt, tan, tanh
from ..errors import ConfigurationError, DomainError
from ..metamorph import MetamorphosisRule, Observable, ParamSystem, Substitution
from .base import (
    CatalogEntry,
    Guard,
    Integral,
    _sum,
    nonzero_guard,
    norm2,
    positive_guard,
)
from .oscillator import _angular_momentum


def _cross(a, b):
    return [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]


def runge_lenz(q, p, alpha, m=1.0):
    """``A = L x p - m alpha q/|q|`` for ``H = p^2/2m + alpha/|q|`` (vector)."""
    L = _cross(q, p)
    r = sqrt(norm2(q))
    Lp = _cross(L, p)
    return [Lp[i] - m * alpha * q[i] / r for i in range(3)]


def _rl_component(i):
    return Observable(f"A{i + 1}", lambda q, p, lam: runge_lenz(q, p, lam[0])[i])


def _rl_lifted_closed(i, alpha, beta, closed, power):
    # A~ = A - m beta H~ q/|q|^power  (power 1: consistent reading; 2: as printed)
    def f(q, p):
        h = closed(q, p)
        r = sqrt(norm2(q))
        return runge_lenz(q, p, alpha)[i] - beta * h * q[i] / r**power

    return f


def _pair_integral(i, j, ki, kj, name):
    """``(q_i p_j - q_j p_i)^2/2 + k_i q_j^2/q_i^2 + k_j q_i^2/q_j^2``."""

    def f(q, p, lam):
        Lij = q[i] * p[j] - q[j] * p[i]
        return 0.5 * Lij * Lij + ki * q[j] ** 2 / q[i] ** 2 + kj * q[i] ** 2 / q[j] ** 2

    return Observable(name, f)


def _kepler_common(alpha, beta, who):
    alpha, beta = float(alpha), float(beta)
    if alpha >= 0:
        raise ConfigurationError(f"{who}: alpha must be negative (attractive)")
    if beta > 0:
        raise ConfigurationError(f"{who}: beta must be <= 0 for regularity")
    return alpha, beta


def kepler(alpha: float = -1.0, beta: float = -0.5) -> CatalogEntry:
    """Kepler problem with ``alpha -> alpha + beta Ht``."""
    alpha, beta = _kepler_common(alpha, beta, "kepler")

    def H(q, p, lam):
        return 0.5 * norm2(p) + lam[0] / sqrt(norm2(q))

    base = ParamSystem(3, ("alpha",), H, (alpha,), affine=True, name="H_kepler")
    rule = MetamorphosisRule((Substitution.affine("alpha", alpha, beta),), {"beta": beta})

    def closed(q, p):
        r = sqrt(norm2(q))
        return r / (r - beta) * (0.5 * norm2(p) + alpha / r)

    integrals = _angular_momentum()
    for i in range(3):
        integrals.append(
            Integral(
                f"A{i + 1}",
                _rl_component(i),
                lifted_closed_form=_rl_lifted_closed(i, alpha, beta, closed, 1),
            )
        )
    refs = {
        "omega": lambda q, p: 1 - beta / sqrt(norm2(q)),
        "A_tilde_printed": [_rl_lifted_closed(i, alpha, beta, closed, 2) for i in range(3)],
        "A_tilde": [_rl_lifted_closed(i, alpha, beta, closed, 1) for i in range(3)],
    }
    return CatalogEntry(
        "kepler",
        "Kepler, alpha -> alpha + beta H~",
        {"alpha": alpha, "beta": beta},
        base,
        rule,
        ("Eq. (3.42)", "Eq. (3.43)", "Eq. (3.44)"),
        [(-2, 2), (-2, 2)],
        tilde_closed_form=closed,
        closed_form_tag="Eq. (3.43)",
        integrals=integrals,
        guards=[positive_guard("r", lambda z: math.sqrt(z[0] ** 2 + z[1] ** 2 + z[2] ** 2),
                               desc="|q| > 1e-6")],
        dyn_box=[(1.0, 2.0), (-0.3, 0.3), (-0.3, 0.3), (-0.2, 0.2), (0.6, 1.0), (-0.2, 0.2)],
        references=refs,
    )


def kepler_generalized(alpha: float = -1.0, k=(0.05, 0.05, 0.05), beta: float = -0.5):
    """Kepler plus ``sum k_i/q_i^2`` with ``alpha -> alpha + beta Ht``."""
    alpha, beta = _kepler_common(alpha, beta, "kepler_generalized")
    k = tuple(float(v) for v in k)
    if len(k) != 3:
        raise ConfigurationError("kepler_generalized: k needs 3 components")

    def V(q):
        return _sum(k[i] / (q[i] * q[i]) for i in range(3))

    def H(q, p, lam):
        return 0.5 * norm2(p) + lam[0] / sqrt(norm2(q)) + V(q)

    base = ParamSystem(3, ("alpha",), H, (alpha,), affine=True, name="H_kepler_gen")
    rule = MetamorphosisRule((Substitution.affine("alpha", alpha, beta),), {"beta": beta})

    def closed(q, p):
        r = sqrt(norm2(q))
        return r / (r - beta) * (0.5 * norm2(p) + alpha / r + V(q))

    integrals = [
        Integral("K12", _pair_integral(0, 1, k[0], k[1], "K12")),
        Integral("K23", _pair_integral(1, 2, k[1], k[2], "K23")),
        Integral("K31", _pair_integral(2, 0, k[2], k[0], "K31")),
    ]
    return CatalogEntry(
        "kepler_generalized",
        "generalized Kepler, alpha -> alpha + beta H~",
        {"alpha": alpha, "k": list(k), "beta": beta},
        base,
        rule,
        ("Eq. (3.45)", "Eq. (3.46)"),
        [(0.3, 2), (0.3, 2), (0.3, 2), (-1, 1), (-1, 1), (-1, 1)],
        tilde_closed_form=closed,
        closed_form_tag="Eq. (3.46)",
        integrals=integrals,
        guards=[nonzero_guard(f"q{i + 1}", (lambda i: lambda z: z[i])(i)) for i in range(3)],
        references={"omega": lambda q, p: 1 - beta / sqrt(norm2(q))},
    )


# -- constant curvature -------------------------------------------------------


def s_kappa(r, kappa: float):
    """``sin(sqrt(k) r)/sqrt(k)``, ``r`` or ``sinh(sqrt(-k) r)/sqrt(-k)`` by sign of k."""
    if kappa > 0:
        s = math.sqrt(kappa)
        return sin(s * r) / s
    if kappa < 0:
        s = math.sqrt(-kappa)
        return sinh(s * r) / s
    return r


def t_kappa(r, kappa: float):
    """``tan(sqrt(k) r)/sqrt(k)``, ``r`` or ``tanh(sqrt(-k) r)/sqrt(-k)``."""
    if kappa > 0:
        s = math.sqrt(kappa)
        return tan(s * r) / s
    if kappa < 0:
        s = math.sqrt(-kappa)
        return tanh(s * r) / s
    return r


def curved_sw(
    kappa: float = 0.1, alpha: float = 1.0, k=(0.0, 0.0, 0.1), mu: float = 0.1
) -> CatalogEntry:
    """Smorodinsky-Winternitz on a space of constant curvature ``kappa``.

    Chart ``(r, theta, phi, p_r, p_theta, p_phi)``; the coupling ``alpha^2``
    goes to ``alpha^2 + 2 mu Ht``.  ``p_phi`` is conserved only when
    ``k1 = k2 = 0``; the screen records which case applies.
    """
    kappa, alpha, mu = float(kappa), float(alpha), float(mu)
    k = tuple(float(v) for v in k)
    if len(k) != 3:
        raise ConfigurationError("curved_sw: k needs 3 components")

    def embed(r, th, ph):
        s = s_kappa(r, kappa)
        return [s * sin(th) * cos(ph), s * sin(th) * sin(ph), s * cos(th)]

    def V(q):
        r, th, ph = q
        qk = embed(r, th, ph)
        return _sum(k[i] / (qk[i] * qk[i]) for i in range(3) if k[i] != 0)

    def kinetic(q, p):
        r, th, _ = q
        s = s_kappa(r, kappa)
        st = sin(th)
        return 0.5 * (p[0] * p[0] + (p[1] * p[1] + p[2] * p[2] / (st * st)) / (s * s))

    def H(q, p, lam):
        T = t_kappa(q[0], kappa)
        return kinetic(q, p) + 0.5 * lam[0] * T * T + V(q)

    base = ParamSystem(3, ("alpha2",), H, (alpha**2,), affine=True, name="H_curved_sw")
    rule = MetamorphosisRule((Substitution.affine("alpha2", alpha**2, 2 * mu),), {"mu": mu})

    def closed(q, p):
        T = t_kappa(q[0], kappa)
        return (kinetic(q, p) + 0.5 * alpha**2 * T * T + V(q)) / (1 - mu * T * T)

    r_max = 1.5
    if kappa > 0:
        r_max = min(r_max, 0.95 * math.pi / (2 * math.sqrt(kappa)))

    def den(z):
        T = t_kappa(z[0], kappa)
        return 1 - mu * T * T

    guards = [
        positive_guard("r", lambda z: z[0], desc="r > 1e-6"),
        positive_guard("sin theta", lambda z: math.sin(z[1]), desc="sin(theta) > 1e-6"),
        positive_guard("1 - mu T^2", den, desc="1 - mu T_kappa(r)^2 > 1e-6"),
    ]
    if kappa > 0:
        guards.append(
            Guard("chart", lambda z: math.sqrt(kappa) * z[0] < math.pi / 2,
                  "sqrt(kappa) r < pi/2")
        )
    for i in range(3):
        if k[i] != 0:
            guards.append(
                nonzero_guard(f"q_kappa{i + 1}",
                              (lambda i: lambda z: embed(z[0], z[1], z[2])[i])(i))
            )
    integrals = [
        Integral("p_phi", Observable("p_phi", lambda q, p, lam: p[2]),
                 note="cyclic only when k1 = k2 = 0")
    ]
    return CatalogEntry(
        "curved_sw",
        "curved Smorodinsky-Winternitz, alpha^2 -> alpha^2 + 2 mu H~",
        {"kappa": kappa, "alpha": alpha, "k": list(k), "mu": mu},
        base,
        rule,
        ("Eq. (3.47)", "Eq. (3.48)", "Eq. (3.49)", "Eq. (3.50)"),
        [(0.5, r_max), (0.5, 1.2), (0.0, 2 * math.pi), (-0.5, 0.5), (-0.5, 0.5), (-0.5, 0.5)],
        tilde_closed_form=closed,
        closed_form_tag="Eq. (3.47)",
        integrals=integrals,
        guards=guards,
        references={"s_kappa": s_kappa, "t_kappa": t_kappa, "embed": embed},
    )


def curved_to_flat(z):
    """Map a chart point ``(r, th, ph, p_r, p_th, p_ph)`` at kappa = 0 to Cartesian ``(q, p)``."""
    r, th, ph, pr, pth, pph = (float(v) for v in z)
    st, ct, sp, cp = math.sin(th), math.cos(th), math.sin(ph), math.cos(ph)
    q = [r * st * cp, r * st * sp, r * ct]
    # p_cart solves p_r = p.dq/dr, p_th = p.dq/dth, p_ph = p.dq/dph
    e_r = [st * cp, st * sp, ct]
    e_th = [ct * cp, ct * sp, -st]
    e_ph = [-sp, cp, 0.0]
    if r * st == 0:
        raise DomainError("chart singular at r sin(theta) = 0")
    p = [pr * e_r[i] + pth / r * e_th[i] + pph / (r * st) * e_ph[i] for i in range(3)]
    return q + p
