"""Isotropic, linearly shifted and generalized oscillators; Smorodinsky-Winternitz."""

from __future__ import annotations

from ..algebra import LadderFrame
from ..core import sqrt
from ..errors import ConfigurationError
from ..metamorph import (
    MetamorphosisRule,
    Observable,
    ParamSystem,
    Substitution,
    constant_shift_form,
)
from .base import (
    CatalogEntry,
    Guard,
    Integral,
    _sum,
    nonzero_guard,
    norm2,
    positive_guard,
)


def _angular_momentum(N=3):
    def comp(i, j, name):
        return Observable(name, lambda q, p, lam: q[i] * p[j] - q[j] * p[i])

    return [
        Integral("L1", comp(1, 2, "L1")),
        Integral("L2", comp(2, 0, "L2")),
        Integral("L3", comp(0, 1, "L3")),
    ]


def _window_guard(omega, mu):
    if mu <= 0:
        return None
    w = omega**2 / (2 * mu)
    return Guard("window", lambda h: h < w, f"E~ < omega^2/2mu = {w:.6g}")


def _su3_integrals(frame, base):
    return [
        Integral(o.name, o, note="su(3) ladder bilinear") for o in frame.observables(base)
    ]


def oscillator_iso(omega: float = 1.0, mu: float = 0.1) -> CatalogEntry:
    """3D isotropic oscillator with ``omega^2 -> omega^2 - 2 mu Ht``."""
    omega, mu = float(omega), float(mu)
    if omega <= 0:
        raise ConfigurationError("oscillator_iso: omega must be positive")

    def H(q, p, lam):
        return 0.5 * (norm2(p) + lam[0] * norm2(q))

    base = ParamSystem(3, ("omega2",), H, (omega**2,), affine=True, name="H_osc")
    rule = MetamorphosisRule((Substitution.affine("omega2", omega**2, -2 * mu),), {"mu": mu})

    def closed(q, p):
        return 0.5 * (norm2(p) + omega**2 * norm2(q)) / (1 + mu * norm2(q))

    frame = LadderFrame("omega2", None, omega, mu)
    guards = []
    if mu < 0:
        guards.append(
            positive_guard("1+mu q^2", lambda z: 1 + mu * norm2(z[:3]), desc="1 + mu q^2 > 1e-6")
        )
    return CatalogEntry(
        "oscillator_iso",
        "isotropic oscillator, omega^2 -> omega^2 - 2 mu H~",
        {"omega": omega, "mu": mu},
        base,
        rule,
        ("Eq. (3.17)", "Eq. (3.23)", "Eq. (3.24)", "Eq. (3.25)", "Eq. (3.27)", "Eq. (3.28)"),
        [(-1, 1), (-1, 1)],
        tilde_closed_form=closed,
        closed_form_tag="Eq. (3.24)",
        integrals=_su3_integrals(frame, base) + _angular_momentum(),
        guards=guards,
        energy_guard=_window_guard(omega, mu),
        references={"omega": lambda q, p: 1 + mu * norm2(q)},
        frame=frame,
    )


def oscillator_linear(omega: float = 1.0, k=(0.3, -0.2, 0.1), mu: float = 0.1) -> CatalogEntry:
    """Oscillator with a linear term ``k.q``; only ``omega^2`` is substituted."""
    omega, mu = float(omega), float(mu)
    k = tuple(float(v) for v in k)
    if len(k) != 3:
        raise ConfigurationError("oscillator_linear: k needs 3 components")

    def H(q, p, lam):
        return 0.5 * (norm2(p) + lam[0] * norm2(q)) + lam[1] * q[0] + lam[2] * q[1] + lam[3] * q[2]

    base = ParamSystem(
        3, ("omega2", "k1", "k2", "k3"), H, (omega**2,) + k, affine=True, name="H_osc_lin"
    )
    rule = MetamorphosisRule((Substitution.affine("omega2", omega**2, -2 * mu),), {"mu": mu})

    def closed(q, p):
        kq = k[0] * q[0] + k[1] * q[1] + k[2] * q[2]
        return (0.5 * (norm2(p) + omega**2 * norm2(q)) + kq) / (1 + mu * norm2(q))

    def shifted_oscillator(q, p):
        # canonical shift Q = q + k/omega^2 completes the square
        Q = [q[i] + k[i] / omega**2 for i in range(3)]
        return 0.5 * (norm2(p) + omega**2 * norm2(Q)) - norm2(k) / (2 * omega**2)

    frame = LadderFrame("omega2", ("k1", "k2", "k3"), omega, mu)
    guards = []
    if mu < 0:
        guards.append(positive_guard("1+mu q^2", lambda z: 1 + mu * norm2(z[:3])))
    return CatalogEntry(
        "oscillator_linear",
        "oscillator with linear term, omega^2 -> omega^2 - 2 mu H~",
        {"omega": omega, "k": list(k), "mu": mu},
        base,
        rule,
        ("Eq. (3.29)", "Eq. (3.30)", "Eq. (3.32)", "Eq. (3.33)"),
        [(-1, 1), (-1, 1)],
        tilde_closed_form=closed,
        closed_form_tag="Eq. (3.32)",
        integrals=_su3_integrals(frame, base),
        guards=guards,
        energy_guard=_window_guard(omega, mu),
        references={"shifted_oscillator": shifted_oscillator},
        frame=frame,
    )


def oscillator_general(
    omega: float = 1.0,
    k=(0.2, -0.1),
    l=(0.1, 0.05),
    h: float = 0.0,
    h0: float = 0.0,
    mu: float = 0.1,
    preset: str = None,
) -> CatalogEntry:
    """Oscillator plus constant with ``omega^2, k, h`` all traded for the energy.

    Substitutions ``omega^2 -> omega^2 - 2 mu Ht``, ``k -> k - l Ht``,
    ``h -> h - h0 Ht``.  ``preset="reduction"`` is the 2D case
    ``l = e1, k = e2, mu = 0, h0 = -1``; ``preset="planar"`` returns
    :func:`oscillator_planar`.
    """
    if preset == "planar":
        return oscillator_planar(omega=omega, h0=h0)
    if preset == "reduction":
        k, l, mu, h0 = (0.0, 1.0), (1.0, 0.0), 0.0, -1.0
    elif preset is not None:
        raise ConfigurationError(f"oscillator_general: unknown preset {preset!r}")
    omega, mu, h, h0 = float(omega), float(mu), float(h), float(h0)
    k = tuple(float(v) for v in k)
    l = tuple(float(v) for v in l)
    N = len(k)
    if len(l) != N or N not in (1, 2, 3):
        raise ConfigurationError("oscillator_general: k and l need equal length 1..3")
    names = ("omega2",) + tuple(f"k{i + 1}" for i in range(N)) + ("h",)

    def H(q, p, lam):
        kq = _sum(lam[1 + i] * q[i] for i in range(N))
        return 0.5 * (norm2(p) + lam[0] * norm2(q)) + kq + lam[N + 1]

    base = ParamSystem(N, names, H, (omega**2,) + k + (h,), affine=True, name="H_osc_gen")
    subs = [Substitution.affine("omega2", omega**2, -2 * mu)]
    subs += [Substitution.affine(f"k{i + 1}", k[i], -l[i]) for i in range(N)]
    subs.append(Substitution.affine("h", h, -h0))
    rule = MetamorphosisRule(tuple(subs), {"mu": mu, "l": l, "h0": h0})

    def den(q):
        return mu * norm2(q) + _sum(l[i] * q[i] for i in range(N)) + h0 + 1

    def closed(q, p):
        num = 0.5 * norm2(p) + 0.5 * omega**2 * norm2(q) + _sum(k[i] * q[i] for i in range(N)) + h
        return num / den(q)

    if preset == "reduction":
        box = [(0.2, 1.5)] + [(-1, 1)] * (N - 1) + [(-1, 1)] * N
    else:
        box = [(-1, 1), (-1, 1)]
    return CatalogEntry(
        "oscillator_general",
        "oscillator with omega^2, k and h all depending on H~",
        {"omega": omega, "k": list(k), "l": list(l), "h": h, "h0": h0, "mu": mu, "preset": preset},
        base,
        rule,
        ("Eq. (3.29)", "Eq. (3.51)"),
        box,
        tilde_closed_form=closed,
        closed_form_tag="Eq. (3.51)",
        guards=[positive_guard("denominator", lambda z: den(z[:N]),
                               desc="mu q^2 + l.q + h0 + 1 > 1e-6")],
        references={"omega": lambda q, p: den(q)},
    )


def oscillator_planar(omega: float = 1.0, k2: float = 1.0, h0: float = 0.0) -> CatalogEntry:
    """2D superintegrable oscillator with ``h -> h0 + Ht`` and ``k1 -> -Ht``.

    Omega equals ``q1``, so the entry lives on ``q1 > 0``.
    """
    omega, k2, h0 = float(omega), float(k2), float(h0)

    def H(q, p, lam):
        return (
            0.5 * norm2(p)
            + 0.5 * omega**2 * (4 * q[0] * q[0] + q[1] * q[1])
            + lam[0] * q[0]
            + k2 / (q[1] * q[1])
        )

    inner = ParamSystem(2, ("k1",), H, (0.0,), affine=True, name="H_planar")
    # the constant h of the base is the shift slot: h -> h0 + H~ means d = -h0
    sys = constant_shift_form(inner, MetamorphosisRule((Substitution.affine("k1", 0.0, -1.0),)),
                              -h0, name="oscillator_planar~")

    def closed(q, p):
        return (
            norm2(p) / (2 * q[0])
            + omega**2 * (4 * q[0] ** 2 + q[1] ** 2) / (2 * q[0])
            + h0 / q[0]
            + k2 / (q[0] * q[1] ** 2)
        )

    return CatalogEntry(
        "oscillator_planar",
        "2D oscillator with h -> h0 + H~, k1 -> -H~",
        {"omega": omega, "k2": k2, "h0": h0},
        sys.base,
        sys.rule,
        ("Eq. (3.52)", "Eq. (3.53)"),
        [(0.3, 2.0), (0.3, 1.5), (-1, 1), (-1, 1)],
        tilde_closed_form=closed,
        closed_form_tag="Eq. (3.53)",
        guards=[
            positive_guard("q1", lambda z: z[0], desc="q1 > 1e-6"),
            nonzero_guard("q2", lambda z: z[1], desc="|q2| > 1e-6"),
        ],
        references={"omega": lambda q, p: q[0]},
        system=sys,
    )


# -- Smorodinsky-Winternitz -----------------------------------------------------


def _partial_energy(i, n, k):
    def f(q, p, lam):
        return 0.5 * (p[i] * p[i] + n[i] ** 2 * lam[0] * q[i] * q[i]) + k[i] / (q[i] * q[i])

    return Observable(f"E{i + 1}", f)


def _k4(k):
    def f(q, p, lam):
        L3 = q[0] * p[1] - q[1] * p[0]
        return 0.5 * L3 * L3 + k[0] * q[1] ** 2 / q[0] ** 2 + k[1] * q[0] ** 2 / q[1] ** 2

    return Observable("K4", f)


def _angles(q, p, w2, n, k, i, printed=False):
    E = 0.5 * (p[i] ** 2 + n[i] ** 2 * w2 * q[i] ** 2) + k[i] / q[i] ** 2
    rad = sqrt(E * E - 2 * k[i] * n[i] ** 2 * w2)
    cos_phi = (E - n[i] ** 2 * w2 * q[i] ** 2) / rad
    if printed:
        sin_phi = (E - n[i] ** 2 * w2 * p[i] ** 2) / rad
    else:
        sin_phi = n[i] * sqrt(w2) * q[i] * p[i] / rad
    return E, rad, cos_phi, sin_phi


def k4_action_angle(q, p, w2, k, printed=False):
    """``K4`` from partial energies and angles, n = (1, 1, 2).

    ``omega^2 K4 = E1 E2 - sqrt(E1^2 - 2k1 w^2) sqrt(E2^2 - 2k2 w^2) cos(phi1 - phi2)``.
    ``printed=True`` uses the sine line exactly as printed in the source.
    """
    n = (1, 1, 2)
    E1, r1, c1, s1 = _angles(q, p, w2, n, k, 0, printed)
    E2, r2, c2, s2 = _angles(q, p, w2, n, k, 1, printed)
    return (E1 * E2 - r1 * r2 * (c1 * c2 + s1 * s2)) / w2


def smorodinsky_winternitz(
    omega: float = 1.0, n=(1, 1, 2), k=(0.1, 0.2, 0.15), mu: float = 0.1
) -> CatalogEntry:
    """Anisotropic oscillator ``omega_i = n_i omega`` with ``k_i/q_i^2`` terms."""
    omega, mu = float(omega), float(mu)
    n = tuple(int(v) for v in n)
    k = tuple(float(v) for v in k)
    if len(n) != 3 or len(k) != 3 or min(n) < 1:
        raise ConfigurationError("smorodinsky_winternitz: n needs 3 natural numbers, k 3 reals")
    if min(k) < 0:
        raise ConfigurationError("smorodinsky_winternitz: k_i must be non-negative")
    if mu < 0:
        raise ConfigurationError("smorodinsky_winternitz: mu must be >= 0 for regularity")

    def H(q, p, lam):
        pot = _sum(n[i] ** 2 * q[i] * q[i] for i in range(3))
        return 0.5 * (norm2(p) + lam[0] * pot) + _sum(k[i] / (q[i] * q[i]) for i in range(3))

    base = ParamSystem(3, ("omega2",), H, (omega**2,), affine=True, name="H_sw")
    rule = MetamorphosisRule((Substitution.affine("omega2", omega**2, -2 * mu),), {"mu": mu})

    def closed(q, p):
        s = _sum(n[i] ** 2 * q[i] ** 2 for i in range(3))
        num = 0.5 * norm2(p) + 0.5 * omega**2 * s + _sum(k[i] / q[i] ** 2 for i in range(3))
        return num / (1 + mu * s)

    integrals = [Integral(f"E{i + 1}", _partial_energy(i, n, k)) for i in range(3)]
    printed = []
    refs = {"omega": lambda q, p: 1 + mu * _sum(n[i] ** 2 * q[i] ** 2 for i in range(3))}
    if n[0] == n[1]:
        integrals.append(Integral("K4", _k4(k), note="polynomial form of the 1:1 resonance"))
    if n == (1, 1, 2):
        refs["K4_action_angle"] = lambda q, p: k4_action_angle(q, p, omega**2, k)
        integrals.append(
            Integral(
                "K4_printed_sine",
                Observable(
                    "K4_printed_sine",
                    lambda q, p, lam: k4_action_angle(q, p, lam[0], k, printed=True),
                ),
                printed=True,
                note="angle sine taken literally as printed",
            )
        )
    guards = [nonzero_guard(f"q{i + 1}", (lambda i: lambda z: z[i])(i)) for i in range(3)]
    return CatalogEntry(
        "smorodinsky_winternitz",
        "Smorodinsky-Winternitz, omega^2 -> omega^2 - 2 mu H~",
        {"omega": omega, "n": list(n), "k": list(k), "mu": mu},
        base,
        rule,
        ("Eq. (3.36)", "Eq. (3.37)", "Eq. (3.38)", "Eq. (3.41)"),
        [(0.3, 1.2), (0.3, 1.2), (0.3, 1.2), (-1, 1), (-1, 1), (-1, 1)],
        tilde_closed_form=closed,
        closed_form_tag="Eq. (3.37)",
        integrals=integrals,
        guards=guards,
        energy_guard=_window_guard(omega, mu),
        references=refs,
        printed=printed,
    )
