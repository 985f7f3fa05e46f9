"""Integrable Henon-Heiles cases (i) and (iii) with ``A, B`` traded for the energy."""

from __future__ import annotations

from ..errors import ConfigurationError
from ..metamorph import (
    MetamorphosisRule,
    Observable,
    ParamSystem,
    Substitution,
    constant_shift_form,
)
from .base import CatalogEntry, Integral, positive_guard

_MU = {"i": -6.0, "iii": -16.0}


def k_case_i(q, p, A, B, D, printed=False):
    """Quartic integral of case (i).

    The printed version carries ``D (x^2 + y^2)`` in the last bracket; the
    bracket with H then leaves ``12 D^2 p_x x^3``.  ``x^2/4 + y^2`` makes it
    an exact integral.
    """
    x, y = q
    px, py = p
    quad = x * x + y * y if printed else 0.25 * x * x + y * y
    return 2 * (4 * A - B) * (0.5 * px * px + 0.5 * A * x * x) + 4 * D * (
        px * (x * py - y * px) + x * x * (A * y + D * quad)
    )


def k_case_iii(q, p, A, D, printed=False):
    """Quartic integral of case (iii); printed version has ``3A^2 x^2`` for ``3A^2 x^4``."""
    x, y = q
    px, py = p
    x2 = x * x
    last = 3 * A * A * (x2 if printed else x2 * x2)
    return (
        3 * px**4
        + 6 * A * x2 * px * px
        + 12 * D * y * x2 * px * px
        - 4 * D * A * x2 * x2 * y
        - 4 * D * D * x2 * x2 * y * y
        + last
        - 2.0 / 3.0 * D * D * x2**3
        - 4 * D * x2 * x * px * py
    )


def k_tilde_printed_i(q, p, h, A, B, D, a, b, kappa):
    """Lifted case (i) integral as printed, with ``kappa`` for the garbled coefficient.

    ``kappa = 16 a A`` reproduces the generic lift exactly.
    """
    x, y = q
    px, _ = p
    K = k_case_i(q, p, A, B, D)
    return (
        K
        - 8 * a * D * h * y * x * x
        + ((2 * (a * B + b * A) - kappa) * h + 4 * a * (4 * a - b) * h * h) * x * x
        + 2 * (b - 4 * a) * h * px * px
    )


def k_tilde_printed_iii(q, p, h, A, D, a, corrected=False):
    """Lifted case (iii) integral as printed; ``corrected`` flips the ``a^2 h^2`` sign."""
    x, y = q
    px, _ = p
    K = k_case_iii(q, p, A, D)
    last = (A * h - a * h * h) if corrected else (A * h + a * h * h)
    return K - 12 * a * h * x * x * px * px + 8 * a * D * h * x**4 * y - 12 * a * last * x**4


def henon_heiles(
    case: str = "i",
    A: float = 1.0,
    B: float = None,
    D: float = 0.1,
    a: float = 0.05,
    b: float = None,
    variant: str = "C0",
) -> CatalogEntry:
    """Henon-Heiles with ``A -> A - 2a Ht``, ``B -> B - 2b Ht``.

    ``variant="C0"`` keeps the constant at zero; ``"C_tilde"`` sets it to Ht,
    which is the constant-shift form with ``d = 0`` (denominator
    ``a x^2 + b y^2``).  Case (iii) ties ``B = 16A`` and ``b = 16a``.
    """
    case = str(case).lower()
    if case not in _MU:
        raise ConfigurationError(f"henon_heiles: case must be 'i' or 'iii', got {case!r}")
    if variant not in ("C0", "C_tilde"):
        raise ConfigurationError(f"henon_heiles: variant must be C0 or C_tilde, got {variant!r}")
    A, D, a = float(A), float(D), float(a)
    if case == "iii":
        if B is not None and float(B) != 16 * A:
            raise ConfigurationError("henon_heiles case iii requires B = 16 A")
        if b is not None and float(b) != 16 * a:
            raise ConfigurationError("henon_heiles case iii requires b = 16 a")
        B, b = 16 * A, 16 * a
    else:
        B = 1.0 if B is None else float(B)
        b = 0.02 if b is None else float(b)
    mu = _MU[case]

    def H(q, p, lam):
        x, y = q
        A_, B_ = lam
        return (
            0.5 * (p[0] * p[0] + p[1] * p[1])
            + 0.5 * A_ * x * x
            + 0.5 * B_ * y * y
            + D * (y * x * x - mu / 3.0 * y**3)
        )

    inner = ParamSystem(2, ("A", "B"), H, (A, B), affine=True, name=f"H_hh_{case}")
    rule = MetamorphosisRule(
        (Substitution.affine("A", A, -2 * a), Substitution.affine("B", B, -2 * b)),
        {"a": a, "b": b},
    )
    eid = "henon_heiles"
    if variant == "C_tilde":
        sys = constant_shift_form(inner, rule, 0.0, name=f"{eid}~")
        base, rule_used = sys.base, sys.rule
    else:
        sys, base, rule_used = None, inner, rule

    def num(q, p):
        x, y = q
        return (
            0.5 * (p[0] ** 2 + p[1] ** 2)
            + 0.5 * A * x * x
            + 0.5 * B * y * y
            + D * (x * x * y - mu / 3.0 * y**3)
        )

    def num_iii_printed(q, p):
        x, y = q
        return 0.5 * (p[0] ** 2 + p[1] ** 2) + D * (x * x * y + 16.0 / 3.0 * y**3)

    def S(q):
        return a * q[0] ** 2 + b * q[1] ** 2

    refs = {}
    if variant == "C0":
        tags = {"i": ("Eq. (3.51a)", "Eq. (3.52a)", "Eq. (3.53a)", "Eq. (3.54)", "Eq. (3.55)"),
                "iii": ("Eq. (3.57)", "Eq. (3.58)", "Eq. (3.59)", "Eq. (3.60)")}[case]
        cf_tag = {"i": "Eq. (3.53a)", "iii": "Eq. (3.58)"}[case]

        def closed(q, p):
            return num(q, p) / (1 + S(q))

        refs["omega"] = lambda q, p: 1 + S(q)
    else:
        tags = {"i": ("Eq. (3.51a)", "Eq. (3.56)", "Eq. (3.54)", "Eq. (3.55)"),
                "iii": ("Eq. (3.57)", "Eq. (3.61)", "Eq. (3.59)", "Eq. (3.60)")}[case]
        cf_tag = {"i": "Eq. (3.56)", "iii": "Eq. (3.61)"}[case]

        def closed(q, p):
            return num(q, p) / S(q)

        refs["omega"] = lambda q, p: S(q)
        if case == "iii":
            # as printed: the A(x^2 + 16y^2)/2 term is absent, a constant A/(2a) lower
            refs["closed_printed"] = lambda q, p: num_iii_printed(q, p) / S(q)
            refs["closed_printed_offset"] = A / (2 * a)

    if case == "i":
        integrals = [
            Integral("K", Observable("K", lambda q, p, lam: k_case_i(q, p, lam[0], lam[1], D)),
                     note="quartic integral, x^2/4 + y^2 in the last bracket"),
            Integral("K_printed",
                     Observable("K_printed",
                                lambda q, p, lam: k_case_i(q, p, lam[0], lam[1], D, True)),
                     printed=True, note="last bracket x^2 + y^2 as printed"),
        ]
    else:
        integrals = [
            Integral("K", Observable("K", lambda q, p, lam: k_case_iii(q, p, lam[0], D)),
                     note="quartic integral, 3A^2 x^4"),
            Integral("K_printed",
                     Observable("K_printed",
                                lambda q, p, lam: k_case_iii(q, p, lam[0], D, True)),
                     printed=True, note="3A^2 x^2 as printed"),
        ]
    guards = []
    if variant == "C_tilde":
        guards.append(positive_guard("a x^2 + b y^2", lambda z: S(z[:2]),
                                     desc="a x^2 + b y^2 > 1e-6"))
    else:
        guards.append(positive_guard("1 + a x^2 + b y^2", lambda z: 1 + S(z[:2]),
                                     desc="1 + a x^2 + b y^2 > 1e-6"))
    box = [(-0.5, 0.5), (-0.5, 0.5), (-0.5, 0.5), (-0.5, 0.5)]
    return CatalogEntry(
        eid,
        f"Henon-Heiles case ({case}), variant {variant}",
        {"case": case, "A": A, "B": B, "D": D, "a": a, "b": b, "variant": variant},
        base,
        rule_used,
        tags,
        box,
        tilde_closed_form=closed,
        closed_form_tag=cf_tag,
        integrals=integrals,
        guards=guards,
        references=refs,
        system=sys,
    )
