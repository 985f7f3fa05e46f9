"""Poisson brackets, su(3) structure constants and oscillator ladder integrals.

Bracket convention: ``{F, G} = sum_i dF/dq_i dG/dp_i - dF/dp_i dG/dq_i``.
With ladder variables ``a_i = (p_i - i w q_i)/sqrt(2w)`` this gives
``{a_i, conj(a_j)} = -i delta_ij``, and the bilinears
``C_a = 1/2 a_i (L_a)_ij conj(a_j)`` close as ``{C_a, C_b} = -1/2 f_abc C_c``
for ``[L_a, L_b] = i f_abc L_c``.  The factor -1/2 is fixed by the 1/2 in
``C_a`` and the sign of the canonical bracket; it does not depend on how the
matrices ``L_a`` are scaled.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from .core import Dual, ScalarField, _as_z, sqrt
from .errors import ConfigurationError, WindowError
from .metamorph import (
    BoundObservable,
    DerivedSystem,
    LiftedObservable,
    Observable,
    ParamSystem,
)

__all__ = [
    "poisson_bracket",
    "StructureConstants",
    "gell_mann_su3",
    "LadderFrame",
    "su3_integrals",
    "su3_bilinears",
    "omega3_scaled",
    "algebra_residual",
    "bracket_homomorphism_residual",
    "CLOSURE_FACTOR",
]

# {C_a, C_b} = CLOSURE_FACTOR * f_abc C_c for C_a = 1/2 a L_a conj(a)
CLOSURE_FACTOR = -0.5


def _grad(F, z):
    if hasattr(F, "value_and_grad"):
        return F.value_and_grad(z)[1]
    if callable(F):
        return ScalarField(F).value_and_grad(z)[1]
    raise ConfigurationError(f"not a field: {F!r}")


def poisson_bracket(F, G, x) -> float:
    """``{F, G}`` at ``x`` from exact gradients (through implicit solves too)."""
    z = _as_z(x)
    gf, gg = _grad(F, z), _grad(G, z)
    n = z.size // 2
    return np.dot(gf[:n], gg[n:]) - np.dot(gf[n:], gg[:n])


@dataclass(frozen=True, eq=False)
class StructureConstants:
    """Antisymmetric constants ``f[a, b, c]`` of ``[L_a, L_b] = i f_abc L_c``."""

    dim: int
    f: np.ndarray

    def antisymmetry_residual(self) -> float:
        return float(np.max(np.abs(self.f + np.swapaxes(self.f, 0, 1))))

    def jacobi_residual(self) -> float:
        """``max |f_abd f_dce + f_bcd f_dae + f_cad f_dbe|`` over all triples."""
        f = self.f
        t = np.einsum("abd,dce->abce", f, f)
        j = t + np.einsum("bcd,dae->abce", f, f) + np.einsum("cad,dbe->abce", f, f)
        return float(np.max(np.abs(j)))

    def scaled(self, k: float) -> "StructureConstants":
        return StructureConstants(self.dim, self.f * k)


def _gell_mann_standard() -> np.ndarray:
    s3 = 1 / np.sqrt(3)
    m = np.zeros((8, 3, 3), dtype=complex)
    m[0][0, 1] = m[0][1, 0] = 1
    m[1][0, 1], m[1][1, 0] = -1j, 1j
    m[2][0, 0], m[2][1, 1] = 1, -1
    m[3][0, 2] = m[3][2, 0] = 1
    m[4][0, 2], m[4][2, 0] = -1j, 1j
    m[5][1, 2] = m[5][2, 1] = 1
    m[6][1, 2], m[6][2, 1] = -1j, 1j
    m[7][0, 0] = m[7][1, 1] = s3
    m[7][2, 2] = -2 * s3
    return m


@lru_cache(maxsize=None)
def _su3():
    lam = _gell_mann_standard() / 2.0
    f = np.zeros((8, 8, 8))
    for a, b, c in itertools.product(range(8), repeat=3):
        comm = lam[a] @ lam[b] - lam[b] @ lam[a]
        norm = np.trace(lam[c] @ lam[c]).real
        f[a, b, c] = (np.trace(comm @ lam[c]) / (1j * norm)).real
    # clean rounding so antisymmetry is exact
    f = np.round(f, 15)
    f = 0.5 * (f - np.swapaxes(f, 0, 1))
    lam.flags.writeable = False
    f.flags.writeable = False
    return lam, StructureConstants(8, f)


def gell_mann_su3():
    """Half Gell-Mann matrices ``L_a`` and their commutator constants.

    With this scaling ``f_123 = 1``; constants are computed from the matrices.
    """
    return _su3()


def su3_bilinears(q, p, omega, k=None):
    """The 8 complex values ``1/2 a_i (L_a)_ij conj(a_j)`` (Duals allowed).

    ``a_i = (p_i - i omega q_i - i k_i/omega)/sqrt(2 omega)``.  For real omega
    these are real up to rounding.
    """
    lam, _ = _su3()
    k = k or (0.0, 0.0, 0.0)
    inv = 1.0 / omega
    norm = 1.0 / sqrt(2.0 * omega)
    a = [(p[i] - 1j * (omega * q[i] + k[i] * inv)) * norm for i in range(3)]
    ab = [(p[i] + 1j * (omega * q[i] + k[i] * inv)) * norm for i in range(3)]
    out = []
    for L in lam:
        s = 0.0
        for i in range(3):
            for j in range(3):
                c = L[i, j]
                if c != 0:
                    s = s + a[i] * (complex(c) * ab[j])
        out.append(0.5 * s)
    return out


def _real(v):
    if type(v) is Dual:
        return Dual(np.real(v.val), np.real(v.grad))
    return np.real(v)


def _val(x):
    return x.val if type(x) is Dual else x


@dataclass(frozen=True)
class LadderFrame:
    """Frequency and shift data for ladder variables of an oscillator family.

    ``omega2`` names the coupling holding the squared frequency and ``shift``
    the couplings holding ``k_i`` (or None).  ``mu`` and ``omega0`` only serve
    the error message: the admissible window is ``E < omega0**2/(2*mu)``.
    """

    omega2: str = "omega2"
    shift: Optional[tuple] = None
    omega0: float = 1.0
    mu: float = 0.0

    @property
    def window(self) -> float:
        return np.inf if self.mu <= 0 else self.omega0**2 / (2 * self.mu)

    def omega_eff(self, h: float) -> float:
        w2 = self.omega0**2 - 2 * self.mu * h
        if w2 <= 0:
            raise WindowError(self._window_message(h))
        return float(np.sqrt(w2))

    def _window_message(self, h=None):
        at = "" if h is None else f" (here E~={float(_val(h)):.6g})"
        return (
            f"ladder frame needs omega^2(E~) > 0, i.e. E~ < omega^2/2mu = {self.window:.6g}{at}"
        )

    def observables(self, base: ParamSystem) -> list:
        iw = base.index(self.omega2)
        ik = [base.index(s) for s in self.shift] if self.shift else None

        def make(a):
            def f(q, p, lam):
                w2 = lam[iw]
                if _val(w2) <= 0:
                    raise WindowError(self._window_message())
                k = [lam[i] for i in ik] if ik else None
                return _real(su3_bilinears(q, p, sqrt(w2), k)[a])

            return Observable(f"C{a + 1}", f)

        return [make(a) for a in range(8)]


def _window_guarded(frame: LadderFrame, sys: DerivedSystem, obs: LiftedObservable):
    class Guarded(LiftedObservable):
        def _check(self, z):
            h = self.sys(z)
            w2 = self.sys.lam(h)[self.sys.base.index(frame.omega2)]
            if w2 <= 0:
                raise WindowError(frame._window_message(h))

        def __call__(self, x):
            self._check(_as_z(x))
            return super().__call__(x)

        def value_and_grad(self, x):
            self._check(_as_z(x))
            return super().value_and_grad(x)

    return Guarded(sys, obs)


def su3_integrals(frame: LadderFrame, sys) -> list:
    """Eight su(3) integrals: frozen ``C_a`` for a ParamSystem, lifted for a DerivedSystem.

    Lifted integrals evaluate ``omega(Ht)`` through the implicit solve and
    raise WindowError outside ``E~ < omega^2/2mu``.
    """
    if isinstance(sys, DerivedSystem):
        return [_window_guarded(frame, sys, o) for o in frame.observables(sys.base)]
    if isinstance(sys, ParamSystem):
        return [BoundObservable(o, sys.defaults) for o in frame.observables(sys)]
    raise ConfigurationError("su3_integrals needs a ParamSystem or DerivedSystem")


def omega3_scaled(frame: LadderFrame, sys: DerivedSystem) -> list:
    """``omega(Ht)^3 * C~_a`` as polynomials in ``omega``, valid across the window.

    Outside the window ``omega`` is imaginary and the values are complex but
    finite, whereas ``C~_a`` itself diverges as ``omega -> 0``.
    """
    lam_m, _ = _su3()
    iw = sys.base.index(frame.omega2)
    ik = [sys.base.index(s) for s in frame.shift] if frame.shift else None

    def make(a):
        L = lam_m[a]

        def f(z):
            z = _as_z(z)
            n = z.size // 2
            q, p = z[:n], z[n:]
            lam = sys.lam(sys(z))
            w = np.sqrt(complex(lam[iw]))
            k = [lam[i] for i in ik] if ik else [0.0] * 3
            u = [w * p[i] - 1j * (w * w * q[i] + k[i]) for i in range(3)]
            v = [w * p[i] + 1j * (w * w * q[i] + k[i]) for i in range(3)]
            return 0.25 * sum(u[i] * L[i, j] * v[j] for i in range(3) for j in range(3))

        return f

    return [make(a) for a in range(8)]


def algebra_residual(
    integrals: Sequence,
    f: StructureConstants,
    points: Sequence,
    factor: float = CLOSURE_FACTOR,
) -> float:
    """``max |{C_a, C_b} - factor * f_abc C_c| / (1 + max|C|)`` over points and pairs.

    ``factor`` is the bracket normalization of the bilinears (see module doc);
    pass 1.0 to test closure with the bare constants.
    """
    worst = 0.0
    F = f.f * factor
    nI = len(integrals)
    if nI != f.dim:
        raise ConfigurationError(f"{nI} integrals for a {f.dim}-dimensional algebra")
    for x in points:
        z = _as_z(x)
        vg = [C.value_and_grad(z) for C in integrals]
        vals = np.array([float(np.real(v)) for v, _ in vg])
        grads = np.array([np.real(g) for _, g in vg])
        n = z.size // 2
        br = grads[:, :n] @ grads[:, n:].T - grads[:, n:] @ grads[:, :n].T
        rhs = np.einsum("abc,c->ab", F, vals)
        scale = 1.0 + np.max(np.abs(vals))
        worst = max(worst, float(np.max(np.abs(br - rhs)) / scale))
    return worst


def bracket_homomorphism_residual(
    sys: DerivedSystem, pairs: Sequence, points: Sequence
) -> float:
    """``max |{F~, G~} - lift({F, G})|/(1 + |lift({F, G})|)`` over pairs and points.

    ``{F, G}`` is taken at frozen couplings; the identity requires F and G to
    be integrals of the base system.
    """
    from .metamorph import bracket_observable, lift_observable

    worst = 0.0
    for F, G in pairs:
        Ft, Gt = lift_observable(sys, F), lift_observable(sys, G)
        FG = lift_observable(sys, bracket_observable(F, G))
        for x in points:
            lhs = poisson_bracket(Ft, Gt, x)
            rhs = FG(x)
            worst = max(worst, abs(lhs - rhs) / (1.0 + abs(rhs)))
    return float(worst)
