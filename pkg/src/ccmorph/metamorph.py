"""Coupling-constant metamorphosis: derived Hamiltonians, Omega and lifts.

Given ``H(q, p, lam)`` and substitutions ``lam_a -> lam_a(h)``, the derived
Hamiltonian ``Ht(q, p)`` is the root of ``h = H(q, p, lam(h))``.  The factor

    Omega = 1 - sum_a dH/dlam_a * dlam_a/dh

relates the two flows (``grad H = Omega * grad Ht`` on the solved point) and
must stay away from zero.  Observables ``F(q, p, lam)`` lift to
``Ft(q, p) = F(q, p, lam(Ht(q, p)))``; derivatives of lifted fields go through
the implicit solve exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence

import numpy as np

from .core import Dual, PhasePoint, _as_z, _check_finite, jet
from .errors import (
    ConfigurationError,
    DegenerateMetamorphosisError,
    DomainError,
    MultipleRootsError,
    NoSolutionError,
)

__all__ = [
    "ParamSystem",
    "Substitution",
    "MetamorphosisRule",
    "DerivedSystem",
    "Observable",
    "BoundObservable",
    "LiftedObservable",
    "solve_tilde",
    "omega_field",
    "gradient_ratio_check",
    "lift_observable",
    "bracket_observable",
    "constant_shift_form",
    "fixed_point_residual",
]

NEWTON_MAX_ITER = 64
NEWTON_TOL = 1e-13


def _split(z):
    z = z.tolist() if isinstance(z, np.ndarray) else list(z)
    n = len(z) // 2
    return z[:n], z[n:]


@dataclass(frozen=True, eq=False)
class ParamSystem:
    """A Hamiltonian ``H(q, p, lam)`` with named parameters and nominal values.

    ``affine`` declares that H is affine in every parameter, which together
    with affine substitutions enables the closed-form solve.
    """

    dim: int
    params: tuple
    hamiltonian: Callable
    defaults: tuple = ()
    affine: bool = False
    name: str = "H"

    def __post_init__(self):
        params = tuple(self.params)
        defaults = tuple(float(v) for v in self.defaults) if self.defaults else (0.0,) * len(params)
        if len(defaults) != len(params):
            raise ConfigurationError(
                f"{self.name}: {len(params)} parameter names but {len(defaults)} values"
            )
        if len(set(params)) != len(params):
            raise ConfigurationError(f"{self.name}: duplicate parameter names {params}")
        if self.dim < 1:
            raise ConfigurationError(f"{self.name}: phase dimension must be >= 1")
        object.__setattr__(self, "params", params)
        object.__setattr__(self, "defaults", defaults)

    @property
    def M(self) -> int:
        return len(self.params)

    def index(self, name: str) -> int:
        try:
            return self.params.index(name)
        except ValueError:
            raise ConfigurationError(f"{self.name} has no parameter {name!r}") from None

    def values(self, **overrides) -> tuple:
        lam = list(self.defaults)
        for k, v in overrides.items():
            lam[self.index(k)] = v
        return tuple(lam)

    def __call__(self, x, lam=None):
        q, p = _split(_as_z(x))
        try:
            return self.hamiltonian(q, p, self.defaults if lam is None else tuple(lam))
        except (ZeroDivisionError, ValueError, OverflowError) as exc:
            raise DomainError(f"{self.name}: {exc}") from None

    def field(self, lam=None) -> "BoundObservable":
        """``H`` with parameters frozen at ``lam`` (defaults if omitted)."""
        lam = self.defaults if lam is None else tuple(float(v) for v in lam)
        return BoundObservable(Observable(self.name, self.hamiltonian), lam)


@dataclass(frozen=True)
class Substitution:
    """One parameter replaced by a function of the derived energy ``h``."""

    param: str
    fn: Callable
    deriv: Callable
    intercept: Optional[float] = None
    slope: Optional[float] = None

    @classmethod
    def affine(cls, param: str, intercept: float, slope: float) -> "Substitution":
        c, s = float(intercept), float(slope)
        return cls(param, lambda h: c + s * h, lambda h: s, c, s)

    @classmethod
    def general(cls, param: str, fn: Callable, deriv: Callable) -> "Substitution":
        return cls(param, fn, deriv)

    @property
    def is_affine(self) -> bool:
        return self.slope is not None


@dataclass(frozen=True)
class MetamorphosisRule:
    """Substitutions ``lam_a(h)`` plus the extra constants they were built from."""

    subs: tuple = ()
    constants: Mapping = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "subs", tuple(self.subs))
        names = [s.param for s in self.subs]
        if len(set(names)) != len(names):
            raise ConfigurationError(f"parameter substituted twice: {names}")

    @property
    def form(self) -> str:
        return "affine" if all(s.is_affine for s in self.subs) else "general"

    @classmethod
    def identity(cls) -> "MetamorphosisRule":
        return cls(())

    def check_derivatives(self, probes: Sequence[float] = None, rel: float = 1e-6) -> float:
        """Max relative mismatch between ``deriv`` and central differences."""
        probes = np.linspace(-1.0, 1.0, 10) if probes is None else probes
        worst = 0.0
        for s in self.subs:
            for h in probes:
                step = 1e-6 * (1.0 + abs(h))
                fd = (s.fn(h + step) - s.fn(h - step)) / (2 * step)
                d = s.deriv(h)
                worst = max(worst, abs(fd - d) / (1.0 + abs(d)))
        if worst > rel:
            raise ConfigurationError(f"rule derivative inconsistent with its map ({worst:.2e})")
        return worst


def _one_minus(terms: np.ndarray) -> np.ndarray:
    """``1 - sum(terms, axis=0)`` with Neumaier compensation over the rows."""
    terms = np.asarray(terms, dtype=float)
    if terms.shape[0] == 1:
        return 1.0 - terms[0]
    acc = np.ones(terms.shape[1:])
    comp = np.zeros_like(acc)
    for t in -terms:
        nxt = acc + t
        comp += np.where(np.abs(acc) >= np.abs(t), (acc - nxt) + t, (t - nxt) + acc)
        acc = nxt
    return acc + comp


class DerivedSystem:
    """The derived Hamiltonian ``Ht`` defined implicitly by a base and a rule.

    Instances are immutable and behave as fields: ``sys(z)`` is ``Ht(z)`` and
    ``sys.value_and_grad(z)`` its exact gradient, so they can be integrated
    directly.
    """

    def __init__(
        self,
        base: ParamSystem,
        rule: MetamorphosisRule,
        solver: Optional[str] = None,
        omega_floor: float = 1e-8,
        guess: Optional[Callable] = None,
        name: Optional[str] = None,
    ):
        self.base = base
        self.rule = rule
        self.omega_floor = float(omega_floor)
        self.guess = guess
        self.name = name or f"{base.name}~"
        if self.omega_floor <= 0:
            raise ConfigurationError("omega_floor must be positive")
        self._subs = [(base.index(s.param), s) for s in rule.subs]
        auto = "closed_affine" if base.affine and rule.form == "affine" else "newton"
        if solver is None:
            solver = auto
        if solver not in ("closed_affine", "newton"):
            raise ConfigurationError(f"unknown solver {solver!r}")
        if solver == "closed_affine" and auto != "closed_affine":
            raise ConfigurationError("closed_affine solver needs an affine base and affine rule")
        self.solver = solver

    def __repr__(self):
        return f"DerivedSystem({self.name!r}, solver={self.solver!r})"

    @property
    def dim(self) -> int:
        return self.base.dim

    def lam(self, h) -> tuple:
        """Parameter vector ``lam(h)``; ``h`` may be a float or a Dual."""
        lam = list(self.base.defaults)
        for i, s in self._subs:
            lam[i] = s.fn(h)
        return tuple(lam)

    def slopes(self, h: float) -> np.ndarray:
        """``dlam/dh`` for every parameter (zero where not substituted)."""
        out = np.zeros(self.base.M)
        for i, s in self._subs:
            out[i] = s.deriv(h)
        return out

    # -- solving ------------------------------------------------------------

    def _seeded_lam(self, h: float) -> list:
        """``lam(h)`` with each substituted coupling on its own dual slot.

        The slot derivative is ``dlam/dh``, so slot k of a result carries one
        term of ``sum dH/dlam dlam/dh``; keeping the terms apart lets Omega be
        summed without cancelling against the leading 1.
        """
        lam = list(self.base.defaults)
        K = len(self._subs)
        for k, (i, s) in enumerate(self._subs):
            g = np.zeros((K, 1))
            g[k, 0] = s.deriv(h)
            lam[i] = Dual(s.fn(h), g)
        return lam

    def _eval_h(self, q, p, h: float):
        """``H(q, p, lam(h))`` and ``Omega(h)``."""
        if not self._subs:
            return self.base.hamiltonian(q, p, self.base.defaults), 1.0
        out = self.base.hamiltonian(q, p, self._seeded_lam(h))
        if type(out) is not Dual:
            return out, 1.0
        terms = np.asarray(out.grad, dtype=float).ravel()
        return out.val, math.fsum([1.0, *(-terms)])

    def _safe_eval(self, q, p, h):
        try:
            hv, om = self._eval_h(q, p, h)
        except (DomainError, ZeroDivisionError, ValueError, OverflowError):
            return None
        if not (math.isfinite(hv) and math.isfinite(om)):
            return None
        return hv, om

    def _initial_guess(self, q, p):
        if self.guess is not None:
            return float(self.guess(q, p))
        h0 = self._safe_eval(q, p, 0.0)
        if h0 is not None:
            return h0[0]
        raise DomainError("base Hamiltonian not finite at lam(0)")

    def _newton(self, q, p, h):
        r_prev = None
        first = self._safe_eval(q, p, h)
        if first is None:
            # walk outward until the residual is finite
            for k in range(60):
                for sgn in (-1.0, 1.0):
                    trial = h + sgn * 2.0**k * 1e-3 * (1.0 + abs(h))
                    first = self._safe_eval(q, p, trial)
                    if first is not None:
                        h = trial
                        break
                if first is not None:
                    break
            else:
                raise NoSolutionError("no finite starting point for Newton", residual=math.nan)
        hv, om = first
        for _ in range(NEWTON_MAX_ITER):
            r = h - hv
            if abs(r) < NEWTON_TOL * (1.0 + abs(h)):
                return h, om
            if om == 0.0:
                raise DegenerateMetamorphosisError("Omega vanished during Newton iteration", 0.0)
            step = -r / om
            t = 1.0
            for _ in range(40):
                trial = h + t * step
                ev = self._safe_eval(q, p, trial)
                if ev is not None and abs(trial - ev[0]) < abs(r):
                    h, (hv, om) = trial, ev
                    break
                t *= 0.5
            else:
                raise NoSolutionError(
                    f"damped Newton stalled with residual {abs(r):.3e}", residual=abs(r)
                )
            r_prev = r
        r = h - hv
        if abs(r) < NEWTON_TOL * (1.0 + abs(h)):
            return h, om
        raise NoSolutionError(
            f"Newton did not converge in {NEWTON_MAX_ITER} iterations (residual {abs(r):.3e})",
            residual=abs(r if r_prev is None else r),
        )

    def solve(self, x, diagnostic: bool = False) -> tuple[float, float]:
        """``(Ht, Omega)`` at ``x``; see :func:`solve_tilde`."""
        q, p = _split(_as_z(x))
        if self.solver == "closed_affine":
            try:
                n_val, om = self._eval_h(q, p, 0.0)
            except (ZeroDivisionError, ValueError, OverflowError) as exc:
                raise DomainError(f"{self.name}: {exc}") from None
            if not (math.isfinite(n_val) and math.isfinite(om)):
                raise DomainError(f"{self.name}: base Hamiltonian not finite at {q + p}")
            self._check_floor(om, q, p)
            return float(n_val / om), float(om)
        h, om = self._newton(q, p, self._initial_guess(q, p))
        self._check_floor(om, q, p)
        if diagnostic:
            self._check_unique(q, p, h)
        return float(h), float(om)

    def _check_floor(self, om, q, p):
        if abs(om) < self.omega_floor:
            raise DegenerateMetamorphosisError(
                f"{self.name}: |Omega|={abs(om):.3e} below floor {self.omega_floor:g} "
                f"at q={q}, p={p}",
                om,
            )

    def _check_unique(self, q, p, h):
        roots = []
        for g in (h - 1.0 - abs(h), h * 0.5, h * 1.5, h + 1.0 + abs(h)):
            try:
                roots.append(self._newton(q, p, g)[0])
            except (NoSolutionError, DomainError):
                continue
        spread = [r for r in roots if abs(r - h) > 1e-8 * (1.0 + abs(h))]
        if spread:
            raise MultipleRootsError(
                f"{self.name}: distinct roots {sorted(set([h] + spread))} at q={q}, p={p}"
            )

    def __call__(self, x) -> float:
        return self.solve(x)[0]

    def omega_many(self, Z) -> np.ndarray:
        """Omega at each row of ``Z``; vectorized when the solve is affine.

        In the affine case Omega does not depend on h, so the dual slots are
        evaluated once on whole columns of ``Z``.
        """
        Z = np.atleast_2d(np.asarray(Z, dtype=float))
        if self.solver != "closed_affine" or not self._subs:
            return np.array([self.omega(z) for z in Z])
        n = Z.shape[1] // 2
        q, p = list(Z[:, :n].T), list(Z[:, n:].T)
        try:
            with np.errstate(all="ignore"):
                out = self.base.hamiltonian(q, p, self._seeded_lam(0.0))
        except (ZeroDivisionError, ValueError, OverflowError) as exc:
            raise DomainError(f"{self.name}: {exc}") from None
        if type(out) is Dual:
            terms = np.broadcast_to(np.asarray(out.grad), (len(self._subs), Z.shape[0]))
            om = _one_minus(terms)
        else:
            om = np.ones(Z.shape[0])
        if not np.all(np.isfinite(om)):
            raise DomainError(f"{self.name}: non-finite Omega along the batch")
        low = np.flatnonzero(np.abs(om) < self.omega_floor)
        if low.size:
            i = int(low[0])
            self._check_floor(float(om[i]), *_split(Z[i]))
        return np.array(om)

    def omega(self, x) -> float:
        return self.solve(x)[1]

    def value_and_grad(self, x):
        """``Ht`` and its exact gradient ``grad_z H(z, lam(Ht)) / Omega``."""
        z = _as_z(x)
        h, om = self.solve(z)
        _, dz, _ = jet(self.base.hamiltonian, z, self.lam(h), seed_params=False)
        grad = dz / om
        _check_finite(h, grad, z)
        return h, grad

    def implicit_dual(self, x) -> Dual:
        """``Ht`` as a Dual over the 2N phase seeds (one implicit Newton step)."""
        h, g = self.value_and_grad(x)
        return Dual(h, g)

    def base_field(self, energy: float) -> "BoundObservable":
        """Base Hamiltonian with couplings frozen at ``lam(energy)``."""
        return self.base.field(self.lam(float(energy)))

    def guard(self, omega0_sign: float = None) -> Callable:
        """Predicate: the derived system solves with Omega of a fixed sign."""

        def ok(z):
            try:
                om = self.omega(z)
            except DomainError:
                return False
            return omega0_sign is None or om * omega0_sign > 0

        return ok


def fixed_point_residual(sys: DerivedSystem, x) -> float:
    """``|h - H(x, lam(h))|`` at the solved ``h``."""
    z = _as_z(x)
    h = sys(z)
    return abs(h - sys.base(z, sys.lam(h)))


def solve_tilde(sys: DerivedSystem, x, diagnostic: bool = False) -> tuple[float, float]:
    """Solve ``h = H(x, lam(h))`` for ``h``; returns ``(h, Omega)`` with sign.

    The affine fast path divides ``H(x, lam(0))`` by Omega; otherwise damped
    Newton starts from ``H(x, lam(0))`` (or the system's ``guess``).  Raises
    DegenerateMetamorphosisError when ``|Omega| < omega_floor``, NoSolutionError
    when Newton fails, and DomainError for non-finite H.  ``diagnostic=True``
    restarts Newton from perturbed guesses and raises MultipleRootsError if
    they disagree.
    """
    return sys.solve(x, diagnostic=diagnostic)


def omega_field(sys: DerivedSystem, x) -> float:
    return sys.solve(x)[1]


def gradient_ratio_check(sys: DerivedSystem, x, tilde=None) -> float:
    """Residual of ``dH/dz = Omega * dHt/dz`` over all 2N components.

    ``dH/dz`` is taken with the couplings frozen at ``lam(Ht(x))``.  ``dHt``
    comes from implicit differentiation through the solve, or from ``tilde``
    (any field, e.g. a printed closed form) when given.
    """
    z = _as_z(x)
    h, om = sys.solve(z)
    _, g_tilde = (tilde or sys).value_and_grad(z)
    _, dz, dlam = jet(sys.base.hamiltonian, z, sys.lam(h))
    om = 1.0 - float(np.dot(dlam, sys.slopes(h)))
    return float(np.max(np.abs(dz - om * g_tilde) / (1.0 + np.abs(dz))))


@dataclass(frozen=True)
class Observable:
    """A phase-space function ``f(q, p, lam)`` that may depend on couplings."""

    name: str
    f: Callable

    def __call__(self, x, lam):
        q, p = _split(_as_z(x))
        try:
            return self.f(q, p, tuple(lam))
        except (ZeroDivisionError, ValueError, OverflowError) as exc:
            raise DomainError(f"{self.name}: {exc}") from None

    def bind(self, lam) -> "BoundObservable":
        return BoundObservable(self, tuple(lam))


class BoundObservable:
    """An observable with its couplings frozen; a field on phase space."""

    def __init__(self, obs: Observable, lam):
        self.obs = obs
        self.lam = tuple(lam)
        self.name = obs.name

    def __call__(self, x):
        return self.obs(x, self.lam)

    def value_and_grad(self, x):
        z = _as_z(x)
        try:
            val, dz, _ = jet(self.obs.f, z, self.lam, seed_params=False)
        except (ZeroDivisionError, ValueError, OverflowError) as exc:
            raise DomainError(f"{self.name}: {exc}") from None
        _check_finite(val, dz, z)
        return val, dz


class LiftedObservable:
    """``F(q, p, lam(Ht(q, p)))``: the lift of an observable to a derived system."""

    def __init__(self, sys: DerivedSystem, obs: Observable):
        self.sys = sys
        self.obs = obs
        self.name = f"{obs.name}~"

    def __call__(self, x):
        z = _as_z(x)
        return self.obs(z, self.sys.lam(self.sys(z)))

    def value_and_grad(self, x):
        z = _as_z(x)
        h, gh = self.sys.value_and_grad(z)
        n2 = z.size
        hd = Dual(h, gh)
        zd = Dual.seeds(z.tolist(), 0, n2)
        try:
            out = self.obs.f(zd[: n2 // 2], zd[n2 // 2 :], self.sys.lam(hd))
        except (ZeroDivisionError, ValueError, OverflowError) as exc:
            raise DomainError(f"{self.name}: {exc}") from None
        if type(out) is not Dual:
            return out, np.zeros(n2)
        _check_finite(out.val, out.grad, z)
        return out.val, out.grad

    def as_observable(self) -> Observable:
        """The lift as a (coupling-independent) observable."""
        return Observable(self.name, lambda q, p, lam: self(np.array(list(q) + list(p))))


def lift_observable(sys: DerivedSystem, F: Observable) -> LiftedObservable:
    return LiftedObservable(sys, F)


def bracket_observable(Fa: Observable, Fb: Observable) -> Observable:
    """``{Fa, Fb}`` at frozen couplings, as an observable of ``(q, p, lam)``.

    Only float evaluation is supported (the bracket is computed from exact
    first derivatives, so it cannot itself be differentiated).
    """

    def f(q, p, lam):
        z = np.array(list(q) + list(p), dtype=float)
        _, ga, _ = jet(Fa.f, z, lam, seed_params=False)
        _, gb, _ = jet(Fb.f, z, lam, seed_params=False)
        n = len(q)
        return float(np.dot(ga[:n], gb[n:]) - np.dot(ga[n:], gb[:n]))

    return Observable(f"{{{Fa.name},{Fb.name}}}", f)


def constant_shift_form(
    sys: ParamSystem, rule: MetamorphosisRule, d: float, name: Optional[str] = None
) -> DerivedSystem:
    """Derived system of ``H + shift`` with ``shift -> h - d`` added to ``rule``.

    The implicit equation becomes ``0 = H(x, lam(h)) - d``: trajectories of H
    at energy ``d`` with couplings ``lam(E)`` are those of ``Ht`` at energy E.
    """
    m = sys.M
    inner = sys.hamiltonian

    def shifted(q, p, lam):
        return inner(q, p, lam[:m]) + lam[m]

    base = ParamSystem(
        sys.dim,
        sys.params + ("shift",),
        shifted,
        sys.defaults + (0.0,),
        affine=sys.affine,
        name=f"{sys.name}+shift",
    )
    d = float(d)
    subs = tuple(rule.subs) + (Substitution.affine("shift", -d, 1.0),)
    consts = dict(rule.constants)
    consts["d"] = d
    return DerivedSystem(base, MetamorphosisRule(subs, consts), name=name or f"{sys.name}~")


def as_point(x) -> PhasePoint:
    return x if isinstance(x, PhasePoint) else PhasePoint.from_z(x)
