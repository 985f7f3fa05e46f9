"""Catalog entry type, guards, sampling and the conservation screen."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from ..core import PhasePoint, Rng, ScalarField, _as_z, _normalize_box
from ..errors import CcmorphError, ConfigurationError, DomainError
from ..metamorph import (
    BoundObservable,
    DerivedSystem,
    LiftedObservable,
    MetamorphosisRule,
    Observable,
    ParamSystem,
)

GUARD_RADIUS = 1e-6
SCREEN_POINTS = 50
SCREEN_TOL = 1e-10
SCREEN_SEED = 20240601


@dataclass(frozen=True)
class Guard:
    """Admissibility predicate on a phase point (flat ``z``)."""

    name: str
    predicate: Callable
    description: str = ""

    def __call__(self, z) -> bool:
        try:
            return bool(self.predicate(_as_z(z)))
        except (DomainError, ZeroDivisionError, ValueError, OverflowError):
            return False


@dataclass
class Integral:
    """A base-system integral, its screen status and optional lifted closed form.

    ``printed`` marks a formula kept as written in the source for cross-checks;
    such integrals are never used as the normative integral unless the screen
    passes.
    """

    name: str
    observable: Observable
    lifted_closed_form: Optional[Callable] = None
    printed: bool = False
    note: str = ""
    verified: Optional[bool] = None
    residual: Optional[float] = None


@dataclass
class PrintedFormula:
    """A printed expression checked against the generic construction."""

    tag: str
    name: str
    check: Callable  # entry -> (residual, details dict)
    expected: str  # "pass" or "discrepancy"
    note: str = ""


def screen_residual(F, H, points) -> float:
    """``max |{F, H}| / (1 + sum |terms|)`` over points.

    The denominator is the sum of magnitudes of the products that cancel in
    the bracket, i.e. the scale at which rounding enters.
    """
    worst = 0.0
    for z in points:
        z = _as_z(z)
        n = z.size // 2
        _, gf = F.value_and_grad(z)
        _, gh = H.value_and_grad(z)
        gf, gh = np.real(gf), np.real(gh)
        terms = np.concatenate([gf[:n] * gh[n:], -gf[n:] * gh[:n]])
        worst = max(worst, abs(terms.sum()) / (1.0 + np.abs(terms).sum()))
    return float(worst)


def _sum(xs):
    s = 0.0
    for x in xs:
        s = s + x
    return s


def norm2(v):
    return _sum(x * x for x in v)


class CatalogEntry:
    """A concrete system: base, rule, derived system, closed forms, integrals, guards.

    ``box`` bounds random sampling (2N intervals, q first); ``dyn_box`` is an
    optional narrower box for initial points of flows.  ``energy_guard`` is a
    predicate on the derived energy.
    """

    def __init__(
        self,
        id: str,
        title: str,
        params: dict,
        base: ParamSystem,
        rule: MetamorphosisRule,
        tags: Sequence[str],
        box: Sequence,
        tilde_closed_form: Optional[Callable] = None,
        integrals: Sequence[Integral] = (),
        guards: Sequence[Guard] = (),
        energy_guard: Optional[Guard] = None,
        dyn_box: Optional[Sequence] = None,
        references: Optional[dict] = None,
        printed: Sequence[PrintedFormula] = (),
        system: Optional[DerivedSystem] = None,
        closed_form_tag: str = "",
        frame=None,
        notes: str = "",
        screen: bool = True,
    ):
        self.id = id
        self.title = title
        self.params = dict(params)
        self.base = base
        self.rule = rule
        self.system = system or DerivedSystem(base, rule, name=f"{id}~")
        self.tags = tuple(tags)
        self.closed_form_tag = closed_form_tag
        self.box = _normalize_box(box, 2 * base.dim)
        self.dyn_box = _normalize_box(dyn_box, 2 * base.dim) if dyn_box else self.box
        self.tilde_closed_form = (
            ScalarField(tilde_closed_form, f"{id}~ closed form") if tilde_closed_form else None
        )
        self.integrals = list(integrals)
        self.guards = list(guards)
        self.energy_guard = energy_guard
        self.references = dict(references or {})
        self.printed = list(printed)
        self.frame = frame
        self.notes = notes
        if screen:
            self.screen_integrals()

    def __repr__(self):
        return f"CatalogEntry({self.id!r}, params={self.params})"

    @property
    def N(self) -> int:
        return self.base.dim

    def admissible(self, z, energy: bool = True) -> bool:
        """All guards hold, the implicit solve succeeds, and the energy guard holds."""
        z = _as_z(z)
        if not all(g(z) for g in self.guards):
            return False
        try:
            h, _ = self.system.solve(z)
        except CcmorphError:
            return False
        if energy and self.energy_guard is not None and not self.energy_guard(h):
            return False
        return math.isfinite(h)

    def flow_guard(self) -> Callable:
        return lambda z: all(g(z) for g in self.guards)

    def sample(self, seed, n: int, box=None, energy: bool = True, dynamics=False) -> list:
        """``n`` admissible points drawn uniformly from ``box`` by rejection."""
        rng = seed if isinstance(seed, Rng) else Rng(seed)
        box = _normalize_box(box, 2 * self.N) if box else (self.dyn_box if dynamics else self.box)
        out = []
        tries = 0
        while len(out) < n:
            tries += 1
            if tries > 1000 * n:
                raise ConfigurationError(
                    f"{self.id}: could not draw {n} admissible points from the box"
                )
            z = np.array([rng.uniform(lo, hi) for lo, hi in box])
            if self.admissible(z, energy):
                out.append(PhasePoint.from_z(z))
        return out

    def base_field(self):
        return self.base.field()

    def integral(self, name: str) -> Integral:
        for it in self.integrals:
            if it.name == name:
                return it
        raise KeyError(f"{self.id} has no integral {name!r}")

    def verified_integrals(self) -> list:
        return [it for it in self.integrals if it.verified]

    def lifted(self, name: str) -> LiftedObservable:
        return LiftedObservable(self.system, self.integral(name).observable)

    def screen_integrals(self, n: int = SCREEN_POINTS, tol: float = SCREEN_TOL):
        """Mark each integral verified iff ``{F, H_base}`` vanishes on ``n`` points."""
        if not self.integrals:
            return
        pts = self.sample(Rng(SCREEN_SEED), n, energy=False)
        H = self.base.field()
        for it in self.integrals:
            F = BoundObservable(it.observable, self.base.defaults)
            try:
                r = screen_residual(F, H, pts)
            except CcmorphError as exc:
                it.verified, it.residual, it.note = False, math.inf, f"{it.note} ({exc})"
                continue
            it.residual = r
            it.verified = r < tol

    def describe(self) -> dict:
        return {
            "id": self.id,
            "title": self.title,
            "params": self.params,
            "tags": list(self.tags),
            "solver": self.system.solver,
            "guards": [g.description or g.name for g in self.guards]
            + ([self.energy_guard.description] if self.energy_guard else []),
            "integrals": [
                {"name": it.name, "verified": it.verified, "printed": it.printed}
                for it in self.integrals
            ],
        }


def nonzero_guard(name: str, fn: Callable, radius: float = GUARD_RADIUS, desc: str = ""):
    return Guard(name, lambda z: abs(fn(z)) > radius, desc or f"|{name}| > {radius:g}")


def positive_guard(name: str, fn: Callable, radius: float = GUARD_RADIUS, desc: str = ""):
    return Guard(name, lambda z: fn(z) > radius, desc or f"{name} > {radius:g}")


def check_params(fn_name: str, given: dict, allowed: Sequence[str]):
    bad = sorted(set(given) - set(allowed))
    if bad:
        raise ConfigurationError(f"{fn_name}: unknown parameter(s) {', '.join(bad)}")
