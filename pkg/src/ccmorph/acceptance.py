"""Acceptance battery C1-C10 with pinned seeds and configurable tolerances.

Each criterion returns a :class:`CriterionResult` holding its measured
quantities next to the tolerances they are held to.  Tolerances and runtime
limits can be overridden through a config mapping, e.g.::

    {"tolerances": {"C6.rel": 1e-10}, "runtime_limits": {"C3": 60}}

Unknown keys are rejected so a typo cannot silently loosen a check.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import catalog
from .algebra import (
    CLOSURE_FACTOR,
    algebra_residual,
    bracket_homomorphism_residual,
    gell_mann_su3,
    su3_integrals,
)
from .core import Rng
from .dynamics import coincidence, conservation_drift, integrate
from .errors import CcmorphError, ConfigurationError, ReparameterizationError, WindowError
from .metamorph import DerivedSystem, MetamorphosisRule, Substitution, gradient_ratio_check

SEED = 20240601

CLOSED_FORM_CASES = (
    ("Eq. (3.24)", "oscillator_iso", {}),
    ("Eq. (3.32)", "oscillator_linear", {}),
    ("Eq. (3.37)", "smorodinsky_winternitz", {}),
    ("Eq. (3.43)", "kepler", {}),
    ("Eq. (3.46)", "kepler_generalized", {}),
    ("Eq. (3.47)", "curved_sw", {}),
    ("Eq. (3.51)", "oscillator_general", {}),
    ("Eq. (3.53)", "oscillator_planar", {}),
    ("Eq. (3.53a)", "henon_heiles", {"case": "i"}),
    ("Eq. (3.56)", "henon_heiles", {"case": "i", "variant": "C_tilde"}),
    ("Eq. (3.58)", "henon_heiles", {"case": "iii"}),
    ("Eq. (3.61)", "henon_heiles", {"case": "iii", "variant": "C_tilde"}),
    ("Eq. (4.55)", "darboux_pair", {"example": "1d"}),
    ("Eq. (4.55)", "darboux_pair", {"example": "2d"}),
    ("Eq. (rel.14)", "relativistic_coulomb", {}),
    ("Eq. (rel.7)", "relativistic_em", {"potential": "uniform", "strength": 0.5, "B": 0.3}),
)

COINCIDENCE_CASES = (
    ("oscillator_iso", {"mu": 0.1}),
    ("kepler", {"alpha": -1.0, "beta": -0.5}),
    ("smorodinsky_winternitz", {"n": [1, 1, 2]}),
    ("henon_heiles", {"case": "i"}),
    ("henon_heiles", {"case": "iii"}),
    ("relativistic_coulomb", {}),
)

DEFAULT_TOLERANCES = {
    "C1.rel": 1e-12,
    "C2.ratio": 1e-9,
    "C3.sup_q": 1e-6,
    "C3.sup_p": 1e-6,
    "C4.drift": 1e-7,
    "C5.base": 1e-11,
    "C5.lifted": 1e-9,
    "C5.homomorphism": 1e-9,
    "C6.rel": 1e-10,
    "C7.orbit": 1e-6,
    "C7.mass": 1e-10,
    "C8.product": 1e-9,
    "C8.path": 1e-6,
    "C10.lift_screen": 1e-10,
}

DEFAULT_RUNTIME = {
    "C1": 5.0,
    "C2": 5.0,
    "C3": 60.0,
    "C4": 30.0,
    "C5": 10.0,
    "C6": 1.0,
    "C7": 10.0,
    "C8": 10.0,
    "C9": 2.0,
    "C10": 5.0,
}


@dataclass
class Metric:
    """One measured quantity held to ``value < tol`` (or equality when tol is None)."""

    name: str
    value: float
    tol: Optional[float]
    ok: bool


@dataclass
class CriterionResult:
    id: str
    title: str
    suite: str
    metrics: list = field(default_factory=list)
    runtime: float = 0.0
    runtime_limit: float = math.inf
    enforce_runtime: bool = True
    error: Optional[str] = None
    detail: dict = field(default_factory=dict)

    @property
    def runtime_ok(self) -> bool:
        return self.runtime < self.runtime_limit

    @property
    def passed(self) -> bool:
        if self.error is not None:
            return False
        if self.enforce_runtime and not self.runtime_ok:
            return False
        return all(m.ok for m in self.metrics)

    def failures(self) -> list:
        out = [f"{m.name} = {m.value:.3e} (tol {m.tol:.1e})" if m.tol is not None
               else f"{m.name} failed" for m in self.metrics if not m.ok]
        if self.error:
            out.append(self.error)
        if self.enforce_runtime and not self.runtime_ok:
            out.append(f"runtime {self.runtime:.2f}s over limit {self.runtime_limit:g}s")
        return out

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        worst = ", ".join(f"{m.name}={m.value:.2e}" if m.tol is not None
                          else f"{m.name}={'ok' if m.ok else 'FAIL'}" for m in self.metrics)
        tail = "" if self.passed else "  [" + "; ".join(self.failures()) + "]"
        return f"{self.id:<4} {status}  {self.title}: {worst}{tail}"

    def to_dict(self, runtimes: bool = True) -> dict:
        d = {
            "id": self.id,
            "title": self.title,
            "suite": self.suite,
            "passed": self.passed,
            "metrics": [
                {"name": m.name, "value": m.value, "tol": m.tol, "ok": m.ok} for m in self.metrics
            ],
            "error": self.error,
            "detail": self.detail,
        }
        if runtimes:
            d["runtime"] = self.runtime
            d["runtime_limit"] = self.runtime_limit
        return d


class Battery:
    """Tolerance and runtime configuration shared by the criteria."""

    def __init__(self, config: Optional[dict] = None):
        config = dict(config or {})
        unknown = sorted(set(config) - {"tolerances", "runtime_limits", "enforce_runtime"})
        if unknown:
            raise ConfigurationError(f"config: unknown section(s) {', '.join(unknown)}")
        self.tol = dict(DEFAULT_TOLERANCES)
        self.limits = dict(DEFAULT_RUNTIME)
        for key, val in (config.get("tolerances") or {}).items():
            if key not in self.tol:
                raise ConfigurationError(f"config.tolerances: unknown key {key!r}")
            self.tol[key] = _positive(val, f"config.tolerances.{key}")
        for key, val in (config.get("runtime_limits") or {}).items():
            if key not in self.limits:
                raise ConfigurationError(f"config.runtime_limits: unknown criterion {key!r}")
            self.limits[key] = _positive(val, f"config.runtime_limits.{key}")
        self.enforce_runtime = bool(config.get("enforce_runtime", True))

    def metric(self, key: str, value: float) -> Metric:
        tol = self.tol[key]
        value = float(value)
        return Metric(key, value, tol, bool(value < tol))


def _positive(v, where):
    try:
        v = float(v)
    except (TypeError, ValueError):
        raise ConfigurationError(f"{where}: expected a number, got {v!r}") from None
    if not v > 0:
        raise ConfigurationError(f"{where}: must be positive")
    return v


def _rel(a, b):
    return abs(a - b) / (1.0 + abs(b))


# -- criteria ---------------------------------------------------------------------


def c1_closed_form(b: Battery, n: int = 100):
    worst, per = 0.0, {}
    for tag, eid, params in CLOSED_FORM_CASES:
        e = catalog.get(eid, **params)
        cf = e.tilde_closed_form
        w = max(_rel(e.system(x), float(cf(x.z))) for x in e.sample(Rng(SEED), n))
        per[f"{tag} {eid}{params or ''}"] = w
        worst = max(worst, w)
    return [b.metric("C1.rel", worst)], {"per_formula": per}


def c2_gradient(b: Battery, n: int = 100):
    worst, per = 0.0, {}
    for eid in catalog.ids():
        e = catalog.get(eid)
        w = max(gradient_ratio_check(e.system, x) for x in e.sample(Rng(SEED), n))
        per[eid] = w
        worst = max(worst, w)
    return [b.metric("C2.ratio", worst)], {"per_entry": per}


def c3_coincidence(b: Battery, n_points: int = 5, T: float = 20.0, tol: float = 1e-11):
    sq = sp = 0.0
    per = {}
    for eid, params in COINCIDENCE_CASES:
        e = catalog.get(eid, **params)
        wq = wp = 0.0
        for x in e.sample(Rng(SEED), n_points, dynamics=True):
            r = coincidence(e.system, x, T, tol=tol, guard=e.flow_guard())
            wq, wp = max(wq, r.sup_q), max(wp, r.sup_p)
        per[f"{eid}{params or ''}"] = {"sup_q": wq, "sup_p": wp}
        sq, sp = max(sq, wq), max(sp, wp)
    return [b.metric("C3.sup_q", sq), b.metric("C3.sup_p", sp)], {"per_entry": per}


def _lifted_sets():
    out = []
    for eid in ("oscillator_iso", "oscillator_linear"):
        e = catalog.get(eid)
        out.append((f"{eid}.C~", e, su3_integrals(e.frame, e.system)))
    e = catalog.get("kepler")
    out.append(("kepler.A~", e, [e.lifted(f"A{i}") for i in (1, 2, 3)]))
    e = catalog.get("smorodinsky_winternitz")
    out.append(("smorodinsky_winternitz.K4~", e, [e.lifted("K4")]))
    for case in ("i", "iii"):
        e = catalog.get("henon_heiles", case=case)
        out.append((f"henon_heiles({case}).K~", e, [e.lifted("K")]))
    return out


def c4_lifted_conservation(b: Battery, n_points: int = 2, T: float = 50.0, tol: float = 1e-11):
    worst, per = 0.0, {}
    for name, e, lifts in _lifted_sets():
        w = 0.0
        for x in e.sample(Rng(SEED), n_points, dynamics=True):
            tr = integrate(e.system, x, T, tol=tol, guard=e.flow_guard())
            if tr.exit is not None:
                raise CcmorphError(f"{name}: flow ended early ({tr.exit}) at t~={tr.span:.4g}")
            w = max(w, *(conservation_drift(tr, L) for L in lifts))
        per[name] = w
        worst = max(worst, w)
    return [b.metric("C4.drift", worst)], {"per_set": per}


def c5_algebra(b: Battery, n_points: int = 20, n_hom: int = 50):
    _, f = gell_mann_su3()
    base_w = lifted_w = 0.0
    for eid in ("oscillator_iso", "oscillator_linear"):
        e = catalog.get(eid)
        pts = e.sample(Rng(SEED), n_points)
        base_w = max(base_w, algebra_residual(su3_integrals(e.frame, e.base), f, pts,
                                              CLOSURE_FACTOR))
        lifted_w = max(lifted_w, algebra_residual(su3_integrals(e.frame, e.system), f, pts,
                                                  CLOSURE_FACTOR))
    e = catalog.get("kepler")
    ob = {it.name: it.observable for it in e.integrals}
    pairs = [(ob["L1"], ob["L2"]), (ob["L3"], ob["A1"]), (ob["A1"], ob["A2"])]
    hom = bracket_homomorphism_residual(e.system, pairs, e.sample(Rng(SEED), n_hom))
    e = catalog.get("oscillator_iso")
    ob = {it.name: it.observable for it in e.integrals}
    pairs = [(ob["L1"], ob["L2"]), (ob["C1"], ob["C4"])]
    hom = max(hom, bracket_homomorphism_residual(e.system, pairs, e.sample(Rng(SEED), n_hom)))
    return [
        b.metric("C5.base", base_w),
        b.metric("C5.lifted", lifted_w),
        b.metric("C5.homomorphism", hom),
    ], {}


def c6_runge_lenz(b: Battery, n: int = 20):
    e = catalog.get("kepler")
    pts = e.sample(Rng(SEED), n)
    worst = printed = 0.0
    for i in range(3):
        lift = e.lifted(f"A{i + 1}")
        cf = e.references["A_tilde"][i]
        pr = e.references["A_tilde_printed"][i]
        for x in pts:
            v = float(lift(x))
            worst = max(worst, _rel(float(cf(x.q, x.p)), v))
            printed = max(printed, _rel(float(pr(x.q, x.p)), v))
    return [b.metric("C6.rel", worst)], {"printed_q_over_r2": printed}


def classifier_table(alpha=-1.0, c=10.0, m=1.0):
    """Cases of the attractive Coulomb table; returns (rows, mismatches)."""
    rows, bad = [], []
    for D in (9.95, 2.0, 0.0, -0.5, -3.0):
        for pth in (0.02, 0.05, 0.1, 0.2, 0.5, 1.0):
            for E in np.linspace(-0.2, 0.2, 9):
                res = catalog.classify_coulomb(alpha, D, pth, float(E), m, c)
                motion = res["label"] != "none"
                if D >= 0:
                    expect = ("relativistic" if E <= D**2 / (2 * m * c**2)
                              else "nonrelativistic only") if motion else "none"
                    ok = res["label"] == expect
                elif c**2 * pth**2 >= alpha**2:
                    ok = res["label"] != "relativistic"
                    expect = "not relativistic"
                else:
                    ok = True
                    expect = "any"
                rows.append((D, pth, float(E), res["label"], expect, ok))
                if not ok:
                    bad.append(rows[-1])
    return rows, bad


def c7_coulomb(b: Battery):
    e = catalog.relativistic_coulomb(dim=2)
    from .catalog.relativistic import coulomb_orbit_check

    cos_r = coulomb_orbit_check(e, 0.5)
    cosh_r = coulomb_orbit_check(e, 0.05)
    rows, bad = classifier_table()
    table_ok = not bad
    return [
        b.metric("C7.orbit", max(cos_r.sup_rel_r, cosh_r.sup_rel_r)),
        b.metric("C7.mass", max(cos_r.mass_relation, cosh_r.mass_relation)),
        Metric("C7.classifier_table", float(len(bad)), None, table_ok),
    ], {
        "cos_branch": {"sup_rel_r": cos_r.sup_rel_r, "phi_span": cos_r.phi_span},
        "cosh_branch": {"sup_rel_r": cosh_r.sup_rel_r, "phi_span": cosh_r.phi_span},
        "classifier_cases": len(rows),
        "classifier_mismatches": [list(r) for r in bad],
    }


def c8_darboux(b: Battery, n_points: int = 2, T: float = 10.0):
    prod = path = 0.0
    per = {}
    for ex in ("1d", "2d"):
        e = catalog.get("darboux_pair", example=ex)
        wp = wq = 0.0
        for x in e.sample(Rng(SEED), n_points, dynamics=True):
            r = catalog.darboux_check(e, x.z, T)
            wp = max(wp, abs(r.product - 1.0), r.product_drift)
            wq = max(wq, r.sup_q)
        per[ex] = {"product": wp, "path": wq}
        prod, path = max(prod, wp), max(path, wq)
    return [b.metric("C8.product", prod), b.metric("C8.path", path)], per


def c9_degeneracy(b: Battery):
    e = catalog.get("kepler")
    sys = DerivedSystem(e.base, MetamorphosisRule((Substitution.affine("alpha", -1.0, 0.5),)),
                        name="kepler(beta=+0.5)")
    detail = {}
    try:
        coincidence(sys, [1.0, 0.0, 0.0, -0.5, 0.05, 0.0], 5.0)
        crossing_ok = False
        detail["crossing"] = "no error raised"
    except ReparameterizationError as exc:
        crossing_ok = exc.crossing is not None and 0 < exc.crossing < 5.0
        detail["crossing"] = str(exc)
    e = catalog.get("oscillator_iso")
    C = su3_integrals(e.frame, e.system)
    z = np.array([0.0, 0.0, 0.0, 4.0, 0.0, 0.0])  # E~ = 8 > omega^2/2mu = 5
    try:
        C[0](z)
        window_ok = False
        detail["window"] = "no error raised"
    except WindowError as exc:
        window_ok = "omega^2/2mu" in str(exc)
        detail["window"] = str(exc)
    return [
        Metric("C9.reparameterization_error", float(not crossing_ok), None, crossing_ok),
        Metric("C9.window_error", float(not window_ok), None, window_ok),
    ], detail


def c10_typo_screen(b: Battery):
    records = catalog.typo_screen()
    unexpected = [r.name for r in records if not r.as_expected or not math.isfinite(r.residual)]
    worst = 0.0
    for case in ("i", "iii"):
        e = catalog.get("henon_heiles", case=case)
        pts = e.sample(Rng(SEED), catalog.SCREEN_POINTS)
        worst = max(worst, catalog.screen_residual(e.lifted("K"), e.tilde_closed_form, pts))
    return [
        Metric("C10.records_as_documented", float(len(unexpected)), None, not unexpected),
        b.metric("C10.lift_screen", worst),
    ], {"records": [r.to_dict() for r in records], "unexpected": unexpected}


@dataclass(frozen=True)
class Criterion:
    id: str
    title: str
    suite: str
    run: Callable


CRITERIA = (
    Criterion("C1", "closed-form agreement", "closed_form", c1_closed_form),
    Criterion("C2", "gradient proportionality", "gradient", c2_gradient),
    Criterion("C3", "trajectory coincidence", "coincidence", c3_coincidence),
    Criterion("C4", "lifted-integral conservation", "conservation", c4_lifted_conservation),
    Criterion("C5", "algebra closure", "algebra", c5_algebra),
    Criterion("C6", "Runge-Lenz lift closed form", "runge_lenz", c6_runge_lenz),
    Criterion("C7", "relativistic Coulomb orbits", "analytic_orbit", c7_coulomb),
    Criterion("C8", "Darboux product", "darboux_product", c8_darboux),
    Criterion("C9", "degeneracy guards", "degeneracy", c9_degeneracy),
    Criterion("C10", "typo screen", "typo_screen", c10_typo_screen),
)

SUITES = tuple(c.suite for c in CRITERIA)


def select(suite: str) -> list:
    """Criteria for a suite name, a criterion id, or ``all``."""
    if suite == "all":
        return list(CRITERIA)
    chosen = [c for c in CRITERIA if suite in (c.suite, c.id)]
    if not chosen:
        raise ConfigurationError(
            f"unknown suite {suite!r}; choose all, {', '.join(SUITES)} or C1..C10"
        )
    return chosen


def run_criterion(crit: Criterion, battery: Optional[Battery] = None) -> CriterionResult:
    battery = battery or Battery()
    res = CriterionResult(crit.id, crit.title, crit.suite,
                          runtime_limit=battery.limits[crit.id],
                          enforce_runtime=battery.enforce_runtime)
    t0 = time.perf_counter()
    try:
        res.metrics, res.detail = crit.run(battery)
    except CcmorphError as exc:
        res.error = f"{type(exc).__name__}: {exc}"
    res.runtime = time.perf_counter() - t0
    return res


def run(suite: str = "all", config: Optional[dict] = None, progress: Callable = None) -> list:
    battery = Battery(config)
    out = []
    for crit in select(suite):
        r = run_criterion(crit, battery)
        if progress:
            progress(r)
        out.append(r)
    return out


def summary_table(results: list) -> str:
    rows = [("id", "status", "runtime", "limit", "criterion")]
    for r in results:
        rows.append((r.id, "PASS" if r.passed else "FAIL", f"{r.runtime:.2f}s",
                     f"{r.runtime_limit:g}s", r.title))
    widths = [max(len(row[i]) for row in rows) for i in range(5)]
    lines = ["  ".join(v.ljust(w) for v, w in zip(row, widths)).rstrip() for row in rows]
    lines.insert(1, "  ".join("-" * w for w in widths))
    for r in results:
        if not r.passed:
            lines.append(f"{r.id} failures: " + "; ".join(r.failures()))
    return "\n".join(lines)
