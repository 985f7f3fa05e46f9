"""Command line: ``ccmorph run | list | check``.

``run`` executes one scenario file and writes ``report.json``,
``report.txt``, ``timings.json`` and one CSV table per trajectory into the
output directory (``--out``, else ``$CCMORPH_OUT``, else ``<scenario>_out``).
Exit status is 0 when every suite passes, 1 when a suite fails and 2 when
the scenario does not validate.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import acceptance, catalog
from .algebra import (
    CLOSURE_FACTOR,
    algebra_residual,
    bracket_homomorphism_residual,
    gell_mann_su3,
    su3_integrals,
)
from .core import PhasePoint, Rng
from .dynamics import ALIGNMENT_POINTS, coincidence, conservation_drift, integrate, time_map
from .errors import CcmorphError, ConfigurationError
from .metamorph import DerivedSystem, LiftedObservable, MetamorphosisRule

ENV_OUT = "CCMORPH_OUT"

SUITES = ("coincidence", "conservation", "algebra", "closed_form", "analytic_orbit",
          "darboux_product")

DEFAULT_TOLERANCES = {
    "coincidence": 1e-6,
    "conservation": 1e-7,
    "algebra": 1e-9,
    "closed_form": 1e-12,
    "analytic_orbit": 1e-6,
    "mass_relation": 1e-10,
    "darboux_product": 1e-9,
    "darboux_path": 1e-6,
}

SCENARIO_KEYS = ("entry", "params", "rule", "initial_points", "horizon", "tol", "suites",
                 "tolerances", "orbits")

DEFAULT_SAMPLER = {"seed": 0, "count": 3}


class ScenarioError(ConfigurationError):
    """Scenario validation failure, tied to a field and (when known) a line."""

    def __init__(self, field: str, message: str, line: Optional[int] = None):
        self.field = field
        self.line = line
        super().__init__(message)

    def render(self, path: str) -> str:
        where = f"{path}:{self.line}" if self.line else path
        return f"{where}: field '{self.field}': {self}"


# -- scenario ---------------------------------------------------------------------


@dataclass
class Scenario:
    entry: str
    params: dict
    rule: str
    initial_points: object
    horizon: float
    tol: float
    suites: list
    tolerances: dict
    orbits: list

    def to_dict(self) -> dict:
        return {
            "entry": self.entry,
            "params": self.params,
            "rule": self.rule,
            "initial_points": self.initial_points,
            "horizon": self.horizon,
            "tol": self.tol,
            "suites": self.suites,
            "tolerances": self.tolerances,
            "orbits": self.orbits,
        }


def _line_of(text: str, key: str) -> Optional[int]:
    needle = f'"{key}"'
    for i, line in enumerate(text.splitlines(), 1):
        if needle in line:
            return i
    return None


def _number(v, where, text, key, positive=True):
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ScenarioError(where, f"expected a finite number, got {v!r}", _line_of(text, key))
    if positive and not v > 0:
        raise ScenarioError(where, f"must be positive, got {v!r}", _line_of(text, key))
    return float(v)


def parse_scenario(text: str, tol: Optional[float] = None, seed: Optional[int] = None) -> Scenario:
    """Parse and validate a scenario document; raise ScenarioError on any problem."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError("<document>", f"invalid JSON: {exc.msg} (column {exc.colno})",
                            exc.lineno) from None
    if not isinstance(raw, dict):
        raise ScenarioError("<document>", "top level must be an object", 1)
    unknown = sorted(set(raw) - set(SCENARIO_KEYS))
    if unknown:
        raise ScenarioError(unknown[0], "unknown field", _line_of(text, unknown[0]))

    if "entry" not in raw:
        raise ScenarioError("entry", "missing required field")
    entry = raw["entry"]
    if entry not in catalog.ids():
        raise ScenarioError(
            "entry", f"unknown catalog entry {entry!r}; known: {', '.join(catalog.ids())}",
            _line_of(text, "entry"),
        )
    params = raw.get("params", {})
    if not isinstance(params, dict):
        raise ScenarioError("params", "expected an object", _line_of(text, "params"))
    allowed = catalog.schema(entry)
    for k in params:
        if k not in allowed:
            raise ScenarioError(f"params.{k}",
                                f"not a parameter of {entry} (has {', '.join(allowed)})",
                                _line_of(text, k))

    rule = raw.get("rule", "entry")
    if rule not in ("entry", "identity"):
        raise ScenarioError("rule", f"expected 'entry' or 'identity', got {rule!r}",
                            _line_of(text, "rule"))

    horizon = _number(raw.get("horizon", 20.0), "horizon", text, "horizon")
    tol_v = _number(tol if tol is not None else raw.get("tol", 1e-11), "tol", text, "tol")

    suites = raw.get("suites", ["coincidence"])
    if not isinstance(suites, list) or not suites:
        raise ScenarioError("suites", "expected a non-empty list", _line_of(text, "suites"))
    for s in suites:
        if s not in SUITES:
            raise ScenarioError("suites", f"unknown suite {s!r}; choose from {', '.join(SUITES)}",
                                _line_of(text, "suites"))
    suites = [s for s in SUITES if s in suites]

    tolerances = dict(DEFAULT_TOLERANCES)
    given = raw.get("tolerances", {})
    if not isinstance(given, dict):
        raise ScenarioError("tolerances", "expected an object", _line_of(text, "tolerances"))
    for k, v in given.items():
        if k not in DEFAULT_TOLERANCES:
            raise ScenarioError(f"tolerances.{k}", "unknown tolerance key", _line_of(text, k))
        tolerances[k] = _number(v, f"tolerances.{k}", text, k)

    pts = raw.get("initial_points", dict(DEFAULT_SAMPLER))
    if isinstance(pts, dict):
        bad = sorted(set(pts) - {"seed", "box", "count"})
        if bad:
            raise ScenarioError(f"initial_points.{bad[0]}", "unknown sampler field",
                                _line_of(text, bad[0]))
        pts = dict(DEFAULT_SAMPLER, **pts)
        if seed is not None:
            pts["seed"] = int(seed)
        if not isinstance(pts["seed"], int) or isinstance(pts["seed"], bool):
            raise ScenarioError("initial_points.seed", "expected an integer",
                                _line_of(text, "seed"))
        if not isinstance(pts["count"], int) or pts["count"] < 1:
            raise ScenarioError("initial_points.count", "expected a positive integer",
                                _line_of(text, "count"))
    elif isinstance(pts, list):
        if not pts:
            raise ScenarioError("initial_points", "empty list", _line_of(text, "initial_points"))
    else:
        raise ScenarioError("initial_points", "expected a list of points or a sampler object",
                            _line_of(text, "initial_points"))

    orbits = raw.get("orbits", [{"p_theta": 0.5}, {"p_theta": 0.05}])
    if not isinstance(orbits, list) or not all(isinstance(o, dict) for o in orbits):
        raise ScenarioError("orbits", "expected a list of objects", _line_of(text, "orbits"))
    for i, o in enumerate(orbits):
        bad = sorted(set(o) - {"p_theta", "r0", "p_r0"})
        if bad or "p_theta" not in o:
            raise ScenarioError(f"orbits[{i}]", "needs p_theta and optionally r0, p_r0",
                                _line_of(text, "orbits"))

    return Scenario(entry, params, rule, pts, horizon, tol_v, suites, tolerances, orbits)


@dataclass
class Setup:
    """A validated scenario bound to concrete objects."""

    scenario: Scenario
    entry: catalog.CatalogEntry
    system: DerivedSystem
    closed_form: object
    points: list

    def lifted(self, observable) -> LiftedObservable:
        return LiftedObservable(self.system, observable)


def _admissible(entry, system, z) -> bool:
    if not all(g(z) for g in entry.guards):
        return False
    try:
        h, _ = system.solve(z)
    except CcmorphError:
        return False
    if entry.energy_guard is not None and not entry.energy_guard(h):
        return False
    return math.isfinite(h)


def build(sc: Scenario, text: str = "") -> Setup:
    """Construct the entry and initial points; guards are checked here, before any run."""
    try:
        entry = catalog.get(sc.entry, **sc.params)
    except ConfigurationError as exc:
        raise ScenarioError("params", str(exc), _line_of(text, "params")) from None
    if sc.rule == "identity":
        system = DerivedSystem(entry.base, MetamorphosisRule.identity(), name=f"{entry.id}(identity)")
        closed = entry.base.field()
    else:
        system, closed = entry.system, entry.tilde_closed_form

    need = {
        "closed_form": (closed is not None, "entry has no closed form"),
        "algebra": (entry.frame is not None or len(entry.verified_integrals()) >= 2,
                    "entry has no ladder frame and fewer than two verified integrals"),
        "conservation": (True, ""),
        "coincidence": (True, ""),
        "analytic_orbit": (entry.id == "relativistic_coulomb" and entry.N == 2
                           and sc.rule == "entry",
                           "needs relativistic_coulomb with dim = 2 and the entry rule"),
        "darboux_product": (entry.id == "darboux_pair" and sc.rule == "entry",
                            "needs darboux_pair with the entry rule"),
    }
    for s in sc.suites:
        ok, why = need[s]
        if not ok:
            raise ScenarioError("suites", f"suite {s!r} not applicable to {entry.id}: {why}",
                                _line_of(text, "suites"))

    dim = 2 * entry.N
    spec = sc.initial_points
    if isinstance(spec, list):
        points = []
        for i, z in enumerate(spec):
            if (not isinstance(z, list) or len(z) != dim
                    or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in z)):
                raise ScenarioError(f"initial_points[{i}]", f"expected {dim} numbers",
                                    _line_of(text, "initial_points"))
            z = np.array(z, dtype=float)
            if not _admissible(entry, system, z):
                raise ScenarioError(f"initial_points[{i}]",
                                    "point fails the entry guards or the energy solve",
                                    _line_of(text, "initial_points"))
            points.append(PhasePoint.from_z(z))
    else:
        box = spec.get("box") or entry.dyn_box
        if len(box) != dim or not all(
            isinstance(b, (list, tuple)) and len(b) == 2 and b[0] < b[1] for b in box
        ):
            raise ScenarioError("initial_points.box", f"expected {dim} [lo, hi] pairs",
                                _line_of(text, "box"))
        rng = Rng(spec["seed"])
        points, tries = [], 0
        while len(points) < spec["count"]:
            tries += 1
            if tries > 1000 * spec["count"]:
                raise ScenarioError("initial_points", "guards not satisfiable inside the box",
                                    _line_of(text, "initial_points"))
            z = np.array([rng.uniform(lo, hi) for lo, hi in box])
            if _admissible(entry, system, z):
                points.append(PhasePoint.from_z(z))
    return Setup(sc, entry, system, closed, points)


# -- suites -----------------------------------------------------------------------


@dataclass
class SuiteResult:
    name: str
    metrics: list = field(default_factory=list)  # (label, value, tol)
    events: list = field(default_factory=list)
    error: Optional[str] = None
    runtime: float = 0.0

    def add(self, label, value, tol):
        self.metrics.append((label, float(value), float(tol)))

    @property
    def passed(self) -> bool:
        return self.error is None and all(v < t for _, v, t in self.metrics)

    def failures(self) -> list:
        out = [f"{self.name}: {lab} = {v:.3e} (tol {t:.1e})"
               for lab, v, t in self.metrics if not v < t]
        if self.error:
            out.append(f"{self.name}: {self.error}")
        return out

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "metrics": [{"label": lab, "value": _jsonable(v), "tol": t, "ok": bool(v < t)}
                        for lab, v, t in self.metrics],
            "events": self.events,
            "error": self.error,
        }


@dataclass
class Table:
    name: str
    header: list
    rows: np.ndarray


def _table(name, t, tt, Z, H, Ht) -> Table:
    N = Z.shape[1] // 2
    header = (["t", "t_tilde"] + [f"q{i + 1}" for i in range(N)]
              + [f"p{i + 1}" for i in range(N)] + ["H", "H_tilde"])
    rows = np.column_stack([t, tt, Z, H, Ht])
    return Table(name, header, rows)


def _suite_coincidence(st: Setup, res: SuiteResult, tables: dict):
    sc, tol = st.scenario, st.scenario.tolerances["coincidence"]
    for i, x in enumerate(st.points):
        r = coincidence(st.system, x, sc.horizon, tol=sc.tol, guard=st.entry.flow_guard())
        res.add(f"point{i}.sup_q", r.sup_q, tol)
        res.add(f"point{i}.sup_p", r.sup_p, tol)
        res.events.append({"point": i, "energy": r.energy, "overlap": r.overlap,
                           "exits": r.exits})
        m = r.match
        base = st.system.base_field(r.energy)
        H = np.array([float(base(z)) for z in m.base_states])
        Ht = np.array([float(st.system(z)) for z in m.tilde_states])
        tables[i] = _table(f"trajectory_{i:03d}", m.t, m.t_tilde, m.tilde_states, H, Ht)


def _suite_conservation(st: Setup, res: SuiteResult, tables: dict):
    sc, tol = st.scenario, st.scenario.tolerances["conservation"]
    lifts = [(it.name, st.lifted(it.observable)) for it in st.entry.verified_integrals()]
    for i, x in enumerate(st.points):
        tr = integrate(st.system, x, sc.horizon, tol=sc.tol, guard=st.entry.flow_guard())
        if tr.exit:
            res.events.append({"point": i, "exit": tr.exit, "t_tilde": tr.span})
        res.add(f"point{i}.H_tilde", conservation_drift(tr, st.system), tol)
        for name, L in lifts:
            try:
                d = conservation_drift(tr, L)
            except CcmorphError as exc:
                res.events.append({"point": i, "integral": name, "skipped": str(exc)})
                continue
            res.add(f"point{i}.{name}~", d, tol)
        if i not in tables:
            tm = time_map(tr, st.system)
            tt = np.linspace(0.0, tr.span, ALIGNMENT_POINTS)
            Z = tr(tt)
            base = st.system.base_field(tr.energy)
            H = np.array([float(base(z)) for z in Z])
            Ht = np.array([float(st.system(z)) for z in Z])
            tables[i] = _table(f"trajectory_{i:03d}", tm.t(tt), tt, Z, H, Ht)


def _suite_algebra(st: Setup, res: SuiteResult, tables: dict):
    tol = st.scenario.tolerances["algebra"]
    e = st.entry
    if e.frame is not None:
        _, f = gell_mann_su3()
        res.add("su3.base", algebra_residual(su3_integrals(e.frame, e.base), f, st.points,
                                             CLOSURE_FACTOR), tol)
        try:
            lifted = algebra_residual(su3_integrals(e.frame, st.system), f, st.points,
                                      CLOSURE_FACTOR)
            res.add("su3.lifted", lifted, tol)
        except CcmorphError as exc:
            res.events.append({"su3.lifted": f"skipped: {exc}"})
    obs = [it.observable for it in e.verified_integrals()][:4]
    pairs = [(a, b) for k, a in enumerate(obs) for b in obs[k + 1:]]
    if pairs:
        res.add("homomorphism", bracket_homomorphism_residual(st.system, pairs, st.points), tol)


def _suite_closed_form(st: Setup, res: SuiteResult, tables: dict):
    tol = st.scenario.tolerances["closed_form"]
    w = 0.0
    for x in st.points:
        a, b = st.system(x), float(st.closed_form(x.z))
        w = max(w, abs(a - b) / (1.0 + abs(b)))
    res.add("relative", w, tol)


def _suite_analytic_orbit(st: Setup, res: SuiteResult, tables: dict):
    from .catalog.relativistic import coulomb_orbit_check

    tols = st.scenario.tolerances
    for i, o in enumerate(st.scenario.orbits):
        r = coulomb_orbit_check(st.entry, o["p_theta"], r0=o.get("r0", 2.0),
                                p_r0=o.get("p_r0", 0.0), tol=st.scenario.tol)
        res.add(f"orbit{i}.sup_rel_r", r.sup_rel_r, tols["analytic_orbit"])
        res.add(f"orbit{i}.mass_relation", r.mass_relation, tols["mass_relation"])
        res.events.append({"orbit": i, "branch": r.branch, "energy": r.energy,
                           "phi_span": r.phi_span, "degenerate": r.degenerate})


def _suite_darboux(st: Setup, res: SuiteResult, tables: dict):
    tols = st.scenario.tolerances
    for i, x in enumerate(st.points):
        r = catalog.darboux_check(st.entry, x.z, st.scenario.horizon, tol=st.scenario.tol)
        res.add(f"point{i}.product", max(abs(r.product - 1.0), r.product_drift),
                tols["darboux_product"])
        res.add(f"point{i}.path", r.sup_q, tols["darboux_path"])
        res.events.append({"point": i, "energy": r.energy, "energy_prime": r.energy_prime})


_RUNNERS = {
    "coincidence": _suite_coincidence,
    "conservation": _suite_conservation,
    "algebra": _suite_algebra,
    "closed_form": _suite_closed_form,
    "analytic_orbit": _suite_analytic_orbit,
    "darboux_product": _suite_darboux,
}


def execute(st: Setup):
    """Run the scenario's suites; returns (suite results, trajectory tables)."""
    results, tables = [], {}
    for name in st.scenario.suites:
        res = SuiteResult(name)
        t0 = time.perf_counter()
        try:
            _RUNNERS[name](st, res, tables)
        except CcmorphError as exc:
            res.error = f"{type(exc).__name__}: {exc}"
        res.runtime = time.perf_counter() - t0
        results.append(res)
    return results, [tables[k] for k in sorted(tables)]


# -- output -----------------------------------------------------------------------


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    return v


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.generic):
        obj = obj.item()
    return _jsonable(obj)


def write_atomic(path: Path, data: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def table_csv(tab: Table) -> str:
    lines = [",".join(tab.header)]
    lines += [",".join("%.17g" % v for v in row) for row in tab.rows]
    return "\n".join(lines) + "\n"


def build_report(st: Setup, results: list, files: list) -> dict:
    return _clean({
        "scenario": st.scenario.to_dict(),
        "entry": {"id": st.entry.id, "params": st.entry.params, "tags": list(st.entry.tags),
                  "solver": st.system.solver},
        "initial_points": [list(p.z) for p in st.points],
        "passed": all(r.passed for r in results),
        "suites": {r.name: r.to_dict() for r in results},
        "files": files,
    })


def report_text(report: dict) -> str:
    rows = [("suite", "metric", "value", "tol", "status")]
    for name, s in report["suites"].items():
        for m in s["metrics"]:
            v = m["value"]
            rows.append((name, m["label"], v if isinstance(v, str) else f"{v:.3e}",
                         f"{m['tol']:.1e}", "ok" if m["ok"] else "FAIL"))
        if s["error"]:
            rows.append((name, "error", s["error"], "", "FAIL"))
    widths = [max(len(r[i]) for r in rows) for i in range(5)]
    out = [f"scenario: {report['entry']['id']} {json.dumps(report['entry']['params'], sort_keys=True)}"]
    out += ["  ".join(v.ljust(w) for v, w in zip(r, widths)).rstrip() for r in rows[:1]]
    out.append("  ".join("-" * w for w in widths))
    out += ["  ".join(v.ljust(w) for v, w in zip(r, widths)).rstrip() for r in rows[1:]]
    for name, s in report["suites"].items():
        for ev in s["events"]:
            if ev.get("exits") or ev.get("exit"):
                out.append(f"{name}: guard exit {json.dumps(ev, sort_keys=True)}")
    out.append(f"overall: {'PASS' if report['passed'] else 'FAIL'}")
    return "\n".join(out) + "\n"


def output_dir(arg: Optional[str], scenario_path: str) -> Path:
    if arg:
        return Path(arg)
    env = os.environ.get(ENV_OUT)
    if env:
        return Path(env)
    return Path(f"{Path(scenario_path).stem}_out")


# -- commands ---------------------------------------------------------------------


def cmd_run(args) -> int:
    path = args.file
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"{path}: cannot read scenario: {exc.strerror}", file=sys.stderr)
        return 2
    try:
        sc = parse_scenario(text, tol=args.tol, seed=args.seed)
        st = build(sc, text)
    except ScenarioError as exc:
        print(exc.render(path), file=sys.stderr)
        return 2

    t0 = time.perf_counter()
    results, tables = execute(st)
    total = time.perf_counter() - t0

    out = output_dir(args.out, path)
    files = []
    for tab in tables:
        name = f"{tab.name}.csv"
        write_atomic(out / name, table_csv(tab))
        files.append(name)
    if args.plot:
        from . import plotting

        for tab in tables:
            name = f"{tab.name}.png"
            plotting.plot_table(tab.header, tab.rows, out / name, title=st.entry.title)
            files.append(name)
    report = build_report(st, results, files)
    write_atomic(out / "report.json", json.dumps(report, indent=2, sort_keys=True) + "\n")
    txt = report_text(report)
    write_atomic(out / "report.txt", txt)
    timings = {"total": total, "suites": {r.name: r.runtime for r in results}}
    write_atomic(out / "timings.json", json.dumps(timings, indent=2, sort_keys=True) + "\n")

    print(txt, end="")
    print(f"wrote {len(files) + 3} files to {out}")
    if report["passed"]:
        return 0
    for r in results:
        for line in r.failures():
            print(line, file=sys.stderr)
    return 1


def cmd_list(args) -> int:
    entries = catalog.listing()
    if args.json:
        print(json.dumps(_clean(entries), indent=2, sort_keys=True))
        return 0
    for d in entries:
        print(d["id"])
        print(f"  title:  {d['title']}")
        params = ", ".join(f"{k}={v!r}" for k, v in d["params"].items())
        print(f"  params: {params or '-'}")
        print(f"  guards: {'; '.join(d['guards']) or '-'}")
        print(f"  tags:   {', '.join(d['tags'])}")
        print(f"  solver: {d['solver']}")
    print(f"{len(entries)} entries")
    return 0


def cmd_check(args) -> int:
    config = None
    if args.config:
        try:
            config = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except OSError as exc:
            print(f"{args.config}: cannot read config: {exc.strerror}", file=sys.stderr)
            return 2
        except json.JSONDecodeError as exc:
            print(f"{args.config}:{exc.lineno}: invalid JSON: {exc.msg}", file=sys.stderr)
            return 2
        if not isinstance(config, dict):
            print(f"{args.config}: top level must be an object", file=sys.stderr)
            return 2
    try:
        acceptance.select(args.suite)
        results = acceptance.run(args.suite, config, progress=lambda r: print(r.line(), flush=True))
    except ConfigurationError as exc:
        print(f"check: {exc}", file=sys.stderr)
        return 2
    print()
    print(acceptance.summary_table(results))
    if args.json:
        doc = {"passed": all(r.passed for r in results),
               "criteria": [r.to_dict() for r in results]}
        write_atomic(Path(args.json), json.dumps(_clean(doc), indent=2, sort_keys=True) + "\n")
    return 0 if all(r.passed for r in results) else 1


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ccmorph", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a scenario file")
    r.add_argument("file")
    r.add_argument("--out", help=f"output directory (default ${ENV_OUT} or <scenario>_out)")
    r.add_argument("--tol", type=float, help="integrator tolerance, overrides the scenario")
    r.add_argument("--seed", type=int, help="sampler seed, overrides the scenario")
    r.add_argument("--plot", action="store_true",
                   help="also render a PNG per trajectory (needs matplotlib)")
    r.set_defaults(func=cmd_run)

    ls = sub.add_parser("list", help="list catalog entries")
    ls.add_argument("--json", action="store_true", help="machine-readable listing")
    ls.set_defaults(func=cmd_list)

    c = sub.add_parser("check", help="run the acceptance battery")
    c.add_argument("--suite", default="all",
                   help=f"all, a criterion id or one of: {', '.join(acceptance.SUITES)}")
    c.add_argument("--config", help="JSON file with tolerances / runtime_limits overrides")
    c.add_argument("--json", help="also write the results to this file")
    c.set_defaults(func=cmd_check)
    return ap


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
