"""Hamiltonian flows, the time map between derived and base flows, and coincidence.

The H-flow at couplings ``lam(E)`` and the Ht-flow at energy E trace the same
phase-space curve; their clocks are related by ``dt_tilde/dt = Omega``.  This
module integrates both flows with an embedded 5(4) Runge-Kutta pair, builds
``t(t_tilde)`` by quadrature of ``1/Omega`` and compares the curves on a
common grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .core import PhasePoint, ScalarField, _as_z
from .errors import (
    ConfigurationError,
    DegenerateMetamorphosisError,
    DomainError,
    NoSolutionError,
    ReparameterizationError,
    StepSizeError,
)
from .metamorph import DerivedSystem

__all__ = [
    "Trajectory",
    "TimeMap",
    "MatchReport",
    "CoincidenceReport",
    "integrate",
    "time_map",
    "match_trajectories",
    "conservation_drift",
    "coincidence",
    "ALIGNMENT_POINTS",
]

ALIGNMENT_POINTS = 512

# Dormand-Prince 5(4) tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])
# continuous extension (Hairer & Wanner, dopri5 dense output)
_D = np.array(
    [
        -12715105075 / 11282082432,
        0.0,
        87487479700 / 32700410799,
        -10690763975 / 1880347072,
        701980252875 / 199316789632,
        -1453857185 / 822651844,
        69997945 / 29380423,
    ]
)


def _as_field(hamiltonian):
    if hasattr(hamiltonian, "value_and_grad"):
        return hamiltonian
    if callable(hamiltonian):
        return ScalarField(hamiltonian)
    raise ConfigurationError(f"not a field: {hamiltonian!r}")


def _rhs(fld, z):
    _, g = fld.value_and_grad(z)
    n = z.size // 2
    return np.concatenate([g[n:], -g[:n]])


class Trajectory:
    """Accepted integrator nodes plus the dense interpolant between them.

    ``exit`` is None for a complete run, otherwise ``"guard"`` or ``"domain"``
    for an early stop at the last accepted node.
    """

    def __init__(self, t, z, rcont, energy, meta="", exit=None, requested=None):
        self.t = np.asarray(t, dtype=float)
        self.z = np.asarray(z, dtype=float)
        self.rcont = np.asarray(rcont, dtype=float).reshape(-1, 5, self.z.shape[1])
        self.energy = float(energy)
        self.meta = meta
        self.exit = exit
        self.requested = self.t[-1] if requested is None else float(requested)
        for a in (self.t, self.z, self.rcont):
            a.flags.writeable = False

    @property
    def N(self) -> int:
        return self.z.shape[1] // 2

    @property
    def span(self) -> float:
        return float(self.t[-1] - self.t[0])

    @property
    def steps(self) -> int:
        return self.t.size - 1

    @property
    def samples(self) -> list:
        return [(float(t), PhasePoint.from_z(z)) for t, z in zip(self.t, self.z)]

    def __repr__(self):
        return (
            f"Trajectory({self.meta!r}, steps={self.steps}, span={self.span:g}, "
            f"exit={self.exit!r})"
        )

    def __call__(self, t):
        """Dense state(s) at ``t`` (scalar -> (2N,), array -> (n, 2N))."""
        ts = np.atleast_1d(np.asarray(t, dtype=float))
        lo, hi = self.t[0], self.t[-1]
        tiny = 1e-12 * max(1.0, abs(hi))
        if np.any(ts < lo - tiny) or np.any(ts > hi + tiny):
            raise DomainError(f"time outside trajectory span [{lo:g}, {hi:g}]")
        ts = np.clip(ts, lo, hi)
        k = np.clip(np.searchsorted(self.t, ts, side="right") - 1, 0, self.steps - 1)
        h = self.t[k + 1] - self.t[k]
        th = ((ts - self.t[k]) / h)[:, None]
        r = self.rcont[k]
        out = r[:, 0] + th * (r[:, 1] + (1 - th) * (r[:, 2] + th * (r[:, 3] + (1 - th) * r[:, 4])))
        # nodes reproduce the stored samples exactly
        at_left = ts == self.t[k]
        at_right = ts == self.t[k + 1]
        out[at_left] = self.z[k[at_left]]
        out[at_right] = self.z[k[at_right] + 1]
        return out[0] if np.ndim(t) == 0 else out

    def state(self, t) -> PhasePoint:
        return PhasePoint.from_z(self(float(t)))


def _initial_step(fld, z0, f0, T, tol):
    sc = tol + tol * np.abs(z0)
    d0 = np.sqrt(np.mean((z0 / sc) ** 2))
    d1 = np.sqrt(np.mean((f0 / sc) ** 2))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, T)
    try:
        f1 = _rhs(fld, z0 + h0 * f0)
        d2 = np.sqrt(np.mean(((f1 - f0) / sc) ** 2)) / h0
    except DomainError:
        return min(h0, T) * 0.1
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1, T)


def integrate(
    hamiltonian,
    x0,
    T: float,
    tol: float = 1e-10,
    guard: Optional[Callable] = None,
    max_steps: int = 2_000_000,
    first_step: Optional[float] = None,
    adaptive: bool = True,
    meta: str = "",
) -> Trajectory:
    """Integrate Hamilton's equations of ``hamiltonian`` from ``x0`` over ``[0, T]``.

    ``hamiltonian`` is any field with ``value_and_grad`` (or a plain ``f(q, p)``).
    Steps are controlled so the RMS local error, scaled by ``tol*(1+|z|)``,
    stays below one.  A DomainError inside a step rejects it; if that drives
    the step below ``1e-14*T`` the run ends with ``exit="domain"``.  ``guard``
    is checked at every accepted node; the run stops before the first node
    where it fails, with ``exit="guard"``.  Step underflow under accuracy
    control raises StepSizeError carrying the partial trajectory.

    ``adaptive=False`` takes fixed steps of ``first_step`` (for order studies).
    """
    fld = _as_field(hamiltonian)
    z = _as_z(x0).astype(float).copy()
    T = float(T)
    if not (1e-14 <= tol <= 1e-4):
        raise ConfigurationError(f"tol must lie in [1e-14, 1e-4], got {tol:g}")
    if not (T > 0 and math.isfinite(T)):
        raise ConfigurationError(f"duration must be positive and finite, got {T!r}")
    energy = fld(z)
    meta = meta or getattr(fld, "name", "")
    if guard is not None and not guard(z):
        raise DomainError("initial point violates the admissibility guard")
    f = _rhs(fld, z)
    ts, zs, rc = [0.0], [z.copy()], []
    t = 0.0
    if adaptive:
        h = first_step or _initial_step(fld, z, f, T, tol)
    else:
        if not first_step:
            raise ConfigurationError("fixed-step integration needs first_step")
        h = float(first_step)
    hmin = 1e-14 * T
    exit_flag = None
    k = [None] * 7
    n_steps = 0
    while t < T:
        if n_steps >= max_steps:
            raise StepSizeError(
                f"step budget {max_steps} exhausted at t={t:g}",
                t,
                PhasePoint.from_z(z),
                Trajectory(ts, zs, rc, energy, meta, "steps", T) if rc else None,
            )
        last = t + h >= T * (1 - 1e-15)
        if last:
            h = T - t
        try:
            k[0] = f
            for s in range(1, 7):
                a = _A[s]
                zi = z + h * sum(a[j] * k[j] for j in range(s) if a[j] != 0.0)
                k[s] = _rhs(fld, zi)
            z_new = zi  # stage 7 is evaluated at the 5th-order solution
            if not np.all(np.isfinite(z_new)) or not np.all(np.isfinite(k[6])):
                raise DomainError("non-finite stage")
        except (DomainError, DegenerateMetamorphosisError, NoSolutionError):
            h *= 0.25
            if h < hmin:
                exit_flag = "domain"
                break
            continue
        if adaptive:
            errv = h * np.tensordot(_E, np.array(k), axes=1)
            sc = tol + tol * np.maximum(np.abs(z), np.abs(z_new))
            err = math.sqrt(float(np.mean((errv / sc) ** 2)))
            if not math.isfinite(err):
                err = 1e10
            if err > 1.0:
                h *= max(0.2, 0.9 * err**-0.2)
                if h < hmin:
                    raise StepSizeError(
                        f"step size underflow at t={t:.6g} (h < {hmin:.1e})",
                        t,
                        PhasePoint.from_z(z),
                        Trajectory(ts, zs, rc, energy, meta, "stepsize", T) if rc else None,
                    )
                continue
        if guard is not None and not guard(z_new):
            exit_flag = "guard"
            break
        ydiff = z_new - z
        bspl = h * k[0] - ydiff
        rc.append(
            [
                z,
                ydiff,
                bspl,
                ydiff - h * k[6] - bspl,
                h * np.tensordot(_D, np.array(k), axes=1),
            ]
        )
        t = T if last else t + h
        z = z_new
        f = k[6]
        ts.append(t)
        zs.append(z.copy())
        n_steps += 1
        if adaptive:
            fac = 0.9 * err**-0.2 if err > 0 else 10.0
            h *= min(10.0, max(0.2, fac))
    if not rc:
        if exit_flag == "domain":
            raise StepSizeError(
                "no step could be taken inside the domain", 0.0, PhasePoint.from_z(z), None
            )
        raise DomainError("guard failed before the first accepted step")
    return Trajectory(ts, zs, rc, energy, meta, exit_flag, T)


# -- time map -----------------------------------------------------------------

_MAX_DEPTH = 20
_GL8 = np.polynomial.legendre.leggauss(8)
_GL16 = np.polynomial.legendre.leggauss(16)


def _omega_many(sys: DerivedSystem, Z: np.ndarray) -> np.ndarray:
    return sys.omega_many(Z)


class TimeMap:
    """Monotone map between the derived clock ``t_tilde`` and the base clock ``t``.

    ``t(t_tilde)`` is exact to quadrature accuracy at any argument: between
    stored pairs it is completed by Gauss-Legendre quadrature of ``1/Omega``
    along the dense trajectory.
    """

    def __init__(self, traj: Trajectory, omega: Callable, tt, t, sign: float):
        self.traj = traj
        self._omega = omega
        self.t_tilde_nodes = np.asarray(tt, dtype=float)
        self.t_nodes = np.asarray(t, dtype=float)
        self.sign = sign
        self.t_tilde_nodes.flags.writeable = False
        self.t_nodes.flags.writeable = False

    @property
    def pairs(self) -> np.ndarray:
        return np.column_stack([self.t_nodes, self.t_tilde_nodes])

    @property
    def t_end(self) -> float:
        return float(self.t_nodes[-1])

    def _partial(self, k, a, b):
        x, w = _GL16
        s = 0.5 * (a + b) + 0.5 * (b - a) * x
        return 0.5 * (b - a) * np.dot(w, 1.0 / self._omega(self.traj(s)))

    def t(self, t_tilde):
        """Base time at derived time(s) ``t_tilde``."""
        arr = np.atleast_1d(np.asarray(t_tilde, dtype=float))
        nodes = self.t_tilde_nodes
        if np.any(arr < nodes[0] - 1e-12) or np.any(arr > nodes[-1] * (1 + 1e-12) + 1e-12):
            raise DomainError("t_tilde outside the mapped span")
        arr = np.clip(arr, nodes[0], nodes[-1])
        k = np.clip(np.searchsorted(nodes, arr, side="right") - 1, 0, nodes.size - 2)
        out = np.empty_like(arr)
        for i, (kk, a) in enumerate(zip(k, arr)):
            base = self.t_nodes[kk]
            out[i] = base if a == nodes[kk] else base + self._partial(kk, nodes[kk], a)
        return out[0] if np.ndim(t_tilde) == 0 else out

    def t_tilde(self, t):
        """Derived time(s) at base time(s) ``t``; Newton on ``t(t_tilde)``."""
        arr = np.atleast_1d(np.asarray(t, dtype=float))
        tn, nodes = self.t_nodes, self.t_tilde_nodes
        inc = tn[-1] > tn[0]
        out = np.empty_like(arr)
        for i, tv in enumerate(arr):
            if inc:
                k = int(np.clip(np.searchsorted(tn, tv, side="right") - 1, 0, tn.size - 2))
            else:
                k = int(np.clip(np.searchsorted(-tn, -tv, side="right") - 1, 0, tn.size - 2))
            lo, hi = nodes[k], nodes[k + 1]
            tlo, thi = tn[k], tn[k + 1]
            s = lo + (hi - lo) * (tv - tlo) / (thi - tlo) if thi != tlo else lo
            for _ in range(50):
                g = self.t(s) - tv
                om = self._omega(self.traj(np.array([s])))[0]
                s_new = s - g * om
                if not lo <= s_new <= hi:
                    # fall back to bisection inside the step
                    glo = self.t(lo) - tv
                    if (glo < 0) == (g < 0):
                        lo = s
                    else:
                        hi = s
                    s_new = 0.5 * (lo + hi)
                if abs(s_new - s) <= 1e-15 * (1.0 + abs(s)):
                    s = s_new
                    break
                s = s_new
            out[i] = s
        return out[0] if np.ndim(t) == 0 else out

    def rate(self, t_tilde) -> float:
        """``dt_tilde/dt = Omega`` at ``t_tilde``."""
        return float(self._omega(self.traj(np.array([float(t_tilde)])))[0])


def _crossing(omega_fn, traj, a, b, oa):
    for _ in range(80):
        m = 0.5 * (a + b)
        try:
            om = omega_fn(traj(np.array([m])))[0]
        except DomainError:
            b = m
            continue
        if (om > 0) == (oa > 0):
            a = m
        else:
            b = m
    return 0.5 * (a + b)


def time_map(traj: Trajectory, sys: DerivedSystem, qtol: float = 1e-13) -> TimeMap:
    """Integrate ``dt/dt_tilde = 1/Omega`` along a trajectory of the derived flow.

    Each integrator step is covered by Gauss-Legendre rules of 8 and 16 points
    and bisected until they agree to ``qtol`` per unit ``t_tilde`` (relative to
    the piece where ``1/Omega`` is large).  A sign
    change of Omega (or a point where it cannot be evaluated) raises
    ReparameterizationError with the estimated crossing time.
    """

    def omega(Z):
        try:
            return _omega_many(sys, np.atleast_2d(Z))
        except DegenerateMetamorphosisError as exc:
            raise ReparameterizationError(f"Omega degenerate along trajectory: {exc}") from None

    nodes = traj.t
    om_nodes = omega(traj.z)
    sign = float(np.sign(om_nodes[0]))
    flips = np.flatnonzero(np.sign(om_nodes) != sign)
    if flips.size:
        j = int(flips[0])
        c = _crossing(omega, traj, nodes[j - 1], nodes[j], om_nodes[j - 1])
        raise ReparameterizationError(
            f"Omega changes sign near t_tilde={c:.6g}; time map undefined past it", c
        )

    def piece(a, b, depth=0):
        xs, ws = _GL16
        s16 = 0.5 * (a + b) + 0.5 * (b - a) * xs
        v16 = omega(traj(s16))
        x8, w8 = _GL8
        s8 = 0.5 * (a + b) + 0.5 * (b - a) * x8
        v8 = omega(traj(s8))
        if np.any(np.sign(v16) != sign) or np.any(np.sign(v8) != sign):
            bad = s16[np.sign(v16) != sign]
            end = float(bad[0]) if bad.size else b
            c = _crossing(omega, traj, a, end, sign)
            raise ReparameterizationError(
                f"Omega changes sign near t_tilde={c:.6g}; time map undefined past it", c
            )
        i16 = 0.5 * (b - a) * np.dot(ws, 1.0 / v16)
        i8 = 0.5 * (b - a) * np.dot(w8, 1.0 / v8)
        if abs(i16 - i8) <= qtol * max(b - a, abs(i16)) or depth >= _MAX_DEPTH:
            return i16
        m = 0.5 * (a + b)
        return piece(a, m, depth + 1) + piece(m, b, depth + 1)

    t_acc = [0.0]
    for a, b in zip(nodes[:-1], nodes[1:]):
        t_acc.append(t_acc[-1] + piece(a, b))
    t_arr = np.array(t_acc)
    if np.any(np.diff(t_arr) * sign <= 0):
        raise ReparameterizationError("time map is not strictly monotone", None)
    return TimeMap(traj, omega, nodes, t_arr, sign)


# -- comparison ---------------------------------------------------------------


@dataclass
class MatchReport:
    sup_q: float
    sup_p: float
    overlap: float
    t_tilde: np.ndarray = field(repr=False)
    t: np.ndarray = field(repr=False)
    tilde_states: np.ndarray = field(repr=False)
    base_states: np.ndarray = field(repr=False)

    @property
    def sup(self) -> float:
        return max(self.sup_q, self.sup_p)


def match_trajectories(
    tilde_traj: Trajectory, base_traj: Trajectory, map: TimeMap, n: int = ALIGNMENT_POINTS
) -> MatchReport:
    """Sup-norm distance between ``x_tilde(t_tilde)`` and ``x(t(t_tilde))``.

    Compared on ``n`` uniform ``t_tilde`` points over the span both
    trajectories cover; ``overlap`` is that span over the requested one.
    """
    if n < 2:
        raise ConfigurationError("need at least two alignment points")
    t_hi = tilde_traj.t[-1]
    if map.t_end * map.sign > base_traj.t[-1] * (1 + 1e-12) + 1e-12:
        t_hi = min(t_hi, map.t_tilde(base_traj.t[-1] * map.sign))
    overlap = float(t_hi / tilde_traj.requested) if tilde_traj.requested > 0 else 0.0
    grid = np.linspace(0.0, t_hi, n)
    tb = map.t(grid)
    # a negative Omega runs the base clock backwards; such base runs are
    # stored as the reversed flow, parameterized by |t|
    zt = tilde_traj(grid)
    zb = base_traj(np.clip(tb * map.sign, base_traj.t[0], base_traj.t[-1]))
    N = tilde_traj.N
    d = np.abs(zt - zb)
    return MatchReport(
        float(d[:, :N].max()),
        float(d[:, N:].max()),
        min(1.0, overlap),
        grid,
        tb,
        zt,
        zb,
    )


def conservation_drift(traj: Trajectory, F) -> float:
    """``max |F(x(t)) - F(x(0))| / (1 + |F(x(0))|)`` over the stored nodes."""
    vals = np.array([float(np.real(F(z))) for z in traj.z])
    return float(np.max(np.abs(vals - vals[0])) / (1.0 + abs(vals[0])))


# -- coincidence pipeline -------------------------------------------------------


@dataclass
class CoincidenceReport:
    energy: float
    match: MatchReport
    tilde: Trajectory = field(repr=False)
    base: Trajectory = field(repr=False)
    map: TimeMap = field(repr=False)

    @property
    def sup_q(self):
        return self.match.sup_q

    @property
    def sup_p(self):
        return self.match.sup_p

    @property
    def overlap(self):
        return self.match.overlap

    @property
    def exits(self) -> list:
        return [e for e in (self.tilde.exit, self.base.exit) if e]


class _Reversed:
    """``-H``: its flow is the flow of H run backwards in time."""

    def __init__(self, fld):
        self.fld = fld
        self.name = f"-{getattr(fld, 'name', 'H')}"

    def __call__(self, z):
        return -self.fld(z)

    def value_and_grad(self, z):
        v, g = self.fld.value_and_grad(z)
        return -v, -g


def _breakdown_from_stall(sys: DerivedSystem, err: StepSizeError):
    """Turn a stalled derived flow into a reparameterization error if Omega -> 0."""
    tr = err.trajectory
    if tr is None or tr.steps < 4:
        return None
    try:
        om = _omega_many(sys, tr.z[-8:])
    except (DomainError, NoSolutionError):
        return None
    ts = tr.t[-8:]
    o2 = om * om
    if not (abs(om[-1]) < 0.5 * abs(om[0]) and np.all(np.diff(o2) < 0)):
        return None
    # near a simple zero of Omega the flow has Omega^2 ~ linear in t_tilde
    slope, icpt = np.polyfit(ts[-4:], o2[-4:], 1)
    crossing = -icpt / slope if slope < 0 else float(ts[-1])
    return ReparameterizationError(
        f"derived flow stalls as Omega -> 0 (|Omega|={abs(om[-1]):.3e} at "
        f"t_tilde={ts[-1]:.6g}); estimated crossing t_tilde={crossing:.6g}",
        float(crossing),
    )


def coincidence(
    sys: DerivedSystem,
    x0,
    T_tilde: float,
    tol: float = 1e-11,
    n: int = ALIGNMENT_POINTS,
    guard: Optional[Callable] = None,
) -> CoincidenceReport:
    """Integrate both flows from ``x0`` and compare them after time alignment.

    The derived flow runs over ``[0, T_tilde]``; its energy E fixes the base
    couplings ``lam(E)``; the base flow then runs over ``[0, t(T_tilde)]``.
    """
    z0 = _as_z(x0)
    _, om0 = sys.solve(z0)
    sign = 1.0 if om0 > 0 else -1.0
    sys_guard = sys.guard(sign)
    g = sys_guard if guard is None else (lambda z: guard(z) and sys_guard(z))
    try:
        tilde = integrate(sys, z0, T_tilde, tol, guard=g, meta=sys.name)
    except StepSizeError as exc:
        brk = _breakdown_from_stall(sys, exc)
        if brk is not None:
            raise brk from None
        raise
    if tilde.exit == "guard":
        # find where the guard tripped: Omega sign or solvability
        try:
            om_end = sys.omega(tilde.z[-1])
        except DomainError:
            om_end = None
        if om_end is not None and abs(om_end) < 1e-3 * abs(om0):
            raise ReparameterizationError(
                f"Omega -> 0 at t_tilde={tilde.t[-1]:.6g}", float(tilde.t[-1])
            )
    tm = time_map(tilde, sys)
    base_fld = sys.base_field(tilde.energy)
    T_base = abs(tm.t_end)
    run_fld = base_fld if tm.sign > 0 else _Reversed(base_fld)
    base = integrate(run_fld, z0, T_base, tol, guard=guard, meta=base_fld.name)
    return CoincidenceReport(tilde.energy, match_trajectories(tilde, base, tm, n), tilde, base, tm)
