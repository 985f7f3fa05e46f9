"""Phase-space values, forward-mode dual numbers and a portable PRNG.

Fields throughout the package are plain Python callables ``f(q, p)`` or
``f(q, p, lam)`` written with ordinary arithmetic and the elementary
functions exported here (``sqrt``, ``sin``, ...).  Evaluating them on
:class:`Dual` inputs yields exact first derivatives; evaluating them on
floats (or numpy arrays, for batches of points) yields values only.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigurationError, DomainError

__all__ = [
    "PhasePoint",
    "Dual",
    "Rng",
    "ScalarField",
    "grad_phase",
    "jet",
    "sample_phase_points",
    "sqrt",
    "exp",
    "log",
    "sin",
    "cos",
    "tan",
    "sinh",
    "cosh",
    "tanh",
    "atan2",
    "real",
    "conj",
]


@dataclass(frozen=True, eq=False)
class PhasePoint:
    """Canonical coordinates ``q`` and momenta ``p`` of equal length."""

    q: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        q = np.array(self.q, dtype=float).reshape(-1)
        p = np.array(self.p, dtype=float).reshape(-1)
        if q.size == 0 or q.shape != p.shape:
            raise ConfigurationError(
                f"q and p must be non-empty with equal length, got {q.size} and {p.size}"
            )
        bad = [f"q{i + 1}" for i in np.flatnonzero(~np.isfinite(q))]
        bad += [f"p{i + 1}" for i in np.flatnonzero(~np.isfinite(p))]
        if bad:
            raise ConfigurationError(f"non-finite phase coordinates: {', '.join(bad)}")
        q.flags.writeable = False
        p.flags.writeable = False
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "p", p)

    @property
    def N(self) -> int:
        return self.q.size

    @property
    def z(self) -> np.ndarray:
        """Flat state ``(q1..qN, p1..pN)``."""
        return np.concatenate([self.q, self.p])

    @classmethod
    def from_z(cls, z) -> "PhasePoint":
        z = np.asarray(z, dtype=float)
        n = z.size // 2
        return cls(z[:n], z[n:])

    def __repr__(self):
        return f"PhasePoint(q={self.q.tolist()}, p={self.p.tolist()})"


def _as_z(x) -> np.ndarray:
    if isinstance(x, PhasePoint):
        return x.z
    return np.asarray(x, dtype=float)


def _coordinate_names(n: int) -> list[str]:
    return [f"q{i + 1}" for i in range(n)] + [f"p{i + 1}" for i in range(n)]


class Dual:
    """Value plus gradient with respect to a fixed seed basis.

    ``val`` may be a float, a complex number or an ndarray of points; ``grad``
    then has shape ``(K,) + shape(val)``.  Arithmetic follows the chain rule
    exactly, so composing elementary operations gives the analytic derivative
    up to rounding.
    """

    __slots__ = ("val", "grad")
    __array_ufunc__ = None

    def __init__(self, val, grad):
        self.val = val
        self.grad = grad

    @classmethod
    def seeds(cls, values, offset: int, size: int) -> list["Dual"]:
        """Duals for ``values`` seeded on basis slots ``offset, offset+1, ...``."""
        eye = _eye(size)
        return [cls(v, eye[offset + i]) for i, v in enumerate(values)]

    def __repr__(self):
        return f"Dual({self.val!r}, {self.grad!r})"

    def __add__(self, o):
        if type(o) is Dual:
            return Dual(self.val + o.val, self.grad + o.grad)
        return Dual(self.val + o, self.grad)

    __radd__ = __add__

    def __sub__(self, o):
        if type(o) is Dual:
            return Dual(self.val - o.val, self.grad - o.grad)
        return Dual(self.val - o, self.grad)

    def __rsub__(self, o):
        return Dual(o - self.val, -self.grad)

    def __mul__(self, o):
        if type(o) is Dual:
            return Dual(self.val * o.val, self.grad * o.val + o.grad * self.val)
        return Dual(self.val * o, self.grad * o)

    __rmul__ = __mul__

    def __truediv__(self, o):
        if type(o) is Dual:
            inv = _reciprocal(o.val)
            v = self.val * inv
            return Dual(v, (self.grad - o.grad * v) * inv)
        inv = _reciprocal(o)
        return Dual(self.val * inv, self.grad * inv)

    def __rtruediv__(self, o):
        inv = _reciprocal(self.val)
        v = o * inv
        return Dual(v, self.grad * (-v * inv))

    def __pow__(self, n):
        if type(n) is Dual:
            return exp(n * log(self))
        if n == 2:
            return Dual(self.val * self.val, self.grad * (2.0 * self.val))
        if isinstance(n, int) and n >= 0:
            if n == 0:
                return Dual(self.val ** 0, self.grad * 0.0)
            return Dual(self.val**n, self.grad * (n * self.val ** (n - 1)))
        if _is_zero(self.val):
            raise DomainError("non-integer power of zero")
        v = self.val**n
        return Dual(v, self.grad * (n * v / self.val))

    def __rpow__(self, base):
        return exp(self * log(base))

    def __neg__(self):
        return Dual(-self.val, -self.grad)

    def __pos__(self):
        return self

    def __abs__(self):
        if np.iscomplexobj(self.val):
            return sqrt(self * self.conjugate()).real
        return self * np.sign(self.val)

    def conjugate(self):
        return Dual(np.conjugate(self.val), np.conjugate(self.grad))

    @property
    def real(self):
        return Dual(np.real(self.val), np.real(self.grad))

    @property
    def imag(self):
        return Dual(np.imag(self.val), np.imag(self.grad))

    def _cmp_val(self, o):
        return o.val if type(o) is Dual else o

    def __lt__(self, o):
        return self.val < self._cmp_val(o)

    def __le__(self, o):
        return self.val <= self._cmp_val(o)

    def __gt__(self, o):
        return self.val > self._cmp_val(o)

    def __ge__(self, o):
        return self.val >= self._cmp_val(o)

    def __float__(self):
        return float(self.val)


_EYES: dict[int, np.ndarray] = {}


def _eye(k: int) -> np.ndarray:
    e = _EYES.get(k)
    if e is None:
        e = np.eye(k)
        e.flags.writeable = False
        _EYES[k] = e
    return e


def _is_zero(v) -> bool:
    return bool(np.any(np.asarray(v) == 0))


def _reciprocal(v):
    if isinstance(v, np.ndarray):
        if _is_zero(v):
            raise DomainError("division by zero")
        return 1.0 / v
    try:
        return 1.0 / v
    except ZeroDivisionError:
        raise DomainError("division by zero") from None


def _value(x):
    return x.val if type(x) is Dual else x


# -- elementary functions -------------------------------------------------


def sqrt(x):
    if type(x) is Dual:
        r = sqrt(x.val)
        return Dual(r, x.grad * (0.5 * _reciprocal(r)))
    if isinstance(x, complex):
        return cmath.sqrt(x)
    if isinstance(x, np.ndarray):
        if np.iscomplexobj(x):
            return np.sqrt(x)
        if np.any(x < 0):
            raise DomainError("square root of a negative value")
        return np.sqrt(x)
    if x < 0:
        raise DomainError(f"square root of negative value {x!r}")
    return math.sqrt(x)


def exp(x):
    if type(x) is Dual:
        v = exp(x.val)
        return Dual(v, x.grad * v)
    if isinstance(x, (complex, np.ndarray)):
        return np.exp(x)
    try:
        return math.exp(x)
    except OverflowError:
        raise DomainError(f"exp overflow at {x!r}") from None


def log(x):
    if type(x) is Dual:
        return Dual(log(x.val), x.grad * _reciprocal(x.val))
    if isinstance(x, complex):
        return cmath.log(x)
    if isinstance(x, np.ndarray):
        if not np.iscomplexobj(x) and np.any(x <= 0):
            raise DomainError("logarithm of a non-positive value")
        return np.log(x)
    if x <= 0:
        raise DomainError(f"logarithm of non-positive value {x!r}")
    return math.log(x)


def _unary(fn_np, fn_math, deriv):
    def f(x):
        if type(x) is Dual:
            return Dual(f(x.val), x.grad * deriv(x.val))
        if isinstance(x, (complex, np.ndarray)):
            return fn_np(x)
        return fn_math(x)

    return f


sin = _unary(np.sin, math.sin, lambda v: cos(v))
cos = _unary(np.cos, math.cos, lambda v: -sin(v))
tan = _unary(np.tan, math.tan, lambda v: 1.0 + tan(v) ** 2)
sinh = _unary(np.sinh, math.sinh, lambda v: cosh(v))
cosh = _unary(np.cosh, math.cosh, lambda v: sinh(v))
tanh = _unary(np.tanh, math.tanh, lambda v: 1.0 - tanh(v) ** 2)


def atan2(y, x):
    """Two-argument arctangent; differentiable in both arguments."""
    if type(y) is Dual or type(x) is Dual:
        yv, xv = _value(y), _value(x)
        r2 = yv * yv + xv * xv
        if _is_zero(r2):
            raise DomainError("atan2 at the origin")
        gy = y.grad if type(y) is Dual else 0.0
        gx = x.grad if type(x) is Dual else 0.0
        return Dual(atan2(yv, xv), (gy * xv - gx * yv) / r2)
    if isinstance(y, np.ndarray) or isinstance(x, np.ndarray):
        return np.arctan2(y, x)
    return math.atan2(y, x)


def real(x):
    if type(x) is Dual:
        return x.real
    return np.real(x) if isinstance(x, np.ndarray) else x.real


def conj(x):
    if type(x) is Dual:
        return x.conjugate()
    return np.conjugate(x)


# -- differentiation helpers ----------------------------------------------


def jet(f: Callable, z, lam=(), seed_params: bool = True):
    """Evaluate ``f(q, p, lam)`` once with seeds on ``(q, p, lam)``.

    Returns ``(value, d/dz, d/dlam)``; the seed basis has dimension ``2N + M``
    (or ``2N`` when ``seed_params`` is false, with ``d/dlam`` empty).
    """
    z = np.asarray(z, dtype=float)
    n2 = z.size
    m = len(lam) if seed_params else 0
    k = n2 + m
    zd = Dual.seeds(z.tolist(), 0, k)
    lamd = Dual.seeds(lam, n2, k) if seed_params else tuple(lam)
    n = n2 // 2
    try:
        out = f(zd[:n], zd[n:], lamd)
    except (ZeroDivisionError, ValueError, OverflowError) as exc:
        raise DomainError(f"evaluation failed at z={z.tolist()}: {exc}") from None
    if type(out) is not Dual:
        return out, np.zeros(n2), np.zeros(m)
    grad = out.grad
    if np.ndim(grad) and grad.shape[0] != k:
        grad = np.broadcast_to(grad, (k,))
    return out.val, grad[:n2], grad[n2:]


def _check_finite(value, grad, z):
    if not np.all(np.isfinite(grad)):
        names = _coordinate_names(z.size // 2)
        bad = [names[i] for i in np.flatnonzero(~np.isfinite(grad))]
        raise DomainError(
            f"non-finite derivative with respect to {', '.join(bad)} at z={z.tolist()}"
        )
    if not np.all(np.isfinite(value)):
        raise DomainError(f"non-finite value at z={z.tolist()}")


def grad_phase(f: Callable, x) -> tuple[np.ndarray, np.ndarray]:
    """Exact ``(df/dq, df/dp)`` of a scalar ``f(q, p)`` at ``x``."""
    z = _as_z(x)
    val, dz, _ = jet(lambda q, p, lam: f(q, p), z, (), seed_params=False)
    _check_finite(val, dz, z)
    n = z.size // 2
    return np.array(dz[:n]), np.array(dz[n:])


class ScalarField:
    """Adapter giving a plain ``f(q, p)`` the field interface.

    Fields are called on flat states ``z`` and expose ``value_and_grad``,
    which is what the integrator and the Poisson bracket consume.
    """

    def __init__(self, f: Callable, name: str = ""):
        self.f = f
        self.name = name or getattr(f, "__name__", "field")

    def __call__(self, z):
        z = _as_z(z)
        n = z.size // 2
        try:
            return self.f(z[:n], z[n:])
        except (ZeroDivisionError, ValueError, OverflowError) as exc:
            raise DomainError(f"{self.name}: {exc}") from None

    def value_and_grad(self, z):
        z = _as_z(z)
        val, dz, _ = jet(lambda q, p, lam: self.f(q, p), z, (), seed_params=False)
        _check_finite(val, dz, z)
        return val, dz


# -- random sampling --------------------------------------------------------

_MASK64 = (1 << 64) - 1
# SplitMix64 (Steele, Lea & Flood 2014; constants as published by Vigna).
_GOLDEN_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


class Rng:
    """SplitMix64 stream; identical seeds give identical streams everywhere."""

    algorithm = "splitmix64"

    def __init__(self, seed: int):
        self.state = int(seed) & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + _GOLDEN_GAMMA) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
        return z ^ (z >> 31)

    def uniform(self, lo: float = 0.0, hi: float = 1.0) -> float:
        # 53 high bits -> double in [0, 1)
        u = (self.next_u64() >> 11) * (1.0 / (1 << 53))
        return lo + (hi - lo) * u

    def split(self) -> "Rng":
        """Independent child stream; advances this stream by one draw."""
        return Rng(self.next_u64() ^ _MIX1)


def _normalize_box(box, dim2: int) -> list[tuple[float, float]]:
    box = [tuple(map(float, iv)) for iv in box]
    if len(box) == 1:
        box = box * dim2
    if len(box) == 2 and dim2 > 2:
        # one interval for all q, one for all p
        n = dim2 // 2
        box = [box[0]] * n + [box[1]] * n
    if len(box) != dim2:
        raise ConfigurationError(f"box needs {dim2} intervals, got {len(box)}")
    for i, (lo, hi) in enumerate(box):
        if not (math.isfinite(lo) and math.isfinite(hi)) or not lo < hi:
            raise ConfigurationError(f"degenerate sampling interval #{i}: [{lo}, {hi}]")
    return box


def sample_phase_points(rng: Rng, n: int, N: int, box: Sequence) -> list[PhasePoint]:
    """``n`` points uniform in ``box`` (2N intervals, q's first then p's)."""
    if n < 1 or N < 1:
        raise ConfigurationError(f"need n >= 1 and N >= 1, got n={n}, N={N}")
    box = _normalize_box(box, 2 * N)
    pts = []
    for _ in range(n):
        z = [rng.uniform(lo, hi) for lo, hi in box]
        pts.append(PhasePoint(z[:N], z[N:]))
    return pts
