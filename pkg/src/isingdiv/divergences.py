"""Catalog of f-divergence generators, their derivatives, and condition witnesses.

Every generator is available in two forms: ``f_value(kind, x)`` and the
shifted ``f_shifted(kind, t) = f(1 + t)``. Estimators work with ratios close
to 1, so the shifted form is the one used internally; it is built on
``log1p(t) - t`` and ``expm1(y) - y`` helpers that avoid cancellation.

The "renyi" generator is ``f(x) = -ln x + x - 1``, i.e. the reverse KL
divergence, not the usual Renyi-alpha family.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import InputError

ALPHA_CAP = 64.0

NAMES = ("chi", "kl", "renyi", "js", "alpha", "hellinger2")


@dataclass(frozen=True)
class DivergenceKind:
    """A catalog entry. ``alpha`` is the order for ``chi`` (integer) and ``alpha`` (real)."""

    name: str
    alpha: Optional[float] = None

    def __post_init__(self):
        if self.name not in NAMES:
            raise InputError(f"unknown divergence {self.name!r}")
        if self.name == "chi":
            if self.alpha is None or int(self.alpha) != self.alpha or self.alpha < 1:
                raise InputError(f"chi order must be an integer >= 1, got {self.alpha}")
            object.__setattr__(self, "alpha", int(self.alpha))
        elif self.name == "alpha":
            a = self.alpha
            if a is None or not math.isfinite(a) or a in (0, 1):
                raise InputError(f"alpha-divergence order must be finite and not 0 or 1, got {a}")
            if abs(a) > ALPHA_CAP:
                raise InputError(f"|alpha| is capped at {ALPHA_CAP}, got {a}")
            object.__setattr__(self, "alpha", float(a))
        elif self.alpha is not None:
            raise InputError(f"{self.name} takes no order parameter")

    @property
    def spec(self) -> str:
        if self.name == "chi":
            return f"chi:{self.alpha}"
        if self.name == "alpha":
            return f"alpha:{self.alpha:g}"
        return self.name

    def __str__(self):
        return self.spec


def chi(alpha: int) -> DivergenceKind:
    return DivergenceKind("chi", alpha)


def tv() -> DivergenceKind:
    """Total variation distance, which is chi^1."""
    return DivergenceKind("chi", 1)


KL = DivergenceKind("kl")
RENYI = DivergenceKind("renyi")
JS = DivergenceKind("js")
HELLINGER = DivergenceKind("hellinger2")


def alpha_div(alpha: float) -> DivergenceKind:
    return DivergenceKind("alpha", alpha)


def parse(spec: str) -> DivergenceKind:
    """Parse ``chi:<int>``, ``kl``, ``renyi``, ``js``, ``alpha:<real>``, ``hellinger2``, ``tv``."""
    if isinstance(spec, DivergenceKind):
        return spec
    head, _, arg = spec.strip().lower().partition(":")
    try:
        if head == "tv" and not arg:
            return tv()
        if head == "chi":
            a = float(arg)
            if a != int(a):
                raise InputError(f"chi order must be an integer: {spec!r}")
            return chi(int(a))
        if head == "alpha":
            return alpha_div(float(arg))
    except ValueError as exc:
        raise InputError(f"malformed divergence spec {spec!r}") from exc
    if head in ("kl", "renyi", "js", "hellinger2") and not arg:
        return DivergenceKind(head)
    raise InputError(f"unknown divergence spec {spec!r}")


def catalog(chi_orders=(1, 2, 3), alpha_orders=(2.0, 0.5, -1.0)):
    """Representative kinds for sweeps: chi orders, KL, Renyi, JS, alpha orders, Hellinger."""
    kinds = [chi(a) for a in chi_orders] + [KL, RENYI, JS]
    kinds += [alpha_div(a) for a in alpha_orders]
    kinds.append(HELLINGER)
    return kinds


# --- generators --------------------------------------------------------------


def _as_array(x):
    return np.asarray(x, dtype=float)


def _ret(like, out):
    return float(out) if np.ndim(like) == 0 else out


def log1pmx(t):
    """``log1p(t) - t`` without cancellation near 0."""
    t = _as_array(t)
    small = np.abs(t) < 0.1
    ts = np.where(small, t, 0.0)
    series = np.zeros_like(ts)
    # Horner form of sum_{k>=2} (-1)^(k+1) t^k / k
    for k in range(18, 1, -1):
        series = ts * (series + (-1.0) ** (k + 1) / k)
    series = series * ts
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = np.log1p(t) - t
    return np.where(small, series, direct)


def expm1mx(y):
    """``expm1(y) - y`` without cancellation near 0."""
    y = _as_array(y)
    small = np.abs(y) < 0.5
    ys = np.where(small, y, 0.0)
    series = np.zeros_like(ys)
    for k in range(20, 1, -1):
        series = ys * (series + 1.0 / math.factorial(k))
    series = series * ys
    with np.errstate(over="ignore"):
        direct = np.expm1(y) - y
    return np.where(small, series, direct)


def f_shifted(kind: DivergenceKind, t):
    """``f(1 + t)`` for ``t > -1``, accurate for small ``|t|``."""
    t_in = t
    t = _as_array(t)
    if np.any(t <= -1):
        raise InputError("f is defined on positive reals only (need t > -1)")
    name, a = kind.name, kind.alpha
    with np.errstate(divide="ignore", invalid="ignore"):
        if name == "chi":
            out = 0.5 * np.abs(t) ** a
        elif name == "hellinger2":
            out = 0.5 * (t / (np.sqrt(1.0 + t) + 1.0)) ** 2
        elif name == "kl":
            out = (1.0 + t) * log1pmx(t) + t * t
        elif name == "renyi":
            out = -log1pmx(t)
        elif name == "js":
            out = 0.5 * (0.5 * t * t + (1.0 + t) * log1pmx(t) - (2.0 + t) * log1pmx(t / 2.0))
        else:  # alpha
            out = (expm1mx(a * np.log1p(t)) + a * log1pmx(t)) / (a * (a - 1.0))
    return _ret(t_in, np.maximum(out, 0.0))


def _f_far(kind: DivergenceKind, r):
    """``f(e^r)`` written in ``r``; accurate once ``|r|`` is not small."""
    name, a = kind.name, kind.alpha
    x = np.exp(r)
    if name == "chi":
        return 0.5 * np.abs(np.expm1(r)) ** a
    if name == "hellinger2":
        return 0.5 * np.expm1(0.5 * r) ** 2
    if name == "renyi":
        return expm1mx(r)
    if name == "kl":
        return x * r - np.expm1(r)
    if name == "js":
        return 0.5 * (x * r - (x + 1.0) * (np.log1p(x) - math.log(2.0)))
    return (np.exp(a * r) - a * x - (1.0 - a)) / (a * (a - 1.0))


def f_of_log(kind: DivergenceKind, r):
    """``f(e^r)``, accurate both near ``r = 0`` and for ratios far from 1."""
    r_in = r
    r = _as_array(r)
    near = np.abs(r) < 0.5
    with np.errstate(over="ignore", invalid="ignore"):
        out = np.where(near, f_shifted(kind, np.expm1(np.where(near, r, 0.0))), _f_far(kind, np.where(near, 0.0, r)))
    return _ret(r_in, np.maximum(out, 0.0))


def f_value(kind: DivergenceKind, x):
    """Evaluate the generator ``f`` at ``x > 0``."""
    x_in = x
    x = _as_array(x)
    if np.any(x <= 0):
        raise InputError("f is defined on positive reals only")
    # x - 1 is exact on [1/2, 2]; elsewhere ln x carries the precision
    near = (x >= 0.5) & (x <= 2.0)
    with np.errstate(over="ignore", invalid="ignore"):
        out = np.where(near, f_shifted(kind, np.where(near, x - 1.0, 0.0)),
                       _f_far(kind, np.log(np.where(near, 1.0, x))))
    return _ret(x_in, np.maximum(out, 0.0))


def f_prime_shifted(kind: DivergenceKind, t):
    """``f'(1 + t)``."""
    t_in = t
    t = _as_array(t)
    if np.any(t <= -1):
        raise InputError("f is defined on positive reals only (need t > -1)")
    name, a = kind.name, kind.alpha
    if name == "chi":
        if a == 1 and np.any(t == 0):
            raise InputError("chi^1 is not differentiable at x = 1")
        out = 0.5 * a * np.abs(t) ** (a - 1) * np.sign(t)
    elif name == "kl":
        out = np.log1p(t)
    elif name == "renyi":
        out = t / (1.0 + t)
    elif name == "js":
        out = 0.5 * (np.log1p(t) - np.log1p(t / 2.0))
    elif name == "alpha":
        out = np.expm1((a - 1.0) * np.log1p(t)) / (a - 1.0)
    else:  # hellinger2
        s = np.sqrt(1.0 + t)
        out = t / (2.0 * s * (s + 1.0))
    return _ret(t_in, out)


def f_second(kind: DivergenceKind, x):
    x_in = x
    x = _as_array(x)
    if np.any(x <= 0):
        raise InputError("f is defined on positive reals only")
    name, a = kind.name, kind.alpha
    if name == "chi":
        if a == 1:
            if np.any(x == 1):
                raise InputError("chi^1 is not differentiable at x = 1")
            out = np.zeros_like(x)
        else:
            out = 0.5 * a * (a - 1) * np.abs(x - 1.0) ** (a - 2)
    elif name == "kl":
        out = 1.0 / x
    elif name == "renyi":
        out = 1.0 / x**2
    elif name == "js":
        out = 1.0 / (2.0 * x * (x + 1.0))
    elif name == "alpha":
        out = x ** (a - 2.0)
    else:  # hellinger2
        out = 0.25 * x**-1.5
    return _ret(x_in, out)


def f_derivatives(kind: DivergenceKind, x):
    """``(f'(x), f''(x))`` in closed form."""
    x_arr = _as_array(x)
    if np.any(x_arr <= 0):
        raise InputError("f is defined on positive reals only")
    t = x_arr - 1.0 if np.ndim(x) else float(x) - 1.0
    return f_prime_shifted(kind, t), f_second(kind, x)


# --- condition witnesses -----------------------------------------------------


@dataclass(frozen=True)
class ConditionWitness:
    """``F`` with ``x f'(1 + zeta x) / f(1 + x) <= F(zeta)`` for ``zeta >= 1``,
    ``0 < |x| < 1/(2 zeta)``; ``L, U`` bound ``f''`` on ``[1/2, 3/2]`` where
    such bounds exist (``None`` for chi)."""

    F: Callable[[float], float]
    L: Optional[float]
    U: Optional[float]
    coefficient: Optional[float] = None


_TABLE = {
    "kl": (2.0 / 3.0, 2.0, 6.0),
    "renyi": (4.0 / 9.0, 4.0, 18.0),
    "js": (2.0 / 15.0, 2.0 / 3.0, 10.0),
}


def condition_witness(kind: DivergenceKind) -> ConditionWitness:
    name = kind.name
    if name == "chi":
        a = kind.alpha
        return ConditionWitness(lambda z: a * z ** (a - 1), None, None)
    if name in _TABLE:
        lo, hi, c = _TABLE[name]
    elif name == "alpha":
        e = abs(kind.alpha - 2.0)
        lo, hi, c = 2.0**-e, 2.0**e, 2.0 * 4.0**e
    else:  # hellinger2
        # f'' = x^{-3/2}/4 on [1/2, 3/2]; the 2*sqrt(3) coefficient is tighter than
        # 2U/L and is checked directly against the condition instead
        lo, hi, c = 0.25 * 1.5**-1.5, 0.25 * 0.5**-1.5, 2.0 * math.sqrt(3.0)
    return ConditionWitness(lambda z: c * z, lo, hi, c)


def condition_ratio(kind: DivergenceKind, zeta, x):
    """``x f'(1 + zeta x) / f(1 + x)``."""
    x = _as_array(x)
    return_scalar = x.ndim == 0
    if kind.name == "chi":
        # the powers of |x| cancel; evaluating them separately leaves ulp-level
        # excess over F once F is large
        if np.any(x == 0):
            raise InputError("condition ratio is undefined at x = 0")
        out = kind.alpha * np.sign(x) * float(zeta) ** (kind.alpha - 1)
    else:
        out = x * f_prime_shifted(kind, zeta * x) / f_shifted(kind, x)
    return float(out) if return_scalar else out
