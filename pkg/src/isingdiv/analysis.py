"""Closed-form lower bounds and the partition-function inequalities behind the
hardness reduction, each paired with a check against exact enumeration."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import NamedTuple, Optional

import numpy as np
from scipy.optimize import minimize_scalar

from . import divergences as dv
from . import exact
from .errors import InputError
from .model import (
    ModelPair,
    pair_marginal_lower_bound,
    parameter_distance,
    threshold,
    unified_model,
)

__all__ = [
    "Bound",
    "BCoefficient",
    "Check",
    "SandwichReport",
    "BoundsReport",
    "tv_lower_bound",
    "f_lower_bound",
    "chi_alpha_lower_bound",
    "B_coefficient",
    "B_at",
    "g_objective",
    "g_minimum",
    "moment_sandwich_check",
    "domination_check",
    "hardness_sandwich_check",
    "variance_check",
    "ratio_range_check",
    "bounds_report",
]


class Bound(NamedTuple):
    """A lower bound from the parameter distance, plus the tighter TV-based
    variant when an exact TV value was supplied."""

    value: float
    tv_variant: Optional[float] = None


class BCoefficient(NamedTuple):
    B: float
    t_star: float


@dataclass
class Check:
    """One inequality ``lhs <= rhs`` (or ``>=``), evaluated exactly."""

    name: str
    holds: bool
    lhs: Optional[float]
    rhs: Optional[float]
    applicable: bool = True
    detail: dict = field(default_factory=dict)

    @property
    def slack(self) -> Optional[float]:
        return None if self.lhs is None or self.rhs is None else self.rhs - self.lhs

    def to_dict(self):
        out = asdict(self)
        out["slack"] = self.slack
        return out


# relative slack for inequalities that can hold with equality (e.g. chi^1 against
# TV, or a weight ratio attaining its range); anything larger is a violation
ROUNDING_SLACK = 1e-12


def holds(lhs: float, rhs: float) -> bool:
    """``lhs <= rhs`` up to :data:`ROUNDING_SLACK` relative rounding."""
    return lhs <= rhs + ROUNDING_SLACK * max(abs(lhs), abs(rhs))


def _not_applicable(name, reason):
    return Check(name, True, None, None, applicable=False, detail={"reason": reason})


# --- lower bounds ------------------------------------------------------------


def tv_lower_bound(pair: ModelPair) -> float:
    """``(b^2 / 2) d_par`` with ``b`` the smaller of the two marginal bounds."""
    b = pair_marginal_lower_bound(pair)
    # same operation order as the chi bound, so alpha = 1 agrees bit-for-bit
    return 0.5 * b ** 2 * parameter_distance(pair)


def _f_max_pm(kind, x):
    vals = [dv.f_shifted(kind, x)]
    if x < 1:
        vals.append(dv.f_shifted(kind, -x))
    return max(vals)


def f_lower_bound(pair: ModelPair, kind, tv: Optional[float] = None) -> Bound:
    """``max f(1 +- (b^2/2) d_par)``; with ``tv`` also ``max f(1 +- tv)``."""
    kind = dv.parse(kind)
    value = _f_max_pm(kind, tv_lower_bound(pair))
    return Bound(value, None if tv is None else _f_max_pm(kind, tv))


def chi_alpha_lower_bound(pair: ModelPair, alpha: int, tv: Optional[float] = None) -> Bound:
    """``(b^{2a}/2) d_par^a``; with ``tv`` also ``2^{a-1} tv^a``."""
    if alpha < 1 or int(alpha) != alpha:
        raise InputError(f"alpha must be an integer >= 1, got {alpha}")
    b = pair_marginal_lower_bound(pair)
    value = 0.5 * b ** (2 * alpha) * parameter_distance(pair) ** alpha
    return Bound(value, None if tv is None else 2.0 ** (alpha - 1) * tv**alpha)


def _check_B_args(alpha, b, theta):
    if alpha < 1 or int(alpha) != alpha:
        raise InputError(f"alpha must be a positive integer, got {alpha}")
    if not 0 < b <= 1:
        raise InputError(f"b must lie in (0, 1], got {b}")
    if not 0 < theta <= 1:
        raise InputError(f"theta must lie in (0, 1], got {theta}")


def B_coefficient(alpha: int, b: float, theta: float) -> BCoefficient:
    """Coefficient ``B`` with ``chi^a >= B * E_mu[(nu/mu + 1)^a]`` whenever ``d_par >= theta``.

    ``B = 1 / min_{0 < t <= 1} g(t)`` in closed form. With ``c = b^{2a} theta^a``
    the stationary point is ``t = (2c)^{1/(a+1)}`` and there
    ``g = (2 + t)^{a+1} / c``; for ``t > 1`` the minimum sits at ``t = 1``.
    """
    _check_B_args(alpha, b, theta)
    log_c = 2 * alpha * math.log(b) + alpha * math.log(theta)
    t = math.exp((math.log(2.0) + log_c) / (alpha + 1))
    if t > 1.0:
        return BCoefficient(B_at(alpha, b, theta, 1.0), 1.0)
    return BCoefficient(math.exp(log_c - (alpha + 1) * math.log(2.0 + t)), t)


def B_at(alpha: int, b: float, theta: float, t: float) -> float:
    """``1 / g(t)``; a valid (smaller) coefficient for any ``t`` in ``(0, 1]``."""
    _check_B_args(alpha, b, theta)
    if not 0 < t <= 1:
        raise InputError(f"t must lie in (0, 1], got {t}")
    return float(1.0 / g_objective(t, alpha, b, theta))


def g_objective(t, alpha: int, b: float, theta: float):
    """``2 (2 + t)^a / (b^{2a} theta^a) + 2 (1 + 2/t)^a``."""
    t = np.asarray(t, dtype=float)
    scale = b ** (2 * alpha) * theta**alpha
    return 2.0 * (2.0 + t) ** alpha / scale + 2.0 * (1.0 + 2.0 / t) ** alpha


def g_minimum(alpha: int, b: float, theta: float):
    """Numerical ``(min g, argmin)`` over ``t in (0, 1]``: log-grid then bounded Brent."""
    _check_B_args(alpha, b, theta)

    def obj(s):
        return float(g_objective(math.exp(s), alpha, b, theta))

    grid = np.linspace(-80.0, 0.0, 4001)
    vals = g_objective(np.exp(grid), alpha, b, theta)
    i = int(np.argmin(vals))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
    res = minimize_scalar(obj, bounds=(lo, hi), method="bounded", options={"xatol": 1e-13})
    best_s, best = (res.x, res.fun) if res.fun < vals[i] else (grid[i], float(vals[i]))
    return float(best), math.exp(best_s)


# --- checks against exact enumeration ----------------------------------------


def moment_sandwich_check(pair: ModelPair, alpha: int, theta: Optional[float] = None,
                          limit: exact.ExactLimit = exact.DEFAULT_LIMIT) -> Check:
    """``chi^a(nu || mu) >= B * E_mu[(nu/mu + 1)^a]``, applicable when ``d_par >= theta``."""
    name = f"moment_sandwich[alpha={alpha}]"
    theta = threshold(pair) if theta is None else theta
    d = parameter_distance(pair)
    if d < theta:
        return _not_applicable(name, f"d_par={d:.6g} < theta={theta:.6g}")
    b = pair_marginal_lower_bound(pair)
    B, _ = B_coefficient(alpha, b, min(theta, 1.0))
    lhs = B * exact.exact_moment_sum(pair, alpha, limit)
    rhs = exact.exact_divergence(pair, dv.chi(alpha), limit)
    return Check(name, holds(lhs, rhs), lhs, rhs, detail={"B": B, "theta": theta, "d_par": d})


def variance_check(pair: ModelPair, limit: exact.ExactLimit = exact.DEFAULT_LIMIT) -> Check:
    """``Var_mu[w_nu / w_mu] <= (3n + 9m)^2 d_par^2`` below the small-distance threshold."""
    d = parameter_distance(pair)
    if d >= threshold(pair):
        return _not_applicable("variance_W", "d_par is not below 1/(10(n+3m))")
    lhs = exact.exact_variance_W(pair, limit)
    rhs = (3 * pair.n + 9 * pair.m) ** 2 * d * d
    return Check("variance_W", holds(lhs, rhs), lhs, rhs, detail={"d_par": d})


def ratio_range_check(pair: ModelPair, limit: exact.ExactLimit = exact.DEFAULT_LIMIT) -> Check:
    """Every ``w_nu / w_mu`` lies in ``exp(+-(n + 3m) d_par)`` below the threshold.

    Reported with ``lhs`` the largest ``|ln(w_nu/w_mu)|`` and ``rhs = (n+3m) d_par``.
    """
    d = parameter_distance(pair)
    if d >= threshold(pair):
        return _not_applicable("ratio_range", "d_par is not below 1/(10(n+3m))")
    lo, hi = exact.log_weight_ratio_range(pair, limit)
    lhs = max(abs(lo), abs(hi))
    rhs = (pair.n + 3 * pair.m) * d
    return Check("ratio_range", holds(lhs, rhs), lhs, rhs, detail={"log_min": lo, "log_max": hi})


def _unified_log_z(n, graph, beta, limit):
    return exact.unified_partition_function(n, graph, beta, limit).log_z


def _check_betas(beta_nu, beta_mu, alpha):
    if not 0 < beta_nu < beta_mu:
        raise InputError(f"need 0 < beta_nu < beta_mu, got {beta_nu}, {beta_mu}")
    if alpha < 1 or int(alpha) != alpha:
        raise InputError(f"alpha must be a positive integer, got {alpha}")


def domination_check(n: int, graph, beta_nu: float, beta_mu: float, alpha: int,
                     limit: exact.ExactLimit = exact.DEFAULT_LIMIT) -> list[Check]:
    """``Z_mu Z_{k+1} >= Z_nu Z_k / 2`` for ``0 <= k < alpha``, ``Z_k`` at ``beta_nu^k / beta_mu^(k-1)``.

    Compared in log space: ``lhs = ln(Z_nu Z_k / 2)``, ``rhs = ln(Z_mu Z_{k+1})``.
    """
    _check_betas(beta_nu, beta_mu, alpha)
    log_bn, log_bm = math.log(beta_nu), math.log(beta_mu)

    def log_zk(k):
        return _unified_log_z(n, graph, math.exp(k * log_bn - (k - 1) * log_bm), limit)

    log_z = [log_zk(k) for k in range(alpha + 1)]
    checks = []
    for k in range(alpha):
        lhs = log_z[1] + log_z[k] - math.log(2.0)
        rhs = log_z[0] + log_z[k + 1]
        checks.append(Check(f"domination[k={k}]", holds(lhs, rhs), lhs, rhs))
    return checks


@dataclass
class SandwichReport:
    """``Z(beta_a) <= Z_nu^a / Z_mu^(a-1) * E_mu[(nu/mu + 1)^a] <= 3^a Z(beta_a)``."""

    log_lower: float
    log_middle: float
    log_upper: float
    ratio: float
    holds: bool

    def to_dict(self):
        return asdict(self)


def hardness_sandwich_check(n: int, graph, beta_nu: float, beta_mu: float, alpha: int,
                            limit: exact.ExactLimit = exact.DEFAULT_LIMIT) -> SandwichReport:
    """Evaluate the sandwich exactly and report ``ratio = middle / Z(beta_a)``.

    All partition functions use the ``sum beta^{m(sigma)}`` normalisation;
    the sandwich is invariant under the ``beta^{-m/2}`` rescaling to Ising form.
    """
    _check_betas(beta_nu, beta_mu, alpha)
    beta_a = (beta_nu / beta_mu) ** alpha * beta_mu
    pair = ModelPair(unified_model(n, graph, beta_nu), unified_model(n, graph, beta_mu))
    log_zn = _unified_log_z(n, graph, beta_nu, limit)
    log_zm = _unified_log_z(n, graph, beta_mu, limit)
    log_lower = _unified_log_z(n, graph, beta_a, limit)
    log_moment = math.log(exact.exact_moment_sum(pair, alpha, limit))
    log_middle = alpha * log_zn - (alpha - 1) * log_zm + log_moment
    log_upper = alpha * math.log(3.0) + log_lower
    ratio = math.exp(log_middle - log_lower)
    return SandwichReport(log_lower, log_middle, log_upper, ratio,
                          holds(log_lower, log_middle) and holds(log_middle, log_upper))


# --- report ------------------------------------------------------------------


@dataclass
class BoundsReport:
    d_par: float
    b: float
    theta: float
    tv_lb: float
    f_lb: dict
    chi_lb: dict
    B_coeff: dict
    checks: list = field(default_factory=list)

    @property
    def all_hold(self) -> bool:
        return all(c.holds for c in self.checks)

    def to_dict(self):
        out = {k: getattr(self, k) for k in ("d_par", "b", "theta", "tv_lb", "f_lb", "chi_lb", "B_coeff")}
        out["checks"] = [c.to_dict() for c in self.checks]
        out["all_hold"] = self.all_hold
        return out


def bounds_report(pair: ModelPair, kinds=None, alphas=(1, 2, 3), with_exact: bool = True,
                  limit: exact.ExactLimit = exact.DEFAULT_LIMIT) -> BoundsReport:
    """All bounds for ``pair``; with ``with_exact`` each is checked against enumeration."""
    kinds = dv.catalog() if kinds is None else [dv.parse(k) for k in kinds]
    d, b, theta = parameter_distance(pair), pair_marginal_lower_bound(pair), threshold(pair)
    tv = exact.exact_tv(pair, limit) if with_exact else None
    f_lb = {k.spec: f_lower_bound(pair, k, tv)._asdict() for k in kinds}
    chi_lb = {str(a): chi_alpha_lower_bound(pair, a, tv)._asdict() for a in alphas}
    B = {str(a): B_coefficient(a, b, min(theta, 1.0))._asdict() for a in alphas}
    report = BoundsReport(d, b, theta, tv_lower_bound(pair), f_lb, chi_lb, B)
    if not with_exact:
        return report
    checks = report.checks
    lb = tv_lower_bound(pair)
    checks.append(Check("tv_lower_bound", holds(lb, tv), lb, tv))
    for k in kinds:
        value = exact.exact_divergence(pair, k, limit)
        bound = f_lb[k.spec]
        checks.append(Check(f"f_lower_bound[{k.spec}]", holds(bound["value"], value), bound["value"], value))
        checks.append(Check(f"f_lower_bound_tv[{k.spec}]", holds(bound["tv_variant"], value),
                            bound["tv_variant"], value))
    for a in alphas:
        value = exact.exact_divergence(pair, dv.chi(a), limit)
        bound = chi_lb[str(a)]
        checks.append(Check(f"chi_lower_bound[alpha={a}]", holds(bound["value"], value), bound["value"], value))
        checks.append(Check(f"chi_lower_bound_tv[alpha={a}]", holds(bound["tv_variant"], value),
                            bound["tv_variant"], value))
        checks.append(moment_sandwich_check(pair, a, theta, limit))
    checks.append(variance_check(pair, limit))
    checks.append(ratio_range_check(pair, limit))
    return report

