"""Divergence estimators built on sampling and counting oracles.

:func:`estimate` computes the parameter distance ``d`` and the threshold
``theta = 1/(10(n + 3m))`` and routes:

* ``d < theta``: importance-weight estimator under ``mu`` (any catalog kind);
* ``d >= theta``: a kind-specific estimator. chi^a uses the signed binomial sum
  over the interpolated family, KL/Renyi/JS average log-ratios, and the
  alpha-divergence and squared Hellinger use partition-function closed forms.

Randomness: every term ``k`` of an estimator draws from its own stream
``SeedSequence(seed, spawn_key=(k, role))``, so running terms on threads gives
the same numbers as running them in order.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from math import comb
from typing import Optional

import numpy as np

from . import divergences as dv
from .analysis import B_coefficient
from .errors import CapacityError, InputError, OracleError
from .model import (
    ModelPair,
    combine,
    log_weights,
    pair_marginal_lower_bound,
    parameter_distance,
    threshold,
)
from .oracles import OracleBundle, count_median, sample_many, stream

__all__ = [
    "Mode",
    "Regime",
    "EstimatorConfig",
    "Estimate",
    "estimate",
    "route",
    "estimate_small",
    "estimate_chi_alpha_large",
    "estimate_kl_family_large",
    "estimate_alpha_div_large",
    "estimate_hellinger_large",
    "small_theory_samples",
    "chi_large_theory",
    "additive_target",
]

FAILURE_TARGET = 1.0 / 3.0

# stream roles within a term
_COUNT, _SAMPLE = 0, 1


class Mode(str, Enum):
    THEORY = "theory"
    PRACTICAL = "practical"


class Regime(str, Enum):
    SMALL = "small_distance"
    LARGE = "large_distance"
    CLOSED_FORM = "closed_form"


@dataclass(frozen=True)
class EstimatorConfig:
    """Estimator settings.

    ``samples`` is the user sample count (required in practical mode).
    ``delta`` overrides the counting-oracle relative error; ``0`` asks for
    exact counts and only works with the exact backend. ``force_regime``
    bypasses routing (small or large) for tests.
    """

    epsilon: float = 0.3
    mode: Mode = Mode.PRACTICAL
    samples: Optional[int] = None
    delta: Optional[float] = None
    seed: int = 0
    threads: int = 1
    force_regime: Optional[Regime] = None
    max_theory_samples: int = 10**8

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        if self.force_regime is not None:
            object.__setattr__(self, "force_regime", Regime(self.force_regime))
        if not 0 < self.epsilon < 1:
            raise InputError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.mode is Mode.PRACTICAL and not (self.samples and self.samples > 0):
            raise InputError("practical mode needs a positive sample count")
        if self.samples is not None and self.samples <= 0:
            raise InputError(f"samples must be positive, got {self.samples}")
        if self.delta is not None and self.delta < 0:
            raise InputError(f"delta must be non-negative, got {self.delta}")
        if self.threads < 1:
            raise InputError(f"threads must be >= 1, got {self.threads}")

    @property
    def failure_target(self) -> float:
        return FAILURE_TARGET


@dataclass
class Estimate:
    value: float
    regime: Regime
    samples_used: int
    d_par: float
    theta: float
    b: float
    kind: str = ""
    delta: Optional[float] = None
    terms: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "regime": self.regime.value,
            "kind": self.kind,
            "d_par": self.d_par,
            "theta": self.theta,
            "b": self.b,
            "samples_used": self.samples_used,
            "delta": self.delta,
            "terms": self.terms,
        }


# --- shared helpers ----------------------------------------------------------


def _map(cfg: EstimatorConfig, fn, items):
    items = list(items)
    if cfg.threads == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
        return list(pool.map(fn, items))


def _theory_cap(cfg: EstimatorConfig, t_value: float, what: str) -> int:
    if not math.isfinite(t_value) or t_value > cfg.max_theory_samples:
        raise CapacityError(
            f"theory-faithful {what} needs T={t_value:.3g} samples "
            f"(cap {cfg.max_theory_samples}); use practical mode with an explicit sample count"
        )
    return int(t_value)


def _context(pair: ModelPair):
    return parameter_distance(pair), threshold(pair), pair_marginal_lower_bound(pair)


def additive_target(kind: dv.DivergenceKind, epsilon: float, b: float, theta: float) -> float:
    """``epsilon * f(1 + b^2 theta / 2)``, an additive error worth ``e^{+-epsilon}`` here."""
    return epsilon * dv.f_shifted(kind, 0.5 * b * b * theta)


def _log_counts(models, cfg, bundle, delta, repetitions):
    """Median log-partition estimates for ``(key, model)`` items, each on stream ``(key, 0)``."""

    def one(item):
        key, model = item
        return count_median(bundle, model, delta, repetitions, stream(cfg.seed, key, _COUNT)).log_z_hat

    return _map(cfg, one, models)


def route(pair: ModelPair, cfg: Optional[EstimatorConfig] = None) -> Regime:
    """``SMALL`` iff ``d_par < theta``; ties go to the large branch."""
    if cfg is not None and cfg.force_regime is not None:
        return cfg.force_regime
    return Regime.SMALL if parameter_distance(pair) < threshold(pair) else Regime.LARGE


# --- small parameter distance ------------------------------------------------


def small_theory_samples(kind: dv.DivergenceKind, n: int, m: int, b: float, epsilon: float) -> float:
    """``2^12 10^3 F(8(n+3m)/b^2)^2 (n+3m)^2 / (b^4 epsilon^2)``, rounded up."""
    size = n + 3 * m
    F = dv.condition_witness(kind).F(8.0 * size / b**2)
    return math.ceil(2**12 * 1e3 * F**2 * size**2 / (b**4 * epsilon**2))


def estimate_small(pair: ModelPair, kind, cfg: EstimatorConfig, bundle: OracleBundle) -> Estimate:
    """Mean of ``f(W_i / mean W)`` with ``W_i = w_nu / w_mu`` at samples from ``mu``."""
    kind = dv.parse(kind)
    d, theta, b = _context(pair)
    if cfg.mode is Mode.THEORY:
        T = _theory_cap(cfg, small_theory_samples(kind, pair.n, pair.m, b, cfg.epsilon), "small-distance estimator")
    else:
        T = int(cfg.samples)
    spins = sample_many(bundle, pair.mu, 1.0 / (100 * T), T, stream(cfg.seed, 0, _SAMPLE))
    log_w = log_weights(pair.nu, spins) - log_weights(pair.mu, spins)
    shift = log_w - log_w.max()
    log_ratio = shift - math.log(np.mean(np.exp(shift)))
    value = float(np.mean(dv.f_shifted(kind, np.expm1(log_ratio))))
    terms = [{"mean_log_W": float(log_w.mean()), "spread_log_W": float(np.ptp(log_w))}]
    return Estimate(value, Regime.SMALL, T, d, theta, b, kind.spec, None, terms)


# --- large parameter distance: chi^alpha -------------------------------------


def chi_large_theory(alpha: int, b: float, theta: float, epsilon: float):
    """``(T, delta)`` with ``T = 8e4 (a+1) / (eps B)^2`` and ``delta = B eps / (20 (a+1))``."""
    B = B_coefficient(alpha, b, min(theta, 1.0)).B
    T = math.ceil(8e4 * (alpha + 1) / (epsilon**2 * B**2))
    return T, B * epsilon / (20 * (alpha + 1))


def estimate_chi_alpha_large(pair: ModelPair, alpha: int, cfg: EstimatorConfig,
                             bundle: OracleBundle) -> Estimate:
    """Signed binomial sum of indicator-weighted partition ratios over ``k = 0..alpha``.

    Term ``k`` samples the interpolated model ``k J^nu - (k-1) J^mu``; half
    its samples count ``nu_hat > mu_hat`` and the other half ``nu_hat < mu_hat``.
    The reported value is clipped at zero; ``terms`` keep the raw sum.
    """
    if alpha < 1 or int(alpha) != alpha:
        raise InputError(f"chi order must be an integer >= 1, got {alpha}")
    alpha = int(alpha)
    d, theta, b = _context(pair)
    T_theory, delta_theory = chi_large_theory(alpha, b, theta, cfg.epsilon)
    if cfg.mode is Mode.THEORY:
        T = _theory_cap(cfg, T_theory, f"chi^{alpha} estimator")
    else:
        T = int(cfg.samples)
    delta = delta_theory if cfg.delta is None else cfg.delta
    reps = bundle.repetitions(alpha)
    models = [(k, combine(pair, k)) for k in range(alpha + 1)]
    log_z = _log_counts(models, cfg, bundle, delta, reps)
    eps_tv = 1.0 / (200 * T * (alpha + 1))

    def term(k):
        spins = sample_many(bundle, models[k][1], eps_tv, 2 * T, stream(cfg.seed, k, _SAMPLE))
        # nu_hat > mu_hat  <=>  ln w_nu - ln Z_1 > ln w_mu - ln Z_0
        gap = (log_weights(pair.nu, spins) - log_z[1]) - (log_weights(pair.mu, spins) - log_z[0])
        plus = np.count_nonzero(gap[:T] > 0) / T
        minus = np.count_nonzero(gap[T:] < 0) / T
        log_scale = (k - 1) * log_z[0] + log_z[k] - k * log_z[1]
        scale = math.exp(log_scale)
        return {"k": k, "W_plus": plus * scale, "W_minus": minus * scale, "log_scale": log_scale}

    terms = _map(cfg, term, range(alpha + 1))
    sign_a = -1 if alpha % 2 else 1
    raw = 0.5 * math.fsum(
        (-1) ** (alpha - t["k"]) * comb(alpha, t["k"]) * (t["W_plus"] + sign_a * t["W_minus"])
        for t in terms
    )
    terms.append({"raw_value": raw})
    return Estimate(max(raw, 0.0), Regime.LARGE, 2 * T * (alpha + 1), d, theta, b,
                    dv.chi(alpha).spec, delta, terms)


# --- large parameter distance: KL, reverse KL, JS ----------------------------


def estimate_kl_family_large(pair: ModelPair, kind, cfg: EstimatorConfig,
                             bundle: OracleBundle) -> Estimate:
    """Sample means of ``h = ln(nu/mu)`` (and of ``ln((1 + e^h)/2)`` for JS).

    ``h(sigma) = ln w_nu - ln w_mu + ln Z_mu_hat - ln Z_nu_hat``. Every ``|h|``
    must stay within ``n ln(1/b)`` plus the counting slack ``2 delta``;
    otherwise the counting oracle has failed and :class:`OracleError` is raised.
    """
    kind = dv.parse(kind)
    if kind.name not in ("kl", "renyi", "js"):
        raise InputError(f"{kind.spec} is not in the KL family")
    d, theta, b = _context(pair)
    eps_add = additive_target(kind, cfg.epsilon, b, theta)
    h_cap = pair.n * math.log(1.0 / b)
    if cfg.mode is Mode.THEORY:
        T = _theory_cap(cfg, math.ceil(h_cap**2 * 9e4 / eps_add**2), f"{kind.spec} estimator")
    else:
        T = int(cfg.samples)
    delta = eps_add / 4 if cfg.delta is None else cfg.delta
    reps = bundle.repetitions()
    log_z_mu, log_z_nu = _log_counts([(0, pair.mu), (1, pair.nu)], cfg, bundle, delta, reps)

    sources = {"kl": (1,), "renyi": (0,), "js": (1, 0)}[kind.name]

    def draw(k):
        model = pair.nu if k == 1 else pair.mu
        spins = sample_many(bundle, model, 1.0 / (100 * T), T, stream(cfg.seed, k, _SAMPLE))
        h = log_weights(pair.nu, spins) - log_weights(pair.mu, spins) + log_z_mu - log_z_nu
        worst = float(np.max(np.abs(h))) if h.size else 0.0
        if worst > h_cap + 2 * delta + 1e-12:
            raise OracleError(
                f"|ln(nu/mu)| reached {worst:.6g} > n ln(1/b) = {h_cap:.6g}; counting oracle output is off"
            )
        return h

    h = dict(zip(sources, _map(cfg, draw, sources)))
    if kind.name == "kl":
        parts = {"E_nu[h]": float(np.mean(h[1]))}
        raw = parts["E_nu[h]"]
    elif kind.name == "renyi":
        parts = {"E_mu[-h]": float(np.mean(-h[0]))}
        raw = parts["E_mu[-h]"]
    else:
        # JS = E_nu[h]/2 - E_nu[g]/2 - E_mu[g]/2 with g = ln((nu + mu) / (2 mu))
        g_nu = np.logaddexp(h[1], 0.0) - math.log(2.0)
        g_mu = np.logaddexp(h[0], 0.0) - math.log(2.0)
        parts = {"E_nu[h]": float(np.mean(h[1])), "E_nu[g]": float(np.mean(g_nu)),
                 "E_mu[g]": float(np.mean(g_mu))}
        raw = 0.5 * (parts["E_nu[h]"] - parts["E_nu[g]"] - parts["E_mu[g]"])
    terms = [parts, {"log_z_nu": log_z_nu, "log_z_mu": log_z_mu, "eps_add": eps_add, "raw_value": raw}]
    return Estimate(max(raw, 0.0), Regime.LARGE, T * len(sources), d, theta, b, kind.spec, delta, terms)


# --- large parameter distance: closed forms ----------------------------------


def estimate_alpha_div_large(pair: ModelPair, alpha: float, cfg: EstimatorConfig,
                             bundle: OracleBundle) -> Estimate:
    """``(Z_mu^{a-1} Z_a / Z_nu^a - 1) / (a (a - 1))`` from three counting calls."""
    if alpha in (0, 1):
        raise InputError("alpha = 0 and alpha = 1 are the reverse KL and KL divergences; use renyi or kl")
    kind = dv.alpha_div(alpha)
    a = kind.alpha
    d, theta, b = _context(pair)
    delta = additive_target(kind, cfg.epsilon, b, theta) / (8 * (abs(a) + 2)) if cfg.delta is None else cfg.delta
    models = [(0, pair.mu), (1, pair.nu), (2, combine(pair, a))]
    log_mu, log_nu, log_a = _log_counts(models, cfg, bundle, delta, bundle.repetitions(a))
    log_ratio = (a - 1) * log_mu + log_a - a * log_nu
    raw = math.expm1(log_ratio) / (a * (a - 1))
    terms = [{"log_z_mu": log_mu, "log_z_nu": log_nu, "log_z_alpha": log_a, "log_ratio": log_ratio,
              "raw_value": raw}]
    return Estimate(max(raw, 0.0), Regime.CLOSED_FORM, 0, d, theta, b, kind.spec, delta, terms)


def estimate_hellinger_large(pair: ModelPair, cfg: EstimatorConfig, bundle: OracleBundle) -> Estimate:
    """``1 - Z_avg / sqrt(Z_nu Z_mu)`` with ``Z_avg`` for the averaged couplings and fields."""
    kind = dv.HELLINGER
    d, theta, b = _context(pair)
    delta = additive_target(kind, cfg.epsilon, b, theta) / 8 if cfg.delta is None else cfg.delta
    models = [(0, pair.mu), (1, pair.nu), (2, combine(pair, 0.5))]
    log_mu, log_nu, log_avg = _log_counts(models, cfg, bundle, delta, bundle.repetitions())
    log_ratio = log_avg - 0.5 * (log_nu + log_mu)
    raw = -math.expm1(log_ratio)
    terms = [{"log_z_mu": log_mu, "log_z_nu": log_nu, "log_z_avg": log_avg, "raw_value": raw}]
    return Estimate(max(raw, 0.0), Regime.CLOSED_FORM, 0, d, theta, b, kind.spec, delta, terms)


# --- dispatcher --------------------------------------------------------------


def estimate(pair: ModelPair, kind, cfg: EstimatorConfig, bundle: Optional[OracleBundle] = None) -> Estimate:
    """Route to the small- or large-distance estimator for ``kind``."""
    kind = dv.parse(kind)
    bundle = OracleBundle() if bundle is None else bundle
    b = pair_marginal_lower_bound(pair)
    if not b > 0:
        raise InputError("marginal lower bound underflowed to 0; parameters are too extreme")
    if route(pair, cfg) is Regime.SMALL:
        return estimate_small(pair, kind, cfg, bundle)
    if kind.name == "chi":
        return estimate_chi_alpha_large(pair, kind.alpha, cfg, bundle)
    if kind.name == "alpha":
        return estimate_alpha_div_large(pair, kind.alpha, cfg, bundle)
    if kind.name == "hellinger2":
        return estimate_hellinger_large(pair, cfg, bundle)
    return estimate_kl_family_large(pair, kind, cfg, bundle)
