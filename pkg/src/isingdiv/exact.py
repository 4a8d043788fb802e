"""Ground truth by enumerating all ``2**n`` configurations.

Enumeration index ``x`` encodes the configuration whose vertex ``i`` is +1
iff bit ``i`` of ``x`` is set. Everything is computed from log-weights, so
probability ratios are differences of logs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from math import comb
from typing import NamedTuple

import numpy as np
from scipy.special import logsumexp

from . import divergences as dv
from .errors import CapacityError, InputError
from .model import Configuration, IsingModel, ModelPair, combine, log_weights, spins_from_index

_CHUNK = 1 << 16


@dataclass(frozen=True)
class ExactLimit:
    max_n: int = 22

    def check(self, n: int):
        if n > self.max_n:
            raise CapacityError(
                f"exact enumeration over 2^{n} configurations exceeds max_n={self.max_n}"
            )


DEFAULT_LIMIT = ExactLimit()


class PartitionFunction(NamedTuple):
    log_z: float
    z: float


class RatioIdentity(NamedTuple):
    """Both sides of ``sum nu^k / mu^(k-1) = Z_mu^(k-1) Z_k / Z_nu^k``, with their logs."""

    direct: float
    ratio: float
    log_direct: float
    log_ratio: float


def all_spins(n: int) -> np.ndarray:
    return spins_from_index(np.arange(1 << n, dtype=np.int64), n)


@lru_cache(maxsize=16)
def _log_weight_table(model: IsingModel) -> np.ndarray:
    # fixed chunk boundaries keep the result independent of how the work is split
    total = 1 << model.n
    out = np.empty(total)
    for start in range(0, total, _CHUNK):
        idx = np.arange(start, min(start + _CHUNK, total), dtype=np.int64)
        out[start:start + idx.size] = log_weights(model, spins_from_index(idx, model.n))
    out.setflags(write=False)
    return out


def log_weight_table(model: IsingModel, limit: ExactLimit = DEFAULT_LIMIT) -> np.ndarray:
    """``ln w`` for every configuration, in enumeration order (read-only array)."""
    limit.check(model.n)
    return _log_weight_table(model)


def log_probabilities(model: IsingModel, limit: ExactLimit = DEFAULT_LIMIT) -> np.ndarray:
    lw = log_weight_table(model, limit)
    return lw - logsumexp(lw)


def partition_function(model: IsingModel, limit: ExactLimit = DEFAULT_LIMIT) -> PartitionFunction:
    log_z = float(logsumexp(log_weight_table(model, limit)))
    return PartitionFunction(log_z, float(np.exp(log_z)))


def log_partition(model: IsingModel, limit: ExactLimit = DEFAULT_LIMIT) -> float:
    return partition_function(model, limit).log_z


def unified_partition_function(n, graph, beta, limit: ExactLimit = DEFAULT_LIMIT):
    """``sum_sigma beta ** m(sigma)`` (monochromatic-edge normalisation).

    The Ising model with couplings ``ln(beta)/2`` has partition function
    ``beta ** (-m/2)`` times this quantity.
    """
    from .model import unified_model

    lz = log_partition(unified_model(n, graph, beta), limit)
    log_z = lz + 0.5 * len(graph) * np.log(beta)
    return PartitionFunction(float(log_z), float(np.exp(log_z)))


def gibbs_probability(model: IsingModel, sigma, limit: ExactLimit = DEFAULT_LIMIT) -> float:
    if isinstance(sigma, Configuration):
        idx = sigma.bits
        if sigma.n != model.n:
            raise InputError(f"configuration has {sigma.n} spins, model has {model.n}")
    else:
        idx = Configuration.from_spins(sigma).bits
        if len(sigma) != model.n:
            raise InputError(f"configuration has {len(sigma)} spins, model has {model.n}")
    return float(np.exp(log_probabilities(model, limit)[idx]))


def _pair_logs(pair: ModelPair, limit: ExactLimit):
    return log_probabilities(pair.nu, limit), log_probabilities(pair.mu, limit)


def exact_divergence(pair: ModelPair, kind, limit: ExactLimit = DEFAULT_LIMIT) -> float:
    """``sum_sigma mu(sigma) f(nu(sigma)/mu(sigma))`` by enumeration."""
    if isinstance(kind, str):
        kind = dv.parse(kind)
    lmu, log_r = _log_likelihood_ratio(pair, limit)
    vals = dv.f_of_log(kind, log_r)
    return float(max(0.0, math.fsum(np.exp(lmu) * vals)))


def exact_tv(pair: ModelPair, limit: ExactLimit = DEFAULT_LIMIT) -> float:
    lmu, log_r = _log_likelihood_ratio(pair, limit)
    return float(0.5 * math.fsum(np.exp(lmu) * np.abs(np.expm1(log_r))))


def _log_likelihood_ratio(pair: ModelPair, limit: ExactLimit):
    """``(ln mu, ln nu/mu)`` per configuration.

    The ratio comes from the weight difference minus ``ln(Z_nu/Z_mu)``, so
    nearly identical models keep their tiny differences instead of losing
    them to the normalising constants.
    """
    lmu = log_probabilities(pair.mu, limit)
    delta = log_weight_table(pair.nu, limit) - log_weight_table(pair.mu, limit)
    if np.max(np.abs(delta)) < 1.0:
        log_z = math.log1p(math.fsum(np.exp(lmu) * np.expm1(delta)))
    else:
        log_z = float(logsumexp(lmu + delta))
    return lmu, delta - log_z


def exact_marginal(model: IsingModel, pinning: dict, v: int, c: int,
                   limit: ExactLimit = DEFAULT_LIMIT) -> float:
    """``mu_v(c)`` conditioned on the spins in ``pinning`` (vertex -> spin)."""
    if v in pinning:
        raise InputError(f"vertex {v} is pinned")
    if c not in (-1, 1):
        raise InputError(f"spin must be +-1, got {c}")
    lw = log_weight_table(model, limit)
    idx = np.arange(1 << model.n, dtype=np.int64)
    mask = np.ones(idx.size, dtype=bool)
    for u, s in pinning.items():
        mask &= ((idx >> u) & 1) == (1 if s == 1 else 0)
    hit = mask & ((((idx >> v) & 1) == 1) == (c == 1))
    return float(np.exp(logsumexp(lw[hit]) - logsumexp(lw[mask])))


@lru_cache(maxsize=16)
def _cdf(model: IsingModel) -> np.ndarray:
    p = np.exp(log_probabilities(model))
    cdf = np.cumsum(p)
    cdf /= cdf[-1]
    cdf.setflags(write=False)
    return cdf


def exact_samples(model: IsingModel, size: int, rng, limit: ExactLimit = DEFAULT_LIMIT) -> np.ndarray:
    """``size`` perfect Gibbs samples as a ``(size, n)`` int8 matrix (inverse CDF)."""
    limit.check(model.n)
    u = rng.random(size)
    idx = np.minimum(np.searchsorted(_cdf(model), u, side="right"), (1 << model.n) - 1)
    return spins_from_index(idx, model.n)


def exact_sample(model: IsingModel, rng, limit: ExactLimit = DEFAULT_LIMIT) -> Configuration:
    limit.check(model.n)
    u = rng.random()
    idx = int(min(np.searchsorted(_cdf(model), u, side="right"), (1 << model.n) - 1))
    return Configuration(model.n, idx)


def exact_moment_sum(pair: ModelPair, alpha: int, limit: ExactLimit = DEFAULT_LIMIT) -> float:
    """``sum_sigma mu(sigma) (nu(sigma)/mu(sigma) + 1) ** alpha``."""
    if alpha <= 0:
        raise InputError(f"alpha must be positive, got {alpha}")
    lnu, lmu = _pair_logs(pair, limit)
    return float(np.exp(logsumexp(lmu + alpha * np.logaddexp(lnu - lmu, 0.0))))


def exact_ratio_identity(pair: ModelPair, k: int, limit: ExactLimit = DEFAULT_LIMIT) -> RatioIdentity:
    lnu, lmu = _pair_logs(pair, limit)
    log_direct = float(logsumexp(k * lnu - (k - 1) * lmu))
    log_ratio = (
        (k - 1) * log_partition(pair.mu, limit)
        + log_partition(combine(pair, k), limit)
        - k * log_partition(pair.nu, limit)
    )
    return RatioIdentity(float(np.exp(log_direct)), float(np.exp(log_ratio)), log_direct, float(log_ratio))


def _log_z_over_mu(model: IsingModel, pair: ModelPair, limit: ExactLimit) -> float:
    """``ln(Z_model / Z_mu)`` as ``log1p(E_mu[w_model / w_mu - 1])``, precise when the ratio is near 1."""
    delta = log_weight_table(model, limit) - log_weight_table(pair.mu, limit)
    return math.log1p(math.fsum(np.exp(log_probabilities(pair.mu, limit)) * np.expm1(delta)))


def binomial_chi_sum(pair: ModelPair, alpha: int, limit: ExactLimit = DEFAULT_LIMIT) -> float:
    """Signed partition-ratio sum ``1/2 sum_k C(a,k) (-1)^(a-k) Z_mu^(k-1) Z_k / Z_nu^k``.

    Equals the chi^alpha divergence when ``alpha`` is even. The signed
    coefficients sum to zero, so each ratio ``e^L`` enters as ``expm1(L)``;
    for nearly identical pairs this avoids cancelling O(1) terms.
    """
    log_nu = _log_z_over_mu(pair.nu, pair, limit)
    terms = []
    for k in range(alpha + 1):
        log_r = _log_z_over_mu(combine(pair, k), pair, limit) - k * log_nu
        terms.append(comb(alpha, k) * (-1) ** (alpha - k) * math.expm1(log_r))
    return 0.5 * math.fsum(terms)


def exact_variance_W(pair: ModelPair, limit: ExactLimit = DEFAULT_LIMIT) -> float:
    """Variance under ``mu`` of ``W = w_nu(X) / w_mu(X)``."""
    lmu = log_probabilities(pair.mu, limit)
    log_w = log_weight_table(pair.nu, limit) - log_weight_table(pair.mu, limit)
    # E_mu[W] = Z_nu / Z_mu; centring in log space keeps identical pairs at exactly 0
    log_mean = log_partition(pair.nu, limit) - log_partition(pair.mu, limit)
    rel = np.expm1(log_w - log_mean)
    return float(math.exp(2 * log_mean) * math.fsum(np.exp(lmu) * rel * rel))


def log_weight_ratio_range(pair: ModelPair, limit: ExactLimit = DEFAULT_LIMIT):
    """``(min, max)`` over configurations of ``ln(w_nu / w_mu)``."""
    d = log_weight_table(pair.nu, limit) - log_weight_table(pair.mu, limit)
    return float(d.min()), float(d.max())


def weight_ratio_range(pair: ModelPair, limit: ExactLimit = DEFAULT_LIMIT):
    """``(min, max)`` over configurations of ``w_nu / w_mu``."""
    lo, hi = log_weight_ratio_range(pair, limit)
    return float(np.exp(lo)), float(np.exp(hi))
