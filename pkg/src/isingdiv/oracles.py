"""Sampling and approximate-counting oracles with interchangeable backends.

Three backends share one interface:

* ``exact``: inverse-CDF sampling and enumerated ``ln Z`` (zero error).
* ``glauber``: systematic-scan heat-bath chains for sampling, and an annealed
  product estimator over ``t * J`` for counting. Neither carries an a-priori
  accuracy guarantee outside rapid-mixing regimes.
* ``noisy``: exact answers corrupted in a controlled way, for stress tests.

Every call takes its own ``numpy.random.Generator``; bundles hold policy only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Optional

import numpy as np
from scipy.special import expit, logit, logsumexp

from . import exact
from .errors import InputError
from .model import Configuration, IsingModel, index_from_spins

__all__ = [
    "Backend",
    "OracleBundle",
    "CountEstimate",
    "stream",
    "default_repetitions",
    "glauber_steps",
    "heat_bath",
    "sample",
    "sample_many",
    "count",
    "count_median",
    "annealed_log_partition",
]


class Backend(str, Enum):
    EXACT = "exact"
    GLAUBER = "glauber"
    NOISY = "noisy"


def stream(seed, *key) -> np.random.Generator:
    """Independent generator for the sub-task labelled ``key`` under ``seed``."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key)))


def default_repetitions(alpha: float = 1.0) -> int:
    """Odd median size ``2 ceil(ln(alpha + 2)) + 13``."""
    return 2 * math.ceil(math.log(abs(alpha) + 2.0)) + 13


@dataclass(frozen=True)
class OracleBundle:
    """Backend choice plus the knobs each backend reads.

    ``counting_repetitions=None`` lets callers pick a size via
    :func:`default_repetitions`. ``noise_seed``, when set, gives the noisy
    backend a corruption stream separate from the caller's generator.
    """

    backend: Backend = Backend.EXACT
    glauber_c: float = 20.0
    noise_seed: Optional[int] = None
    counting_repetitions: Optional[int] = None
    limit: exact.ExactLimit = exact.DEFAULT_LIMIT
    anneal_max_levels: int = 100
    anneal_max_samples: int = 10_000

    def __post_init__(self):
        object.__setattr__(self, "backend", Backend(self.backend))
        if not self.glauber_c > 0:
            raise InputError(f"glauber_c must be positive, got {self.glauber_c}")
        r = self.counting_repetitions
        if r is not None and (r < 1 or r % 2 == 0):
            raise InputError(f"counting_repetitions must be odd and >= 1, got {r}")

    def check_model(self, model: IsingModel):
        if self.backend is not Backend.GLAUBER:
            self.limit.check(model.n)

    def repetitions(self, alpha: float = 1.0) -> int:
        return self.counting_repetitions or default_repetitions(alpha)


class CountEstimate(NamedTuple):
    log_z_hat: float
    epsilon_rel: float
    backend: str

    @property
    def z_hat(self) -> float:
        return math.exp(self.log_z_hat)


def _noise_rng(bundle: OracleBundle, rng) -> np.random.Generator:
    if bundle.noise_seed is None:
        return rng
    return np.random.default_rng([bundle.noise_seed, int(rng.integers(2**63))])


# --- heat-bath dynamics ------------------------------------------------------


def glauber_steps(bundle: OracleBundle, n: int, eps_tv: float) -> int:
    """Single-site updates per chain: ``ceil(C n ln(n / eps_tv))``."""
    return max(1, math.ceil(bundle.glauber_c * n * math.log(max(n, 1) / eps_tv)))


# above this degree the per-site lookup tables (2^degree entries) stop paying off
TABLE_MAX_DEGREE = 10


def heat_bath(states, nbr, cpl, fields, steps, rng, start=0, block=256):
    """Run ``steps`` systematic-scan heat-bath updates on every row of ``states`` in place.

    Update ``i`` resamples site ``(start + i) mod n`` in all chains at once, so a
    run of ``n`` steps is one full sweep. Returns the next site to update.
    """
    chains, n = states.shape
    if n == 0 or steps <= 0:
        return start % max(n, 1)
    run = _table_scan if nbr.shape[1] <= TABLE_MAX_DEGREE else _direct_scan
    return run(states, nbr, cpl, fields, steps, rng, start % n, block)


def _conditional_tables(nbr, cpl, fields):
    """``P(s_v = +1 | neighbours)`` indexed by the neighbours' up-bits, shape ``(n, 2^w)``."""
    w = nbr.shape[1]
    bits = (np.arange(2**w)[:, None] >> np.arange(w)) & 1
    local = fields[None, :] + (2 * bits - 1) @ cpl.T
    return np.ascontiguousarray(expit(2.0 * local).T)


def _table_scan(states, nbr, cpl, fields, steps, rng, site, block):
    chains, n = states.shape
    w = nbr.shape[1]
    tables = _conditional_tables(nbr, cpl, fields)
    up = np.asfortranarray(states > 0)
    bits = up.view(np.uint8)
    index = np.empty(chains, dtype=np.uint16)
    shifted = np.empty(chains, dtype=np.uint16)
    done = 0
    while done < steps:
        b = min(block, steps - done)
        for u in rng.random((b, chains)):
            nb = nbr[site]
            np.copyto(index, bits[:, nb[0]])
            for k in range(1, w):
                np.left_shift(bits[:, nb[k]], k, out=shifted, dtype=np.uint16)
                np.bitwise_or(index, shifted, out=index)
            np.less(u, np.take(tables[site], index), out=up[:, site])
            site = site + 1 if site + 1 < n else 0
        done += b
    states[...] = np.where(up, 1, -1)
    return site


def _direct_scan(states, nbr, cpl, fields, steps, rng, site, block):
    chains, n = states.shape
    spins = np.asfortranarray(states, dtype=float)
    done = 0
    while done < steps:
        b = min(block, steps - done)
        # u < expit(2 x)  <=>  x > logit(u) / 2
        for thr in 0.5 * logit(rng.random((b, chains))):
            local = fields[site] + spins[:, nbr[site]] @ cpl[site]
            spins[:, site] = np.where(local > thr, 1.0, -1.0)
            site = site + 1 if site + 1 < n else 0
        done += b
    states[...] = spins
    return site


def _product_samples(fields, size, rng):
    """Independent spins with ``P(+1) = expit(2 h_v)``."""
    up = rng.random((size, fields.size)) < expit(2.0 * fields)
    return np.where(up, 1, -1).astype(np.int8)


def _glauber_samples(bundle, model, eps_tv, size, rng):
    nbr, cpl = model.neighbor_table
    fields = np.asarray(model.fields, dtype=float)
    states = np.where(rng.random((size, model.n)) < 0.5, 1, -1).astype(np.int8)
    heat_bath(states, nbr, cpl, fields, glauber_steps(bundle, model.n, eps_tv), rng)
    return states


# --- sampling ----------------------------------------------------------------


def sample_many(bundle: OracleBundle, model: IsingModel, eps_tv: float, size: int, rng) -> np.ndarray:
    """``size`` independent oracle samples as a ``(size, n)`` int8 spin matrix."""
    if not 0 < eps_tv < 1:
        raise InputError(f"eps_tv must lie in (0, 1), got {eps_tv}")
    bundle.check_model(model)
    if bundle.backend is Backend.EXACT:
        return exact.exact_samples(model, size, rng, bundle.limit)
    if bundle.backend is Backend.GLAUBER:
        return _glauber_samples(bundle, model, eps_tv, size, rng)
    out = exact.exact_samples(model, size, rng, bundle.limit)
    noise = _noise_rng(bundle, rng)
    corrupt = noise.random(size) < eps_tv
    k = int(corrupt.sum())
    if k:
        out[corrupt] = np.where(noise.random((k, model.n)) < 0.5, 1, -1)
    return out


def sample(bundle: OracleBundle, model: IsingModel, eps_tv: float, rng) -> Configuration:
    spins = sample_many(bundle, model, eps_tv, 1, rng)
    return Configuration(model.n, int(index_from_spins(spins)[0]))


# --- counting ----------------------------------------------------------------


def annealed_log_partition(model: IsingModel, eps_rel: float, rng, glauber_c=20.0,
                           max_levels=100, max_samples=10_000) -> float:
    """``ln Z`` as a telescoping product along couplings ``t J``, ``t = 0, 1/L, ..., 1``.

    The ``t = 0`` model is a product distribution with ``Z_0 = prod 2 cosh h_v``
    and is sampled exactly. Each later level warm-starts its chains from the
    previous one and runs ``ceil(C n)`` heat-bath updates.
    """
    fields = np.asarray(model.fields, dtype=float)
    log_z0 = float(np.sum(np.logaddexp(fields, -fields)))
    u, v, j, _ = model._arrays
    if not np.any(j):
        return log_z0
    levels = min(math.ceil(model.n + model.m) * math.ceil(1.0 / eps_rel), max_levels)
    chains = min(math.ceil(64 * levels / eps_rel**2), max_samples)
    nbr, cpl = model.neighbor_table
    states = _product_samples(fields, chains, rng)
    updates = math.ceil(glauber_c * model.n)
    log_z = log_z0
    site = 0
    for t in range(levels):
        energy = (states[:, u] * states[:, v]).astype(float) @ j
        log_z += float(logsumexp(energy / levels) - math.log(chains))
        site = heat_bath(states, nbr, cpl * ((t + 1) / levels), fields, updates, rng, site)
    return log_z


def count(bundle: OracleBundle, model: IsingModel, eps_rel: float, rng) -> CountEstimate:
    """One approximate-counting call with target relative error ``eps_rel``.

    ``eps_rel = 0`` is accepted only by the exact backend.
    """
    if eps_rel < 0 or (eps_rel == 0 and bundle.backend is not Backend.EXACT):
        raise InputError(f"eps_rel must be positive, got {eps_rel}")
    bundle.check_model(model)
    tag = bundle.backend.value
    if bundle.backend is Backend.EXACT:
        return CountEstimate(exact.log_partition(model, bundle.limit), eps_rel, tag)
    if bundle.backend is Backend.GLAUBER:
        log_z = annealed_log_partition(
            model, min(eps_rel, 1.0), rng, bundle.glauber_c,
            bundle.anneal_max_levels, bundle.anneal_max_samples,
        )
        return CountEstimate(log_z, eps_rel, tag)
    noise = _noise_rng(bundle, rng)
    log_z = exact.log_partition(model, bundle.limit)
    if noise.random() < 0.99:
        log_z += noise.uniform(-eps_rel, eps_rel)
    else:
        log_z += 3.0 * eps_rel
    return CountEstimate(float(log_z), eps_rel, tag)


def count_median(bundle: OracleBundle, model: IsingModel, eps_rel: float, repetitions: int,
                 rng) -> CountEstimate:
    """Median of ``repetitions`` independent :func:`count` calls (``repetitions`` odd)."""
    if repetitions < 1 or repetitions % 2 == 0:
        raise InputError(f"repetitions must be odd and >= 1, got {repetitions}")
    if bundle.backend is Backend.EXACT:
        return count(bundle, model, eps_rel, rng)
    logs = sorted(count(bundle, model, eps_rel, rng).log_z_hat for _ in range(repetitions))
    return CountEstimate(logs[repetitions // 2], eps_rel, bundle.backend.value)
