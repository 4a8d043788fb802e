"""Ising models, spin configurations, and the algebra on model pairs.

A model on ``n`` vertices stores each coupling once per unordered pair, so the
log-weight of a configuration is

    ln w(sigma) = sum_{u<v} J_uv sigma_u sigma_v + sum_v h_v sigma_v,

which equals the quadratic form 0.5 * sigma^T J sigma + h^T sigma for the
symmetric interaction matrix.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
from scipy.special import expit

from .errors import InputError, ModelFormatError

__all__ = [
    "IsingModel",
    "Configuration",
    "ModelPair",
    "log_weight",
    "log_weights",
    "parameter_distance",
    "marginal_lower_bound",
    "pair_marginal_lower_bound",
    "threshold",
    "combine",
    "unified_model",
    "model_from_dict",
    "model_to_dict",
    "pair_from_dict",
    "pair_to_dict",
    "load_pair",
    "dump_pair",
]


@dataclass(frozen=True)
class IsingModel:
    """Ising model ``(G, J, h)``.

    ``edges`` holds ``(u, v, J_uv)`` triples; they are canonicalised to
    ``u < v`` and sorted on construction. An edge may carry a zero coupling.
    """

    n: int
    edges: tuple = ()
    fields: tuple = ()

    def __post_init__(self):
        n = int(self.n)
        if n < 0:
            raise InputError(f"n must be non-negative, got {n}")
        fields = tuple(float(h) for h in self.fields) if len(self.fields) else (0.0,) * n
        if len(fields) != n:
            raise InputError(f"expected {n} fields, got {len(fields)}")
        seen = set()
        canon = []
        for e in self.edges:
            if len(e) != 3:
                raise InputError(f"edge {e!r} is not a (u, v, J) triple")
            u, v, j = int(e[0]), int(e[1]), float(e[2])
            if not (0 <= u < n and 0 <= v < n):
                raise InputError(f"edge ({u}, {v}) out of range for n={n}")
            if u == v:
                raise InputError(f"self-loop at vertex {u}")
            if u > v:
                u, v = v, u
            if (u, v) in seen:
                raise InputError(f"duplicate edge ({u}, {v})")
            seen.add((u, v))
            canon.append((u, v, j))
        if not all(math.isfinite(x) for x in fields) or not all(math.isfinite(e[2]) for e in canon):
            raise InputError("couplings and fields must be finite")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "edges", tuple(sorted(canon)))
        object.__setattr__(self, "fields", fields)

    @property
    def m(self) -> int:
        return len(self.edges)

    @cached_property
    def _arrays(self):
        if self.edges:
            u, v, j = zip(*self.edges)
        else:
            u, v, j = (), (), ()
        return (
            np.asarray(u, dtype=np.intp),
            np.asarray(v, dtype=np.intp),
            np.asarray(j, dtype=float),
            np.asarray(self.fields, dtype=float),
        )

    @cached_property
    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=int)
        u, v, _, _ = self._arrays
        np.add.at(deg, u, 1)
        np.add.at(deg, v, 1)
        return deg

    @property
    def max_degree(self) -> int:
        return int(self.degrees.max()) if self.n else 0

    @cached_property
    def neighbor_table(self):
        """Padded adjacency ``(nbr, coupling)``, both of shape ``(n, max_degree)``.

        Padding entries point at vertex 0 with coupling 0.
        """
        width = max(self.max_degree, 1)
        nbr = np.zeros((self.n, width), dtype=np.intp)
        cpl = np.zeros((self.n, width), dtype=float)
        fill = np.zeros(self.n, dtype=int)
        for u, v, j in self.edges:
            nbr[u, fill[u]], cpl[u, fill[u]] = v, j
            fill[u] += 1
            nbr[v, fill[v]], cpl[v, fill[v]] = u, j
            fill[v] += 1
        return nbr, cpl

    def coupling(self, u: int, v: int) -> float:
        if u > v:
            u, v = v, u
        return self._coupling_map.get((u, v), 0.0)

    @cached_property
    def _coupling_map(self):
        return {(u, v): j for u, v, j in self.edges}

    def without_couplings(self) -> "IsingModel":
        """Same graph and fields, all couplings zero."""
        return IsingModel(self.n, tuple((u, v, 0.0) for u, v, _ in self.edges), self.fields)


@dataclass(frozen=True)
class Configuration:
    """Spin assignment packed into an integer: bit ``i`` set means vertex ``i`` is +1."""

    n: int
    bits: int

    def __post_init__(self):
        if self.n < 0 or self.bits < 0 or self.bits >> self.n:
            raise InputError(f"bits {self.bits} do not fit {self.n} spins")

    @classmethod
    def from_spins(cls, spins: Iterable[int]) -> "Configuration":
        spins = list(spins)
        bits = 0
        for i, s in enumerate(spins):
            if s not in (-1, 1):
                raise InputError(f"spin {s!r} at vertex {i} is not +-1")
            if s == 1:
                bits |= 1 << i
        return cls(len(spins), bits)

    @property
    def spins(self) -> np.ndarray:
        return spins_from_index(np.asarray([self.bits], dtype=np.int64), self.n)[0]

    def __len__(self):
        return self.n

    def __getitem__(self, i: int) -> int:
        if not 0 <= i < self.n:
            raise IndexError(i)
        return 1 if (self.bits >> i) & 1 else -1


def spins_from_index(index: np.ndarray, n: int) -> np.ndarray:
    """Decode enumeration indices into a ``(len(index), n)`` int8 spin matrix."""
    index = np.asarray(index, dtype=np.int64)
    bits = (index[:, None] >> np.arange(n, dtype=np.int64)) & 1
    return (2 * bits - 1).astype(np.int8)


def index_from_spins(spins: np.ndarray) -> np.ndarray:
    spins = np.atleast_2d(np.asarray(spins))
    weights = np.left_shift(np.int64(1), np.arange(spins.shape[1], dtype=np.int64))
    return ((spins > 0).astype(np.int64) * weights).sum(axis=1)


@dataclass(frozen=True)
class ModelPair:
    """Two models on the same vertex set: ``nu`` (first) and ``mu`` (second)."""

    nu: IsingModel
    mu: IsingModel

    def __post_init__(self):
        if self.nu.n != self.mu.n:
            raise InputError(f"models disagree on n: {self.nu.n} vs {self.mu.n}")

    @property
    def n(self) -> int:
        return self.nu.n

    @cached_property
    def union_edges(self) -> tuple:
        """Sorted ``(u, v)`` pairs carrying a nonzero coupling in either model."""
        keys = {(u, v) for u, v, j in self.nu.edges if j != 0.0}
        keys |= {(u, v) for u, v, j in self.mu.edges if j != 0.0}
        return tuple(sorted(keys))

    @property
    def m(self) -> int:
        return len(self.union_edges)

    @cached_property
    def union_degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=int)
        for u, v in self.union_edges:
            deg[u] += 1
            deg[v] += 1
        return deg

    def swapped(self) -> "ModelPair":
        return ModelPair(self.mu, self.nu)


def _spin_matrix(model: IsingModel, sigma) -> np.ndarray:
    if isinstance(sigma, Configuration):
        if sigma.n != model.n:
            raise InputError(f"configuration has {sigma.n} spins, model has {model.n}")
        return sigma.spins[None, :]
    arr = np.asarray(sigma)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != model.n:
        raise InputError(f"spin array of shape {np.shape(sigma)} does not match n={model.n}")
    return arr


def log_weights(model: IsingModel, spins: np.ndarray) -> np.ndarray:
    """Vectorised ``ln w`` over the rows of a ``(k, n)`` spin matrix."""
    s = _spin_matrix(model, spins)
    u, v, j, h = model._arrays
    s = s.astype(float, copy=False)
    out = s @ h if model.n else np.zeros(s.shape[0])
    if j.size:
        out = out + (s[:, u] * s[:, v]) @ j
    return out


def log_weight(model: IsingModel, sigma) -> float:
    """``ln w(sigma)`` for a single configuration (``Configuration`` or spin sequence)."""
    s = _spin_matrix(model, sigma)
    if s.shape[0] != 1:
        raise InputError("log_weight takes one configuration; use log_weights for batches")
    return float(log_weights(model, s)[0])


def parameter_distance(pair: ModelPair) -> float:
    """Max of coupling differences and degree-normalised field differences.

    Degrees come from the union graph; absent couplings count as zero.
    """
    nu, mu = pair.nu, pair.mu
    d = 0.0
    for u, v in pair.union_edges:
        d = max(d, abs(nu.coupling(u, v) - mu.coupling(u, v)))
    if pair.n:
        dh = np.abs(np.asarray(nu.fields) - np.asarray(mu.fields)) / (pair.union_degrees + 1)
        d = max(d, float(dh.max()))
    return d


def marginal_lower_bound(model: IsingModel) -> float:
    """Smallest single-site conditional marginal over worst-case neighbour pinnings.

    For each vertex ``v`` and spin ``c`` the neighbours are pinned to
    ``-c`` across positive couplings and to ``c`` otherwise, which minimises
    ``mu_v(c)`` by conditional independence.
    """
    if model.n == 0:
        return 0.5
    nbr, cpl = model.neighbor_table
    h = np.asarray(model.fields)
    best = 0.5
    for c in (-1, 1):
        tau = np.where(cpl > 0, -c, c)
        a = h + (cpl * tau).sum(axis=1)
        # mu_v(c) = exp(c a) / (2 cosh a)
        best = min(best, float(expit(2.0 * c * a).min()))
    return best


def pair_marginal_lower_bound(pair: ModelPair) -> float:
    return min(marginal_lower_bound(pair.nu), marginal_lower_bound(pair.mu))


def threshold(pair: ModelPair) -> float:
    """Small/large-distance threshold ``1 / (10 (n + 3m))`` on the union graph."""
    return 1.0 / (10.0 * (pair.n + 3 * pair.m))


def combine(pair: ModelPair, k: float) -> IsingModel:
    """Model with ``J = k J^nu - (k-1) J^mu`` and ``h = k h^nu - (k-1) h^mu``.

    ``k = 1`` and ``k = 0`` return the input models themselves; ``k = 1/2``
    gives the averaged model.
    """
    if k == 1:
        return pair.nu
    if k == 0:
        return pair.mu
    nu, mu = pair.nu, pair.mu
    keys = sorted({(u, v) for u, v, _ in nu.edges} | {(u, v) for u, v, _ in mu.edges})
    edges = tuple((u, v, k * nu.coupling(u, v) - (k - 1) * mu.coupling(u, v)) for u, v in keys)
    fields = tuple(k * a - (k - 1) * b for a, b in zip(nu.fields, mu.fields))
    return IsingModel(pair.n, edges, fields)


def unified_model(n: int, graph: Sequence[tuple[int, int]], beta: float) -> IsingModel:
    """Zero-field model with every coupling equal to ``ln(beta) / 2``.

    Its Gibbs weight is proportional to ``beta ** m(sigma)``, where ``m(sigma)``
    counts monochromatic edges.
    """
    if not beta > 0:
        raise InputError(f"beta must be positive, got {beta}")
    j = math.log(beta) / 2.0
    return IsingModel(n, tuple((u, v, j) for u, v in graph), (0.0,) * n)


# --- JSON --------------------------------------------------------------------

_MODEL_KEYS = ("n", "edges", "fields")


def model_from_dict(doc, where: str = "model") -> IsingModel:
    if not isinstance(doc, dict):
        raise ModelFormatError("expected an object", where)
    for key in doc:
        if key not in _MODEL_KEYS:
            raise ModelFormatError("unexpected key", f"{where}.{key}")
    for key in _MODEL_KEYS:
        if key not in doc:
            raise ModelFormatError("missing key", f"{where}.{key}")
    n = doc["n"]
    if isinstance(n, bool) or not isinstance(n, int):
        raise ModelFormatError("must be an integer", f"{where}.n")
    if not isinstance(doc["edges"], list):
        raise ModelFormatError("must be a list", f"{where}.edges")
    for i, e in enumerate(doc["edges"]):
        if (
            not isinstance(e, list)
            or len(e) != 3
            or not all(isinstance(x, int) and not isinstance(x, bool) for x in e[:2])
            or isinstance(e[2], bool)
            or not isinstance(e[2], (int, float))
        ):
            raise ModelFormatError("edge must be [u, v, J]", f"{where}.edges[{i}]")
    fields = doc["fields"]
    if not isinstance(fields, list) or not all(
        isinstance(x, (int, float)) and not isinstance(x, bool) for x in fields
    ):
        raise ModelFormatError("must be a list of numbers", f"{where}.fields")
    if len(fields) != n:
        raise ModelFormatError(f"expected {n} entries, got {len(fields)}", f"{where}.fields")
    try:
        return IsingModel(n, tuple(tuple(e) for e in doc["edges"]), tuple(fields))
    except InputError as exc:
        raise ModelFormatError(str(exc), where) from exc


def model_to_dict(model: IsingModel) -> dict:
    return {
        "n": model.n,
        "edges": [[u, v, j] for u, v, j in model.edges],
        "fields": list(model.fields),
    }


def pair_from_dict(doc) -> ModelPair:
    if not isinstance(doc, dict):
        raise ModelFormatError("expected an object with keys nu, mu")
    for key in doc:
        if key not in ("nu", "mu"):
            raise ModelFormatError("unexpected key", key)
    for key in ("nu", "mu"):
        if key not in doc:
            raise ModelFormatError("missing key", key)
    nu = model_from_dict(doc["nu"], "nu")
    mu = model_from_dict(doc["mu"], "mu")
    try:
        return ModelPair(nu, mu)
    except InputError as exc:
        raise ModelFormatError(str(exc), "mu.n") from exc


def pair_to_dict(pair: ModelPair) -> dict:
    return {"nu": model_to_dict(pair.nu), "mu": model_to_dict(pair.mu)}


def load_pair(path) -> ModelPair:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ModelFormatError(f"invalid JSON ({exc.msg} at line {exc.lineno})") from exc
    return pair_from_dict(doc)


def dump_pair(pair: ModelPair) -> str:
    return json.dumps(pair_to_dict(pair), indent=2) + "\n"
