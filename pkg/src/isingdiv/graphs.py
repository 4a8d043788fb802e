"""Edge-list generators for the graph families used in checks and the CLI."""

from __future__ import annotations

import numpy as np

from .errors import InputError

PETERSEN_EDGES = (
    (0, 1), (1, 2), (2, 3), (3, 4), (0, 4),
    (0, 5), (1, 6), (2, 7), (3, 8), (4, 9),
    (5, 7), (7, 9), (6, 9), (6, 8), (5, 8),
)


def path(n):
    return [(i, i + 1) for i in range(n - 1)]


def cycle(n):
    if n < 3:
        raise InputError(f"cycle needs at least 3 vertices, got {n}")
    return [(i, (i + 1) % n) for i in range(n)]


def complete(n):
    return [(i, j) for i in range(n) for j in range(i + 1, n)]


def petersen():
    return list(PETERSEN_EDGES)


def random_regular(n, degree, rng, max_tries=100_000):
    """Uniform-ish random ``degree``-regular simple graph via the configuration model.

    Stubs are paired uniformly at random; pairings with loops or multi-edges
    are rejected and redrawn. Dense degrees go through the complement graph.
    """
    if not 0 <= degree < n or (n * degree) % 2:
        raise InputError(f"no simple {degree}-regular graph on {n} vertices")
    if 2 * degree > n - 1:
        # dense case: complementation is a bijection between d- and (n-1-d)-regular graphs
        sparse = set(random_regular(n, n - 1 - degree, rng, max_tries))
        return [e for e in complete(n) if e not in sparse]
    stubs = np.repeat(np.arange(n), degree)
    for _ in range(max_tries):
        perm = rng.permutation(stubs).reshape(-1, 2)
        u, v = np.minimum(perm[:, 0], perm[:, 1]), np.maximum(perm[:, 0], perm[:, 1])
        if np.any(u == v):
            continue
        edges = set(zip(u.tolist(), v.tolist()))
        if len(edges) == len(u):
            return sorted(edges)
    raise InputError(f"rejection sampling failed for {degree}-regular graph on {n} vertices")


def erdos_renyi(n, p, rng):
    return [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < p]


def parse_family(spec, rng=None):
    """Parse ``path:<n>``, ``cycle:<n>``, ``complete:<n>``, ``regular:<n>:<d>``, ``petersen``.

    Returns ``(n, edges, consumed)`` where ``consumed`` is the number of
    ``:``-separated tokens used, so callers can read trailing parameters.
    """
    tokens = spec.split(":") if isinstance(spec, str) else list(spec)
    text = ":".join(tokens)
    name = tokens[0]
    try:
        if name == "petersen":
            return 10, petersen(), 1
        if name in ("path", "cycle", "complete"):
            n = int(tokens[1])
            if n < 1:
                raise InputError(f"graph needs at least one vertex: {text!r}")
            return n, {"path": path, "cycle": cycle, "complete": complete}[name](n), 2
        if name == "regular":
            n, d = int(tokens[1]), int(tokens[2])
            if rng is None:
                rng = np.random.default_rng(0)
            return n, random_regular(n, d, rng), 3
    except InputError:
        raise
    except (IndexError, ValueError) as exc:
        raise InputError(f"malformed graph family {text!r}") from exc
    raise InputError(f"unknown graph family {name!r}")
