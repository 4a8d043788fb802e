import numpy as np
import pytest
from hypothesis import given, strategies as st

from isingdiv import graphs
from isingdiv.errors import InputError


def degrees(n, edges):
    d = np.zeros(n, int)
    for u, v in edges:
        d[u] += 1
        d[v] += 1
    return d


def test_fixed_families():
    assert graphs.path(4) == [(0, 1), (1, 2), (2, 3)]
    assert len(graphs.cycle(5)) == 5
    assert len(graphs.complete(5)) == 10
    assert np.all(degrees(10, graphs.petersen()) == 3) and len(graphs.petersen()) == 15


@given(st.integers(2, 14), st.integers(1, 5), st.integers(0, 2**32))
def test_random_regular(n, d, seed):
    rng = np.random.default_rng(seed)
    if d >= n or (n * d) % 2:
        with pytest.raises(InputError):
            graphs.random_regular(n, d, rng)
        return
    edges = graphs.random_regular(n, d, rng)
    assert len(set(edges)) == len(edges)
    assert all(u < v for u, v in edges)
    assert np.all(degrees(n, edges) == d)


@pytest.mark.parametrize("spec,n,m,used", [
    ("path:3", 3, 2, 2), ("cycle:4", 4, 4, 2), ("complete:4", 4, 6, 2), ("petersen", 10, 15, 1),
    ("regular:6:3", 6, 9, 3), ("cycle:4:1:2", 4, 4, 2),
])
def test_parse_family(spec, n, m, used):
    got_n, edges, consumed = graphs.parse_family(spec)
    assert (got_n, len(edges), consumed) == (n, m, used)


@pytest.mark.parametrize("spec", ["path", "path:x", "torus:3", "regular:5:3", "path:0"])
def test_parse_family_errors(spec):
    with pytest.raises(InputError):
        graphs.parse_family(spec)
