import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from hierlab import _kernels
from hierlab.graph import Graph

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def random_graph(n, p, seed, connected=False):
    """G(n, p) sample; with ``connected`` a random spanning path is added first."""
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, 1)
    keep = rng.random(len(iu)) < p
    edges = np.stack([iu[keep], ju[keep]], axis=1)
    if connected and n > 1:
        order = rng.permutation(n)
        edges = np.concatenate([edges, np.stack([order[:-1], order[1:]], axis=1)])
    return Graph.from_edges(n, edges)


def path_graph(n):
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def star_graph(leaves):
    return Graph.from_edges(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def complete_graph(n):
    return Graph.from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def balanced_tree(branching, depth):
    edges, depths = [], [0]
    frontier, nxt = [0], 1
    for d in range(1, depth + 1):
        new = []
        for parent in frontier:
            for _ in range(branching):
                edges.append((parent, nxt))
                depths.append(d)
                new.append(nxt)
                nxt += 1
        frontier = new
    return Graph.from_edges(nxt, edges), np.array(depths)


@pytest.fixture(params=sorted(_kernels.AVAILABLE))
def backend(request):
    prev = _kernels.use_backend(request.param)
    yield request.param
    _kernels.backend = prev


# acceptance reporting: one line per criterion in the terminal summary
_CRITERIA = {}


def pytest_runtest_makereport(item, call):
    mark = item.get_closest_marker("criterion")
    if mark is None or call.when != "call":
        return
    key = str(mark.args[0])
    detail = dict(item.user_properties).get("detail", "")
    passed = call.excinfo is None
    if not passed:
        detail = detail or str(call.excinfo.value).splitlines()[0][:160]
    prev = _CRITERIA.get(key)
    ok = passed and (prev is None or prev[0])
    details = [d for d in ((prev[1] if prev else ""), detail) if d]
    _CRITERIA[key] = (ok, "; ".join(details))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_CRITERIA, key=lambda k: (int(k.rstrip("abc")), k)):
        ok, detail = _CRITERIA[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if ok else 'FAIL'}  {detail}")
