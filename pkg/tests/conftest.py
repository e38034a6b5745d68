import numpy as np
import pytest

from seedquery.probe import Sketch, SketchCopy


def random_sketch(rng, n=None, T=None):
    """Sketch over <= 12 nodes with random partitions of random node subsets."""
    n = n or int(rng.integers(3, 13))
    T = T or int(rng.integers(1, 6))
    initial = np.sort(rng.choice(n, size=int(rng.integers(1, n + 1)), replace=False))
    copies = []
    for i in range(T):
        extra = [v for v in range(n) if v not in set(initial.tolist()) and rng.random() < 0.5]
        nodes = rng.permutation(np.concatenate([initial, np.array(extra, dtype=np.int64)])).tolist()
        cuts = sorted(rng.choice(np.arange(1, len(nodes)), size=int(rng.integers(0, len(nodes))),
                                 replace=False).tolist()) if len(nodes) > 1 else []
        parts = [sorted(p) for p in np.split(np.array(nodes), cuts) if len(p)]
        init = set(initial.tolist())
        values = [sum(1 for x in p if x in init) for p in parts]
        copies.append(SketchCopy.from_groups(i, parts, values))
    return Sketch(n, initial, copies)


@pytest.fixture
def sketch_factory():
    return random_sketch


_ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_record():
    return _ACCEPTANCE_LINES.append


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
