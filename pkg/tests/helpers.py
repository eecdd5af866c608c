from __future__ import annotations

import numpy as np

from locscan.graph_core import GraphSeries, GraphSnapshot


def random_graph(n: int, p: float, rng) -> GraphSnapshot:
    upper = np.triu(rng.random((n, n)) < p, 1)
    return GraphSnapshot(upper | upper.T)


def random_series(n: int, T: int, p: float, seed) -> GraphSeries:
    rng = np.random.default_rng(seed)
    return GraphSeries([random_graph(n, p, rng) for _ in range(T)], n=n)
