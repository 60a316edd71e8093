import itertools
from typing import Iterable, Optional

import networkx as nx
from pydantic import BaseModel

from rbnet.configuration import Configuration, Edge


class TopologyReport(BaseModel):
    """
    Shape of one configuration against optional bounds.

    Attributes
    ----------
    max_degree : int
        Largest number of neighbours of a node
    longest_path : int
        Length, in links, of the longest simple path
    diameter : int
        Largest eccentricity over all connected components
    degree_ok : bool
        ``max_degree`` is within the degree bound (or no bound was given)
    path_ok : bool
        ``longest_path`` is within the path bound (or no bound was given)
    """

    max_degree: int
    longest_path: int
    diameter: int
    degree_bound: Optional[int] = None
    path_bound: Optional[int] = None
    degree_ok: bool = True
    path_ok: bool = True

    @property
    def passed(self) -> bool:
        return self.degree_ok and self.path_ok


def adjacency(n: int, edges: Iterable[Edge]) -> list[list[int]]:
    adj = [[] for _ in range(n)]
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    return adj


def max_degree(n: int, edges: Iterable[Edge]) -> int:
    degree = [0] * n
    for u, v in edges:
        degree[u] += 1
        degree[v] += 1
    return max(degree, default=0)


def longest_simple_path(n: int, edges: Iterable[Edge], stop_above: Optional[int] = None) -> int:
    """
    Exact length of the longest simple path, enumerating simple paths
    between every pair of nodes.

    Exponential in the number of nodes. With ``stop_above`` paths longer
    than one link past that value are not enumerated, and the search returns
    as soon as it has seen a path longer than that value.
    """
    graph = nx.Graph()
    graph.add_nodes_from(range(n))
    graph.add_edges_from(edges)
    limit = stop_above if stop_above is not None else n
    best = 0
    for source, target in itertools.combinations(range(n), 2):
        for path in nx.all_simple_paths(graph, source, target, cutoff=limit + 1):
            best = max(best, len(path) - 1)
            if best > limit:
                return best
    return best


def within_bounds(
    n: int,
    edges: Iterable[Edge],
    degree_bound: Optional[int] = None,
    path_bound: Optional[int] = None,
) -> bool:
    """Fast yes/no form of :func:`check_topology`, used inside the search loops."""
    if degree_bound is not None and max_degree(n, edges) > degree_bound:
        return False
    if path_bound is not None and longest_simple_path(n, edges, path_bound) > path_bound:
        return False
    return True


def check_topology(
    g: Configuration, degree_bound: Optional[int] = None, path_bound: Optional[int] = None
) -> TopologyReport:
    """
    Measures a configuration and compares it with the given bounds.

    :param g: Configuration to measure
    :type g: Configuration
    :param degree_bound: Largest allowed number of neighbours
    :type degree_bound: Optional[int]
    :param path_bound: Largest allowed simple path length
    :type path_bound: Optional[int]
    :return: Measurements and verdicts
    :rtype: TopologyReport
    """
    graph = nx.Graph()
    graph.add_nodes_from(g.nodes)
    graph.add_edges_from(g.edges)
    degree = max((d for _, d in graph.degree()), default=0)
    diameter = max(
        (nx.diameter(graph.subgraph(c)) for c in nx.connected_components(graph)),
        default=0,
    )
    longest = longest_simple_path(g.size, g.edges)
    return TopologyReport(
        max_degree=degree,
        longest_path=longest,
        diameter=diameter,
        degree_bound=degree_bound,
        path_bound=path_bound,
        degree_ok=degree_bound is None or degree <= degree_bound,
        path_ok=path_bound is None or longest <= path_bound,
    )
