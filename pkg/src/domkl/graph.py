"""Undirected communication topologies for networks of learners.

Graphs are small (tens of nodes), immutable, and sampled from the
Erdos-Renyi model with rejection until connected.  Nodes are numbered
0..num_nodes-1 and edges are unordered pairs without self loops.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import GraphSamplingError


@dataclass(frozen=True)
class Graph:
    """Immutable undirected graph.

    Parameters
    ----------
    num_nodes : int
        Number of nodes, at least 1.
    edges : tuple of (int, int)
        Unordered edges; each pair is stored sorted and the tuple itself
        is kept in sorted order so equal graphs compare and hash equal.
    """

    num_nodes: int
    edges: tuple
    neighbors: tuple = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        if self.num_nodes < 1:
            raise ValueError("num_nodes must be at least 1")
        canonical = []
        for edge in self.edges:
            k, l = edge
            if k == l:
                raise ValueError("self loop at node %d" % k)
            if k > l:
                k, l = l, k
            if not (0 <= k < l < self.num_nodes):
                raise ValueError("edge (%d, %d) out of range" % (k, l))
            canonical.append((k, l))
        if len(set(canonical)) != len(canonical):
            raise ValueError("duplicate edges")
        object.__setattr__(self, "edges", tuple(sorted(canonical)))
        adjacency = [[] for _ in range(self.num_nodes)]
        for k, l in self.edges:
            adjacency[k].append(l)
            adjacency[l].append(k)
        object.__setattr__(
            self, "neighbors", tuple(tuple(sorted(a)) for a in adjacency)
        )

    def degree(self, node):
        return len(self.neighbors[node])


def generate_er(num_nodes, connection_prob, seed):
    """Sample an Erdos-Renyi graph G(num_nodes, connection_prob).

    Every unordered pair is included independently with probability
    ``connection_prob``.  Pairs are visited in a fixed order, so the edge
    set is a deterministic function of the seed.
    """
    if num_nodes < 2:
        raise ValueError("num_nodes must be at least 2")
    if not 0.0 < connection_prob <= 1.0:
        raise ValueError("connection_prob must be in (0, 1]")
    rng = np.random.default_rng(seed)
    edges = []
    for k in range(num_nodes):
        for l in range(k + 1, num_nodes):
            if rng.random() < connection_prob:
                edges.append((k, l))
    return Graph(num_nodes, tuple(edges))


def connected_components(graph):
    """Return the node sets of each connected component, as sorted tuples."""
    seen = [False] * graph.num_nodes
    components = []
    for start in range(graph.num_nodes):
        if seen[start]:
            continue
        seen[start] = True
        queue = deque([start])
        members = [start]
        while queue:
            node = queue.popleft()
            for other in graph.neighbors[node]:
                if not seen[other]:
                    seen[other] = True
                    members.append(other)
                    queue.append(other)
        components.append(tuple(sorted(members)))
    return tuple(components)


def is_connected(graph):
    """True when every node is reachable from node 0 (single-node graphs count)."""
    seen = [False] * graph.num_nodes
    seen[0] = True
    queue = deque([0])
    count = 1
    while queue:
        node = queue.popleft()
        for other in graph.neighbors[node]:
            if not seen[other]:
                seen[other] = True
                count += 1
                queue.append(other)
    return count == graph.num_nodes


def is_forest(graph):
    """True when the graph is acyclic (edge count equals nodes minus components)."""
    return len(graph.edges) == graph.num_nodes - len(connected_components(graph))


def sample_connected_er(num_nodes, connection_prob, seed, max_attempts=50):
    """Rejection-sample a connected Erdos-Renyi graph.

    Attempt ``i`` draws with seed ``seed + i`` so the sequence of
    candidates, and hence the accepted graph, is reproducible.  Raises
    :class:`GraphSamplingError` carrying the attempt count when no
    connected candidate appears within ``max_attempts``.
    """
    if max_attempts < 1:
        raise ValueError("max_attempts must be at least 1")
    for attempt in range(max_attempts):
        candidate = generate_er(num_nodes, connection_prob, seed + attempt)
        if is_connected(candidate):
            return candidate
    raise GraphSamplingError(
        "no connected graph in %d attempts (num_nodes=%d, connection_prob=%g)"
        % (max_attempts, num_nodes, connection_prob),
        attempts=max_attempts,
    )


def to_edge_list(graph):
    """Serialize as text, one ``"k l"`` pair per line, 0-based indices."""
    return "".join("%d %d\n" % edge for edge in graph.edges)


def from_edge_list(text, num_nodes=None):
    """Parse the text form produced by :func:`to_edge_list`.

    ``num_nodes`` defaults to one past the largest index mentioned, so
    isolated trailing nodes must be declared explicitly.
    """
    edges = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError("line %d: expected two indices" % lineno)
        try:
            k, l = int(parts[0]), int(parts[1])
        except ValueError:
            raise ValueError("line %d: non-integer index" % lineno) from None
        edges.append((k, l))
    if num_nodes is None:
        if not edges:
            raise ValueError("empty edge list needs an explicit num_nodes")
        num_nodes = max(max(e) for e in edges) + 1
    return Graph(num_nodes, tuple(edges))
