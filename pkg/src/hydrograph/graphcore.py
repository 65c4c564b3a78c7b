"""Immutable directed-graph snapshot with reachability primitives.

The in-memory form of a FROMCOMID/TOCOMID edge list. Nodes carry a kind
(river, waterbody, point source) and an optional HUC12 tag. Iteration
order is ascending COMID everywhere so serialized output diffs cleanly.
"""

from __future__ import annotations

from collections import deque
from enum import Enum
from typing import Iterable, Iterator, Mapping

from .ingest import FlowEdge, serialize_flow_table

__all__ = [
    "NodeKind",
    "Direction",
    "HydroGraph",
    "UnknownNodeError",
    "build_graph",
    "has_path",
    "reachable_from",
    "induced_subgraph",
    "serialize_flow_table",
]


class NodeKind(Enum):
    RIVER = "River"
    WATERBODY = "Waterbody"
    POINT_SOURCE = "PointSource"


class Direction(Enum):
    DOWNSTREAM = "downstream"
    UPSTREAM = "upstream"


class UnknownNodeError(KeyError):
    def __init__(self, comid: int):
        super().__init__(comid)
        self.comid = comid

    def __str__(self) -> str:
        return f"unknown node {self.comid}"


class HydroGraph:
    """Directed graph over COMIDs; immutable after construction.

    Maintains both forward and transposed adjacency; the transpose is the
    exact mirror by construction. Cycles are tolerated, not rejected:
    braided flow exists in real flow tables and BFS handles it.
    """

    __slots__ = ("_kinds", "_hucs", "_out", "_in", "_edge_count")

    def __init__(
        self,
        kinds: dict[int, NodeKind],
        hucs: dict[int, str],
        out_adj: dict[int, tuple[int, ...]],
        in_adj: dict[int, tuple[int, ...]],
        edge_count: int,
    ):
        self._kinds = kinds
        self._hucs = hucs
        self._out = out_adj
        self._in = in_adj
        self._edge_count = edge_count

    @property
    def node_count(self) -> int:
        return len(self._kinds)

    @property
    def edge_count(self) -> int:
        return self._edge_count

    def nodes(self) -> Iterator[int]:
        """Node COMIDs in ascending order."""
        return iter(self._kinds)

    def has_node(self, comid: int) -> bool:
        return comid in self._kinds

    def _require(self, comid: int) -> None:
        if comid not in self._kinds:
            raise UnknownNodeError(comid)

    def kind(self, comid: int) -> NodeKind:
        self._require(comid)
        return self._kinds[comid]

    def huc(self, comid: int) -> str | None:
        self._require(comid)
        return self._hucs.get(comid)

    def successors(self, comid: int) -> tuple[int, ...]:
        self._require(comid)
        return self._out.get(comid, ())

    def predecessors(self, comid: int) -> tuple[int, ...]:
        self._require(comid)
        return self._in.get(comid, ())

    def edges(self) -> Iterator[FlowEdge]:
        """All edges ascending by (from, to)."""
        for frm in self._kinds:
            for to in self._out.get(frm, ()):
                yield FlowEdge(frm, to)

    def waterbodies(self) -> tuple[int, ...]:
        return tuple(
            c for c, k in self._kinds.items() if k is NodeKind.WATERBODY
        )

    def serialize(self) -> str:
        return serialize_flow_table(self.edges())

    def __eq__(self, other) -> bool:
        if not isinstance(other, HydroGraph):
            return NotImplemented
        return (
            self._kinds == other._kinds
            and self._hucs == other._hucs
            and self._out == other._out
        )

    def __repr__(self) -> str:
        return f"HydroGraph(nodes={self.node_count}, edges={self.edge_count})"


def build_graph(
    edges: Iterable[FlowEdge | tuple[int, int]],
    kinds: Mapping[int, NodeKind] | None = None,
    hucs: Mapping[int, str] | None = None,
    extra_nodes: Iterable[int] = (),
) -> HydroGraph:
    """Assemble a HydroGraph from a cleaned edge list.

    Nodes are the union of edge endpoints plus `extra_nodes` (for
    survivors that lost every edge during aggregation). Nodes absent from
    `kinds` default to River. Duplicate edges collapse; self-loops drop.
    """
    kinds = dict(kinds or {})
    hucs = dict(hucs or {})

    out_sets: dict[int, set[int]] = {}
    node_set: set[int] = set(extra_nodes)
    edge_list: list[tuple[int, int]] = []
    for e in edges:
        frm, to = e
        node_set.add(frm)
        node_set.add(to)
        if frm == to:
            continue
        targets = out_sets.setdefault(frm, set())
        if to not in targets:
            targets.add(to)
            edge_list.append((frm, to))

    ordered = sorted(node_set)
    node_kinds = {c: kinds.get(c, NodeKind.RIVER) for c in ordered}
    node_hucs = {c: hucs[c] for c in ordered if c in hucs}

    out_adj = {c: tuple(sorted(out_sets.get(c, ()))) for c in ordered}
    in_sets: dict[int, list[int]] = {c: [] for c in ordered}
    for frm, to in sorted(edge_list):
        in_sets[to].append(frm)
    in_adj = {c: tuple(sorted(v)) for c, v in in_sets.items()}
    return HydroGraph(node_kinds, node_hucs, out_adj, in_adj, len(edge_list))


def has_path(g: HydroGraph, src: int, dst: int) -> bool:
    """Directed reachability; src == dst counts as reachable."""
    g.kind(src)
    g.kind(dst)
    if src == dst:
        return True
    seen = {src}
    queue = deque((src,))
    while queue:
        node = queue.popleft()
        for nxt in g.successors(node):
            if nxt == dst:
                return True
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return False


def reachable_from(
    g: HydroGraph, src: int, direction: Direction
) -> tuple[set[int], HydroGraph]:
    """Closure of nodes reachable from src in the given direction.

    The returned set excludes src unless a cycle leads back to it; the
    induced subgraph is taken over the set plus src so callers can draw
    the target node with its neighborhood.
    """
    g.kind(src)
    step = (
        g.successors if direction is Direction.DOWNSTREAM else g.predecessors
    )
    seen: set[int] = set()
    queue = deque(step(src))
    while queue:
        node = queue.popleft()
        if node in seen:
            continue
        seen.add(node)
        queue.extend(n for n in step(node) if n not in seen)
    return seen, induced_subgraph(g, seen | {src})


def induced_subgraph(g: HydroGraph, keep: Iterable[int]) -> HydroGraph:
    """Subgraph on `keep`: those nodes and the edges between them."""
    keep_set = set(keep)
    for c in keep_set:
        g.kind(c)
    kinds = {c: g.kind(c) for c in sorted(keep_set)}
    hucs = {c: g.huc(c) for c in sorted(keep_set) if g.huc(c) is not None}
    edge_count = 0
    out_adj: dict[int, tuple[int, ...]] = {}
    in_adj: dict[int, tuple[int, ...]] = {}
    in_sets: dict[int, list[int]] = {c: [] for c in sorted(keep_set)}
    for c in sorted(keep_set):
        targets = tuple(t for t in g.successors(c) if t in keep_set)
        out_adj[c] = targets
        edge_count += len(targets)
        for t in targets:
            in_sets[t].append(c)
    for c, sources in in_sets.items():
        in_adj[c] = tuple(sorted(sources))
    return HydroGraph(kinds, hucs, out_adj, in_adj, edge_count)
