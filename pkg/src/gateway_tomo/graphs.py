"""Network topology: graphs, infection closures, and access planning.

A network is an undirected simple graph with integer site labels and a
declared sign for every coupling.  This module classifies topologies,
computes zero-forcing (infection) closures, and turns a graph plus a chosen
reference site into an access plan: which sites must be measured, in which
order branch segments are peeled, and which sites are left over as
consistency checks.

Everything here is pure bookkeeping on the graph; no spectral data is
touched.  Only the standard library is used.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Iterable, Mapping

from .errors import CapabilityError, InputError, NotEstimableError

Edge = tuple[int, int]


def edge_key(u: int, v: int) -> Edge:
    """Canonical (smaller, larger) form of an undirected edge."""
    if u == v:
        raise InputError(f"self-loop at site {u} is not allowed")
    return (u, v) if u < v else (v, u)


def _check_site(n: object) -> int:
    if isinstance(n, bool) or not isinstance(n, int):
        raise InputError(f"site labels must be integers, got {n!r}")
    if n < 1:
        raise InputError(f"site labels must be positive, got {n}")
    return n


@dataclass(frozen=True)
class NetworkGraph:
    """Undirected simple graph with signed edges.

    ``nodes`` and ``edges`` are normalized on construction: nodes sorted,
    edges canonicalized to (smaller, larger) and sorted.  ``signs`` may be
    passed as a mapping from edge to +/-1 (missing edges default to +1) or
    as a sequence aligned with ``edges``; it is stored aligned with the
    sorted edge tuple.
    """

    nodes: tuple[int, ...]
    edges: tuple[Edge, ...]
    signs: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        nodes = tuple(sorted({_check_site(n) for n in self.nodes}))
        if not nodes:
            raise InputError("graph needs at least one site")

        raw_edges = [tuple(e) for e in self.edges]
        for e in raw_edges:
            if len(e) != 2:
                raise InputError(f"edge {e!r} is not a pair of sites")
        keyed = [edge_key(_check_site(u), _check_site(v)) for u, v in raw_edges]
        if len(set(keyed)) != len(keyed):
            dupes = sorted({e for e in keyed if keyed.count(e) > 1})
            raise InputError(f"duplicate edges: {dupes}")
        node_set = set(nodes)
        for u, v in keyed:
            if u not in node_set or v not in node_set:
                raise InputError(f"edge ({u}, {v}) references an unknown site")

        signs = self.signs
        if isinstance(signs, Mapping):
            unknown = set(signs) - set(keyed)
            if unknown:
                raise InputError(f"signs given for non-edges: {sorted(unknown)}")
            sign_of = {e: signs.get(e, 1) for e in keyed}
        else:
            signs = tuple(signs)
            if signs and len(signs) != len(keyed):
                raise InputError(
                    f"got {len(signs)} signs for {len(keyed)} edges"
                )
            sign_of = dict(zip(keyed, signs)) if signs else {e: 1 for e in keyed}
        for e, s in sign_of.items():
            if s not in (1, -1):
                raise InputError(f"sign of edge {e} must be +1 or -1, got {s!r}")

        order = sorted(range(len(keyed)), key=lambda i: keyed[i])
        sorted_edges = tuple(keyed[i] for i in order)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "edges", sorted_edges)
        object.__setattr__(self, "signs", tuple(sign_of[e] for e in sorted_edges))

    @classmethod
    def from_edges(
        cls,
        edges: Iterable[tuple[int, int]],
        *,
        signs: Mapping[Edge, int] | None = None,
        isolated: Iterable[int] = (),
    ) -> "NetworkGraph":
        """Build a graph from an edge list, inferring the node set."""
        edges = tuple(tuple(e) for e in edges)
        nodes = sorted({n for e in edges for n in e} | set(isolated))
        return cls(tuple(nodes), edges, signs or {})

    @cached_property
    def adjacency(self) -> dict[int, tuple[int, ...]]:
        nbrs: dict[int, list[int]] = {n: [] for n in self.nodes}
        for u, v in self.edges:
            nbrs[u].append(v)
            nbrs[v].append(u)
        return {n: tuple(sorted(ns)) for n, ns in nbrs.items()}

    @cached_property
    def sign_of(self) -> dict[Edge, int]:
        return dict(zip(self.edges, self.signs))

    def degree(self, n: int) -> int:
        return len(self.adjacency[n])


def graph_to_json(g: NetworkGraph) -> dict:
    return {
        "nodes": list(g.nodes),
        "edges": [{"u": u, "v": v, "sign": s} for (u, v), s in zip(g.edges, g.signs)],
    }


def graph_from_json(data: object) -> NetworkGraph:
    """Parse the strict graph schema: {"nodes": [...], "edges": [{u, v, sign?}]}."""
    if not isinstance(data, dict):
        raise InputError("graph document must be a JSON object")
    unknown = set(data) - {"nodes", "edges"}
    if unknown:
        raise InputError(f"unknown graph keys: {sorted(unknown)}")
    if "nodes" not in data or "edges" not in data:
        raise InputError('graph document needs "nodes" and "edges"')
    if not isinstance(data["nodes"], list) or not isinstance(data["edges"], list):
        raise InputError('"nodes" and "edges" must be arrays')
    edges = []
    signs = {}
    for item in data["edges"]:
        if not isinstance(item, dict):
            raise InputError(f"edge entries must be objects, got {item!r}")
        bad = set(item) - {"u", "v", "sign"}
        if bad:
            raise InputError(f"unknown edge keys: {sorted(bad)}")
        if "u" not in item or "v" not in item:
            raise InputError(f'edge entry {item!r} needs "u" and "v"')
        e = edge_key(_check_site(item["u"]), _check_site(item["v"]))
        edges.append(e)
        if "sign" in item:
            signs[e] = item["sign"]
    return NetworkGraph(tuple(data["nodes"]), tuple(edges), signs)


# ---------------------------------------------------------------------------
# Infection (zero forcing)
# ---------------------------------------------------------------------------


def infection_closure(g: NetworkGraph, seeds: Iterable[int]) -> frozenset[int]:
    """Spread infection until no infected site has a unique healthy neighbor.

    The closure is independent of the order in which infections fire, so a
    deterministic sorted sweep is used.
    """
    infected = set(seeds)
    bad = infected - set(g.nodes)
    if bad:
        raise InputError(f"seed sites not in graph: {sorted(bad)}")
    adj = g.adjacency
    changed = True
    while changed:
        changed = False
        for n in sorted(infected):
            healthy = [u for u in adj[n] if u not in infected]
            if len(healthy) == 1:
                infected.add(healthy[0])
                changed = True
    return frozenset(infected)


def is_infecting(g: NetworkGraph, seeds: Iterable[int]) -> bool:
    return infection_closure(g, seeds) == set(g.nodes)


def minimum_infecting_sets(
    g: NetworkGraph, max_nodes: int = 16
) -> tuple[tuple[int, ...], ...]:
    """All infecting sets of minimum size, in lexicographic order.

    Exhaustive search; refuses graphs with more than ``max_nodes`` sites.
    """
    n = len(g.nodes)
    if n > max_nodes:
        raise CapabilityError(
            f"exhaustive infecting-set search over {n} sites exceeds the "
            f"{max_nodes}-site cap"
        )
    for size in range(1, n + 1):
        hits = [
            seeds
            for seeds in itertools.combinations(g.nodes, size)
            if is_infecting(g, seeds)
        ]
        if hits:
            return tuple(hits)
    raise AssertionError("the full node set always infects itself")


# ---------------------------------------------------------------------------
# Topology classification
# ---------------------------------------------------------------------------


class TopologyKind(str, Enum):
    PATH = "path"
    TREE = "tree"
    UNICYCLIC = "unicyclic"
    MULTI_CYCLE = "multi_cycle"
    DISCONNECTED = "disconnected"


@dataclass(frozen=True)
class TopologyClass:
    kind: TopologyKind
    cycle: tuple[int, ...] | None = None
    excess: int | None = None


def _is_connected(g: NetworkGraph) -> bool:
    seen = {g.nodes[0]}
    queue = deque(seen)
    while queue:
        n = queue.popleft()
        for u in g.adjacency[n]:
            if u not in seen:
                seen.add(u)
                queue.append(u)
    return len(seen) == len(g.nodes)


def _two_core(g: NetworkGraph) -> set[int]:
    deg = {n: g.degree(n) for n in g.nodes}
    queue = deque(n for n in g.nodes if deg[n] <= 1)
    dead: set[int] = set()
    while queue:
        n = queue.popleft()
        if n in dead:
            continue
        dead.add(n)
        for u in g.adjacency[n]:
            if u not in dead:
                deg[u] -= 1
                if deg[u] <= 1:
                    queue.append(u)
    return set(g.nodes) - dead


def _ordered_cycle(g: NetworkGraph, members: set[int]) -> tuple[int, ...]:
    """Walk the unique cycle starting at its smallest site, toward the
    smaller of that site's two cycle neighbors."""
    start = min(members)
    first = min(u for u in g.adjacency[start] if u in members)
    order = [start, first]
    prev, cur = start, first
    while cur != start:
        nxt = next(u for u in g.adjacency[cur] if u in members and u != prev)
        order.append(nxt)
        prev, cur = cur, nxt
    return tuple(order[:-1])


def classify_topology(g: NetworkGraph) -> TopologyClass:
    if not _is_connected(g):
        return TopologyClass(TopologyKind.DISCONNECTED)
    excess = len(g.edges) - len(g.nodes) + 1
    if excess == 0:
        max_deg = max((g.degree(n) for n in g.nodes), default=0)
        kind = TopologyKind.PATH if max_deg <= 2 else TopologyKind.TREE
        return TopologyClass(kind, excess=0)
    if excess == 1:
        return TopologyClass(
            TopologyKind.UNICYCLIC, cycle=_ordered_cycle(g, _two_core(g)), excess=1
        )
    return TopologyClass(TopologyKind.MULTI_CYCLE, excess=excess)


def is_estimable(g: NetworkGraph) -> tuple[bool, str | None]:
    """Whether boundary spectral data can determine the network at all.

    Requires a connected graph with no more edges than sites.
    """
    topo = classify_topology(g)
    if topo.kind is TopologyKind.DISCONNECTED:
        return False, "graph is disconnected"
    if topo.kind is TopologyKind.MULTI_CYCLE:
        return False, (
            f"more edges than sites (cycle excess {topo.excess}); "
            "independent loops cannot all be resolved"
        )
    return True, None


# ---------------------------------------------------------------------------
# Access planning
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BranchPeel:
    """One reconstruction segment.

    ``nodes`` lists the sites whose sum-rule equations this segment consumes,
    head first; the terminal site is reached but not consumed.  A segment
    seeded by measurement starts from the moduli of an accessed leaf; a
    derived segment starts from an eigenvector column produced by earlier
    segments.
    """

    head: int
    nodes: tuple[int, ...]
    terminal: int
    seeded_by_measurement: bool


@dataclass(frozen=True)
class CyclePlan:
    """Cycle sites split by how their moment data is obtained."""

    cycle: tuple[int, ...]
    measured: tuple[int, ...]
    attachments: tuple[int, ...]


@dataclass(frozen=True)
class AccessPlan:
    """Everything reconstruction needs to know about measurement layout.

    ``reference_path`` runs from the reference site to the first branching
    or cycle site.  ``peel_schedule`` is ordered: a derived segment never
    appears before the segments that determine its head vector.
    """

    reference: int
    access_set: tuple[int, ...]
    reference_path: tuple[int, ...]
    peel_schedule: tuple[BranchPeel, ...] = ()
    cycle_plan: CyclePlan | None = None
    aggressive: bool = False

    @property
    def consumed_sites(self) -> tuple[int, ...]:
        sites = list(self.reference_path[:-1])
        for peel in self.peel_schedule:
            sites.extend(peel.nodes)
        if self.cycle_plan is not None:
            sites.extend(self.cycle_plan.cycle)
        return tuple(sites)

    def check_sites(self, g: NetworkGraph) -> tuple[int, ...]:
        """Sites whose equations are left over as consistency checks."""
        return tuple(sorted(set(g.nodes) - set(self.consumed_sites)))

    def validate(self, g: NetworkGraph) -> None:
        """Raise InputError unless the plan is coherent for ``g``.

        Checks that each site's equation is consumed at most once, that the
        segments and cycle jointly resolve every edge exactly once, and that
        measured heads are accessed.
        """
        node_set = set(g.nodes)
        if set(self.access_set) - node_set:
            raise InputError("access set contains unknown sites")
        if self.reference not in self.access_set:
            raise InputError("reference site is not in the access set")

        consumed = self.consumed_sites
        if len(consumed) != len(set(consumed)):
            dupes = sorted({n for n in consumed if consumed.count(n) > 1})
            raise InputError(f"sites consumed more than once: {dupes}")
        if set(consumed) - node_set:
            raise InputError("plan consumes sites not in the graph")

        edges: list[Edge] = []
        path = self.reference_path
        edges.extend(edge_key(a, b) for a, b in zip(path, path[1:]))
        for peel in self.peel_schedule:
            seg = (*peel.nodes, peel.terminal)
            if peel.nodes and peel.nodes[0] != peel.head:
                raise InputError(f"segment at {peel.head} does not start at its head")
            if peel.seeded_by_measurement and peel.head not in self.access_set:
                raise InputError(f"measured segment head {peel.head} is not accessed")
            edges.extend(edge_key(a, b) for a, b in zip(seg, seg[1:]))
        if self.cycle_plan is not None:
            cyc = self.cycle_plan.cycle
            edges.extend(edge_key(a, b) for a, b in zip(cyc, cyc[1:]))
            edges.append(edge_key(cyc[-1], cyc[0]))
            if set(self.cycle_plan.measured) | set(self.cycle_plan.attachments) != set(
                cyc
            ):
                raise InputError("cycle plan does not partition the cycle sites")
        if len(edges) != len(set(edges)):
            dupes = sorted({e for e in edges if edges.count(e) > 1})
            raise InputError(f"edges resolved more than once: {dupes}")
        if set(edges) != set(g.edges):
            missing = sorted(set(g.edges) - set(edges))
            extra = sorted(set(edges) - set(g.edges))
            raise InputError(
                f"plan edge coverage mismatch (missing {missing}, extra {extra})"
            )


def _walk_segment(
    g: NetworkGraph,
    start: int,
    resolved: set[Edge],
    anchors: set[int],
) -> list[int]:
    """Follow unresolved edges from ``start`` to the next stop site.

    Stops on reaching a branching site (degree >= 3), an anchor, or a dead
    end; the stop site is included.
    """
    seg = [start]
    cur = start
    while True:
        if cur != start and (cur in anchors or g.degree(cur) >= 3):
            break
        nxt = [u for u in g.adjacency[cur] if edge_key(cur, u) not in resolved]
        if not nxt:
            break
        assert len(nxt) == 1, f"ambiguous walk at site {cur}"
        resolved.add(edge_key(cur, nxt[0]))
        seg.append(nxt[0])
        cur = nxt[0]
    return seg


def _subtree_size(g: NetworkGraph, root: int, banned: int) -> int:
    seen = {banned, root}
    queue = deque([root])
    count = 1
    while queue:
        n = queue.popleft()
        for u in g.adjacency[n]:
            if u not in seen:
                seen.add(u)
                queue.append(u)
                count += 1
    return count


def _spine_path(g: NetworkGraph, jstar: int, parent: int) -> list[int]:
    """Descend from a junction into its largest child subtree until a leaf.

    Ties between equal subtree sizes go to the larger child label, which
    drops the lexicographically largest leaf from the access set.
    """
    path = [jstar]
    cur, par = jstar, parent
    while True:
        children = [u for u in g.adjacency[cur] if u != par]
        if not children:
            return path
        chosen = max(children, key=lambda c: (_subtree_size(g, c, cur), c))
        path.append(chosen)
        cur, par = chosen, cur


def compute_access_plan(
    g: NetworkGraph, reference: int | None = None, *, aggressive: bool = False
) -> AccessPlan:
    """Choose accessed sites and a reconstruction order for ``g``.

    The standard rule accesses every leaf (trees) plus every degree-2 cycle
    site (unicyclic); a pure path needs only its reference end and a pure
    cycle needs every site.  The aggressive variant applies to trees only
    and drops one leaf by consuming branching-site equations along a single
    descending spine.
    """
    topo = classify_topology(g)
    ok, reason = is_estimable(g)
    if not ok:
        raise NotEstimableError(reason)
    if len(g.nodes) < 2:
        raise InputError("access planning needs at least two sites")
    if reference is not None and reference not in set(g.nodes):
        raise InputError(f"reference site {reference} is not in the graph")
    if aggressive and topo.kind not in (TopologyKind.PATH, TopologyKind.TREE):
        raise CapabilityError("aggressive planning is only available for trees")

    cycle = set(topo.cycle or ())
    leaves = [n for n in g.nodes if g.degree(n) == 1]

    if topo.kind is TopologyKind.PATH:
        if reference is not None and reference not in leaves:
            raise InputError(
                f"reference {reference} must be an end site of the path"
            )
        ref = reference if reference is not None else min(leaves)
        access = {ref}
    elif topo.kind is TopologyKind.TREE:
        if reference is not None and reference not in leaves:
            raise InputError(f"reference {reference} must be a leaf site")
        ref = reference if reference is not None else min(leaves)
        access = set(leaves)
    else:
        measured_cycle = {n for n in cycle if g.degree(n) == 2}
        access = set(leaves) | measured_cycle
        default = min(leaves) if leaves else min(cycle)
        ref = reference if reference is not None else default
        if ref not in access:
            raise InputError(
                f"reference {ref} must be an accessed site (one of {sorted(access)})"
            )

    resolved: set[Edge] = set()
    if ref in cycle:
        path = [ref]
    else:
        path = _walk_segment(g, ref, resolved, cycle)
    jstar = path[-1]

    spine: list[int] = []
    if aggressive and topo.kind is TopologyKind.TREE:
        spine = _spine_path(g, jstar, path[-2])
        access.discard(spine[-1])
    spine_set = set(spine)

    anchors = set(path) | cycle | spine_set
    consumed = set(path[:-1])
    schedule: list[BranchPeel] = []
    pending = sorted(n for n in access if n != ref and g.degree(n) == 1)
    measured = True
    while pending:
        for head in pending:
            seg = _walk_segment(g, head, resolved, anchors)
            schedule.append(
                BranchPeel(head, tuple(seg[:-1]), seg[-1], measured)
            )
            consumed.update(seg[:-1])
        measured = False
        pending = sorted(
            n
            for n in g.nodes
            if g.degree(n) >= 3
            and n not in consumed
            and n not in cycle
            and n not in spine_set
            and (topo.kind is TopologyKind.UNICYCLIC or n not in set(path))
            and sum(edge_key(n, u) not in resolved for u in g.adjacency[n]) == 1
        )

    for a, b in zip(spine, spine[1:]):
        resolved.add(edge_key(a, b))
    i = 0
    while i < len(spine) - 1:
        j = i + 1
        while j < len(spine) - 1 and g.degree(spine[j]) < 3:
            j += 1
        schedule.append(BranchPeel(spine[i], tuple(spine[i:j]), spine[j], False))
        consumed.update(spine[i:j])
        i = j

    cycle_plan = None
    if cycle:
        measured_cycle = tuple(sorted(n for n in cycle if g.degree(n) == 2))
        attach = tuple(sorted(n for n in cycle if g.degree(n) >= 3))
        cycle_plan = CyclePlan(tuple(topo.cycle), measured_cycle, attach)

    plan = AccessPlan(
        reference=ref,
        access_set=tuple(sorted(access)),
        reference_path=tuple(path),
        peel_schedule=tuple(schedule),
        cycle_plan=cycle_plan,
        aggressive=aggressive,
    )
    plan.validate(g)
    return plan
