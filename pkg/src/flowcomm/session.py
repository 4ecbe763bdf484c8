"""Stateful exploration: community tree with split / merge / collapse.

A session owns an immutable dataset plus its neighborhood graphs and a tree
of community nodes whose leaves always partition the element universe.  All
mutating commands go through an append-only log so a session can be replayed
bit for bit.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field

import numpy as np

from .community import LouvainConfig, Partition, detect, louvain
from .errors import (InvalidConfig, InvalidNode, LevelMismatch, NotALeaf,
                     NotInternal, NotSiblings)
from .graph import Csng, build_csng, subgraph, symmetrize
from .metrics import CommunityStats, community_stats
from .model import StreamlineSet
from .neighbors import NeighborQueryConfig


@dataclass
class CommunityNode:
    node_id: int
    parent: int | None
    members: np.ndarray           # universe element ids, sorted
    origin: str                   # detected | split_child | merged
    children: list[int] = field(default_factory=list)

    @property
    def expanded(self) -> bool:
        return bool(self.children)


@dataclass
class CommunityGraphSummary:
    nodes: list[dict]
    edges: list[dict]


class Session:
    """Single-writer exploration state over one dataset."""

    def __init__(self, session_id: str, dataset: StreamlineSet,
                 csngs: dict[str, Csng], root_partition: Partition,
                 neighbor_config: NeighborQueryConfig,
                 detection_config: LouvainConfig):
        self.id = session_id
        self.dataset = dataset
        self.csngs = csngs
        self.neighbor_config = neighbor_config
        self.detection_config = detection_config
        self.level = root_partition.level       # universe granularity
        self.root_partition = root_partition
        self.nodes: dict[int, CommunityNode] = {}
        self.roots: list[int] = []
        self.history: list[dict] = []
        self._next_id = 0
        self._lock = threading.Lock()
        for c in range(root_partition.n_communities):
            members = np.nonzero(root_partition.assignment == c)[0]
            nid = self._alloc()
            self.nodes[nid] = CommunityNode(nid, None, members, "detected")
            self.roots.append(nid)

    def _alloc(self) -> int:
        nid = self._next_id
        self._next_id += 1
        return nid

    @property
    def universe_graph(self) -> Csng:
        g = self.csngs.get(self.level)
        if g is None:
            raise LevelMismatch(f"no CSNG at session level {self.level!r}")
        return symmetrize(g)

    def _node(self, node_id: int) -> CommunityNode:
        node = self.nodes.get(int(node_id))
        if node is None:
            raise InvalidNode(f"unknown node {node_id}")
        return node

    def leaves(self) -> list[CommunityNode]:
        out = []

        def walk(nid):
            node = self.nodes[nid]
            if node.children:
                for c in node.children:
                    walk(c)
            else:
                out.append(node)

        for r in self.roots:
            walk(r)
        return out

    # ----- commands ---------------------------------------------------

    def split(self, node_id: int, config: LouvainConfig | None = None,
              level: str | None = None, _record: bool = True) -> list[int]:
        """Re-detect communities inside a leaf; the leaf becomes internal.

        Splitting defaults to segment-level re-detection; when the universe
        is streamlines, sub-communities are mapped back by majority vote
        over each streamline's segments.
        """
        with self._lock:
            node = self._node(node_id)
            if node.children:
                raise NotALeaf(f"node {node_id} is not a leaf")
            config = config or self.detection_config
            level = level or "segment"
            groups = self._split_groups(node, config, level)
            if len(groups) <= 1:
                if _record:
                    self.history.append(self._split_cmd(node_id, config, level))
                return []
            child_ids = []
            for members in groups:
                cid = self._alloc()
                self.nodes[cid] = CommunityNode(cid, node.node_id, members, "split_child")
                node.children.append(cid)
                child_ids.append(cid)
            if _record:
                self.history.append(self._split_cmd(node_id, config, level))
            return child_ids

    def _split_cmd(self, node_id, config, level):
        return {"op": "split", "node": int(node_id), "level": level,
                "resolution": config.resolution, "seed": config.seed}

    def _split_groups(self, node: CommunityNode, config: LouvainConfig,
                      level: str) -> list[np.ndarray]:
        if len(node.members) < 2:
            return [node.members]
        if level == self.level:
            g = self.csngs.get(self.level)
            sub, ids = subgraph(symmetrize(g) if g.directed else g, node.members)
            if sub.total_weight() == 0.0:
                return [node.members]
            p = louvain(sub, config)
            return [ids[p.assignment == c] for c in range(p.n_communities)]
        if self.level == "streamline" and level == "segment":
            seg_csng = self.csngs.get("segment")
            if seg_csng is None:
                raise InvalidConfig("session has no segment-level CSNG to split with")
            member_set = set(node.members.tolist())
            seg_ids = np.nonzero(np.isin(self.dataset.seg_line, node.members))[0]
            sub, ids = subgraph(symmetrize(seg_csng), seg_ids)
            if sub.total_weight() == 0.0:
                return [node.members]
            p = louvain(sub, config)
            # majority vote per streamline; ties go to the smaller community id
            line_groups: dict[int, list[int]] = {}
            for line in sorted(member_set):
                segs = np.nonzero(self.dataset.seg_line[ids] == line)[0]
                counts = np.bincount(p.assignment[segs], minlength=p.n_communities)
                line_groups.setdefault(int(np.argmax(counts)), []).append(line)
            return [np.asarray(v, dtype=np.int64) for _, v in sorted(line_groups.items())]
        raise InvalidConfig(f"cannot split a {self.level} universe at {level} level")

    def merge(self, node_ids: list[int], _record: bool = True) -> int:
        """Replace >= 2 sibling leaves by one merged leaf."""
        with self._lock:
            ids = [int(i) for i in node_ids]
            if len(set(ids)) < 2:
                raise NotSiblings("merge needs at least 2 distinct nodes")
            nodes = [self._node(i) for i in ids]
            parent = nodes[0].parent
            if any(n.parent != parent for n in nodes):
                raise NotSiblings("nodes are not siblings")
            if any(n.children for n in nodes):
                raise NotALeaf("merge operands must be leaves")
            if _record:
                self.history.append({"op": "merge", "nodes": ids})
            sibling_list = self.roots if parent is None else self.nodes[parent].children
            if parent is not None and set(ids) == set(sibling_list):
                # merging every child is the same as collapsing the parent
                self._collapse_locked(parent)
                return parent
            members = np.unique(np.concatenate([n.members for n in nodes]))
            nid = self._alloc()
            self.nodes[nid] = CommunityNode(nid, parent, members, "merged")
            insert_at = min(sibling_list.index(i) for i in ids)
            for i in ids:
                sibling_list.remove(i)
                del self.nodes[i]
            sibling_list.insert(insert_at, nid)
            return nid

    def collapse(self, node_id: int, _record: bool = True) -> None:
        """Remove a node's children; it becomes a leaf with its original members."""
        with self._lock:
            self._collapse_locked(int(node_id))
            if _record:
                self.history.append({"op": "collapse", "node": int(node_id)})

    def _collapse_locked(self, node_id: int) -> None:
        node = self._node(node_id)
        if not node.children:
            raise NotInternal(f"node {node_id} is a leaf")

        def drop(nid):
            for c in self.nodes[nid].children:
                drop(c)
            del self.nodes[nid]

        for c in node.children:
            drop(c)
        node.children = []

    def apply_command(self, cmd: dict):
        """Apply one serialized command (used by the API and replay)."""
        op = cmd.get("op")
        if op == "split":
            config = LouvainConfig(resolution=cmd.get("resolution",
                                                      self.detection_config.resolution),
                                   seed=cmd.get("seed", self.detection_config.seed))
            return self.split(cmd["node"], config, cmd.get("level", "segment"))
        if op == "merge":
            return self.merge(cmd["nodes"])
        if op == "collapse":
            return self.collapse(cmd["node"])
        raise InvalidConfig(f"unknown command {op!r}")

    # ----- read views --------------------------------------------------

    def leaf_partition(self) -> tuple[Partition, list[CommunityNode]]:
        leaves = self.leaves()
        n = self.dataset.n_elements(self.level)
        assignment = np.full(n, -1, dtype=np.int32)
        for idx, leaf in enumerate(leaves):
            assignment[leaf.members] = idx
        return Partition(self.level, assignment, len(leaves), 0.0), leaves

    def summary_graph(self) -> CommunityGraphSummary:
        p, leaves = self.leaf_partition()
        g = self.universe_graph
        stats = community_stats(g, p)
        nodes = []
        for idx, leaf in enumerate(leaves):
            s: CommunityStats = stats[idx]
            parent = leaf.parent if leaf.parent in self.nodes else None
            nodes.append({
                "node_id": leaf.node_id,
                "size": int(s.size),
                "origin": leaf.origin,
                "parent_group": parent,
                "isolation": s.isolation,
                "internal_density": s.internal_density,
                "mean_neighbor_distance": s.mean_neighbor_distance,
            })
        src = np.repeat(np.arange(g.n_nodes), np.diff(g.indptr))
        dst = g.indices
        a, b = p.assignment[src], p.assignment[dst]
        cross = a != b
        lo = np.minimum(a[cross], b[cross])
        hi = np.maximum(a[cross], b[cross])
        pairs, counts = np.unique(np.stack((lo, hi), axis=1), axis=0, return_counts=True)
        edges = [{"a": leaves[int(x)].node_id, "b": leaves[int(y)].node_id,
                  "cross_edge_count": int(c) // 2}
                 for (x, y), c in zip(pairs, counts)]
        return CommunityGraphSummary(nodes, edges)

    def element_colors(self) -> np.ndarray:
        """Leaf node id per segment (streamline partitions broadcast down)."""
        p, leaves = self.leaf_partition()
        leaf_ids = np.asarray([l.node_id for l in leaves], dtype=np.int64)
        if self.level == "segment":
            return leaf_ids[p.assignment]
        if self.level == "streamline":
            return leaf_ids[p.assignment[self.dataset.seg_line]]
        raise LevelMismatch(f"colors unsupported for level {self.level!r}")

    def leaf_segment_members(self, node_id: int) -> np.ndarray:
        """Selected node's member set expressed as segment ids."""
        node = self._node(node_id)
        if self.level == "segment":
            return node.members
        if self.level == "streamline":
            return np.nonzero(np.isin(self.dataset.seg_line, node.members))[0]
        raise LevelMismatch(f"unsupported level {self.level!r}")

    # ----- persistence --------------------------------------------------

    def export_state(self) -> str:
        return json.dumps({
            "level": self.level,
            "neighbor_config": {
                "strategy": self.neighbor_config.strategy,
                "k": self.neighbor_config.k,
                "radius": self.neighbor_config.radius,
                "measure": self.neighbor_config.measure,
            },
            "detection_config": {
                "resolution": self.detection_config.resolution,
                "max_passes": self.detection_config.max_passes,
                "min_gain": self.detection_config.min_gain,
                "seed": self.detection_config.seed,
            },
            "commands": self.history,
        }, sort_keys=True)


def create_session(sset: StreamlineSet, neighbor_config: NeighborQueryConfig,
                   detection_config: LouvainConfig | None = None,
                   variant: str = "streamline",
                   levels: tuple[str, ...] = ("segment", "streamline"),
                   session_id: str = "session", threads: int | None = None) -> Session:
    """Build the requested CSNG levels, run detection, initialize the tree."""
    detection_config = detection_config or LouvainConfig()
    csngs = {lvl: build_csng(sset, lvl, neighbor_config, threads=threads)
             for lvl in levels}
    if variant == "streamline" and "streamline" in csngs:
        g = csngs["streamline"]
    elif "segment" in csngs:
        g = csngs["segment"]
    else:
        raise InvalidConfig("no CSNG level suitable for the requested variant")
    partition = detect(sset, g, variant, detection_config)
    return Session(session_id, sset, csngs, partition, neighbor_config, detection_config)


def replay_session(sset: StreamlineSet, state_json: str,
                   session_id: str = "replay", threads: int | None = None) -> Session:
    """Rebuild a session from an exported state transcript."""
    state = json.loads(state_json)
    nc = state["neighbor_config"]
    neighbor_config = NeighborQueryConfig(nc["strategy"], nc["k"], nc["radius"],
                                          nc["measure"])
    dc = state["detection_config"]
    detection_config = LouvainConfig(dc["resolution"], dc["max_passes"],
                                     dc["min_gain"], dc["seed"])
    session = create_session(sset, neighbor_config, detection_config,
                             variant=state["level"], session_id=session_id,
                             threads=threads)
    for cmd in state["commands"]:
        session.apply_command(cmd)
    return session
