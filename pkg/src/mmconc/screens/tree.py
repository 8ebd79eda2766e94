"""Metric trees with edges as real intervals.

A point is stored canonically as ``TreePoint(v, h)``: the point at distance ``h``
above vertex ``v`` on the edge towards its parent, with ``0 <= h < len(edge)``.
The root only carries ``h == 0``.
"""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from typing import Hashable, Iterable, Sequence

import numpy as np

from ..errors import BadTree, InvalidTreePoint

OFFSET_TOL = 1e-12


@dataclass(frozen=True, order=True)
class TreePoint:
    v: int
    h: float = 0.0


class MetricTree:
    kind = "tree"

    def __init__(self, vertices: Sequence[Hashable], edges: Iterable[Sequence], source: str | None = None):
        self.vertices = list(vertices)
        self.index = {v: i for i, v in enumerate(self.vertices)}
        if len(self.index) != len(self.vertices):
            raise BadTree("duplicate vertex ids")
        self.edges = []
        V = len(self.vertices)
        if V == 0:
            raise BadTree("tree has no vertices")
        adj: list[list[tuple[int, float, int]]] = [[] for _ in range(V)]
        for e, (u, v, length) in enumerate(edges):
            if u not in self.index or v not in self.index:
                raise BadTree(f"edge {e} references unknown vertex")
            length = float(length)
            if not length > 0 or not np.isfinite(length):
                raise BadTree(f"edge {e} has non-positive length {length}")
            iu, iv = self.index[u], self.index[v]
            self.edges.append((iu, iv, length))
            adj[iu].append((iv, length, e))
            adj[iv].append((iu, length, e))
        if len(self.edges) != V - 1:
            raise BadTree(f"{V} vertices need {V - 1} edges, got {len(self.edges)}")
        self.adj = adj
        self.source = source

        parent = np.full(V, -1)
        up_len = np.zeros(V)
        depth = np.zeros(V)
        level = np.zeros(V, dtype=int)
        parent_edge = np.full(V, -1)
        order = []
        seen = np.zeros(V, dtype=bool)
        seen[0] = True
        queue = deque([0])
        while queue:
            u = queue.popleft()
            order.append(u)
            for w, length, e in adj[u]:
                if not seen[w]:
                    seen[w] = True
                    parent[w] = u
                    up_len[w] = length
                    depth[w] = depth[u] + length
                    level[w] = level[u] + 1
                    parent_edge[w] = e
                    queue.append(w)
        if not seen.all():
            raise BadTree("tree is not connected")
        self.parent, self.up_len, self.depth, self.level = parent, up_len, depth, level
        self.parent_edge = parent_edge
        self.order = order

        # Euler tour entry/exit times for subtree tests
        self.tin = np.zeros(V, dtype=int)
        self.tout = np.zeros(V, dtype=int)
        children: list[list[int]] = [[] for _ in range(V)]
        for v in order[1:]:
            children[parent[v]].append(v)
        self.children = children
        t = 0
        stack = [(0, False)]
        while stack:
            v, done = stack.pop()
            if done:
                self.tout[v] = t
                continue
            self.tin[v] = t
            t += 1
            stack.append((v, True))
            for c in reversed(children[v]):
                stack.append((c, False))

        # binary lifting table; root is its own ancestor
        LOG = max(1, int(np.ceil(np.log2(max(V, 2)))) + 1)
        anc = np.zeros((LOG, V), dtype=int)
        anc[0] = np.where(parent >= 0, parent, np.arange(V))
        for k in range(1, LOG):
            anc[k] = anc[k - 1][anc[k - 1]]
        self.anc = anc

    # construction helpers -------------------------------------------------
    @classmethod
    def from_json(cls, data: dict | str, source: str | None = None) -> "MetricTree":
        if isinstance(data, str):
            with open(data) as fh:
                source = data
                data = json.load(fh)
        try:
            return cls(data["vertices"], data["edges"], source=source)
        except KeyError as exc:
            raise BadTree(f"tree file missing key {exc}") from None

    def to_json(self) -> dict:
        return {
            "vertices": self.vertices,
            "edges": [[self.vertices[u], self.vertices[v], L] for u, v, L in self.edges],
        }

    @property
    def spec(self) -> str:
        return f"tree:{self.source}" if self.source else f"tree:<{len(self.vertices)} vertices>"

    def __repr__(self) -> str:
        return f"MetricTree(V={len(self.vertices)})"

    # points ---------------------------------------------------------------
    def vertex(self, vid) -> TreePoint:
        return TreePoint(self.index[vid], 0.0)

    def edge_point(self, edge: int, offset: float) -> TreePoint:
        """Point at ``offset`` from the first listed endpoint of edge ``edge``."""
        if not 0 <= edge < len(self.edges):
            raise InvalidTreePoint(f"no edge {edge}")
        u, v, L = self.edges[edge]
        if offset < -OFFSET_TOL or offset > L + OFFSET_TOL or not np.isfinite(offset):
            raise InvalidTreePoint(f"offset {offset} outside [0, {L}]")
        offset = min(max(offset, 0.0), L)
        if self.parent[v] == u:
            return self.canonical(v, L - offset)
        return self.canonical(u, offset)

    def canonical(self, v: int, h: float) -> TreePoint:
        if h < -OFFSET_TOL:
            raise InvalidTreePoint(f"negative height {h}")
        h = max(h, 0.0)
        while self.parent[v] >= 0 and h >= self.up_len[v] - OFFSET_TOL * max(1.0, self.up_len[v]):
            h = max(h - self.up_len[v], 0.0)
            v = int(self.parent[v])
        if self.parent[v] < 0:
            h = 0.0
        return TreePoint(int(v), float(h))

    def validate(self, p: TreePoint) -> TreePoint:
        if not isinstance(p, TreePoint) or not 0 <= p.v < len(self.vertices):
            raise InvalidTreePoint(f"{p!r} is not a point of this tree")
        if p.h < 0 or (self.parent[p.v] >= 0 and p.h > self.up_len[p.v]) or (self.parent[p.v] < 0 and p.h != 0):
            raise InvalidTreePoint(f"{p!r} has height outside its edge")
        return p

    def as_points(self, pts) -> list[TreePoint]:
        out = []
        for p in pts:
            if isinstance(p, TreePoint):
                out.append(self.canonical(*self.validate(p).__dict__.values()))
            elif isinstance(p, (tuple, list)) and len(p) == 2 and isinstance(p[0], int) and not isinstance(p[1], int):
                out.append(self.edge_point(p[0], float(p[1])))
            else:
                if p not in self.index:
                    raise InvalidTreePoint(f"unknown vertex {p!r}")
                out.append(self.vertex(p))
        return out

    def take(self, pts, idx) -> list[TreePoint]:
        return [pts[int(i)] for i in idx]

    def point_depth(self, p: TreePoint) -> float:
        return float(self.depth[p.v] - p.h)

    # queries --------------------------------------------------------------
    def is_ancestor(self, a: int, b: int) -> bool:
        """a is an ancestor of b (or equal)."""
        return self.tin[a] <= self.tin[b] < self.tout[a] or a == b

    def lca(self, a: int, b: int) -> int:
        if self.is_ancestor(a, b):
            return a
        if self.is_ancestor(b, a):
            return b
        for k in range(len(self.anc) - 1, -1, -1):
            c = self.anc[k][a]
            if not self.is_ancestor(c, b):
                a = c
        return int(self.parent[a])

    def _meet_depth(self, p: TreePoint, q: TreePoint) -> float:
        """Depth of the highest point on the path between p and q."""
        if p.v == q.v:
            return min(self.point_depth(p), self.point_depth(q))
        if self.is_ancestor(p.v, q.v):
            return self.point_depth(p)
        if self.is_ancestor(q.v, p.v):
            return self.point_depth(q)
        return float(self.depth[self.lca(p.v, q.v)])

    def distance(self, p: TreePoint, q: TreePoint) -> float:
        dp, dq = self.point_depth(p), self.point_depth(q)
        return dp + dq - 2.0 * self._meet_depth(p, q)

    def distances_from(self, p: TreePoint, pts) -> np.ndarray:
        return np.array([self.distance(p, q) for q in pts])

    def pairwise(self, pts) -> np.ndarray:
        k = len(pts)
        D = np.zeros((k, k))
        for i in range(k):
            for j in range(i + 1, k):
                D[i, j] = D[j, i] = self.distance(pts[i], pts[j])
        return D

    def ascend(self, p: TreePoint, s: float) -> TreePoint:
        """Point reached by moving up from p by s (stops at the root)."""
        target = self.point_depth(p) - s
        if target <= 0:
            return TreePoint(0, 0.0)
        v = p.v
        if p.h + s < self.up_len[v]:
            return self.canonical(v, p.h + s)
        for k in range(len(self.anc) - 1, -1, -1):
            a = self.anc[k][v]
            if self.depth[a] >= target:
                v = a
        # v is now the highest ancestor with depth >= target
        return self.canonical(int(v), float(self.depth[v] - target))

    def interpolate(self, p: TreePoint, q: TreePoint, t: float) -> TreePoint:
        """Point at fraction t of the geodesic from p to q."""
        if t <= 0:
            return p
        if t >= 1:
            return q
        meet = self._meet_depth(p, q)
        up_p = self.point_depth(p) - meet
        up_q = self.point_depth(q) - meet
        s = t * (up_p + up_q)
        if s <= up_p:
            return self.ascend(p, s)
        return self.ascend(q, up_p + up_q - s)

    geodesic = interpolate

    def path_vertices(self, a: int, b: int) -> list[int]:
        c = self.lca(a, b)
        left, right = [], []
        while a != c:
            left.append(a)
            a = int(self.parent[a])
        while b != c:
            right.append(b)
            b = int(self.parent[b])
        return left + [c] + right[::-1]

    def leaves(self) -> list[int]:
        return [v for v in range(len(self.vertices)) if len(self.adj[v]) <= 1]

    def diameter_path(self) -> tuple[int, int, float]:
        """Endpoints and length of a longest vertex-to-vertex path."""
        a = int(np.argmax(self.depth))
        da = np.array([self.distance(TreePoint(a), TreePoint(v)) for v in range(len(self.vertices))])
        b = int(np.argmax(da))
        return a, b, float(da[b])

    def in_subtree(self, c: int, p: TreePoint) -> bool:
        """p lies in the closed subtree hanging below vertex c (c itself included)."""
        return self.is_ancestor(c, p.v) and not (p.v == c and p.h > 0)

    def subdivide(self, pts: Sequence[TreePoint]):
        """Insert the given points as vertices.

        Returns ``(tree, vertex_of_point, original_point_of_vertex)`` where the
        last entry maps each vertex of the new tree back to a point of ``self``.
        """
        cuts: dict[int, set[float]] = {}
        for p in pts:
            if p.h > 0:
                cuts.setdefault(p.v, set()).add(p.h)
        names = list(range(len(self.vertices)))
        back = [TreePoint(v, 0.0) for v in range(len(self.vertices))]
        lookup = {(v, 0.0): v for v in range(len(self.vertices))}
        edges = []
        for v in range(len(self.vertices)):
            if self.parent[v] < 0:
                continue
            chain = [v]
            for h in sorted(cuts.get(v, ())):
                nid = len(names)
                names.append(nid)
                back.append(TreePoint(v, h))
                lookup[(v, h)] = nid
                chain.append(nid)
            chain.append(int(self.parent[v]))
            heights = [0.0] + sorted(cuts.get(v, ())) + [self.up_len[v]]
            for i in range(len(chain) - 1):
                edges.append((chain[i], chain[i + 1], heights[i + 1] - heights[i]))
        sub = MetricTree(names, edges)
        where = [sub.index[lookup[(p.v, p.h)]] for p in pts]
        back_by_index = [back[name] for name in sub.vertices]
        return sub, where, back_by_index

    def vertex_distance_matrix(self) -> np.ndarray:
        """All-pairs distances between vertices, one traversal per source."""
        V = len(self.vertices)
        out = np.zeros((V, V))
        for s in range(V):
            row = out[s]
            seen = np.zeros(V, dtype=bool)
            seen[s] = True
            stack = [s]
            while stack:
                u = stack.pop()
                for v, length, _ in self.adj[u]:
                    if not seen[v]:
                        seen[v] = True
                        row[v] = row[u] + length
                        stack.append(v)
        return out
