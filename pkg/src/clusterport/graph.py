"""Cluster topologies with input/body/output roles.

Sites are 0-based.  Layouts that are usually drawn with 1-based labels
put label ``k`` at index ``k - 1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

from clusterport.errors import GraphError
from clusterport.pauli import PauliWord

__all__ = [
    "Role",
    "ClusterGraph",
    "teleport_unit",
    "fig2a",
    "chain",
    "parallel_stack",
    "grid",
    "carve_path",
    "grid_site",
    "neighbors",
    "correlation_operator",
    "dumps",
    "loads",
]


@dataclass(frozen=True)
class Role:
    """``kind`` is ``"input"``, ``"body"`` or ``"output"``; ``wire`` for I/O."""

    kind: str
    wire: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("input", "body", "output"):
            raise GraphError(f"unknown role {self.kind!r}")
        if (self.kind == "body") != (self.wire is None):
            raise GraphError(f"role {self.kind!r} with wire {self.wire!r}")

    def __str__(self) -> str:
        return "body" if self.kind == "body" else f"{self.kind}:{self.wire}"

    @classmethod
    def parse(cls, text: str) -> Role:
        kind, _, wire = text.partition(":")
        return cls(kind, int(wire) if wire else None)


BODY = Role("body")


def _edge(a: int, b: int) -> tuple[int, int]:
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True)
class ClusterGraph:
    """Undirected graph of sites with roles.

    ``to_delete`` lists body sites a protocol removes by Z measurement before
    teleporting (their edges stay, since the full cluster is built first).
    ``deleted`` lists sites already removed; they keep their index but have
    no edges.
    """

    roles: tuple[Role, ...]
    edges: frozenset[tuple[int, int]]
    to_delete: frozenset[int] = field(default_factory=frozenset)
    deleted: frozenset[int] = field(default_factory=frozenset)
    name: str = "custom"

    def __post_init__(self) -> None:
        n = len(self.roles)
        edges = frozenset(_edge(a, b) for a, b in self.edges)
        for a, b in edges:
            if a == b:
                raise GraphError(f"self-loop on site {a}")
            if not (0 <= a < n and 0 <= b < n):
                raise GraphError(f"edge {(a, b)} references a site outside 0..{n - 1}")
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "deleted", frozenset(self.deleted))
        object.__setattr__(self, "to_delete", frozenset(self.to_delete))
        if self.deleted & self.to_delete:
            raise GraphError("a site cannot be both deleted and pending deletion")
        for s in self.deleted | self.to_delete:
            if not 0 <= s < n:
                raise GraphError(f"deleted site {s} out of range")
            if self.roles[s].kind != "body":
                raise GraphError(f"only body sites can be deleted, site {s} is {self.roles[s]}")
        for a, b in edges:
            if a in self.deleted or b in self.deleted:
                raise GraphError(f"edge {(a, b)} touches a deleted site")
        ins = sorted(r.wire for r in self.roles if r.kind == "input")
        outs = sorted(r.wire for r in self.roles if r.kind == "output")
        if ins != outs or ins != list(range(len(ins))):
            raise GraphError(f"inputs {ins} and outputs {outs} must both be wires 0..N-1 exactly once")

    @property
    def site_count(self) -> int:
        return len(self.roles)

    @property
    def wires(self) -> int:
        return sum(r.kind == "input" for r in self.roles)

    @property
    def active_sites(self) -> list[int]:
        """Sites neither deleted nor pending deletion."""
        gone = self.deleted | self.to_delete
        return [s for s in range(self.site_count) if s not in gone]

    def _sites_of(self, kind: str) -> list[int]:
        sites = [s for s, r in enumerate(self.roles) if r.kind == kind]
        if kind != "body":
            sites.sort(key=lambda s: self.roles[s].wire)
        return sites

    @property
    def input_sites(self) -> list[int]:
        """Input sites ordered by wire."""
        return self._sites_of("input")

    @property
    def output_sites(self) -> list[int]:
        """Output sites ordered by wire."""
        return self._sites_of("output")

    @property
    def body_sites(self) -> list[int]:
        gone = self.deleted | self.to_delete
        return [s for s in self._sites_of("body") if s not in gone]

    @property
    def measured_sites(self) -> list[int]:
        """Active non-output sites, i.e. those measured in the X basis."""
        return sorted(self.input_sites + self.body_sites)

    def neighbors(self, a: int) -> set[int]:
        self._check(a)
        return {b if a == x else x for x, b in self.edges if a in (x, b)}

    def _check(self, a: int) -> None:
        if not 0 <= a < self.site_count:
            raise GraphError(f"site {a} out of range for {self.site_count}-site graph")

    def without_site(self, a: int) -> ClusterGraph:
        """Drop every edge at ``a`` and mark it deleted; indices are kept."""
        self._check(a)
        if self.roles[a].kind != "body":
            raise GraphError(f"cannot delete {self.roles[a]} site {a}")
        if a in self.deleted:
            raise GraphError(f"site {a} already deleted")
        return replace(
            self,
            edges=frozenset(e for e in self.edges if a not in e),
            to_delete=self.to_delete - {a},
            deleted=self.deleted | {a},
        )

    def compact(self) -> tuple[ClusterGraph, dict[int, int]]:
        """Subgraph on active sites, relabeled ``0..k-1`` in increasing order."""
        keep = self.active_sites
        relabel = {s: i for i, s in enumerate(keep)}
        edges = frozenset(
            (relabel[a], relabel[b]) for a, b in self.edges if a in relabel and b in relabel
        )
        roles = tuple(self.roles[s] for s in keep)
        return ClusterGraph(roles, edges, name=self.name), relabel

    def is_connected(self) -> bool:
        active = self.active_sites
        if not active:
            return True
        active_set = set(active)
        seen, stack = {active[0]}, [active[0]]
        while stack:
            a = stack.pop()
            for b in self.neighbors(a):
                if b in active_set and b not in seen:
                    seen.add(b)
                    stack.append(b)
        return seen == active_set

    def wire_paths(self) -> list[list[int]] | None:
        """Per-wire site sequences when the active graph is disjoint input-to-output paths."""
        active = set(self.active_sites)
        adj = {a: self.neighbors(a) & active for a in active}
        paths = []
        for start in self.input_sites:
            if len(adj[start]) != 1:
                return None
            path, prev, cur = [start], None, start
            while cur == start or self.roles[cur].kind == "body":
                nxt = adj[cur] - {prev}
                if len(nxt) != 1 or (cur != start and len(adj[cur]) != 2):
                    return None
                prev, cur = cur, nxt.pop()
                path.append(cur)
            end = self.roles[cur]
            if len(adj[cur]) != 1 or end.kind != "output" or end.wire != self.roles[start].wire:
                return None
            paths.append(path)
        if set().union(*paths) != active:
            return None
        return paths


def teleport_unit() -> ClusterGraph:
    """Three-site chain input - body - output."""
    return chain(3)


def fig2a() -> ClusterGraph:
    """Six-site, two-wire cluster; inputs 0,1  body 2,3  outputs 4,5.

    Edges follow the neighbor sets of the defining correlation equations:
    (1-3, 1-4, 2-4, 3-5, 4-5, 4-6) in 1-based labels.
    """
    roles = (
        Role("input", 0),
        Role("input", 1),
        BODY,
        BODY,
        Role("output", 0),
        Role("output", 1),
    )
    edges = frozenset({(0, 2), (0, 3), (1, 3), (2, 4), (3, 4), (3, 5)})
    return ClusterGraph(roles, edges, name="fig2a")


def chain(m: int) -> ClusterGraph:
    if m < 3 or m % 2 == 0:
        raise GraphError(f"chain length must be odd and >= 3, got {m}")
    roles = (Role("input", 0),) + (BODY,) * (m - 2) + (Role("output", 0),)
    return ClusterGraph(roles, frozenset((i, i + 1) for i in range(m - 1)), name=f"chain{m}")


def parallel_stack(wires: int) -> ClusterGraph:
    """``wires`` disjoint 3-chains; wire ``i`` occupies sites ``3i, 3i+1, 3i+2``."""
    if wires < 1:
        raise GraphError(f"need at least one wire, got {wires}")
    roles: list[Role] = []
    edges = set()
    for w in range(wires):
        base = 3 * w
        roles += [Role("input", w), BODY, Role("output", w)]
        edges |= {(base, base + 1), (base + 1, base + 2)}
    return ClusterGraph(tuple(roles), frozenset(edges), name=f"stack{wires}")


def grid(rows: int, cols: int) -> ClusterGraph:
    """Nearest-neighbor lattice with body roles only; ``(r, c)`` is ``r*cols + c``."""
    if rows < 1 or cols < 1:
        raise GraphError(f"grid dimensions must be positive, got {rows}x{cols}")
    edges = set()
    for r in range(rows):
        for c in range(cols):
            a = r * cols + c
            if c + 1 < cols:
                edges.add((a, a + 1))
            if r + 1 < rows:
                edges.add((a, a + cols))
    return ClusterGraph((BODY,) * (rows * cols), frozenset(edges), name=f"grid{rows}x{cols}")


def carve_path(lattice: ClusterGraph, path: Sequence[int]) -> ClusterGraph:
    """Assign a one-wire path through ``lattice``; every other site is marked deleted.

    The path must be an induced path so that removing the rest leaves a chain.
    """
    path = list(path)
    if len(path) < 3 or len(path) % 2 == 0:
        raise GraphError(f"carved path must have odd length >= 3, got {len(path)}")
    if len(set(path)) != len(path):
        raise GraphError("carved path repeats a site")
    pos = {s: i for i, s in enumerate(path)}
    for a, b in lattice.edges:
        if a in pos and b in pos and abs(pos[a] - pos[b]) != 1:
            raise GraphError(f"path is not induced: extra edge {(a, b)}")
    for x, y in zip(path, path[1:]):
        if _edge(x, y) not in lattice.edges:
            raise GraphError(f"path step {(x, y)} is not a lattice edge")
    if lattice.wires or lattice.deleted or lattice.to_delete:
        raise GraphError("carving expects a role-free lattice")
    roles = [BODY] * lattice.site_count
    roles[path[0]] = Role("input", 0)
    roles[path[-1]] = Role("output", 0)
    deleted = frozenset(range(lattice.site_count)) - set(path)
    return ClusterGraph(tuple(roles), lattice.edges, to_delete=deleted, name=f"{lattice.name}-carved")


def neighbors(g: ClusterGraph, a: int) -> set[int]:
    return g.neighbors(a)


def correlation_operator(g: ClusterGraph, a: int, d: int) -> PauliWord:
    """``X_a^dag`` times ``Z_b`` on every neighbor ``b`` of ``a``."""
    terms = {a: (0, -1)}
    for b in g.neighbors(a):
        terms[b] = (1, 0)
    return PauliWord(d, terms)


def dumps(g: ClusterGraph) -> str:
    """Line format: ``site <id> <role>`` then ``edge <a> <b>``.

    Sites pending deletion use the role ``body!``; already-deleted sites
    use ``body-``.
    """
    lines = []
    for s, r in enumerate(g.roles):
        tag = str(r) + ("!" if s in g.to_delete else "-" if s in g.deleted else "")
        lines.append(f"site {s} {tag}")
    for a, b in sorted(g.edges):
        lines.append(f"edge {a} {b}")
    return "\n".join(lines) + "\n"


def loads(text: str, name: str = "file") -> ClusterGraph:
    roles: dict[int, Role] = {}
    pending, deleted = set(), set()
    edges = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0] == "site" and len(parts) == 3:
                sid, tag = int(parts[1]), parts[2]
                if tag.endswith("!"):
                    pending.add(sid)
                    tag = tag[:-1]
                elif tag.endswith("-"):
                    deleted.add(sid)
                    tag = tag[:-1]
                if sid in roles:
                    raise GraphError(f"duplicate site {sid}")
                roles[sid] = Role.parse(tag)
            elif parts[0] == "edge" and len(parts) == 3:
                edges.add(_edge(int(parts[1]), int(parts[2])))
            else:
                raise GraphError(f"unrecognized record {line!r}")
        except (ValueError, GraphError) as exc:
            raise GraphError(f"line {lineno}: {exc}") from exc
    if sorted(roles) != list(range(len(roles))):
        raise GraphError("site ids must be 0..n-1")
    return ClusterGraph(
        tuple(roles[i] for i in range(len(roles))),
        frozenset(edges),
        to_delete=frozenset(pending),
        deleted=frozenset(deleted),
        name=name,
    )


def grid_site(cols: int, r: int, c: int) -> int:
    return r * cols + c
