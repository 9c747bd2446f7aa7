"""Semantics-preserving graph (SPG) construction from a label sequence.

Every label becomes one node, indexed by its position in the
linearization.  Roles turn into nodes sitting between their source and
target concept, each segment's ``<stop>`` hangs off its head, and nodes
sharing a pointer end up with identical in- and out-neighbourhoods.
Co-referring nodes are kept as separate nodes, so the node count always
equals the number of labels.

The five stages are exposed individually::

    subs = to_subgraphs(seq)
    edges = set()
    for sub in subs:
        edges |= add_stop_nodes(sub, role_expand(sub))
    spg = merge_pointers(Spg(len(seq), labels, edges, groups))

:func:`transform` runs them in order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DanglingPointer, MalformedSegment
from .linearize import LabelKind, LabelSequence


@dataclass(frozen=True)
class Subgraph:
    head: int
    role_edges: tuple[tuple[int, int], ...]
    stop_index: int


@dataclass(frozen=True)
class Spg:
    n: int
    node_labels: tuple[str, ...]
    edges: tuple[tuple[int, int], ...]
    pointer_groups: dict[int, tuple[int, ...]]

    def __post_init__(self):
        object.__setattr__(self, "node_labels", tuple(self.node_labels))
        object.__setattr__(self, "edges", tuple(sorted(set(map(tuple, self.edges)))))
        object.__setattr__(
            self, "pointer_groups", {int(p): tuple(sorted(m)) for p, m in sorted(self.pointer_groups.items())}
        )
        if len(self.node_labels) != self.n:
            raise ValueError("node_labels length must equal n")
        for u, v in self.edges:
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError(f"edge ({u}, {v}) out of range")

    @property
    def coreferent_groups(self) -> dict[int, tuple[int, ...]]:
        """Pointer groups with more than one member."""
        return {p: m for p, m in self.pointer_groups.items() if len(m) > 1}

    @cached_property
    def adjacency(self) -> np.ndarray:
        A = np.zeros((self.n, self.n), dtype=np.int64)
        if self.edges:
            src, dst = np.array(self.edges).T
            A[src, dst] = 1
        return A

    def in_edges(self, v: int) -> set[tuple[int, int]]:
        return {e for e in self.edges if e[1] == v}

    def out_edges(self, u: int) -> set[tuple[int, int]]:
        return {e for e in self.edges if e[0] == u}

    def to_json(self) -> str:
        payload = {
            "n": self.n,
            "labels": list(self.node_labels),
            "edges": [list(e) for e in self.edges],
            "pointer_groups": {str(p): list(m) for p, m in self.pointer_groups.items()},
        }
        return json.dumps(payload, sort_keys=True, ensure_ascii=False)

    @classmethod
    def from_json(cls, text: str) -> "Spg":
        data = json.loads(text)
        groups = {int(p): tuple(m) for p, m in data["pointer_groups"].items()}
        return cls(data["n"], data["labels"], [tuple(e) for e in data["edges"]], groups)

    def to_dot(self, name: str = "spg") -> str:
        lines = [f"digraph {_dot_id(name)} {{"]
        for i, label in enumerate(self.node_labels):
            lines.append(f'  {i} [label="{i}: {_dot_escape(label)}"];')
        for u, v in self.edges:
            lines.append(f"  {u} -> {v};")
        lines.append("}")
        return "\n".join(lines) + "\n"


def _dot_escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def _dot_id(name: str) -> str:
    return '"' + _dot_escape(name) + '"'


def to_subgraphs(seq: LabelSequence) -> list[Subgraph]:
    """Split the sequence at every ``<stop>`` into head/role/target segments."""
    subs: list[Subgraph] = []
    pointer_kinds = (LabelKind.CONCEPT, LabelKind.POINTER)
    labels = seq.labels
    start = 0
    for stop, label in enumerate(labels):
        if label.kind is not LabelKind.STOP:
            continue
        if stop == start or labels[start].kind not in pointer_kinds:
            raise MalformedSegment(f"segment ending at {stop} has no head concept")
        body = list(range(start + 1, stop))
        if len(body) % 2:
            raise MalformedSegment(f"segment ending at {stop} has a role without a target")
        pairs = []
        for r, t in zip(body[::2], body[1::2]):
            if labels[r].kind is not LabelKind.ROLE or labels[t].kind not in pointer_kinds:
                raise MalformedSegment(f"expected (role, target) at positions {r}, {t}")
            pairs.append((r, t))
        subs.append(Subgraph(start, tuple(pairs), stop))
        start = stop + 1
    if start != len(labels):
        raise MalformedSegment("labels after the last <stop>")
    return subs


def role_expand(sub: Subgraph) -> set[tuple[int, int]]:
    edges = set()
    for role, target in sub.role_edges:
        edges.add((sub.head, role))
        edges.add((role, target))
    return edges


def add_stop_nodes(sub: Subgraph, edges: set[tuple[int, int]]) -> set[tuple[int, int]]:
    return set(edges) | {(sub.head, sub.stop_index)}


def pointer_groups(seq: LabelSequence) -> dict[int, tuple[int, ...]]:
    groups: dict[int, list[int]] = {}
    defined = set()
    for i, label in enumerate(seq.labels):
        if label.pointer is None:
            continue
        if label.kind is LabelKind.CONCEPT:
            defined.add(label.pointer)
        groups.setdefault(label.pointer, []).append(i)
    missing = sorted(set(groups) - defined)
    if missing:
        raise DanglingPointer(f"pointers used but never defined: {['<P%d>' % p for p in missing]}")
    return {p: tuple(m) for p, m in groups.items()}


def merge_pointers(spg: Spg) -> Spg:
    """Give every member of a pointer group the union of the group's edges.

    Members are duplicated with shared connectivity rather than collapsed.
    """
    group_of: dict[int, tuple[int, ...]] = {}
    for members in spg.pointer_groups.values():
        for m in members:
            group_of[m] = members
    merged = set()
    for u, v in spg.edges:
        for a in group_of.get(u, (u,)):
            for b in group_of.get(v, (v,)):
                merged.add((a, b))
    return Spg(spg.n, spg.node_labels, merged, spg.pointer_groups)


def transform(seq: LabelSequence) -> Spg:
    """Build the SPG of a label sequence (segment, expand, stop, order, merge)."""
    groups = pointer_groups(seq)
    edges: set[tuple[int, int]] = set()
    for sub in to_subgraphs(seq):
        edges |= add_stop_nodes(sub, role_expand(sub))
    # node index i is label i, so the ordering step is the identity on indices
    order = seq.alignment if seq.alignment is not None else tuple(range(len(seq)))
    edges = {(order[u], order[v]) for u, v in edges}
    labels = [None] * len(seq)
    for i, label in enumerate(seq.labels):
        labels[order[i]] = label.text
    groups = {p: tuple(order[i] for i in m) for p, m in groups.items()}
    return merge_pointers(Spg(len(seq), labels, edges, groups))
