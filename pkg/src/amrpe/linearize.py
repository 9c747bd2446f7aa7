"""Breadth-first linearization of AMR graphs with pointer and stop tokens.

A linearization is a flat list of :class:`Label` objects.  Pointers
``<Pn>`` are handed out in first-discovery order during the traversal.
Every node that has outgoing edges (and the root, always) is expanded once
into a segment::

    <head> :role1 <target1> :role2 <target2> ... <stop>

The head of the first segment carries its concept (``<P0> want-01``); later
heads are bare pointers.  Targets seen for the first time carry their
concept, re-entrant targets are bare pointers.
"""

from __future__ import annotations

import enum
import json
import re
from collections import deque
from dataclasses import dataclass, field

from .amr import AmrGraph
from .errors import PointerRedefinition, UnknownLabelShape

STOP = "<stop>"
_POINTER_RE = re.compile(r"^<P(\d+)>$")
_LABEL_TOKEN_RE = re.compile(r'"(?:[^"\\]|\\.)*"|\S+')


class LabelKind(str, enum.Enum):
    CONCEPT = "ConceptWithPointer"
    ROLE = "Role"
    POINTER = "PointerRef"
    STOP = "Stop"


@dataclass(frozen=True)
class Label:
    kind: LabelKind
    text: str
    pointer: int | None = None

    def __post_init__(self):
        if self.kind in (LabelKind.CONCEPT, LabelKind.POINTER):
            if self.pointer is None or self.pointer < 0:
                raise UnknownLabelShape(f"{self.kind.value} label needs a pointer: {self.text!r}")
        elif self.kind is LabelKind.ROLE and not self.text.startswith(":"):
            raise UnknownLabelShape(f"role label must start with ':': {self.text!r}")
        elif self.kind is LabelKind.STOP and self.text != STOP:
            raise UnknownLabelShape(f"stop label must be {STOP!r}: {self.text!r}")

    @classmethod
    def concept(cls, pointer: int, concept: str) -> "Label":
        return cls(LabelKind.CONCEPT, f"<P{pointer}> {concept}", pointer)

    @classmethod
    def ref(cls, pointer: int) -> "Label":
        return cls(LabelKind.POINTER, f"<P{pointer}>", pointer)

    @classmethod
    def role(cls, role: str) -> "Label":
        return cls(LabelKind.ROLE, role)

    @classmethod
    def stop(cls) -> "Label":
        return cls(LabelKind.STOP, STOP)

    def to_json(self) -> dict:
        return {"kind": self.kind.value, "text": self.text, "pointer": self.pointer}


@dataclass(frozen=True)
class LabelSequence:
    labels: tuple[Label, ...]
    alignment: tuple[int, ...] | None = None
    source_graph_id: str = ""

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        if self.alignment is not None:
            object.__setattr__(self, "alignment", tuple(self.alignment))
            if len(self.alignment) != len(self.labels) or len(set(self.alignment)) != len(self.alignment):
                raise ValueError("alignment must be injective and cover every label")

    def __len__(self) -> int:
        return len(self.labels)

    def __iter__(self):
        return iter(self.labels)

    def __getitem__(self, i):
        return self.labels[i]

    @property
    def kinds(self) -> list[str]:
        return [lab.kind.value for lab in self.labels]

    def with_alignment(self, alignment) -> "LabelSequence":
        return LabelSequence(self.labels, tuple(alignment), self.source_graph_id)

    def sidecar(self) -> str:
        """JSON sidecar describing every label (kind, text, pointer, node index)."""
        align = self.alignment if self.alignment is not None else tuple(range(len(self.labels)))
        payload = {
            "graph_id": self.source_graph_id,
            "labels": [dict(lab.to_json(), node=align[i]) for i, lab in enumerate(self.labels)],
        }
        return json.dumps(payload, sort_keys=True, ensure_ascii=False)


def bfs_linearize(graph: AmrGraph, graph_id: str = "") -> LabelSequence:
    """Linearize ``graph`` breadth-first from its root.

    Leaves get no segment of their own; the root is always expanded so a
    single-node graph still yields ``<P0> concept <stop>``.
    """
    node_map = graph.node_map
    pointers = {graph.root: 0}
    labels = [Label.concept(0, node_map[graph.root].concept)]
    queue = deque([graph.root])
    first = True
    while queue:
        node = queue.popleft()
        out = graph.out_edges.get(node, ())
        if not first:
            if not out:
                continue
            labels.append(Label.ref(pointers[node]))
        first = False
        for edge in out:
            labels.append(Label.role(edge.role))
            target = edge.target
            if target in pointers:
                labels.append(Label.ref(pointers[target]))
            else:
                pointers[target] = len(pointers)
                labels.append(Label.concept(pointers[target], node_map[target].concept))
                queue.append(target)
        labels.append(Label.stop())
    return LabelSequence(labels, tuple(range(len(labels))), graph_id)


def render_labels(seq: LabelSequence) -> str:
    return " ".join(label.text for label in seq.labels)


def parse_labels(text: str, graph_id: str = "") -> LabelSequence:
    """Classify a rendered linearization back into labels (no alignment).

    A pointer token followed by anything that is not a role, pointer or
    ``<stop>`` is a definition and absorbs that token as its concept.
    """
    tokens = _LABEL_TOKEN_RE.findall(text)
    labels: list[Label] = []
    defined: set[int] = set()
    i = 0
    while i < len(tokens):
        tok = tokens[i]
        m = _POINTER_RE.match(tok)
        if tok == STOP:
            labels.append(Label.stop())
        elif tok.startswith(":"):
            if len(tok) < 2:
                raise UnknownLabelShape(f"empty role at token {i}")
            labels.append(Label.role(tok))
        elif m:
            pointer = int(m.group(1))
            nxt = tokens[i + 1] if i + 1 < len(tokens) else None
            if nxt is not None and nxt != STOP and not nxt.startswith(":") and not _POINTER_RE.match(nxt):
                if pointer in defined:
                    raise PointerRedefinition(f"<P{pointer}> defined twice")
                defined.add(pointer)
                labels.append(Label.concept(pointer, nxt))
                i += 1
            else:
                labels.append(Label.ref(pointer))
        else:
            raise UnknownLabelShape(f"token {tok!r} at position {i} is not a role, pointer or stop")
        i += 1
    return LabelSequence(labels, None, graph_id)
