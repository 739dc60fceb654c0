"""Lightweight DOM tree with stable node ids.

Built on the stdlib's tolerant HTML tokenizer. Node ids are pre-order
indices frozen at parse time, so the same document always yields the same
ids. Mismatched end tags are recovered from by popping to the nearest open
ancestor; stray end tags are ignored.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from html.parser import HTMLParser

VOID_ELEMENTS = frozenset(
    "area base br col embed hr img input link meta param source track wbr".split())

# opening one of these implicitly closes the listed open ancestors
IMPLIED_CLOSES = {
    "li": frozenset({"li"}),
    "p": frozenset({"p"}),
    "td": frozenset({"td", "th"}),
    "th": frozenset({"td", "th"}),
    "tr": frozenset({"td", "th", "tr"}),
    "option": frozenset({"option"}),
    "dd": frozenset({"dd", "dt"}),
    "dt": frozenset({"dd", "dt"}),
}

_WS = re.compile(r"\s+")


@dataclass
class DomNode:
    node_id: int
    tag: str | None            # None for text nodes
    attrs: dict[str, str] = field(default_factory=dict)
    text: str = ""             # text nodes only
    children: list["DomNode"] = field(default_factory=list)
    parent: "DomNode | None" = None

    @property
    def is_text(self) -> bool:
        return self.tag is None

    @property
    def classes(self) -> tuple[str, ...]:
        return tuple((self.attrs.get("class") or "").split())

    def element_children(self) -> list["DomNode"]:
        return [c for c in self.children if not c.is_text]

    def child_element_index(self) -> int:
        """Index among the parent's element children."""
        if self.parent is None:
            return 0
        return self.parent.element_children().index(self)

    def text_content(self) -> str:
        """Concatenated descendant text with whitespace collapsed."""
        parts: list[str] = []

        def walk(node: DomNode):
            if node.is_text:
                parts.append(node.text)
                return
            for child in node.children:
                walk(child)

        walk(self)
        return _WS.sub(" ", "".join(parts)).strip()

    def find_all(self, tag: str | None = None, class_name: str | None = None):
        found = []

        def walk(node: DomNode):
            for child in node.children:
                if not child.is_text:
                    if (tag is None or child.tag == tag) and (
                            class_name is None or class_name in child.classes):
                        found.append(child)
                    walk(child)

        walk(self)
        return found


@dataclass(frozen=True)
class PathSegment:
    """One step of a root-to-node path: tag, index among element siblings,
    and the class multiset carried for structural comparison."""

    tag: str
    child_index: int
    classes: tuple[str, ...]

    def to_json(self) -> dict:
        return {"tag": self.tag, "index": self.child_index, "classes": list(self.classes)}

    @staticmethod
    def from_json(obj: dict) -> "PathSegment":
        return PathSegment(obj["tag"], obj["index"], tuple(obj["classes"]))


def dom_path(node: DomNode) -> tuple[PathSegment, ...]:
    """Root-to-node path; replays from the document root back to the node."""
    if node.is_text:
        raise ValueError("dom paths address element nodes")
    segments = []
    cursor = node
    while cursor.parent is not None:
        segments.append(PathSegment(cursor.tag, cursor.child_element_index(),
                                    cursor.classes))
        cursor = cursor.parent
    segments.reverse()
    return tuple(segments)


def resolve_path(root: DomNode, path) -> DomNode | None:
    node = root
    for segment in path:
        elements = node.element_children()
        if segment.child_index >= len(elements):
            return None
        candidate = elements[segment.child_index]
        if candidate.tag != segment.tag:
            return None
        if tuple(sorted(candidate.classes)) != tuple(sorted(segment.classes)):
            return None
        node = candidate
    return node


class _TreeBuilder(HTMLParser):
    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.root = DomNode(0, "#document")
        self.stack = [self.root]
        self.count = 1

    def _push(self, tag, attrs, self_closing):
        closes = IMPLIED_CLOSES.get(tag)
        if closes:
            while len(self.stack) > 1 and self.stack[-1].tag in closes:
                self.stack.pop()
        node = DomNode(self.count, tag, {k: (v or "") for k, v in attrs},
                       parent=self.stack[-1])
        self.count += 1
        self.stack[-1].children.append(node)
        if not self_closing and tag not in VOID_ELEMENTS:
            self.stack.append(node)

    def handle_starttag(self, tag, attrs):
        self._push(tag, attrs, self_closing=False)

    def handle_startendtag(self, tag, attrs):
        self._push(tag, attrs, self_closing=True)

    def handle_endtag(self, tag):
        for i in range(len(self.stack) - 1, 0, -1):
            if self.stack[i].tag == tag:
                del self.stack[i:]
                return
        # stray end tag: ignore

    def handle_data(self, data):
        if not data.strip():
            return
        node = DomNode(self.count, None, text=data, parent=self.stack[-1])
        self.count += 1
        self.stack[-1].children.append(node)


class Dom:
    """Parsed document: node-id indexed tree."""

    def __init__(self, root: DomNode, nodes: dict[int, DomNode]):
        self.root = root
        self.nodes = nodes

    @staticmethod
    def parse(html: str) -> "Dom":
        builder = _TreeBuilder()
        builder.feed(html)
        builder.close()
        nodes: dict[int, DomNode] = {}

        def index(node: DomNode):
            nodes[node.node_id] = node
            for child in node.children:
                index(child)

        index(builder.root)
        return Dom(builder.root, nodes)

    def node(self, node_id: int) -> DomNode | None:
        return self.nodes.get(node_id)

    def element_count(self) -> int:
        return sum(1 for n in self.nodes.values() if not n.is_text and n.tag != "#document")

    def node_count(self) -> int:
        return len(self.nodes) - 1   # the synthetic document root is not counted
