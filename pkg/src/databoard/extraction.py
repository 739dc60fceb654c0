"""Snapshot ingestion, element capture, selector generalization, and source
tracing.

Exemplar selections generalize conservatively: only positions where the
dom-paths differ in child index are wildcarded; tags and class multisets
must agree at every depth. Applied back to its snapshot, a selector matches
every exemplar plus all structural siblings, which is what batch extraction
iterates over.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

from .cells import NUMBER, TEXT, Cell, clean_number_text
from .dom import Dom, DomNode, PathSegment, dom_path, resolve_path
from .errors import (BadArgument, EmptyDocument, NoCommonPattern, SourceGone,
                     UnknownNode, UnknownSnapshot)
from .instances import Column, SourceRef, TableInstance


@dataclass(frozen=True)
class PageSnapshot:
    snapshot_id: str
    url: str
    html: str
    dom: Dom
    content_hash: str

    def node(self, node_id: int) -> DomNode:
        node = self.dom.node(node_id)
        if node is None:
            raise UnknownNode(f"node {node_id} not in snapshot {self.snapshot_id}")
        return node


def content_hash(html: str) -> str:
    return hashlib.sha256(html.encode("utf-8")).hexdigest()


def ingest_snapshot(html: str, url: str) -> PageSnapshot:
    if not html or not html.strip():
        raise EmptyDocument("cannot ingest an empty document")
    dom = Dom.parse(html)
    if dom.element_count() == 0:
        raise EmptyDocument("document contains no elements")
    digest = content_hash(html)
    snapshot_id = "snap-" + hashlib.sha256(f"{url}\n{digest}".encode()).hexdigest()[:16]
    return PageSnapshot(snapshot_id, url, html, dom, digest)


class SnapshotStore:
    """Append-only store; re-ingesting identical html+url is idempotent."""

    def __init__(self):
        self._by_id: dict[str, PageSnapshot] = {}
        self._latest_by_url: dict[str, str] = {}

    def ingest(self, html: str, url: str) -> PageSnapshot:
        snapshot = ingest_snapshot(html, url)
        if snapshot.snapshot_id not in self._by_id:
            self._by_id[snapshot.snapshot_id] = snapshot
        self._latest_by_url[url] = snapshot.snapshot_id
        return self._by_id[snapshot.snapshot_id]

    def get(self, snapshot_id: str) -> PageSnapshot:
        if snapshot_id not in self._by_id:
            raise UnknownSnapshot(f"no snapshot {snapshot_id!r}")
        return self._by_id[snapshot_id]

    def latest_for_url(self, url: str) -> PageSnapshot | None:
        snapshot_id = self._latest_by_url.get(url)
        return self._by_id[snapshot_id] if snapshot_id else None

    def is_latest(self, snapshot: PageSnapshot) -> bool:
        return self._latest_by_url.get(snapshot.url) == snapshot.snapshot_id

    def all_snapshots(self) -> list[PageSnapshot]:
        return [self._by_id[sid] for sid in sorted(self._by_id)]

    def to_json(self) -> list[dict]:
        records = []
        for snapshot in self.all_snapshots():
            records.append({
                "snapshot_id": snapshot.snapshot_id,
                "url": snapshot.url,
                "html": snapshot.html,
                "latest": self.is_latest(snapshot),
            })
        return records

    @staticmethod
    def from_json(records: list[dict]) -> "SnapshotStore":
        store = SnapshotStore()
        # ingest non-latest first so the latest pointer lands correctly
        for record in sorted(records, key=lambda r: bool(r.get("latest"))):
            store.ingest(record["html"], record["url"])
        return store


@dataclass(frozen=True)
class ElementSelection:
    snapshot_id: str
    node_id: int
    path: tuple[PathSegment, ...]

    @staticmethod
    def of(snapshot: PageSnapshot, node_id: int) -> "ElementSelection":
        node = snapshot.node(node_id)
        return ElementSelection(snapshot.snapshot_id, node_id, dom_path(node))

    def to_json(self) -> dict:
        return {"snapshot_id": self.snapshot_id, "node_id": self.node_id,
                "path": [s.to_json() for s in self.path]}


@dataclass(frozen=True)
class FieldPath:
    """Relative path from a matched container down to one field."""

    name: str
    segments: tuple[PathSegment, ...]

    def to_json(self) -> dict:
        return {"name": self.name, "segments": [s.to_json() for s in self.segments]}

    @staticmethod
    def from_json(obj: dict) -> "FieldPath":
        return FieldPath(obj["name"],
                         tuple(PathSegment.from_json(s) for s in obj["segments"]))


@dataclass(frozen=True)
class GeneralizedSelector:
    snapshot_id: str
    pattern: tuple[PathSegment | None, ...]   # None marks a wildcarded index
    tags: tuple[str, ...]                     # tag per depth (also for wildcards)
    classes: tuple[tuple[str, ...], ...]      # class multiset per depth
    field_paths: tuple[FieldPath, ...] = ()
    match_count: int = 0

    def to_json(self) -> dict:
        pattern = []
        for tag, classes, segment in zip(self.tags, self.classes, self.pattern):
            pattern.append({"tag": tag, "classes": list(classes),
                            "index": None if segment is None else segment.child_index})
        return {"snapshot_id": self.snapshot_id, "pattern": pattern,
                "fields": [f.to_json() for f in self.field_paths],
                "match_count": self.match_count}

    @staticmethod
    def from_json(obj: dict) -> "GeneralizedSelector":
        tags, classes, pattern = [], [], []
        for segment in obj["pattern"]:
            tags.append(segment["tag"])
            classes.append(tuple(segment["classes"]))
            if segment["index"] is None:
                pattern.append(None)
            else:
                pattern.append(PathSegment(segment["tag"], segment["index"],
                                           tuple(segment["classes"])))
        return GeneralizedSelector(
            snapshot_id=obj["snapshot_id"],
            pattern=tuple(pattern),
            tags=tuple(tags),
            classes=tuple(classes),
            field_paths=tuple(FieldPath.from_json(f) for f in obj.get("fields", [])),
            match_count=obj.get("match_count", 0),
        )

    def with_fields(self, field_paths) -> "GeneralizedSelector":
        return GeneralizedSelector(self.snapshot_id, self.pattern, self.tags,
                                   self.classes, tuple(field_paths), self.match_count)


def capture_element(snapshot: PageSnapshot, node_id: int) -> tuple[Cell, SourceRef]:
    """Capture rule: img nodes yield their src as an image ref, anything else
    yields whitespace-collapsed text content, verbatim otherwise."""
    node = snapshot.node(node_id)
    ref = SourceRef(snapshot.snapshot_id, node_id, snapshot.url)
    if not node.is_text and node.tag == "img":
        src = node.attrs.get("src", "")
        if not src:
            return Cell.missing(), ref
        return Cell.image(src), ref
    if node.is_text:
        text = " ".join(node.text.split())
    else:
        text = node.text_content()
    if text == "":
        return Cell.missing(), ref
    return Cell.text(text), ref


def generalize_selection(snapshot: PageSnapshot,
                         exemplars: list[ElementSelection]) -> GeneralizedSelector:
    if len(exemplars) < 2:
        raise BadArgument("generalization needs at least two exemplars")
    if any(e.snapshot_id != snapshot.snapshot_id for e in exemplars):
        raise BadArgument("exemplars must come from one snapshot")
    paths = [e.path for e in exemplars]
    depth = len(paths[0])
    if any(len(p) != depth for p in paths):
        raise NoCommonPattern("exemplar paths have different depths")
    pattern: list[PathSegment | None] = []
    tags, classes = [], []
    any_wildcard = False
    for level in range(depth):
        segments = [p[level] for p in paths]
        tag = segments[0].tag
        if any(s.tag != tag for s in segments):
            raise NoCommonPattern(f"tags differ at depth {level}")
        class_multiset = tuple(sorted(segments[0].classes))
        if any(tuple(sorted(s.classes)) != class_multiset for s in segments):
            raise NoCommonPattern(f"classes differ at depth {level}")
        indices = {s.child_index for s in segments}
        tags.append(tag)
        classes.append(class_multiset)
        if len(indices) > 1:
            pattern.append(None)
            any_wildcard = True
        else:
            pattern.append(segments[0])
    if not any_wildcard:
        # identical exemplar paths: the trigger requires a distinct sibling
        raise NoCommonPattern("exemplars are the same element; nothing to generalize")
    selector = GeneralizedSelector(snapshot.snapshot_id, tuple(pattern),
                                   tuple(tags), tuple(classes))
    matches = match_selector(snapshot, selector)
    matched_ids = {n.node_id for n in matches}
    if any(e.node_id not in matched_ids for e in exemplars):
        raise NoCommonPattern("selector does not cover every exemplar")
    return GeneralizedSelector(selector.snapshot_id, selector.pattern,
                               selector.tags, selector.classes,
                               match_count=len(matches))


def match_selector(snapshot: PageSnapshot, selector: GeneralizedSelector) -> list[DomNode]:
    """All nodes matching the pattern, in document order."""
    frontier = [snapshot.dom.root]
    for tag, class_multiset, segment in zip(selector.tags, selector.classes,
                                            selector.pattern):
        next_frontier = []
        for node in frontier:
            elements = node.element_children()
            if segment is not None:
                if segment.child_index < len(elements):
                    elements = [elements[segment.child_index]]
                else:
                    elements = []
            for child in elements:
                if child.tag != tag:
                    continue
                if tuple(sorted(child.classes)) != class_multiset:
                    continue
                next_frontier.append(child)
        frontier = next_frontier
    frontier.sort(key=lambda n: n.node_id)
    return frontier


def container_selector(selector: GeneralizedSelector) -> GeneralizedSelector:
    """Truncate a selector to the first wildcard depth: the repeating
    structural unit (the record card) the exemplars vary over."""
    for i, segment in enumerate(selector.pattern):
        if segment is None:
            end = i + 1
            return GeneralizedSelector(selector.snapshot_id,
                                       selector.pattern[:end],
                                       selector.tags[:end],
                                       selector.classes[:end])
    return selector


def relative_path(container: DomNode, descendant: DomNode) -> tuple[PathSegment, ...]:
    segments = []
    cursor = descendant
    while cursor is not container:
        if cursor.parent is None:
            raise BadArgument("node is not inside the container")
        segments.append(PathSegment(cursor.tag, cursor.child_element_index(),
                                    cursor.classes))
        cursor = cursor.parent
    segments.reverse()
    return tuple(segments)


def batch_extract(snapshot: PageSnapshot, selector: GeneralizedSelector,
                  max_items: int | None = None, instance_id: str = "Extracted",
                  name: str | None = None) -> TableInstance:
    if not selector.field_paths:
        raise BadArgument("selector has no field paths; run schema inference first")
    containers = match_selector(snapshot, selector)
    if max_items is not None:
        containers = containers[:max_items]
    columns = []
    for field_path in selector.field_paths:
        columns.append(Column(field_path.name, TEXT))
    rows, provenance, samples = [], [], [[] for _ in selector.field_paths]
    for container in containers:
        row, prow = [], []
        for i, field_path in enumerate(selector.field_paths):
            target = resolve_path(container, field_path.segments)
            if target is None:
                row.append(Cell.missing())
                prow.append(None)
                continue
            cell, ref = capture_element(snapshot, target.node_id)
            row.append(cell)
            prow.append(ref)
            samples[i].append(cell)
        rows.append(row)
        provenance.append(prow)
    # refine declared types from the captured cells; stray off-type cells
    # (an image in a text field) are coerced to the column type
    for i, cells in enumerate(samples):
        kinds = {c.kind for c in cells if not c.is_missing}
        if kinds == {"image-ref"}:
            columns[i] = Column(columns[i].name, "image-ref")
    for row in rows:
        for i, col in enumerate(columns):
            cell = row[i]
            if not cell.is_missing and cell.kind != col.declared_type:
                row[i] = Cell.text(cell.render()) if col.declared_type == TEXT \
                    else Cell.missing()
    return TableInstance.build(instance_id, name or instance_id, columns, rows, provenance)


@dataclass(frozen=True)
class SchemaProposal:
    """Ghost headers and types; nothing is applied until accepted."""

    columns: tuple[Column, ...]
    selector: GeneralizedSelector


_GENERIC_CLASS_TOKENS = frozenset(
    {"item", "card", "cell", "row", "col", "left", "right", "inner", "wrap",
     "wrapper", "container", "content", "box", "text", "value", "label", "field"})


def _name_from_node(node: DomNode, fallback: str) -> str:
    for token in reversed(node.classes):
        if token.lower() not in _GENERIC_CLASS_TOKENS:
            return token.replace("-", " ").replace("_", " ").title()
    return fallback


def discover_fields(snapshot: PageSnapshot, selector: GeneralizedSelector) -> list[FieldPath]:
    """Candidate fields: img elements and leaf text elements of the first
    matched container whose relative path resolves in other containers."""
    containers = match_selector(snapshot, selector)
    if not containers:
        raise NoCommonPattern("selector matches nothing")
    first = containers[0]
    candidates: list[DomNode] = []

    def walk(node: DomNode):
        for child in node.children:
            if child.is_text:
                continue
            if child.tag == "img":
                candidates.append(child)
            elif not child.element_children() and child.text_content():
                candidates.append(child)
            else:
                walk(child)

    walk(first)
    field_paths = []
    for i, node in enumerate(candidates):
        path = relative_path(first, node)
        resolved = sum(1 for c in containers if resolve_path(c, path) is not None)
        if resolved * 2 < len(containers):
            continue   # not structural: present in under half the containers
        name = "Image" if node.tag == "img" else _name_from_node(node, f"Column {i + 1}")
        field_paths.append(FieldPath(name, path))
    # de-duplicate names deterministically
    seen: dict[str, int] = {}
    unique = []
    for field_path in field_paths:
        count = seen.get(field_path.name, 0)
        seen[field_path.name] = count + 1
        if count:
            field_path = FieldPath(f"{field_path.name} {count + 1}", field_path.segments)
        unique.append(field_path)
    return unique


def infer_schema(snapshot: PageSnapshot, selector: GeneralizedSelector) -> SchemaProposal:
    """Propose column names and declared types from sampled field content."""
    if not selector.field_paths:
        selector = selector.with_fields(discover_fields(snapshot, selector))
    containers = match_selector(snapshot, selector)
    if not containers:
        raise NoCommonPattern("selector matches nothing")
    columns = []
    for field_path in selector.field_paths:
        values: list[Cell] = []
        for container in containers:
            node = resolve_path(container, field_path.segments)
            if node is None:
                continue
            cell, _ = capture_element(snapshot, node.node_id)
            if not cell.is_missing:
                values.append(cell)
        if values and all(c.kind == "image-ref" for c in values):
            declared = "image-ref"
        elif values and all(
                c.kind == TEXT and clean_number_text(c.value) is not None
                for c in values):
            declared = NUMBER
        else:
            declared = TEXT   # conservative fallback for mixed content
        columns.append(Column(field_path.name, declared))
    return SchemaProposal(tuple(columns), selector)


@dataclass(frozen=True)
class TraceResult:
    snapshot_id: str
    node_id: int
    stale: bool
    highlight_rect: None = None   # no layout engine in the core


def trace_source(store: SnapshotStore, ref: SourceRef) -> TraceResult:
    snapshot = store.get(ref.snapshot_id)
    node = snapshot.dom.node(ref.node_id)
    if node is None:
        raise SourceGone(f"node {ref.node_id} is not in snapshot {ref.snapshot_id}")
    if store.is_latest(snapshot):
        return TraceResult(snapshot.snapshot_id, node.node_id, stale=False)
    # the page was re-ingested: re-resolve by path against the newest version
    latest = store.latest_for_url(snapshot.url)
    if latest is None:
        return TraceResult(snapshot.snapshot_id, node.node_id, stale=True)
    target = node if not node.is_text else node.parent
    resolved = resolve_path(latest.dom.root, dom_path(target))
    if resolved is None:
        raise SourceGone("the source node no longer resolves in the current page")
    return TraceResult(latest.snapshot_id, resolved.node_id, stale=True)
