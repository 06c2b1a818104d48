"""Hierarchical career tree: loading, validation, role mapping, and
next-step recommendations.

Trees are authored by subject-matter experts as a single JSON document
(tree_id, version, roots, nodes). The loader validates and rejects rather
than repairs: duplicate ids, dangling references, self edges, a cycle in
the immediate-growth edges, empty roots, or unreachable nodes all fail the
load with per-violation codes. Divergence between the authored advanced
edges and the computed two-step closure is only a warning, kept as an
authoring aid.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .clock import now_iso
from .embeddings import cosine
from .errors import InvalidTree, NoExperience, UnknownNode, UnmappableRole
from .ingest import ParsedResume

DEFAULT_MAPPING_THRESHOLD = 0.35

# candidate role text uses the most recent experience entry, capped at
# this many bullets so one verbose entry cannot drown the title signal
ROLE_TEXT_BULLET_CAP = 5


@dataclass(frozen=True)
class CareerNode:
    node_id: str
    title: str
    description: str
    next_positions: tuple[str, ...] = ()
    second_jump_positions: tuple[str, ...] = ()
    required_skill_refs: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "node_id": self.node_id,
            "title": self.title,
            "description": self.description,
            "next_positions": list(self.next_positions),
            "second_jump_positions": list(self.second_jump_positions),
            "required_skill_refs": list(self.required_skill_refs),
        }


@dataclass
class CareerTree:
    tree_id: str
    version: str
    roots: tuple[str, ...]
    nodes: dict[str, CareerNode]
    warnings: list[str] = field(default_factory=list)

    def serialize(self) -> dict:
        return {
            "tree_id": self.tree_id,
            "version": self.version,
            "roots": list(self.roots),
            "nodes": [node.to_dict() for node in self.nodes.values()],
        }

    def depths(self) -> dict[str, int]:
        """BFS depth of every node from the nearest root, walking both edge
        kinds (the reachability invariant guarantees full coverage)."""
        depth = {root: 0 for root in self.roots}
        frontier = list(self.roots)
        while frontier:
            nxt = []
            for node_id in frontier:
                node = self.nodes[node_id]
                for ref in node.next_positions + node.second_jump_positions:
                    if ref not in depth:
                        depth[ref] = depth[node_id] + 1
                        nxt.append(ref)
            frontier = nxt
        return depth


@dataclass
class RoleMapping:
    node_id: str
    similarity: float
    candidate_role_text: str
    mapped_at: str

    def to_dict(self) -> dict:
        return {
            "node_id": self.node_id,
            "similarity": self.similarity,
            "candidate_role_text": self.candidate_role_text,
            "mapped_at": self.mapped_at,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RoleMapping":
        return cls(data["node_id"], data["similarity"],
                   data["candidate_role_text"], data["mapped_at"])


def _find_next_cycle(nodes: dict[str, CareerNode]) -> list[str] | None:
    """Return one cycle over next_positions edges, or None."""
    WHITE, GREY, BLACK = 0, 1, 2
    color = {node_id: WHITE for node_id in nodes}
    stack_path: list[str] = []

    def visit(node_id: str) -> list[str] | None:
        color[node_id] = GREY
        stack_path.append(node_id)
        for ref in nodes[node_id].next_positions:
            if ref not in nodes:
                continue
            if color[ref] == GREY:
                return stack_path[stack_path.index(ref):] + [ref]
            if color[ref] == WHITE:
                found = visit(ref)
                if found:
                    return found
        stack_path.pop()
        color[node_id] = BLACK
        return None

    for node_id in nodes:
        if color[node_id] == WHITE:
            found = visit(node_id)
            if found:
                return found
    return None


def load_tree(document: dict | str | bytes) -> CareerTree:
    """Validate and load a career tree document.

    Accepts a parsed dict or raw JSON text. Collects every violation before
    raising InvalidTree, so authors can fix a bad file in one pass.
    """
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise InvalidTree("document is not valid JSON",
                              violations=[{"code": "invalid_document",
                                           "reason": str(exc)}]) from exc
    if not isinstance(document, dict) or not isinstance(document.get("nodes"), list):
        raise InvalidTree("document must be an object with a nodes array",
                          violations=[{"code": "invalid_document",
                                       "reason": "missing nodes array"}])

    violations: list[dict] = []
    nodes: dict[str, CareerNode] = {}
    for raw in document["nodes"]:
        node = CareerNode(
            node_id=raw.get("node_id", ""),
            title=raw.get("title", ""),
            description=raw.get("description", ""),
            next_positions=tuple(raw.get("next_positions", [])),
            second_jump_positions=tuple(raw.get("second_jump_positions", [])),
            required_skill_refs=tuple(raw.get("required_skill_refs", [])),
        )
        if node.node_id in nodes:
            violations.append({"code": "duplicate", "node": node.node_id})
            continue
        nodes[node.node_id] = node

    roots = tuple(document.get("roots", []))
    if not roots:
        violations.append({"code": "empty_roots"})

    for node in nodes.values():
        for ref in node.next_positions + node.second_jump_positions:
            if ref == node.node_id:
                violations.append({"code": "self_edge", "node": node.node_id})
            elif ref not in nodes:
                violations.append({"code": "dangling", "node": node.node_id, "ref": ref})
    for root in roots:
        if root not in nodes:
            violations.append({"code": "dangling", "node": "<roots>", "ref": root})

    cycle = _find_next_cycle(nodes)
    if cycle:
        violations.append({"code": "cycle", "path": cycle})

    # reachability from roots over both edge kinds
    seen = {root for root in roots if root in nodes}
    frontier = list(seen)
    while frontier:
        node = nodes[frontier.pop()]
        for ref in node.next_positions + node.second_jump_positions:
            if ref in nodes and ref not in seen:
                seen.add(ref)
                frontier.append(ref)
    for node_id in nodes:
        if node_id not in seen:
            violations.append({"code": "unreachable", "node": node_id})

    if violations:
        raise InvalidTree(f"{len(violations)} violation(s)", violations=violations)

    tree = CareerTree(
        tree_id=document.get("tree_id", ""),
        version=document.get("version", ""),
        roots=roots,
        nodes=nodes,
    )

    # authoring aid: flag authored advanced edges that differ from the
    # two-step closure of the immediate edges
    for node in nodes.values():
        two_step = {
            ref2
            for ref in node.next_positions
            for ref2 in nodes[ref].next_positions
            if ref2 != node.node_id and ref2 not in node.next_positions
        }
        if set(node.second_jump_positions) != two_step:
            tree.warnings.append(
                f"{node.node_id}: second_jump_positions differ from the "
                f"two-step closure {sorted(two_step)}"
            )
    return tree


def load_tree_file(path: str | Path) -> CareerTree:
    return load_tree(Path(path).read_text(encoding="utf-8"))


def candidate_role_text(resume: ParsedResume) -> str:
    """Text that stands in for the candidate's current role: most recent
    title, organization, and the first few bullets."""
    if not resume.experience:
        raise NoExperience("resume has no experience entries")
    latest = resume.experience[0]
    parts = [latest.title, latest.organization]
    parts.extend(latest.bullets[:ROLE_TEXT_BULLET_CAP])
    return "\n".join(part for part in parts if part)


def node_embedding_text(node: CareerNode) -> str:
    return f"{node.title}\n{node.description}"


def map_role(resume: ParsedResume, tree: CareerTree, embedder,
             threshold: float = DEFAULT_MAPPING_THRESHOLD) -> RoleMapping:
    """Map the candidate's current role to the most similar tree node.

    Ties break toward the shallower node, then ascending node id. A best
    score under the threshold raises UnmappableRole so the caller can fall
    back to asking the candidate directly.
    """
    role_text = candidate_role_text(resume)
    node_ids = list(tree.nodes)
    vectors = embedder.embed_texts(
        [role_text] + [node_embedding_text(tree.nodes[n]) for n in node_ids])
    query, node_vectors = vectors[0], vectors[1:]
    depth = tree.depths()

    best_id, best_score = None, -2.0
    for node_id, vector in zip(node_ids, node_vectors):
        score = cosine(query, vector)
        if best_id is None or score > best_score or (
            score == best_score
            and (depth[node_id], node_id) < (depth[best_id], best_id)
        ):
            best_id, best_score = node_id, score

    if best_score < threshold:
        raise UnmappableRole(
            f"best match {best_id!r} scored {best_score:.3f}, below {threshold}",
            best_node=best_id, similarity=best_score,
        )
    return RoleMapping(
        node_id=best_id,
        similarity=best_score,
        candidate_role_text=role_text,
        mapped_at=now_iso(),
    )


def recommend_paths(mapping: RoleMapping | str,
                    tree: CareerTree) -> tuple[list[CareerNode], list[CareerNode]]:
    """Immediate and advanced growth recommendations for a mapped node.

    Immediate mirrors the node's next_positions in document order; advanced
    mirrors second_jump_positions minus anything already immediate.
    """
    node_id = mapping.node_id if isinstance(mapping, RoleMapping) else mapping
    node = tree.nodes.get(node_id)
    if node is None:
        raise UnknownNode(f"node {node_id!r} not in tree")
    immediate = [tree.nodes[ref] for ref in node.next_positions]
    advanced = [tree.nodes[ref] for ref in node.second_jump_positions
                if ref not in node.next_positions]
    return immediate, advanced
