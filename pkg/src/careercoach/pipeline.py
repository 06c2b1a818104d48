"""End-to-end orchestration: resume text → parsed profile → role mapping →
skill report → gap query → course recommendations.

``refresh`` is the recalibration primitive: it recomputes everything
downstream of the candidate's current facts (parsed resume plus Q&A), so
resume re-uploads and answer revisions both funnel through it. An explicit
role pick in the Q&A (an aspiration answer that exactly names a tree node)
overrides similarity mapping — the candidate knows their role better than
the embedder does.
"""

from __future__ import annotations

from .career_tree import CareerTree, RoleMapping, map_role, recommend_paths
from .clock import now_iso
from .coach import QATranscript
from .courses import VectorCollection, build_query, search
from .errors import NoGaps, UnmappableRole
from .gateway import LlmGateway
from .ingest import (ParsedResume, ResumeDocument, chunk_text,
                     extract_structured, merge_partials, norm_key)
from .skills import SkillsStore, assess
from .store import (STATUS_RECOMMENDED, CandidateProfile, CourseTrackerEntry,
                    RecommendationList, RecommendedCourse)
from .templates import TemplateSet


class Pipeline:
    def __init__(self, gateway: LlmGateway, embedder, tree: CareerTree,
                 skills_store: SkillsStore,
                 collection: VectorCollection | None,
                 templates: TemplateSet,
                 chunk_budget: int = 3000, chunk_overlap: int = 200,
                 mapping_threshold: float = 0.35, recommend_k: int = 5):
        self.gateway = gateway
        self.embedder = embedder
        self.tree = tree
        self.skills_store = skills_store
        self.collection = collection
        self.templates = templates
        self.chunk_budget = chunk_budget
        self.chunk_overlap = chunk_overlap
        self.mapping_threshold = mapping_threshold
        self.recommend_k = recommend_k

    def parse_document(self, document: ResumeDocument) -> ParsedResume:
        chunks = chunk_text(document.extracted_text,
                            self.chunk_budget, self.chunk_overlap)
        partials = extract_structured(chunks, self.gateway, self.templates)
        return merge_partials(partials)

    def aspiration_pick(self, qa: QATranscript) -> str | None:
        """Node id named by the latest aspiration answer, if the answer is
        exactly a node title; the Q&A fallback for unmapped candidates."""
        picked = None
        for entry in qa.latest_entries():
            if entry.question.kind != "aspiration":
                continue
            answer_key = norm_key(entry.answer)
            for node in self.tree.nodes.values():
                if norm_key(node.title) == answer_key:
                    picked = node.node_id
        return picked

    def map_profile(self, profile: CandidateProfile) -> RoleMapping:
        picked = self.aspiration_pick(profile.qa)
        if picked is not None:
            return RoleMapping(
                node_id=picked,
                similarity=1.0,
                candidate_role_text=self.tree.nodes[picked].title,
                mapped_at=now_iso(),
            )
        return map_role(profile.current_parsed, self.tree, self.embedder,
                        threshold=self.mapping_threshold)

    def refresh(self, profile: CandidateProfile) -> CandidateProfile:
        """Recompute mapping, report, and recommendations from the profile's
        current facts. Raises UnmappableRole when neither the resume nor an
        explicit role pick identifies a node."""
        try:
            profile.mapping = self.map_profile(profile)
        except UnmappableRole:
            profile.mapping = None
            raise
        immediate, _advanced = recommend_paths(profile.mapping, self.tree)
        profile.latest_report = assess(
            profile.profile_id, profile.current_parsed, profile.qa,
            profile.mapping, immediate, self.skills_store)

        recommendations = RecommendationList()
        if not profile.latest_report.gaps or not immediate:
            recommendations.no_gaps = True
        elif self.collection is not None and self.collection.entries:
            target = immediate[0]
            try:
                query = build_query(profile.latest_report, target,
                                    k=self.recommend_k)
            except NoGaps:
                recommendations.no_gaps = True
            else:
                results = search(self.collection, query, self.embedder)
                recommendations = RecommendationList(
                    query_text=query.query_text,
                    target_node_id=target.node_id,
                    target_role_title=target.title,
                    courses=[RecommendedCourse(course, score)
                             for course, score in results],
                )
        profile.recommendations = recommendations

        # newly recommended courses join the tracker; prior statuses persist
        for rec in recommendations.courses:
            if rec.course.course_id not in profile.recommended_ever:
                profile.recommended_ever.append(rec.course.course_id)
            if profile.tracker_entry(rec.course.course_id) is None:
                profile.course_tracker.append(CourseTrackerEntry(
                    rec.course.course_id, STATUS_RECOMMENDED, now_iso()))
        return profile
