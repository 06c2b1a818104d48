"""Skill evidence collection, the four-level proficiency rubric, and gap
reports against per-role benchmarks.

Benchmarks live in a skills configuration file (requirements per tree node,
an alias table, and the rubric's month thresholds) so subject-matter
experts can retune levels without code changes. Rating is a deterministic
rubric over evidence: base level from months of experience, demoted one
level when a skill is declared once and never evidenced, promoted one
level when the candidate self-attests advanced usage in the Q&A phase.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from enum import IntEnum
from pathlib import Path

from .clock import now_iso
from .errors import MissingBenchmarks
from .ingest import (PRESENT, ExperienceEntry, ParsedResume, norm_key,
                     parse_fuzzy_date)

SOURCE_RESUME = "resume"
SOURCE_QA = "qa"

MAX_SNIPPETS = 10
TOP_SKILL_LIMIT = 10

# words in a skill-probe answer that count as self-attested advanced usage
_ATTEST_WORDS = ("advanced", "expert")


class ProficiencyLevel(IntEnum):
    BEGINNER = 1
    INTERMEDIATE = 2
    ADVANCED = 3
    EXPERT = 4

    @property
    def label(self) -> str:
        return self.name.lower()

    @classmethod
    def parse(cls, value) -> "ProficiencyLevel":
        if isinstance(value, cls):
            return value
        if isinstance(value, int):
            return cls(value)
        return cls[str(value).strip().upper()]


@dataclass(frozen=True)
class SkillRequirement:
    requirement_id: str
    role_node_id: str
    skill_name: str
    category: str
    description: str
    minimum_level: ProficiencyLevel


@dataclass(frozen=True)
class RubricThresholds:
    """Month boundaries for the base level; configurable, not hardcoded."""
    intermediate_months: int = 12
    advanced_months: int = 36
    expert_months: int = 72


@dataclass
class SkillEvidence:
    skill_name: str
    months_experience: int = 0
    mention_count: int = 1
    sources: frozenset = frozenset({SOURCE_RESUME})
    snippets: list[str] = field(default_factory=list)
    advanced_attested: bool = False

    def to_dict(self) -> dict:
        return {
            "skill_name": self.skill_name,
            "months_experience": self.months_experience,
            "mention_count": self.mention_count,
            "sources": sorted(self.sources),
            "snippets": list(self.snippets),
            "advanced_attested": self.advanced_attested,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SkillEvidence":
        return cls(
            skill_name=data["skill_name"],
            months_experience=data["months_experience"],
            mention_count=data["mention_count"],
            sources=frozenset(data["sources"]),
            snippets=list(data.get("snippets", [])),
            advanced_attested=data.get("advanced_attested", False),
        )


@dataclass
class SkillGap:
    skill_name: str
    required_level: ProficiencyLevel
    current_level: ProficiencyLevel | None
    target_role_node_id: str
    severity: int

    def to_dict(self) -> dict:
        return {
            "skill_name": self.skill_name,
            "required_level": self.required_level.label,
            "current_level": self.current_level.label if self.current_level else None,
            "target_role_node_id": self.target_role_node_id,
            "severity": self.severity,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SkillGap":
        current = data.get("current_level")
        return cls(
            skill_name=data["skill_name"],
            required_level=ProficiencyLevel.parse(data["required_level"]),
            current_level=ProficiencyLevel.parse(current) if current else None,
            target_role_node_id=data["target_role_node_id"],
            severity=data["severity"],
        )


@dataclass
class AssessedSkill:
    skill_name: str
    level: ProficiencyLevel
    evidence: SkillEvidence

    def to_dict(self) -> dict:
        return {
            "skill_name": self.skill_name,
            "level": self.level.label,
            "evidence": self.evidence.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AssessedSkill":
        return cls(
            skill_name=data["skill_name"],
            level=ProficiencyLevel.parse(data["level"]),
            evidence=SkillEvidence.from_dict(data["evidence"]),
        )


@dataclass
class SkillAssessmentReport:
    profile_id: str
    assessed: list[AssessedSkill]
    top_skills: list[str]
    gaps: list[SkillGap]
    target_role_ids: list[str]
    generated_at: str

    def gap_names(self) -> list[str]:
        return [gap.skill_name for gap in self.gaps]

    def to_dict(self) -> dict:
        return {
            "profile_id": self.profile_id,
            "assessed": [a.to_dict() for a in self.assessed],
            "top_skills": list(self.top_skills),
            "gaps": [g.to_dict() for g in self.gaps],
            "target_role_ids": list(self.target_role_ids),
            "generated_at": self.generated_at,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SkillAssessmentReport":
        return cls(
            profile_id=data["profile_id"],
            assessed=[AssessedSkill.from_dict(a) for a in data["assessed"]],
            top_skills=list(data["top_skills"]),
            gaps=[SkillGap.from_dict(g) for g in data["gaps"]],
            target_role_ids=list(data.get("target_role_ids", [])),
            generated_at=data["generated_at"],
        )


class SkillsStore:
    """Requirements, aliases, and rubric thresholds loaded from skills.json."""

    def __init__(self, requirements: list[SkillRequirement],
                 aliases: dict[str, str] | None = None,
                 rubric: RubricThresholds | None = None):
        self.requirements = list(requirements)
        self.aliases = {norm_key(k): norm_key(v) for k, v in (aliases or {}).items()}
        self.rubric = rubric or RubricThresholds()
        self.by_role: dict[str, list[SkillRequirement]] = {}
        seen: set[tuple[str, str]] = set()
        for req in self.requirements:
            key = (req.role_node_id, norm_key(req.skill_name))
            if key in seen:
                raise ValueError(f"duplicate requirement for {key}")
            seen.add(key)
            self.by_role.setdefault(req.role_node_id, []).append(req)

    @classmethod
    def load(cls, document: dict | str | bytes, tree=None) -> "SkillsStore":
        """Parse a skills configuration document; when a tree is given,
        every role_node_id must exist in it."""
        if isinstance(document, (str, bytes)):
            document = json.loads(document)
        rubric_months = document.get("rubric_months", {})
        rubric = RubricThresholds(
            intermediate_months=rubric_months.get("intermediate", 12),
            advanced_months=rubric_months.get("advanced", 36),
            expert_months=rubric_months.get("expert", 72),
        )
        requirements = [
            SkillRequirement(
                requirement_id=raw.get("requirement_id",
                                       f"{raw['role_node_id']}/{norm_key(raw['skill_name'])}"),
                role_node_id=raw["role_node_id"],
                skill_name=raw["skill_name"],
                category=raw.get("category", "technical"),
                description=raw.get("description", ""),
                minimum_level=ProficiencyLevel.parse(raw["minimum_level"]),
            )
            for raw in document["requirements"]
        ]
        store = cls(requirements, aliases=document.get("aliases"), rubric=rubric)
        if tree is not None:
            unknown = sorted({r.role_node_id for r in store.requirements}
                             - set(tree.nodes))
            if unknown:
                raise ValueError(f"requirements reference unknown roles: {unknown}")
        return store

    @classmethod
    def load_file(cls, path: str | Path, tree=None) -> "SkillsStore":
        return cls.load(Path(path).read_text(encoding="utf-8"), tree=tree)

    def canonical(self, skill_name: str) -> str:
        key = norm_key(skill_name)
        return self.aliases.get(key, key)

    def for_role(self, role_node_id: str) -> list[SkillRequirement]:
        reqs = self.by_role.get(role_node_id)
        if reqs is None:
            raise MissingBenchmarks(f"no skill requirements for role {role_node_id!r}",
                                    role_node_id=role_node_id)
        return reqs


# --- evidence collection -----------------------------------------------------


def _mention_pattern(skill_name: str) -> re.Pattern:
    return re.compile(rf"\b{re.escape(norm_key(skill_name))}\b", re.IGNORECASE)


def _entry_months(entry: ExperienceEntry, reference: int | None) -> int:
    start = parse_fuzzy_date(entry.start)
    end = parse_fuzzy_date(entry.end)
    if start in (None, PRESENT):
        return 0
    start_key = start[0] * 12 + max(start[1], 1)
    if end == PRESENT:
        if reference is None:
            return 0
        end_key = reference
    elif end is None:
        return 0
    else:
        end_key = end[0] * 12 + max(end[1], 1)
    return max(0, end_key - start_key)


def _reference_month(resume: ParsedResume) -> int | None:
    """Anchor for open-ended roles: the latest parseable date anywhere in
    the resume. Keeps assessment a pure function of its inputs."""
    keys = []
    for entry in resume.experience:
        for raw in (entry.start, entry.end):
            parsed = parse_fuzzy_date(raw)
            if parsed not in (None, PRESENT):
                keys.append(parsed[0] * 12 + max(parsed[1], 1))
    for entry in resume.education:
        for raw in (entry.start, entry.end):
            parsed = parse_fuzzy_date(raw)
            if parsed not in (None, PRESENT):
                keys.append(parsed[0] * 12 + max(parsed[1], 1))
    return max(keys) if keys else None


def collect_evidence(resume: ParsedResume, qa=None,
                     vocabulary: list[str] | None = None) -> list[SkillEvidence]:
    """Build one evidence record per distinct normalized skill.

    Skills come from the resume's declared lists plus any vocabulary term
    (typically the benchmark skill names) that actually appears in the
    resume text or a Q&A answer. Months sum over the experience entries
    that mention the skill; mentions count across resume and Q&A.
    """
    qa_entries = list(qa.latest_entries()) if qa is not None else []
    reference = _reference_month(resume)

    # candidate skills: declared first (display name preserved), then
    # vocabulary terms found in the text
    display: dict[str, str] = {}
    declared_soft: set[str] = set()
    declared: set[str] = set()
    for skill in resume.technical_skills:
        key = norm_key(skill.name)
        if key:
            display.setdefault(key, skill.name.strip())
            declared.add(key)
    for skill in resume.soft_skills:
        key = norm_key(skill.name)
        if key:
            display.setdefault(key, skill.name.strip())
            declared.add(key)
            declared_soft.add(key)

    resume_texts = [entry.title for entry in resume.experience]
    for entry in resume.experience:
        resume_texts.extend(entry.bullets)
    resume_texts.extend(p.description for p in resume.projects)
    answer_texts = [entry.answer for entry in qa_entries]

    for term in vocabulary or []:
        key = norm_key(term)
        if not key or key in display:
            continue
        pattern = _mention_pattern(term)
        if any(pattern.search(t) for t in resume_texts + answer_texts):
            display[key] = term.strip()

    out: list[SkillEvidence] = []
    for key, name in display.items():
        pattern = _mention_pattern(name)
        resume_mentions = sum(len(pattern.findall(t)) for t in resume_texts)
        qa_mentions = sum(len(pattern.findall(t)) for t in answer_texts)

        snippets = [t for t in resume_texts if pattern.search(t)]
        if key in declared:
            for skill in resume.technical_skills:
                if norm_key(skill.name) == key:
                    snippets.extend(skill.context_snippets)
            for skill in resume.soft_skills:
                if norm_key(skill.name) == key and skill.justification:
                    snippets.append(skill.justification)
        snippets.extend(t for t in answer_texts if pattern.search(t))

        months = 0
        if key not in declared_soft:
            for entry in resume.experience:
                entry_text = " \n ".join([entry.title] + entry.bullets)
                if pattern.search(entry_text):
                    months += _entry_months(entry, reference)
        # inferred soft skills carry no duration; they live on mentions
        # and Q&A adjustments alone

        attested = False
        for entry in qa_entries:
            if entry.question.kind != "skill_probe":
                continue
            answer = entry.answer.lower()
            if pattern.search(entry.answer) and any(w in answer for w in _ATTEST_WORDS):
                attested = True
                break

        sources = set()
        if key in declared or resume_mentions:
            sources.add(SOURCE_RESUME)
        if qa_mentions:
            sources.add(SOURCE_QA)

        mention_count = resume_mentions + qa_mentions + (1 if key in declared else 0)
        out.append(SkillEvidence(
            skill_name=name,
            months_experience=months,
            mention_count=max(1, mention_count),
            sources=frozenset(sources or {SOURCE_RESUME}),
            snippets=snippets[:MAX_SNIPPETS],
            advanced_attested=attested,
        ))
    return out


def rate_skill(evidence: SkillEvidence,
               rubric: RubricThresholds = RubricThresholds()) -> ProficiencyLevel:
    """Deterministic rubric: months set the base level, a lone unexercised
    resume mention demotes one level, and Q&A-attested advanced usage
    promotes one. Monotone in months when everything else is fixed."""
    months = evidence.months_experience
    level = 1
    if months >= rubric.intermediate_months:
        level = 2
    if months >= rubric.advanced_months:
        level = 3
    if months >= rubric.expert_months:
        level = 4
    if evidence.mention_count == 1 and evidence.sources == frozenset({SOURCE_RESUME}):
        level = max(1, level - 1)
    if SOURCE_QA in evidence.sources and evidence.advanced_attested:
        level = min(4, level + 1)
    return ProficiencyLevel(level)


def assess(profile_id: str, resume: ParsedResume, qa, mapping,
           immediate_targets, store: SkillsStore) -> SkillAssessmentReport:
    """Rate every evidenced skill and flag gaps against the union of the
    immediate target roles' requirements.

    A skill gaps when it is absent or rated below the required level; when
    several targets require the same skill the strictest requirement wins.
    """
    target_reqs: dict[str, SkillRequirement] = {}
    target_ids = []
    for target in immediate_targets:
        node_id = getattr(target, "node_id", target)
        target_ids.append(node_id)
        for req in store.for_role(node_id):
            key = store.canonical(req.skill_name)
            current = target_reqs.get(key)
            if current is None or req.minimum_level > current.minimum_level:
                target_reqs[key] = req

    vocabulary = [req.skill_name for req in target_reqs.values()]
    evidence = collect_evidence(resume, qa, vocabulary=vocabulary)

    assessed = sorted(
        (AssessedSkill(ev.skill_name, rate_skill(ev, store.rubric), ev)
         for ev in evidence),
        key=lambda a: (-int(a.level), -a.evidence.months_experience,
                       norm_key(a.skill_name)),
    )
    # aliases can fold two evidenced names onto one key; keep the stronger
    levels_by_key: dict[str, ProficiencyLevel] = {}
    for item in assessed:
        key = store.canonical(item.skill_name)
        if key not in levels_by_key or item.level > levels_by_key[key]:
            levels_by_key[key] = item.level

    gaps = []
    for key, req in target_reqs.items():
        current = levels_by_key.get(key)
        if current is None or current < req.minimum_level:
            gaps.append(SkillGap(
                skill_name=req.skill_name,
                required_level=req.minimum_level,
                current_level=current,
                target_role_node_id=req.role_node_id,
                severity=int(req.minimum_level) - int(current or 0),
            ))
    gaps.sort(key=lambda g: (-g.severity, norm_key(g.skill_name)))

    return SkillAssessmentReport(
        profile_id=profile_id,
        assessed=assessed,
        top_skills=[a.skill_name for a in assessed[:TOP_SKILL_LIMIT]],
        gaps=gaps,
        target_role_ids=target_ids,
        generated_at=now_iso(),
    )
