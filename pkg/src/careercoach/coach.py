"""Coaching sessions: role-specific Q&A with revisable answers, the
adaptive chat, and the grounded takeaway summary.

Answers are append-only — revising one adds a new revision rather than
rewriting history, and every recorded answer emits a recalibration signal
so downstream reports and recommendations refresh. Model-written summaries
are post-validated: a gap the report does not contain is dropped, never
shown.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .career_tree import CareerTree, RoleMapping
from .clock import now_iso
from .errors import EmptyText, UnknownQuestion
from .gateway import LlmGateway, LlmRequest, Message
from .ingest import ParsedResume, norm_key
from .skills import SkillAssessmentReport
from .templates import TemplateSet

logger = logging.getLogger(__name__)

QUESTION_KINDS = ("aspiration", "skill_probe", "preference")

SPEAKER_COACH = "coach"
SPEAKER_CANDIDATE = "candidate"

CHAT_TEMPERATURE = 0.7
CHAT_HISTORY_WINDOW = 12


@dataclass(frozen=True)
class QAQuestion:
    question_id: str
    text: str
    role_node_id: str
    kind: str

    def to_dict(self) -> dict:
        return {"question_id": self.question_id, "text": self.text,
                "role_node_id": self.role_node_id, "kind": self.kind}

    @classmethod
    def from_dict(cls, data: dict) -> "QAQuestion":
        return cls(data["question_id"], data["text"],
                   data.get("role_node_id", ""), data["kind"])


@dataclass
class QAEntry:
    question: QAQuestion
    answer: str
    answered_at: str
    revision: int

    def to_dict(self) -> dict:
        return {"question": self.question.to_dict(), "answer": self.answer,
                "answered_at": self.answered_at, "revision": self.revision}

    @classmethod
    def from_dict(cls, data: dict) -> "QAEntry":
        return cls(QAQuestion.from_dict(data["question"]), data["answer"],
                   data["answered_at"], data["revision"])


@dataclass
class QATranscript:
    session_id: str
    questions: list[QAQuestion] = field(default_factory=list)
    entries: list[QAEntry] = field(default_factory=list)

    def latest_entries(self) -> list[QAEntry]:
        """One entry per question: the highest revision, in first-answer order."""
        latest: dict[str, QAEntry] = {}
        for entry in self.entries:
            current = latest.get(entry.question.question_id)
            if current is None or entry.revision > current.revision:
                latest[entry.question.question_id] = entry
        return list(latest.values())

    def to_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "questions": [q.to_dict() for q in self.questions],
            "entries": [e.to_dict() for e in self.entries],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "QATranscript":
        return cls(
            session_id=data["session_id"],
            questions=[QAQuestion.from_dict(q) for q in data.get("questions", [])],
            entries=[QAEntry.from_dict(e) for e in data.get("entries", [])],
        )


@dataclass
class ChatTurn:
    speaker: str
    text: str
    at: str

    def to_dict(self) -> dict:
        return {"speaker": self.speaker, "text": self.text, "at": self.at}

    @classmethod
    def from_dict(cls, data: dict) -> "ChatTurn":
        return cls(data["speaker"], data["text"], data["at"])


@dataclass
class TakeawaySummary:
    strengths: list[str]
    gaps_highlighted: list[str]
    improvement_areas: list[str]
    motivational_note: str
    next_steps: list[str]

    def to_dict(self) -> dict:
        return {
            "strengths": list(self.strengths),
            "gaps_highlighted": list(self.gaps_highlighted),
            "improvement_areas": list(self.improvement_areas),
            "motivational_note": self.motivational_note,
            "next_steps": list(self.next_steps),
        }


@dataclass(frozen=True)
class RecalibrationSignal:
    """Emitted whenever an answer lands; the owner of the profile reruns
    assessment and retrieval in response."""
    question_id: str
    revision: int


# --- question generation -----------------------------------------------------


def generic_questions(templates: TemplateSet) -> list[QAQuestion]:
    """The configured fallback set, used when no role could be mapped."""
    return [
        QAQuestion(f"q{i}", raw["text"], "", raw["kind"])
        for i, raw in enumerate(templates.question_bank["generic"], start=1)
    ]


def build_questions_request(mapping: RoleMapping, tree: CareerTree,
                            templates: TemplateSet) -> LlmRequest:
    node = tree.nodes[mapping.node_id]
    seeds = templates.question_bank.get("roles", {}).get(node.node_id,
                                                         templates.question_bank["generic"])
    seed_lines = "\n".join(f"- ({q['kind']}) {q['text']}" for q in seeds)
    prompt = templates.questions_prompt.format(
        role_title=node.title,
        role_description=node.description,
        seed_questions=seed_lines,
    )
    return LlmRequest(
        messages=(Message("system", prompt),
                  Message("user", "Write the questionnaire now.")),
        output_schema=templates.questions_schema,
        temperature=0.0,
        max_output_tokens=1024,
    )


def generate_questions(mapping: RoleMapping | None, tree: CareerTree,
                       gateway: LlmGateway, templates: TemplateSet) -> list[QAQuestion]:
    """Generate 3-7 role-tagged questions; an unmapped candidate gets the
    generic set straight from the template file."""
    if mapping is None:
        return generic_questions(templates)
    exchange = gateway.complete_structured(
        build_questions_request(mapping, tree, templates))
    return [
        QAQuestion(f"q{i}", raw["text"], mapping.node_id, raw["kind"])
        for i, raw in enumerate(exchange.parsed["questions"], start=1)
    ]


# --- answers -----------------------------------------------------------------


def record_answer(transcript: QATranscript, question_id: str,
                  answer: str) -> tuple[QATranscript, RecalibrationSignal]:
    """Append an answer (or a new revision of one) to the transcript."""
    question = next((q for q in transcript.questions
                     if q.question_id == question_id), None)
    if question is None:
        raise UnknownQuestion(f"question {question_id!r} not in session",
                              question_id=question_id)
    previous = [e.revision for e in transcript.entries
                if e.question.question_id == question_id]
    revision = max(previous) + 1 if previous else 0
    transcript.entries.append(QAEntry(question, answer, now_iso(), revision))
    return transcript, RecalibrationSignal(question_id, revision)


# --- chat --------------------------------------------------------------------


def greeting_turn(display_name: str, templates: TemplateSet) -> ChatTurn:
    return ChatTurn(SPEAKER_COACH,
                    templates.chat_greeting.format(display_name=display_name).strip(),
                    now_iso())


def _recent_experience_block(resume: ParsedResume) -> str:
    if not resume.experience:
        return "(no experience on file)"
    latest = resume.experience[0]
    lines = [f"{latest.title} at {latest.organization} ({latest.start} - {latest.end})"]
    lines.extend(f"- {bullet}" for bullet in latest.bullets)
    return "\n".join(lines)


def build_chat_request(display_name: str, resume: ParsedResume,
                       mapping: RoleMapping | None,
                       report: SkillAssessmentReport | None,
                       tree: CareerTree,
                       history: list[ChatTurn], user_text: str,
                       templates: TemplateSet,
                       history_window: int = CHAT_HISTORY_WINDOW) -> LlmRequest:
    """Assemble the chat prompt: profile context in the system message, the
    last few turns replayed, then the candidate's new message."""
    role_title = tree.nodes[mapping.node_id].title if mapping else "(not mapped yet)"
    top_skills = ", ".join(report.top_skills) if report else "(no report yet)"
    gaps = (", ".join(f"{g.skill_name} (needs {g.required_level.label})"
                      for g in report.gaps)
            if report and report.gaps else "none")
    system = templates.chat_prompt.format(
        display_name=display_name,
        role_title=role_title,
        top_skills=top_skills,
        gaps=gaps,
        recent_experience=_recent_experience_block(resume),
    )
    messages = [Message("system", system)]
    for turn in history[-history_window:]:
        role = "assistant" if turn.speaker == SPEAKER_COACH else "user"
        messages.append(Message(role, turn.text))
    messages.append(Message("user", user_text))
    return LlmRequest(
        messages=tuple(messages),
        output_schema=templates.chat_schema,
        temperature=CHAT_TEMPERATURE,
        max_output_tokens=1024,
    )


def chat_reply(display_name: str, resume: ParsedResume,
               mapping: RoleMapping | None, report: SkillAssessmentReport | None,
               tree: CareerTree, history: list[ChatTurn], user_text: str,
               gateway: LlmGateway, templates: TemplateSet) -> ChatTurn:
    if not user_text.strip():
        raise EmptyText("chat message is empty")
    request = build_chat_request(display_name, resume, mapping, report, tree,
                                 history, user_text, templates)
    exchange = gateway.complete_structured(request)
    return ChatTurn(SPEAKER_COACH, exchange.parsed["text"], now_iso())


# --- takeaway summary --------------------------------------------------------


def build_summary_request(report: SkillAssessmentReport,
                          mapping: RoleMapping | None, tree: CareerTree,
                          templates: TemplateSet) -> LlmRequest:
    role_title = tree.nodes[mapping.node_id].title if mapping else "(not mapped)"
    gaps = (", ".join(f"{g.skill_name} (needs {g.required_level.label})"
                      for g in report.gaps) or "none")
    prompt = templates.summary_prompt.format(
        role_title=role_title,
        top_skills=", ".join(report.top_skills) or "none",
        gaps=gaps,
    )
    return LlmRequest(
        messages=(Message("system", prompt),
                  Message("user", "Write the takeaway summary now.")),
        output_schema=templates.summary_schema,
        temperature=0.0,
        max_output_tokens=1024,
    )


def summarize_takeaways(report: SkillAssessmentReport,
                        mapping: RoleMapping | None, tree: CareerTree,
                        gateway: LlmGateway,
                        templates: TemplateSet) -> TakeawaySummary:
    """Model-written summary, grounded after the fact: highlighted gaps are
    kept only when the report actually lists them."""
    exchange = gateway.complete_structured(
        build_summary_request(report, mapping, tree, templates))
    parsed = exchange.parsed
    known_gaps = {norm_key(name) for name in report.gap_names()}
    grounded = []
    for name in parsed["gaps_highlighted"]:
        if norm_key(name) in known_gaps:
            grounded.append(name)
        else:
            logger.warning("summary named %r, which is not a report gap; dropped", name)
    return TakeawaySummary(
        strengths=list(parsed["strengths"]),
        gaps_highlighted=grounded,
        improvement_areas=list(parsed["improvement_areas"]),
        motivational_note=parsed["motivational_note"],
        next_steps=list(parsed["next_steps"]),
    )
