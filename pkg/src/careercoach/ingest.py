"""Resume ingestion: upload → text → token-budgeted chunks → structured
partials → one merged, deduplicated profile.

Chunks are substrings of the original text and carry their character
offsets, so coverage and reconstruction are exact, checkable facts rather
than approximations. Merging collapses duplicates by normalized keys with
first occurrence winning, and orders dated lists by end date descending;
unparseable dates sort last rather than failing, because resumes are messy.
"""

from __future__ import annotations

import re
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field
from math import ceil

from .clock import now_iso
from .errors import ConflictingIdentity, EmptyDocument, SchemaViolation, UnreadableDocument
from .gateway import LlmGateway, LlmRequest, Message, estimate_tokens
from .pdftext import extract_pdf_text
from .templates import TemplateSet

MEDIA_PDF = "pdf"
MEDIA_TEXT = "plain_text"

DEFAULT_CHUNK_BUDGET = 3000
DEFAULT_CHUNK_OVERLAP = 200

PRESENT = "present"

_PRESENT_WORDS = {"present", "current", "now", "ongoing", "today"}
_MONTH_NAMES = {
    "jan": 1, "feb": 2, "mar": 3, "apr": 4, "may": 5, "jun": 6,
    "jul": 7, "aug": 8, "sep": 9, "sept": 9, "oct": 10, "nov": 11, "dec": 12,
}
_YEAR_RE = re.compile(r"\b(19|20)\d{2}\b")
_NUM_MONTH_RE = re.compile(r"\b(0?[1-9]|1[0-2])\s*[/.-]\s*((?:19|20)\d{2})\b")


def norm_key(value: str) -> str:
    """Normalization used for every dedup key: trim, lowercase, collapse
    internal whitespace."""
    return " ".join(value.strip().lower().split())


def parse_fuzzy_date(raw: str | None):
    """Lenient date parse: (year, month) with month 0 when unknown, the
    PRESENT sentinel for open-ended dates, or None when nothing parses."""
    if not raw or not raw.strip():
        return None
    text = raw.strip().lower()
    if any(word in text for word in _PRESENT_WORDS):
        return PRESENT
    numeric = _NUM_MONTH_RE.search(text)
    if numeric:
        return (int(numeric.group(2)), int(numeric.group(1)))
    year_match = _YEAR_RE.search(text)
    if not year_match:
        return None
    year = int(year_match.group(0))
    month = 0
    for name, number in _MONTH_NAMES.items():
        if re.search(rf"\b{name}[a-z]*\b", text):
            month = number
            break
    return (year, month)


def date_sort_key(raw: str | None) -> int:
    """Monotone key for descending date sorts; unparseable dates get the
    smallest key so they land last."""
    parsed = parse_fuzzy_date(raw)
    if parsed == PRESENT:
        return 10**7
    if parsed is None:
        return -1
    year, month = parsed
    return year * 12 + month


# --- document types ----------------------------------------------------------


@dataclass
class ResumeDocument:
    document_id: str
    filename: str
    media_kind: str
    extracted_text: str
    uploaded_at: str

    def to_dict(self) -> dict:
        return {
            "document_id": self.document_id,
            "filename": self.filename,
            "media_kind": self.media_kind,
            "extracted_text": self.extracted_text,
            "uploaded_at": self.uploaded_at,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ResumeDocument":
        return cls(
            document_id=data["document_id"],
            filename=data.get("filename", ""),
            media_kind=data["media_kind"],
            extracted_text=data["extracted_text"],
            uploaded_at=data["uploaded_at"],
        )


@dataclass
class TextChunk:
    index: int
    text: str
    token_estimate: int
    start: int
    end: int


@dataclass
class Contact:
    kind: str
    value: str


@dataclass
class EducationEntry:
    institution: str
    credential: str
    start: str = ""
    end: str = ""


@dataclass
class ExperienceEntry:
    title: str
    organization: str
    start: str = ""
    end: str = ""
    bullets: list[str] = field(default_factory=list)


@dataclass
class TechnicalSkill:
    name: str
    context_snippets: list[str] = field(default_factory=list)


@dataclass
class SoftSkill:
    name: str
    justification: str = ""


@dataclass
class Project:
    name: str
    description: str = ""


@dataclass
class ParsedResume:
    name: str = ""
    contacts: list[Contact] = field(default_factory=list)
    education: list[EducationEntry] = field(default_factory=list)
    experience: list[ExperienceEntry] = field(default_factory=list)
    technical_skills: list[TechnicalSkill] = field(default_factory=list)
    soft_skills: list[SoftSkill] = field(default_factory=list)
    certifications: list[str] = field(default_factory=list)
    projects: list[Project] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "contacts": [{"kind": c.kind, "value": c.value} for c in self.contacts],
            "education": [
                {"institution": e.institution, "credential": e.credential,
                 "start": e.start, "end": e.end}
                for e in self.education
            ],
            "experience": [
                {"title": e.title, "organization": e.organization,
                 "start": e.start, "end": e.end, "bullets": list(e.bullets)}
                for e in self.experience
            ],
            "technical_skills": [
                {"name": s.name, "context_snippets": list(s.context_snippets)}
                for s in self.technical_skills
            ],
            "soft_skills": [
                {"name": s.name, "justification": s.justification}
                for s in self.soft_skills
            ],
            "certifications": list(self.certifications),
            "projects": [{"name": p.name, "description": p.description}
                         for p in self.projects],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ParsedResume":
        return cls(
            name=data.get("name", ""),
            contacts=[Contact(c["kind"], c["value"]) for c in data.get("contacts", [])],
            education=[
                EducationEntry(e.get("institution", ""), e.get("credential", ""),
                               e.get("start", ""), e.get("end", ""))
                for e in data.get("education", [])
            ],
            experience=[
                ExperienceEntry(e.get("title", ""), e.get("organization", ""),
                                e.get("start", ""), e.get("end", ""),
                                list(e.get("bullets", [])))
                for e in data.get("experience", [])
            ],
            technical_skills=[
                TechnicalSkill(s.get("name", ""), list(s.get("context_snippets", [])))
                for s in data.get("technical_skills", [])
            ],
            soft_skills=[
                SoftSkill(s.get("name", ""), s.get("justification", ""))
                for s in data.get("soft_skills", [])
            ],
            certifications=list(data.get("certifications", [])),
            projects=[Project(p.get("name", ""), p.get("description", ""))
                      for p in data.get("projects", [])],
        )


# --- operations --------------------------------------------------------------


def extract_text(upload: bytes, media_kind: str, filename: str = "",
                 document_id: str = "") -> ResumeDocument:
    """Turn an uploaded file into a ResumeDocument with its text content.

    Plain text passes through unchanged; PDFs go through the bundled
    extractor. Empty or text-free uploads raise EmptyDocument.
    """
    if not upload:
        raise EmptyDocument("upload is empty")
    if media_kind == MEDIA_TEXT:
        try:
            text = upload.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise UnreadableDocument("text upload is not valid UTF-8") from exc
    elif media_kind == MEDIA_PDF:
        text = extract_pdf_text(upload)
    else:
        raise UnreadableDocument(f"unsupported media kind: {media_kind!r}")
    if not text.strip():
        raise EmptyDocument("no extractable text")
    return ResumeDocument(
        document_id=document_id,
        filename=filename,
        media_kind=media_kind,
        extracted_text=text,
        uploaded_at=now_iso(),
    )


def _preferred_cut(text: str, lo: int, hi: int) -> int | None:
    """Best split point in (lo, hi]: paragraph break, then line break, each
    only if it falls in the second half of the window so chunks stay fat."""
    window_lo = lo + (hi - lo) // 2
    paragraph = text.rfind("\n\n", window_lo, hi)
    if paragraph != -1 and paragraph + 2 > lo:
        return paragraph + 2
    line = text.rfind("\n", window_lo, hi)
    if line != -1 and line + 1 > lo:
        return line + 1
    return None


def chunk_text(text: str, budget: int = DEFAULT_CHUNK_BUDGET,
               overlap: int = DEFAULT_CHUNK_OVERLAP) -> list[TextChunk]:
    """Split text into chunks whose token estimate fits the budget.

    Consecutive chunks share ``overlap`` tokens of context; together they
    cover every character of the input. Short texts come back as a single
    chunk.
    """
    if overlap < 0 or budget <= overlap:
        raise ValueError("need budget > overlap >= 0")
    n = len(text)
    if estimate_tokens(text) <= budget:
        return [TextChunk(0, text, estimate_tokens(text), 0, n)]

    # prefix[i] = utf-8 byte length of text[:i]; segments cost bytes, and
    # tokens are ceil(bytes / 4), so budgets translate to byte windows
    prefix = [0] * (n + 1)
    for i, ch in enumerate(text):
        prefix[i + 1] = prefix[i] + len(ch.encode("utf-8"))
    max_bytes = budget * 4
    overlap_bytes = overlap * 4

    spans: list[tuple[int, int]] = []
    start = 0
    while True:
        end = bisect_right(prefix, prefix[start] + max_bytes) - 1
        end = max(end, start + 1)
        if end >= n:
            spans.append((start, n))
            break
        cut = _preferred_cut(text, start, end)
        if cut is not None:
            end = cut
        spans.append((start, end))
        next_start = bisect_left(prefix, prefix[end] - overlap_bytes)
        start = min(max(next_start, start + 1), end)

    return [
        TextChunk(i, text[a:b], ceil((prefix[b] - prefix[a]) / 4), a, b)
        for i, (a, b) in enumerate(spans)
    ]


def build_extraction_request(chunk: TextChunk, templates: TemplateSet) -> LlmRequest:
    """The exact request the extractor sends for one chunk; exposed so test
    fixtures can fingerprint it."""
    return LlmRequest(
        messages=(
            Message("system", templates.extraction_prompt),
            Message("user", chunk.text),
        ),
        output_schema=templates.extraction_schema,
        temperature=0.0,
        max_output_tokens=4096,
    )


def extract_structured(chunks: list[TextChunk], gateway: LlmGateway,
                       templates: TemplateSet) -> list[ParsedResume]:
    """Run schema-enforced extraction over each chunk independently."""
    if not chunks:
        raise ValueError("no chunks to extract from")
    partials = []
    for chunk in chunks:
        try:
            exchange = gateway.complete_structured(
                build_extraction_request(chunk, templates))
        except SchemaViolation as exc:
            exc.detail["chunk_index"] = chunk.index
            raise
        partials.append(ParsedResume.from_dict(exchange.parsed))
    return partials


def _dedup(items, key):
    seen = set()
    out = []
    for item in items:
        k = key(item)
        if k not in seen:
            seen.add(k)
            out.append(item)
    return out


def merge_partials(partials: list[ParsedResume]) -> ParsedResume:
    """Union per-chunk partial profiles into one deduplicated resume.

    First occurrence wins for every duplicate key; the merge is idempotent
    and insensitive to repeating any partial. Partials that disagree on a
    non-empty name raise ConflictingIdentity.
    """
    if not partials:
        raise ValueError("no partials to merge")

    name = ""
    for partial in partials:
        if partial.name.strip():
            if name and norm_key(partial.name) != norm_key(name):
                raise ConflictingIdentity(
                    f"partials disagree on name: {name!r} vs {partial.name!r}")
            name = name or partial.name.strip()

    merged = ParsedResume(name=name)
    merged.contacts = _dedup(
        (c for p in partials for c in p.contacts),
        lambda c: (c.kind, norm_key(c.value)))
    merged.education = sorted(
        _dedup((e for p in partials for e in p.education),
               lambda e: (norm_key(e.institution), norm_key(e.credential))),
        key=lambda e: date_sort_key(e.end), reverse=True)
    merged.experience = sorted(
        _dedup((e for p in partials for e in p.experience),
               lambda e: (norm_key(e.title), norm_key(e.organization), norm_key(e.start))),
        key=lambda e: date_sort_key(e.end), reverse=True)
    merged.technical_skills = _dedup(
        (s for p in partials for s in p.technical_skills),
        lambda s: norm_key(s.name))
    merged.soft_skills = _dedup(
        (s for p in partials for s in p.soft_skills),
        lambda s: norm_key(s.name))
    merged.certifications = _dedup(
        (c for p in partials for c in p.certifications), norm_key)
    merged.projects = _dedup(
        (p for partial in partials for p in partial.projects),
        lambda p: norm_key(p.name))
    return merged
