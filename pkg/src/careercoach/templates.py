"""Loads the prompt and schema files every model call site builds from.

Prompts and output schemas are versioned files, not inline constants, so
operators can retune them without touching code. The packaged defaults
live under ``careercoach/templates``; a config may point at a different
directory with the same file names.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any

_FILES = {
    "extraction_prompt": "extraction_prompt.txt",
    "extraction_schema": "extraction_schema.json",
    "outcomes_prompt": "outcomes_prompt.txt",
    "outcomes_schema": "outcomes_schema.json",
    "questions_prompt": "questions_prompt.txt",
    "questions_schema": "questions_schema.json",
    "question_bank": "question_bank.json",
    "chat_prompt": "chat_prompt.txt",
    "chat_greeting": "chat_greeting.txt",
    "chat_schema": "chat_schema.json",
    "summary_prompt": "summary_prompt.txt",
    "summary_schema": "summary_schema.json",
}


@dataclass(frozen=True)
class TemplateSet:
    extraction_prompt: str
    extraction_schema: dict
    outcomes_prompt: str
    outcomes_schema: dict
    questions_prompt: str
    questions_schema: dict
    question_bank: dict
    chat_prompt: str
    chat_greeting: str
    chat_schema: dict
    summary_prompt: str
    summary_schema: dict

    @classmethod
    def load(cls, directory: str | Path | None = None) -> "TemplateSet":
        """Load templates from ``directory``, defaulting to the packaged set."""
        values: dict[str, Any] = {}
        for attr, name in _FILES.items():
            if directory is not None:
                text = (Path(directory) / name).read_text(encoding="utf-8")
            else:
                text = resources.files(__package__).joinpath(
                    "templates", name).read_text(encoding="utf-8")
            values[attr] = json.loads(text) if name.endswith(".json") else text
        return cls(**values)
