"""Render a profile's skill report to files: delimited tables plus charts.

Writes into an output directory:

* ``skills.csv``            — every assessed skill with level and evidence
* ``gaps.csv``              — the gap list against the next role
* ``recommendations.csv``   — ranked courses, when present
* ``skill_levels.png``      — top skills, current level bar chart
* ``gaps.png``              — required vs. current level per gap
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .skills import ProficiencyLevel
from .store import CandidateProfile

_LEVEL_TICKS = [level.value for level in ProficiencyLevel]
_LEVEL_LABELS = [level.label for level in ProficiencyLevel]


def write_profile_report(profile: CandidateProfile,
                         out_dir: str | Path) -> dict[str, Path]:
    """Write all report files for a profile; returns name → path."""
    report = profile.latest_report
    if report is None:
        raise ValueError("profile has no skill report to render")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths: dict[str, Path] = {}

    skills_path = out / "skills.csv"
    with open(skills_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["skill", "level", "months_experience",
                         "mention_count", "sources"])
        for item in report.assessed:
            writer.writerow([
                item.skill_name, item.level.label,
                item.evidence.months_experience, item.evidence.mention_count,
                "|".join(sorted(item.evidence.sources)),
            ])
    paths["skills"] = skills_path

    gaps_path = out / "gaps.csv"
    with open(gaps_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["skill", "required_level", "current_level",
                         "severity", "target_role"])
        for gap in report.gaps:
            writer.writerow([
                gap.skill_name, gap.required_level.label,
                gap.current_level.label if gap.current_level else "absent",
                gap.severity, gap.target_role_node_id,
            ])
    paths["gaps"] = gaps_path

    if profile.recommendations and profile.recommendations.courses:
        rec_path = out / "recommendations.csv"
        with open(rec_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["rank", "course_id", "title", "score", "url"])
            for rank, rec in enumerate(profile.recommendations.courses, start=1):
                writer.writerow([rank, rec.course.course_id, rec.course.title,
                                 f"{rec.score:.6f}", rec.course.url])
        paths["recommendations"] = rec_path

    paths["skill_levels_figure"] = _skill_levels_figure(report, out / "skill_levels.png")
    if report.gaps:
        paths["gaps_figure"] = _gaps_figure(report, out / "gaps.png")
    return paths


def _skill_levels_figure(report, path: Path) -> Path:
    top = [a for a in report.assessed if a.skill_name in report.top_skills]
    names = [a.skill_name for a in top][::-1]
    levels = [int(a.level) for a in top][::-1]
    fig, ax = plt.subplots(figsize=(7, max(2.5, 0.4 * len(names) + 1)))
    ax.barh(names, levels, color="#4a7ebb")
    ax.set_xlim(0, 4.2)
    ax.set_xticks(_LEVEL_TICKS, _LEVEL_LABELS)
    ax.set_title("Top skills by assessed proficiency")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def _gaps_figure(report, path: Path) -> Path:
    names = [g.skill_name for g in report.gaps][::-1]
    required = [int(g.required_level) for g in report.gaps][::-1]
    current = [int(g.current_level) if g.current_level else 0
               for g in report.gaps][::-1]
    positions = range(len(names))
    fig, ax = plt.subplots(figsize=(7, max(2.5, 0.5 * len(names) + 1)))
    ax.barh([p + 0.2 for p in positions], required, height=0.4,
            color="#c75d4d", label="required")
    ax.barh([p - 0.2 for p in positions], current, height=0.4,
            color="#4a7ebb", label="current")
    ax.set_yticks(list(positions), names)
    ax.set_xlim(0, 4.2)
    ax.set_xticks(_LEVEL_TICKS, _LEVEL_LABELS)
    ax.set_title("Skill gaps toward the next role")
    ax.legend(loc="lower right")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
