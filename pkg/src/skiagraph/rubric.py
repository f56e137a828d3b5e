"""Complexity scoring of torus shade construction methods.

Scores run from 1 (straightforward) to 5 (highly intricate). More than 30
steps scores 5 outright. Otherwise every extra drawing and every angle
calculation (at most five) adds a point, and ten or more steps add one.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

AUTO_CAP_STEPS = 30
ANGLE_CAP = 5
STEP_BONUS_THRESHOLD = 10
PROFILE_COLUMNS = ("name", "steps", "extra_drawings", "angles", "multiple_projection",
                   "published_score", "citation")


class ParseError(ValueError):
    def __init__(self, row: int, message: str):
        super().__init__(f"row {row}: {message}")
        self.row = row


@dataclass(frozen=True)
class MethodProfile:
    name: str
    steps: int
    extra_drawings: int = 0
    angles: int = 0
    multiple_projection: bool = False
    citation: str = ""
    published_score: int | None = None
    note: str = ""

    def __post_init__(self):
        if self.steps < 1 or self.extra_drawings < 0 or self.angles < 0:
            raise ValueError(f"invalid counts for {self.name!r}")


@dataclass(frozen=True)
class ComplexityScore:
    value: int
    drawing_points: int
    angle_points: int
    step_points: int
    auto_capped: bool = field(default=False)


def score(profile: MethodProfile) -> ComplexityScore:
    angle_points = min(profile.angles, ANGLE_CAP)
    step_points = 1 if profile.steps >= STEP_BONUS_THRESHOLD else 0
    if profile.steps > AUTO_CAP_STEPS:
        return ComplexityScore(5, profile.extra_drawings, angle_points, step_points, True)
    raw = 1 + profile.extra_drawings + angle_points + step_points
    return ComplexityScore(max(1, min(5, raw)), profile.extra_drawings, angle_points, step_points)


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("yes", "true", "1", "do"):
        return True
    if t in ("no", "false", "0"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def parse_profiles(text: str) -> list[MethodProfile]:
    reader = csv.DictReader(text.splitlines())
    missing = [c for c in PROFILE_COLUMNS if c not in (reader.fieldnames or [])]
    if missing:
        raise ParseError(0, f"missing columns {missing}")
    out = []
    for i, row in enumerate(reader, start=1):
        try:
            if None in row or any(row[c] is None for c in PROFILE_COLUMNS):
                raise ValueError("wrong number of fields")
            published = row["published_score"].strip()
            out.append(MethodProfile(
                name=row["name"].strip(),
                steps=int(row["steps"]),
                extra_drawings=int(row["extra_drawings"]),
                angles=int(row["angles"]),
                multiple_projection=_bool(row["multiple_projection"]),
                citation=row["citation"].strip(),
                published_score=int(published) if published else None,
                note=(row.get("note") or "").strip(),
            ))
        except ValueError as exc:
            raise ParseError(i, str(exc)) from exc
    return out


def load_method_profiles(path: str | Path | None = None) -> list[MethodProfile]:
    """Profiles from a CSV file; the bundled Table 1 data when ``path`` is None."""
    if path is None:
        text = resources.files("skiagraph").joinpath("data/table1.csv").read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    return parse_profiles(text)


def proposed_method_profile() -> MethodProfile:
    from .construction import TorusElevationSpec, run_construction

    steps = len(run_construction(TorusElevationSpec(6, 2)).steps)
    return MethodProfile("Proposed elevation-only construction", steps, 0, 0, False,
                         "this package", published_score=2)
