"""Reading and writing study files.

JSON layout::

    {"studies": [{"label": "one_week_prior", "n_both": 6, "n_hazard_only": 164,
                  "n_control_only": 21, "n_neither": 508}]}

CSV uses the same names as a header row, one study per line.  Rows are the
hazard window and columns the control window: ``n_hazard_only`` counts pairs
exposed in the hazard window but not the control window.  Extra keys or
columns are ignored, so JSON reports written by the CLI can be read back.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterator, Union

from .core import ContingencyTable2x2

FIELDS = ("n_both", "n_hazard_only", "n_control_only", "n_neither")
BUNDLED = "cellphone_case_crossover.json"


class StudyFileError(ValueError):
    pass


@dataclass(frozen=True)
class Study:
    label: str
    table: ContingencyTable2x2

    def to_dict(self) -> dict:
        d = {"label": self.label}
        d.update({f: getattr(self.table, f) for f in FIELDS})
        return d


@dataclass(frozen=True)
class StudyFile:
    studies: tuple[Study, ...]

    def __post_init__(self) -> None:
        seen = set()
        for s in self.studies:
            if not s.label:
                raise StudyFileError("study labels must be non-empty")
            if s.label in seen:
                raise StudyFileError(f"duplicate study label {s.label!r}")
            seen.add(s.label)

    def __iter__(self) -> Iterator[Study]:
        return iter(self.studies)

    def __len__(self) -> int:
        return len(self.studies)

    def to_json(self) -> str:
        return json.dumps({"studies": [s.to_dict() for s in self.studies]}, indent=2)


def _parse_count(value: object, where: str, name: str) -> int:
    if isinstance(value, bool):
        raise StudyFileError(f"{where}: field {name!r} must be an integer, got {value!r}")
    if isinstance(value, str):
        try:
            value = int(value.strip())
        except ValueError:
            raise StudyFileError(
                f"{where}: field {name!r} must be an integer, got {value!r}"
            ) from None
    if not isinstance(value, int):
        raise StudyFileError(f"{where}: field {name!r} must be an integer, got {value!r}")
    return value


def _build(record: dict, where: str) -> Study:
    label = record.get("label")
    if not isinstance(label, str) or not label.strip():
        raise StudyFileError(f"{where}: missing or empty 'label'")
    counts = {}
    for name in FIELDS:
        if name not in record or record[name] in (None, ""):
            raise StudyFileError(f"{where}: missing field {name!r}")
        counts[name] = _parse_count(record[name], where, name)
    try:
        table = ContingencyTable2x2(**counts)
    except (TypeError, ValueError) as exc:
        raise StudyFileError(f"{where}: {exc}") from None
    return Study(label.strip(), table)


def parse_json(text: str, source: str = "<json>") -> StudyFile:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise StudyFileError(
            f"{source}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from None
    if not isinstance(data, dict) or not isinstance(data.get("studies"), list):
        raise StudyFileError(f"{source}: expected an object with a 'studies' list")
    studies = []
    for i, rec in enumerate(data["studies"]):
        if not isinstance(rec, dict):
            raise StudyFileError(f"{source}: studies[{i}] is not an object")
        studies.append(_build(rec, f"{source}: studies[{i}]"))
    return StudyFile(tuple(studies))


def parse_csv(text: str, source: str = "<csv>") -> StudyFile:
    reader = csv.DictReader(io.StringIO(text))
    header = reader.fieldnames or []
    missing = [f for f in ("label",) + FIELDS if f not in header]
    if missing:
        raise StudyFileError(f"{source}: line 1: header is missing {', '.join(missing)}")
    studies = []
    for row in reader:
        studies.append(_build(row, f"{source}: line {reader.line_num}"))
    return StudyFile(tuple(studies))


def load(path: Union[str, Path]) -> StudyFile:
    """Load a study file; the format is chosen by extension (``.csv`` or JSON)."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() == ".csv":
        return parse_csv(text, str(path))
    return parse_json(text, str(path))


def load_bundled() -> StudyFile:
    """The four control-window tables of the cellphone case-crossover study."""
    text = resources.files("matchsens").joinpath("data", BUNDLED).read_text(encoding="utf-8")
    return parse_json(text, BUNDLED)
