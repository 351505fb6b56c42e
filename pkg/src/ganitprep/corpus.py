"""Problem model, corpus ingestion, and line-delimited manifest persistence.

Three external corpus layouts are supported, all UTF-8 JSONL:

* grade-school QA records: ``{"question", "answer"}`` where the answer text
  ends with a final-answer marker line beginning ``"#### "``;
* competition records: ``{"problem", "level", "type", "solution"}`` with
  level strings like ``"Level 3"``;
* Hindi word-problem records: ``{"question", "operation"}`` plus an optional
  ``"solution"``, the operation tag being one of add/sub/mul/div
  (case-insensitive).

Internally every corpus is a :class:`CorpusManifest`: an immutable, ordered,
checksummed tuple of :class:`Problem` records. Manifests persist as one JSON
object per line behind a single JSON header line carrying the format version
and a sha256 checksum over the record lines, so a stale or corrupted file is
rejected at load time.

Question and solution text is normalized to Unicode NFC at ingestion so
Devanagari text from mixed sources compares stably. Unknown fields in source
records are preserved in the ``extras`` map.
"""

from __future__ import annotations

import hashlib
import json
import re
import unicodedata
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Iterator, Mapping

from ganitprep.errors import IntegrityError, RecordFormatError
from ganitprep.structure import StructuredSolution

MANIFEST_FORMAT = "ganitprep/manifest"
MANIFEST_VERSION = 1


class Language(Enum):
    ENGLISH = "English"
    HINDI = "Hindi"


class Source(Enum):
    GSM8K = "GSM8K"
    MATH = "MATH"
    HAWP = "HAWP"
    INDIMATHQA = "IndiMathQA"
    SYNTHETIC = "Synthetic"


class Difficulty(Enum):
    EASY = "Easy"
    MEDIUM = "Medium"
    HARD = "Hard"
    UNCLASSIFIED = "Unclassified"


class Operation(Enum):
    ADD = "Add"
    SUB = "Sub"
    MUL = "Mul"
    DIV = "Div"
    NONE = "None"


class SourceFormat(Enum):
    GSM8K = "gsm8k"
    MATH = "math"
    HAWP = "hawp"
    INDIMATHQA = "indimathqa"
    SYNTHETIC = "synthetic"
    MIXED = "mixed"


def nfc(text: str) -> str:
    return unicodedata.normalize("NFC", text)


@dataclass(frozen=True)
class Problem:
    id: str
    language: Language
    source: Source
    question: str
    pair_id: str = ""
    raw_solution: str | None = None
    structured_solution: StructuredSolution | None = None
    difficulty: Difficulty = Difficulty.UNCLASSIFIED
    topic: str | None = None
    operation: Operation = Operation.NONE
    math_level: int | None = None
    extras: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if not self.id:
            raise IntegrityError("problem id must be nonempty")
        if self.source is Source.MATH:
            if self.math_level is None or not 1 <= self.math_level <= 5:
                raise IntegrityError(
                    f"problem {self.id}: MATH source requires math_level in 1..5, "
                    f"got {self.math_level!r}"
                )
        elif self.math_level is not None:
            raise IntegrityError(
                f"problem {self.id}: math_level is only valid for MATH source"
            )

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "pair_id": self.pair_id,
            "language": self.language.value,
            "source": self.source.value,
            "question": self.question,
            "raw_solution": self.raw_solution,
            "structured_solution": (
                self.structured_solution.to_dict() if self.structured_solution else None
            ),
            "difficulty": self.difficulty.value,
            "topic": self.topic,
            "operation": self.operation.value,
            "math_level": self.math_level,
            "extras": dict(self.extras),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Problem":
        structured = data.get("structured_solution")
        return cls(
            id=data["id"],
            pair_id=data.get("pair_id", ""),
            language=Language(data["language"]),
            source=Source(data["source"]),
            question=data["question"],
            raw_solution=data.get("raw_solution"),
            structured_solution=(
                StructuredSolution.from_dict(structured) if structured else None
            ),
            difficulty=Difficulty(data.get("difficulty", "Unclassified")),
            topic=data.get("topic"),
            operation=Operation(data.get("operation", "None")),
            math_level=data.get("math_level"),
            extras=data.get("extras", {}),
        )


def _record_line(problem: Problem) -> str:
    return json.dumps(problem.to_dict(), sort_keys=True, ensure_ascii=False,
                      separators=(",", ":"))


def records_checksum(records: Iterable[Problem]) -> str:
    digest = hashlib.sha256()
    for problem in records:
        digest.update(_record_line(problem).encode("utf-8"))
        digest.update(b"\n")
    return "sha256:" + digest.hexdigest()


def _now_iso() -> str:
    return datetime.now(tz=timezone.utc).isoformat(timespec="seconds")


def _validate_records(records: tuple[Problem, ...]) -> None:
    seen: set[str] = set()
    pairs: dict[str, list[Problem]] = {}
    for problem in records:
        if problem.id in seen:
            raise IntegrityError(f"duplicate problem id: {problem.id}")
        seen.add(problem.id)
        if problem.pair_id:
            pairs.setdefault(problem.pair_id, []).append(problem)
    for pair_id, members in pairs.items():
        languages = {p.language for p in members}
        if len(languages) != len(members):
            raise IntegrityError(f"pair {pair_id}: members must have distinct languages")
        if len({p.source for p in members}) != 1:
            raise IntegrityError(f"pair {pair_id}: members must share one source")
        if len({p.difficulty for p in members}) != 1:
            raise IntegrityError(f"pair {pair_id}: members must share one difficulty")


@dataclass(frozen=True)
class CorpusManifest:
    records: tuple[Problem, ...]
    source_format: SourceFormat
    checksum: str
    created_at: str

    @classmethod
    def from_records(cls, records: Iterable[Problem], source_format: SourceFormat,
                     created_at: str | None = None) -> "CorpusManifest":
        records = tuple(records)
        _validate_records(records)
        return cls(
            records=records,
            source_format=source_format,
            checksum=records_checksum(records),
            created_at=created_at or _now_iso(),
        )

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[Problem]:
        return iter(self.records)

    def by_id(self, problem_id: str) -> Problem:
        try:
            return self._index[problem_id]
        except KeyError:
            raise KeyError(f"no problem with id {problem_id!r}") from None

    @property
    def _index(self) -> dict[str, Problem]:
        cached = self.__dict__.get("_index_cache")
        if cached is None:
            cached = {p.id: p for p in self.records}
            object.__setattr__(self, "_index_cache", cached)
        return cached

    def difficulty_counts(self) -> dict[Difficulty, int]:
        counts = {d: 0 for d in Difficulty}
        for problem in self.records:
            counts[problem.difficulty] += 1
        return {d: n for d, n in counts.items() if n}


def replace_records(manifest: CorpusManifest, records: Iterable[Problem],
                    source_format: SourceFormat | None = None) -> CorpusManifest:
    """New manifest with the given records; created_at carries over."""
    return CorpusManifest.from_records(
        records,
        source_format or manifest.source_format,
        created_at=manifest.created_at,
    )


def save_manifest(manifest: CorpusManifest, path) -> None:
    path = Path(path)
    header = {
        "format": MANIFEST_FORMAT,
        "version": MANIFEST_VERSION,
        "source_format": manifest.source_format.value,
        "created_at": manifest.created_at,
        "count": len(manifest.records),
        "checksum": manifest.checksum,
    }
    lines = [json.dumps(header, sort_keys=True, ensure_ascii=False, separators=(",", ":"))]
    lines.extend(_record_line(p) for p in manifest.records)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_manifest(path) -> CorpusManifest:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    lines = text.splitlines()
    if not lines:
        raise IntegrityError(f"{path}: empty manifest file")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise IntegrityError(f"{path}: unreadable manifest header: {exc}") from exc
    if header.get("format") != MANIFEST_FORMAT:
        raise IntegrityError(f"{path}: not a manifest file (format {header.get('format')!r})")
    if header.get("version") != MANIFEST_VERSION:
        raise IntegrityError(f"{path}: unsupported manifest version {header.get('version')!r}")
    records = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            records.append(Problem.from_dict(json.loads(line)))
        except (json.JSONDecodeError, KeyError, ValueError) as exc:
            raise IntegrityError(f"{path}:{lineno}: unreadable record: {exc}") from exc
    if header.get("count") != len(records):
        raise IntegrityError(
            f"{path}: header count {header.get('count')} != {len(records)} records"
        )
    checksum = records_checksum(records)
    if checksum != header.get("checksum"):
        raise IntegrityError(
            f"{path}: checksum mismatch (header {header.get('checksum')}, "
            f"recomputed {checksum})"
        )
    manifest = CorpusManifest.from_records(
        records,
        SourceFormat(header["source_format"]),
        created_at=header["created_at"],
    )
    return manifest


def file_created_at(path) -> str:
    # Derived from the source file, not the wall clock, so re-running an
    # ingest over the same input produces byte-identical output.
    mtime = Path(path).stat().st_mtime
    return datetime.fromtimestamp(mtime, tz=timezone.utc).isoformat(timespec="seconds")


def _iter_jsonl(path: Path):
    with path.open(encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise RecordFormatError(f"{path}: invalid JSON at line {lineno}: {exc}") from exc
            if not isinstance(record, dict):
                raise RecordFormatError(f"{path}: record at line {lineno} is not an object")
            yield lineno, record


def _require(record: dict, name: str, path: Path, lineno: int) -> str:
    value = record.get(name)
    if not isinstance(value, str) or not value.strip():
        raise RecordFormatError(f"{path}: missing field {name!r} at line {lineno}")
    return value


_FINAL_MARKER_RE = re.compile(r"^#### ", re.MULTILINE)


def ingest_gsm8k(path) -> CorpusManifest:
    """Load grade-school QA records; each answer must carry a "#### " marker line."""
    path = Path(path)
    records = []
    for lineno, record in _iter_jsonl(path):
        question = _require(record, "question", path, lineno)
        answer = _require(record, "answer", path, lineno)
        if not _FINAL_MARKER_RE.search(answer):
            raise RecordFormatError(f"{path}: no final-answer marker at line {lineno}")
        extras = {k: v for k, v in record.items() if k not in ("question", "answer")}
        records.append(Problem(
            id=f"gsm8k-{lineno:06d}",
            language=Language.ENGLISH,
            source=Source.GSM8K,
            question=nfc(question),
            raw_solution=nfc(answer),
            extras=extras,
        ))
    return CorpusManifest.from_records(records, SourceFormat.GSM8K,
                                       created_at=file_created_at(path))


_LEVEL_RE = re.compile(r"^\s*Level\s+(\d+)\s*$")


def ingest_math(path) -> CorpusManifest:
    """Load competition records, parsing "Level N" strings to levels 1..5."""
    path = Path(path)
    records = []
    for lineno, record in _iter_jsonl(path):
        question = _require(record, "problem", path, lineno)
        level_text = _require(record, "level", path, lineno)
        solution = _require(record, "solution", path, lineno)
        topic = record.get("type")
        match = _LEVEL_RE.match(level_text)
        if not match:
            raise RecordFormatError(
                f"{path}: unparseable level {level_text!r} at line {lineno}"
            )
        level = int(match.group(1))
        if not 1 <= level <= 5:
            raise RecordFormatError(
                f"{path}: level {level} outside 1..5 at line {lineno}"
            )
        extras = {k: v for k, v in record.items()
                  if k not in ("problem", "level", "type", "solution")}
        records.append(Problem(
            id=f"math-{lineno:06d}",
            language=Language.ENGLISH,
            source=Source.MATH,
            question=nfc(question),
            raw_solution=nfc(solution),
            topic=topic,
            math_level=level,
            extras=extras,
        ))
    return CorpusManifest.from_records(records, SourceFormat.MATH,
                                       created_at=file_created_at(path))


_OPERATION_TAGS = {
    "add": Operation.ADD,
    "sub": Operation.SUB,
    "mul": Operation.MUL,
    "div": Operation.DIV,
}


def ingest_hawp(path) -> CorpusManifest:
    """Load Hindi single-operator word problems with their operation tags."""
    path = Path(path)
    records = []
    for lineno, record in _iter_jsonl(path):
        question = _require(record, "question", path, lineno)
        tag = _require(record, "operation", path, lineno)
        operation = _OPERATION_TAGS.get(tag.strip().lower())
        if operation is None:
            valid = ", ".join(sorted(_OPERATION_TAGS))
            raise RecordFormatError(
                f"{path}: unknown operation tag {tag!r} at line {lineno} "
                f"(valid tags: {valid})"
            )
        solution = record.get("solution")
        extras = {k: v for k, v in record.items()
                  if k not in ("question", "operation", "solution")}
        records.append(Problem(
            id=f"hawp-{lineno:06d}",
            language=Language.HINDI,
            source=Source.HAWP,
            question=nfc(question),
            raw_solution=nfc(solution) if isinstance(solution, str) else None,
            operation=operation,
            extras=extras,
        ))
    return CorpusManifest.from_records(records, SourceFormat.HAWP,
                                       created_at=file_created_at(path))


def update_problem(problem: Problem, **changes) -> Problem:
    return replace(problem, **changes)
