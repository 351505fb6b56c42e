import json
import unicodedata

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_manifest, make_problem, write_jsonl
from ganitprep.corpus import (
    Difficulty,
    Language,
    Operation,
    Problem,
    Source,
    ingest_gsm8k,
    ingest_hawp,
    ingest_math,
    load_manifest,
    save_manifest,
)
from ganitprep.errors import IntegrityError, RecordFormatError
from ganitprep.structure import StructuredSolution
from ganitprep.answers import AnswerValue


class TestIngestGsm8k:
    def test_basic_record(self, tmp_path):
        path = tmp_path / "g.jsonl"
        write_jsonl(path, [{"question": "2+2 apples, how many?", "answer": "2+2=4\n#### 4"}])
        manifest = ingest_gsm8k(path)
        assert len(manifest) == 1
        problem = manifest.records[0]
        assert problem.source is Source.GSM8K
        assert problem.language is Language.ENGLISH
        assert problem.difficulty is Difficulty.UNCLASSIFIED
        assert problem.raw_solution.endswith("#### 4")

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.jsonl"
        path.write_text("", encoding="utf-8")
        manifest = ingest_gsm8k(path)
        assert len(manifest) == 0
        assert manifest.checksum == make_manifest([]).checksum

    def test_missing_marker_names_line(self, tmp_path):
        path = tmp_path / "g.jsonl"
        write_jsonl(path, [
            {"question": "ok?", "answer": "fine\n#### 1"},
            {"question": "bad?", "answer": "no marker here"},
        ])
        with pytest.raises(RecordFormatError, match="no final-answer marker at line 2"):
            ingest_gsm8k(path)

    def test_missing_field_names_line(self, tmp_path):
        path = tmp_path / "g.jsonl"
        write_jsonl(path, [{"question": "only question"}])
        with pytest.raises(RecordFormatError, match="line 1"):
            ingest_gsm8k(path)

    def test_extras_preserved(self, tmp_path):
        path = tmp_path / "g.jsonl"
        write_jsonl(path, [{"question": "q?", "answer": "#### 1", "split": "train"}])
        manifest = ingest_gsm8k(path)
        assert manifest.records[0].extras == {"split": "train"}

    def test_order_preserved(self, tmp_path):
        path = tmp_path / "g.jsonl"
        write_jsonl(path, [{"question": f"q{i}?", "answer": f"#### {i}"} for i in range(5)])
        manifest = ingest_gsm8k(path)
        assert [p.question for p in manifest] == [f"q{i}?" for i in range(5)]


class TestIngestMath:
    def _write(self, path, level):
        write_jsonl(path, [{"problem": "p?", "level": level, "type": "Algebra",
                            "solution": "s \\boxed{1}"}])

    @pytest.mark.parametrize("level,expected", [("Level 1", 1), ("Level 5", 5)])
    def test_level_parse(self, tmp_path, level, expected):
        path = tmp_path / "m.jsonl"
        self._write(path, level)
        manifest = ingest_math(path)
        assert manifest.records[0].math_level == expected
        assert manifest.records[0].topic == "Algebra"

    def test_level_out_of_range(self, tmp_path):
        path = tmp_path / "m.jsonl"
        self._write(path, "Level 9")
        with pytest.raises(RecordFormatError, match="outside 1..5"):
            ingest_math(path)

    def test_level_unparseable(self, tmp_path):
        path = tmp_path / "m.jsonl"
        self._write(path, "Lvl three")
        with pytest.raises(RecordFormatError, match="unparseable level"):
            ingest_math(path)


class TestIngestHawp:
    def test_counts_and_tags(self, tmp_path):
        path = tmp_path / "h.jsonl"
        write_jsonl(path, [
            {"question": "राम के पास कितने आम हैं?", "operation": "mul", "solution": "5 × 3 = 15"},
            {"question": "कितने बचे?", "operation": "Sub"},
        ])
        manifest = ingest_hawp(path)
        assert len(manifest) == 2
        assert manifest.records[0].operation is Operation.MUL
        assert manifest.records[1].operation is Operation.SUB
        assert manifest.records[1].raw_solution is None
        assert all(p.language is Language.HINDI for p in manifest)

    def test_unknown_tag_lists_valid(self, tmp_path):
        path = tmp_path / "h.jsonl"
        write_jsonl(path, [{"question": "q?", "operation": "mod"}])
        with pytest.raises(RecordFormatError, match="add, div, mul, sub"):
            ingest_hawp(path)

    def test_nfc_normalization(self, tmp_path):
        # क़ composed (U+0958) vs क + nukta; ingestion must settle on NFC.
        decomposed = "क़"
        path = tmp_path / "h.jsonl"
        write_jsonl(path, [{"question": decomposed, "operation": "add"}])
        manifest = ingest_hawp(path)
        assert manifest.records[0].question == unicodedata.normalize("NFC", decomposed)


class TestProblemInvariants:
    def test_empty_id_rejected(self):
        with pytest.raises(IntegrityError):
            make_problem("")

    def test_math_requires_level(self):
        with pytest.raises(IntegrityError, match="math_level"):
            Problem(id="x", language=Language.ENGLISH, source=Source.MATH, question="q")

    def test_level_only_for_math(self):
        with pytest.raises(IntegrityError, match="only valid for MATH"):
            make_problem("x", source=Source.GSM8K, math_level=2)

    def test_duplicate_ids_rejected(self):
        with pytest.raises(IntegrityError, match="duplicate"):
            make_manifest([make_problem("a"), make_problem("a")])

    def test_pair_same_language_rejected(self):
        problems = [make_problem("a", pair_id="p"), make_problem("b", pair_id="p")]
        with pytest.raises(IntegrityError, match="distinct languages"):
            make_manifest(problems)

    def test_pair_difficulty_mismatch_rejected(self):
        problems = [
            make_problem("a", pair_id="p", difficulty=Difficulty.EASY),
            make_problem("b", pair_id="p", language=Language.HINDI,
                         difficulty=Difficulty.MEDIUM),
        ]
        with pytest.raises(IntegrityError, match="share one difficulty"):
            make_manifest(problems)


class TestPersistence:
    def _sample_manifest(self):
        solution = StructuredSolution(
            data_identification="two and two",
            problem_analysis="add them",
            theoretical_framework="addition",
            methodology_development="sum the values",
            computation="2 + 2 = 4",
            answer="4",
            final_answer=AnswerValue.from_rational(4),
        )
        problems = [
            make_problem("a", question="क्या है?", language=Language.HINDI,
                         source=Source.HAWP, operation=Operation.ADD,
                         raw_solution="2 + 2 = 4"),
            make_problem("b", structured_solution=solution,
                         difficulty=Difficulty.EASY, extras={"k": "v"}),
            make_problem("c", source=Source.MATH, math_level=3, topic="Geometry"),
        ]
        return make_manifest(problems)

    def test_round_trip_identity(self, tmp_path):
        manifest = self._sample_manifest()
        path = tmp_path / "m.jsonl"
        save_manifest(manifest, path)
        assert load_manifest(path) == manifest

    def test_corrupted_byte_fails_checksum(self, tmp_path):
        manifest = self._sample_manifest()
        path = tmp_path / "m.jsonl"
        save_manifest(manifest, path)
        data = path.read_bytes()
        # flip one byte inside a record's string value; the file stays valid
        # JSONL so only the checksum can catch it
        index = data.index(b"two and two")
        corrupted = data[:index] + b"twX" + data[index + 3:]
        (tmp_path / "bad.jsonl").write_bytes(corrupted)
        with pytest.raises(IntegrityError, match="checksum"):
            load_manifest(tmp_path / "bad.jsonl")

    def test_stale_checksum_rejected(self, tmp_path):
        manifest = self._sample_manifest()
        path = tmp_path / "m.jsonl"
        save_manifest(manifest, path)
        lines = path.read_text(encoding="utf-8").splitlines()
        header = json.loads(lines[0])
        header["checksum"] = "sha256:" + "0" * 64
        lines[0] = json.dumps(header)
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        with pytest.raises(IntegrityError, match="checksum mismatch"):
            load_manifest(path)

    def test_load_missing_path(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_manifest(tmp_path / "nope.jsonl")

    def test_byte_identical_rewrites(self, tmp_path):
        manifest = self._sample_manifest()
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        save_manifest(manifest, a)
        save_manifest(manifest, b)
        assert a.read_bytes() == b.read_bytes()


_text = st.text(
    alphabet=st.characters(
        whitelist_categories=("L", "N", "P", "Zs"),
        whitelist_characters="ऄअआइईउऊकखगघङचछजझञटठडढणतथदधनपफबभमयरलवशषसह०१२३४५६७८९",
    ),
    min_size=1,
    max_size=40,
)


@st.composite
def _problems(draw):
    count = draw(st.integers(min_value=0, max_value=8))
    problems = []
    for i in range(count):
        language = draw(st.sampled_from(list(Language)))
        source = draw(st.sampled_from([Source.GSM8K, Source.HAWP, Source.INDIMATHQA]))
        problems.append(Problem(
            id=f"p{i:03d}",
            language=language,
            source=source,
            question=draw(_text),
            raw_solution=draw(st.one_of(st.none(), _text)),
            difficulty=draw(st.sampled_from(list(Difficulty))),
            topic=draw(st.one_of(st.none(), _text)),
            operation=draw(st.sampled_from(list(Operation))),
            extras=draw(st.dictionaries(st.sampled_from(["k1", "k2"]), _text, max_size=2)),
        ))
    return problems


@settings(max_examples=50, deadline=None)
@given(_problems())
def test_round_trip_property(tmp_path_factory, problems):
    manifest = make_manifest(problems)
    path = tmp_path_factory.mktemp("rt") / "m.jsonl"
    save_manifest(manifest, path)
    assert load_manifest(path) == manifest
