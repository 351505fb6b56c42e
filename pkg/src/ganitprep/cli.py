"""Command-line entry point composing the pipeline end to end.

Exit codes: 0 success, 1 stage failure, 2 usage error. Every stage prints a
summary line ``stage=<name> in=<n> out=<n> flagged=<n>``; failures print a
single machine-parseable ``error="..."`` line on stderr. Output is plain
text throughout (nothing colorized, so NO_COLOR needs no special casing).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass
from importlib import resources
from pathlib import Path

from ganitprep import classify as classify_mod
from ganitprep import curriculum as curriculum_mod
from ganitprep import decompose as decompose_mod
from ganitprep import evaluate as evaluate_mod
from ganitprep import llm_client
from ganitprep import structure as structure_mod
from ganitprep.corpus import (
    CorpusManifest,
    Language,
    Operation,
    Problem,
    Source,
    SourceFormat,
    file_created_at,
    ingest_gsm8k,
    ingest_hawp,
    ingest_math,
    load_manifest,
    nfc,
    save_manifest,
)
from ganitprep.errors import PipelineError


def _summary(stage: str, count_in: int, count_out: int, flagged: int = 0,
             stream=None) -> None:
    print(f"stage={stage} in={count_in} out={count_out} flagged={flagged}",
          file=stream or sys.stdout)


def _parse_language(value: str) -> Language | None:
    return {"auto": None, "en": Language.ENGLISH, "hi": Language.HINDI}[value]


# ---------------------------------------------------------------------------
# subcommand handlers


def _cmd_ingest(args) -> int:
    ingestors = {"gsm8k": ingest_gsm8k, "math": ingest_math, "hawp": ingest_hawp}
    manifest = ingestors[args.format](args.infile)
    save_manifest(manifest, args.out)
    _summary("ingest", len(manifest), len(manifest))
    return 0


def _cmd_classify(args) -> int:
    manifest = load_manifest(args.infile)
    if args.math_levels:
        result = classify_mod.apply_math_levels(manifest)
    elif args.annotations:
        annotations = classify_mod.read_annotations(args.annotations)
        outcome = classify_mod.apply_annotations(manifest, annotations)
        result = outcome.manifest
        counts = ", ".join(f"{d.value}={n}" for d, n in sorted(
            outcome.counts.items(), key=lambda item: item[0].value))
        print(f"annotated: {counts}")
    else:
        if args.bottom_k is None:
            raise PipelineError("--score requires --bottom-k N")
        result = classify_mod.rank_bottom_k(manifest, args.bottom_k)
    save_manifest(result, args.out)
    _summary("classify", len(manifest), len(result))
    return 0


def _cmd_decompose(args) -> int:
    manifest = load_manifest(args.infile)
    operations = []
    for name in args.ops.split(","):
        name = name.strip().lower()
        if name not in ("mul", "div"):
            raise PipelineError(f"unsupported decomposition op {name!r}")
        operations.append(Operation.MUL if name == "mul" else Operation.DIV)
    outcome = decompose_mod.apply_decomposition(
        manifest, operations=operations, language=_parse_language(args.lang))
    save_manifest(outcome.manifest, args.out)
    print(f"rewritten={outcome.rewritten} skipped={outcome.skipped}")
    _summary("decompose", len(manifest), len(outcome.manifest), outcome.skipped)
    return 0


def _read_bindings(path) -> dict:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(data, dict):
        raise PipelineError(f"{path}: bindings file must hold a JSON object")
    return data


def _cmd_structure(args) -> int:
    if args.action == "parse":
        text = Path(args.infile).read_text(encoding="utf-8")
        solution = structure_mod.parse_structured(text)
        rendered = structure_mod.render_structured(
            solution, _parse_language(args.lang) or Language.ENGLISH)
        _write_or_print(rendered, args.out)
        _summary("structure", 1, 1, stream=sys.stderr if not args.out else None)
        return 0
    if args.action == "render":
        data = json.loads(Path(args.infile).read_text(encoding="utf-8"))
        solution = structure_mod.StructuredSolution.from_dict(data)
        rendered = structure_mod.render_structured(
            solution, _parse_language(args.lang) or Language.ENGLISH)
        _write_or_print(rendered, args.out)
        _summary("structure", 1, 1, stream=sys.stderr if not args.out else None)
        return 0
    if args.action == "prompt":
        template = structure_mod.get_template(args.template)
        bindings = _read_bindings(args.bindings)
        rendered = structure_mod.render_prompt(template, bindings)
        _write_or_print(rendered, args.out)
        _summary("structure", 1, 1, stream=sys.stderr if not args.out else None)
        return 0
    structure_mod.emit_training_config(args.out)
    _summary("structure", 0, 1)
    return 0


def _write_or_print(text: str, out_path) -> None:
    if out_path:
        Path(out_path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _cmd_curriculum(args) -> int:
    if args.action == "pair":
        en = load_manifest(args.en)
        hi = load_manifest(args.hi)
        key = curriculum_mod.PairKey.BY_ID if args.key == "byid" else \
            curriculum_mod.PairKey.BY_INDEX
        paired = curriculum_mod.pair_bilingual(en, hi, key)
        save_manifest(paired, args.out)
        _summary("curriculum-pair", len(en) + len(hi), len(paired))
        return 0
    if args.action == "merge":
        manifests = [load_manifest(p) for p in args.infiles]
        outcome = curriculum_mod.merge_sources(manifests)
        save_manifest(outcome.manifest, args.out)
        totals = ", ".join(f"{d.value}={n}" for d, n in sorted(
            outcome.totals.items(), key=lambda item: item[0].value))
        print(f"totals: {totals}")
        _summary("curriculum-merge", sum(len(m) for m in manifests),
                 len(outcome.manifest))
        return 0
    if args.action == "split":
        manifest = load_manifest(args.infile)
        assignment = curriculum_mod.split(manifest, seed=args.seed, ratio=args.ratio)
        curriculum_mod.save_split(assignment, args.out)
        _summary("curriculum-split", len(manifest), len(assignment.assignments))
        return 0
    if args.action == "build":
        manifest = load_manifest(args.infile)
        assignment = curriculum_mod.load_split(args.split)
        built = curriculum_mod.build_curriculum(
            manifest, assignment,
            mode=curriculum_mod.TrainingMode(args.mode),
            cumulative=args.cumulative,
        )
        curriculum_mod.save_curriculum(built, args.out)
        _summary("curriculum-build", len(manifest),
                 sum(len(stage.train_ids) for stage in built.stages))
        return 0
    manifest = load_manifest(args.manifest)
    built = curriculum_mod.load_curriculum(args.curriculum)
    outcome = curriculum_mod.export_stage(built, args.stage, manifest, args.out,
                                          seed=args.seed)
    print(f"exported={outcome.exported} skipped={outcome.skipped}")
    _summary("curriculum-export", len(built.stage(args.stage).train_ids),
             outcome.exported, outcome.skipped)
    return 0


def _cmd_augment(args) -> int:
    manifest = load_manifest(args.infile)
    config = llm_client.load_client_config(args.config)
    client = llm_client.make_client(config)
    template = structure_mod.get_template(args.template)
    outcome = llm_client.augment_batch(manifest, template, args.target, client)
    save_manifest(outcome.manifest, args.out)
    _summary("augment", len(manifest), len(outcome.manifest), outcome.discarded)
    return 0


def _cmd_evaluate(args) -> int:
    if args.action == "grade":
        manifest = load_manifest(args.manifest)
        predictions = evaluate_mod.read_predictions(args.pred)
        grades = evaluate_mod.grade_predictions(predictions, manifest, args.model)
        evaluate_mod.save_grades(grades, args.out)
        correct = sum(g.verdict is evaluate_mod.Verdict.CORRECT for g in grades)
        unparseable = sum(g.verdict is evaluate_mod.Verdict.UNPARSEABLE for g in grades)
        print(f"graded={len(grades)} correct={correct} unparseable={unparseable}")
        _summary("evaluate-grade", len(predictions), len(grades))
        return 0
    if args.action == "report":
        manifest = load_manifest(args.manifest)
        grades = []
        for path in args.grades:
            grades.extend(evaluate_mod.load_grades(path))
        report = evaluate_mod.accuracy_report(grades, manifest)
        rendered = report.render_table() if args.format == "table" else report.to_csv()
        if args.out:
            Path(args.out).write_text(rendered, encoding="utf-8")
            companion = Path(args.out).with_suffix(".csv")
            companion.write_text(report.to_csv(), encoding="utf-8")
        else:
            sys.stdout.write(rendered)
        _summary("evaluate-report", len(grades), len(report.cells),
                 stream=sys.stderr if not args.out else None)
        return 0
    counts = evaluate_mod.read_counts_matrix(args.counts)
    kappa = evaluate_mod.fleiss_kappa(counts)
    print(f"kappa={kappa:.6f}")
    _summary("evaluate-kappa", len(counts), 1)
    return 0


def _cmd_kappa(args) -> int:
    counts = evaluate_mod.read_counts_matrix(args.counts)
    kappa = evaluate_mod.fleiss_kappa(counts)
    print(f"kappa={kappa:.6f}")
    _summary("kappa", len(counts), 1)
    return 0


# ---------------------------------------------------------------------------
# pipeline config


@dataclass
class PipelineConfig:
    gsm8k_path: str = ""
    math_path: str = ""
    hawp_path: str = ""
    indimathqa_en_path: str = ""
    indimathqa_hi_path: str = ""
    annotations_path: str = ""
    predictions_path: str = ""
    out_dir: str = "demo_out"
    seed: int = 7
    ratio: float = 0.70
    mode: str = "bilingual"
    cumulative: bool = False
    provider_config: str = ""
    log_level: str = "INFO"

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise PipelineError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    def input_paths(self) -> list[str]:
        return [p for p in (
            self.gsm8k_path, self.math_path, self.hawp_path,
            self.indimathqa_en_path, self.indimathqa_hi_path,
            self.annotations_path, self.predictions_path,
        ) if p]


def load_pipeline_config(path) -> PipelineConfig:
    return PipelineConfig.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def save_pipeline_config(config: PipelineConfig, path) -> None:
    Path(path).write_text(json.dumps(config.to_dict(), indent=1, sort_keys=True) + "\n",
                          encoding="utf-8")


# ---------------------------------------------------------------------------
# demo


def _demo_data_dir() -> Path:
    return Path(str(resources.files("ganitprep") / "data" / "demo"))


def _load_simple_corpus(path, source: Source, language: Language) -> CorpusManifest:
    """Load an id/question/solution JSONL fixture (curated-corpus layout)."""
    records = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        data = json.loads(line)
        records.append(Problem(
            id=data["id"],
            language=language,
            source=source,
            question=nfc(data["question"]),
            raw_solution=nfc(data["solution"]) if data.get("solution") else None,
            topic=data.get("topic"),
        ))
    fmt = SourceFormat.INDIMATHQA if source is Source.INDIMATHQA else SourceFormat.MIXED
    return CorpusManifest.from_records(records, fmt,
                                       created_at=file_created_at(path))


def _cmd_demo(args) -> int:
    if args.config:
        config = load_pipeline_config(args.config)
    else:
        config = PipelineConfig()
    if args.out:
        config.out_dir = args.out
    data_dir = _demo_data_dir()
    defaults = {
        "gsm8k_path": data_dir / "gsm8k.jsonl",
        "math_path": data_dir / "math.jsonl",
        "hawp_path": data_dir / "hawp.jsonl",
        "indimathqa_en_path": data_dir / "indimathqa_en.jsonl",
        "indimathqa_hi_path": data_dir / "indimathqa_hi.jsonl",
        "annotations_path": data_dir / "annotations.tsv",
        "predictions_path": data_dir / "predictions.tsv",
    }
    for name, default in defaults.items():
        if not getattr(config, name):
            setattr(config, name, str(default))
    missing = [p for p in config.input_paths() if not Path(p).exists()]
    if missing:
        raise PipelineError(f"missing input paths: {', '.join(missing)}")

    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    gsm8k = ingest_gsm8k(config.gsm8k_path)
    _summary("ingest-gsm8k", len(gsm8k), len(gsm8k))
    math = ingest_math(config.math_path)
    _summary("ingest-math", len(math), len(math))
    hawp = ingest_hawp(config.hawp_path)
    _summary("ingest-hawp", len(hawp), len(hawp))
    imqa_en = _load_simple_corpus(config.indimathqa_en_path, Source.INDIMATHQA,
                                  Language.ENGLISH)
    imqa_hi = _load_simple_corpus(config.indimathqa_hi_path, Source.INDIMATHQA,
                                  Language.HINDI)
    _summary("ingest-indimathqa", len(imqa_en) + len(imqa_hi),
             len(imqa_en) + len(imqa_hi))

    gsm8k = classify_mod.rank_bottom_k(gsm8k, k=min(10, len(gsm8k)))
    math = classify_mod.apply_math_levels(math)
    annotations = classify_mod.read_annotations(config.annotations_path)
    en_notes = {k: v for k, v in annotations.items() if k.endswith("-en")}
    hi_notes = {k: v for k, v in annotations.items() if k.endswith("-hi")}
    imqa_en = classify_mod.apply_annotations(imqa_en, en_notes).manifest
    imqa_hi = classify_mod.apply_annotations(imqa_hi, hi_notes).manifest
    classified_total = len(gsm8k) + len(math) + len(imqa_en) + len(imqa_hi)
    _summary("classify", classified_total, classified_total)

    outcome = decompose_mod.apply_decomposition(hawp)
    hawp = outcome.manifest
    save_manifest(hawp, out_dir / "hawp_decomposed.jsonl")
    print(f"rewritten={outcome.rewritten} skipped={outcome.skipped}")
    _summary("decompose", len(hawp), len(hawp), outcome.skipped)

    paired = curriculum_mod.pair_bilingual(imqa_en, imqa_hi,
                                           curriculum_mod.PairKey.BY_INDEX)
    merged_outcome = curriculum_mod.merge_sources([gsm8k, math, paired])
    merged = merged_outcome.manifest
    save_manifest(merged, out_dir / "merged.jsonl")
    _summary("merge", len(gsm8k) + len(math) + len(paired), len(merged))

    assignment = curriculum_mod.split(merged, seed=config.seed, ratio=config.ratio)
    curriculum_mod.save_split(assignment, out_dir / "split.json")
    _summary("split", len(merged), len(assignment.assignments))

    built = curriculum_mod.build_curriculum(
        merged, assignment,
        mode=curriculum_mod.TrainingMode(config.mode),
        cumulative=config.cumulative,
    )
    curriculum_mod.save_curriculum(built, out_dir / "curriculum.json")
    _summary("build", len(merged), sum(len(s.train_ids) for s in built.stages))

    for stage in built.stages:
        safe = stage.name.replace("+", "_")
        export = curriculum_mod.export_stage(
            built, stage.name, merged, out_dir / f"train_{safe}.jsonl",
            seed=config.seed)
        print(f"exported={export.exported} skipped={export.skipped}")
        _summary(f"export-{stage.name}", len(stage.train_ids), export.exported,
                 export.skipped)
    structure_mod.emit_training_config(out_dir / "training_config.txt")

    predictions = evaluate_mod.read_predictions(config.predictions_path)
    grades = evaluate_mod.grade_predictions(predictions, merged, "demo-model")
    evaluate_mod.save_grades(grades, out_dir / "grades.jsonl")
    report = evaluate_mod.accuracy_report(grades, merged)
    (out_dir / "report.txt").write_text(report.render_table(), encoding="utf-8")
    (out_dir / "report.csv").write_text(report.to_csv(), encoding="utf-8")
    sys.stdout.write(report.render_table())
    _summary("evaluate", len(grades), len(report.cells))
    return 0


# ---------------------------------------------------------------------------
# parser wiring


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ganitprep",
        description="Bilingual math-reasoning training-data pipeline "
                    "and evaluation harness.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="ingest an external corpus into a manifest")
    p.add_argument("--format", required=True, choices=["gsm8k", "math", "hawp"])
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("classify", help="assign difficulties")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--math-levels", action="store_true",
                       help="map published levels to difficulties")
    group.add_argument("--score", action="store_true",
                       help="feature-score the corpus (requires --bottom-k)")
    group.add_argument("--annotations", metavar="FILE",
                       help="id<TAB>difficulty annotation file")
    p.add_argument("--bottom-k", type=int, metavar="N",
                   help="with --score: mark the N lowest-complexity problems Easy")
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("decompose", help="rewrite Mul/Div solutions as "
                                         "place-value decompositions")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--ops", default="mul,div")
    p.add_argument("--lang", default="auto", choices=["auto", "en", "hi"])
    p.set_defaults(func=_cmd_decompose)

    p = sub.add_parser("structure", help="structured solutions and prompts")
    actions = p.add_subparsers(dest="action", required=True)
    a = actions.add_parser("parse", help="validate and canonicalize a solution text")
    a.add_argument("--in", dest="infile", required=True)
    a.add_argument("--lang", default="en", choices=["en", "hi"])
    a.add_argument("--out")
    a = actions.add_parser("render", help="render solution sections from JSON")
    a.add_argument("--in", dest="infile", required=True)
    a.add_argument("--lang", default="en", choices=["en", "hi"])
    a.add_argument("--out")
    a = actions.add_parser("prompt", help="instantiate a prompt template")
    a.add_argument("--template", required=True,
                   choices=[n.value for n in structure_mod.PromptName])
    a.add_argument("--bindings", required=True, help="JSON object file")
    a.add_argument("--out")
    a = actions.add_parser("emit-config", help="write the training config")
    a.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_structure)

    p = sub.add_parser("curriculum", help="pair, merge, split, build, export")
    actions = p.add_subparsers(dest="action", required=True)
    a = actions.add_parser("pair")
    a.add_argument("--en", required=True)
    a.add_argument("--hi", required=True)
    a.add_argument("--key", default="byid", choices=["byid", "byindex"])
    a.add_argument("--out", required=True)
    a = actions.add_parser("merge")
    a.add_argument("--in", dest="infiles", nargs="+", required=True)
    a.add_argument("--out", required=True)
    a = actions.add_parser("split")
    a.add_argument("--in", dest="infile", required=True)
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--ratio", type=float, default=0.70)
    a.add_argument("--out", required=True)
    a = actions.add_parser("build")
    a.add_argument("--in", dest="infile", required=True)
    a.add_argument("--split", required=True)
    a.add_argument("--mode", default="bilingual", choices=["en", "hi", "bilingual"])
    a.add_argument("--cumulative", action="store_true")
    a.add_argument("--out", required=True)
    a = actions.add_parser("export")
    a.add_argument("--curriculum", required=True)
    a.add_argument("--manifest", required=True)
    a.add_argument("--stage", required=True)
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_curriculum)

    p = sub.add_parser("augment", help="generate synthetic problems via a provider")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--target", type=int, required=True)
    p.add_argument("--template", default="augment")
    p.add_argument("--config", required=True, help="provider config JSON")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_augment)

    p = sub.add_parser("evaluate", help="grade predictions and report accuracy")
    actions = p.add_subparsers(dest="action", required=True)
    a = actions.add_parser("grade")
    a.add_argument("--pred", required=True, help="problem_id<TAB>output file")
    a.add_argument("--manifest", required=True)
    a.add_argument("--model", required=True)
    a.add_argument("--out", required=True)
    a = actions.add_parser("report")
    a.add_argument("--grades", nargs="+", required=True)
    a.add_argument("--manifest", required=True)
    a.add_argument("--format", default="table", choices=["table", "csv"])
    a.add_argument("--out", help="output path; a machine-readable .csv "
                                 "companion is written alongside")
    a = actions.add_parser("kappa")
    a.add_argument("--counts", required=True)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("kappa", help="rater-agreement statistic from a counts matrix")
    p.add_argument("--counts", required=True)
    p.set_defaults(func=_cmd_kappa)

    p = sub.add_parser("demo", help="run the bundled end-to-end demonstration")
    p.add_argument("--out", help="output directory (default demo_out)")
    p.add_argument("--config", help="pipeline config JSON overriding fixture paths")
    p.set_defaults(func=_cmd_demo)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return args.func(args)
    except (PipelineError, ValueError, ZeroDivisionError, KeyError, OSError) as exc:
        message = str(exc)
        print(f"error={json.dumps(message, ensure_ascii=False)}", file=sys.stderr)
        return 1


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
