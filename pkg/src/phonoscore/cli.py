"""Corpus-scale command line interface.

Subcommands: validate, g2p, align, assess, simulate, confusion. Every run
echoes its tunables into the emitted JSON, writes artifacts atomically
(temp file + rename), and keeps stdout for the machine-readable summary
with diagnostics on stderr. Exit codes: 0 success, 1 bad input data,
2 usage errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .confusion import (
    DEFAULT_FLOOR,
    DEFAULT_TEMPERATURE,
    build_confusion,
    confusion_from_csv,
    confusion_to_csv,
    to_cost_matrix,
)
from .errors import IdMismatch, ParseError, PhonoscoreError, ValidationError
from .g2p import (
    PhoneSequence,
    find_rule_ties,
    format_phone_document,
    format_phone_line,
    read_phone_file,
    read_text_document,
    transcribe,
    validate_sequence,
)
from .alignment import align, alignment_to_dict, render_alignment
from .profiles import LanguageProfile, load_profile, profile_from_dict, validate_profile
from .scoring import (
    DEFAULT_GOP_EPSILON,
    AssessmentReport,
    PosteriorSet,
    ScoringConfig,
    assess_utterance,
    corpus_summary,
    default_cost_matrix,
)
from .simulator import PerturbationSpec, perturb


@dataclass
class RunConfig:
    """Everything a run depends on; echoed verbatim into every report."""

    profile: str
    recognized: str | None = None
    canonical: str | None = None
    text: str | None = None
    posteriors: str | None = None
    segments: str | None = None
    out: str | None = None
    jobs: int = 1
    lenient: bool = False
    scoring: ScoringConfig = field(default_factory=ScoringConfig)

    def echo(self) -> dict:
        return {
            "profile": self.profile,
            "recognized": self.recognized,
            "canonical": self.canonical,
            "text": self.text,
            "posteriors": self.posteriors,
            "segments": self.segments,
            "jobs": self.jobs,
            "mode": "lenient" if self.lenient else "strict",
            **self.scoring.to_dict(),
        }


def dump_json(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def write_atomic(path: str | Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    handle = tempfile.NamedTemporaryFile(
        "w", encoding="utf-8", dir=path.parent, prefix=f".{path.name}.", delete=False
    )
    try:
        with handle as f:
            f.write(text)
        os.replace(handle.name, path)
    except BaseException:
        os.unlink(handle.name)
        raise


def _read_posteriors(posterior_path: str, segment_path: str) -> PosteriorSet:
    lines = [
        line for line in Path(posterior_path).read_text(encoding="utf-8").splitlines()
        if line.strip()
    ]
    if not lines:
        raise ParseError("empty posterior file")
    symbols = tuple(s.strip() for s in lines[0].split(","))
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        cells = line.split(",")
        if len(cells) != len(symbols):
            raise ParseError(f"expected {len(symbols)} columns", line=lineno)
        try:
            rows.append([float(c) for c in cells])
        except ValueError as exc:
            raise ParseError(f"bad posterior value: {exc}", line=lineno) from exc

    segments = []
    seg_lines = [
        line for line in Path(segment_path).read_text(encoding="utf-8").splitlines()
        if line.strip()
    ]
    for lineno, line in enumerate(seg_lines, start=1):
        cells = [c.strip() for c in line.split(",")]
        if cells == ["phone", "start_frame", "end_frame"]:
            continue
        if len(cells) != 3:
            raise ParseError("expected phone,start_frame,end_frame", line=lineno)
        try:
            segments.append((cells[0], int(cells[1]), int(cells[2])))
        except ValueError as exc:
            raise ParseError(f"bad frame index: {exc}", line=lineno) from exc
    return PosteriorSet(symbols=symbols, matrix=np.array(rows), segments=tuple(segments))


def _canonical_by_id(
    config: RunConfig, profile: LanguageProfile
) -> tuple[dict[str, PhoneSequence], dict[str, str]]:
    """Canonical sequences keyed by id, plus per-utterance errors (lenient mode)."""
    sequences: dict[str, PhoneSequence] = {}
    broken: dict[str, str] = {}
    if config.text is not None:
        for utt_id, text in read_text_document(Path(config.text).read_text(encoding="utf-8")):
            try:
                sequences[utt_id] = transcribe(
                    text, profile, utterance_id=utt_id, lenient=config.lenient
                )
            except PhonoscoreError as exc:
                if not config.lenient:
                    raise
                broken[utt_id] = str(exc)
        return sequences, broken
    for seq in read_phone_file(config.canonical):
        try:
            validate_sequence(seq, profile)
            sequences[seq.utterance_id] = seq
        except PhonoscoreError as exc:
            if not config.lenient:
                raise
            broken[seq.utterance_id] = str(exc)
    return sequences, broken


def batch_assess(
    config: RunConfig,
) -> tuple[dict, list[AssessmentReport], list[dict]]:
    """Assess every utterance of a corpus; returns (summary, reports, skipped)."""
    profile = load_profile(config.profile)
    recognized = read_phone_file(config.recognized)
    if not recognized:
        raise ParseError(f"no utterances in {config.recognized}")

    canonical, broken = _canonical_by_id(config, profile)
    recognized_ids = [seq.utterance_id for seq in recognized]
    missing = [i for i in recognized_ids if i not in canonical and i not in broken]
    unmatched = [i for i in {**canonical, **broken} if i not in set(recognized_ids)]
    if missing or unmatched:
        raise IdMismatch(
            f"utterances only on one side: recognized-only {missing}, "
            f"canonical-only {unmatched}"
        )

    costs = default_cost_matrix(profile, config.scoring)
    posteriors = None
    if config.posteriors is not None:
        if len(recognized) != 1:
            raise ParseError(
                "posterior scoring requires a single-utterance recognized file"
            )
        posteriors = _read_posteriors(config.posteriors, config.segments)

    def one(seq: PhoneSequence) -> AssessmentReport | dict:
        if seq.utterance_id in broken:
            return {"utterance_id": seq.utterance_id, "error": broken[seq.utterance_id]}
        try:
            report = assess_utterance(
                canonical[seq.utterance_id],
                seq,
                profile,
                config.scoring,
                posteriors=posteriors,
                costs=costs,
            )
            report.config_echo = config.echo()
            return report
        except PhonoscoreError as exc:
            if config.lenient:
                return {"utterance_id": seq.utterance_id, "error": str(exc)}
            raise

    if config.jobs > 1:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            outcomes = list(pool.map(one, recognized))
    else:
        outcomes = [one(seq) for seq in recognized]

    reports = [o for o in outcomes if isinstance(o, AssessmentReport)]
    skipped = [o for o in outcomes if isinstance(o, dict)]
    summary = corpus_summary(reports)
    summary["skipped"] = len(skipped)
    return summary, reports, skipped


def _cmd_validate(args) -> int:
    try:
        profile = load_profile(args.profile)
        violations: list[str] = []
    except ValidationError:
        # reload without raising on the first violation so all are reported
        doc = json.loads(Path(args.profile).read_text(encoding="utf-8"))
        profile = profile_from_dict(doc)
        violations = validate_profile(profile)
    warnings = find_rule_ties(profile)
    print(
        dump_json(
            {
                "profile": profile.id,
                "violations": violations,
                "warnings": warnings,
            }
        ),
        end="",
    )
    for warning in warnings:
        print(f"warning: {warning}", file=sys.stderr)
    return 1 if violations else 0


def _cmd_g2p(args) -> int:
    profile = load_profile(args.profile)
    records = read_text_document(Path(args.text).read_text(encoding="utf-8"))
    sequences = [
        transcribe(text, profile, utterance_id=utt_id, lenient=args.lenient)
        for utt_id, text in records
    ]
    if args.out:
        write_atomic(args.out, format_phone_document(sequences))
    print(
        dump_json(
            {
                "profile": profile.id,
                "utterances": len(sequences),
                "phones": sum(len(s.tokens) for s in sequences),
                "sequences": [format_phone_line(s) for s in sequences],
                "out": args.out,
                "mode": "lenient" if args.lenient else "strict",
            }
        ),
        end="",
    )
    return 0


def _cmd_align(args) -> int:
    profile = load_profile(args.profile)
    scoring = _scoring_from_args(args)
    if args.costs:
        cm = confusion_from_csv(Path(args.costs).read_text(encoding="utf-8"))
        costs = to_cost_matrix(cm, scoring.floor, scoring.ins_cost, scoring.del_cost)
    else:
        costs = default_cost_matrix(profile, scoring)

    canonical = read_phone_file(args.canonical)
    recognized = read_phone_file(args.recognized)
    by_id = {seq.utterance_id: seq for seq in canonical}
    traces = []
    for rec in recognized:
        if rec.utterance_id not in by_id:
            raise IdMismatch(f"no canonical utterance {rec.utterance_id!r}")
        canon = by_id[rec.utterance_id]
        result = align(canon, rec, costs)
        print(f"# {rec.utterance_id}", file=sys.stderr)
        print(render_alignment(result, canon, rec), file=sys.stderr)
        traces.append({"utterance_id": rec.utterance_id, **alignment_to_dict(result)})
    doc = {"profile": profile.id, "alignments": traces, **scoring.to_dict()}
    if args.out:
        write_atomic(args.out, dump_json(doc))
    print(dump_json(doc), end="")
    return 0


def _cmd_assess(args) -> int:
    config = RunConfig(
        profile=args.profile,
        recognized=args.recognized,
        canonical=args.canonical,
        text=args.text,
        posteriors=args.posteriors,
        segments=args.segments,
        out=args.out,
        jobs=args.jobs,
        lenient=args.lenient,
        scoring=_scoring_from_args(args),
    )
    summary, reports, skipped = batch_assess(config)
    doc = {
        "config": config.echo(),
        "corpus": summary,
        "utterances": [r.to_dict() for r in reports],
        "skipped": skipped,
    }
    text = dump_json(doc)
    if config.out:
        write_atomic(Path(config.out) / "report.json", text)
    print(text, end="")
    return 0


def _cmd_simulate(args) -> int:
    profile = load_profile(args.profile)
    spec_doc = json.loads(Path(args.spec).read_text(encoding="utf-8")) if args.spec else {}
    spec = PerturbationSpec.from_dict(spec_doc)
    if args.seed is not None:
        spec = replace(spec, seed=args.seed)
    records = read_text_document(Path(args.text).read_text(encoding="utf-8"))
    perturbed = [
        perturb(transcribe(text, profile, utterance_id=utt_id), spec, profile)
        for utt_id, text in records
    ]
    out_dir = Path(args.out)
    sequences_path = out_dir / f"{profile.id}_perturbed.tsv"
    write_atomic(sequences_path, format_phone_document(perturbed))
    provenance = {
        "tool_version": __version__,
        "profile": profile.id,
        "spec": spec.to_dict(),
        "utterances": len(perturbed),
        "sequences_file": sequences_path.name,
    }
    write_atomic(out_dir / "provenance.json", dump_json(provenance))
    print(dump_json(provenance), end="")
    return 0


def _cmd_confusion(args) -> int:
    profile = load_profile(args.profile)
    centroids = None
    if args.centroids:
        centroids = {}
        for lineno, line in enumerate(
            Path(args.centroids).read_text(encoding="utf-8").splitlines(), start=1
        ):
            if not line.strip():
                continue
            cells = line.split(",")
            if len(cells) < 2:
                raise ParseError("expected symbol,value,...", line=lineno)
            centroids[cells[0].strip()] = [float(c) for c in cells[1:]]
    cm = build_confusion(profile, centroids=centroids, temperature=args.temperature)
    write_atomic(args.out, confusion_to_csv(cm))
    print(
        dump_json(
            {
                "profile": profile.id,
                "symbols": len(cm.symbols),
                "temperature": args.temperature,
                "out": args.out,
            }
        ),
        end="",
    )
    return 0


def _add_scoring_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--temperature", type=float, default=DEFAULT_TEMPERATURE)
    parser.add_argument("--floor", type=float, default=DEFAULT_FLOOR)
    parser.add_argument("--ins-cost", type=float, default=1.0)
    parser.add_argument("--del-cost", type=float, default=1.0)
    parser.add_argument("--epsilon", type=float, default=DEFAULT_GOP_EPSILON)


def _scoring_from_args(args) -> ScoringConfig:
    return ScoringConfig(
        temperature=args.temperature,
        floor=args.floor,
        ins_cost=args.ins_cost,
        del_cost=args.del_cost,
        gop_epsilon=args.epsilon,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phonoscore",
        description="Language-sensitive intelligibility scoring of phone sequences",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a profile against its invariants")
    p.add_argument("--profile", required=True)
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("g2p", help="transcribe orthographic text to phone sequences")
    p.add_argument("--profile", required=True)
    p.add_argument("--text", required=True, help="file of id<TAB>text lines")
    p.add_argument("--out", help="write a phone-sequence file here")
    p.add_argument("--lenient", action="store_true")
    p.set_defaults(func=_cmd_g2p)

    p = sub.add_parser("align", help="align canonical and recognized sequences")
    p.add_argument("--profile", required=True)
    p.add_argument("--canonical", required=True)
    p.add_argument("--recognized", required=True)
    p.add_argument("--costs", help="confusion CSV to derive costs from")
    p.add_argument("--out")
    _add_scoring_flags(p)
    p.set_defaults(func=_cmd_align)

    p = sub.add_parser("assess", help="full assessment with corpus summary")
    p.add_argument("--profile", required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--text", help="file of id<TAB>text lines to transcribe")
    group.add_argument("--canonical", help="canonical phone-sequence file")
    p.add_argument("--recognized", required=True)
    p.add_argument("--posteriors", help="frame-by-phone posterior CSV")
    p.add_argument("--segments", help="phone,start_frame,end_frame CSV")
    p.add_argument("--out", help="directory for report.json")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--lenient", action="store_true")
    _add_scoring_flags(p)
    p.set_defaults(func=_cmd_assess)

    p = sub.add_parser("simulate", help="write a symbolically degraded corpus")
    p.add_argument("--profile", required=True)
    p.add_argument("--text", required=True)
    p.add_argument("--spec", help="perturbation spec JSON file")
    p.add_argument("--seed", type=int, help="override the spec seed")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("confusion", help="build and export a confusion matrix")
    p.add_argument("--profile", required=True)
    p.add_argument("--centroids", help="CSV of symbol,value,... vectors")
    p.add_argument("--temperature", type=float, default=DEFAULT_TEMPERATURE)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_confusion)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "assess" and args.posteriors is not None and args.segments is None:
        parser.error("--posteriors requires --segments")
    try:
        return args.func(args)
    except PhonoscoreError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
