"""File/stream level wrappers around each module, shared by the CLI and recipe runner.

Inputs are binary streams (so bad UTF-8 can be counted rather than crash the
run); outputs are text streams. Every function returns a SelectionReport.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import BinaryIO, Dict, Iterable, List, Optional, Sequence, TextIO, Tuple, Union

from . import filtering, mass, mixing, ngram, script_map, selection
from .core import (
    LengthDistribution,
    SelectionReport,
    Sentence,
    compute_length_distribution,
    stats_from_distribution,
    decode_lines,
    iter_byte_lines,
    write_lines,
)

PathLike = Union[str, Path]


def _read_texts(inp: BinaryIO, report: SelectionReport) -> List[str]:
    return list(decode_lines(iter_byte_lines(inp), report))


def normalize(inp: BinaryIO, out: TextIO) -> SelectionReport:
    report = SelectionReport()
    write_lines(filtering.normalize_stream(iter_byte_lines(inp), report), out)
    return report


def filter_corpus(inp: BinaryIO, out: TextIO, rule: filtering.FilterRule, normalize: bool = False) -> SelectionReport:
    kept, report = filtering.run_filter_pipeline(iter_byte_lines(inp), rule, normalize=normalize)
    write_lines(kept, out)
    return report


def map_script(inp: BinaryIO, out: TextIO, table: script_map.MappingTable,
               config: script_map.MappingConfig) -> SelectionReport:
    report = SelectionReport()
    lines = decode_lines(iter_byte_lines(inp), report)
    write_lines(script_map.map_stream(lines, table, config, report), out)
    return report


def lm_train(inp: BinaryIO, out_path: PathLike, order: int = 5, granularity: str = "token",
             smoothing: str = "kn") -> Tuple[ngram.NGramModel, SelectionReport]:
    report = SelectionReport()
    texts = []
    for text in decode_lines(iter_byte_lines(inp), report):
        if ngram.units_of(text, granularity):
            texts.append(text)
            report.select()
        else:
            report.reject("empty")
    model = ngram.train(texts, order=order, granularity=granularity, smoothing=smoothing)
    model.save_arpa(out_path)
    return model, report


def lm_score(inp: BinaryIO, out: TextIO, model: ngram.NGramModel, per_token: bool = False) -> SelectionReport:
    report = SelectionReport()
    for text in decode_lines(iter_byte_lines(inp), report):
        sc = model.score_sentence(text)
        value = sc.per_token_log10 if per_token else sc.total_log10
        out.write(f"{value!r}\t{text}\n")
        report.select()
    return report


def load_target(target_dist: Optional[PathLike] = None, target_file: Optional[PathLike] = None,
                unit: str = "token") -> LengthDistribution:
    if (target_dist is None) == (target_file is None):
        raise selection.SelectionError("give exactly one of a target distribution or a target file")
    if target_dist is not None:
        return LengthDistribution.load(target_dist)
    with open(target_file, "rb") as fh:
        return compute_length_distribution(decode_lines(iter_byte_lines(fh)), unit)


def _aligned_scores(texts: Sequence[str], scores_path: PathLike) -> List[float]:
    rows = list(selection.read_scores(scores_path))
    if len(rows) != len(texts):
        raise selection.SelectionError(
            f"score/corpus length mismatch: {len(rows)} scores for {len(texts)} lines"
        )
    for i, ((_, scored), text) in enumerate(zip(rows, texts), 1):
        if scored != text:
            raise selection.SelectionError(f"scores misaligned with corpus at line {i}")
    return [s for s, _ in rows]


def select(inp: BinaryIO, out: TextIO, method: str, n: int, seed: Optional[int] = None,
           target: Optional[LengthDistribution] = None, scores_path: Optional[PathLike] = None,
           keep_order: bool = False, unit: str = "token") -> SelectionReport:
    spec = selection.SelectionSpec(method, n, seed if method in ("random",) else None,
                                   target, scores_path)
    decode_report = SelectionReport()
    if spec.method == selection.LENGTH_DIST:
        report = SelectionReport()
        lines = decode_lines(iter_byte_lines(inp), decode_report)
        write_lines(selection.iter_length_distribution(lines, target, n, report, unit), out)
    elif spec.method == selection.RANDOM:
        chosen, report = selection.select_random(decode_lines(iter_byte_lines(inp), decode_report), n, seed)
        write_lines(chosen, out)
    else:
        texts = _read_texts(inp, decode_report)
        scores = _aligned_scores(texts, scores_path)
        if spec.method == selection.LM_TOP_N:
            chosen, report = selection.select_lm_top_n(texts, scores, n, keep_order=keep_order)
        else:
            chosen, report = selection.select_combined(texts, scores, target, n, unit)
        write_lines(chosen, out)
    merged = decode_report.merge(report)
    merged.seed = report.seed
    return merged


def mix(specs: Sequence[Tuple[str, PathLike]], out_path: PathLike, tags_path: PathLike, seed: int) -> SelectionReport:
    mixed, report = mixing.mix_files(specs, seed)
    mixing.write_mixed(mixed, out_path, tags_path)
    return report


def mass_gen(inp: BinaryIO, out: TextIO, config: mass.MaskConfig, tags: Optional[Sequence[str]] = None,
             tag: str = "") -> SelectionReport:
    report = SelectionReport(seed=config.seed)
    texts = decode_lines(iter_byte_lines(inp), report)
    if tags is not None:
        texts = list(texts)
        if len(texts) != len(tags):
            raise mixing.MixingError(f"{len(tags)} tags for {len(texts)} lines")
        tagged: Iterable = ((t, Sentence(x)) for t, x in zip(tags, texts))
    else:
        tagged = ((tag, Sentence(x)) for x in texts)
    for ex in mass.generate_mass_examples(tagged, config, report):
        out.write(ex.to_tsv())
        out.write("\n")
    return report


def stats(inp: BinaryIO) -> Tuple[Dict, LengthDistribution, SelectionReport]:
    report = SelectionReport()
    dist = compute_length_distribution(decode_lines(iter_byte_lines(inp), report))
    report.select(dist.total)
    return stats_from_distribution(dist).to_dict(), dist, report


def dump_json(obj, path: PathLike) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
