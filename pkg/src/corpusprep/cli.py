"""Command line entry point: ``corpusprep <subcommand> ...``.

Corpus-in/corpus-out subcommands read stdin and write stdout unless paths are
given. ``--report PATH`` writes the run's SelectionReport as JSON. Exit code 0
on success; errors print a one-line diagnostic to stderr and exit nonzero.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from . import filtering, mass, mixing, ops, recipe, script_map, selection, synth
from .core import SelectionReport
from .ngram import NGramModel

log = logging.getLogger("corpusprep")


@contextlib.contextmanager
def _in(path: Optional[str]):
    if path in (None, "-"):
        yield sys.stdin.buffer
    else:
        with open(path, "rb") as fh:
            yield fh


@contextlib.contextmanager
def _out(path: Optional[str]):
    if path in (None, "-"):
        out = open(sys.stdout.fileno(), "w", encoding="utf-8", newline="\n", closefd=False)
        try:
            yield out
        finally:
            out.flush()
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            yield fh


def _finish(args, report: SelectionReport) -> None:
    if getattr(args, "report", None):
        report.save(args.report)
    log.info("read %d, selected %d, rejected %s", report.lines_read, report.lines_selected,
             dict(report.rejections))


def _io_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("-i", "--input", help="input corpus (default: stdin)")
    p.add_argument("-o", "--output", help="output file (default: stdout)")
    p.add_argument("--report", metavar="PATH", help="write a JSON run report")


def cmd_normalize(args):
    with _in(args.input) as inp, _out(args.output) as out:
        report = ops.normalize(inp, out)
    _finish(args, report)


def cmd_filter(args):
    cjk = args.cjk_ratio is not None or args.ascii_ratio is not None
    rule = filtering.FilterRule(
        min_tokens=args.min_tokens,
        max_tokens=args.max_tokens,
        cjk_min_ratio=0.3 if args.cjk_ratio is None else args.cjk_ratio,
        ascii_max_ratio=0.3 if args.ascii_ratio is None else args.ascii_ratio,
        cjk_filter_enabled=cjk,
    )
    with _in(args.input) as inp, _out(args.output) as out:
        report = ops.filter_corpus(inp, out, rule, normalize=args.normalize)
    _finish(args, report)


def cmd_map_script(args):
    table = script_map.load_mapping_table(args.table)
    lm = None
    if args.mode == script_map.LM_SCORED:
        if not args.lm:
            raise ValueError("--mode lm-scored requires --lm")
        lm = NGramModel.load_arpa(args.lm, "char")
    config = script_map.MappingConfig(args.mode, args.cap, lm)
    with _in(args.input) as inp, _out(args.output) as out:
        report = ops.map_script(inp, out, table, config)
    _finish(args, report)


def cmd_lm_train(args):
    if not args.output:
        raise ValueError("lm-train needs -o MODEL.arpa")
    with _in(args.input) as inp:
        _, report = ops.lm_train(inp, args.output, args.order, args.granularity,
                                 "mle" if args.mle else "kn")
    _finish(args, report)


def cmd_lm_score(args):
    model = NGramModel.load_arpa(args.lm, args.granularity)
    with _in(args.input) as inp, _out(args.output) as out:
        report = ops.lm_score(inp, out, model, per_token=args.per_token)
    _finish(args, report)


def cmd_select(args):
    method = selection.METHOD_ALIASES.get(args.method, args.method)
    target = None
    if method in (selection.LENGTH_DIST, selection.LM_THEN_LD):
        target = ops.load_target(args.target_dist, args.target_file, args.unit)
    if method == selection.RANDOM and args.seed is None:
        raise ValueError("--method random requires --seed")
    with _in(args.input) as inp, _out(args.output) as out:
        report = ops.select(inp, out, method, args.n, seed=args.seed, target=target,
                            scores_path=args.scores, keep_order=args.keep_order, unit=args.unit)
    _finish(args, report)


def cmd_mix(args):
    specs = [mixing.parse_corpus_arg(a) for a in args.corpora]
    if not args.output or not args.tags:
        raise ValueError("mix needs -o OUT and --tags TAGS")
    report = ops.mix(specs, args.output, args.tags, args.seed)
    _finish(args, report)


def cmd_mass_gen(args):
    config = mass.MaskConfig(args.mask_fraction, args.seed, args.mask_token)
    tags = mixing.read_tags(args.tags) if args.tags else None
    with _in(args.input) as inp, _out(args.output) as out:
        report = ops.mass_gen(inp, out, config, tags=tags, tag=args.tag)
    _finish(args, report)


def cmd_stats(args):
    with _in(args.input) as inp:
        summary, dist, report = ops.stats(inp)
    if args.dist:
        dist.save(args.dist)
    with _out(args.output) as out:
        out.write(json.dumps(summary, indent=2) + "\n")
    _finish(args, report)


def _overrides(items: List[str]) -> dict:
    out = {}
    for item in items or []:
        k, sep, v = item.partition("=")
        if not sep:
            raise ValueError(f"--set expects KEY=VALUE, got {item!r}")
        out[k.strip()] = v.strip()
    return out


def _load(args):
    if args.recipe == "paper":
        return recipe.load_paper_recipe(_overrides(args.set))
    return recipe.load_recipe(args.recipe, _overrides(args.set))


def cmd_run(args):
    rec = _load(args)
    manifest = recipe.run_recipe(rec, args.data_dir, args.work_dir, args.manifest)
    print(json.dumps({"status": manifest["status"], "conserved": manifest["conserved"],
                      "elapsed_s": manifest["elapsed_s"]}))
    if not manifest["conserved"]:
        return 3


def cmd_validate(args):
    rec = _load(args)
    problems = recipe.validate_recipe(rec, args.data_dir)
    for p in problems:
        print(p)
    return 1 if problems else 0


def cmd_synth(args):
    paths = synth.write_synthetic_corpus(args.out_dir, args.seed, args.lines)
    for name in sorted(paths):
        print(paths[name])


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="corpusprep", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("normalize", help="NFKC-normalize lines")
    _io_args(p)
    p.set_defaults(func=cmd_normalize)

    p = sub.add_parser("filter", help="token-count and CJK/ASCII ratio filtering")
    _io_args(p)
    p.add_argument("--min-tokens", type=int, default=3)
    p.add_argument("--max-tokens", type=int, default=80, help="exclusive upper bound")
    p.add_argument("--cjk-ratio", type=float, help="minimum share of Chinese tokens (enables ratio filter)")
    p.add_argument("--ascii-ratio", type=float, help="maximum share of English tokens (enables ratio filter)")
    p.add_argument("--normalize", action="store_true", help="NFKC-normalize before filtering")
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("map-script", help="character script mapping")
    _io_args(p)
    p.add_argument("--table", required=True)
    p.add_argument("--mode", choices=[script_map.ONE_TO_ONE, script_map.LM_SCORED], default=script_map.ONE_TO_ONE)
    p.add_argument("--lm", help="character-level ARPA model (lm-scored mode)")
    p.add_argument("--cap", type=int, default=4096)
    p.set_defaults(func=cmd_map_script)

    p = sub.add_parser("lm-train", help="train a Kneser-Ney n-gram LM, write ARPA")
    _io_args(p)
    p.add_argument("--order", type=int, default=5)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--char", dest="granularity", action="store_const", const="char")
    g.add_argument("--token", dest="granularity", action="store_const", const="token")
    p.add_argument("--mle", action="store_true", help="unsmoothed diagnostic estimates")
    p.set_defaults(func=cmd_lm_train, granularity="token")

    p = sub.add_parser("lm-score", help="score lines; writes score<TAB>line")
    _io_args(p)
    p.add_argument("--lm", required=True)
    p.add_argument("--per-token", action="store_true")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--char", dest="granularity", action="store_const", const="char")
    g.add_argument("--token", dest="granularity", action="store_const", const="token")
    p.set_defaults(func=cmd_lm_score, granularity="token")

    p = sub.add_parser("select", help="random / LM top-N / length-distribution selection")
    _io_args(p)
    p.add_argument("--method", required=True, choices=sorted(selection.METHOD_ALIASES) + list(selection.METHODS))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--target-dist")
    p.add_argument("--target-file")
    p.add_argument("--scores")
    p.add_argument("--keep-order", action="store_true", help="emit LM top-N in file order")
    p.add_argument("--unit", choices=["token", "char"], default="token")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("mix", help="oversample corpora to the largest and shuffle")
    p.add_argument("corpora", nargs="+", metavar="TAG:PATH")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("-o", "--output")
    p.add_argument("--tags")
    p.add_argument("--report")
    p.set_defaults(func=cmd_mix)

    p = sub.add_parser("mass-gen", help="MASS masked examples as TSV")
    _io_args(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mask-fraction", type=float, default=0.5)
    p.add_argument("--mask-token", default=mass.MASK)
    p.add_argument("--tags", help="line_index<TAB>tag sidecar from mix")
    p.add_argument("--tag", default="", help="tag for every line when --tags is absent")
    p.set_defaults(func=cmd_mass_gen)

    p = sub.add_parser("stats", help="corpus length statistics")
    _io_args(p)
    p.add_argument("--dist", help="write length<TAB>count histogram here")
    p.set_defaults(func=cmd_stats)

    for name, func, hlp in (("run", cmd_run, "run a recipe"), ("validate", cmd_validate, "check a recipe")):
        p = sub.add_parser(name, help=hlp)
        p.add_argument("recipe", help="recipe file, or 'paper' for the bundled paper.recipe")
        p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a [recipe] value")
        p.add_argument("--data-dir", default=None if name == "validate" else ".")
        if name == "run":
            p.add_argument("--work-dir", required=True)
            p.add_argument("--manifest")
        p.set_defaults(func=func)

    p = sub.add_parser("synth", help="write a synthetic multilingual corpus for the bundled paper.recipe")
    p.add_argument("out_dir")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lines", type=int, default=25000, help="lines per language")
    p.set_defaults(func=cmd_synth)
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args) or 0
    except recipe.StageError as e:
        print(f"corpusprep: {e}", file=sys.stderr)
        return 2
    except (ValueError, OSError, KeyError) as e:
        print(f"corpusprep: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
