"""Pipeline recipes: an INI file of ordered stages, validated then run into a manifest.

A recipe looks like::

    [recipe]
    name = demo
    seed = 42

    [stage ja-normalize]
    op = normalize
    input = ja.txt

    [stage ja-filter]
    op = filter
    input = @ja-normalize

``@name`` refers to the output of an earlier stage; any other path is an
external file relative to the data directory. Stage outputs are written to the
work directory as ``<stage-name>.<ext>``.
"""

from __future__ import annotations

import configparser
import json
import logging
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

from . import filtering, mass, mixing, ops, script_map
from .core import LengthDistribution, SelectionReport, count_lines, derive_seed, sha256_file
from .ngram import NGramModel

log = logging.getLogger(__name__)

PathLike = Union[str, Path]

# op -> (required params, optional params, output extension)
OPS: Dict[str, Tuple[Tuple[str, ...], Tuple[str, ...], str]] = {
    "normalize": (("input",), (), "txt"),
    "filter": (("input",), ("min_tokens", "max_tokens", "cjk_ratio", "ascii_ratio"), "txt"),
    "map-script": (("input", "table"), ("mode", "lm", "cap"), "txt"),
    "lm-train": (("input",), ("order", "granularity", "smoothing"), "arpa"),
    "lm-score": (("input", "lm"), ("per_token",), "tsv"),
    "select": (("input", "method", "n"), ("seed", "target_file", "target_dist", "scores", "keep_order", "unit"), "txt"),
    "mix": (("inputs",), ("seed",), "txt"),
    "mass-gen": (("input",), ("mask_fraction", "seed", "mask_token", "tag"), "tsv"),
    "stats": (("input",), (), "json"),
}
# ops whose main output is a corpus other stages may consume as `input`
CORPUS_OPS = {"normalize", "filter", "map-script", "select", "mix"}
PATH_KEYS = ("input", "table", "lm", "target_file", "target_dist", "scores")
COMMON_KEYS = ("op", "output")


class RecipeError(ValueError):
    def __init__(self, msg: str, violations: Sequence[str] = ()):
        super().__init__(msg if not violations else msg + ":\n  " + "\n  ".join(violations))
        self.violations = list(violations)


class StageError(RuntimeError):
    def __init__(self, stage: str, cause: BaseException, manifest: dict):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.manifest = manifest


@dataclass
class Stage:
    name: str
    op: str
    params: Dict[str, str]

    def refs(self) -> List[Tuple[str, str]]:
        """(key, value) for every path-valued parameter, mix inputs expanded."""
        out = [(k, self.params[k]) for k in PATH_KEYS if k in self.params]
        if "inputs" in self.params:
            for item in self.params["inputs"].split():
                _, _, path = item.partition(":")
                out.append(("inputs", path))
        return out

    def corpus_inputs(self) -> List[str]:
        if self.op == "mix":
            return [p for k, p in self.refs() if k == "inputs"]
        return [self.params["input"]] if "input" in self.params else []


@dataclass
class PipelineRecipe:
    name: str
    seed: int
    stages: List[Stage] = field(default_factory=list)
    source: Optional[Path] = None

    def stage(self, name: str) -> Stage:
        for s in self.stages:
            if s.name == name:
                return s
        raise KeyError(name)


def _parser() -> configparser.ConfigParser:
    cp = configparser.ConfigParser(interpolation=configparser.ExtendedInterpolation(),
                                   inline_comment_prefixes=None)
    cp.optionxform = str
    return cp


def parse_recipe(text: str, overrides: Optional[Dict[str, str]] = None,
                 source: Optional[Path] = None) -> PipelineRecipe:
    cp = _parser()
    try:
        cp.read_string(text, source=str(source or "<recipe>"))
    except configparser.Error as e:
        raise RecipeError(f"cannot parse recipe: {e}") from None
    if not cp.has_section("recipe"):
        cp.add_section("recipe")
    for k, v in (overrides or {}).items():
        cp.set("recipe", k, str(v))
    head = cp["recipe"]
    try:
        seed = int(head.get("seed", "0"))
    except ValueError:
        raise RecipeError(f"recipe seed must be an integer, got {head.get('seed')!r}") from None
    recipe = PipelineRecipe(head.get("name", "recipe"), seed, source=source)
    for section in cp.sections():
        if section == "recipe":
            continue
        kind, _, name = section.partition(" ")
        if kind != "stage" or not name.strip():
            raise RecipeError(f"unknown section [{section}] (expected [stage NAME])")
        try:
            params = {k: v.strip() for k, v in cp[section].items() if k not in cp.defaults()}
        except configparser.Error as e:
            raise RecipeError(f"[{section}]: {e}") from None
        op = params.pop("op", "")
        recipe.stages.append(Stage(name.strip(), op, params))
    return recipe


def load_recipe(path: PathLike, overrides: Optional[Dict[str, str]] = None) -> PipelineRecipe:
    path = Path(path)
    return parse_recipe(path.read_text(encoding="utf-8"), overrides, path)


def paper_recipe_text() -> str:
    return resources.files("corpusprep").joinpath("recipes/paper.recipe").read_text(encoding="utf-8")


def load_paper_recipe(overrides: Optional[Dict[str, str]] = None) -> PipelineRecipe:
    return parse_recipe(paper_recipe_text(), overrides, Path("paper.recipe"))


# ---------------------------------------------------------------------------
# validation

def _lineage_ops(stage: Stage, by_name: Dict[str, Stage]) -> set:
    """Ops of every upstream stage reachable through corpus inputs."""
    seen, ops_seen = set(), set()
    todo = [stage]
    while todo:
        s = todo.pop()
        for ref in s.corpus_inputs():
            if ref.startswith("@") and ref[1:] in by_name and ref[1:] not in seen:
                seen.add(ref[1:])
                up = by_name[ref[1:]]
                ops_seen.add(up.op)
                todo.append(up)
    return ops_seen


def validate_recipe(recipe: PipelineRecipe, data_dir: Optional[PathLike] = None) -> List[str]:
    """Every ordering, reference and parameter problem, as human-readable strings.

    External file existence is only checked when ``data_dir`` is given.
    """
    v: List[str] = []
    if not recipe.stages:
        return ["no stages"]
    prior: Dict[str, Stage] = {}
    has_mix = any(s.op == "mix" for s in recipe.stages)
    for stage in recipe.stages:
        where = f"stage {stage.name!r}"
        if stage.name in prior:
            v.append(f"{where}: duplicate stage name")
        if stage.op not in OPS:
            v.append(f"{where}: unknown op {stage.op!r}")
            prior[stage.name] = stage
            continue
        required, optional, _ = OPS[stage.op]
        for key in required:
            if key not in stage.params:
                v.append(f"{where}: missing parameter {key!r}")
        for key in stage.params:
            if key not in required + optional + COMMON_KEYS:
                v.append(f"{where}: unknown parameter {key!r} for op {stage.op}")

        for key, ref in stage.refs():
            if ref.startswith("@"):
                up = prior.get(ref[1:])
                if up is None:
                    v.append(f"{where}: dangling input path {ref!r} (no earlier stage of that name)")
                    continue
                if key in ("input", "inputs", "target_file") and up.op not in CORPUS_OPS:
                    if not (stage.op == "mass-gen" and up.op == "mix"):
                        v.append(f"{where}: {key} {ref!r} is a {up.op} output, not a corpus")
                if key == "lm" and up.op != "lm-train":
                    v.append(f"{where}: lm {ref!r} is not an lm-train stage")
                elif key == "lm" and stage.op == "map-script" and up.params.get("granularity") != "char":
                    v.append(f"{where}: mapping lm {ref!r} must be a character-level model")
                if key == "scores" and up.op != "lm-score":
                    v.append(f"{where}: scores {ref!r} is not an lm-score stage")
                if key == "scores" and up.op == "lm-score" and up.params.get("input") != stage.params.get("input"):
                    v.append(f"{where}: scores {ref!r} were computed for {up.params.get('input')!r}, "
                             f"not {stage.params.get('input')!r}")
            elif key == "inputs" and not ref:
                v.append(f"{where}: mix inputs must be TAG:PATH")
            elif data_dir is not None and not (Path(data_dir) / ref).exists():
                v.append(f"{where}: input path {ref!r} does not exist")

        lineage = _lineage_ops(stage, prior)
        if stage.op == "filter" and "normalize" not in lineage:
            v.append(f"{where}: filter requires normalized input (normalize before filter)")
        if stage.op == "normalize" and "filter" in lineage:
            v.append(f"{where}: normalize must come before filter")
        if stage.op in ("map-script", "select") and "filter" not in lineage:
            v.append(f"{where}: {stage.op} requires filtered input (filter before mapping/selection)")
        if stage.op == "mass-gen":
            # single-language recipes (no mix stage anywhere) may feed a corpus straight in
            ref = stage.params.get("input", "")
            from_mix = ref.startswith("@") and ref[1:] in prior and prior[ref[1:]].op == "mix"
            if has_mix and not from_mix:
                v.append(f"{where}: mass-gen requires mixed input")
            if from_mix and "tag" in stage.params:
                v.append(f"{where}: tag is taken from the mix sidecar, not a parameter")
        if stage.op in ("filter", "map-script", "select", "normalize") and "mix" in lineage:
            v.append(f"{where}: {stage.op} must come before mix")
        if stage.op == "select":
            method = stage.params.get("method", "")
            if method in ("lm", "lm-ld", "lm-top-n", "lm-then-ld") and "scores" not in stage.params:
                v.append(f"{where}: method {method} needs scores")
            if method in ("ld", "lm-ld", "length-distribution", "lm-then-ld") and not (
                ("target_file" in stage.params) ^ ("target_dist" in stage.params)
            ):
                v.append(f"{where}: method {method} needs exactly one of target_file/target_dist")
        if stage.op == "map-script" and stage.params.get("mode", "one-to-one") == "lm-scored" \
                and "lm" not in stage.params:
            v.append(f"{where}: lm-scored mapping needs lm")
        if stage.op == "mix":
            tags = [item.partition(":")[0] for item in stage.params.get("inputs", "").split()]
            if len(set(tags)) != len(tags):
                v.append(f"{where}: duplicate language tags {tags}")
        prior[stage.name] = stage
    return v


# ---------------------------------------------------------------------------
# execution

def _bool(s: str) -> bool:
    return s.strip().lower() in ("1", "true", "yes", "on")


class _Runner:
    def __init__(self, recipe: PipelineRecipe, data_dir: Path, work_dir: Path):
        self.recipe = recipe
        self.data_dir = data_dir
        self.work_dir = work_dir
        self.outputs: Dict[str, Dict[str, Path]] = {}

    def path(self, ref: str, kind: str = "main") -> Path:
        if ref.startswith("@"):
            return self.outputs[ref[1:]][kind]
        return self.data_dir / ref

    def out_path(self, stage: Stage, suffix: Optional[str] = None) -> Path:
        if suffix is None and "output" in stage.params:
            return self.work_dir / stage.params["output"]
        ext = suffix or OPS[stage.op][2]
        return self.work_dir / f"{stage.name}.{ext}"

    def seed(self, stage: Stage) -> int:
        if "seed" in stage.params:
            return int(stage.params["seed"])
        return derive_seed(self.recipe.seed, stage.name) % (2 ** 32)

    def run_stage(self, stage: Stage) -> Tuple[SelectionReport, Dict[str, Path]]:
        p = stage.params
        out = self.out_path(stage)
        outs = {"main": out}
        op = stage.op
        if op == "stats":
            with open(self.path(p["input"]), "rb") as inp:
                summary, dist, report = ops.stats(inp)
            ops.dump_json({"stats": summary, "length_distribution": {str(k): v for k, v in sorted(dist.counts.items())}}, out)
            return report, outs
        if op == "lm-train":
            with open(self.path(p["input"]), "rb") as inp:
                _, report = ops.lm_train(inp, out, order=int(p.get("order", 5)),
                                         granularity=p.get("granularity", "token"),
                                         smoothing=p.get("smoothing", "kn"))
            return report, outs
        if op == "mix":
            specs = [mixing.parse_corpus_arg(item) for item in p["inputs"].split()]
            specs = [(tag, self.path(ref)) for tag, ref in specs]
            tags = self.out_path(stage, "tags.tsv")
            outs["tags"] = tags
            return ops.mix(specs, out, tags, self.seed(stage)), outs

        with open(self.path(p["input"]), "rb") as inp, \
                open(out, "w", encoding="utf-8", newline="\n") as fh:
            if op == "normalize":
                report = ops.normalize(inp, fh)
            elif op == "filter":
                cjk = "cjk_ratio" in p or "ascii_ratio" in p
                rule = filtering.FilterRule(
                    min_tokens=int(p.get("min_tokens", 3)),
                    max_tokens=int(p.get("max_tokens", 80)),
                    cjk_min_ratio=float(p.get("cjk_ratio", 0.3)),
                    ascii_max_ratio=float(p.get("ascii_ratio", 0.3)),
                    cjk_filter_enabled=cjk,
                )
                report = ops.filter_corpus(inp, fh, rule)
            elif op == "map-script":
                table = script_map.load_mapping_table(self.path(p["table"]))
                mode = p.get("mode", script_map.ONE_TO_ONE)
                lm = NGramModel.load_arpa(self.path(p["lm"]), "char") if mode == script_map.LM_SCORED else None
                config = script_map.MappingConfig(mode, int(p.get("cap", 4096)), lm)
                report = ops.map_script(inp, fh, table, config)
            elif op == "lm-score":
                model = NGramModel.load_arpa(self.path(p["lm"]), self._granularity_of(p["lm"]))
                report = ops.lm_score(inp, fh, model, per_token=_bool(p.get("per_token", "no")))
            elif op == "select":
                target = None
                unit = p.get("unit", "token")
                if "target_file" in p or "target_dist" in p:
                    target = ops.load_target(
                        self.path(p["target_dist"]) if "target_dist" in p else None,
                        self.path(p["target_file"]) if "target_file" in p else None,
                        unit,
                    )
                report = ops.select(
                    inp, fh, p["method"], int(p["n"]),
                    seed=self.seed(stage) if p["method"] == "random" else None,
                    target=target,
                    scores_path=self.path(p["scores"]) if "scores" in p else None,
                    keep_order=_bool(p.get("keep_order", "no")),
                    unit=unit,
                )
            elif op == "mass-gen":
                config = mass.MaskConfig(float(p.get("mask_fraction", 0.5)), self.seed(stage),
                                         p.get("mask_token", mass.MASK))
                ref = p["input"]
                if ref.startswith("@") and "tags" in self.outputs.get(ref[1:], {}):
                    report = ops.mass_gen(inp, fh, config, tags=mixing.read_tags(self.path(ref, "tags")))
                else:
                    report = ops.mass_gen(inp, fh, config, tag=p.get("tag", ""))
            else:  # pragma: no cover - validate_recipe rejects unknown ops
                raise RecipeError(f"unknown op {op!r}")
        return report, outs

    def _granularity_of(self, ref: str) -> str:
        if ref.startswith("@"):
            return self.recipe.stage(ref[1:]).params.get("granularity", "token")
        return "token"

    def expected_read(self, stage: Stage) -> Optional[int]:
        if stage.op == "mix":
            refs = stage.corpus_inputs()
        elif "input" in stage.params:
            refs = [stage.params["input"]]
        else:
            return None
        return sum(count_lines(self.path(r)) for r in refs)


def _check_conservation(stage: Stage, report: SelectionReport, expected_read: Optional[int],
                        main_lines: Optional[int]) -> List[str]:
    problems = []
    if not report.is_conserved():
        problems.append("lines_read != lines_selected + rejections")
    if expected_read is not None and report.lines_read != expected_read:
        problems.append(f"lines_read {report.lines_read} != upstream lines {expected_read}")
    if main_lines is not None:
        expected_out = report.lines_selected + report.extras.get("oversampled", 0)
        if main_lines != expected_out:
            problems.append(f"output has {main_lines} lines, report implies {expected_out}")
    return problems


def run_recipe(recipe: PipelineRecipe, data_dir: PathLike, work_dir: PathLike,
               manifest_path: Optional[PathLike] = None) -> dict:
    """Run every stage in order and return (and write) the manifest.

    On a stage failure the manifest is still written, with the failing stage
    marked and any partial outputs flagged, and StageError is raised.
    """
    data_dir, work_dir = Path(data_dir), Path(work_dir)
    violations = validate_recipe(recipe, data_dir)
    if violations:
        raise RecipeError("invalid recipe", violations)
    work_dir.mkdir(parents=True, exist_ok=True)
    manifest_path = Path(manifest_path) if manifest_path else work_dir / "manifest.json"
    runner = _Runner(recipe, data_dir, work_dir)
    manifest = {"recipe": recipe.name, "seed": recipe.seed, "stages": [], "conserved": True, "status": "ok"}
    t_all = time.perf_counter()
    for stage in recipe.stages:
        t0 = time.perf_counter()
        entry = {"name": stage.name, "op": stage.op, "params": dict(stage.params)}
        manifest["stages"].append(entry)
        expected = runner.expected_read(stage)
        try:
            report, outs = runner.run_stage(stage)
        except Exception as exc:
            entry["status"] = "failed"
            entry["error"] = f"{type(exc).__name__}: {exc}"
            partial = [str(p) for p in runner.work_dir.glob(f"{stage.name}.*") if p.is_file()]
            entry["partial_outputs"] = sorted(partial)
            manifest["status"] = "failed"
            manifest["failed_stage"] = stage.name
            _write_manifest(manifest, manifest_path)
            raise StageError(stage.name, exc, manifest) from exc
        runner.outputs[stage.name] = outs
        main_lines = count_lines(outs["main"]) if stage.op in CORPUS_OPS | {"lm-score", "mass-gen"} else None
        problems = _check_conservation(stage, report, expected, main_lines)
        entry.update(
            status="ok",
            report=report.to_dict(),
            lines_in=expected,
            lines_out=main_lines,
            outputs={k: {"path": str(v), "sha256": sha256_file(v)} for k, v in sorted(outs.items())},
            conservation=not problems,
            conservation_problems=problems,
            elapsed_s=round(time.perf_counter() - t0, 4),
        )
        if problems:
            manifest["conserved"] = False
            log.warning("stage %s: conservation broken: %s", stage.name, "; ".join(problems))
        log.info("stage %s done: %s", stage.name, report.to_dict())
    manifest["elapsed_s"] = round(time.perf_counter() - t_all, 4)
    _write_manifest(manifest, manifest_path)
    return manifest


def _write_manifest(manifest: dict, path: Path) -> None:
    path.write_text(json.dumps(manifest, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


def manifest_checksums(manifest: dict) -> Dict[str, str]:
    return {
        f"{s['name']}:{k}": o["sha256"]
        for s in manifest["stages"] if s.get("status") == "ok"
        for k, o in s["outputs"].items()
    }
