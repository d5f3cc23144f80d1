"""Command-line entry point.

Each stage of the run is its own verb so persisted artifacts can be
inspected or swapped between stages (e.g. export response texts, embed
them with an external encoder, then continue with ``select``):

    countersel run       --set dataset.path=data.jsonl --output-dir runs/a
    countersel split     ...
    countersel pool      ...
    countersel prune     ...
    countersel embed     ...
    countersel train-map ...
    countersel select    ...
    countersel eval      ...
    countersel sweep     --counts 50,200,800 ...

Configuration comes from --config (JSON file) plus --set overrides;
verbs that need upstream artifacts compute and persist any that are
missing, so every verb works standalone in a fresh output directory.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from countersel import corpus, embed, kernels, pipeline, select as select_mod
from countersel import pool as pool_mod
from countersel.errors import FormatError, ParseError, PipelineStageError


def _set_path(raw: dict, dotted: str, value) -> None:
    keys = dotted.split(".")
    node = raw
    for key in keys[:-1]:
        node = node.setdefault(key, {})
        if not isinstance(node, dict):
            raise ValueError(f"--set {dotted}: {key!r} is not an object")
    node[keys[-1]] = value


def _parse_set(raw: dict, assignments: list[str]) -> None:
    for item in assignments:
        if "=" not in item:
            raise ValueError(f"--set expects key=value, got {item!r}")
        key, text = item.split("=", 1)
        try:
            value = json.loads(text)
        except json.JSONDecodeError:
            value = text
        _set_path(raw, key, value)


def _build_config(args) -> pipeline.PipelineConfig:
    raw: dict = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            raw = json.load(fh)
    _parse_set(raw, args.set or [])
    if args.output_dir:
        raw["output_dir"] = args.output_dir
    cfg = pipeline.PipelineConfig.from_dict(raw)
    Path(cfg.output_dir).mkdir(parents=True, exist_ok=True)
    return cfg


def _ensure_split(cfg):
    dataset = corpus.load_dataset(cfg.dataset["path"], cfg.dataset["format"])
    pairs = corpus.disaggregate(dataset)
    manifest_path = Path(cfg.output_dir) / "split.json"
    if manifest_path.exists():
        manifest = corpus.load_split_manifest(manifest_path)
        return pairs, corpus.resolve_split_manifest(pairs, manifest)
    _, split_result = pipeline.stage_split(cfg)
    return pairs, split_result


def _ensure_pool(cfg, split_result):
    path = Path(cfg.output_dir) / "pool.jsonl"
    if path.exists():
        return pool_mod.load_pool(path)
    return pipeline.stage_pool(cfg, split_result)


def _ensure_pruned(cfg, pool, split_result):
    path = Path(cfg.output_dir) / "pruned.jsonl"
    if path.exists():
        return pool_mod.load_pool(path)
    return pipeline.stage_prune(cfg, pool, split_result)


def _prepared(cfg):
    _, split_result = _ensure_split(cfg)
    pool = _ensure_pool(cfg, split_result)
    pruned = _ensure_pruned(cfg, pool, split_result)
    qtable, rtable = pipeline.stage_embed(cfg, split_result, pruned)
    return split_result, pool, pruned, qtable, rtable


def _cmd_split(cfg, args) -> int:
    _, split_result = pipeline.stage_split(cfg)
    print(
        f"split: {len(split_result.train)} train / {len(split_result.validation)} validation"
        f" / {len(split_result.test)} test pairs -> {cfg.output_dir}/split.json"
    )
    return 0


def _cmd_pool(cfg, args) -> int:
    _, split_result = _ensure_split(cfg)
    pool = pipeline.stage_pool(cfg, split_result)
    print(f"pool: {len(pool)} candidates -> {cfg.output_dir}/pool.jsonl")
    return 0


def _cmd_prune(cfg, args) -> int:
    _, split_result = _ensure_split(cfg)
    pool = _ensure_pool(cfg, split_result)
    pruned = pipeline.stage_prune(cfg, pool, split_result)
    print(f"prune: kept {len(pruned)} of {len(pool)} -> {cfg.output_dir}/pruned.jsonl")
    return 0


def _cmd_embed(cfg, args) -> int:
    _, split_result = _ensure_split(cfg)
    pool = _ensure_pool(cfg, split_result)
    pruned = _ensure_pruned(cfg, pool, split_result)
    qtable, rtable = pipeline.stage_embed(cfg, split_result, pruned)
    print(
        f"embed: {len(qtable)} queries, {len(rtable)} responses at dim {qtable.dim}"
        f" (kernels: {kernels.BACKEND})"
    )
    return 0


def _cmd_train_map(cfg, args) -> int:
    split_result, _, _, qtable, rtable = _prepared(cfg)
    train_pairs = pipeline._training_pairs(split_result.train, qtable, rtable)
    if not train_pairs:
        print("error: no usable training pairs (all embeddings zero)", file=sys.stderr)
        return 2
    val_pairs = pipeline._training_pairs(split_result.validation, qtable, rtable)
    history: list[tuple[int, float, float]] = []
    linmap = select_mod.train_map(
        train_pairs,
        pipeline.train_config(cfg),
        val_pairs or None,
        callback=lambda e, tj, vj: history.append((e, tj, vj)),
    )
    out = Path(cfg.output_dir) / "map.json"
    select_mod.save_map(linmap, out)
    last = history[-1]
    print(
        f"train-map: {len(train_pairs)} pairs, {last[0]} epochs,"
        f" monitored J {last[2]:.6f} -> {out}"
    )
    return 0


def _load_pretrained(cfg):
    out = Path(cfg.output_dir)
    pretrained = {}
    if cfg.strategy == "gps" and (out / "map.json").exists():
        pretrained["map"] = select_mod.load_map(out / "map.json")
    if cfg.strategy == "s-neg" and (out / "classifier.json").exists():
        pretrained["classifier"] = select_mod.load_classifier(out / "classifier.json")
    return pretrained or None


def _cmd_select(cfg, args) -> int:
    split_result, _, pruned, qtable, rtable = _prepared(cfg)
    selected = pipeline.stage_select(
        cfg, split_result, pruned, qtable, rtable, _load_pretrained(cfg)
    )
    print(
        f"select[{cfg.strategy}]: {len(selected)} outputs -> {cfg.output_dir}/selected.tsv"
    )
    return 0


def _read_selected(path: Path) -> dict[str, str]:
    selected: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 2:
                raise FormatError(f"{path}: line {lineno}: expected 'hate_id<TAB>text'")
            selected[parts[0]] = parts[1]
    return selected


def _cmd_eval(cfg, args) -> int:
    _, split_result = _ensure_split(cfg)
    pool = _ensure_pool(cfg, split_result)
    pruned = _ensure_pruned(cfg, pool, split_result)
    selected_path = Path(cfg.output_dir) / "selected.tsv"
    if not selected_path.exists():
        print(f"error: {selected_path} not found; run `select` first", file=sys.stderr)
        return 2
    selected = _read_selected(selected_path)
    trained_files = {}
    if (Path(cfg.output_dir) / "map.json").exists():
        trained_files["map"] = "map.json"
    if (Path(cfg.output_dir) / "classifier.json").exists():
        trained_files["classifier"] = "classifier.json"
    report, _ = pipeline.stage_eval(cfg, split_result, pool, pruned, selected, trained_files)
    print(
        f"eval[{report.strategy}]: n={report.count} dist2={report.dist2:.4f}"
        f" rouge2={report.rouge2:.4f} bm25={report.bm25:.4f}"
        f" -> {cfg.output_dir}/report.csv"
    )
    return 0


def _cmd_run(cfg, args) -> int:
    report, manifest, selected_path = pipeline.run_pipeline(cfg)
    print(
        f"run[{report.strategy}]: n={report.count} dist2={report.dist2:.4f}"
        f" rouge2={report.rouge2:.4f} bm25={report.bm25:.4f} -> {selected_path}"
    )
    print(f"config {manifest['config_hash'][:12]} pool {manifest['pool_fingerprint'][:12]}")
    return 0


def _cmd_sweep(cfg, args) -> int:
    counts = [int(c) for c in args.counts.split(",") if c.strip()]
    rows = pipeline.pool_size_sweep(cfg, counts)
    for row in rows:
        print(
            f"count={row['count']:>6} pool={row['pool_size']:>6} pruned={row['pruned_size']:>6}"
            f" dist2={row['dist2']:.4f} rouge2={row['rouge2']:.4f} bm25={row['bm25']:.4f}"
        )
    print(f"sweep: {len(rows)} rows -> {cfg.output_dir}/sweep.csv")
    return 0


_COMMANDS = {
    "split": _cmd_split,
    "pool": _cmd_pool,
    "prune": _cmd_prune,
    "embed": _cmd_embed,
    "train-map": _cmd_train_map,
    "select": _cmd_select,
    "eval": _cmd_eval,
    "run": _cmd_run,
    "sweep": _cmd_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="countersel",
        description="Generate, prune, and select counterspeech responses.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--output-dir", help="override config output_dir")
    common.add_argument(
        "--set",
        action="append",
        metavar="KEY=VALUE",
        help="override a config field by dotted path (JSON-parsed value)",
    )
    common.add_argument("-v", "--verbose", action="store_true", help="info-level logging")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name == "sweep":
            p.add_argument(
                "--counts", required=True, help="comma-separated candidate counts, ascending"
            )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = _build_config(args)
        return _COMMANDS[args.command](cfg, args)
    except PipelineStageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ParseError, FormatError, ValueError, LookupError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
