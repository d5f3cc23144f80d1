"""End-to-end orchestration: config, stages, reports, manifests, sweep.

A run is fully described by a JSON config; every random choice flows
from a named seed in that config and no environment state is consulted,
so rerunning the same config reproduces every artifact byte for byte.
Artifacts land under ``output_dir``:

    config.json      resolved configuration as run
    split.json       pair ids per partition
    pool.jsonl       base + generated candidates
    pruned.jsonl     candidates surviving grammaticality pruning
    query_texts.tsv / response_texts.tsv   id<TAB>text exporter inputs
    queries.tsv / candidates.tsv           embeddings (fallback mode)
    map.json / classifier.json             trained selector parameters
    selected.tsv     one chosen response per test hate speech
    report.csv/.md/.json, manifest.json    evaluation outputs

A ``STALE`` marker is written when a run starts and removed on success;
if a stage fails the marker stays behind and the failure is re-raised
with the stage name attached.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
from dataclasses import dataclass
from pathlib import Path

from countersel import __version__, corpus, embed, metrics, pool as pool_mod, prune as prune_mod, select as select_mod
from countersel.errors import PipelineStageError
from countersel.metrics import MetricReport

logger = logging.getLogger(__name__)

STRATEGIES = ("gps", "s-cos", "s-tfidf", "s-neg")

_GENERATOR_KINDS = {
    "markov": {"kind": "markov", "count": 1000, "order": 2, "max_len": 40, "seed": 7},
    "external": {"kind": "external", "path": "", "count": None},
}
_SCORER_KINDS = {
    "ngram-lm": {"kind": "ngram-lm", "order": 2, "add_k": 1.0},
    "external": {"kind": "external", "path": ""},
}
_POLICY_KINDS = {
    "threshold": {"kind": "threshold", "value": 0.0},
    "keep-fraction": {"kind": "keep-fraction", "fraction": 0.513},
    "preset": {"kind": "preset", "name": "conan"},
}
_EMBEDDER_KINDS = {
    "fallback": {"kind": "fallback", "dim": 256, "seed": 29},
    "tables": {"kind": "tables", "queries": "", "candidates": ""},
}

_DEFAULTS = {
    "dataset": {"path": "", "format": "pairs-jsonl"},
    "split": {"ratios": [0.7, 0.15, 0.15], "seed": 13, "grouped": False},
    "generator": _GENERATOR_KINDS["markov"],
    "prune": {
        "skip": False,
        "scorer": _SCORER_KINDS["ngram-lm"],
        "policy": _POLICY_KINDS["keep-fraction"],
    },
    "embedder": _EMBEDDER_KINDS["fallback"],
    "strategy": "gps",
    "train": {
        "learning_rate": 0.05,
        "max_epochs": 200,
        "patience": 10,
        "seed": 3,
        "l2_penalty": 1e-4,
    },
    "neg_ratio": 4,
    "metrics": {"selfbleu_sample": None, "selfbleu_seed": 11, "external_scores": {}},
    "exclude_gold": False,
    "output_dir": "runs/default",
}


def _merge_kinded(section: str, templates: dict, user, default_kind: str) -> dict:
    user = dict(user or {})
    kind = user.get("kind", default_kind)
    if kind not in templates:
        raise ValueError(f"unknown {section} kind {kind!r}; expected one of {sorted(templates)}")
    out = dict(templates[kind])
    for key, value in user.items():
        if key not in out:
            raise ValueError(f"unknown {section} option {key!r} for kind {kind!r}")
        out[key] = value
    return out


def _merge_flat(section: str, defaults: dict, user) -> dict:
    user = dict(user or {})
    out = dict(defaults)
    for key, value in user.items():
        if key not in out:
            raise ValueError(f"unknown {section} option {key!r}")
        out[key] = value
    return out


@dataclass(frozen=True)
class PipelineConfig:
    dataset: dict
    split: dict
    generator: dict
    prune: dict
    embedder: dict
    strategy: str
    train: dict
    neg_ratio: int
    metrics: dict
    exclude_gold: bool
    output_dir: str

    @classmethod
    def from_dict(cls, raw: dict) -> "PipelineConfig":
        unknown = set(raw) - set(_DEFAULTS)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        dataset = _merge_flat("dataset", _DEFAULTS["dataset"], raw.get("dataset"))
        if not dataset["path"]:
            raise ValueError("dataset.path is required")
        if dataset["format"] not in corpus.FORMATS:
            raise ValueError(
                f"dataset.format must be one of {corpus.FORMATS}, got {dataset['format']!r}"
            )
        split_cfg = _merge_flat("split", _DEFAULTS["split"], raw.get("split"))
        generator = _merge_kinded("generator", _GENERATOR_KINDS, raw.get("generator"), "markov")
        if generator["kind"] == "external" and not generator["path"]:
            raise ValueError("generator.path is required for the external generator")
        prune_raw = dict(raw.get("prune") or {})
        unknown = set(prune_raw) - {"skip", "scorer", "policy"}
        if unknown:
            raise ValueError(f"unknown prune options: {sorted(unknown)}")
        prune_cfg = {
            "skip": bool(prune_raw.get("skip", False)),
            "scorer": _merge_kinded("prune.scorer", _SCORER_KINDS, prune_raw.get("scorer"), "ngram-lm"),
            "policy": _merge_kinded("prune.policy", _POLICY_KINDS, prune_raw.get("policy"), "keep-fraction"),
        }
        if prune_cfg["scorer"]["kind"] == "external" and not prune_cfg["scorer"]["path"]:
            raise ValueError("prune.scorer.path is required for the external scorer")
        if prune_cfg["policy"]["kind"] == "preset":
            name = prune_cfg["policy"]["name"]
            if name not in prune_mod.KEEP_FRACTION_PRESETS:
                raise ValueError(
                    f"unknown keep-fraction preset {name!r}; "
                    f"expected one of {sorted(prune_mod.KEEP_FRACTION_PRESETS)}"
                )
        embedder = _merge_kinded("embedder", _EMBEDDER_KINDS, raw.get("embedder"), "fallback")
        if embedder["kind"] == "tables" and not (embedder["queries"] and embedder["candidates"]):
            raise ValueError("embedder.queries and embedder.candidates are required for tables")
        strategy = raw.get("strategy", _DEFAULTS["strategy"])
        if strategy not in STRATEGIES:
            raise ValueError(f"strategy must be one of {STRATEGIES}, got {strategy!r}")
        train = _merge_flat("train", _DEFAULTS["train"], raw.get("train"))
        neg_ratio = int(raw.get("neg_ratio", _DEFAULTS["neg_ratio"]))
        metrics_cfg = _merge_flat("metrics", _DEFAULTS["metrics"], raw.get("metrics"))
        return cls(
            dataset=dataset,
            split=split_cfg,
            generator=generator,
            prune=prune_cfg,
            embedder=embedder,
            strategy=strategy,
            train=train,
            neg_ratio=neg_ratio,
            metrics=metrics_cfg,
            exclude_gold=bool(raw.get("exclude_gold", False)),
            output_dir=str(raw.get("output_dir", _DEFAULTS["output_dir"])),
        )

    @classmethod
    def from_file(cls, path: str | Path) -> "PipelineConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return {
            "dataset": dict(self.dataset),
            "split": dict(self.split),
            "generator": dict(self.generator),
            "prune": {
                "skip": self.prune["skip"],
                "scorer": dict(self.prune["scorer"]),
                "policy": dict(self.prune["policy"]),
            },
            "embedder": dict(self.embedder),
            "strategy": self.strategy,
            "train": dict(self.train),
            "neg_ratio": self.neg_ratio,
            "metrics": dict(self.metrics),
            "exclude_gold": self.exclude_gold,
            "output_dir": self.output_dir,
        }


def config_hash(cfg: PipelineConfig) -> str:
    """SHA-256 of the canonical config JSON, output location excluded."""
    payload = cfg.to_dict()
    payload.pop("output_dir")
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _write_text(path: Path, content: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(content)


def _write_json(path: Path, payload) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, sort_keys=True, indent=1)
        fh.write("\n")


# ---------------------------------------------------------------------------
# stage logic (pure helpers; the stage_* wrappers add artifact writing)


def _load_and_split(cfg: PipelineConfig):
    dataset = corpus.load_dataset(cfg.dataset["path"], cfg.dataset["format"])
    pairs = corpus.disaggregate(dataset)
    split_result = corpus.split(
        pairs,
        ratios=tuple(cfg.split["ratios"]),
        seed=int(cfg.split["seed"]),
        grouped=bool(cfg.split["grouped"]),
    )
    return dataset, pairs, split_result


def _build_pool(cfg: PipelineConfig, split_result, count_override: int | None = None):
    base = pool_mod.build_base_pool(split_result.train)
    gen = cfg.generator
    count = count_override if count_override is not None else gen.get("count")
    if gen["kind"] == "markov":
        extra = pool_mod.generate_markov(
            base,
            count=int(count),
            order=int(gen["order"]),
            max_len=int(gen["max_len"]),
            seed=int(gen["seed"]),
        )
    else:
        extra = pool_mod.ingest_candidates(gen["path"])
        if count is not None:
            extra = extra[: int(count)]
    return pool_mod.extend_pool(base, extra)


def _prune_policy(cfg: PipelineConfig):
    policy = cfg.prune["policy"]
    if policy["kind"] == "threshold":
        return prune_mod.Threshold(float(policy["value"]))
    if policy["kind"] == "keep-fraction":
        return prune_mod.KeepFraction(float(policy["fraction"]))
    return prune_mod.KeepFraction(prune_mod.KEEP_FRACTION_PRESETS[policy["name"]])


def _prune_pool(cfg: PipelineConfig, pool, split_result):
    if cfg.prune["skip"]:
        return pool
    scorer_cfg = cfg.prune["scorer"]
    if scorer_cfg["kind"] == "ngram-lm":
        scorer = prune_mod.train_lm_scorer(
            [p.counter.text for p in split_result.train],
            order=int(scorer_cfg["order"]),
            add_k=float(scorer_cfg["add_k"]),
        )
    else:
        scorer = prune_mod.load_external_scores(scorer_cfg["path"])
    return prune_mod.prune(pool, scorer, _prune_policy(cfg))


def _query_items(split_result) -> list[tuple[str, str]]:
    seen: set[str] = set()
    items: list[tuple[str, str]] = []
    for part in (split_result.train, split_result.validation, split_result.test):
        for pair in part:
            if pair.hate.id not in seen:
                seen.add(pair.hate.id)
                items.append((pair.hate.id, pair.hate.text))
    return items


def _response_items(split_result, pruned) -> list[tuple[str, str]]:
    seen: set[str] = set()
    items: list[tuple[str, str]] = []
    for part in (split_result.train, split_result.validation):
        for pair in part:
            if pair.counter.id not in seen:
                seen.add(pair.counter.id)
                items.append((pair.counter.id, pair.counter.text))
    for cand in pruned.candidates:
        if cand.id not in seen:
            seen.add(cand.id)
            items.append((cand.id, cand.text))
    return items


def _fit_embedder(cfg: PipelineConfig, split_result):
    """Returns either ("fallback", embedder) or ("tables", (qtable, rtable)).

    The fallback embedder is fitted on training-split texts only, so the
    embedding space never depends on the generator or the test data.
    """
    emb = cfg.embedder
    if emb["kind"] == "tables":
        return "tables", (embed.load_table(emb["queries"]), embed.load_table(emb["candidates"]))
    corpus_texts: list[str] = []
    seen: set[str] = set()
    for pair in split_result.train:
        for text in (pair.hate.text, pair.counter.text):
            if text not in seen:
                seen.add(text)
                corpus_texts.append(text)
    embedder = embed.fit_fallback_embedder(
        corpus_texts, dim=int(emb["dim"]), seed=int(emb["seed"])
    )
    return "fallback", embedder


def _make_tables(kind, fitted, split_result, pruned):
    if kind == "tables":
        return fitted
    qtable = fitted.embed_many(_query_items(split_result))
    rtable = fitted.embed_many(_response_items(split_result, pruned))
    return qtable, rtable


def _training_pairs(part, qtable, rtable):
    missing = sorted(
        {p.hate.id for p in part if p.hate.id not in qtable}
        | {p.counter.id for p in part if p.counter.id not in rtable}
    )
    if missing:
        raise LookupError(f"split pairs missing from embedding tables: {missing[:10]}")
    out = []
    for p in part:
        e_x = qtable[p.hate.id]
        e_y = rtable[p.counter.id]
        if embed.is_rankable(e_x) and embed.is_rankable(e_y):
            out.append((e_x, e_y))
    return out


def _test_instances(split_result) -> list[tuple[str, str, list[str]]]:
    """(hate_id, hate_text, gold reference texts) in first-appearance order."""
    order: list[str] = []
    texts: dict[str, str] = {}
    golds: dict[str, list[str]] = {}
    for pair in split_result.test:
        hid = pair.hate.id
        if hid not in texts:
            order.append(hid)
            texts[hid] = pair.hate.text
            golds[hid] = []
        golds[hid].append(pair.counter.text)
    return [(hid, texts[hid], golds[hid]) for hid in order]


def _fallback_candidate(subpool):
    return min(subpool.candidates, key=lambda c: c.id)


def train_config(cfg: PipelineConfig) -> select_mod.TrainConfig:
    return select_mod.TrainConfig(
        learning_rate=float(cfg.train["learning_rate"]),
        max_epochs=int(cfg.train["max_epochs"]),
        patience=int(cfg.train["patience"]),
        seed=int(cfg.train["seed"]),
        l2_penalty=float(cfg.train["l2_penalty"]),
    )


def _select_outputs(cfg: PipelineConfig, split_result, pruned, qtable, rtable, pretrained=None):
    """Pick one response per test hate speech under the configured strategy.

    Returns (selected: hate_id -> text, trained: artifacts to persist).
    ``pretrained`` may carry an already-fitted "map" or "classifier" to
    reuse instead of training. When a query cannot be ranked (zero
    embedding, or a tf-idf query with no shared vocabulary) the
    lexicographically first candidate is substituted so the run stays
    total; each substitution is logged.
    """
    train_cfg = train_config(cfg)
    trained: dict = {"map": None, "classifier": None}
    if pretrained:
        trained.update(pretrained)
    strategy = cfg.strategy

    if strategy == "gps" and trained["map"] is None:
        train_pairs = _training_pairs(split_result.train, qtable, rtable)
        if not train_pairs:
            raise ValueError("no usable training pairs (all embeddings zero)")
        val_pairs = _training_pairs(split_result.validation, qtable, rtable)
        linmap = select_mod.train_map(train_pairs, train_cfg, val_pairs or None)
        trained["map"] = linmap
    elif strategy == "s-neg" and trained["classifier"] is None:
        train_pairs = _training_pairs(split_result.train, qtable, rtable)
        if not train_pairs:
            raise ValueError("no usable training pairs (all embeddings zero)")
        clf = select_mod.train_neg_classifier(
            train_pairs, pruned, rtable, int(cfg.neg_ratio), train_cfg
        )
        trained["classifier"] = clf

    selected: dict[str, str] = {}
    for hid, hate_text, gold in _test_instances(split_result):
        if cfg.exclude_gold:
            gold_set = set(gold)
            subpool = pool_mod.CandidatePool(
                candidates=[c for c in pruned.candidates if c.text not in gold_set]
            )
            if not subpool.candidates:
                subpool = pruned
        else:
            subpool = pruned

        ranked = []
        if strategy == "s-tfidf":
            ranked = select_mod.select_tfidf(hate_text, subpool, 1)
        else:
            if hid not in qtable:
                raise LookupError(f"test hate speech {hid!r} missing from query table")
            e_x = qtable[hid]
            if embed.is_rankable(e_x):
                if strategy == "gps":
                    ranked = select_mod.select_topk(e_x, subpool, rtable, trained["map"], 1)
                elif strategy == "s-cos":
                    ranked = select_mod.select_cos(e_x, subpool, rtable, 1)
                else:
                    ranked = select_mod.select_by_classifier(
                        e_x, subpool, rtable, trained["classifier"], 1
                    )
        if ranked:
            selected[hid] = ranked[0][0].text
        else:
            fallback = _fallback_candidate(subpool)
            logger.warning(
                "no rankable candidate for %s; substituting %s", hid, fallback.id
            )
            selected[hid] = fallback.text
    return selected, trained


def _load_external_scores(cfg: PipelineConfig) -> dict[str, dict[str, float]] | None:
    paths = cfg.metrics.get("external_scores") or {}
    if not paths:
        return None
    return {
        name: prune_mod.load_external_scores(path).scores
        for name, path in sorted(paths.items())
    }


def _evaluate(cfg: PipelineConfig, split_result, pruned, selected) -> MetricReport:
    sample = cfg.metrics.get("selfbleu_sample")
    return metrics.evaluate_run(
        split_result.test,
        selected,
        pruned,
        _load_external_scores(cfg),
        strategy=cfg.strategy,
        selfbleu_sample=int(sample) if sample is not None else None,
        selfbleu_seed=int(cfg.metrics.get("selfbleu_seed", 0)),
        config_hash=config_hash(cfg),
    )


# ---------------------------------------------------------------------------
# artifact-writing stages


def stage_split(cfg: PipelineConfig):
    _, pairs, split_result = _load_and_split(cfg)
    out = Path(cfg.output_dir)
    corpus.write_split_manifest(split_result, out / "split.json")
    return pairs, split_result


def stage_pool(cfg: PipelineConfig, split_result):
    pool = _build_pool(cfg, split_result)
    pool_mod.save_pool(pool, Path(cfg.output_dir) / "pool.jsonl")
    return pool


def _sanitize(text: str) -> str:
    return " ".join(text.split())


def _write_texts_tsv(path: Path, items: list[tuple[str, str]]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for key, text in items:
            fh.write(f"{key}\t{_sanitize(text)}\n")


def stage_prune(cfg: PipelineConfig, pool, split_result):
    pruned = _prune_pool(cfg, pool, split_result)
    out = Path(cfg.output_dir)
    pool_mod.save_pool(pruned, out / "pruned.jsonl")
    # exporter inputs: everything the embedding tables must cover
    _write_texts_tsv(out / "query_texts.tsv", _query_items(split_result))
    _write_texts_tsv(out / "response_texts.tsv", _response_items(split_result, pruned))
    return pruned


def stage_embed(cfg: PipelineConfig, split_result, pruned):
    kind, fitted = _fit_embedder(cfg, split_result)
    qtable, rtable = _make_tables(kind, fitted, split_result, pruned)
    if kind == "fallback":
        out = Path(cfg.output_dir)
        embed.save_table(qtable, out / "queries.tsv")
        embed.save_table(rtable, out / "candidates.tsv")
    return qtable, rtable


def stage_select(cfg: PipelineConfig, split_result, pruned, qtable, rtable, pretrained=None):
    selected, trained = _select_outputs(cfg, split_result, pruned, qtable, rtable, pretrained)
    out = Path(cfg.output_dir)
    if trained["map"] is not None:
        select_mod.save_map(trained["map"], out / "map.json")
    if trained["classifier"] is not None:
        select_mod.save_classifier(trained["classifier"], out / "classifier.json")
    rows = [(hid, selected[hid]) for hid, _, _ in _test_instances(split_result)]
    _write_texts_tsv(out / "selected.tsv", rows)
    return selected


def _build_manifest(cfg: PipelineConfig, pool, pruned, split_result, trained_files: dict) -> dict:
    return {
        "config_hash": config_hash(cfg),
        "pool_fingerprint": pool.fingerprint(),
        "pruned_fingerprint": pruned.fingerprint(),
        "artifacts": {
            "split": "split.json",
            "pool": "pool.jsonl",
            "pruned": "pruned.jsonl",
            "selected": "selected.tsv",
            **trained_files,
        },
        "sizes": {
            "pool": len(pool),
            "pruned": len(pruned),
            "train_pairs": len(split_result.train),
            "validation_pairs": len(split_result.validation),
            "test_pairs": len(split_result.test),
            "test_instances": len(_test_instances(split_result)),
        },
        "strategy": cfg.strategy,
        "version": __version__,
    }


def stage_eval(cfg: PipelineConfig, split_result, pool, pruned, selected, trained_files: dict):
    report = _evaluate(cfg, split_result, pruned, selected)
    manifest = _build_manifest(cfg, pool, pruned, split_result, trained_files)
    out = Path(cfg.output_dir)
    for fmt in ("csv", "markdown", "json"):
        suffix = {"csv": "csv", "markdown": "md", "json": "json"}[fmt]
        emit_report([report], manifest, fmt, out / f"report.{suffix}")
    _write_json(out / "manifest.json", manifest)
    return report, manifest


def run_pipeline(cfg: PipelineConfig):
    """Execute every stage; returns (report, manifest, selected path)."""
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    stale = out / "STALE"
    _write_text(stale, f"run incomplete; config {config_hash(cfg)}\n")
    _write_json(out / "config.json", cfg.to_dict())

    def stage(name, fn, *args):
        try:
            return fn(*args)
        except PipelineStageError:
            raise
        except Exception as exc:
            raise PipelineStageError(name, exc) from exc

    _, split_result = stage("split", stage_split, cfg)
    pool = stage("pool", stage_pool, cfg, split_result)
    pruned = stage("prune", stage_prune, cfg, pool, split_result)
    qtable, rtable = stage("embed", stage_embed, cfg, split_result, pruned)
    selected = stage("select", stage_select, cfg, split_result, pruned, qtable, rtable)
    trained_files = {}
    if cfg.strategy == "gps":
        trained_files["map"] = "map.json"
    if cfg.strategy == "s-neg":
        trained_files["classifier"] = "classifier.json"
    report, manifest = stage(
        "eval", stage_eval, cfg, split_result, pool, pruned, selected, trained_files
    )
    stale.unlink()
    return report, manifest, out / "selected.tsv"


def pool_size_sweep(cfg: PipelineConfig, counts: list[int]):
    """Rerun pool building through evaluation per candidate count.

    The split and the embedder are computed once and shared; each count
    gets its own pool, prune, and selection. Rows land in sweep.csv and
    full reports in sweep.json.
    """
    if not counts:
        raise ValueError("counts must be non-empty")
    if any(c < 0 for c in counts):
        raise ValueError(f"counts must be >= 0, got {counts}")
    if sorted(counts) != list(counts):
        raise ValueError(f"counts must be ascending, got {counts}")
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    _, _, split_result = _load_and_split(cfg)
    corpus.write_split_manifest(split_result, out / "split.json")
    kind, fitted = _fit_embedder(cfg, split_result)

    rows = []
    reports = []
    for count in counts:
        pool = _build_pool(cfg, split_result, count_override=count)
        pruned = _prune_pool(cfg, pool, split_result)
        qtable, rtable = _make_tables(kind, fitted, split_result, pruned)
        selected, _ = _select_outputs(cfg, split_result, pruned, qtable, rtable)
        report = _evaluate(cfg, split_result, pruned, selected)
        rows.append(
            {
                "count": count,
                "pool_size": len(pool),
                "pruned_size": len(pruned),
                "dist2": report.dist2,
                "rouge2": report.rouge2,
                "bm25": report.bm25,
            }
        )
        reports.append(report)

    with open(out / "sweep.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(
            fh,
            fieldnames=["count", "pool_size", "pruned_size", "dist2", "rouge2", "bm25"],
            lineterminator="\n",
        )
        writer.writeheader()
        for row in rows:
            writer.writerow(
                {k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()}
            )
    _write_json(
        out / "sweep.json",
        {"counts": list(counts), "rows": rows, "reports": [r.as_dict() for r in reports]},
    )
    return rows


# ---------------------------------------------------------------------------
# report serialization

_CSV_CORE = [
    "strategy",
    "count",
    "dist1",
    "dist2",
    "ent1",
    "ent2",
    "selfbleu1",
    "selfbleu2",
    "bleu2",
    "rouge2",
    "bm25",
    "pool_fingerprint",
    "config_hash",
]

_FLOAT_FIELDS = (
    "dist1",
    "dist2",
    "ent1",
    "ent2",
    "selfbleu1",
    "selfbleu2",
    "bleu2",
    "rouge2",
    "bm25",
)

# Markdown mirrors the published table layout; the three external
# columns are scores this package never computes in-process.
_MD_EXTERNAL = ("ms", "bs", "gr")


def emit_report(reports, manifest, format: str, path: str | Path) -> Path:
    """Serialize reports (plus manifest context) as csv, markdown, or json."""
    if isinstance(reports, MetricReport):
        reports = [reports]
    path = Path(path)
    if format == "csv":
        content = _reports_to_csv(reports)
    elif format == "markdown":
        content = _reports_to_markdown(reports, manifest)
    elif format == "json":
        content = json.dumps(
            {"manifest": manifest, "reports": [r.as_dict() for r in reports]},
            sort_keys=True,
            indent=1,
        )
        content += "\n"
    else:
        raise ValueError(f"unknown report format {format!r}")
    _write_text(path, content)
    return path


def _external_names(reports) -> list[str]:
    names: set[str] = set()
    for r in reports:
        names.update(r.external)
    return sorted(names)


def _reports_to_csv(reports) -> str:
    names = _external_names(reports)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(_CSV_CORE + [f"ext:{n}" for n in names])
    for r in reports:
        d = r.as_dict()
        row = []
        for col in _CSV_CORE:
            value = d[col]
            row.append(repr(value) if isinstance(value, float) else str(value))
        for n in names:
            row.append(repr(r.external[n]) if n in r.external else "")
        writer.writerow(row)
    return buf.getvalue()


def _md_cell(value: float | None) -> str:
    return "—" if value is None else f"{value:.4f}"


def _reports_to_markdown(reports, manifest) -> str:
    names = [n for n in _external_names(reports) if n.lower() not in _MD_EXTERNAL]
    header = (
        ["Strategy", "N", "Dist-1", "Dist-2", "Ent-1", "Ent-2", "SB-1", "SB-2", "B-2", "R-2"]
        + ["MS", "BS"]
        + ["BM25"]
        + ["GR"]
        + names
    )
    lines = [
        "| " + " | ".join(header) + " |",
        "|" + "|".join(["---"] * len(header)) + "|",
    ]
    for r in reports:
        ext = {k.lower(): v for k, v in r.external.items()}
        cells = [
            r.strategy,
            str(r.count),
            _md_cell(r.dist1),
            _md_cell(r.dist2),
            _md_cell(r.ent1),
            _md_cell(r.ent2),
            _md_cell(r.selfbleu1),
            _md_cell(r.selfbleu2),
            _md_cell(r.bleu2),
            _md_cell(r.rouge2),
            _md_cell(ext.get("ms")),
            _md_cell(ext.get("bs")),
            _md_cell(r.bm25),
            _md_cell(ext.get("gr")),
        ] + [_md_cell(r.external.get(n)) for n in names]
        lines.append("| " + " | ".join(cells) + " |")
    lines.append("")
    if manifest:
        lines.append(
            f"config `{manifest.get('config_hash', '')}` · "
            f"pool `{manifest.get('pruned_fingerprint', '')}` · natural-log entropies"
        )
        lines.append("")
    return "\n".join(lines)


def load_reports(path: str | Path, format: str) -> list[MetricReport]:
    """Inverse of emit_report for the csv and json formats."""
    path = Path(path)
    if format == "json":
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
        return [_report_from_dict(d) for d in payload["reports"]]
    if format != "csv":
        raise ValueError(f"unknown report format {format!r}")
    out = []
    with open(path, encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            external = {
                col[len("ext:") :]: float(value)
                for col, value in row.items()
                if col.startswith("ext:") and value
            }
            out.append(
                MetricReport(
                    strategy=row["strategy"],
                    count=int(row["count"]),
                    external=external,
                    pool_fingerprint=row["pool_fingerprint"],
                    config_hash=row["config_hash"],
                    **{f: float(row[f]) for f in _FLOAT_FIELDS},
                )
            )
    return out


def _report_from_dict(d: dict) -> MetricReport:
    return MetricReport(
        strategy=d["strategy"],
        count=int(d["count"]),
        dist1=d["dist1"],
        dist2=d["dist2"],
        ent1=d["ent1"],
        ent2=d["ent2"],
        selfbleu1=d["selfbleu1"],
        selfbleu2=d["selfbleu2"],
        bleu2=d["bleu2"],
        rouge2=d["rouge2"],
        bm25=d["bm25"],
        external={k: float(v) for k, v in d.get("external", {}).items()},
        pool_fingerprint=d.get("pool_fingerprint", ""),
        config_hash=d.get("config_hash", ""),
    )
