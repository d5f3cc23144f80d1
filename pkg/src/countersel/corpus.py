"""Dataset loading, pair dis-aggregation, and deterministic splits.

Three input formats are supported and normalized into one in-memory
shape (hate speech with its list of reference counterspeech):

* ``pairs-jsonl`` — the canonical internal format, one JSON object per
  line: ``{"id": ..., "hate": ..., "counters": [...]}`` (``id``
  optional).
* ``conan-json`` — a whole-file JSON object with a ``conan`` list of
  records carrying ``hateSpeech``/``counterSpeech`` (and optionally
  ``cn_id`` and ``language``); non-English records are dropped when a
  language tag is present, and records sharing the same hate speech text
  are grouped.
* ``reddit-gab-csv`` — CSV with ``text`` (numbered conversation lines),
  ``hate_speech_idx`` (list of 1-based line numbers labeled as hate
  speech), and ``response`` (list of counterspeech). Only the labeled
  lines are kept.

Records that end up with zero counterspeech are rejected and counted in
``Dataset.rejected`` rather than failing the whole load.
"""

from __future__ import annotations

import ast
import csv
import json
import math
import random
import re
from dataclasses import dataclass, field
from pathlib import Path

from countersel.errors import ParseError

FORMATS = ("pairs-jsonl", "conan-json", "reddit-gab-csv")


@dataclass(frozen=True)
class HateSpeechInstance:
    id: str
    text: str


@dataclass(frozen=True)
class CounterspeechInstance:
    id: str
    text: str


@dataclass(frozen=True)
class ConversationPair:
    hate: HateSpeechInstance
    counter: CounterspeechInstance


@dataclass
class Conversation:
    """One hate speech with all of its reference counterspeech."""

    hate: HateSpeechInstance
    counters: list[CounterspeechInstance]


@dataclass
class Dataset:
    conversations: list[Conversation]
    rejected: int = 0

    def __len__(self) -> int:
        return len(self.conversations)


def _clean(text: str) -> str:
    return text.strip()


def load_dataset(path: str | Path, format: str) -> Dataset:
    """Load a dataset file in one of the supported formats.

    Every returned hate speech has at least one counterspeech; records
    without any are counted in ``Dataset.rejected``. Ids are assigned
    deterministically from record order when the file carries none.
    """
    path = Path(path)
    if format == "pairs-jsonl":
        return _load_pairs_jsonl(path)
    if format == "conan-json":
        return _load_conan_json(path)
    if format == "reddit-gab-csv":
        return _load_reddit_gab_csv(path)
    raise ValueError(f"unknown dataset format {format!r}; expected one of {FORMATS}")


def _counter_instances(hate_id: str, texts: list[str]) -> list[CounterspeechInstance]:
    return [
        CounterspeechInstance(id=f"{hate_id}-c{j}", text=t) for j, t in enumerate(texts)
    ]


def _load_pairs_jsonl(path: Path) -> Dataset:
    conversations: list[Conversation] = []
    rejected = 0
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}: line {lineno}: invalid JSON ({exc.msg})") from exc
            if not isinstance(record, dict) or "hate" not in record or "counters" not in record:
                raise ParseError(
                    f"{path}: line {lineno}: expected object with 'hate' and 'counters'"
                )
            hate_text = _clean(str(record["hate"]))
            if not hate_text:
                raise ParseError(f"{path}: line {lineno}: empty hate speech text")
            counters = record["counters"]
            if not isinstance(counters, list):
                raise ParseError(f"{path}: line {lineno}: 'counters' must be a list")
            counter_texts = [_clean(str(c)) for c in counters]
            counter_texts = [c for c in counter_texts if c]
            if not counter_texts:
                rejected += 1
                continue
            hate_id = str(record["id"]) if "id" in record else f"h{lineno:06d}"
            hate = HateSpeechInstance(id=hate_id, text=hate_text)
            conversations.append(
                Conversation(hate=hate, counters=_counter_instances(hate_id, counter_texts))
            )
    _check_unique_ids(conversations, path)
    return Dataset(conversations=conversations, rejected=rejected)


def _load_conan_json(path: Path) -> Dataset:
    with open(path, encoding="utf-8") as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: line {exc.lineno}: invalid JSON ({exc.msg})") from exc
    if not isinstance(payload, dict) or not isinstance(payload.get("conan"), list):
        raise ParseError(f"{path}: expected a top-level object with a 'conan' list")

    # Group by hate speech text, keeping first-appearance order.
    groups: dict[str, list[str]] = {}
    for idx, record in enumerate(payload["conan"]):
        if not isinstance(record, dict):
            raise ParseError(f"{path}: record {idx}: expected an object")
        language = str(record.get("language", "EN"))
        if not language.upper().startswith("EN"):
            continue
        try:
            hate_text = _clean(str(record["hateSpeech"]))
            counter_text = _clean(str(record["counterSpeech"]))
        except KeyError as exc:
            raise ParseError(f"{path}: record {idx}: missing field {exc}") from exc
        if not hate_text:
            raise ParseError(f"{path}: record {idx}: empty hate speech text")
        groups.setdefault(hate_text, [])
        if counter_text:
            groups[hate_text].append(counter_text)

    conversations: list[Conversation] = []
    rejected = 0
    for gidx, (hate_text, counter_texts) in enumerate(groups.items(), start=1):
        if not counter_texts:
            rejected += 1
            continue
        hate_id = f"h{gidx:06d}"
        hate = HateSpeechInstance(id=hate_id, text=hate_text)
        conversations.append(
            Conversation(hate=hate, counters=_counter_instances(hate_id, counter_texts))
        )
    _check_unique_ids(conversations, path)
    return Dataset(conversations=conversations, rejected=rejected)


_LINE_NUMBER_PREFIX = re.compile(r"^\s*\d+\s*[.)]\s*")


def _load_reddit_gab_csv(path: Path) -> Dataset:
    conversations: list[Conversation] = []
    rejected = 0
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"text", "hate_speech_idx", "response"} <= set(
            reader.fieldnames
        ):
            raise ParseError(
                f"{path}: line 1: header must include 'text', 'hate_speech_idx', 'response'"
            )
        for rownum, row in enumerate(reader, start=2):
            idx_raw = (row["hate_speech_idx"] or "").strip()
            resp_raw = (row["response"] or "").strip()
            if not idx_raw or idx_raw.lower() == "n/a" or not resp_raw or resp_raw.lower() == "n/a":
                rejected += 1
                continue
            try:
                idx_list = ast.literal_eval(idx_raw)
                responses = ast.literal_eval(resp_raw)
            except (ValueError, SyntaxError) as exc:
                raise ParseError(f"{path}: line {rownum}: malformed list field ({exc})") from exc
            if not isinstance(idx_list, (list, tuple)) or not isinstance(responses, (list, tuple)):
                raise ParseError(f"{path}: line {rownum}: expected list-valued fields")
            lines = (row["text"] or "").split("\n")
            picked: list[str] = []
            for i in idx_list:
                if not isinstance(i, int) or not (1 <= i <= len(lines)):
                    raise ParseError(f"{path}: line {rownum}: hate_speech_idx {i!r} out of range")
                picked.append(_LINE_NUMBER_PREFIX.sub("", lines[i - 1]).strip())
            hate_text = _clean(" ".join(p for p in picked if p))
            counter_texts = [_clean(str(r)) for r in responses]
            counter_texts = [c for c in counter_texts if c and c.lower() != "n/a"]
            if not hate_text:
                raise ParseError(f"{path}: line {rownum}: empty hate speech text")
            if not counter_texts:
                rejected += 1
                continue
            hate_id = _clean(str(row.get("id") or "")) or f"h{rownum - 1:06d}"
            hate = HateSpeechInstance(id=hate_id, text=hate_text)
            conversations.append(
                Conversation(hate=hate, counters=_counter_instances(hate_id, counter_texts))
            )
    _check_unique_ids(conversations, path)
    return Dataset(conversations=conversations, rejected=rejected)


def _check_unique_ids(conversations: list[Conversation], path: Path) -> None:
    seen: set[str] = set()
    for conv in conversations:
        if conv.hate.id in seen:
            raise ParseError(f"{path}: duplicate hate speech id {conv.hate.id!r}")
        seen.add(conv.hate.id)


def disaggregate(dataset: Dataset) -> list[ConversationPair]:
    """One pair per (hate, counter) combination, in dataset order."""
    return [
        ConversationPair(hate=conv.hate, counter=counter)
        for conv in dataset.conversations
        for counter in conv.counters
    ]


@dataclass
class DatasetSplit:
    train: list[ConversationPair]
    validation: list[ConversationPair]
    test: list[ConversationPair]
    seed: int
    ratios: tuple[float, float, float]
    grouped: bool = False


def _check_ratios(ratios) -> tuple[float, float, float]:
    if len(ratios) != 3:
        raise ValueError(f"expected 3 ratios, got {len(ratios)}")
    r = tuple(float(x) for x in ratios)
    if any(x <= 0 for x in r):
        raise ValueError(f"ratios must be positive, got {r}")
    if abs(sum(r) - 1.0) > 1e-9:
        raise ValueError(f"ratios must sum to 1, got {r} (sum {sum(r)})")
    return r


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def split(
    pairs: list[ConversationPair],
    ratios=(0.7, 0.15, 0.15),
    seed: int = 0,
    grouped: bool = False,
) -> DatasetSplit:
    """Deterministic train/validation/test partition of a pair list.

    ``grouped=False`` splits pairs independently; boundaries come from
    cumulative half-up rounding so the three sizes always sum to the
    input size. ``grouped=True`` keeps all pairs that share a hate
    speech inside one partition (leakage-safe mode), so sizes then only
    approximate the ratios.
    """
    ratios = _check_ratios(ratios)
    if not pairs:
        raise ValueError("cannot split an empty pair list")
    n = len(pairs)
    b1 = _round_half_up(n * ratios[0])
    b2 = _round_half_up(n * (ratios[0] + ratios[1]))
    rng = random.Random(seed)

    if not grouped:
        order = list(range(n))
        rng.shuffle(order)
        buckets = (set(order[:b1]), set(order[b1:b2]), set(order[b2:]))
    else:
        group_ids: list[str] = []
        members: dict[str, list[int]] = {}
        for i, pair in enumerate(pairs):
            if pair.hate.id not in members:
                group_ids.append(pair.hate.id)
                members[pair.hate.id] = []
            members[pair.hate.id].append(i)
        rng.shuffle(group_ids)
        buckets = (set(), set(), set())
        placed = 0
        for gid in group_ids:
            if placed < b1:
                which = 0
            elif placed < b2:
                which = 1
            else:
                which = 2
            buckets[which].update(members[gid])
            placed += len(members[gid])

    # Partition-internal order follows the original pair order.
    parts = tuple([pairs[i] for i in range(n) if i in bucket] for bucket in buckets)
    return DatasetSplit(
        train=parts[0],
        validation=parts[1],
        test=parts[2],
        seed=seed,
        ratios=ratios,
        grouped=grouped,
    )


def _pair_key(pair: ConversationPair) -> list[str]:
    return [pair.hate.id, pair.counter.id]


def split_manifest(split_result: DatasetSplit) -> dict:
    """JSON-ready manifest with seed, ratios, and pair ids per partition."""
    return {
        "seed": split_result.seed,
        "ratios": list(split_result.ratios),
        "grouped": split_result.grouped,
        "train": [_pair_key(p) for p in split_result.train],
        "validation": [_pair_key(p) for p in split_result.validation],
        "test": [_pair_key(p) for p in split_result.test],
    }


def write_split_manifest(split_result: DatasetSplit, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(split_manifest(split_result), fh, sort_keys=True, indent=1)
        fh.write("\n")


def resolve_split_manifest(pairs: list[ConversationPair], manifest: dict) -> DatasetSplit:
    """Rebuild a DatasetSplit from a manifest against the same pair list."""
    index = {(p.hate.id, p.counter.id): p for p in pairs}
    parts: dict[str, list[ConversationPair]] = {}
    for name in ("train", "validation", "test"):
        out = []
        for hid, cid in manifest[name]:
            pair = index.get((hid, cid))
            if pair is None:
                raise ParseError(f"split manifest references unknown pair ({hid}, {cid})")
            out.append(pair)
        parts[name] = out
    return DatasetSplit(
        train=parts["train"],
        validation=parts["validation"],
        test=parts["test"],
        seed=int(manifest["seed"]),
        ratios=tuple(manifest["ratios"]),
        grouped=bool(manifest.get("grouped", False)),
    )


def load_split_manifest(path: str | Path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)
