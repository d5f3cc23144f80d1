"""Shared fixtures: a small five-topic counterspeech corpus on disk."""

import json

import pytest

TOPICS = {
    "cats": (
        "cats are vermin and should vanish",
        [
            "cats control pests and deserve real care",
            "felines comfort many lonely people daily",
            "every cat brings value to its street",
        ],
    ),
    "rain": (
        "rain is a curse upon this town",
        [
            "rain feeds the crops we all eat",
            "wet seasons fill the rivers for everyone",
            "storms renew the soil and the air",
        ],
    ),
    "bikes": (
        "cyclists clog the roads with junk",
        [
            "bikes cut traffic and clean the air",
            "riders pay taxes like every driver",
            "cycling keeps the whole city healthier",
        ],
    ),
    "books": (
        "libraries waste public money on paper",
        [
            "libraries lift readers of every income",
            "books teach skills the town needs",
            "a library card opens countless doors",
        ],
    ),
    "soup": (
        "street kitchens attract the wrong crowd",
        [
            "soup kitchens feed neighbors through hard winters",
            "shared meals knit a town together",
            "warm food restores dignity and hope",
        ],
    ),
}


@pytest.fixture(scope="session")
def dataset_path(tmp_path_factory):
    """40 hate-speech instances (5 topics x 8 variants), 3 counters each."""
    path = tmp_path_factory.mktemp("data") / "pairs.jsonl"
    lines = []
    for topic, (hate, counters) in TOPICS.items():
        for v in range(8):
            lines.append(
                json.dumps(
                    {
                        "id": f"{topic}-{v}",
                        "hate": f"{hate} variant {v}",
                        "counters": counters,
                    }
                )
            )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
