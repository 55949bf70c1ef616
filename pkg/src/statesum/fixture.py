"""Synthetic news-like corpus used for smoke tests and the bundled fixture.

Each document mixes 1-4 "story" sentences, drawn from a topical vocabulary
and echoed (minus their asides) in the reference, with filler sentences
whose content words never reach the reference. Story sentences carry
parenthetical or ", who ... ," asides so compression has something to cut.
"""
from __future__ import annotations

import random
from importlib import resources

from .corpus import Document, dump_corpus, load_corpus

STORY_SUBJECTS = ["the minister", "the court", "police", "the company", "the coach",
                  "rescuers", "the senator", "investors", "the mayor", "doctors",
                  "the union", "the army"]
STORY_VERBS = ["announced", "rejected", "approved", "investigated", "defended",
               "criticized", "launched", "delayed", "confirmed", "blocked"]
STORY_OBJECTS = ["a budget reform", "the election result", "an emergency plan",
                 "the merger deal", "new tax rules", "a flood warning", "the trade ban",
                 "the vaccine trial", "a peace agreement", "the stadium project",
                 "record profits", "the strike action"]
STORY_TAILS = ["on monday", "in parliament", "after the vote", "despite protests",
               "before the summit", "amid heavy rain", "in the capital", "late on friday"]
ASIDES = [["(", "officials", "said", ")"], ["(", "reuters", ")"],
          [",", "who", "spoke", "briefly", ","], [",", "which", "surprised", "many", ","],
          [",", "according", "to", "reports", ","], ["(", "pictured", ")"]]

FILLER = ["weather", "garden", "recipe", "coffee", "music", "painting", "holiday",
          "museum", "bicycle", "weekend", "sunset", "puzzle", "kitten", "festival",
          "lantern", "bakery", "orchard", "poetry", "harbor", "meadow", "violin",
          "cottage", "picnic", "marble", "quilt", "canyon"]
FILLER_LINKS = ["and", "with", "near", "under", "beside", "over"]


def _story(rng):
    words = (rng.choice(STORY_SUBJECTS).split() + [rng.choice(STORY_VERBS)]
             + rng.choice(STORY_OBJECTS).split() + rng.choice(STORY_TAILS).split())
    clean = list(words)
    aside = None
    if rng.random() < 0.7:
        pos = rng.randint(2, len(words) - 1)
        aside = (pos, rng.choice(ASIDES))
        words = words[:pos] + aside[1] + words[pos:]
    return words + ["."], clean + ["."], aside


def _filler(rng):
    n = rng.randint(4, 9)
    words = []
    for k in range(n):
        words.append(rng.choice(FILLER) if k % 3 != 2 else rng.choice(FILLER_LINKS))
    return ["the"] + words + ["."]


def make_fixture(n_docs=20, seed=13):
    """Deterministic list of :class:`Document` with 1-4 story sentences each."""
    rng = random.Random(seed)
    docs = []
    for d in range(n_docs):
        n_story = d % 4 + 1
        n_filler = rng.randint(3, 6)
        slots = sorted(rng.sample(range(n_story + n_filler), n_story))
        sentences, reference, spans = [], [], []
        for k in range(n_story + n_filler):
            if k in slots:
                sent, clean, aside = _story(rng)
                sentences.append(sent)
                reference.append(clean)
                spans.append([[aside[0], aside[0] + len(aside[1])]] if aside else [])
            else:
                sentences.append(_filler(rng))
                spans.append([])
        if rng.random() < 0.5:
            sentences[0] = ["(", "cnn", ")"] + sentences[0]
            spans[0] = [[0, 3]] + [[a + 3, b + 3] for a, b in spans[0]]
        docs.append(Document(f"fixture-{d:02d}", sentences, reference,
                             spans if d % 2 == 0 else None))
    return docs


def fixture_path():
    return resources.files("statesum") / "data" / "fixture.jsonl"


def load_fixture():
    with resources.as_file(fixture_path()) as path:
        return load_corpus(path)


def write_fixture(path, **kwargs):
    dump_corpus(make_fixture(**kwargs), path)
