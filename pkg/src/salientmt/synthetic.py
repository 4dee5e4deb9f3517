"""Deterministic synthetic corpora for end-to-end experiments and benchmarks.

The experiment corpus plants cue words for one sense of one ambiguous word
in every pseudo-document, so a keyword prefix carries exactly the signal
the mock translator needs: a context-aware run should disambiguate every
example, while a context-agnostic run falls back to each word's default
sense. The matching benchmark plants punctuation-perturbed copies of real
sentences as needles with per-sentence serial tokens, making the intended
document provably unique.
"""

import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .mock_mt import LexiconSense, MockLexicon
from .testset import RawDocument, WsdRecord
from .util import stable_seed
from .wsd_eval import SenseInventory

SUBCORPUS = "synthetic"

# word -> [(cluster_id, target, cues)]; first sense is the lexicon default.
AMBIGUOUS_WORDS: list[tuple[str, list[tuple[str, str, tuple[str, ...]]]]] = [
    ("bank", [("finance", "kreditbank", ("money", "loan", "vault")),
              ("river", "uferbank", ("water", "shore", "fishing"))]),
    ("plant", [("factory", "fabrik", ("industry", "machines", "workers")),
               ("flora", "pflanze", ("garden", "leaves", "soil"))]),
    ("spring", [("season", "fruehjahr", ("blossom", "april", "thaw")),
                ("coil", "spiralfeder", ("metal", "tension", "mattress"))]),
    ("bat", [("animal", "fledermaus", ("cave", "nocturnal", "wings")),
             ("sports", "schlagholz", ("baseball", "innings", "pitcher"))]),
    ("crane", [("machine", "hebekran", ("construction", "lifting", "girder")),
               ("bird", "kranich", ("wetland", "migration", "feathers"))]),
]

_ADJECTIVES = ["old", "busy", "quiet", "famous", "nearby", "small", "large", "new"]
_VERBS = ["seen", "visited", "mentioned", "found", "described", "pictured"]
_NOUNS = ["village", "market", "station", "bridge", "square", "harbor"]

_MAJORITY_SHARE = 0.65


def default_lexicon() -> MockLexicon:
    entries = {
        word: tuple(LexiconSense(cid, target, frozenset(cues))
                    for cid, target, cues in senses)
        for word, senses in AMBIGUOUS_WORDS
    }
    return MockLexicon(entries)


def default_inventory() -> SenseInventory:
    clusters = {
        (word, cid): frozenset([target])
        for word, senses in AMBIGUOUS_WORDS
        for cid, target, _ in senses
    }
    return SenseInventory(clusters)


@dataclass
class ExperimentFixture:
    """Everything one run of the mock experiment needs, plus ground truth."""

    bitext_lines: list[str]
    records: list[WsdRecord]
    record_pair_ids: list[int]
    true_cluster: list[str]
    default_cluster: dict[str, str]
    lexicon: MockLexicon
    inventory: SenseInventory


def _translate_tokens(tokens: Sequence[str], word: str, target: str) -> str:
    return " ".join(target if t == word else t for t in tokens)


def build_experiment_corpus(n_docs: int = 1000, seed: int = 0) -> ExperimentFixture:
    """Generate a pseudo-document corpus with planted sense cues.

    One document per ambiguous (word, sense) assignment: a single test
    sentence containing the ambiguous word plus 2-6 context sentences that
    each carry all cue words of the assigned sense. All sentence pairs of a
    document share one source URL and pass the similarity gate.
    """
    lexicon = default_lexicon()
    inventory = default_inventory()
    default_cluster = {word: senses[0][0] for word, senses in AMBIGUOUS_WORDS}

    bitext_lines: list[str] = []
    records: list[WsdRecord] = []
    record_pair_ids: list[int] = []
    true_cluster: list[str] = []
    pair_id = 0

    for d in range(n_docs):
        rng = random.Random(stable_seed("synthdoc", seed, d))
        word, senses = AMBIGUOUS_WORDS[d % len(AMBIGUOUS_WORDS)]
        sense_idx = 0 if rng.random() < _MAJORITY_SHARE else 1
        cluster_id, target, cues = senses[sense_idx]
        src_url = f"https://synth.example/doc{d:05d}"
        tgt_url = f"https://synth.example/de/doc{d:05d}"

        test_tokens = [
            "the", rng.choice(_ADJECTIVES), word, "was", rng.choice(_VERBS),
            "near", "the", rng.choice(_NOUNS), f"uid{d}",
        ]
        test_src = " ".join(test_tokens)
        test_tgt = _translate_tokens(test_tokens, word, target)

        sentences = [(test_src, test_tgt)]
        for j in range(rng.randint(2, 6)):
            cue_order = list(cues)
            rng.shuffle(cue_order)
            ctx_tokens = [
                "the", cue_order[0], "and", "the", cue_order[1], "with",
                cue_order[2], f"noise{d}x{j}",
            ]
            ctx = " ".join(ctx_tokens)
            sentences.append((ctx, ctx))

        for src, tgt in sentences:
            sim = f"{rng.uniform(0.86, 0.99):.4f}"
            bitext_lines.append(f"{src}\t{tgt}\t{src_url}\t{tgt_url}\t{sim}\n")
            if src == test_src:
                record_pair_ids.append(pair_id)
            pair_id += 1

        records.append(
            WsdRecord(
                id=len(records),
                lemma=word,
                cluster_id=cluster_id,
                subcorpus=SUBCORPUS,
                src=test_src,
                tgt=test_tgt,
                ambiguous_token=word,
            )
        )
        true_cluster.append(cluster_id)

    return ExperimentFixture(
        bitext_lines, records, record_pair_ids, true_cluster,
        default_cluster, lexicon, inventory,
    )


def write_experiment_files(fixture: ExperimentFixture, out_dir: str | Path) -> dict[str, Path]:
    """Materialize the fixture as the pipeline's on-disk input formats."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "bitext": out_dir / "bitext.tsv",
        "records": out_dir / "records.tsv",
        "inventory": out_dir / "inventory.tsv",
        "lexicon": out_dir / "lexicon.jsonl",
        "record_pair_ids": out_dir / "record_pair_ids.json",
    }
    with open(paths["bitext"], "w", encoding="utf-8") as fh:
        fh.writelines(fixture.bitext_lines)
    with open(paths["records"], "w", encoding="utf-8") as fh:
        for r in fixture.records:
            fh.write(f"{r.lemma}\t{r.cluster_id}\t{r.subcorpus}\t{r.src}\t{r.tgt}\t{r.ambiguous_token}\n")
    with open(paths["inventory"], "w", encoding="utf-8") as fh:
        for (lemma, cid), members in sorted(fixture.inventory.clusters.items()):
            fh.write(f"{lemma}\t{cid}\t{','.join(sorted(members))}\n")
    with open(paths["lexicon"], "w", encoding="utf-8") as fh:
        for word, senses in fixture.lexicon.entries.items():
            row = {
                "word": word,
                "senses": [
                    {"cluster_id": s.cluster_id, "target": s.target,
                     "cues": sorted(s.cues)}
                    for s in senses
                ],
            }
            fh.write(json.dumps(row, ensure_ascii=False, sort_keys=True) + "\n")
    with open(paths["record_pair_ids"], "w", encoding="utf-8") as fh:
        json.dump(fixture.record_pair_ids, fh)
        fh.write("\n")
    return paths


# --- doc-ID matching benchmark -------------------------------------------

_BENCH_VOCAB = [f"word{i:03d}" for i in range(200)]


@dataclass
class MatchBenchmark:
    records: list[WsdRecord]
    corpus: list[RawDocument]
    expected_doc_ids: list[str]


def _perturb(sentence: str, rng: random.Random) -> str:
    """Punctuation/whitespace noise that leaves the alphanumeric stream intact."""
    words = sentence.split()
    out: list[str] = []
    for i, w in enumerate(words):
        out.append(w)
        if i < len(words) - 1 and rng.random() < 0.3:
            out.append(rng.choice([",", ";", "-", "...", "  "]))
    text = " ".join(out)
    if rng.random() < 0.5:
        text += rng.choice(["!", "?", ".", "!!"])
    if rng.random() < 0.3:
        text = '"' + text + '"'
    return text


def build_match_benchmark(
    n_docs: int = 5000,
    sentences_per_doc: int = 20,
    n_needles: int = 1000,
    seed: int = 0,
) -> MatchBenchmark:
    """A corpus where every sentence carries a unique serial token.

    Needles are punctuation-perturbed copies of sampled sentences, so each
    needle matches exactly its planted document.
    """
    rng = random.Random(stable_seed("benchmark", seed))
    corpus: list[RawDocument] = []
    flat: list[tuple[str, str]] = []  # (doc_id, sentence)
    for d in range(n_docs):
        doc_id = f"doc{d:05d}"
        sentences = []
        for j in range(sentences_per_doc):
            words = rng.choices(_BENCH_VOCAB, k=rng.randint(8, 12))
            words.insert(len(words) // 2, f"serial{d}x{j}")
            sentence = " ".join(words)
            sentences.append(sentence)
            flat.append((doc_id, sentence))
        corpus.append(RawDocument(doc_id, "bench", tuple(sentences)))

    picks = rng.sample(range(len(flat)), n_needles)
    records: list[WsdRecord] = []
    expected: list[str] = []
    for i, pick in enumerate(picks):
        doc_id, sentence = flat[pick]
        records.append(
            WsdRecord(
                id=i, lemma="bench", cluster_id="0", subcorpus="bench",
                src=_perturb(sentence, rng), tgt="-", ambiguous_token="bench",
            )
        )
        expected.append(doc_id)
    return MatchBenchmark(records, corpus, expected)
