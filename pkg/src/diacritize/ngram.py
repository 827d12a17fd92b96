"""Back-off n-gram restoration over marked left contexts.

Counts are maximum-likelihood tables over (k-1 marked left tokens, variant)
for k = 1..max_n. Restoration scores the candidates of a wordkey at the
largest context first and backs off one level whenever the counts give no
unique maximum, down to the unigram floor. Context words left of the target
are themselves restored first, left to right, so later decisions see marked
context.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field

from .corpus import Corpus, TokenKind, strip_diacritics
from .datasetgen import AmbiguousSet, Instance
from .errors import ModelError, ParseError


@dataclass
class PreparedCorpus:
    """Corpus lowered to plain surface strings, with the replacement map precomputed."""

    lines: list[list[str]]
    unambiguous: dict[str, str]
    lowercase: bool


@dataclass
class NGramModel:
    max_n: int
    # counts[k] maps (context tuple of k-1 marked tokens, variant) -> count
    counts: list[dict[tuple[tuple[str, ...], str], int]]
    variant_index: dict[str, list[str]]
    unambiguous: dict[str, str] = field(default_factory=dict)
    lowercase: bool = True

    def count(self, k: int, context: tuple[str, ...], variant: str) -> int:
        return self.counts[k - 1].get((context, variant), 0)

    def unigram_count(self, variant: str) -> int:
        return self.counts[0].get(((), variant), 0)


def prepare(corpus: Corpus, lowercase: bool = True) -> PreparedCorpus:
    lines = []
    word_counts: dict[str, Counter[str]] = {}
    for line in corpus.lines:
        surfaces = []
        for tok in line:
            s = tok.surface.lower() if lowercase else tok.surface
            surfaces.append(s)
            if tok.kind is TokenKind.WORD:
                word_counts.setdefault(strip_diacritics(s), Counter())[s] += 1
        lines.append(surfaces)
    unambiguous = {}
    for key, variants in word_counts.items():
        best = min(variants.items(), key=lambda kv: (-kv[1], kv[0]))[0]
        if best != key:
            unambiguous[key] = best
    return PreparedCorpus(lines=lines, unambiguous=unambiguous, lowercase=lowercase)


def find_occurrences(prepared: PreparedCorpus, candidates: dict[str, list[str]]):
    """(line, position) pairs of every indexed-variant occurrence."""
    candidate_sets = {k: set(vs) for k, vs in candidates.items()}
    occurrences = []
    for line_no, surfaces in enumerate(prepared.lines):
        for t, surface in enumerate(surfaces):
            variants = candidate_sets.get(strip_diacritics(surface))
            if variants is not None and surface in variants:
                occurrences.append((line_no, t))
    return occurrences


def train_from_occurrences(
    prepared: PreparedCorpus,
    occurrences,
    max_n: int,
    candidates: dict[str, list[str]],
    skip_lines=(),
) -> NGramModel:
    if max_n < 1:
        raise ModelError(f"max_n must be >= 1, got {max_n}")
    skip = set(skip_lines)
    counts: list[dict] = [dict() for _ in range(max_n)]
    lines = prepared.lines
    for line_no, t in occurrences:
        if line_no in skip:
            continue
        surfaces = lines[line_no]
        surface = surfaces[t]
        for k in range(1, max_n + 1):
            if t - (k - 1) < 0:
                break
            key = (tuple(surfaces[t - k + 1 : t]), surface)
            level = counts[k - 1]
            level[key] = level.get(key, 0) + 1

    index = {k: sorted(vs) for k, vs in candidates.items()}
    return NGramModel(
        max_n=max_n,
        counts=counts,
        variant_index=index,
        unambiguous=dict(prepared.unambiguous),
        lowercase=prepared.lowercase,
    )


def train(
    corpus,
    max_n: int,
    candidates: dict[str, list[str]],
    skip_lines=(),
    lowercase: bool = True,
) -> NGramModel:
    """Count (context, variant) tables for every occurrence of an indexed variant.

    candidates maps wordkey -> list of variant surfaces (from the generated
    dataset). Lines whose index is in skip_lines contribute nothing; the
    cross-validation driver uses this to hold out test sentences.
    """
    prepared = corpus if isinstance(corpus, PreparedCorpus) else prepare(corpus, lowercase)
    occurrences = find_occurrences(prepared, candidates)
    return train_from_occurrences(prepared, occurrences, max_n, candidates, skip_lines)


def _choose(model: NGramModel, left: list[str], variants: list[str], n: int) -> str:
    """Back-off walk: unique count maximum wins, ties and zeros step down a level."""
    if len(variants) == 1:
        return variants[0]
    top = min(n, model.max_n, len(left) + 1)
    for k in range(top, 1, -1):
        ctx = tuple(left[len(left) - (k - 1) :])
        scores = [model.count(k, ctx, v) for v in variants]
        best = max(scores)
        if best > 0 and scores.count(best) == 1:
            return variants[scores.index(best)]
    best = max(model.unigram_count(v) for v in variants)
    return min(v for v in variants if model.unigram_count(v) == best)


def restore_word(model: NGramModel, left: list[str], wordkey: str, n: int) -> str:
    variants = model.variant_index.get(wordkey)
    if variants is None:
        raise ModelError(f"wordkey not in variant index: {wordkey!r}")
    return _choose(model, left, variants, n)


def restore_instance(model: NGramModel, inst: Instance, n: int) -> str:
    """Restore the instance target, greedily restoring its left context first."""
    if not (1 <= n <= model.max_n):
        raise ModelError(f"n must be in 1..{model.max_n}, got {n}")
    left: list[str] = []
    for p in range(inst.target):
        w = inst.tokens[p]
        key = strip_diacritics(w)
        if key in model.variant_index:
            left.append(_choose(model, left, model.variant_index[key], n))
        else:
            left.append(model.unambiguous.get(key, w))
    return restore_word(model, left, strip_diacritics(inst.tokens[inst.target]), n)


def restore_probability(model: NGramModel, context, variant: str):
    """MLE P(variant | context) among the wordkey's candidates; None when 0/0."""
    context = tuple(context)
    k = len(context) + 1
    if not (1 <= k <= model.max_n):
        raise ModelError(f"no trained level for context length {len(context)}")
    variants = model.variant_index.get(strip_diacritics(variant))
    if variants is None:
        raise ModelError(f"wordkey not in variant index: {variant!r}")
    denom = sum(model.count(k, context, v) for v in variants)
    if denom == 0:
        return None
    return model.count(k, context, variant) / denom


def cv_fitter(corpus, aset: AmbiguousSet, candidates: dict[str, list[str]], n: int, lowercase: bool = True):
    """Build a crossval fit function that holds out test-fold sentences.

    Training counts come only from lines holding no held-out instance of the
    evaluated wordkey, so a test sentence never feeds its own counts. Pass a
    PreparedCorpus to share the preparation across wordkeys.
    """
    if any(inst.line < 0 for inst in aset.instances):
        raise ModelError(
            "n-gram cross-validation needs instance line provenance; "
            "regenerate the dataset from the corpus"
        )
    prepared = corpus if isinstance(corpus, PreparedCorpus) else prepare(corpus, lowercase)
    occurrences = find_occurrences(prepared, candidates)

    def fit(train_instances):
        train_keys = {(i.line, i.target) for i in train_instances}
        skip = {
            i.line for i in aset.instances if (i.line, i.target) not in train_keys
        }
        model = train_from_occurrences(prepared, occurrences, n, candidates, skip_lines=skip)
        return lambda inst: restore_instance(model, inst, n)

    return fit


def model_payload(model: NGramModel) -> dict:
    levels = []
    for k in range(1, model.max_n + 1):
        entries = sorted(
            [[list(ctx), v, c] for (ctx, v), c in model.counts[k - 1].items()],
            key=lambda e: (e[0], e[1]),
        )
        levels.append({"k": k, "entries": entries})
    return {
        "max_n": model.max_n,
        "lowercase": model.lowercase,
        "levels": levels,
        "variant_index": {k: model.variant_index[k] for k in sorted(model.variant_index)},
        "unambiguous": {k: model.unambiguous[k] for k in sorted(model.unambiguous)},
    }


def model_from_payload(payload: dict) -> NGramModel:
    max_n = payload["max_n"]
    counts: list[dict] = [dict() for _ in range(max_n)]
    for level in payload["levels"]:
        k = level["k"]
        for ctx, v, c in level["entries"]:
            counts[k - 1][(tuple(ctx), v)] = c
    return NGramModel(
        max_n=max_n,
        counts=counts,
        variant_index={k: list(vs) for k, vs in payload["variant_index"].items()},
        unambiguous=dict(payload.get("unambiguous", {})),
        lowercase=payload.get("lowercase", True),
    )


def save_model(model: NGramModel, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(model_payload(model), fh, ensure_ascii=False)
        fh.write("\n")


def load_model(path) -> NGramModel:
    with open(path, encoding="utf-8") as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid model JSON: {exc.msg}", line=exc.lineno, path=path)
    try:
        return model_from_payload(payload)
    except (KeyError, IndexError, TypeError) as exc:
        raise ParseError(f"malformed n-gram model file: {exc}", path=path)
