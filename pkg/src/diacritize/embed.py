"""Embedding-based restoration: projection, variant enhancement, intrinsic tasks.

Pretrained vectors are consumed from word2vec text files. Cross-lingual
projection assigns each target word the count-weighted average of its aligned
source words' vectors. Variant vectors can be enhanced toward the centroid of
their exclusive co-occurring words, and restoration picks the candidate whose
vector is most cosine-similar to the averaged context vector.
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .corpus import Corpus, TokenKind, strip_diacritics
from .datasetgen import AmbiguousSet, Instance
from .errors import DataError, ModelError, ParseError
from .classify import extract_window

log = logging.getLogger(__name__)

BASIC = "basic"
TWEAK1 = "tweak1"
TWEAK2 = "tweak2"
TWEAK3 = "tweak3"
SCHEMES = (BASIC, TWEAK1, TWEAK2, TWEAK3)


class UnrepresentableInstance(ModelError):
    """No candidate variant of the instance has a vector in the model."""


@dataclass
class EmbeddingModel:
    dim: int
    vectors: dict[str, np.ndarray]

    def __contains__(self, word: str) -> bool:
        return word in self.vectors

    def get(self, word: str):
        return self.vectors.get(word)


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.dot(a, b) / (na * nb))


def load_vectors(path) -> EmbeddingModel:
    """Parse word2vec text format: header 'V D', then V rows 'word f1 .. fD'."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ParseError("header must be 'vocab_size dim'", line=1, path=path)
        try:
            vocab_size, dim = int(header[0]), int(header[1])
        except ValueError:
            raise ParseError("header must hold two integers", line=1, path=path)
        vectors: dict[str, np.ndarray] = {}
        for line_no, raw in enumerate(fh, start=2):
            raw = raw.rstrip("\n")
            if not raw:
                continue
            parts = raw.split(" ")
            if len(parts) != dim + 1:
                raise ParseError(
                    f"expected a word and {dim} values, got {len(parts)} fields",
                    line=line_no,
                    path=path,
                )
            try:
                vectors[parts[0]] = np.array([float(v) for v in parts[1:]], dtype=float)
            except ValueError:
                raise ParseError("non-numeric vector component", line=line_no, path=path)
    if len(vectors) != vocab_size:
        raise ParseError(
            f"header declares {vocab_size} words but file holds {len(vectors)}",
            path=path,
        )
    return EmbeddingModel(dim=dim, vectors=vectors)


def save_vectors(model: EmbeddingModel, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"{len(model.vectors)} {model.dim}\n")
        for word in model.vectors:
            row = " ".join(repr(float(v)) for v in model.vectors[word])
            fh.write(f"{word} {row}\n")


def load_alignment(path) -> dict[str, list[tuple[str, int]]]:
    """TSV alignment dictionary: target_word <TAB> source_word <TAB> count."""
    entries: dict[str, list[tuple[str, int]]] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            raw = raw.rstrip("\n")
            if not raw:
                continue
            parts = raw.split("\t")
            if len(parts) != 3:
                raise ParseError(
                    f"expected 3 tab-separated fields, got {len(parts)}",
                    line=line_no,
                    path=path,
                )
            try:
                count = int(parts[2])
            except ValueError:
                raise ParseError("count must be an integer", line=line_no, path=path)
            if count <= 0:
                raise ParseError("count must be positive", line=line_no, path=path)
            entries.setdefault(parts[0], []).append((parts[1], count))
    return entries


def project(source: EmbeddingModel, align: dict[str, list[tuple[str, int]]]) -> EmbeddingModel:
    """Count-weighted average of aligned source vectors for every target word.

    Target entries whose aligned source words are all missing from the source
    model are omitted from the output.
    """
    vectors: dict[str, np.ndarray] = {}
    for word in align:
        usable = [(src, c) for src, c in align[word] if src in source.vectors]
        if not usable:
            continue
        if len(usable) == 1:
            # the weighted average of one vector is that vector, bit for bit
            vectors[word] = source.vectors[usable[0][0]].copy()
            continue
        total = sum(c for _, c in usable)
        acc = np.zeros(source.dim)
        for src, c in usable:
            acc += source.vectors[src] * c
        vectors[word] = acc / total
    if not vectors:
        raise ModelError("no alignment entry resolved to a source vector")
    return EmbeddingModel(dim=source.dim, vectors=vectors)


def build_cowords(
    corpus: Corpus,
    sets,
    top_n: int = 50,
    window: int | None = None,
    lowercase: bool = True,
) -> dict[str, list[tuple[str, int]]]:
    """Top-n co-occurring words per variant, minus any word shared with a sibling.

    Co-occurrences are counted over word tokens in the marked corpus, within
    the whole sentence by default or a symmetric window of the given width.
    """
    targets: dict[str, list[str]] = {}
    for aset in sets:
        for variant, _ in aset.variants:
            targets.setdefault(variant, [])
    siblings = {v: [o for o, _ in aset.variants if o != v] for aset in sets for v, _ in aset.variants}

    counters: dict[str, Counter[str]] = {v: Counter() for v in targets}
    half = window // 2 if window else None
    for line in corpus.lines:
        surfaces = [
            (t.surface.lower() if lowercase else t.surface, t.kind is TokenKind.WORD)
            for t in line
        ]
        for pos, (surface, is_word) in enumerate(surfaces):
            if not is_word or surface not in counters:
                continue
            if half is None:
                span = range(len(surfaces))
            else:
                span = range(max(0, pos - half), min(len(surfaces), pos + half + 1))
            counter = counters[surface]
            for j in span:
                if j == pos:
                    continue
                coword, word_kind = surfaces[j]
                if word_kind:
                    counter[coword] += 1

    top: dict[str, list[tuple[str, int]]] = {}
    for variant, counter in counters.items():
        ranked = sorted(counter.items(), key=lambda kv: (-kv[1], kv[0]))[:top_n]
        top[variant] = ranked

    pruned: dict[str, list[tuple[str, int]]] = {}
    for variant, ranked in top.items():
        shared = set()
        for sibling in siblings.get(variant, ()):
            shared.update(w for w, _ in top.get(sibling, ()))
        pruned[variant] = [(w, c) for w, c in ranked if w not in shared]
    return pruned


def coword_mean(model: EmbeddingModel, cowords, weighted: bool = True):
    """Count-weighted average of the coword vectors present in the model."""
    acc = np.zeros(model.dim)
    total = 0.0
    for word, count in cowords:
        vec = model.vectors.get(word)
        if vec is None:
            continue
        weight = count if weighted else 1.0
        acc += vec * weight
        total += weight
    if total == 0.0:
        return None
    return acc / total


def enhance(
    model: EmbeddingModel,
    cowords: dict[str, list[tuple[str, int]]],
    scheme: str = BASIC,
    weighted: bool = True,
) -> EmbeddingModel:
    """Move variant vectors toward (or onto) their exclusive-coword centroid.

    basic copies the model unchanged; tweak1 and tweak2 replace each variant
    vector with the midpoint of itself and the coword mean; tweak3 replaces it
    with the coword mean outright. Every non-variant vector is untouched.
    """
    if scheme not in SCHEMES:
        raise ModelError(f"unknown enhancement scheme: {scheme!r}")
    vectors = dict(model.vectors)
    if scheme == BASIC:
        return EmbeddingModel(dim=model.dim, vectors=vectors)
    for variant in cowords:
        old = vectors.get(variant)
        if old is None:
            log.warning("enhance: variant %r not in model, skipped", variant)
            continue
        mean = coword_mean(model, cowords[variant], weighted=weighted)
        if mean is None:
            log.warning("enhance: no coword of %r has a vector, skipped", variant)
            continue
        if scheme == TWEAK3:
            vectors[variant] = mean
        else:
            vectors[variant] = 0.5 * old + 0.5 * mean
    return EmbeddingModel(dim=model.dim, vectors=vectors)


def restore_instance(
    model: EmbeddingModel,
    inst: Instance,
    candidates,
    window: int | None = 11,
    scheme: str = BASIC,
    cowords: dict[str, list[tuple[str, int]]] | None = None,
) -> str:
    """Pick the candidate most cosine-similar to the averaged context vector.

    candidates is a list of (variant, unigram count). Out-of-vocabulary
    context words are dropped; under tweak2/tweak3 each candidate sees only
    the context words in its own coword set. A candidate without a usable
    context vector scores its unigram prior; an entirely empty context falls
    back to the most frequent candidate.
    """
    if scheme in (TWEAK2, TWEAK3) and cowords is None:
        raise ModelError(f"scheme {scheme} needs a coword table")
    candidates = list(candidates)
    if not candidates:
        raise DataError("no candidate variants supplied")
    if not any(v in model.vectors for v, _ in candidates):
        raise UnrepresentableInstance(
            f"no candidate of {strip_diacritics(candidates[0][0])!r} has a vector"
        )
    if window is None:
        context = [
            w
            for i, w in enumerate(inst.tokens)
            if i != inst.target and w in model.vectors
        ]
    else:
        context = [w for w in extract_window(inst.tokens, inst.target, window) if w in model.vectors]

    total = sum(c for _, c in candidates)
    prior = {v: (c / total if total else 0.0) for v, c in candidates}
    if not context:
        best = max(c for _, c in candidates)
        return min(v for v, c in candidates if c == best)

    restricted = {}
    if scheme in (TWEAK2, TWEAK3):
        for v, _ in candidates:
            allowed = {w for w, _ in cowords.get(v, ())}
            restricted[v] = [w for w in context if w in allowed]

    scores = {}
    for v, _ in candidates:
        vec = model.vectors.get(v)
        ctx = restricted.get(v, context)
        if vec is None or not ctx:
            scores[v] = prior[v]
            log.debug(
                "candidate %r scored by unigram prior (%s)",
                v,
                "no vector" if vec is None else "empty restricted context",
            )
            continue
        vec_c = np.mean([model.vectors[w] for w in ctx], axis=0)
        if not np.any(vec_c):
            scores[v] = prior[v]
            log.debug("candidate %r scored by unigram prior (zero context vector)", v)
            continue
        scores[v] = cosine(vec_c, vec)
    best = max(scores.values())
    return min(v for v, s in scores.items() if s == best)


@dataclass
class EmbeddingRestorer:
    """Bundle of everything the cosine restorer needs at prediction time."""

    model: EmbeddingModel
    variant_index: dict[str, list[tuple[str, int]]]
    scheme: str = BASIC
    window: int | None = 11
    cowords: dict[str, list[tuple[str, int]]] | None = None

    def predict_instance(self, inst: Instance) -> str:
        key = strip_diacritics(inst.tokens[inst.target])
        candidates = self.variant_index.get(key)
        if candidates is None:
            raise ModelError(f"wordkey not in variant index: {key!r}")
        return restore_instance(
            self.model, inst, candidates, window=self.window,
            scheme=self.scheme, cowords=self.cowords,
        )


def cv_fitter(
    model: EmbeddingModel,
    aset: AmbiguousSet,
    scheme: str = BASIC,
    window: int | None = 11,
    cowords: dict[str, list[tuple[str, int]]] | None = None,
):
    """Static predictor for crossval; only the prior counts come from the folds."""

    def fit(train_instances):
        counts = Counter(inst.label for inst in train_instances)
        candidates = [(v, counts.get(v, 0)) for v, _ in aset.variants]

        def predictor(inst, _candidates=candidates):
            try:
                return restore_instance(
                    model, inst, _candidates, window=window,
                    scheme=scheme, cowords=cowords,
                )
            except UnrepresentableInstance:
                log.debug("unrepresentable instance for %r, unigram fallback", aset.wordkey)
                best = max(c for _, c in _candidates)
                return min(v for v, c in _candidates if c == best)

        return predictor

    return fit


def odd_word(model: EmbeddingModel, words):
    """The word least cosine-similar on average to the other three.

    Exactly one out-of-vocabulary word is the odd one by fiat; more than one
    makes the question unanswerable and returns None.
    """
    words = list(words)
    if len(words) != 4:
        raise DataError(f"odd_word expects 4 words, got {len(words)}")
    missing = [w for w in words if w not in model.vectors]
    if len(missing) == 1:
        return missing[0]
    if missing:
        return None
    means = {}
    for w in words:
        others = [o for o in words if o != w]
        means[w] = sum(cosine(model.vectors[w], model.vectors[o]) for o in others) / 3.0
    worst = min(means.values())
    return min(w for w, m in means.items() if m == worst)


def analogy_mrr(model: EmbeddingModel, quads, list_len: int = 100):
    """Mean reciprocal rank of d among neighbors of b - a + c, or 0 past list_len."""
    vocab = sorted(model.vectors)
    matrix = np.stack([model.vectors[w] for w in vocab])
    norms = np.linalg.norm(matrix, axis=1)
    norms[norms == 0] = 1.0

    scores = []
    for a, b, c, d in quads:
        if any(w not in model.vectors for w in (a, b, c)):
            continue
        if d not in model.vectors:
            scores.append(0.0)
            continue
        target = model.vectors[b] - model.vectors[a] + model.vectors[c]
        tnorm = float(np.linalg.norm(target))
        if tnorm == 0.0:
            scores.append(0.0)
            continue
        sims = matrix @ target / (norms * tnorm)
        ranked = sorted(zip(vocab, sims), key=lambda ws: (-ws[1], ws[0]))
        rank = 0
        score = 0.0
        for word, _ in ranked:
            if word in (a, b, c):
                continue
            rank += 1
            if rank > list_len:
                break
            if word == d:
                score = 1.0 / rank
                break
        scores.append(score)
    if not scores:
        raise DataError("no scoreable analogy quads")
    return sum(scores) / len(scores)


def wordsim_pearson(model: EmbeddingModel, pairs):
    """Pearson r between cosine and human scores over in-vocabulary pairs.

    Returns (r, usable_pair_count).
    """
    xs, ys = [], []
    for w1, w2, human in pairs:
        if w1 in model.vectors and w2 in model.vectors:
            xs.append(float(human))
            ys.append(cosine(model.vectors[w1], model.vectors[w2]))
    if len(xs) < 2:
        raise DataError(f"only {len(xs)} usable pairs; need at least 2")
    x = np.array(xs)
    y = np.array(ys)
    xd = x - x.mean()
    yd = y - y.mean()
    denom = math.sqrt(float(np.dot(xd, xd)) * float(np.dot(yd, yd)))
    if denom == 0.0:
        raise DataError("zero variance in similarity scores")
    return float(np.dot(xd, yd) / denom), len(xs)


def load_oddword_tsv(path):
    return _load_tsv(path, 5, lambda f: (f[:4], f[4]))


def load_analogy_tsv(path):
    return _load_tsv(path, 4, tuple)


def load_wordsim_tsv(path):
    def parse(fields):
        try:
            return fields[0], fields[1], float(fields[2])
        except ValueError:
            raise ValueError("score must be numeric")

    return _load_tsv(path, 3, parse)


def _load_tsv(path, n_fields, build):
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            raw = raw.rstrip("\n")
            if not raw:
                continue
            fields = raw.split("\t")
            if len(fields) != n_fields:
                raise ParseError(
                    f"expected {n_fields} tab-separated fields, got {len(fields)}",
                    line=line_no,
                    path=path,
                )
            try:
                rows.append(build(fields))
            except ValueError as exc:
                raise ParseError(str(exc), line=line_no, path=path)
    return rows
