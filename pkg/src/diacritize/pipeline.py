"""End-to-end text restoration: stripped lines in, marked lines out.

Per token: punctuation, digits and symbols echo through; wordkeys with a
single known marked form are replaced outright; wordkeys with competing
variants go to the trained restorer; unknown words echo verbatim. The
replacement maps are built from the training corpus and serialized with the
model, so restoration needs no corpus at inference time.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from . import classify, embed, ngram
from .corpus import Corpus, Token, TokenKind, strip_diacritics, token_kind
from .datasetgen import Instance
from .errors import ModelError, ParseError

FAMILIES = ("ngram", "classifier", "embedding")


@dataclass
class NGramRestorer:
    model: ngram.NGramModel
    n: int

    def predict_instance(self, inst: Instance) -> str:
        return ngram.restore_instance(self.model, inst, self.n)


@dataclass
class ClassifierBank:
    """One trained classifier per wordkey."""

    classifiers: dict[str, classify.TextClassifier]

    def predict_instance(self, inst: Instance) -> str:
        key = strip_diacritics(inst.tokens[inst.target])
        clf = self.classifiers.get(key)
        if clf is None:
            raise ModelError(f"no classifier trained for wordkey {key!r}")
        return clf.predict_instance(inst)


@dataclass
class Pipeline:
    family: str
    restorer: object
    unambiguous: dict[str, str]
    variant_index: dict[str, list[tuple[str, int]]]
    fallback: str = "echo"
    lowercase: bool = True


def build_maps(corpus: Corpus, sets, lowercase: bool = True):
    """Replacement map and variant index with disjoint key sets.

    Wordkeys outside the generated dataset map to their most frequent marked
    form (identity mappings are omitted); dataset wordkeys carry their variant
    candidates and counts.
    """
    index = {s.wordkey: list(s.variants) for s in sets}
    prepared = ngram.prepare(corpus, lowercase=lowercase)
    unambiguous = {
        key: marked for key, marked in prepared.unambiguous.items() if key not in index
    }
    return unambiguous, index


def build_ngram_pipeline(corpus, sets, n: int = 5, lowercase: bool = True) -> Pipeline:
    unambiguous, index = build_maps(corpus, sets, lowercase)
    candidates = {key: [v for v, _ in variants] for key, variants in index.items()}
    model = ngram.train(corpus, n, candidates, lowercase=lowercase)
    return Pipeline(
        family="ngram",
        restorer=NGramRestorer(model=model, n=n),
        unambiguous=unambiguous,
        variant_index=index,
        lowercase=lowercase,
    )


def build_classifier_pipeline(
    corpus, sets, kind: str = classify.LOGISTIC, window: int = 9,
    hyper: classify.Hyper | None = None, lowercase: bool = True,
) -> Pipeline:
    unambiguous, index = build_maps(corpus, sets, lowercase)
    classifiers = {
        aset.wordkey: classify.fit_instances(aset.instances, kind, window=window, hyper=hyper)
        for aset in sets
    }
    return Pipeline(
        family="classifier",
        restorer=ClassifierBank(classifiers=classifiers),
        unambiguous=unambiguous,
        variant_index=index,
        lowercase=lowercase,
    )


def build_embedding_pipeline(
    corpus, sets, vectors_path, scheme: str = embed.BASIC,
    window: int | None = 11, top_n: int = 50, lowercase: bool = True,
) -> Pipeline:
    unambiguous, index = build_maps(corpus, sets, lowercase)
    model = embed.load_vectors(vectors_path)
    cowords = None
    if scheme != embed.BASIC:
        cowords = embed.build_cowords(corpus, sets, top_n=top_n, lowercase=lowercase)
        model = embed.enhance(model, cowords, scheme=scheme)
    restorer = embed.EmbeddingRestorer(
        model=model, variant_index=index, scheme=scheme, window=window, cowords=cowords,
    )
    restorer.vectors_path = str(vectors_path)
    restorer.top_n = top_n
    return Pipeline(
        family="embedding",
        restorer=restorer,
        unambiguous=unambiguous,
        variant_index=index,
        lowercase=lowercase,
    )


def match_case(original: str, marked: str) -> str:
    """Re-case a predicted lowercase form to follow the input token's casing."""
    if len(original) > 1 and original.isupper():
        return marked.upper()
    if original[:1].isupper():
        return marked[:1].upper() + marked[1:]
    return marked


def restore_line(pipeline: Pipeline, tokens: list[Token]) -> list[Token]:
    prepared = None
    out: list[Token] = []
    for i, tok in enumerate(tokens):
        if tok.kind is not TokenKind.WORD:
            out.append(tok)
            continue
        surface = tok.surface.lower() if pipeline.lowercase else tok.surface
        key = strip_diacritics(surface)
        if key in pipeline.variant_index:
            if prepared is None:
                prepared = tuple(
                    strip_diacritics(t.surface.lower() if pipeline.lowercase else t.surface)
                    for t in tokens
                )
            try:
                marked = pipeline.restorer.predict_instance(
                    Instance(tokens=prepared, target=i, label="")
                )
            except embed.UnrepresentableInstance:
                counts = pipeline.variant_index[key]
                best = max(c for _, c in counts)
                marked = min(v for v, c in counts if c == best)
        elif key in pipeline.unambiguous:
            marked = pipeline.unambiguous[key]
        else:
            out.append(tok)  # unknown word: echo verbatim
            continue
        surface_out = match_case(tok.surface, marked)
        out.append(Token(surface_out, token_kind(surface_out)))
    return out


def restore_text(pipeline: Pipeline, stripped: Corpus) -> Corpus:
    """Restore a whole corpus; line and token shape are preserved exactly."""
    if pipeline.restorer is None:
        raise ModelError("pipeline has no restorer loaded")
    lines = [restore_line(pipeline, line) for line in stripped.lines]
    return Corpus(lines, is_marked=True)


def _restorer_payload(pipeline: Pipeline) -> dict:
    r = pipeline.restorer
    if pipeline.family == "ngram":
        return {"n": r.n, "model": ngram.model_payload(r.model)}
    if pipeline.family == "classifier":
        return {
            "models": {
                key: classify.classifier_payload(clf)
                for key, clf in sorted(r.classifiers.items())
            }
        }
    if pipeline.family == "embedding":
        return {
            "vectors_path": getattr(r, "vectors_path", None),
            "scheme": r.scheme,
            "window": r.window,
            "top_n": getattr(r, "top_n", 50),
            "cowords": {v: [list(p) for p in pairs] for v, pairs in sorted((r.cowords or {}).items())},
        }
    raise ModelError(f"unknown pipeline family: {pipeline.family!r}")


def save_pipeline(pipeline: Pipeline, path) -> None:
    payload = {
        "family": pipeline.family,
        "fallback": pipeline.fallback,
        "lowercase": pipeline.lowercase,
        "unambiguous": {k: pipeline.unambiguous[k] for k in sorted(pipeline.unambiguous)},
        "variant_index": {
            k: [list(v) for v in pipeline.variant_index[k]]
            for k in sorted(pipeline.variant_index)
        },
        "restorer": _restorer_payload(pipeline),
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, ensure_ascii=False)
        fh.write("\n")


def load_pipeline(path) -> Pipeline:
    with open(path, encoding="utf-8") as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid pipeline JSON: {exc.msg}", line=exc.lineno, path=path)
    try:
        family = payload["family"]
        index = {k: [(v, int(c)) for v, c in vs] for k, vs in payload["variant_index"].items()}
        spec = payload["restorer"]
        if family == "ngram":
            restorer = NGramRestorer(model=ngram.model_from_payload(spec["model"]), n=int(spec["n"]))
        elif family == "classifier":
            restorer = ClassifierBank(
                classifiers={
                    key: classify.classifier_from_payload(p)
                    for key, p in spec["models"].items()
                }
            )
        elif family == "embedding":
            if not spec.get("vectors_path"):
                raise ModelError("embedding pipeline lacks a vectors_path")
            model = embed.load_vectors(spec["vectors_path"])
            cowords = {v: [(w, int(c)) for w, c in pairs] for v, pairs in spec["cowords"].items()} or None
            if spec["scheme"] != embed.BASIC and cowords:
                model = embed.enhance(model, cowords, scheme=spec["scheme"])
            restorer = embed.EmbeddingRestorer(
                model=model, variant_index=index, scheme=spec["scheme"],
                window=spec["window"], cowords=cowords,
            )
            restorer.vectors_path = spec["vectors_path"]
            restorer.top_n = spec.get("top_n", 50)
        else:
            raise ModelError(f"unknown pipeline family: {family!r}")
        return Pipeline(
            family=family,
            restorer=restorer,
            unambiguous=dict(payload["unambiguous"]),
            variant_index=index,
            fallback=payload.get("fallback", "echo"),
            lowercase=payload.get("lowercase", True),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed pipeline file: {exc}", path=path)


def majority_variant(variants) -> str:
    best = max(c for _, c in variants)
    return min(v for v, c in variants if c == best)
