"""Corpus ingestion: Unicode normalization, token classification, wordkeys, statistics.

A corpus is plain UTF-8 text, one sentence (or verse) per line, tokens separated
by whitespace. Everything downstream keys off the *wordkey*: the form of a word
with every combining mark removed.
"""

from __future__ import annotations

import functools
import json
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum

from .errors import DataError

WORD = "Word"
PUNCTUATION = "Punctuation"
DIGIT = "Digit"
SYMBOL = "Symbol"

# Splitting marks kept attached to the left-hand piece, e.g. verb auxiliaries
# written "na-" and contracted prepositions written "n'".
_ATTACHED_MARKS = ("-", "'", "’")


class TokenKind(str, Enum):
    WORD = WORD
    PUNCTUATION = PUNCTUATION
    DIGIT = DIGIT
    SYMBOL = SYMBOL


@dataclass(frozen=True)
class Token:
    surface: str
    kind: TokenKind

    @property
    def wordkey(self) -> str:
        return strip_diacritics(self.surface)


@dataclass
class Corpus:
    lines: list[list[Token]]
    is_marked: bool = True

    def word_tokens(self):
        for line in self.lines:
            for tok in line:
                if tok.kind is TokenKind.WORD:
                    yield tok

    def stripped(self) -> "Corpus":
        """Same line/token shape with every surface replaced by its wordkey."""
        out = [
            [Token(strip_diacritics(t.surface), t.kind) for t in line]
            for line in self.lines
        ]
        return Corpus(out, is_marked=False)

    def lowercased(self) -> "Corpus":
        out = [[Token(t.surface.lower(), t.kind) for t in line] for line in self.lines]
        return Corpus(out, is_marked=self.is_marked)


@dataclass
class CorpusStats:
    lines: int = 0
    all_tokens: int = 0
    words_only: int = 0
    vocab_size: int = 0
    all_diac_words: int = 0
    unique_diac_words: int = 0
    amb_diac_words: int = 0
    diac_vocab_size: int = 0
    all_wordkeys: int = 0
    unique_wordkeys: int = 0
    ambiguous_wordkeys: int = 0
    variants_histogram: dict[int, int] = field(default_factory=dict)

    def to_json(self) -> str:
        payload = dict(self.__dict__)
        payload["variants_histogram"] = {
            str(k): v for k, v in sorted(self.variants_histogram.items())
        }
        return json.dumps(payload, ensure_ascii=False, indent=2)


def normalize(text: str) -> str:
    """NFC-compose a string so diacritic encodings become canonical."""
    return unicodedata.normalize("NFC", text)


@functools.lru_cache(maxsize=None)
def strip_diacritics(word: str) -> str:
    """Return the wordkey: decompose, drop all combining marks (Mn), recompose.

    Case is preserved; total and idempotent. Cached, since corpora repeat a
    small vocabulary millions of times.
    """
    decomposed = unicodedata.normalize("NFD", word)
    bare = "".join(c for c in decomposed if unicodedata.category(c) != "Mn")
    return unicodedata.normalize("NFC", bare)


def token_kind(surface: str) -> TokenKind:
    """Word if it has a letter, else Digit if it has a digit, else Punctuation/Symbol."""
    has_digit = False
    has_punct = False
    for c in surface:
        cat = unicodedata.category(c)
        if cat.startswith("L"):
            return TokenKind.WORD
        if cat.startswith("N"):
            has_digit = True
        elif cat.startswith("P"):
            has_punct = True
    if has_digit:
        return TokenKind.DIGIT
    if has_punct:
        return TokenKind.PUNCTUATION
    return TokenKind.SYMBOL


def tokenize(line: str) -> list[Token]:
    """Split an NFC line into classified tokens.

    Input is assumed pre-tokenized: whitespace separates tokens. Chunks that
    still glue an auxiliary or contraction to the next word ("na-agba",
    "n'ugbo") are split after the hyphen/apostrophe, keeping the mark on the
    left piece so "na-" and "n'" survive as single tokens. No characters are
    merged or dropped.
    """
    tokens: list[Token] = []
    for chunk in line.split():
        for piece in _split_attached(chunk):
            tokens.append(Token(piece, token_kind(piece)))
    return tokens


def _split_attached(chunk: str) -> list[str]:
    pieces = []
    start = 0
    for i, c in enumerate(chunk):
        if c in _ATTACHED_MARKS and i + 1 < len(chunk):
            pieces.append(chunk[start : i + 1])
            start = i + 1
    pieces.append(chunk[start:])
    return [p for p in pieces if p]


def corpus_from_lines(lines, is_marked: bool = True) -> Corpus:
    return Corpus([tokenize(normalize(line)) for line in lines], is_marked=is_marked)


def load_corpus(path, is_marked: bool = True) -> Corpus:
    """Read a one-sentence-per-line UTF-8 file into a Corpus."""
    try:
        with open(path, encoding="utf-8") as fh:
            return corpus_from_lines(
                (line.rstrip("\n") for line in fh), is_marked=is_marked
            )
    except UnicodeDecodeError as exc:
        raise DataError(
            f"{path}: invalid UTF-8 at byte offset {exc.start}"
        ) from exc


def save_corpus(corpus: Corpus, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in corpus.lines:
            fh.write(" ".join(t.surface for t in line))
            fh.write("\n")


def compute_stats(corpus: Corpus) -> CorpusStats:
    """Corpus statistics over tokens, diacritized words, wordkeys and variants.

    A word is diacritized when stripping changes it; a wordkey is ambiguous
    when at least two distinct surfaces in the corpus share it. Case is
    preserved (lowercase the corpus first if collapsed counts are wanted).
    """
    stats = CorpusStats(lines=len(corpus.lines))
    surface_counts: Counter[str] = Counter()
    for line in corpus.lines:
        stats.all_tokens += len(line)
        for tok in line:
            if tok.kind is TokenKind.WORD:
                stats.words_only += 1
                surface_counts[tok.surface] += 1

    stats.vocab_size = len(surface_counts)

    variants_by_key: dict[str, set[str]] = {}
    for surface in surface_counts:
        variants_by_key.setdefault(strip_diacritics(surface), set()).add(surface)

    stats.all_wordkeys = len(variants_by_key)
    for key, variants in variants_by_key.items():
        if len(variants) >= 2:
            stats.ambiguous_wordkeys += 1
            n = len(variants)
            stats.variants_histogram[n] = stats.variants_histogram.get(n, 0) + 1
        else:
            stats.unique_wordkeys += 1

    for surface, count in surface_counts.items():
        key = strip_diacritics(surface)
        if surface != key:
            stats.all_diac_words += count
            stats.diac_vocab_size += 1
            if len(variants_by_key[key]) >= 2:
                stats.amb_diac_words += count
            else:
                stats.unique_diac_words += count

    return stats
