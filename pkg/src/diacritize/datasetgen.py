"""Generate the ambiguous restoration dataset from a marked corpus.

Word tokens are grouped by wordkey; three gates prune the groups:

  varnt_rep      minimum share a variant must hold within its wordkey
  wdkey_rep      minimum wordkey frequency per corpus word token
  varnt_distrib  maximum share the dominant variant may hold

Each surviving occurrence becomes one labeled instance: the stripped
sentence, the target position, and the original marked surface as label.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field

from .corpus import Corpus, TokenKind, strip_diacritics
from .errors import DataError, ParseError


@dataclass
class GenParams:
    varnt_rep: float = 0.05
    wdkey_rep: float = 0.0001
    varnt_distrib: float = 0.75
    lowercase: bool = True

    def validate(self) -> None:
        if not (0.0 <= self.varnt_rep < 1.0):
            raise DataError(f"varnt_rep must be in [0, 1), got {self.varnt_rep}")
        if not (0.0 < self.wdkey_rep < 1.0):
            raise DataError(f"wdkey_rep must be in (0, 1), got {self.wdkey_rep}")
        if not (0.0 < self.varnt_distrib <= 1.0):
            raise DataError(
                f"varnt_distrib must be in (0, 1], got {self.varnt_distrib}"
            )


@dataclass(frozen=True)
class Instance:
    tokens: tuple[str, ...]
    target: int
    label: str
    line: int = -1


@dataclass
class AmbiguousSet:
    wordkey: str
    variants: list[tuple[str, int]]
    instances: list[Instance] = field(default_factory=list)

    @property
    def total(self) -> int:
        return sum(c for _, c in self.variants)


def app_threshold(wordkey_count: int, token_count: int) -> float:
    """Percentage appearance of a wordkey per corpus word token."""
    if token_count == 0:
        raise DataError("token_count must be positive")
    return wordkey_count / token_count * 100.0


def entropy_proxy(variant_counts) -> float:
    """Degree of dominance: 1 - (largest count / total)."""
    counts = list(variant_counts)
    if not counts:
        raise DataError("variant_counts must be nonempty")
    total = sum(counts)
    if total <= 0:
        raise DataError("variant_counts must sum to a positive value")
    return 1.0 - max(counts) / total


def generate(corpus: Corpus, params: GenParams | None = None) -> list[AmbiguousSet]:
    """Apply the three pruning gates and emit one instance per surviving occurrence.

    Gate order: variant pruning (counts of dropped variants leave the wordkey
    total), then the wordkey appearance threshold against all corpus word
    tokens, then wordkeys with fewer than two surviving variants, then the
    dominant-share gate (strictly greater than varnt_distrib drops; boundary
    equality keeps). Output is ordered by descending surviving total, ties
    lexicographic, so serialized datasets are byte-stable.
    """
    params = params or GenParams()
    params.validate()

    word_token_count = 0
    counts: dict[str, Counter[str]] = {}
    for line in corpus.lines:
        for tok in line:
            if tok.kind is not TokenKind.WORD:
                continue
            word_token_count += 1
            surface = tok.surface.lower() if params.lowercase else tok.surface
            counts.setdefault(strip_diacritics(surface), Counter())[surface] += 1

    if word_token_count == 0:
        return []

    survivors: dict[str, dict[str, int]] = {}
    for key, variant_counts in counts.items():
        full_total = sum(variant_counts.values())
        kept = {
            v: c for v, c in variant_counts.items() if c / full_total >= params.varnt_rep
        }
        total = sum(kept.values())
        if total == 0:
            continue
        if total / word_token_count < params.wdkey_rep:
            continue
        if len(kept) < 2:
            continue
        if max(kept.values()) / total > params.varnt_distrib:
            continue
        survivors[key] = kept

    sets: dict[str, AmbiguousSet] = {}
    for key in sorted(survivors, key=lambda k: (-sum(survivors[k].values()), k)):
        kept = survivors[key]
        variants = sorted(kept.items(), key=lambda kv: (-kv[1], kv[0]))
        sets[key] = AmbiguousSet(wordkey=key, variants=variants)

    for line_no, line in enumerate(corpus.lines):
        stripped = None
        for idx, tok in enumerate(line):
            if tok.kind is not TokenKind.WORD:
                continue
            surface = tok.surface.lower() if params.lowercase else tok.surface
            key = strip_diacritics(surface)
            aset = sets.get(key)
            if aset is None or surface not in survivors[key]:
                continue
            if stripped is None:
                stripped = tuple(
                    strip_diacritics(t.surface.lower() if params.lowercase else t.surface)
                    for t in line
                )
            aset.instances.append(
                Instance(tokens=stripped, target=idx, label=surface, line=line_no)
            )

    return list(sets.values())


def variant_index(sets) -> dict[str, list[tuple[str, int]]]:
    """Wordkey -> [(variant, count), ...] lookup from generated sets."""
    return {s.wordkey: list(s.variants) for s in sets}


def write_dataset(sets, path) -> None:
    """Serialize as JSON Lines: one header record per wordkey, then its instances."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for aset in sets:
            fh.write(_dumps({"wordkey": aset.wordkey, "variants": [list(v) for v in aset.variants]}))
            fh.write("\n")
            for inst in aset.instances:
                fh.write(
                    _dumps(
                        {
                            "wordkey": aset.wordkey,
                            "tokens": list(inst.tokens),
                            "target": inst.target,
                            "label": inst.label,
                            "line": inst.line,
                        }
                    )
                )
                fh.write("\n")


def read_dataset(path) -> list[AmbiguousSet]:
    sets: list[AmbiguousSet] = []
    by_key: dict[str, AmbiguousSet] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            raw = raw.strip()
            if not raw:
                continue
            try:
                record = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc.msg}", line=line_no, path=path)
            if "wordkey" not in record:
                raise ParseError("record missing 'wordkey'", line=line_no, path=path)
            if "variants" in record:
                aset = AmbiguousSet(
                    wordkey=record["wordkey"],
                    variants=[(v, int(c)) for v, c in record["variants"]],
                )
                sets.append(aset)
                by_key[aset.wordkey] = aset
            else:
                missing = [k for k in ("tokens", "target", "label") if k not in record]
                if missing:
                    raise ParseError(
                        f"instance record missing {', '.join(missing)}",
                        line=line_no,
                        path=path,
                    )
                aset = by_key.get(record["wordkey"])
                if aset is None:
                    raise ParseError(
                        f"instance for unknown wordkey '{record['wordkey']}'",
                        line=line_no,
                        path=path,
                    )
                aset.instances.append(
                    Instance(
                        tokens=tuple(record["tokens"]),
                        target=int(record["target"]),
                        label=record["label"],
                        line=int(record.get("line", -1)),
                    )
                )
    return sets


def _dumps(obj) -> str:
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))
