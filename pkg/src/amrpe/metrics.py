"""Corpus BLEU / chrF++ and depth-stratified improvement reports.

Tokenization for both metrics is whitespace splitting after NFC
normalization.  BLEU uses the orders for which the hypothesis side has at
least one n-gram (so corpora of very short sentences still score 100 when
identical) and replaces zero match counts by ``1e-9``.
"""

from __future__ import annotations

import csv
import io
import json
import math
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .errors import DataError, EmptyCorpus, IdMismatch, LengthMismatch, UnknownFeature

BLEU_ORDER = 4
BLEU_EPS = 1e-9
CHRF_CHAR_ORDER = 6
CHRF_WORD_ORDER = 2
CHRF_BETA = 2.0

FEATURES = ("depth", "node_count", "amr_count")


def _normalize(text: str) -> str:
    return unicodedata.normalize("NFC", text)


def _words(text: str) -> list[str]:
    return _normalize(text).split()


def _ngrams(seq: Sequence, n: int) -> Counter:
    return Counter(tuple(seq[i : i + n]) for i in range(len(seq) - n + 1))


def _check_pairs(refs: Sequence[str], hyps: Sequence[str]) -> None:
    if len(refs) != len(hyps):
        raise LengthMismatch(f"{len(refs)} references vs {len(hyps)} hypotheses")
    if not refs:
        raise EmptyCorpus("no sentence pairs")


@dataclass(frozen=True)
class BleuStats:
    matches: tuple[int, ...]
    totals: tuple[int, ...]
    hyp_len: int
    ref_len: int


def bleu_stats(refs: Sequence[str], hyps: Sequence[str], max_n: int = BLEU_ORDER) -> BleuStats:
    _check_pairs(refs, hyps)
    matches = [0] * max_n
    totals = [0] * max_n
    hyp_len = ref_len = 0
    for ref, hyp in zip(refs, hyps):
        r, h = _words(ref), _words(hyp)
        hyp_len += len(h)
        ref_len += len(r)
        for n in range(1, max_n + 1):
            hc, rc = _ngrams(h, n), _ngrams(r, n)
            totals[n - 1] += sum(hc.values())
            matches[n - 1] += sum((hc & rc).values())
    return BleuStats(tuple(matches), tuple(totals), hyp_len, ref_len)


def bleu_from_stats(stats: BleuStats, eps: float = BLEU_EPS) -> float:
    if stats.hyp_len == 0:
        return 0.0
    logs = []
    for m, t in zip(stats.matches, stats.totals):
        if t == 0:
            continue
        logs.append(math.log(m / t if m > 0 else eps / t))
    if not logs:
        return 0.0
    c, r = stats.hyp_len, stats.ref_len
    bp = 1.0 if c >= r else math.exp(1.0 - r / c)
    return 100.0 * bp * math.exp(sum(logs) / len(logs))


def bleu(refs: Sequence[str], hyps: Sequence[str]) -> float:
    """Corpus BLEU-4 in [0, 100]."""
    return bleu_from_stats(bleu_stats(refs, hyps))


def _chrf_sentence_stats(ref: str, hyp: str) -> list[tuple[int, int, int]]:
    stats = []
    rc, hc = "".join(_normalize(ref).split()), "".join(_normalize(hyp).split())
    for n in range(1, CHRF_CHAR_ORDER + 1):
        h, r = _ngrams(hc, n), _ngrams(rc, n)
        stats.append((sum(h.values()), sum(r.values()), sum((h & r).values())))
    rw, hw = _words(ref), _words(hyp)
    for n in range(1, CHRF_WORD_ORDER + 1):
        h, r = _ngrams(hw, n), _ngrams(rw, n)
        stats.append((sum(h.values()), sum(r.values()), sum((h & r).values())))
    return stats


def chrfpp(refs: Sequence[str], hyps: Sequence[str], beta: float = CHRF_BETA) -> float:
    """Corpus chrF++ (character 1-6 plus word 1-2 grams) in [0, 100].

    Precision and recall are averaged over the orders present on both
    sides, then combined into an F-beta score.
    """
    _check_pairs(refs, hyps)
    total = [[0, 0, 0] for _ in range(CHRF_CHAR_ORDER + CHRF_WORD_ORDER)]
    for ref, hyp in zip(refs, hyps):
        for acc, s in zip(total, _chrf_sentence_stats(ref, hyp)):
            for i in range(3):
                acc[i] += s[i]
    prec = rec = 0.0
    orders = 0
    for n_hyp, n_ref, n_match in total:
        if n_hyp > 0 and n_ref > 0:
            prec += n_match / n_hyp
            rec += n_match / n_ref
            orders += 1
    if orders == 0:
        return 0.0
    prec /= orders
    rec /= orders
    if prec + rec == 0:
        return 0.0
    b2 = beta * beta
    return 100.0 * (1 + b2) * prec * rec / (b2 * prec + rec)


# -- stratified reports ------------------------------------------------------------------


@dataclass(frozen=True)
class ScoredEntry:
    id: str
    reference: str
    hypothesis: str
    features: dict = field(default_factory=dict, compare=False)


@dataclass(frozen=True)
class ScoredCorpus:
    entries: tuple[ScoredEntry, ...]

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        ids = [e.id for e in self.entries]
        if len(set(ids)) != len(ids):
            raise DataError("corpus ids must be unique")
        for e in self.entries:
            for name, value in e.features.items():
                if not isinstance(value, int) or isinstance(value, bool) or value < 0:
                    raise DataError(f"feature {name!r} of {e.id!r} must be a non-negative integer")

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @property
    def refs(self) -> list[str]:
        return [e.reference for e in self.entries]

    @property
    def hyps(self) -> list[str]:
        return [e.hypothesis for e in self.entries]

    @classmethod
    def build(cls, ids, refs, hyps, features: dict) -> "ScoredCorpus":
        if not (len(ids) == len(refs) == len(hyps)):
            raise LengthMismatch("ids, references and hypotheses differ in length")
        missing = [i for i in ids if i not in features]
        if missing:
            raise UnknownFeature(f"no features for ids {missing[:5]}")
        return cls(ScoredEntry(i, r, h, dict(features[i])) for i, r, h in zip(ids, refs, hyps))


_DIRECTIONS = {">=": lambda v, z: v >= z, "<=": lambda v, z: v <= z}


def stratify(corpus: ScoredCorpus, feature: str, z: int, direction: str = ">=") -> ScoredCorpus:
    """Entries whose ``feature`` is ``>= z`` (or ``<= z``), order preserved."""
    if direction not in _DIRECTIONS:
        raise ValueError(f"direction must be one of {sorted(_DIRECTIONS)}")
    keep = _DIRECTIONS[direction]
    for e in corpus.entries:
        if feature not in e.features:
            raise UnknownFeature(f"entry {e.id!r} lacks feature {feature!r}")
    return ScoredCorpus(e for e in corpus.entries if keep(e.features[feature], z))


@dataclass(frozen=True)
class ReportRow:
    z: int
    count: int
    score_a: float | None
    score_b: float | None
    delta: float | None
    delta1: float | None


@dataclass(frozen=True)
class StratifiedReport:
    feature: str
    direction: str
    rows: tuple[ReportRow, ...]
    baseline_delta: float | None

    def by_z(self) -> dict[int, ReportRow]:
        return {r.z: r for r in self.rows}

    def to_records(self) -> list[dict]:
        return [
            {
                "z": r.z,
                "count": r.count,
                "bleu_a": r.score_a,
                "bleu_b": r.score_b,
                "delta": r.delta,
                "delta1": r.delta1,
            }
            for r in self.rows
        ]

    def to_json(self) -> str:
        return json.dumps(self.to_records(), sort_keys=True, indent=2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        fields = ["z", "count", "bleu_a", "bleu_b", "delta", "delta1"]
        writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
        writer.writeheader()
        for rec in self.to_records():
            writer.writerow({k: ("" if rec[k] is None else rec[k]) for k in fields})
        return buf.getvalue()


def _aligned(sys_a: ScoredCorpus, sys_b: ScoredCorpus) -> ScoredCorpus:
    ids_a = [e.id for e in sys_a.entries]
    by_id = {e.id: e for e in sys_b.entries}
    if set(ids_a) != set(by_id):
        raise IdMismatch("systems cover different entry ids")
    for e in sys_a.entries:
        if e.reference != by_id[e.id].reference:
            raise IdMismatch(f"reference text of {e.id!r} differs between systems")
    return ScoredCorpus(by_id[i] for i in ids_a)


def delta_report(
    sys_a: ScoredCorpus,
    sys_b: ScoredCorpus,
    feature: str = "depth",
    z_range: Iterable[int] = range(1, 11),
    direction: str = ">=",
    metric: Callable[[Sequence[str], Sequence[str]], float] = bleu,
) -> StratifiedReport:
    """Per-threshold scores of both systems, their difference and the
    difference relative to the ``z = 1`` stratum. Empty strata give ``None``."""
    sys_b = _aligned(sys_a, sys_b)

    def delta_at(z: int):
        a = stratify(sys_a, feature, z, direction)
        b = stratify(sys_b, feature, z, direction)
        if not len(a):
            return 0, None, None, None
        sa, sb = metric(a.refs, a.hyps), metric(b.refs, b.hyps)
        return len(a), sa, sb, sa - sb

    base = delta_at(1)[3]
    rows = []
    for z in z_range:
        count, sa, sb, d = delta_at(z)
        d1 = None if d is None or base is None else d - base
        rows.append(ReportRow(z, count, sa, sb, d, d1))
    return StratifiedReport(feature, direction, tuple(rows), base)
