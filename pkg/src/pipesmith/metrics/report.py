"""Aggregate reporting over scored pipeline pairs.

error_breakdown tallies the edit operations across a batch of GED
results: counts and proportions per (kind, entity) pairing, plus a
second table attributing node substitutions to their causes. Both
proportion columns sum to 1 within their own table.

evaluate_dataset scores a generated pipeline against each reference
entry and aggregates: exact-match rate, mean normalized edit distance
(both as percentages), the same two numbers re-binned by query
ambiguity level and by reference size (node count), the edit-operation
histogram, and one record per pair. Output contains only data derived
from the inputs, so identical inputs give byte-identical JSON.
"""

from __future__ import annotations

from collections import Counter
from statistics import fmean
from typing import Iterable, Mapping, Protocol, Sequence

from ..ir.model import Pipeline
from .exact import exact_match
from .ged import GedResult, ged
from .matching import MatchConfig

AMBIGUITY_LEVELS = ("unambiguous", "ambiguous", "very_ambiguous")

_SIZE_BINS = (("1-5", 1, 5), ("6-10", 6, 10), ("11-15", 11, 15), ("16+", 16, None))


class _EvalEntry(Protocol):
    id: str
    reference: Pipeline
    ambiguity_level: str


def size_bin(node_count: int) -> str:
    for label, low, high in _SIZE_BINS:
        if node_count >= low and (high is None or node_count <= high):
            return label
    return _SIZE_BINS[0][0]  # node_count < 1 cannot occur for parsed pipelines


def error_breakdown(results: Iterable[GedResult]) -> dict:
    ops = [op for r in results for op in r.edit_script]
    if not ops:
        return {}
    op_counts = Counter(f"{op.kind}_{op.entity}" for op in ops)
    breakdown = {
        "total_edits": len(ops),
        "operations": {
            key: {"count": count, "proportion": round(count / len(ops), 4)}
            for key, count in sorted(op_counts.items())
        },
    }
    cause_counts = Counter(
        op.substitution_cause for op in ops if op.substitution_cause is not None
    )
    if cause_counts:
        total = sum(cause_counts.values())
        breakdown["substitution_causes"] = {
            key: {"count": count, "proportion": round(count / total, 4)}
            for key, count in sorted(cause_counts.items())
        }
    return breakdown


def _aggregate(records: Sequence[dict]) -> dict:
    matched = sum(1 for r in records if r["exact_match"])
    return {
        "pairs": len(records),
        "exact_match_pct": round(100.0 * matched / len(records), 4) if records else 0.0,
        "ged_pct": round(100.0 * fmean(r["normalized"] for r in records), 4)
        if records
        else 0.0,
        "timed_out_pairs": sum(1 for r in records if r["timed_out"]),
    }


def evaluate_dataset(
    entries: Sequence[_EvalEntry],
    generated: Mapping[str, Pipeline],
    cfg: MatchConfig | None = None,
) -> dict:
    cfg = cfg or MatchConfig()
    entry_ids = [e.id for e in entries]
    if len(set(entry_ids)) != len(entry_ids):
        dupes = sorted({i for i in entry_ids if entry_ids.count(i) > 1})
        raise ValueError(f"duplicate entry ids: {dupes}")
    missing = sorted(set(entry_ids) - set(generated))
    extra = sorted(set(generated) - set(entry_ids))
    if missing or extra:
        raise ValueError(
            f"entries and generated pipelines disagree: missing={missing} extra={extra}"
        )

    records: list[dict] = []
    ged_results: list[GedResult] = []
    for entry in sorted(entries, key=lambda e: e.id):
        gen = generated[entry.id]
        scored = ged(gen, entry.reference, cfg)
        ged_results.append(scored)
        records.append(
            {
                "id": entry.id,
                "ambiguity_level": str(entry.ambiguity_level),
                "reference_size": len(entry.reference.nodes),
                "exact_match": bool(exact_match(gen, entry.reference, cfg)),
                "distance": scored.distance,
                "normalized": scored.normalized,
                "edits": len(scored.edit_script),
                "timed_out": scored.timed_out,
            }
        )

    levels = [lvl for lvl in AMBIGUITY_LEVELS if any(r["ambiguity_level"] == lvl for r in records)]
    levels += sorted(
        {r["ambiguity_level"] for r in records} - set(AMBIGUITY_LEVELS)
    )
    bins = [
        label
        for label, _, _ in _SIZE_BINS
        if any(size_bin(r["reference_size"]) == label for r in records)
    ]

    report = _aggregate(records)
    report["by_ambiguity"] = {
        lvl: _aggregate([r for r in records if r["ambiguity_level"] == lvl]) for lvl in levels
    }
    report["by_reference_size"] = {
        label: _aggregate([r for r in records if size_bin(r["reference_size"]) == label])
        for label in bins
    }
    report["edit_breakdown"] = error_breakdown(ged_results)
    for r in records:
        r["distance"] = round(r["distance"], 4)
        r["normalized"] = round(r["normalized"], 4)
    report["per_pair"] = records
    return report
