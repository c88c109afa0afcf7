"""Score normalization, anomaly ranking, and label-based evaluation.

Compactness, rating deviation, and burstness are min-max scaled across
the whole candidate population of a run, then combined into the anomaly
score 3 * compactness + deviation + burstness in [0, 5]. Ranking is
deterministic: score descending, then larger group, then group id.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, replace
from typing import Iterable, NamedTuple, Sequence

from .clustering import TrainConfig, assign_clusters, train
from .graph import adjacency_sparse, build_graph, connected_components, node_features
from .indicators import CandidateGroup, IndicatorVector, extract_group, group_indicators
from .reviews import LABEL_FAKE, ReviewTable, product_stats

COMPACTNESS_WEIGHT = 3.0
DEFAULT_SIZE_FLOOR = 20
SIZE_BUCKET_WIDTH = 10


@dataclass
class ScoredGroup:
    group: CandidateGroup
    indicators: IndicatorVector
    compactness_norm: float
    deviation_norm: float
    burstness_norm: float
    anomaly_score: float
    precision: float | None = None

    @property
    def size(self) -> int:
        return self.group.size


def _minmax(values: Sequence[float]) -> list[float]:
    lo, hi = min(values), max(values)
    if hi <= lo:
        return [0.0] * len(values)
    return [(v - lo) / (hi - lo) for v in values]


def anomaly_score(
    compactness_norm: float,
    deviation_norm: float,
    burstness_norm: float,
    compactness_weight: float = COMPACTNESS_WEIGHT,
) -> float:
    """Weighted sum of the normalized indicators; group cohesion counts
    three times as much as either individual signal."""
    return compactness_weight * compactness_norm + deviation_norm + burstness_norm


def normalize_scores(
    items: Sequence[tuple[CandidateGroup, IndicatorVector]],
    compactness_weight: float = COMPACTNESS_WEIGHT,
) -> list[ScoredGroup]:
    """Min-max scale each indicator column across the candidate population.

    A zero-range column (including the single-group case) maps to all
    zeros rather than inflating a constant signal.
    """
    if not items:
        raise ValueError("no candidate groups to normalize")
    comp = _minmax([vec.compactness for _, vec in items])
    dev = _minmax([vec.avg_rating_deviation for _, vec in items])
    bst = _minmax([vec.avg_burstness for _, vec in items])
    return [
        ScoredGroup(
            group=group,
            indicators=vec,
            compactness_norm=comp[i],
            deviation_norm=dev[i],
            burstness_norm=bst[i],
            anomaly_score=anomaly_score(comp[i], dev[i], bst[i], compactness_weight),
        )
        for i, (group, vec) in enumerate(items)
    ]


def _rank_key(sg: ScoredGroup):
    return (-sg.anomaly_score, -sg.size, sg.group.group_id, sg.group.source_cluster)


class Ranking(NamedTuple):
    headline: list[ScoredGroup]  # size >= floor, score-ordered
    full: list[ScoredGroup]  # every candidate, same order


def rank_groups(scored: Iterable[ScoredGroup], size_floor: int = DEFAULT_SIZE_FLOOR) -> Ranking:
    """Order by descending anomaly score; ties fall to the bigger group,
    then the smaller group id. Groups under the size floor stay out of
    the headline list but remain in the full ranking."""
    ordered = sorted(scored, key=_rank_key)
    return Ranking(
        headline=[sg for sg in ordered if sg.size >= size_floor],
        full=ordered,
    )


def group_precision(group: CandidateGroup, table: ReviewTable) -> float | None:
    """Share of members having at least one fake-labeled review.

    None when no member has any labeled review at all, which makes the
    metric meaningless.
    """
    any_label = False
    fake = 0
    for member in group.members:
        labels = {r.label for r in table.by_reviewer.get(member, ())}
        if labels - {"unknown"}:
            any_label = True
        if LABEL_FAKE in labels:
            fake += 1
    if not any_label:
        return None
    return fake / len(group.members)


def attach_precision(scored: Sequence[ScoredGroup], table: ReviewTable) -> list[ScoredGroup]:
    return [replace(sg, precision=group_precision(sg.group, table)) for sg in scored]


def size_distribution(sizes: Iterable[int], top_n: int | None = None) -> dict[int, int]:
    """Counts of group sizes in fixed-width buckets keyed by bucket start.

    Pass ranked sizes with top_n to restrict to the strongest groups.
    """
    values = list(sizes)
    if top_n is not None:
        values = values[:top_n]
    counts = Counter((s // SIZE_BUCKET_WIDTH) * SIZE_BUCKET_WIDTH for s in values)
    return dict(sorted(counts.items()))


@dataclass
class EvalReport:
    ranked: list[ScoredGroup]
    top_size: int | None
    top_precision: float | None
    histogram: dict[int, int]


def evaluate(
    scored: Sequence[ScoredGroup], table: ReviewTable, size_floor: int = DEFAULT_SIZE_FLOOR
) -> EvalReport:
    """Precision-annotated ranking plus the headline top-group row."""
    ranking = rank_groups(attach_precision(scored, table), size_floor)
    top = ranking.headline[0] if ranking.headline else None
    return EvalReport(
        ranked=ranking.full,
        top_size=top.size if top else None,
        top_precision=top.precision if top else None,
        histogram=size_distribution(sg.size for sg in ranking.full),
    )


def extract_candidate_groups(
    graph,
    assignment,
    table: ReviewTable,
    min_support: int = 2,
    assign_threshold: float = 0.2,
    split_components: bool = True,
) -> list[CandidateGroup]:
    """Clusters -> candidate groups, one per connected cluster piece.

    A cluster that mixes disconnected subgraphs cannot describe one
    collusive group (no co-review relation crosses the gap, and such a
    mixture always has zero compactness), so each cluster is split into
    its connected components before member extraction. Duplicate member
    sets, which overlapping assignments can produce, keep only their
    first occurrence.
    """
    clusters = assign_clusters(assignment, threshold=assign_threshold)
    groups: list[CandidateGroup] = []
    seen: set[frozenset[str]] = set()
    for cluster_id in sorted(clusters):
        if split_components:
            pieces = connected_components(graph, clusters[cluster_id])
        else:
            pieces = [clusters[cluster_id]]
        for piece in pieces:
            group = extract_group(
                piece, graph, table, min_support=min_support, source_cluster=cluster_id
            )
            if group is None or group.members in seen:
                continue
            seen.add(group.members)
            group.group_id = len(groups)
            groups.append(group)
    return groups


class SweepPoint(NamedTuple):
    n_clusters: int
    mean_top_precision: float | None
    n_groups: int
    partial: bool  # fewer than 10 candidate groups backed the mean


def cluster_sweep(
    table: ReviewTable,
    k_list: Sequence[int],
    config: TrainConfig,
    min_co_review: int = 2,
    weighting: str = "co_review_count",
    min_support: int = 2,
    top_n: int = 10,
) -> list[SweepPoint]:
    """Cluster-count sweep: mean precision of the top groups per k.

    Skips indicator ranking entirely; for each k the candidate groups'
    precisions are computed and the best top_n averaged. Requires labels.
    """
    if not table.has_labels():
        raise ValueError("cluster sweep needs labeled reviews")
    graph = build_graph(table, min_co_review=min_co_review, weighting=weighting)
    adj = adjacency_sparse(graph)
    feats = node_features(graph)
    points = []
    for k in k_list:
        cfg = replace(config, n_clusters=k)
        result = train(adj, feats, cfg)
        groups = extract_candidate_groups(
            graph,
            result.assignment,
            table,
            min_support=min_support,
            assign_threshold=cfg.assign_threshold,
        )
        precisions = sorted(
            (p for p in (group_precision(g, table) for g in groups) if p is not None),
            reverse=True,
        )
        best = precisions[:top_n]
        mean = sum(best) / len(best) if best else None
        points.append(SweepPoint(k, mean, len(groups), len(best) < top_n))
    return points


def score_groups(
    groups: Sequence[CandidateGroup],
    table: ReviewTable,
    tau_days: int = 30,
    compactness_weight: float = COMPACTNESS_WEIGHT,
) -> list[ScoredGroup]:
    """Indicators + normalization + anomaly scores for a set of candidates."""
    stats = product_stats(table)
    items = [(g, group_indicators(g, table, stats, tau_days=tau_days)) for g in groups]
    return normalize_scores(items, compactness_weight=compactness_weight)
