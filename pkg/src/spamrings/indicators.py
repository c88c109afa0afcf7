"""Candidate reviewer groups and their anomaly indicators.

A candidate group is extracted from one cluster of the product-rating
graph: its members are the reviewers that appear in enough of the
cluster's node reviewer sets. Group-level indicators (review tightness,
product tightness, neighbor tightness and their product, the group
compactness) measure how coordinated the members' product sets look;
individual-level indicators (rating deviation, burstness) measure how
abnormal each member's own history is. All indicators live in [0, 1].
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Mapping

from scipy.special import expit

from .graph import PRGraph, cluster_reviewer_support
from .reviews import ProductStats, ReviewTable

DEFAULT_BURST_THRESHOLD_DAYS = 30

# widest possible gap on a 1..5 star scale, used to normalize deviations
MAX_RATING_SPAN = 4.0


@dataclass
class CandidateGroup:
    """Reviewers pulled from one cluster, with their full product sets."""

    members: frozenset[str]
    member_products: Mapping[str, frozenset[str]]
    source_cluster: int = -1
    group_id: int = -1

    def __post_init__(self):
        if not self.members:
            raise ValueError("candidate group must have members")
        if set(self.member_products) != set(self.members):
            raise ValueError("member_products keys must equal members")
        if any(not ps for ps in self.member_products.values()):
            raise ValueError("every member needs at least one reviewed product")

    @property
    def products(self) -> frozenset[str]:
        out: set[str] = set()
        for ps in self.member_products.values():
            out |= ps
        return frozenset(out)

    @property
    def size(self) -> int:
        return len(self.members)


def group_from_table(members: Iterable[str], table: ReviewTable, source_cluster: int = -1) -> CandidateGroup:
    members = frozenset(members)
    products = {
        m: frozenset(r.product_id for r in table.by_reviewer.get(m, ())) for m in members
    }
    return CandidateGroup(members=members, member_products=products, source_cluster=source_cluster)


def extract_group(
    cluster_nodes: Iterable[int],
    graph: PRGraph,
    table: ReviewTable,
    min_support: int = 2,
    source_cluster: int = -1,
) -> CandidateGroup | None:
    """Members = reviewers present in >= min_support distinct cluster nodes.

    min_support generalizes intersecting all the node reviewer sets
    (pass the cluster size for the strict intersection). Product sets
    come from the full review table, not just the cluster. Returns None
    when nobody qualifies.
    """
    if min_support < 1:
        raise ValueError("min_support must be >= 1")
    support = cluster_reviewer_support(graph, cluster_nodes)
    members = {r for r, count in support.items() if count >= min_support}
    if not members:
        return None
    return group_from_table(members, table, source_cluster=source_cluster)


def penalty(group: CandidateGroup) -> float:
    """Logistic down-weighting of small groups: tiny overlaps happen by chance."""
    return float(expit(len(group.members) + len(group.products) - 3))


def review_tightness(group: CandidateGroup) -> float:
    """Fraction of the members x products grid actually reviewed, penalized.

    Each member's product set is capped to the group's products, so the
    raw ratio stays in (0, 1].
    """
    products = group.products
    filled = sum(len(ps & products) for ps in group.member_products.values())
    raw = filled / (len(group.members) * len(products))
    return raw * penalty(group)


def product_tightness(group: CandidateGroup) -> float:
    """Products everyone rated over products anyone rated (full product sets)."""
    sets = list(group.member_products.values())
    common = set(sets[0])
    union = set(sets[0])
    for ps in sets[1:]:
        common &= ps
        union |= ps
    return len(common) / len(union)


def _jaccard(a: frozenset[str], b: frozenset[str]) -> float:
    union = len(a | b)
    return len(a & b) / union if union else 0.0


def neighbor_tightness(group: CandidateGroup, literal_denominator: bool = False) -> float:
    """Penalized average Jaccard similarity over member pairs.

    The default divides by the pair count so the average stays in [0, 1];
    literal_denominator reproduces the 2*sum/|R| variant instead. A
    singleton group has no pairs and scores 0.
    """
    members = sorted(group.members)
    if len(members) < 2:
        return 0.0
    total = sum(
        _jaccard(group.member_products[a], group.member_products[b])
        for a, b in combinations(members, 2)
    )
    if literal_denominator:
        mean = 2.0 * total / len(members)
    else:
        mean = total / (len(members) * (len(members) - 1) / 2)
    return mean * penalty(group)


def group_compactness(group: CandidateGroup, literal_denominator: bool = False) -> float:
    """Product of the three tightness scores; one shared-nothing pair or an
    empty common-product set drives it to zero."""
    return (
        review_tightness(group)
        * product_tightness(group)
        * neighbor_tightness(group, literal_denominator=literal_denominator)
    )


def avg_rating_deviation(
    reviewer: str, table: ReviewTable, stats: Mapping[str, ProductStats]
) -> float:
    """Mean |rating - product average| over the reviewer's reviews, scaled
    by the widest possible gap (4 stars) into [0, 1]."""
    reviews = table.by_reviewer.get(reviewer)
    if not reviews:
        raise KeyError(f"unknown reviewer {reviewer!r}")
    total = sum(abs(r.rating - stats[r.product_id].avg_rating) for r in reviews)
    return total / (len(reviews) * MAX_RATING_SPAN)


def burstness(
    reviewer: str, table: ReviewTable, tau_days: int = DEFAULT_BURST_THRESHOLD_DAYS
) -> float:
    """How compressed the reviewer's activity window is.

    1 when first and last review share a day, falling linearly to 0 at a
    span of tau_days; longer spans score 0.
    """
    reviews = table.by_reviewer.get(reviewer)
    if not reviews:
        raise KeyError(f"unknown reviewer {reviewer!r}")
    days = [r.date for r in reviews]
    span = (max(days) - min(days)).days
    if span > tau_days:
        return 0.0
    return 1.0 - span / tau_days


@dataclass(frozen=True)
class IndicatorVector:
    review_tightness: float
    product_tightness: float
    neighbor_tightness: float
    compactness: float
    avg_rating_deviation: float
    avg_burstness: float


def group_indicators(
    group: CandidateGroup,
    table: ReviewTable,
    stats: Mapping[str, ProductStats],
    tau_days: int = DEFAULT_BURST_THRESHOLD_DAYS,
    literal_denominator: bool = False,
) -> IndicatorVector:
    """All six indicator values for one candidate group (unnormalized)."""
    rt = review_tightness(group)
    pt = product_tightness(group)
    nt = neighbor_tightness(group, literal_denominator=literal_denominator)
    members = sorted(group.members)
    avd = sum(avg_rating_deviation(m, table, stats) for m in members) / len(members)
    bst = sum(burstness(m, table, tau_days) for m in members) / len(members)
    return IndicatorVector(
        review_tightness=rt,
        product_tightness=pt,
        neighbor_tightness=nt,
        compactness=rt * pt * nt,
        avg_rating_deviation=avd,
        avg_burstness=bst,
    )


def write_indicators(path, rows: Iterable[tuple[CandidateGroup, IndicatorVector]]) -> None:
    """Per-group dump of raw indicator values as tab-separated text."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(
            "group_id\tcluster\tsize\tn_products\treview_tightness\tproduct_tightness"
            "\tneighbor_tightness\tcompactness\tavg_rating_deviation\tavg_burstness\n"
        )
        for group, vec in rows:
            fh.write(
                f"{group.group_id}\t{group.source_cluster}\t{group.size}\t{len(group.products)}"
                f"\t{vec.review_tightness:.6f}\t{vec.product_tightness:.6f}"
                f"\t{vec.neighbor_tightness:.6f}\t{vec.compactness:.6f}"
                f"\t{vec.avg_rating_deviation:.6f}\t{vec.avg_burstness:.6f}\n"
            )
