"""Refactor detection: edge crossings in the bipartite match graph.

A refactor is an intentional sentence move, operationalized as membership
in the greedy crossing-eliminating removal set. Edges are (old_idx,
new_idx) pairs; two edges cross iff (a-c)*(b-d) < 0, so edges sharing an
endpoint (merges/splits) never cross.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

UP = "up"
DOWN = "down"

Edge = tuple[int, int]


@dataclass(frozen=True)
class RemovedEdge:
    old_idx: int
    new_idx: int
    direction: str
    rank: int


def crossing_of(e1: Edge, e2: Edge) -> bool:
    """True iff the two edges cross; shared endpoints give product 0."""
    return (e1[0] - e2[0]) * (e1[1] - e2[1]) < 0


def _canonical(edges) -> list[Edge]:
    return sorted(set(map(tuple, edges)))


def find_crossings(edges) -> dict[Edge, list[Edge]]:
    """Exact pairwise crossing map (O(E^2) reference implementation)."""
    ordered = _canonical(edges)
    crossings: dict[Edge, list[Edge]] = {e: [] for e in ordered}
    for e1, e2 in combinations(ordered, 2):
        if crossing_of(e1, e2):
            crossings[e1].append(e2)
            crossings[e2].append(e1)
    return crossings


def count_crossings_fast(edges) -> int:
    """Crossing-pair count via inversion counting (merge sort).

    Sorting by (old, new) ascending makes crossing pairs exactly the strict
    inversions of the new-index sequence: equal old indices are already in
    non-decreasing new order, and equal new indices are not strict.
    """
    seq = [e[1] for e in _canonical(edges)]

    def sort_count(values: list[int]) -> tuple[list[int], int]:
        if len(values) <= 1:
            return values, 0
        mid = len(values) // 2
        left, cl = sort_count(values[:mid])
        right, cr = sort_count(values[mid:])
        merged: list[int] = []
        count = cl + cr
        i = j = 0
        while i < len(left) and j < len(right):
            if left[i] <= right[j]:
                merged.append(left[i])
                i += 1
            else:
                count += len(left) - i
                merged.append(right[j])
                j += 1
        merged.extend(left[i:])
        merged.extend(right[j:])
        return merged, count

    return sort_count(seq)[1]


def refactor_direction(edge: Edge) -> str:
    """Up iff the sentence's new index is smaller; equal maps to down."""
    return UP if edge[1] < edge[0] else DOWN


def identify_refactors(edges) -> list[RemovedEdge]:
    """Greedy crossing elimination.

    While crossings exist: candidates are the edges with the most
    crossings, filtered to maximum |new - old| distance, then to up-movers
    (skipped if that empties the set), and the first candidate in canonical
    (old, new) order is removed. The crossing map is updated incrementally:
    only the removed edge's partners change.
    """
    crossings = {e: set(partners) for e, partners in find_crossings(edges).items()}
    removed: list[RemovedEdge] = []
    while True:
        max_count = 0
        for partners in crossings.values():
            if len(partners) > max_count:
                max_count = len(partners)
        if max_count == 0:
            break
        candidates = sorted(e for e, p in crossings.items() if len(p) == max_count)
        if len(candidates) > 1:
            max_dist = max(abs(e[1] - e[0]) for e in candidates)
            candidates = [e for e in candidates if abs(e[1] - e[0]) == max_dist]
            if len(candidates) > 1:
                upward = [e for e in candidates if e[1] - e[0] < 0]
                if upward:
                    candidates = upward
        target = candidates[0]
        removed.append(
            RemovedEdge(target[0], target[1], refactor_direction(target), len(removed) + 1)
        )
        for partner in crossings.pop(target):
            crossings[partner].discard(target)
    return removed


def min_removal_bruteforce(edges, limit: int = 20) -> tuple[Edge, ...]:
    """Smallest crossing-eliminating removal set, by subset enumeration.

    Subsets are tried in increasing size, lexicographically in canonical
    edge order, so ties resolve to the first such subset. Verification
    oracle only; exponential beyond ~20 edges.
    """
    ordered = _canonical(edges)
    if len(ordered) > limit:
        raise ValueError(f"brute force limited to {limit} edges, got {len(ordered)}")
    crossing_pairs = [
        (i, j)
        for i, j in combinations(range(len(ordered)), 2)
        if crossing_of(ordered[i], ordered[j])
    ]
    if not crossing_pairs:
        return ()
    for size in range(1, len(ordered) + 1):
        for combo in combinations(range(len(ordered)), size):
            chosen = set(combo)
            if all(i in chosen or j in chosen for i, j in crossing_pairs):
                return tuple(ordered[i] for i in combo)
    return tuple(ordered)
