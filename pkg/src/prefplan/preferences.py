"""Preorder preferences over objectives and the most-preferred (MP) operator."""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence

from .mdp import Mdp, ReachabilityObjective


class Comparison(enum.Enum):
    STRICTLY_PREFERRED = "strictly-preferred"
    STRICTLY_WORSE = "strictly-worse"
    INDIFFERENT = "indifferent"
    INCOMPARABLE = "incomparable"


class PlayOrder(enum.Enum):
    BETTER = "≻"
    WORSE = "≺"
    EQUIVALENT = "∼"
    INCOMPARABLE = "∥"

    def mirror(self) -> "PlayOrder":
        return {PlayOrder.BETTER: PlayOrder.WORSE, PlayOrder.WORSE: PlayOrder.BETTER}.get(self, self)


class InvalidPlayError(ValueError):
    pass


class PreferenceModel:
    """Reflexive-transitive weak-preference relation over objective indices.

    ``bottom_element`` switches on the convention that an empty MP set sits
    strictly below every objective, so gaining a first objective counts as
    an improvement and losing every objective counts as a weakening.
    """

    def __init__(
        self,
        weakly_preferred: Sequence[Sequence[bool]],
        names: Sequence[str] | None = None,
        bottom_element: bool = True,
    ) -> None:
        self.n = len(weakly_preferred)
        self.weakly_preferred = tuple(tuple(bool(x) for x in row) for row in weakly_preferred)
        self.names = tuple(names) if names is not None else tuple(f"F{i + 1}" for i in range(self.n))
        self.bottom_element = bottom_element

    def weakly(self, i: int, j: int) -> bool:
        return self.weakly_preferred[i][j]

    def strictly(self, i: int, j: int) -> bool:
        return self.weakly_preferred[i][j] and not self.weakly_preferred[j][i]

    def compare(self, i: int, j: int) -> Comparison:
        forward, backward = self.weakly(i, j), self.weakly(j, i)
        if forward and backward:
            return Comparison.INDIFFERENT
        if forward:
            return Comparison.STRICTLY_PREFERRED
        if backward:
            return Comparison.STRICTLY_WORSE
        return Comparison.INCOMPARABLE

    def index(self, name: str) -> int:
        return self.names.index(name)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, PreferenceModel)
            and self.weakly_preferred == other.weakly_preferred
            and self.names == other.names
            and self.bottom_element == other.bottom_element
        )

    def __repr__(self) -> str:
        strict = [
            f"{self.names[i]}>{self.names[j]}"
            for i in range(self.n)
            for j in range(self.n)
            if self.strictly(i, j)
        ]
        return f"PreferenceModel({', '.join(strict) or 'no strict pairs'}, bottom={self.bottom_element})"


def close_preorder(
    edges: Iterable[tuple[int, int]],
    n: int,
    names: Sequence[str] | None = None,
    bottom_element: bool = True,
) -> PreferenceModel:
    """Reflexive-transitive closure of ``(i, j)`` edges meaning "i weakly preferred to j"."""
    weak = [[i == j for j in range(n)] for i in range(n)]
    for i, j in edges:
        if not (0 <= i < n and 0 <= j < n):
            raise IndexError(f"preference edge ({i}, {j}) out of range for {n} objectives")
        weak[i][j] = True
    for k in range(n):
        for i in range(n):
            if weak[i][k]:
                row_k = weak[k]
                row_i = weak[i]
                for j in range(n):
                    if row_k[j]:
                        row_i[j] = True
    return PreferenceModel(weak, names, bottom_element)


def strict_preferences(
    pairs: Iterable[tuple[int, int]],
    n: int,
    names: Sequence[str] | None = None,
    bottom_element: bool = True,
) -> PreferenceModel:
    """Close user-stated strict pairs, warning if closure turns one into indifference."""
    pairs = list(pairs)
    prefs = close_preorder(pairs, n, names, bottom_element)
    for i, j in pairs:
        if not prefs.strictly(i, j):
            warnings.warn(
                f"preference {prefs.names[i]} > {prefs.names[j]} collapses to indifference after closure",
                stacklevel=2,
            )
    return prefs


@dataclass(frozen=True)
class MpSet:
    """Maximal set of objectives; empty means bottom (nothing achieved)."""

    members: frozenset[int] = frozenset()

    @property
    def is_bottom(self) -> bool:
        return not self.members

    def __iter__(self):
        return iter(sorted(self.members))

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, i: object) -> bool:
        return i in self.members

    def __repr__(self) -> str:
        return "MpSet(⊥)" if self.is_bottom else f"MpSet({sorted(self.members)})"


BOTTOM = MpSet()


def maximal_elements(prefs: PreferenceModel, subset: Iterable[int]) -> MpSet:
    subset = frozenset(subset)
    return MpSet(frozenset(r for r in subset if not any(prefs.strictly(q, r) for q in subset)))


def classify_mp_transition(prefs: PreferenceModel, src: MpSet, dst: MpSet) -> tuple[bool, bool]:
    """Return ``(has_improving_pair, has_weakening_pair)`` for a move from ``src`` to ``dst``."""
    if prefs.bottom_element and (src.is_bottom or dst.is_bottom):
        return src.is_bottom and not dst.is_bottom, dst.is_bottom and not src.is_bottom
    improving = any(prefs.strictly(r2, r1) for r1 in src.members for r2 in dst.members)
    weakening = any(prefs.strictly(r1, r2) for r1 in src.members for r2 in dst.members)
    return improving, weakening


def compare_plays(prefs: PreferenceModel, mp_a: MpSet, mp_b: MpSet) -> PlayOrder:
    if mp_a == mp_b:
        return PlayOrder.EQUIVALENT
    b_to_a, a_to_b = classify_mp_transition(prefs, mp_b, mp_a)
    # moving from B to A improves iff some element of A beats one of B
    if b_to_a and not a_to_b:
        return PlayOrder.BETTER
    if a_to_b and not b_to_a:
        return PlayOrder.WORSE
    return PlayOrder.INCOMPARABLE


def satisfied_objectives(objectives: Sequence[ReachabilityObjective], visited: Iterable[int]) -> frozenset[int]:
    visited = frozenset(visited)
    return frozenset(k for k, obj in enumerate(objectives) if obj.target & visited)


def mp_of_play(
    mdp: Mdp,
    objectives: Sequence[ReachabilityObjective],
    prefs: PreferenceModel,
    states: Sequence[int],
) -> MpSet:
    """MP set of the objectives whose targets a prefix has visited."""
    for i, (s, t) in enumerate(zip(states, states[1:])):
        if not any(t in mdp.support(s, a) for a in mdp.enabled(s)):
            raise InvalidPlayError(f"no enabled transition {s} -> {t} at position {i}")
    return maximal_elements(prefs, satisfied_objectives(objectives, states))
