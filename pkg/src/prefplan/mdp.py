"""Explicit-state MDPs and qualitative reachability.

States and actions are dense integer indices. Transition probabilities are
kept as supplied (``Fraction`` or ``float``), but every algorithm in this
module looks only at transition supports.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Sequence, Union

Probability = Union[Fraction, float]
StateSet = frozenset

FLOAT_TOLERANCE = 1e-9
ORACLE_MAX_STATES = 10
ORACLE_MAX_ACTIONS = 3


class EmptyObjectiveError(ValueError):
    def __init__(self) -> None:
        super().__init__("empty objective")


class OracleScaleError(ValueError):
    def __init__(self) -> None:
        super().__init__("oracle scale exceeded")


class Mdp:
    """A finite MDP ``<S, A, T, init>``.

    ``transitions[s]`` maps each action enabled at ``s`` to a tuple of
    ``(successor, probability)`` pairs. Actions absent from the mapping are
    disabled at that state. The constructor does not check the model; call
    :func:`validate_mdp` for that.
    """

    def __init__(
        self,
        num_states: int,
        actions: Sequence[str],
        initial: int,
        transitions: Sequence[Mapping[int, Iterable[tuple[int, Probability]]]],
        state_labels: Sequence[str] | None = None,
    ) -> None:
        self.num_states = num_states
        self.actions = tuple(actions)
        self.initial = initial
        self.transitions: tuple[dict[int, tuple[tuple[int, Probability], ...]], ...] = tuple(
            {a: tuple(succ) for a, succ in sorted(row.items())} for row in transitions
        )
        self.state_labels = tuple(state_labels) if state_labels is not None else None

    @property
    def num_actions(self) -> int:
        return len(self.actions)

    @property
    def states(self) -> range:
        return range(self.num_states)

    def enabled(self, s: int) -> tuple[int, ...]:
        return tuple(self.transitions[s])

    def successors(self, s: int, a: int) -> tuple[tuple[int, Probability], ...]:
        return self.transitions[s][a]

    def support(self, s: int, a: int) -> tuple[int, ...]:
        return self._supports[s][a]

    def state_name(self, s: int) -> str:
        if self.state_labels is not None:
            return self.state_labels[s]
        return f"s{s}"

    @property
    def num_transitions(self) -> int:
        """Number of ``(s, a, s')`` triples with positive probability."""
        return sum(len(sup) for row in self._supports for sup in row.values())

    @cached_property
    def _supports(self) -> tuple[dict[int, tuple[int, ...]], ...]:
        return tuple(
            {a: tuple(sorted({t for t, p in succ if p > 0})) for a, succ in row.items()}
            for row in self.transitions
        )

    @cached_property
    def predecessors(self) -> tuple[tuple[tuple[int, int], ...], ...]:
        """``predecessors[t]`` lists every ``(s, a)`` with ``t`` in ``Supp(T(s, a))``."""
        pre: list[list[tuple[int, int]]] = [[] for _ in range(self.num_states)]
        for s, row in enumerate(self._supports):
            for a, sup in row.items():
                for t in sup:
                    pre[t].append((s, a))
        return tuple(tuple(p) for p in pre)

    def __repr__(self) -> str:
        return (
            f"Mdp(num_states={self.num_states}, actions={self.actions!r}, "
            f"initial={self.initial}, transitions={self.num_transitions})"
        )


@dataclass(frozen=True)
class ReachabilityObjective:
    name: str
    target: frozenset[int]

    def __post_init__(self) -> None:
        if not self.target:
            raise EmptyObjectiveError()


@dataclass(frozen=True)
class Violation:
    message: str
    state: int | None = None
    action: int | None = None

    def __str__(self) -> str:
        where = []
        if self.state is not None:
            where.append(f"state {self.state}")
        if self.action is not None:
            where.append(f"action {self.action}")
        return f"{', '.join(where)}: {self.message}" if where else self.message


class Strategy:
    """Memoryless, set-valued strategy: ``allowed(s)`` is a (possibly empty) set of actions."""

    def __init__(self, choices: Sequence[Iterable[int]]) -> None:
        self.choices = tuple(frozenset(c) for c in choices)

    def allowed(self, s: int) -> frozenset[int]:
        return self.choices[s]

    @property
    def domain(self) -> frozenset[int]:
        return frozenset(s for s, c in enumerate(self.choices) if c)

    def deterministic(self) -> "Strategy":
        """Fix each choice to its lowest action index."""
        return Strategy([{min(c)} if c else () for c in self.choices])

    def __len__(self) -> int:
        return len(self.choices)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Strategy) and self.choices == other.choices

    def __hash__(self) -> int:
        return hash(self.choices)

    def __repr__(self) -> str:
        return f"Strategy(domain={len(self.domain)} of {len(self.choices)} states)"


def validate_mdp(mdp: Mdp) -> list[Violation]:
    """Return every violated model invariant. An empty list means the model is valid."""
    report: list[Violation] = []
    n = mdp.num_states
    if n < 1:
        report.append(Violation("model has no states"))
    if not 0 <= mdp.initial < max(n, 1):
        report.append(Violation(f"initial state {mdp.initial} out of range"))
    if len(mdp.transitions) != n:
        report.append(Violation(f"transition table has {len(mdp.transitions)} rows, expected {n}"))
    if mdp.state_labels is not None and len(mdp.state_labels) != n:
        report.append(Violation("state label count does not match state count"))
    for s, row in enumerate(mdp.transitions):
        if not row:
            report.append(Violation("no enabled action", state=s))
        for a, succ in row.items():
            if not 0 <= a < mdp.num_actions:
                report.append(Violation("action index out of range", state=s, action=a))
            if not succ:
                report.append(Violation("enabled action has no successors", state=s, action=a))
                continue
            total: Probability = 0
            exact = True
            for t, p in succ:
                if not 0 <= t < n:
                    report.append(Violation(f"successor {t} out of range", state=s, action=a))
                if not 0 < p <= 1:
                    report.append(Violation(f"probability {p} outside (0, 1]", state=s, action=a))
                exact = exact and isinstance(p, (int, Fraction))
                total += p
            if (total != 1) if exact else abs(total - 1) > FLOAT_TOLERANCE:
                report.append(Violation(f"probabilities sum to {total}", state=s, action=a))
    return report


def _require_target(target: Iterable[int]) -> frozenset[int]:
    target = frozenset(target)
    if not target:
        raise EmptyObjectiveError()
    return target


def _backward_layers(
    mdp: Mdp,
    target: Iterable[int],
    actions: Sequence[Iterable[int]] | None = None,
) -> dict[int, int]:
    """BFS distance to ``target`` in the support graph, over ``actions[s]`` (default: all enabled)."""
    dist = {t: 0 for t in target}
    queue = deque(dist)
    allowed = None if actions is None else [frozenset(a) for a in actions]
    while queue:
        t = queue.popleft()
        d = dist[t] + 1
        for s, a in mdp.predecessors[t]:
            if s in dist:
                continue
            if allowed is not None and a not in allowed[s]:
                continue
            dist[s] = d
            queue.append(s)
    return dist


def _progress_actions(
    mdp: Mdp, s: int, dist: Mapping[int, int], candidates: Iterable[int]
) -> frozenset[int]:
    closer = dist[s] - 1
    return frozenset(
        a for a in candidates if any(dist.get(t) == closer for t in mdp.support(s, a))
    )


def positive_reach_region(mdp: Mdp, target: Iterable[int]) -> frozenset[int]:
    """States from which some strategy reaches ``target`` with positive probability."""
    return frozenset(_backward_layers(mdp, _require_target(target)))


def positive_winning_strategy(mdp: Mdp, target: Iterable[int]) -> Strategy:
    """Permissive positive-winning strategy.

    Inside the positive region an action is allowed iff one of its successors
    is one BFS layer closer to the target; at target states every enabled
    action is allowed. Outside the region the action set is empty.
    """
    target = frozenset(target)
    dist = _backward_layers(mdp, target) if target else {}
    choices: list[frozenset[int]] = []
    for s in mdp.states:
        if s in target:
            choices.append(frozenset(mdp.enabled(s)))
        elif s in dist:
            choices.append(_progress_actions(mdp, s, dist, mdp.enabled(s)))
        else:
            choices.append(frozenset())
    return Strategy(choices)


def almost_sure_reach_region(mdp: Mdp, target: Iterable[int]) -> tuple[frozenset[int], Strategy]:
    """Almost-sure winning region for reaching ``target`` and a permissive strategy certifying it.

    Alternating fixpoint: drop actions that can leave the candidate set,
    then shrink the candidate set to the states that still reach the target
    through surviving actions. On the fixpoint, a non-target state may use
    any surviving action that makes BFS progress; a target state keeps its
    surviving actions, or all enabled actions if none survive.
    """
    target = _require_target(target)
    n = mdp.num_states
    alive = [True] * n
    surviving = [set(mdp.enabled(s)) for s in range(n)]
    removed: list[int] = []
    while True:
        for t in removed:
            for s, a in mdp.predecessors[t]:
                surviving[s].discard(a)
        dist = _backward_layers(mdp, (t for t in target if alive[t]), surviving)
        removed = [s for s in range(n) if alive[s] and s not in dist]
        if not removed:
            break
        for s in removed:
            alive[s] = False
            surviving[s].clear()
    region = frozenset(dist)
    choices: list[frozenset[int]] = []
    for s in range(n):
        if s not in region:
            choices.append(frozenset())
        elif s in target:
            choices.append(frozenset(surviving[s]) or frozenset(mdp.enabled(s)))
        else:
            choices.append(_progress_actions(mdp, s, dist, surviving[s]))
    return region, Strategy(choices)


# -- exhaustive oracle -------------------------------------------------------

ZERO = "zero"
POSITIVE = "positive"
ALMOST_SURE = "almost-sure"
_TAG_ORDER = {ZERO: 0, POSITIVE: 1, ALMOST_SURE: 2}


def _closure(succ_masks: list[int]) -> list[int]:
    """Reflexive-transitive reachability bitmasks."""
    n = len(succ_masks)
    reach = [succ_masks[s] | (1 << s) for s in range(n)]
    changed = True
    while changed:
        changed = False
        for s in range(n):
            acc = reach[s]
            m = acc
            while m:
                low = m & -m
                acc |= reach[low.bit_length() - 1]
                m ^= low
            if acc != reach[s]:
                reach[s] = acc
                changed = True
    return reach


def oracle_reach_qualitative(mdp: Mdp, target: Iterable[int]) -> list[str]:
    """Classify each state as ``zero``, ``positive`` or ``almost-sure`` by brute force.

    Every memoryless deterministic strategy is enumerated; for each one the
    induced chain (target made absorbing) is analysed with bitmask
    reachability and bottom-SCC detection. A state's tag is the best over
    all strategies.
    """
    target = frozenset(target)
    n = mdp.num_states
    if n > ORACLE_MAX_STATES or mdp.num_actions > ORACLE_MAX_ACTIONS:
        raise OracleScaleError()
    target_mask = sum(1 << t for t in target)
    free = [s for s in range(n) if s not in target]
    # a state without actions is stuck, which the chain models as a self-loop
    options = [
        [sum(1 << t for t in mdp.support(s, a)) for a in mdp.enabled(s)] or [1 << s] for s in free
    ]
    best = [_TAG_ORDER[ALMOST_SURE] if s in target else 0 for s in range(n)]
    for choice in itertools.product(*options):
        succ = [1 << s for s in range(n)]
        for s, mask in zip(free, choice):
            succ[s] = mask
        reach = _closure(succ)
        bottom_outside = 0
        for s in free:
            # s lies in a bottom SCC iff everything it reaches reaches it back
            m, in_bottom = reach[s], True
            while m:
                low = m & -m
                if not reach[low.bit_length() - 1] >> s & 1:
                    in_bottom = False
                    break
                m ^= low
            if in_bottom:
                bottom_outside |= 1 << s
        for s in free:
            if reach[s] & bottom_outside == 0:
                best[s] = 2
            elif reach[s] & target_mask and best[s] < 1:
                best[s] = 1
    names = {v: k for k, v in _TAG_ORDER.items()}
    return [names[b] for b in best]
