"""SPI/SASI strategies, level sets, ranks and the counter-based composed strategy.

All winning regions here are "visit the target again": a state already in
the target only belongs to the region if it can reach the target in at
least one more step. This is the reading under which ``(s, 0)`` and
``(s, 1)`` always share membership, and it excludes final states from
which no further improvement is possible. Dead product states are never
targets.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable

from .improvement import ImprovementMdp, decode, encode
from .mdp import Strategy, almost_sure_reach_region, positive_winning_strategy


class Mode(str, enum.Enum):
    ALMOST_SURE = "almost-sure"
    POSITIVE = "positive"

    @classmethod
    def parse(cls, value: "str | Mode") -> "Mode":
        if isinstance(value, Mode):
            return value
        aliases = {"sasi": cls.ALMOST_SURE, "spi": cls.POSITIVE}
        return aliases.get(value) or cls(value)


class UnboundedRankError(ValueError):
    def __init__(self) -> None:
        super().__init__("rank unbounded; composed strategy undefined")


class MismatchedProductError(ValueError):
    pass


def improvement_region(
    imdp: ImprovementMdp, target: Iterable[int], mode: Mode | str
) -> tuple[frozenset[int], Strategy]:
    """States that can (re)visit ``target`` after at least one step, with a permissive strategy."""
    mode = Mode.parse(mode)
    product = imdp.product
    target = frozenset(target) - imdp.dead
    if not target:
        return frozenset(), Strategy([()] * product.num_states)
    if mode is Mode.ALMOST_SURE:
        base_region, base = almost_sure_reach_region(product, target)

        def usable(v: int, a: int) -> bool:
            return all(t in base_region for t in product.support(v, a))

    else:
        base = positive_winning_strategy(product, target)
        base_region = base.domain | target

        def usable(v: int, a: int) -> bool:
            return any(t in base_region for t in product.support(v, a))

    choices = []
    for v in product.states:
        if v in target:
            choices.append(frozenset(a for a in product.enabled(v) if usable(v, a)))
        elif v in base_region:
            choices.append(base.allowed(v))
        else:
            choices.append(frozenset())
    strategy = Strategy(choices)
    return strategy.domain, strategy


def spi_strategy(imdp: ImprovementMdp) -> Strategy:
    """Positive-winning strategy for visiting the final states: safe and positively improving."""
    return improvement_region(imdp, imdp.final, Mode.POSITIVE)[1]


def sasi_strategy(imdp: ImprovementMdp) -> Strategy:
    """Almost-sure-winning strategy for visiting the final states: safe and almost-surely improving."""
    return improvement_region(imdp, imdp.final, Mode.ALMOST_SURE)[1]


@dataclass
class LevelSets:
    """Nested regions ``levels[k-1] = W_k`` and targets ``targets[k] = R_k`` (``R_0`` = final states).

    ``bounded`` is False when the targets stopped shrinking while still
    nonempty; ranks inside the last level are then unbounded.
    """

    mode: Mode
    levels: list[frozenset[int]]
    targets: list[frozenset[int]]
    strategies: list[Strategy]
    num_states: int
    bounded: bool = True
    _product_id: int = field(default=0, repr=False)

    @property
    def level_zero(self) -> frozenset[int]:
        top = self.levels[0] if self.levels else frozenset()
        return frozenset(range(self.num_states)) - top

    @property
    def max_rank(self) -> float:
        return len(self.levels) if self.bounded else math.inf

    def level(self, k: int) -> frozenset[int]:
        """``W_k`` for ``k >= 1``, the level-0 set for ``k == 0``."""
        if k == 0:
            return self.level_zero
        if k <= len(self.levels):
            return self.levels[k - 1]
        return self.levels[-1] if not self.bounded else frozenset()


def level_sets(imdp: ImprovementMdp, mode: Mode | str) -> LevelSets:
    """Iterate ``W_{i+1} = Win(R_i)``, ``R_{i+1} = {(s,1) in final | (s,0) in W_{i+1}}``.

    Stops when ``R`` becomes empty or stops changing.
    """
    mode = Mode.parse(mode)
    final = imdp.final - imdp.dead
    targets = [final]
    levels: list[frozenset[int]] = []
    strategies: list[Strategy] = []
    bounded = True
    while targets[-1]:
        region, strategy = improvement_region(imdp, targets[-1], mode)
        if not region:
            break
        levels.append(region)
        strategies.append(strategy)
        nxt = frozenset(v for v in final if encode(decode(v)[0], 0) in region)
        if nxt == targets[-1]:
            bounded = False
            break
        targets.append(nxt)
    return LevelSets(mode, levels, targets, strategies, imdp.num_states, bounded, id(imdp))


def sasi_level_sets(imdp: ImprovementMdp) -> LevelSets:
    return level_sets(imdp, Mode.ALMOST_SURE)


def spi_level_sets(imdp: ImprovementMdp) -> LevelSets:
    return level_sets(imdp, Mode.POSITIVE)


def rank_of(levels: LevelSets, v: int, imdp: ImprovementMdp | None = None) -> float:
    """Largest ``k`` with ``(s, 0)`` in ``W_k``; ``math.inf`` inside an unbounded top level."""
    if imdp is not None and id(imdp) != levels._product_id:
        raise MismatchedProductError("level sets were computed on a different improvement MDP")
    if not 0 <= v < levels.num_states:
        raise MismatchedProductError(f"state {v} outside the level sets' product")
    low = encode(decode(v)[0], 0)
    for k in range(len(levels.levels), 0, -1):
        if low in levels.levels[k - 1]:
            if k == len(levels.levels) and not levels.bounded:
                return math.inf
            return k
    return 0


def rank_table(levels: LevelSets) -> list[float]:
    return [rank_of(levels, v) for v in range(levels.num_states)]


def rank_histogram(levels: LevelSets) -> dict[int, int]:
    """Number of base states with rank at least ``k``, for each level ``k``."""
    return {
        k: sum(1 for v in region if not v & 1) for k, region in enumerate(levels.levels, start=1)
    }


class CounterStrategy:
    """Strategy with a counter of improvements still owed.

    With counter ``c > 0`` the agent follows the permissive winning strategy
    for ``R_{c-1}``; entering ``R_{c-1}`` lowers the counter. With ``c == 0``
    any action of the product is allowed.
    """

    def __init__(self, imdp: ImprovementMdp, levels: LevelSets) -> None:
        if not levels.bounded:
            raise UnboundedRankError()
        self.imdp = imdp
        self.levels = levels
        self.mode = levels.mode

    @property
    def max_counter(self) -> int:
        return len(self.levels.levels)

    def initial_counter(self, v: int) -> int:
        return int(rank_of(self.levels, v))

    def allowed(self, v: int, counter: int) -> frozenset[int]:
        if counter == 0:
            return frozenset(self.imdp.product.enabled(v))
        return self.levels.strategies[counter - 1].allowed(v)

    def update(self, counter: int, v_next: int) -> int:
        if counter > 0 and v_next in self.levels.targets[counter - 1]:
            return counter - 1
        return counter

    def choices(self) -> list[tuple[int, int, frozenset[int]]]:
        """Every ``(state, counter, actions)`` entry with a nonempty action set, counters >= 1."""
        return [
            (v, c, acts)
            for c in range(1, self.max_counter + 1)
            for v in range(self.imdp.num_states)
            if (acts := self.allowed(v, c))
        ]


def composed_sasi_strategy(imdp: ImprovementMdp, levels: LevelSets | None = None) -> CounterStrategy:
    if levels is None:
        levels = sasi_level_sets(imdp)
    return CounterStrategy(imdp, levels)
