"""Seeded Monte Carlo runs of strategies on an improvement MDP."""

from __future__ import annotations

import bisect
import csv
import io
import json
import random
from dataclasses import dataclass, field
from itertools import accumulate
from typing import Sequence, Union

import numpy as np

from .improvement import ImprovementMdp, decode
from .mdp import Strategy
from .synthesis import CounterStrategy

AnyStrategy = Union[Strategy, CounterStrategy]


class DeadStateError(RuntimeError):
    def __init__(self, name: str) -> None:
        super().__init__(f"no action available at dead product state {name}")
        self.state_name = name


class _Sampler:
    """Cumulative float weights per ``(state, action)`` for fast successor draws."""

    def __init__(self, imdp: ImprovementMdp) -> None:
        self.imdp = imdp
        self._cache: dict[tuple[int, int], tuple[list[int], list[float]]] = {}

    def step(self, rng: random.Random, v: int, a: int) -> int:
        key = (v, a)
        entry = self._cache.get(key)
        if entry is None:
            succ = [(t, float(p)) for t, p in self.imdp.product.successors(v, a) if p > 0]
            entry = ([t for t, _ in succ], list(accumulate(p for _, p in succ)))
            self._cache[key] = entry
        dsts, cum = entry
        if len(dsts) == 1:
            return dsts[0]
        i = bisect.bisect_right(cum, rng.random() * cum[-1])
        return dsts[min(i, len(dsts) - 1)]


def _run(
    imdp: ImprovementMdp,
    strategy: AnyStrategy,
    horizon: int,
    rng: random.Random,
    start: int,
    sampler: _Sampler,
    stop_at_dead: bool,
    stop_after: int | None,
) -> tuple[list[int], bool]:
    product = imdp.product
    counter = strategy.initial_counter(start) if isinstance(strategy, CounterStrategy) else 0
    play = [start]
    v = start
    improvements = 0
    for _ in range(horizon):
        if isinstance(strategy, CounterStrategy):
            actions = strategy.allowed(v, counter)
        else:
            actions = strategy.allowed(v)
        if not actions:
            # outside the strategy's domain: any safe action of the product
            actions = product.enabled(v)
            if not actions:
                if stop_at_dead:
                    return play, True
                raise DeadStateError(imdp.state_name(v))
        ordered = sorted(actions)
        a = ordered[rng.randrange(len(ordered))]
        v = sampler.step(rng, v, a)
        play.append(v)
        if isinstance(strategy, CounterStrategy):
            counter = strategy.update(counter, v)
        if v & 1:
            improvements += 1
            if stop_after is not None and improvements >= stop_after:
                break
    return play, False


def sample_play(
    imdp: ImprovementMdp,
    strategy: AnyStrategy,
    horizon: int,
    seed: int,
    start: int | None = None,
    stop_at_dead: bool = False,
    stop_after: int | None = None,
) -> list[int]:
    """Sample ``horizon`` steps, choosing uniformly among allowed actions.

    Where the strategy allows nothing (for example after the last
    guaranteed improvement) any action of the product is used, since every
    product action is already safe. Raises :class:`DeadStateError` when a
    product state without actions is reached, unless ``stop_at_dead``.
    With ``stop_after`` the play ends early once it has made that many
    improvements.
    """
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    start = imdp.initial if start is None else start
    rng = random.Random(seed)
    play, _ = _run(imdp, strategy, horizon, rng, start, _Sampler(imdp), stop_at_dead, stop_after)
    return play


def count_improvements(imdp: ImprovementMdp, play: Sequence[int]) -> int:
    """Number of steps that enter a flag-1 state, i.e. improving transitions."""
    return sum(1 for v in play[1:] if decode(v)[1] == 1)


@dataclass
class RunSummary:
    runs: int
    horizon: int
    seed: int
    start: int
    improvements: list[int]
    truncated: int = 0
    fractions: list[float] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.fractions:
            top = max(self.improvements, default=0)
            counts = np.bincount(np.asarray(self.improvements, dtype=np.int64), minlength=top + 1)
            at_least = np.cumsum(counts[::-1])[::-1]
            self.fractions = [float(x) / self.runs for x in at_least]

    def fraction_at_least(self, k: int) -> float:
        if k < len(self.fractions):
            return self.fractions[k]
        return 0.0

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["run_index", "improvements"])
        writer.writerows(enumerate(self.improvements))
        return buf.getvalue()

    def to_json(self, **extra) -> str:
        body = {
            "runs": self.runs,
            "horizon": self.horizon,
            "seed": self.seed,
            "start": self.start,
            "truncated_at_dead_state": self.truncated,
            "fraction_at_least": {str(k): f for k, f in enumerate(self.fractions)},
            "mean_improvements": sum(self.improvements) / self.runs,
            **extra,
        }
        return json.dumps(body, indent=2, sort_keys=True) + "\n"


def run_seeds(seed: int, runs: int) -> list[int]:
    return [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(runs)]


def improvement_statistics(
    imdp: ImprovementMdp,
    strategy: AnyStrategy,
    runs: int,
    horizon: int,
    seed: int,
    start: int | None = None,
    stop_after: int | None = None,
) -> RunSummary:
    """Improvement counts over ``runs`` independently seeded plays.

    ``stop_after`` ends a run once it has made that many improvements, which
    keeps ``fraction_at_least(k)`` exact for ``k <= stop_after`` while
    skipping the rest of the horizon. Runs reaching a dead state are
    truncated and counted in ``truncated``.
    """
    if runs < 1:
        raise ValueError("runs must be at least 1")
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    start = imdp.initial if start is None else start
    sampler = _Sampler(imdp)
    counts = []
    truncated = 0
    for run_seed in run_seeds(seed, runs):
        play, dead = _run(
            imdp, strategy, horizon, random.Random(run_seed), start, sampler, True, stop_after
        )
        truncated += dead
        counts.append(count_improvements(imdp, play))
    return RunSummary(runs, horizon, seed, start, counts, truncated)
