"""Builders for the toy example and the battery-constrained pickup gridworld."""

from __future__ import annotations

import itertools
import json
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any

from .mdp import Mdp, ReachabilityObjective
from .preferences import PreferenceModel, close_preorder

Cell = tuple[int, int]

MOVES = {"N": (1, 0), "S": (-1, 0), "E": (0, 1), "W": (0, -1)}
STATION = "station"


class ConfigError(ValueError):
    def __init__(self, problems: list[str]) -> None:
        super().__init__("; ".join(problems))
        self.problems = problems


def build_toy_example() -> tuple[Mdp, list[ReachabilityObjective], PreferenceModel]:
    """Six-state example: ``a`` safely reaches F1, ``b``/``c`` gamble on F2/F3, which both beat F1."""
    half = Fraction(1, 2)
    a, b, c = 0, 1, 2
    transitions = [
        {a: [(1, half), (5, half)], b: [(2, half), (3, half)], c: [(3, half), (4, half)]},
        {a: [(1, Fraction(1))]},
        {a: [(2, Fraction(1))]},
        {a: [(3, Fraction(1))]},
        {a: [(4, Fraction(1))]},
        {a: [(1, Fraction(1))]},
    ]
    mdp = Mdp(6, ("a", "b", "c"), 0, transitions)
    objectives = [
        ReachabilityObjective("F1", frozenset({1, 5})),
        ReachabilityObjective("F2", frozenset({2, 4})),
        ReachabilityObjective("F3", frozenset({3})),
    ]
    prefs = close_preorder([(1, 0), (2, 0)], 3, names=["F1", "F2", "F3"])
    return mdp, objectives, prefs


@dataclass
class GridworldConfig:
    """Declarative description of a pickup gridworld.

    Cells are ``(row, col)``; ``N`` increases the row and ``E`` the column.
    The availability vector is indexed by ``availability_order``; entering
    an available region cell picks its item, which switches on the bits in
    ``unlocks[item]``. Bits listed in ``consumable`` switch off once used
    (an item when picked, the station when it recharges).

    ``pickup_mode="union"`` switches the unlocked bits on and keeps the
    rest; ``"exclusive"`` makes the unlocked items the only available ones
    (non-item bits such as the station are only ever switched on).

    ``availability_space`` selects the enumerated vectors: ``"reachable"``
    explores pickups from the initial vector; ``"free-bits"`` takes every
    combination of the bits that the pickup rules can change.

    With ``track_pickups`` each state also records which items were picked,
    the space is the set of reachable (availability, picked) pairs, and
    objective ``X`` means "X has been picked". Otherwise objective ``X``
    holds at X's cell while X is available.

    ``recharge_level`` is the battery after recharging (default: capacity).
    """

    rows: int = 5
    cols: int = 5
    regions: dict[str, Cell] = field(default_factory=dict)
    station: Cell | None = None
    slippery: list[Cell] = field(default_factory=list)
    slip_offsets: list[Cell] = field(default_factory=lambda: [(0, 0), (1, 0), (-1, 0)])
    disabled: dict[str, list[str]] = field(default_factory=dict)
    disabled_mode: str = "stay"
    battery_capacity: int = 8
    initial_cell: Cell = (0, 0)
    initial_battery: int = 8
    availability_order: list[str] = field(default_factory=list)
    initial_availability: list[int] = field(default_factory=list)
    unlocks: dict[str, list[str]] = field(default_factory=dict)
    consumable: list[str] = field(default_factory=list)
    recharge_when_empty: bool = True
    availability_space: str = "free-bits"
    objective_needs_battery: bool = False
    pickup_mode: str = "union"
    track_pickups: bool = False
    recharge_level: int | None = None
    preferences: list[tuple[str, str]] = field(default_factory=list)
    bottom_element: bool = True

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "GridworldConfig":
        data = dict(data)
        data.pop("version", None)
        data.pop("comment", None)
        for key in ("station", "initial_cell"):
            if data.get(key) is not None:
                data[key] = tuple(data[key])
        for key in ("slippery", "slip_offsets", "preferences"):
            if key in data:
                data[key] = [tuple(x) for x in data[key]]
        if "regions" in data:
            data["regions"] = {k: tuple(v) for k, v in data["regions"].items()}
        return cls(**data)

    @classmethod
    def load(cls, path: str | Path) -> "GridworldConfig":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    @classmethod
    def shipped_default(cls) -> "GridworldConfig":
        text = resources.files("prefplan").joinpath("data/gridworld_paper.json").read_text(encoding="utf-8")
        return cls.from_dict(json.loads(text))

    def to_dict(self) -> dict[str, Any]:
        data = asdict(self)
        for key in ("station", "initial_cell"):
            if data[key] is not None:
                data[key] = list(data[key])
        for key in ("slippery", "slip_offsets", "preferences"):
            data[key] = [list(x) for x in data[key]]
        data["regions"] = {k: list(v) for k, v in data["regions"].items()}
        return data

    def problems(self) -> list[str]:
        out = []
        if self.rows < 1 or self.cols < 1:
            out.append("grid must have at least one row and column")

        def check(cell: Cell | None, what: str) -> None:
            if cell is not None and not (0 <= cell[0] < self.rows and 0 <= cell[1] < self.cols):
                out.append(f"{what} {tuple(cell)} outside the grid")

        for name, cell in self.regions.items():
            check(cell, f"region {name}")
        check(self.station, "station")
        check(self.initial_cell, "initial cell")
        for cell in self.slippery:
            check(cell, "slippery cell")
        for key, acts in self.disabled.items():
            check(_parse_cell(key), "disabled-action cell")
            out.extend(f"unknown action {a!r}" for a in acts if a not in MOVES)
        if self.disabled_mode not in ("stay", "remove"):
            out.append(f"disabled_mode must be 'stay' or 'remove', got {self.disabled_mode!r}")
        if not self.slip_offsets:
            out.append("slip distribution is empty")
        if self.battery_capacity < 1:
            out.append("battery capacity must be at least 1")
        if not 0 <= self.initial_battery <= self.battery_capacity:
            out.append("initial battery outside [0, capacity]")
        if len(self.initial_availability) != len(self.availability_order):
            out.append("initial availability length does not match availability order")
        known = set(self.availability_order)
        for item in self.consumable:
            if item not in known:
                out.append(f"unknown consumable bit {item!r}")
        for item, targets in self.unlocks.items():
            out.extend(f"unknown availability bit {x!r}" for x in [item, *targets] if x not in known)
        if self.station is not None and STATION not in known:
            out.append("station given but 'station' missing from availability order")
        for name in self.regions:
            if name not in known:
                out.append(f"region {name} has no availability bit")
        for hi, lo in self.preferences:
            out.extend(f"preference names unknown region {x!r}" for x in (hi, lo) if x not in self.regions)
        if self.availability_space not in ("reachable", "free-bits"):
            out.append(f"availability_space must be 'reachable' or 'free-bits', got {self.availability_space!r}")
        if self.pickup_mode not in ("union", "exclusive"):
            out.append(f"pickup_mode must be 'union' or 'exclusive', got {self.pickup_mode!r}")
        if self.recharge_level is not None and not 1 <= self.recharge_level <= self.battery_capacity:
            out.append("recharge level outside [1, capacity]")
        if not self.regions:
            out.append("no regions: every objective would be empty")
        return out


def _parse_cell(key: str) -> Cell:
    r, c = key.strip("()[] ").split(",")
    return int(r), int(c)


Inventory = tuple[tuple[int, ...], tuple[int, ...]]


def _pickup(config: GridworldConfig, cell: Cell, inv: Inventory) -> Inventory:
    avail, picked = inv
    index = {name: i for i, name in enumerate(config.availability_order)}
    for k, (name, where) in enumerate(config.regions.items()):
        if where == cell and avail[index[name]]:
            out = list(avail)
            if config.pickup_mode == "exclusive":
                for other in config.regions:
                    out[index[other]] = 0
            elif name in config.consumable:
                out[index[name]] = 0
            for other in config.unlocks.get(name, ()):
                out[index[other]] = 1
            if config.track_pickups:
                picked = picked[:k] + (1,) + picked[k + 1 :]
            return tuple(out), picked
    return inv


def _recharge(config: GridworldConfig, inv: Inventory) -> Inventory:
    if STATION not in config.consumable:
        return inv
    avail, picked = inv
    i = config.availability_order.index(STATION)
    return avail[:i] + (0,) + avail[i + 1 :], picked


def inventories(config: GridworldConfig) -> list[Inventory]:
    """Every (availability, picked) pair the state space enumerates."""
    init = (tuple(config.initial_availability), (0,) * len(config.regions))
    seen = {init}
    stack = [init]
    while stack:
        inv = stack.pop()
        nexts = [_pickup(config, cell, inv) for cell in config.regions.values()]
        if config.station is not None and inv[0][config.availability_order.index(STATION)]:
            nexts.append(_recharge(config, inv))
        for nxt in nexts:
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    if config.track_pickups or config.availability_space == "reachable":
        return sorted(seen, key=lambda inv: (inv[1], tuple(-x for x in inv[0])))
    avail_seen = {a for a, _ in seen}
    varying = [i for i in range(len(init[0])) if len({v[i] for v in avail_seen}) > 1]
    out = []
    for bits in itertools.product((1, 0), repeat=len(varying)):
        vec = list(init[0])
        for i, b in zip(varying, bits):
            vec[i] = b
        out.append((tuple(vec), init[1]))
    return out


def availability_vectors(config: GridworldConfig) -> list[tuple[int, ...]]:
    return sorted({a for a, _ in inventories(config)}, reverse=True)


@dataclass(frozen=True)
class GridState:
    row: int
    col: int
    battery: int
    availability: tuple[int, ...]
    picked: tuple[int, ...] = ()

    def label(self) -> str:
        base = f"{self.row},{self.col},{self.battery},{''.join(map(str, self.availability))}"
        if any(self.picked):
            base += "," + "".join(map(str, self.picked))
        return f"({base})"


def build_gridworld(
    config: GridworldConfig,
) -> tuple[Mdp, list[ReachabilityObjective], PreferenceModel, list[GridState]]:
    """Compile ``config`` into an explicit MDP, one objective per region, and the preferences.

    A move costs one battery unit; an empty battery is absorbing. Moving off
    the grid leaves the robot in place, and entering a slippery cell lands on
    it or one of ``slip_offsets`` around it, uniformly (off-grid outcomes
    stay on the slippery cell). Entering the available station recharges.
    """
    problems = config.problems()
    if problems:
        raise ConfigError(problems)
    invs = inventories(config)
    states = [
        GridState(r, c, b, a, p)
        for r in range(config.rows)
        for c in range(config.cols)
        for b in range(config.battery_capacity + 1)
        for a, p in invs
    ]
    index = {s: i for i, s in enumerate(states)}
    bit = {name: i for i, name in enumerate(config.availability_order)}
    disabled = {_parse_cell(k): set(v) for k, v in config.disabled.items()}
    slippery = set(config.slippery)
    actions = tuple(MOVES)
    refill = config.recharge_level or config.battery_capacity

    def inside(r: int, c: int) -> bool:
        return 0 <= r < config.rows and 0 <= c < config.cols

    def landing(cell: Cell) -> dict[Cell, Fraction]:
        if cell not in slippery:
            return {cell: Fraction(1)}
        share = Fraction(1, len(config.slip_offsets))
        out: dict[Cell, Fraction] = {}
        for dr, dc in config.slip_offsets:
            nxt = (cell[0] + dr, cell[1] + dc)
            if not inside(*nxt):
                nxt = cell
            out[nxt] = out.get(nxt, Fraction(0)) + share
        return out

    transitions = []
    for s in states:
        row: dict[int, list[tuple[int, Fraction]]] = {}
        if s.battery == 0:
            for a in range(len(actions)):
                row[a] = [(index[s], Fraction(1))]
            transitions.append(row)
            continue
        here = (s.row, s.col)
        for a, name in enumerate(actions):
            if name in disabled.get(here, ()):
                if config.disabled_mode == "remove":
                    continue
                target = here
            else:
                dr, dc = MOVES[name]
                target = (s.row + dr, s.col + dc)
                if not inside(*target):
                    target = here
            succ: dict[int, Fraction] = {}
            for cell, p in landing(target).items():
                inv = _pickup(config, cell, (s.availability, s.picked))
                battery = s.battery - 1
                if (
                    config.station is not None
                    and cell == config.station
                    and inv[0][bit[STATION]]
                    and (battery > 0 or config.recharge_when_empty)
                ):
                    battery = max(battery, refill)
                    inv = _recharge(config, inv)
                t = index[GridState(cell[0], cell[1], battery, *inv)]
                succ[t] = succ.get(t, Fraction(0)) + p
            row[a] = sorted(succ.items())
        transitions.append(row)

    initial = index[
        GridState(
            *config.initial_cell,
            config.initial_battery,
            tuple(config.initial_availability),
            (0,) * len(config.regions),
        )
    ]
    mdp = Mdp(len(states), actions, initial, transitions, [s.label() for s in states])

    names = list(config.regions)
    objectives = []
    for k, name in enumerate(names):
        cell = config.regions[name]
        if config.track_pickups:
            target = frozenset(
                i
                for i, s in enumerate(states)
                if s.picked[k] and (s.battery > 0 or not config.objective_needs_battery)
            )
        else:
            target = frozenset(
                i
                for i, s in enumerate(states)
                if (s.row, s.col) == cell
                and (s.availability[bit[name]] or name in config.consumable)
                and (s.battery > 0 or not config.objective_needs_battery)
            )
        objectives.append(ReachabilityObjective(name, target))
    edges = [(names.index(hi), names.index(lo)) for hi, lo in config.preferences]
    prefs = close_preorder(edges, len(names), names, config.bottom_element)
    return mdp, objectives, prefs, states
