"""JSON and CSV file formats for models, preferences, strategies and ranks.

Writers are canonical: sorted keys, one transition per line and exact
rational probabilities, so parsing a file and writing it back reproduces
it byte for byte.
"""

from __future__ import annotations

import csv
import io
import json
import math
import warnings
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, Sequence

from .improvement import ImprovementMdp, decode
from .mdp import EmptyObjectiveError, Mdp, Probability, ReachabilityObjective
from .preferences import PreferenceModel, close_preorder, strict_preferences
from .synthesis import CounterStrategy, LevelSets, rank_table


class FormatError(ValueError):
    """The file could not be parsed into the expected structure."""


def format_probability(p: Probability) -> str:
    q = Fraction(p)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def parse_probability(text: Any) -> Fraction:
    if isinstance(text, bool) or not isinstance(text, (str, int, float)):
        raise FormatError(f"probability must be a string, got {text!r}")
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise FormatError(f"bad probability {text!r}") from exc


def _load_json(source: str | Path) -> Any:
    try:
        return json.loads(Path(source).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{source}: not valid JSON ({exc.msg} at line {exc.lineno})") from exc
    except UnicodeDecodeError as exc:
        raise FormatError(f"{source}: not UTF-8") from exc


def _require(data: Any, key: str, kind: type | tuple[type, ...]) -> Any:
    if not isinstance(data, dict) or key not in data:
        raise FormatError(f"missing field {key!r}")
    value = data[key]
    if not isinstance(value, kind) or isinstance(value, bool) and kind is int:
        raise FormatError(f"field {key!r} has the wrong type")
    return value


def _dumps(body: dict[str, Any], inline_lists: Iterable[str] = ()) -> str:
    """Sorted, indented JSON whose ``inline_lists`` entries print one item per line."""
    inline = set(inline_lists)
    lines = ["{"]
    keys = sorted(body)
    for i, key in enumerate(keys):
        comma = "," if i < len(keys) - 1 else ""
        value = body[key]
        if key in inline and value:
            lines.append(f"  {json.dumps(key)}: [")
            for j, item in enumerate(value):
                sep = "," if j < len(value) - 1 else ""
                lines.append(f"    {json.dumps(item, ensure_ascii=False, sort_keys=True)}{sep}")
            lines.append(f"  ]{comma}")
        else:
            lines.append(f"  {json.dumps(key)}: {json.dumps(value, ensure_ascii=False, sort_keys=True)}{comma}")
    lines.append("}")
    return "\n".join(lines) + "\n"


# models


def mdp_to_dict(mdp: Mdp) -> dict[str, Any]:
    body: dict[str, Any] = {
        "states": mdp.num_states,
        "actions": list(mdp.actions),
        "initial": mdp.initial,
        "transitions": [
            [s, a, t, format_probability(p)]
            for s in mdp.states
            for a, succ in mdp.transitions[s].items()
            for t, p in succ
        ],
    }
    if mdp.state_labels is not None:
        body["state_labels"] = list(mdp.state_labels)
    return body


def dumps_mdp(mdp: Mdp, extra: dict[str, Any] | None = None) -> str:
    body = mdp_to_dict(mdp)
    body.update(extra or {})
    return _dumps(body, inline_lists=("transitions", "state_labels", "final_states"))


def mdp_from_dict(data: Any) -> Mdp:
    """Build an :class:`Mdp`; structural problems raise :class:`FormatError`.

    Semantic problems (sums, successor indices, states without actions)
    are left to :func:`prefplan.mdp.validate_mdp`.
    """
    n = _require(data, "states", int)
    actions = _require(data, "actions", list)
    initial = _require(data, "initial", int)
    rows_in = _require(data, "transitions", list)
    if n < 1:
        raise FormatError("model needs at least one state")
    if not all(isinstance(a, str) for a in actions) or len(set(actions)) != len(actions):
        raise FormatError("actions must be distinct strings")
    rows: list[dict[int, list[tuple[int, Fraction]]]] = [{} for _ in range(n)]
    for k, entry in enumerate(rows_in):
        if not isinstance(entry, list) or len(entry) != 4:
            raise FormatError(f"transition {k} must be [src, action, dst, probability]")
        src, a, dst, prob = entry
        if not all(isinstance(x, int) and not isinstance(x, bool) for x in (src, a, dst)):
            raise FormatError(f"transition {k}: indices must be integers")
        if not 0 <= src < n:
            raise FormatError(f"transition {k}: source {src} out of range")
        if not 0 <= a < len(actions):
            raise FormatError(f"transition {k}: action {a} out of range")
        rows[src].setdefault(a, []).append((dst, parse_probability(prob)))
    labels = data.get("state_labels")
    if labels is not None and (
        not isinstance(labels, list) or len(labels) != n or not all(isinstance(x, str) for x in labels)
    ):
        raise FormatError("state_labels must list one string per state")
    return Mdp(n, actions, initial, rows, labels)


def load_mdp(path: str | Path) -> Mdp:
    return mdp_from_dict(_load_json(path))


def write_mdp(mdp: Mdp, path: str | Path) -> None:
    Path(path).write_text(dumps_mdp(mdp), encoding="utf-8")


def dumps_objectives(objectives: Sequence[ReachabilityObjective]) -> str:
    body = {"objectives": [{"name": o.name, "states": sorted(o.target)} for o in objectives]}
    return _dumps(body, inline_lists=("objectives",))


def objectives_from_dict(data: Any, num_states: int | None = None) -> list[ReachabilityObjective]:
    out = []
    for k, entry in enumerate(_require(data, "objectives", list)):
        name = _require(entry, "name", str)
        states = _require(entry, "states", list)
        if not all(isinstance(s, int) and not isinstance(s, bool) for s in states):
            raise FormatError(f"objective {name}: states must be integers")
        if num_states is not None and any(not 0 <= s < num_states for s in states):
            raise FormatError(f"objective {name}: state index out of range")
        try:
            out.append(ReachabilityObjective(name, frozenset(states)))
        except EmptyObjectiveError as exc:
            raise FormatError(f"objective {k} ({name}): empty objective") from exc
    return out


def load_objectives(path: str | Path, num_states: int | None = None) -> list[ReachabilityObjective]:
    return objectives_from_dict(_load_json(path), num_states)


def write_objectives(objectives: Sequence[ReachabilityObjective], path: str | Path) -> None:
    Path(path).write_text(dumps_objectives(objectives), encoding="utf-8")


def preferences_to_dict(prefs: PreferenceModel) -> dict[str, Any]:
    """Strict pairs of the closed relation, plus indifference as two-way weak pairs."""
    names = prefs.names
    body: dict[str, Any] = {
        "objectives": list(names),
        "prefers": [
            [names[i], names[j]] for i in range(prefs.n) for j in range(prefs.n) if prefs.strictly(i, j)
        ],
        "bottom_element": prefs.bottom_element,
    }
    indifferent = [
        [names[i], names[j]]
        for i in range(prefs.n)
        for j in range(i + 1, prefs.n)
        if prefs.weakly(i, j) and prefs.weakly(j, i)
    ]
    if indifferent:
        body["indifferent"] = indifferent
    return body


def dumps_preferences(prefs: PreferenceModel) -> str:
    return _dumps(preferences_to_dict(prefs))


def preferences_from_dict(data: Any) -> PreferenceModel:
    names = _require(data, "objectives", list)
    pairs = data.get("prefers", []) if isinstance(data, dict) else []
    same = data.get("indifferent", []) if isinstance(data, dict) else []
    bottom = data.get("bottom_element", True) if isinstance(data, dict) else True
    if not all(isinstance(x, str) for x in names) or len(set(names)) != len(names):
        raise FormatError("objective names must be distinct strings")
    if not isinstance(bottom, bool):
        raise FormatError("bottom_element must be true or false")
    index = {name: i for i, name in enumerate(names)}

    def edges(raw: Any, what: str) -> list[tuple[int, int]]:
        if not isinstance(raw, list):
            raise FormatError(f"{what} must be a list of pairs")
        out = []
        for pair in raw:
            if not isinstance(pair, list) or len(pair) != 2 or any(x not in index for x in pair):
                raise FormatError(f"{what}: bad pair {pair!r}")
            out.append((index[pair[0]], index[pair[1]]))
        return out

    strict = edges(pairs, "prefers")
    weak = edges(same, "indifferent")
    if not weak:
        return strict_preferences(strict, len(names), names, bottom)
    prefs = close_preorder(strict + weak + [(j, i) for i, j in weak], len(names), names, bottom)
    for i, j in strict:
        if not prefs.strictly(i, j):
            warnings.warn(
                f"preference {names[i]} > {names[j]} collapses to indifference after closure",
                stacklevel=2,
            )
    return prefs


def load_preferences(path: str | Path) -> PreferenceModel:
    return preferences_from_dict(_load_json(path))


def write_preferences(prefs: PreferenceModel, path: str | Path) -> None:
    Path(path).write_text(dumps_preferences(prefs), encoding="utf-8")


# products, strategies and ranks


def product_state_name(v: int) -> str:
    s, m = decode(v)
    return f"s{s}|m{m}"


def parse_product_state(name: str) -> int:
    try:
        s, m = name.split("|")
        if not s.startswith("s") or m not in ("m0", "m1"):
            raise ValueError
        return 2 * int(s[1:]) + int(m[1])
    except ValueError as exc:
        raise FormatError(f"bad product state name {name!r}") from exc


def dumps_product(imdp: ImprovementMdp) -> str:
    product = imdp.product
    plain = Mdp(product.num_states, product.actions, product.initial, product.transitions)
    extra = {
        "state_labels": [product_state_name(v) for v in product.states],
        "final_states": sorted(imdp.final),
    }
    return dumps_mdp(plain, extra)


def strategy_to_dict(strategy: CounterStrategy, start: int) -> dict[str, Any]:
    actions = strategy.imdp.product.actions
    return {
        "mode": "sasi" if strategy.mode.value == "almost-sure" else "spi",
        "counter_init": strategy.initial_counter(start),
        "choices": [
            {"state": product_state_name(v), "counter": c, "actions": [actions[a] for a in sorted(acts)]}
            for v, c, acts in strategy.choices()
        ],
    }


def dumps_strategy(strategy: CounterStrategy, start: int) -> str:
    return _dumps(strategy_to_dict(strategy, start), inline_lists=("choices",))


def strategy_choices_from_dict(data: Any) -> tuple[str, int, dict[tuple[int, int], frozenset[str]]]:
    """Read a strategy file back as ``(mode, counter_init, {(state, counter): actions})``."""
    mode = _require(data, "mode", str)
    if mode not in ("sasi", "spi"):
        raise FormatError(f"unknown mode {mode!r}")
    init = _require(data, "counter_init", int)
    out = {}
    for entry in _require(data, "choices", list):
        v = parse_product_state(_require(entry, "state", str))
        c = _require(entry, "counter", int)
        acts = _require(entry, "actions", list)
        out[(v, c)] = frozenset(acts)
    return mode, init, out


def _format_rank(r: float) -> str:
    return "inf" if r == math.inf else str(int(r))


def dumps_rank_csv(levels: LevelSets) -> str:
    """``state,rank`` for every base state (the rank of ``(s, 0)``)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["state", "rank"])
    ranks = rank_table(levels)
    for v in range(0, levels.num_states, 2):
        writer.writerow([f"s{decode(v)[0]}", _format_rank(ranks[v])])
    return buf.getvalue()


def dumps_rank_pair_csv(sasi: LevelSets, spi: LevelSets) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["state", "rank_sasi", "rank_spi"])
    ra, rp = rank_table(sasi), rank_table(spi)
    for v in range(0, sasi.num_states, 2):
        writer.writerow([f"s{decode(v)[0]}", _format_rank(ra[v]), _format_rank(rp[v])])
    return buf.getvalue()


def parse_rank_csv(text: str) -> dict[str, float]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header != ["state", "rank"]:
        raise FormatError("rank CSV must start with 'state,rank'")
    out = {}
    for row in reader:
        if len(row) != 2:
            raise FormatError(f"bad rank row {row!r}")
        out[row[0]] = math.inf if row[1] == "inf" else int(row[1])
    return out
