"""The improvement MDP: the base MDP paired with a one-bit "last step improved" flag.

Product state ``(s, m)`` is stored at index ``2 * s + m``.
"""

from __future__ import annotations

from typing import Sequence

from .mdp import Mdp, ReachabilityObjective, almost_sure_reach_region
from .preferences import MpSet, PreferenceModel, classify_mp_transition, maximal_elements

MpTable = tuple[MpSet, ...]


def encode(s: int, m: int) -> int:
    return 2 * s + m


def decode(v: int) -> tuple[int, int]:
    return v >> 1, v & 1


def compute_mp_table(
    mdp: Mdp, objectives: Sequence[ReachabilityObjective], prefs: PreferenceModel
) -> MpTable:
    """Per state, the MP set of the objectives that are almost-surely achievable from it."""
    if len(objectives) != prefs.n:
        raise ValueError(f"{len(objectives)} objectives but preference model has {prefs.n}")
    regions = [almost_sure_reach_region(mdp, obj.target)[0] for obj in objectives]
    return tuple(
        maximal_elements(prefs, (k for k, region in enumerate(regions) if s in region))
        for s in mdp.states
    )


class ImprovementMdp:
    """Product of a base MDP with an improvement flag.

    An action is kept at ``(s, m)`` only if none of its successors weakens
    the MP set of ``s``; the successor flag records whether the move
    improves it. Both copies of ``s`` share the same enabled actions.

    Attributes:
        base: the original MDP.
        product: the product as an :class:`Mdp` over ``2 * |S|`` states.
        mp: MP set of every base state.
        final: product states ``(s, 1)`` entered by at least one improving transition.
        dead: product states with no safe action.
        safety: ``"action"`` or ``"transition"``, see :func:`build_improvement_mdp`.
    """

    def __init__(
        self,
        base: Mdp,
        objectives: Sequence[ReachabilityObjective],
        prefs: PreferenceModel,
        product: Mdp,
        mp: MpTable,
        safety: str = "action",
    ) -> None:
        self.base = base
        self.safety = safety
        self.objectives = tuple(objectives)
        self.prefs = prefs
        self.product = product
        self.mp = mp
        self.final = frozenset(
            t for t in range(product.num_states) if t & 1 and product.predecessors[t]
        )
        self.dead = frozenset(v for v in product.states if not product.transitions[v])

    @property
    def num_states(self) -> int:
        return self.product.num_states

    @property
    def initial(self) -> int:
        return self.product.initial

    def state_name(self, v: int) -> str:
        s, m = decode(v)
        return f"{self.base.state_name(s)}|m{m}"

    def __repr__(self) -> str:
        return (
            f"ImprovementMdp(states={self.num_states}, transitions={self.product.num_transitions}, "
            f"final={len(self.final)}, dead={len(self.dead)})"
        )


def build_improvement_mdp(
    mdp: Mdp,
    objectives: Sequence[ReachabilityObjective],
    prefs: PreferenceModel,
    mp: MpTable | None = None,
    safety: str = "action",
) -> ImprovementMdp:
    """Build the product.

    With ``safety="action"`` an action is dropped at ``s`` if any successor
    would weaken ``MP(s)``, so every kept action is a full distribution.
    ``safety="transition"`` drops only the weakening successors and keeps
    the remaining (sub-stochastic) branches; the qualitative algorithms only
    read supports, and sampling renormalises.
    """
    if safety not in ("action", "transition"):
        raise ValueError(f"safety must be 'action' or 'transition', got {safety!r}")
    if mp is None:
        mp = compute_mp_table(mdp, objectives, prefs)
    rows: list[dict[int, tuple]] = []
    for s in mdp.states:
        row = {}
        for a in mdp.enabled(s):
            succ = []
            for t, p in mdp.successors(s, a):
                if p <= 0:
                    continue
                improving, weakening = classify_mp_transition(prefs, mp[s], mp[t])
                if weakening:
                    if safety == "action":
                        break
                    continue
                succ.append((encode(t, int(improving)), p))
            else:
                if succ:
                    row[a] = tuple(succ)
        rows.append(row)
        rows.append(dict(row))
    labels = [f"{mdp.state_name(s)}|m{m}" for s in mdp.states for m in (0, 1)]
    product = Mdp(2 * mdp.num_states, mdp.actions, encode(mdp.initial, 0), rows, labels)
    return ImprovementMdp(mdp, objectives, prefs, product, mp, safety)


def check_support_symmetry(imdp: ImprovementMdp) -> bool:
    """True iff ``(s, 0)`` and ``(s, 1)`` have the same enabled actions and projected supports."""
    product = imdp.product
    for s in imdp.base.states:
        low, high = encode(s, 0), encode(s, 1)
        if product.enabled(low) != product.enabled(high):
            return False
        for a in product.enabled(low):
            if product.support(low, a) != product.support(high, a):
                return False
    return True
