"""Best-response search and Nash/SPNE verification by exhaustive deviation.

The lab verifies *given* profiles, mirroring proof-by-exhibit: it never
solves for equilibria.  Each candidate deviation is evaluated by a complete
fresh simulation of the game with everyone else held fixed, so a reported
deviation always reproduces its claimed gain when replayed.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Optional, Sequence

from .engine import DecisionPoint, StrategyProfile
from .games import (
    DagVotesGame,
    GameConfig,
    GameKind,
    GameModel,
    GameOutcome,
    PlayerId,
    SimpleGame,
)
from .rewards import Mechanism


class ExplosionGuard(Exception):
    """The deviation search would exceed the configured simulation budget."""


class AssumptionViolated(Exception):
    pass


class Verdict(enum.Enum):
    NASH = "nash"
    STRONG_NASH = "strong-nash"
    SPNE = "spne"
    NOT_EQUILIBRIUM = "not-equilibrium"


class Dominance(enum.Enum):
    STRICTLY_DOMINANT = "strictly-dominant"
    WEAKLY_DOMINANT = "weakly-dominant"
    NEITHER = "neither"


@dataclass
class Deviation:
    player: PlayerId
    label: str
    baseline: Fraction
    deviated: Fraction

    @property
    def gain(self) -> Fraction:
        return self.deviated - self.baseline


@dataclass
class SubgameEntry:
    """Per-decision-point payoff table emitted by the SPNE check."""

    dp: DecisionPoint
    player: PlayerId
    payoffs: dict[str, Fraction]
    on_path_label: str


@dataclass
class EquilibriumReport:
    verdict: Verdict
    deviations: list[Deviation] = field(default_factory=list)
    subgame_table: list[SubgameEntry] = field(default_factory=list)
    checked: int = 0

    @property
    def is_equilibrium(self) -> bool:
        return self.verdict is not Verdict.NOT_EQUILIBRIUM


def _estimate(count: int, bound: int) -> None:
    if count > bound:
        raise ExplosionGuard(f"{count} deviation simulations exceed bound {bound}")


def best_response(
    game: GameModel,
    profile: StrategyProfile,
    player: PlayerId,
    candidates: Optional[Sequence[tuple[str, dict]]] = None,
) -> set[str]:
    """Labels of the candidate assignments maximizing `player`'s payoff."""
    candidates = list(candidates if candidates is not None else game.assignments(player))
    best: Optional[Fraction] = None
    winners: set[str] = set()
    for label, assignment in candidates:
        trial = profile
        for dp, act in assignment.items():
            trial = trial.with_action(dp, act)
        value = game.payoffs(trial)[player]
        if best is None or value > best:
            best = value
            winners = {label}
        elif value == best:
            winners.add(label)
    return winners


def verify_nash(
    game: GameModel,
    profile: StrategyProfile,
    coalition_bound: int = 1,
    max_joint_actions: int = 10**6,
) -> EquilibriumReport:
    """Exhaustive unilateral (and optionally coalition) deviation search.

    Nash: no single player can strictly improve.  With coalition_bound > 1
    the verdict upgrades to strong Nash when additionally no coalition up to
    that size can strictly improve the payoff of every member at once.
    """
    players = game.players()
    base = game.payoffs(profile)
    assignments = {p: game.assignments(p) for p in players}
    count = sum(len(a) for a in assignments.values())
    _estimate(count, max_joint_actions)

    deviations: list[Deviation] = []
    checked = 0
    for player in players:
        for label, assignment in assignments[player]:
            trial = profile
            for dp, act in assignment.items():
                trial = trial.with_action(dp, act)
            checked += 1
            value = game.payoffs(trial)[player]
            if value > base[player]:
                deviations.append(Deviation(player, label, base[player], value))
    if deviations:
        return EquilibriumReport(Verdict.NOT_EQUILIBRIUM, deviations, checked=checked)
    if coalition_bound <= 1:
        return EquilibriumReport(Verdict.NASH, checked=checked)

    # coalition pass: every member must strictly gain
    for size in range(2, min(coalition_bound, len(players)) + 1):
        for coalition in itertools.combinations(players, size):
            joint = [assignments[p] for p in coalition]
            total = 1
            for a in joint:
                total *= len(a)
            _estimate(checked + total, max_joint_actions)
            for combo in itertools.product(*joint):
                trial = profile
                for (_, assignment) in combo:
                    for dp, act in assignment.items():
                        trial = trial.with_action(dp, act)
                checked += 1
                payoffs = game.payoffs(trial)
                if all(payoffs[p] > base[p] for p in coalition):
                    for p, (label, _) in zip(coalition, combo):
                        deviations.append(Deviation(p, f"coalition:{label}", base[p], payoffs[p]))
                    return EquilibriumReport(
                        Verdict.NOT_EQUILIBRIUM, deviations, checked=checked
                    )
    return EquilibriumReport(Verdict.STRONG_NASH, checked=checked)


def verify_spne(
    game: GameModel,
    profile: StrategyProfile,
    max_joint_actions: int = 10**6,
) -> EquilibriumReport:
    """Backward-induction check over the game's ordered decision points.

    For each decision point, taken from the last to the first, every
    alternative action is played against the profile-fixed remainder; the
    owner's prescribed action must be a best response in that subgame.  The
    emitted subgame table records each owner's payoff per action label.
    """
    dps = sorted(game.decision_points(), key=lambda d: (d.tick, d.actor))
    count = sum(len(game.dp_candidates(dp)) for dp in dps)
    _estimate(count, max_joint_actions)
    base = game.payoffs(profile)

    deviations: list[Deviation] = []
    table: list[SubgameEntry] = []
    checked = 0
    for dp in reversed(dps):
        owner = game.owner(dp)
        prescribed = profile.get(dp)
        payoffs: dict[str, Fraction] = {}
        on_path_label = ""
        for label, action in game.dp_candidates(dp):
            if action == prescribed:
                payoffs[label] = base[owner]
                on_path_label = label
                continue
            trial = profile.with_action(dp, action)
            checked += 1
            value = game.payoffs(trial)[owner]
            payoffs[label] = value
            if value > base[owner]:
                deviations.append(Deviation(owner, f"{dp.slot}/{dp.role.value}:{label}",
                                            base[owner], value))
        table.append(SubgameEntry(dp, owner, payoffs, on_path_label))
    table.reverse()
    verdict = Verdict.NOT_EQUILIBRIUM if deviations else Verdict.SPNE
    return EquilibriumReport(verdict, deviations, table, checked)


def dominance_check(
    game,
    player: PlayerId,
    action_label: str,
    candidate_labels: Sequence[str],
    conditions: Sequence[str] = ("succeed", "fail"),
) -> Dominance:
    """Compare an action against alternatives across a conditioning partition.

    The game must expose conditioned_payoff(player, label, condition); the
    partition stands in for full opponent enumeration, the way the payoff
    tables condition on the attack outcome.  Strictly dominant: better in
    every condition against every alternative.  Weakly dominant: never
    worse, strictly better somewhere against each alternative.
    """
    others = [c for c in candidate_labels if c != action_label]
    strict_all = True
    weak_all = True
    for alt in others:
        better_somewhere = False
        strict_everywhere = True
        for cond in conditions:
            mine = game.conditioned_payoff(player, action_label, cond)
            theirs = game.conditioned_payoff(player, alt, cond)
            if mine < theirs:
                return Dominance.NEITHER
            if mine > theirs:
                better_somewhere = True
            else:
                strict_everywhere = False
        if not strict_everywhere:
            strict_all = False
        if not better_somewhere:
            weak_all = False
    if strict_all and others:
        return Dominance.STRICTLY_DOMINANT
    if weak_all and others:
        return Dominance.WEAKLY_DOMINANT
    return Dominance.NEITHER


# ---------------------------------------------------------------------------
# DAG-votes security scenario
# ---------------------------------------------------------------------------


@dataclass
class DagScenarioResult:
    report: EquilibriumReport
    outcome: GameOutcome
    ethereum_report: Optional[EquilibriumReport] = None


def dag_security_scenario(
    config: GameConfig,
    n_slots: int = 4,
    adv_slot: int = 3,
    check_ethereum_flip: bool = False,
    max_joint_actions: int = 10**6,
) -> DagScenarioResult:
    """Verify the honest profile under DAG votes against one adversarial leader.

    The prescribed profile (vote the tip, create evidences on time, propose
    on the tip) must be an SPNE; the adversarial off-tip block must gather
    zero votes and be reorged, and no rational leader's block may be reorged
    anywhere in the run.

    With check_ethereum_flip, the same committee is re-evaluated under the
    next-slot-inclusion mechanism against a committed simple-game adversary
    (boost restored to 40% of W): facing compliant co-attestors, the honest
    vote-the-tip action strictly loses the attestation reward, so the lab
    reports NotEquilibrium with the compliant deviation.
    """
    # all W attestors are solo here; the committee must clear the strict
    # majority 1 + (W + boost)/2 so the tip always outvotes a boosted rival
    if 2 * config.committee_size <= 2 + config.committee_size + config.boost:
        raise AssumptionViolated(
            "need more than 1 + (W + boost)/2 solo attestors per slot"
        )
    game = DagVotesGame(config, n_slots=n_slots, adv_slot=adv_slot)
    profile = game.profile("prescribed")
    outcome = game.run(profile)
    if not config.adversary_on_tip:
        if outcome.extras["adversary_votes"] != 0:
            raise AssumptionViolated("off-tip adversarial block gathered votes")
        if not outcome.extras["adversary_reorged"]:
            raise AssumptionViolated("off-tip adversarial block entered the chain")
    if outcome.extras["rational_blocks_reorged"]:
        raise AssumptionViolated(
            f"rational blocks reorged: {outcome.extras['rational_blocks_reorged']}"
        )
    report = verify_spne(game, profile, max_joint_actions)

    ethereum_report = None
    if check_ethereum_flip:
        boost = max(1, round(0.4 * config.committee_size))
        eth_config = replace(
            config,
            kind=GameKind.SIMPLE,
            boost=boost,
            mechanism=Mechanism.ETHEREUM,
        )
        eth_game = SimpleGame(eth_config)
        # the commitment is credible, so the other attestors best-respond by
        # complying; the honest hold-out is the profile under test
        players = [v.index for v in eth_game.solo_players()]
        probe = players[-1]
        actions = {}
        for dp in eth_game.decision_points():
            label = "NC" if dp.actor == probe else "C"
            actions[dp] = dict(eth_game.dp_candidates(dp))[label]
        eth_profile = StrategyProfile(actions)
        ethereum_report = verify_nash(eth_game, eth_profile, max_joint_actions=max_joint_actions)
    return DagScenarioResult(report, outcome, ethereum_report)
