"""Executable commitment-attack games.

Each game couples a scripted adversary (the committed strategy it announces
to the validators) with a set of rational players whose actions come from a
StrategyProfile.  Running a profile yields a full lock-step trace; payoffs
are settled from that trace, so every payoff matrix in this module is a
summary of simulation, never an independent table of constants.

Games implemented:

* simple          - one adversarial leader reorgs the previous block by
                    threatening to exclude non-compliant votes;
* strong simple   - the same threat extended to a supporting slot in a
                    later epoch, which each attestor joins with probability
                    1/epoch_length;
* simple no-boost - a withheld-block race that works with zero proposer
                    boost when both neighbors of the victim slot are
                    adversarial;
* extended        - a chain of empty blocks reorgs p blocks, coordinated by
                    the compliant-tip procedure (compliance.py);
* selfish mining  - adversarial fork built from withheld committee votes,
                    profitable for staking pools of any size;
* DAG votes       - the mitigation scenario: with majority-evidence
                    timeliness the off-tip adversarial proposal dies and
                    honest play is an equilibrium.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Optional

from .chain import (
    Block,
    BlockId,
    EvidenceRecord,
    TieBreakPolicy,
    Validator,
    ValidatorKind,
    VoteRecord,
    detect_reorg,
)
from .compliance import ComplianceTracker, required_attack_length
from .engine import (
    Abstain,
    CompliantTip,
    DecisionPoint,
    FixedBlock,
    ParentOfTip,
    Propose,
    Role,
    RunTrace,
    Simulation,
    StrategyProfile,
    Tip,
    VoteFor,
    aggregate_tick,
    propose_tick,
    vote_tick,
)
from .rewards import Mechanism, PayoffLedger, RewardParams, settle_payoffs

__all__ = [
    "GameKind",
    "GameConfig",
    "GameOutcome",
    "PayoffMatrix",
    "GameError",
    "ConditionViolated",
    "ConditioningUnrealizable",
    "SimpleGame",
    "StrongSimpleGame",
    "NoBoostGame",
    "ExtendedGame",
    "SelfishMiningGame",
    "DagVotesGame",
    "simple_payoff_matrix",
    "strong_simple_expected_matrix",
    "pool_payoff_simple",
    "pool_payoff_selfish",
    "required_attack_length",
    "build_game",
    "run_game",
]


class GameError(Exception):
    pass


class ConditionViolated(GameError):
    """Selfish-mining run configured with fewer adversarial than rival slots."""


class ConditioningUnrealizable(GameError):
    """The requested matrix cell cannot occur under the given parameters."""


class GameKind(enum.Enum):
    SIMPLE = "simple"
    STRONG_SIMPLE = "strong-simple"
    SIMPLE_NO_BOOST = "simple-no-boost"
    EXTENDED = "extended"
    SELFISH_MINING = "selfish-mining"
    DAG_VOTES = "dag-votes"


@dataclass(frozen=True)
class PoolSpec:
    """A staking pool controlling `members_per_slot` attestors in each slot."""

    members_per_slot: int
    name: str = "P"


@dataclass(frozen=True)
class GameConfig:
    kind: GameKind
    committee_size: int  # W
    boost: int  # W_p
    horizon: int = 1  # p for the extended game, p+1 slots for selfish mining
    r: Fraction = Fraction(1)
    R: Fraction = Fraction(1)
    epoch_length: int = 32
    honest_per_slot: int = 0
    n_adversarial_slots: int = 0  # selfish mining
    n_non_adversarial_slots: int = 0
    pool: Optional[PoolSpec] = None
    credibility_assumed: bool = True
    tie_break: TieBreakPolicy = TieBreakPolicy.ADVERSARY_FAVORING
    mechanism: Mechanism = Mechanism.ETHEREUM
    adversary_on_tip: bool = False  # dag-votes variant
    allow_condition_violation: bool = False

    def reward_params(self) -> RewardParams:
        return RewardParams(
            r=self.r,
            R=self.R,
            mechanism=self.mechanism,
            committee_size=self.committee_size,
        )


@dataclass
class GameOutcome:
    success: bool
    final_chain: list[BlockId]
    reorged: list[BlockId]
    ledger: PayoffLedger
    trace: RunTrace
    extras: dict = field(default_factory=dict)


@dataclass
class PayoffMatrix:
    rows: tuple[str, ...]
    cols: tuple[str, ...]
    values: dict[tuple[str, str], Fraction]

    def cell(self, row: str, col: str) -> Fraction:
        return self.values[(row, col)]

    def as_table(self) -> list[list[str]]:
        head = [""] + list(self.cols)
        out = [head]
        for row in self.rows:
            out.append([row] + [str(self.values[(row, c)]) for c in self.cols])
        return out


PlayerId = object  # int for solo validators, str for pools


class GameModel:
    """Interface consumed by the equilibrium lab."""

    config: GameConfig

    def players(self) -> list[PlayerId]:
        raise NotImplementedError

    def decision_points(self) -> list[DecisionPoint]:
        raise NotImplementedError

    def owner(self, dp: DecisionPoint) -> PlayerId:
        raise NotImplementedError

    def dp_candidates(self, dp: DecisionPoint) -> list[tuple[str, object]]:
        raise NotImplementedError

    def assignments(self, player: PlayerId) -> list[tuple[str, dict[DecisionPoint, object]]]:
        """Joint candidate assignments over all decision points of `player`."""
        dps = [dp for dp in self.decision_points() if self.owner(dp) == player]
        if len(dps) == 1:
            return [(label, {dps[0]: act}) for label, act in self.dp_candidates(dps[0])]
        raise NotImplementedError

    def profile(self, name: str) -> StrategyProfile:
        raise NotImplementedError

    def run(self, profile: StrategyProfile) -> GameOutcome:
        raise NotImplementedError

    def payoffs(self, profile: StrategyProfile) -> dict[PlayerId, Fraction]:
        raise NotImplementedError


def _committee(start: int, size: int, kind=ValidatorKind.RATIONAL, pool=None, pool_size=0):
    members = []
    for i in range(size):
        members.append(Validator(start + i, kind, pool if i < pool_size else None))
    return members


def _settle_onto_trace(trace: RunTrace, params: RewardParams) -> PayoffLedger:
    """Settle the trace and record the per-validator ledger on it."""
    ledger = settle_payoffs(trace, params)
    trace.payoffs = {v: str(amount) for v, amount in sorted(ledger.payoffs.items())}
    return ledger


# ---------------------------------------------------------------------------
# simple game
# ---------------------------------------------------------------------------


class SimpleGame(GameModel):
    """Slot t+1 is adversarial; slot t attestors choose whose block to back.

    Slots are normalized so that B_{t-1} is the genesis block at slot 0, the
    victim block B_t is proposed at slot 1, and the adversary proposes B_A
    at slot 2.  The previous committee's votes for B_{t-1} are pre-scripted,
    which is what a staking pool stands to lose when B_t is reorged.
    """

    SLOT_PREV, SLOT_T, SLOT_ADV = 0, 1, 2

    def __init__(self, config: GameConfig):
        self.config = config
        W = config.committee_size
        pool_size = config.pool.members_per_slot if config.pool else 0
        pool_name = config.pool.name if config.pool else None
        if pool_size >= W:
            raise GameError("pool cannot fill the whole committee")
        self.prev_committee = _committee(0, W, pool=pool_name, pool_size=pool_size)
        self.committee = _committee(W, W, pool=pool_name, pool_size=pool_size)
        self.leader_t = Validator(2 * W, ValidatorKind.RATIONAL)
        self.adversary = Validator(2 * W + 1, ValidatorKind.ADVERSARIAL)
        self.genesis_proposer = Validator(2 * W + 2, ValidatorKind.RATIONAL)
        self.genesis_id: BlockId = 0

    # -- players and actions ------------------------------------------------

    def solo_players(self) -> list[Validator]:
        return [v for v in self.committee if v.pool is None]

    def players(self) -> list[PlayerId]:
        ids: list[PlayerId] = [v.index for v in self.solo_players()]
        if self.config.pool:
            ids.append(self.config.pool.name)
        return ids

    def decision_points(self) -> list[DecisionPoint]:
        return [DecisionPoint(self.SLOT_T, Role.ATTESTOR, v.index) for v in self.committee]

    def owner(self, dp: DecisionPoint) -> PlayerId:
        v = next(v for v in self.committee if v.index == dp.actor)
        return v.pool if v.pool else v.index

    def dp_candidates(self, dp: DecisionPoint) -> list[tuple[str, object]]:
        return [
            ("C", VoteFor(FixedBlock(self.genesis_id))),
            ("NC", VoteFor(Tip())),
            ("abstain", Abstain()),
        ]

    def assignments(self, player: PlayerId):
        if self.config.pool and player == self.config.pool.name:
            dps = [
                DecisionPoint(self.SLOT_T, Role.ATTESTOR, v.index)
                for v in self.committee
                if v.pool == player
            ]
            return [
                ("C", {dp: VoteFor(FixedBlock(self.genesis_id)) for dp in dps}),
                ("NC", {dp: VoteFor(Tip()) for dp in dps}),
            ]
        return super().assignments(player)

    def profile(self, name: str) -> StrategyProfile:
        """Named profiles: compliant-all, vote-bt-all, or per-cell variants."""
        actions: dict[DecisionPoint, object] = {}
        for dp in self.decision_points():
            if name == "compliant-all":
                actions[dp] = VoteFor(FixedBlock(self.genesis_id))
            elif name == "vote-bt-all":
                actions[dp] = VoteFor(Tip())
            elif name == "abstain-all":
                actions[dp] = Abstain()
            else:
                raise GameError(f"unknown profile {name!r}")
        return StrategyProfile(actions)

    # -- simulation -----------------------------------------------------------

    def run(self, profile: StrategyProfile) -> GameOutcome:
        cfg = self.config
        sim = Simulation(None, cfg.boost, cfg.tie_break)
        genesis = Block(
            sim.tree.new_id(), self.SLOT_PREV, None, self.genesis_proposer, is_empty=True
        )
        sim.tree.insert_block(genesis)
        prev_votes = []
        for v in self.prev_committee:
            vote = VoteRecord(self.SLOT_PREV, v.index, genesis.id, broadcast_time=1)
            sim.tree.add_vote(vote)
            prev_votes.append(vote)
        state: dict = {}

        def on_tick(tick: int) -> None:
            if tick == propose_tick(self.SLOT_T):
                b_t = Block(
                    sim.tree.new_id(),
                    self.SLOT_T,
                    genesis.id,
                    self.leader_t,
                    included_votes=tuple(prev_votes),
                )
                sim.emit_block(b_t, tick)
                state["b_t"] = b_t
            elif tick == vote_tick(self.SLOT_T):
                for v in self.committee:
                    dp = DecisionPoint(self.SLOT_T, Role.ATTESTOR, v.index)
                    act = profile.get(dp)
                    if act is None or isinstance(act, Abstain):
                        continue
                    target = sim.resolve(act.target)
                    release = act.release_tick if act.release_tick is not None else tick
                    sim.emit_vote(
                        VoteRecord(self.SLOT_T, v.index, target), tick, release
                    )
            elif tick == propose_tick(self.SLOT_ADV):
                b_t = state["b_t"]
                state["chain_before"] = sim.tree.canonical_chain(
                    self.SLOT_ADV, None, cfg.boost, cfg.tie_break
                )
                votes_for_bt = sim.visible_votes_for(b_t.id, slot=self.SLOT_T)
                reorg = votes_for_bt < cfg.boost
                parent = genesis.id if reorg else b_t.id
                if cfg.credibility_assumed:
                    included = [
                        v
                        for v in sim.tree.votes
                        if v.slot == self.SLOT_T and v.target == genesis.id
                    ]
                else:
                    included = [v for v in sim.tree.votes if v.slot == self.SLOT_T]
                b_a = Block(
                    sim.tree.new_id(),
                    self.SLOT_ADV,
                    parent,
                    self.adversary,
                    included_votes=tuple(included),
                )
                sim.emit_block(b_a, tick)
                state["b_a"] = b_a

        sim.run_ticks(0, propose_tick(self.SLOT_ADV), on_tick)
        trace = sim.finalize(self.SLOT_ADV)
        ledger = _settle_onto_trace(trace, cfg.reward_params())
        b_a = state["b_a"]
        success = trace.final_chain == [genesis.id, b_a.id]
        reorged = detect_reorg(state["chain_before"], trace.final_chain)
        trace.labels = {"B_prev": genesis.id, "B_t": state["b_t"].id, "B_A": b_a.id}
        return GameOutcome(success, trace.final_chain, reorged, ledger, trace)

    def payoffs(self, profile: StrategyProfile) -> dict[PlayerId, Fraction]:
        outcome = self.run(profile)
        return self._payoffs_from(outcome)

    def _payoffs_from(self, outcome: GameOutcome) -> dict[PlayerId, Fraction]:
        out: dict[PlayerId, Fraction] = {}
        for v in self.solo_players():
            out[v.index] = outcome.ledger.get(v.index)
        if self.config.pool:
            name = self.config.pool.name
            total = Fraction(0)
            for v in self.prev_committee + self.committee:
                if v.pool == name:
                    total += outcome.ledger.get(v.index)
            out[name] = total
        return out

    # -- conditioning ---------------------------------------------------------

    def conditioned_run(
        self, probe_actions: dict[int, object], condition: str
    ) -> GameOutcome:
        """Run with non-probe attestors scripted to realize `condition`.

        succeed: every scripted attestor complies; fail: `boost` of them
        vote for B_t so the threshold is met regardless of the probes.
        """
        cfg = self.config
        scripted = [v for v in self.committee if v.index not in probe_actions]
        actions: dict[DecisionPoint, object] = {}
        if condition == "succeed":
            for v in scripted:
                actions[DecisionPoint(self.SLOT_T, Role.ATTESTOR, v.index)] = VoteFor(
                    FixedBlock(self.genesis_id)
                )
        elif condition == "fail":
            if len(scripted) < cfg.boost:
                raise ConditioningUnrealizable(
                    f"cannot script {cfg.boost} votes for B_t with "
                    f"{len(scripted)} free attestors"
                )
            for n, v in enumerate(scripted):
                dp = DecisionPoint(self.SLOT_T, Role.ATTESTOR, v.index)
                actions[dp] = (
                    VoteFor(Tip()) if n < cfg.boost else VoteFor(FixedBlock(self.genesis_id))
                )
        else:
            raise GameError(f"unknown condition {condition!r}")
        for idx, act in probe_actions.items():
            actions[DecisionPoint(self.SLOT_T, Role.ATTESTOR, idx)] = act
        outcome = self.run(StrategyProfile(actions))
        expected = condition == "succeed"
        if outcome.success != expected:
            raise ConditioningUnrealizable(
                f"condition {condition!r} not realizable: run "
                f"{'succeeded' if outcome.success else 'failed'}"
            )
        return outcome

    def conditioned_payoff(self, player: PlayerId, label: str, condition: str) -> Fraction:
        action = self._action_for(player, label)
        if self.config.pool and player == self.config.pool.name:
            probes = {
                v.index: action for v in self.committee if v.pool == player
            }
        else:
            probes = {player: action}
        outcome = self.conditioned_run(probes, condition)
        return self._payoffs_from(outcome)[player]

    def _action_for(self, player: PlayerId, label: str) -> object:
        if label == "C":
            return VoteFor(FixedBlock(self.genesis_id))
        if label == "NC":
            return VoteFor(Tip())
        if label == "abstain":
            return Abstain()
        raise GameError(f"unknown action label {label!r}")


def simple_payoff_matrix(config: GameConfig) -> PayoffMatrix:
    """Table of a solo slot-t attestor's payoff by attack outcome and action.

    Every cell comes from a conditioned simulation of the full game.
    """
    game = SimpleGame(config)
    probe = game.solo_players()[-1].index
    values = {}
    for row in ("succeed", "fail"):
        for col in ("C", "NC"):
            values[(row, col)] = game.conditioned_payoff(probe, col, row)
    return PayoffMatrix(("succeed", "fail"), ("C", "NC"), values)


def pool_payoff_simple(
    config: GameConfig, pool_action: str, others_condition: str
) -> tuple[Fraction, Fraction]:
    """Pool payoff under the simple game, split into (slot t-1, slot t) parts.

    The pool's earlier committee loses its already-cast rewards when the
    victim block is reorged; the later committee earns only inside the
    adversary's block.
    """
    if not config.pool:
        raise GameError("config carries no pool")
    if config.pool.members_per_slot >= config.boost:
        raise GameError("pool payoff table assumes fewer pool members than the boost")
    game = SimpleGame(config)
    action = game._action_for(config.pool.name, pool_action)
    probes = {v.index: action for v in game.committee if v.pool == config.pool.name}
    condition = {"succeed": "succeed", "fail": "fail"}[others_condition]
    outcome = game.conditioned_run(probes, condition)
    part_prev = Fraction(0)
    part_t = Fraction(0)
    for v in game.prev_committee:
        if v.pool == config.pool.name:
            part_prev += outcome.ledger.slot_part(v.index, game.SLOT_PREV)
    for v in game.committee:
        if v.pool == config.pool.name:
            part_t += outcome.ledger.slot_part(v.index, game.SLOT_T)
    return (part_prev, part_t)


# ---------------------------------------------------------------------------
# strong simple game
# ---------------------------------------------------------------------------


class StrongSimpleGame(SimpleGame):
    """Simple game plus a supporting adversarial slot t'+1 two epochs out.

    A slot-t attestor sits on the unknown slot-t' committee with probability
    1/epoch_length; the adversary excludes the t' votes of anyone who was
    non-compliant at slot t.  Payoffs are expected values, computed exactly
    with the closed-form membership probability; sampled schedules are used
    only as a cross-check in the tests.
    """

    def _bonus(self, outcome: GameOutcome) -> dict[int, Fraction]:
        cfg = self.config
        per_member = cfg.r / cfg.epoch_length
        bonuses = {}
        compliant = {
            v.voter
            for v in outcome.trace.tree.votes
            if v.slot == self.SLOT_T and v.target == self.genesis_id
        }
        for v in self.committee:
            bonuses[v.index] = per_member if v.index in compliant else Fraction(0)
        return bonuses

    def _payoffs_from(self, outcome: GameOutcome) -> dict[PlayerId, Fraction]:
        base = super()._payoffs_from(outcome)
        bonus = self._bonus(outcome)
        out: dict[PlayerId, Fraction] = {}
        for player, value in base.items():
            if isinstance(player, int):
                out[player] = value + bonus.get(player, Fraction(0))
            else:
                pool_bonus = sum(
                    (bonus[v.index] for v in self.committee if v.pool == player),
                    Fraction(0),
                )
                out[player] = value + pool_bonus
        return out


def strong_simple_expected_matrix(config: GameConfig) -> PayoffMatrix:
    game = StrongSimpleGame(config)
    probe = game.solo_players()[-1].index
    values = {}
    for row in ("succeed", "fail"):
        for col in ("C", "NC"):
            values[(row, col)] = game.conditioned_payoff(probe, col, row)
    return PayoffMatrix(("succeed", "fail"), ("C", "NC"), values)


# ---------------------------------------------------------------------------
# simple attack without proposer boost
# ---------------------------------------------------------------------------


class NoBoostGame(GameModel):
    """Withheld-block variant that needs no boost but two adversarial slots.

    Genesis B_0 sits at slot 0.  The adversary, leading slots 1 and 3,
    withholds its slot-1 block until the honest slot-2 proposal appears,
    releasing both to the slot-2 attestors at once; whichever side gathers
    more of their votes is extended by the adversary's slot-3 block.
    """

    SLOT_GENESIS, SLOT_WITHHELD, SLOT_T, SLOT_NEXT = 0, 1, 2, 3

    def __init__(self, config: GameConfig):
        if config.boost != 0:
            raise GameError("the no-boost game requires boost = 0")
        self.config = config
        W = config.committee_size
        self.prev_committee = _committee(0, W)
        self.committee = _committee(W, W)
        self.leader_t = Validator(2 * W, ValidatorKind.RATIONAL)
        self.adversary = Validator(2 * W + 1, ValidatorKind.ADVERSARIAL)
        self.genesis_proposer = Validator(2 * W + 2, ValidatorKind.RATIONAL)
        self.genesis_id: BlockId = 0
        self.b_adv_id: BlockId = 1
        self.b_t_id: BlockId = 2

    def players(self) -> list[PlayerId]:
        return [v.index for v in self.committee]

    def decision_points(self) -> list[DecisionPoint]:
        return [DecisionPoint(self.SLOT_T, Role.ATTESTOR, v.index) for v in self.committee]

    def owner(self, dp: DecisionPoint) -> PlayerId:
        return dp.actor

    def dp_candidates(self, dp: DecisionPoint) -> list[tuple[str, object]]:
        return [
            ("C", VoteFor(FixedBlock(self.b_adv_id))),
            ("NC", VoteFor(FixedBlock(self.b_t_id))),
            ("abstain", Abstain()),
        ]

    def profile(self, name: str) -> StrategyProfile:
        actions = {}
        for dp in self.decision_points():
            if name == "compliant-all":
                actions[dp] = VoteFor(FixedBlock(self.b_adv_id))
            elif name == "vote-bt-all":
                actions[dp] = VoteFor(FixedBlock(self.b_t_id))
            else:
                raise GameError(f"unknown profile {name!r}")
        return StrategyProfile(actions)

    def run(self, profile: StrategyProfile) -> GameOutcome:
        cfg = self.config
        sim = Simulation(None, 0, cfg.tie_break)
        genesis = Block(sim.tree.new_id(), self.SLOT_GENESIS, None, self.genesis_proposer, True)
        sim.tree.insert_block(genesis)
        for v in self.prev_committee:
            sim.tree.add_vote(VoteRecord(self.SLOT_GENESIS, v.index, genesis.id, 1))
        state: dict = {}

        def on_tick(tick: int) -> None:
            if tick == propose_tick(self.SLOT_WITHHELD):
                b_adv = Block(
                    sim.tree.new_id(), self.SLOT_WITHHELD, genesis.id, self.adversary
                )
                # dual release together with the honest slot-2 proposal
                sim.emit_block(b_adv, tick, release=propose_tick(self.SLOT_T))
                state["b_adv"] = b_adv
            elif tick == propose_tick(self.SLOT_T):
                b_t = Block(sim.tree.new_id(), self.SLOT_T, sim.tip(), self.leader_t)
                sim.emit_block(b_t, tick)
                state["b_t"] = b_t
            elif tick == vote_tick(self.SLOT_T):
                for v in self.committee:
                    act = profile.get(DecisionPoint(self.SLOT_T, Role.ATTESTOR, v.index))
                    if act is None or isinstance(act, Abstain):
                        continue
                    target = sim.resolve(act.target)
                    release = act.release_tick if act.release_tick is not None else tick
                    sim.emit_vote(VoteRecord(self.SLOT_T, v.index, target), tick, release)
            elif tick == propose_tick(self.SLOT_NEXT):
                b_adv, b_t = state["b_adv"], state["b_t"]
                state["chain_before"] = sim.tree.canonical_chain(
                    self.SLOT_NEXT, None, 0, cfg.tie_break
                )
                k_adv = sim.visible_votes_for(b_adv.id, slot=self.SLOT_T)
                k_t = sim.visible_votes_for(b_t.id, slot=self.SLOT_T)
                takes_fork = k_adv > k_t or (
                    k_adv == k_t and cfg.tie_break is TieBreakPolicy.ADVERSARY_FAVORING
                )
                parent = b_adv.id if takes_fork else b_t.id
                included = tuple(
                    v
                    for v in sim.tree.votes
                    if v.slot == self.SLOT_T and v.target == b_adv.id
                )
                b_next = Block(
                    sim.tree.new_id(), self.SLOT_NEXT, parent, self.adversary,
                    included_votes=included,
                )
                sim.emit_block(b_next, tick)
                state["b_next"] = b_next

        sim.run_ticks(0, propose_tick(self.SLOT_NEXT), on_tick)
        trace = sim.finalize(self.SLOT_NEXT)
        ledger = _settle_onto_trace(trace, cfg.reward_params())
        success = trace.final_chain == [genesis.id, state["b_adv"].id, state["b_next"].id]
        reorged = detect_reorg(state["chain_before"], trace.final_chain)
        trace.labels = {
            "B_0": genesis.id,
            "B_adv": state["b_adv"].id,
            "B_t": state["b_t"].id,
            "B_next": state["b_next"].id,
        }
        return GameOutcome(success, trace.final_chain, reorged, ledger, trace)

    def payoffs(self, profile: StrategyProfile) -> dict[PlayerId, Fraction]:
        outcome = self.run(profile)
        return {v.index: outcome.ledger.get(v.index) for v in self.committee}


# ---------------------------------------------------------------------------
# extended game
# ---------------------------------------------------------------------------


class ExtendedGame(GameModel):
    """Reorg of p blocks by a chain of empty blocks from B_{-p}.

    Slots run -p..p+1; the original chain B_{-p}..B_0 (W votes per block) is
    seeded before the game.  Leaders and attestors of slots 1..p are the
    players; the adversary leads slot p+1 and commits to including only the
    compliant slot-p votes.

    Attestor payoffs come from the settled trace.  A leader's payoff is the
    block-level proposing reward R earned exactly when its block lies in the
    prefix of the adversary's block B_A: the subgame analysis presumes the
    attack carries in every branch (full-weight original chains would
    otherwise let a lone defecting leader strand the fork, a slack the
    analysis waves off since reorged blocks rarely hold maximal votes).  The
    per-included-vote accounting of the reward engine stays available on the
    outcome ledger.
    """

    def __init__(self, config: GameConfig):
        self.config = config
        W = config.committee_size
        p = config.horizon
        if config.honest_per_slot >= W:
            raise GameError("honest attestors cannot fill the whole committee")
        self.p = p
        next_id = 0

        def take(n: int, kind=ValidatorKind.RATIONAL) -> list[Validator]:
            nonlocal next_id
            out = [Validator(next_id + i, kind) for i in range(n)]
            next_id += n
            return out

        # committees for slots -p..0 are pre-game voters
        self.pre_committees = {slot: take(W) for slot in range(-p, 1)}
        self.committees: dict[int, list[Validator]] = {}
        for slot in range(1, p + 1):
            honest = [
                Validator(next_id + i, ValidatorKind.HONEST)
                for i in range(config.honest_per_slot)
            ]
            next_id += config.honest_per_slot
            rest = take(W - config.honest_per_slot)
            self.committees[slot] = honest + rest
        self.leaders = {slot: take(1)[0] for slot in range(1, p + 1)}
        self.pre_leaders = {slot: take(1)[0] for slot in range(-p, 1)}
        self.adversary = Validator(next_id, ValidatorKind.ADVERSARIAL)

    def players(self) -> list[PlayerId]:
        out: list[PlayerId] = []
        for slot in range(1, self.p + 1):
            out.append(self.leaders[slot].index)
            out.extend(
                v.index
                for v in self.committees[slot]
                if v.kind is ValidatorKind.RATIONAL
            )
        return out

    def decision_points(self) -> list[DecisionPoint]:
        dps = []
        for slot in range(1, self.p + 1):
            dps.append(DecisionPoint(slot, Role.LEADER, self.leaders[slot].index))
            for v in self.committees[slot]:
                if v.kind is ValidatorKind.RATIONAL:
                    dps.append(DecisionPoint(slot, Role.ATTESTOR, v.index))
        return dps

    def owner(self, dp: DecisionPoint) -> PlayerId:
        return dp.actor

    def dp_candidates(self, dp: DecisionPoint) -> list[tuple[str, object]]:
        if dp.role is Role.LEADER:
            return [
                ("C", Propose(CompliantTip(), empty=True, include="compliant-prev")),
                ("NC", Propose(Tip(), empty=False, include="all-prev")),
            ]
        return [
            ("C", VoteFor(CompliantTip())),
            ("NC", VoteFor(Tip())),
            ("abstain", Abstain()),
        ]

    def profile(self, name: str) -> StrategyProfile:
        actions: dict[DecisionPoint, object] = {}
        for dp in self.decision_points():
            if name == "compliant-all":
                label = "C"
            elif name == "extend-original-all":
                label = "NC"
            else:
                raise GameError(f"unknown profile {name!r}")
            actions[dp] = dict(self.dp_candidates(dp))[label]
        return StrategyProfile(actions)

    def run(self, profile: StrategyProfile) -> GameOutcome:
        cfg = self.config
        W, p = cfg.committee_size, self.p
        sim = Simulation(None, cfg.boost, cfg.tie_break)
        tracker = ComplianceTracker(p, W, cfg.boost, cfg.tie_break)

        # original chain B_{-p}..B_0, W votes per block
        originals: list[Block] = []
        parent: Optional[BlockId] = None
        for slot in range(-p, 1):
            block = Block(
                sim.tree.new_id(), slot, parent, self.pre_leaders[slot],
                is_empty=(slot == -p),
            )
            sim.tree.insert_block(block)
            originals.append(block)
            parent = block.id
            for v in self.pre_committees[slot]:
                sim.tree.add_vote(VoteRecord(slot, v.index, block.id, 3 * slot + 1))
        genesis = originals[0]
        tracker.seed(genesis.id, [b.id for b in originals[1:]])

        seen_blocks = {b.id for b in originals}
        seen_votes = len(sim.tree.votes)
        state: dict = {"b_a": None}

        def classify_new() -> None:
            nonlocal seen_votes
            for bid in list(sim.tree.blocks):
                if bid in seen_blocks:
                    continue
                seen_blocks.add(bid)
                block = sim.tree.blocks[bid]
                if 1 <= block.slot <= p:
                    tracker.classify_block(block)
            for vote in sim.tree.votes[seen_votes:]:
                if 1 <= vote.slot <= p:
                    tracker.classify_vote(vote)
            seen_votes = len(sim.tree.votes)

        def inclusion(policy: str, slot: int, block_parent: BlockId) -> tuple[VoteRecord, ...]:
            prev = [v for v in sim.tree.votes if v.slot == slot - 1]
            if policy == "compliant-prev":
                return tuple(
                    v
                    for v in prev
                    if v.target == block_parent and tracker.is_vote_compliant(v)
                )
            if policy == "all-prev":
                return tuple(prev)
            raise GameError(f"unknown inclusion policy {policy!r}")

        def on_tick(tick: int) -> None:
            classify_new()
            slot, phase = divmod(tick, 3)
            if phase == 0 and 1 <= slot <= p:
                ct = tracker.tip_at_leader_time(sim.tree, slot)
                act = profile.get(DecisionPoint(slot, Role.LEADER, self.leaders[slot].index))
                if act is None:
                    return
                parent = sim.resolve(act.parent, ct)
                block = Block(
                    sim.tree.new_id(), slot, parent, self.leaders[slot],
                    is_empty=act.empty,
                    included_votes=inclusion(act.include, slot, parent),
                )
                sim.emit_block(block, tick)
            elif phase == 1 and 1 <= slot <= p:
                ct = tracker.tip_at_vote_time(sim.tree, slot)
                for v in self.committees[slot]:
                    if v.kind is ValidatorKind.HONEST:
                        act: object = VoteFor(Tip())
                    else:
                        act = profile.get(DecisionPoint(slot, Role.ATTESTOR, v.index))
                    if act is None or isinstance(act, Abstain):
                        continue
                    target = sim.resolve(act.target, ct)
                    release = act.release_tick if act.release_tick is not None else tick
                    sim.emit_vote(VoteRecord(slot, v.index, target), tick, release)
            elif tick == propose_tick(p + 1):
                state["chain_before"] = sim.tree.canonical_chain(
                    p + 1, None, cfg.boost, cfg.tie_break
                )
                ct = tracker.tip_at_leader_time(sim.tree, p + 1)
                included = tuple(
                    v
                    for v in sim.tree.votes
                    if v.slot == p and tracker.is_vote_compliant(v)
                )
                b_a = Block(
                    sim.tree.new_id(), p + 1, ct, self.adversary, included_votes=included
                )
                sim.emit_block(b_a, tick)
                state["b_a"] = b_a

        sim.run_ticks(propose_tick(1), propose_tick(p + 1), on_tick)
        trace = sim.finalize(p + 1)
        ledger = _settle_onto_trace(trace, cfg.reward_params())
        compliant_chain = [genesis.id]
        for slot in range(1, p + 1):
            bid = tracker.compliant_block_of_slot(sim.tree, slot)
            if bid is not None:
                compliant_chain.append(bid)
        expected = compliant_chain + [state["b_a"].id]
        success = len(compliant_chain) == p + 1 and trace.final_chain == expected
        reorged = detect_reorg(state["chain_before"], trace.final_chain)
        trace.labels = {"B_-p": genesis.id, "B_A": state["b_a"].id}
        return GameOutcome(
            success,
            trace.final_chain,
            reorged,
            ledger,
            trace,
            extras={"tracker": tracker, "compliant_chain": compliant_chain},
        )

    def payoffs(self, profile: StrategyProfile) -> dict[PlayerId, Fraction]:
        outcome = self.run(profile)
        out: dict[PlayerId, Fraction] = {}
        tree = outcome.trace.tree
        adv_prefix = set(tree.ancestors(outcome.trace.labels["B_A"]))
        for slot in range(1, self.p + 1):
            leader = self.leaders[slot]
            on_fork = any(
                b.id in adv_prefix
                for b in tree.blocks.values()
                if b.proposer.index == leader.index and b.slot == slot
            )
            out[leader.index] = self.config.R if on_fork else Fraction(0)
            for v in self.committees[slot]:
                if v.kind is ValidatorKind.RATIONAL:
                    out[v.index] = outcome.ledger.get(v.index)
        return out


# ---------------------------------------------------------------------------
# selfish-mining-inspired game
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FollowRule:
    """Withhold, then vote for the adversary's staged fork block."""


class SelfishMiningGame(GameModel):
    """Withheld adversarial fork over slots 1..horizon, slot `horizon` adversarial.

    Committees of the slots directly preceding adversarial slots are the
    players: the game rule asks them to withhold and later vote for the
    previous adversarial block.  The whole fork surfaces right before the
    final slot's voting time, too late for non-adversarial leaders to build
    on it.

    Reported fork weights follow the committee-pledge accounting of the
    analysis (adversarial = compliant pledged votes + boost, rival = one
    committee of W per remaining slot of the window), which over-counts both
    true subtree weights by the same margin; the simulated fork choice
    decides the actual outcome.
    """

    def __init__(self, config: GameConfig):
        n_a, n_na = config.n_adversarial_slots, config.n_non_adversarial_slots
        if n_a < n_na and not config.allow_condition_violation:
            raise ConditionViolated(
                f"{n_a} adversarial < {n_na} non-adversarial slots"
            )
        if n_na < 1:
            raise GameError("need at least one non-adversarial slot in the window")
        self.config = config
        W = config.committee_size
        self.horizon = n_a + n_na  # slots 1..horizon, horizon adversarial
        if n_a == 0:
            self.adv_slots: list[int] = []
        else:
            self.adv_slots = sorted({self.horizon} | set(range(2, n_a + 1)))
        if len(self.adv_slots) != n_a:
            raise GameError("cannot place adversarial slots with this split")
        self.player_slots = [s - 1 for s in self.adv_slots]  # all >= 1
        pool_size = config.pool.members_per_slot if config.pool else 0
        pool_name = config.pool.name if config.pool else None
        next_id = 0
        self.committees = {}
        for slot in range(0, self.horizon):
            self.committees[slot] = _committee(
                next_id, W, pool=pool_name, pool_size=pool_size
            )
            next_id += W
        self.leaders = {}
        for slot in range(1, self.horizon + 1):
            if slot in self.adv_slots:
                continue
            self.leaders[slot] = Validator(next_id, ValidatorKind.RATIONAL)
            next_id += 1
        self.adversary = Validator(next_id, ValidatorKind.ADVERSARIAL)
        self.genesis_proposer = Validator(next_id + 1, ValidatorKind.RATIONAL)

    def players(self) -> list[PlayerId]:
        out: list[PlayerId] = []
        for slot in self.player_slots:
            out.extend(v.index for v in self.committees[slot] if v.pool is None)
        if self.config.pool:
            out.append(self.config.pool.name)
        return out

    def decision_points(self) -> list[DecisionPoint]:
        return [
            DecisionPoint(slot, Role.ATTESTOR, v.index)
            for slot in self.player_slots
            for v in self.committees[slot]
        ]

    def owner(self, dp: DecisionPoint) -> PlayerId:
        slot = dp.slot
        v = next(v for v in self.committees[slot] if v.index == dp.actor)
        return v.pool if v.pool else v.index

    def dp_candidates(self, dp: DecisionPoint) -> list[tuple[str, object]]:
        return [("C", FollowRule()), ("NC", VoteFor(Tip())), ("abstain", Abstain())]

    def assignments(self, player: PlayerId):
        if self.config.pool and player == self.config.pool.name:
            dps = [
                DecisionPoint(slot, Role.ATTESTOR, v.index)
                for slot in self.player_slots
                for v in self.committees[slot]
                if v.pool == player
            ]
            return [
                ("C", {dp: FollowRule() for dp in dps}),
                ("NC", {dp: VoteFor(Tip()) for dp in dps}),
            ]
        return super().assignments(player)

    def profile(self, name: str) -> StrategyProfile:
        actions = {}
        for dp in self.decision_points():
            if name == "compliant-all":
                actions[dp] = FollowRule()
            elif name == "honest-all":
                actions[dp] = VoteFor(Tip())
            else:
                raise GameError(f"unknown profile {name!r}")
        return StrategyProfile(actions)

    def run(self, profile: StrategyProfile) -> GameOutcome:
        cfg = self.config
        W = cfg.committee_size
        sim = Simulation(None, cfg.boost, cfg.tie_break)
        genesis = Block(sim.tree.new_id(), 0, None, self.genesis_proposer, True)
        sim.tree.insert_block(genesis)
        for v in self.committees[0]:
            sim.tree.add_vote(VoteRecord(0, v.index, genesis.id, 1))
        publish = propose_tick(self.horizon)  # fork surfaces before 3(p+1)+1
        # private exchange runs over slot p, after the last recruited
        # committee's nominal voting tick
        stage = vote_tick(self.horizon - 1)
        deferred: dict[int, list[Validator]] = {s: [] for s in self.player_slots}
        state: dict = {}

        def on_tick(tick: int) -> None:
            slot, phase = divmod(tick, 3)
            if phase == 0 and 1 <= slot <= self.horizon and slot not in self.adv_slots:
                tip = sim.tip()
                included = tuple(v for v in sim.tree.votes if v.slot == slot - 1)
                block = Block(
                    sim.tree.new_id(), slot, tip, self.leaders[slot],
                    included_votes=included,
                )
                sim.emit_block(block, tick)
            elif phase == 1 and 1 <= slot < self.horizon:
                is_player_slot = slot in self.player_slots
                for v in self.committees[slot]:
                    if is_player_slot:
                        act = profile.get(DecisionPoint(slot, Role.ATTESTOR, v.index))
                        if act is None:
                            continue
                        if isinstance(act, FollowRule):
                            deferred[slot].append(v)
                            continue
                        if isinstance(act, Abstain):
                            continue
                        target = sim.resolve(act.target)
                    else:
                        target = sim.tip()
                    sim.emit_vote(VoteRecord(slot, v.index, target), tick, tick)
            if tick == stage:
                self._stage_fork(sim, genesis, deferred, publish, state)

        sim.run_ticks(0, propose_tick(self.horizon), on_tick)
        state["chain_before"] = sim.tree.canonical_chain(
            self.horizon, None, cfg.boost, cfg.tie_break
        )
        trace = sim.finalize(self.horizon)
        ledger = _settle_onto_trace(trace, cfg.reward_params())
        fork_ids = state["fork_ids"]
        success = trace.final_chain == [genesis.id] + fork_ids
        reorged = detect_reorg(state["chain_before"], trace.final_chain)
        compliant_votes = state["compliant_votes"]
        trace.labels = {"B_0": genesis.id}
        extras = {
            "fork_weight_adversarial": compliant_votes + cfg.boost,
            "fork_weight_non_adversarial": self.horizon * W - compliant_votes,
            "compliant_votes": compliant_votes,
        }
        return GameOutcome(success, trace.final_chain, reorged, ledger, trace, extras)

    def _stage_fork(self, sim, genesis, deferred, publish, state) -> None:
        """Slot-p exchange: show each staged block, collect votes, pack the next."""
        stage = sim.tick
        fork_ids: list[BlockId] = []
        parent = genesis.id
        compliant_votes = 0
        for s_i in self.adv_slots:
            votes = []
            for v in deferred[s_i - 1]:
                vote = VoteRecord(s_i - 1, v.index, parent, broadcast_time=publish)
                sim.emit_vote(vote, stage, publish)
                votes.append(vote)
                compliant_votes += 1
            block = Block(
                sim.tree.new_id(), s_i, parent, self.adversary,
                included_votes=tuple(votes),
            )
            sim.emit_block(block, stage, publish)
            fork_ids.append(block.id)
            parent = block.id
        state["fork_ids"] = fork_ids
        state["compliant_votes"] = compliant_votes

    def payoffs(self, profile: StrategyProfile) -> dict[PlayerId, Fraction]:
        outcome = self.run(profile)
        out: dict[PlayerId, Fraction] = {}
        for slot in self.player_slots:
            for v in self.committees[slot]:
                if v.pool is None:
                    out[v.index] = outcome.ledger.get(v.index)
        if self.config.pool:
            name = self.config.pool.name
            total = Fraction(0)
            for slot in range(1, self.horizon):
                for v in self.committees[slot]:
                    if v.pool == name:
                        total += outcome.ledger.get(v.index)
            out[name] = total
        return out

    # -- pool payoff table ----------------------------------------------------

    def pool_slot_sets(self) -> tuple[list[int], list[int]]:
        """S_A: slots whose next slot is adversarial; S_NA: the rest of [p]."""
        s_a = [s for s in range(1, self.horizon) if s + 1 in self.adv_slots]
        s_na = [s for s in range(1, self.horizon) if s + 1 not in self.adv_slots]
        return s_a, s_na

    def conditioned_profile(self, pool_action: str, fork_result: str) -> StrategyProfile:
        """Solo attestors comply exactly when the fork should win."""
        actions = {}
        solo_action = (
            FollowRule() if fork_result == "succeed" else VoteFor(Tip())
        )
        pool_act = FollowRule() if pool_action == "C" else VoteFor(Tip())
        for dp in self.decision_points():
            v = next(v for v in self.committees[dp.slot] if v.index == dp.actor)
            actions[dp] = pool_act if v.pool else solo_action
        return StrategyProfile(actions)


def pool_payoff_selfish(
    config: GameConfig, pool_action: str, fork_result: str
) -> Fraction:
    """Closed-form pool payoff: sum of m_s * r over the slot set that pays.

    succeed+C pays the slots preceding adversarial slots; any failure pays
    the slots preceding non-adversarial slots; succeed+NC pays nothing.
    """
    if not config.pool:
        raise GameError("config carries no pool")
    game = SelfishMiningGame(config)
    s_a, s_na = game.pool_slot_sets()
    m = config.pool.members_per_slot
    r = config.r
    if fork_result == "succeed":
        return sum((m * r for _ in s_a), Fraction(0)) if pool_action == "C" else Fraction(0)
    return sum((m * r for _ in s_na), Fraction(0))


# ---------------------------------------------------------------------------
# DAG-votes security scenario game
# ---------------------------------------------------------------------------


class DagVotesGame(GameModel):
    """Multi-slot run under the DAG-votes mechanism with one adversarial leader.

    Slots 1..n_slots extend a genesis at slot 0; the leader of `adv_slot` is
    adversarial and (unless adversary_on_tip) proposes off-tip.  Every
    next-slot attestor signs the votes it saw on time, so votes skipped by a
    missing or hostile next block still become timely through the majority
    evidence rule.  The baseline scenario runs without proposer boost; a
    positive boost is admissible when the committee is large enough to
    outvote it (the security argument then needs W > 2 + boost solo
    attestors, with the evidence threshold left at W/2).
    """

    def __init__(self, config: GameConfig, n_slots: int = 4, adv_slot: int = 3):
        self.config = replace(config, mechanism=Mechanism.DAG_VOTES)
        self.n_slots = n_slots
        self.adv_slot = adv_slot
        W = config.committee_size
        next_id = 0
        self.committees = {}
        for slot in range(0, n_slots + 1):
            self.committees[slot] = _committee(next_id, W)
            next_id += W
        self.leaders = {}
        for slot in range(1, n_slots + 1):
            kind = (
                ValidatorKind.ADVERSARIAL if slot == adv_slot else ValidatorKind.RATIONAL
            )
            self.leaders[slot] = Validator(next_id, kind)
            next_id += 1
        self.genesis_proposer = Validator(next_id, ValidatorKind.RATIONAL)

    def players(self) -> list[PlayerId]:
        out: list[PlayerId] = []
        for slot in range(1, self.n_slots + 1):
            if slot != self.adv_slot:
                out.append(self.leaders[slot].index)
        for slot in range(1, self.n_slots):
            out.extend(v.index for v in self.committees[slot])
        return out

    def decision_points(self) -> list[DecisionPoint]:
        dps = []
        for slot in range(1, self.n_slots + 1):
            if slot != self.adv_slot:
                dps.append(DecisionPoint(slot, Role.LEADER, self.leaders[slot].index))
            if slot < self.n_slots:
                for v in self.committees[slot]:
                    dps.append(DecisionPoint(slot, Role.ATTESTOR, v.index))
        return sorted(dps, key=lambda d: (d.tick, d.actor))

    def owner(self, dp: DecisionPoint) -> PlayerId:
        return dp.actor

    def dp_candidates(self, dp: DecisionPoint) -> list[tuple[str, object]]:
        if dp.role is Role.LEADER:
            return [
                ("on-tip", Propose(Tip(), include="pending")),
                ("off-tip", Propose(ParentOfTip(), include="pending")),
            ]
        return [
            ("tip", VoteFor(Tip())),
            ("parent-of-tip", VoteFor(ParentOfTip())),
            ("abstain", Abstain()),
        ]

    def profile(self, name: str) -> StrategyProfile:
        actions = {}
        for dp in self.decision_points():
            if name == "prescribed":
                actions[dp] = dict(self.dp_candidates(dp))[
                    "on-tip" if dp.role is Role.LEADER else "tip"
                ]
            else:
                raise GameError(f"unknown profile {name!r}")
        return StrategyProfile(actions)

    def run(self, profile: StrategyProfile) -> GameOutcome:
        cfg = self.config
        sim = Simulation(None, cfg.boost, cfg.tie_break)
        genesis = Block(sim.tree.new_id(), 0, None, self.genesis_proposer, True)
        sim.tree.insert_block(genesis)
        for v in self.committees[0]:
            sim.tree.add_vote(VoteRecord(0, v.index, genesis.id, 1))
        evidences_emitted: set = set()
        state: dict = {"adv_block": None}

        def pending_content(parent: BlockId) -> tuple[tuple, tuple]:
            included_votes: set = set()
            included_ev: set = set()
            cur: Optional[BlockId] = parent
            while cur is not None:
                b = sim.tree.blocks[cur]
                included_votes.update(v.key() for v in b.included_votes)
                included_ev.update(e.key() for e in b.included_evidences)
                cur = b.parent
            votes = tuple(
                v for v in sim.tree.votes if v.key() not in included_votes
            )
            evs = tuple(
                e for e in sim.delivered_evidences if e.key() not in included_ev
            )
            return votes, evs

        def on_tick(tick: int) -> None:
            slot, phase = divmod(tick, 3)
            if phase == 0 and 1 <= slot <= self.n_slots:
                leader = self.leaders[slot]
                if slot == self.adv_slot:
                    parent = (
                        sim.tip()
                        if cfg.adversary_on_tip
                        else sim.resolve(ParentOfTip())
                    )
                    votes, evs = pending_content(parent)
                    block = Block(
                        sim.tree.new_id(), slot, parent, leader,
                        included_votes=votes, included_evidences=evs,
                    )
                    sim.emit_block(block, tick)
                    state["adv_block"] = block
                    return
                act = profile.get(DecisionPoint(slot, Role.LEADER, leader.index))
                if act is None:
                    return
                parent = sim.resolve(act.parent)
                votes, evs = pending_content(parent)
                block = Block(
                    sim.tree.new_id(), slot, parent, leader,
                    included_votes=votes, included_evidences=evs,
                )
                sim.emit_block(block, tick)
            elif phase == 1 and 1 <= slot <= self.n_slots:
                for v in self.committees[slot]:
                    if slot == self.n_slots:
                        act: object = VoteFor(Tip())  # horizon committee, scripted
                    else:
                        act = profile.get(DecisionPoint(slot, Role.ATTESTOR, v.index))
                    if act is None or isinstance(act, Abstain):
                        continue
                    target = sim.resolve(act.target)
                    sim.emit_vote(VoteRecord(slot, v.index, target), tick, tick)
            elif phase == 2 and 0 <= slot < self.n_slots:
                # slot s+1 attestors sign the slot-s votes they saw on time
                for signer in self.committees[slot + 1]:
                    for vote in sim.tree.votes:
                        if vote.slot != slot:
                            continue
                        ev = EvidenceRecord(signer.index, vote, tick)
                        if ev.key() in evidences_emitted:
                            continue
                        evidences_emitted.add(ev.key())
                        sim.emit_evidence(ev, tick)

        sim.run_ticks(0, aggregate_tick(self.n_slots), on_tick)
        state["chain_before"] = None
        trace = sim.finalize(self.n_slots)
        ledger = _settle_onto_trace(trace, cfg.reward_params())
        chain = set(trace.final_chain)
        rational_blocks = [
            b.id
            for b in trace.tree.blocks.values()
            if b.proposer.kind is not ValidatorKind.ADVERSARIAL
        ]
        adv_block = state["adv_block"]
        extras = {
            "adversary_block": adv_block.id if adv_block else None,
            "adversary_votes": (
                sim.visible_votes_for(adv_block.id) if adv_block else 0
            ),
            "adversary_reorged": bool(adv_block) and adv_block.id not in chain,
            "rational_blocks_reorged": [b for b in rational_blocks if b not in chain],
        }
        success = not extras["adversary_reorged"]
        return GameOutcome(
            success, trace.final_chain, [], ledger, trace, extras
        )

    def payoffs(self, profile: StrategyProfile) -> dict[PlayerId, Fraction]:
        outcome = self.run(profile)
        out: dict[PlayerId, Fraction] = {}
        for pid in self.players():
            out[pid] = outcome.ledger.get(pid)
        return out


# ---------------------------------------------------------------------------


def build_game(config: GameConfig) -> GameModel:
    if config.kind is GameKind.SIMPLE:
        return SimpleGame(config)
    if config.kind is GameKind.STRONG_SIMPLE:
        return StrongSimpleGame(config)
    if config.kind is GameKind.SIMPLE_NO_BOOST:
        return NoBoostGame(config)
    if config.kind is GameKind.EXTENDED:
        return ExtendedGame(config)
    if config.kind is GameKind.SELFISH_MINING:
        return SelfishMiningGame(config)
    if config.kind is GameKind.DAG_VOTES:
        return DagVotesGame(config)
    raise GameError(f"unknown game kind {config.kind}")


def run_game(config: GameConfig, agents: StrategyProfile) -> RunTrace:
    """One full lock-step run of the configured game under `agents`.

    Drives the per-game schedule (proposal, vote and aggregation phases with
    one-tick delivery) and settles payoffs onto the returned trace's ledger
    at the game's payoff-realization point.
    """
    return build_game(config).run(agents).trace
