"""Lock-step clock, committee scheduling, message delivery and the run loop.

Time is measured in ticks with the network delay normalized to one tick.
Slot t spans ticks 3t..3t+2: proposal at 3t, attestation at 3t+1 and
aggregation (evidence emission under the DAG-votes mechanism) at 3t+2.
A message released at tick tau is in every agent's view at tau+1 and
thereafter; all agents share one view at lock-step times.

Agents act through a StrategyProfile that supplies one action per decision
point.  Scripted adversaries (attack-games) additionally hook into the loop
to count votes, withhold blocks and release them later.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field, replace
from random import Random
from typing import Callable, Optional, Sequence

from .chain import (
    Block,
    BlockId,
    BlockTree,
    EvidenceRecord,
    TieBreakPolicy,
    Validator,
    ValidatorKind,
    VoteRecord,
)


class EngineError(Exception):
    pass


class InsufficientValidators(EngineError):
    pass


class InvalidAction(EngineError):
    """An agent attempted a slashable or out-of-range action."""


PROPOSE, VOTE, AGGREGATE = 0, 1, 2


def slot_of(tick: int) -> int:
    return tick // 3


def phase_of(tick: int) -> int:
    return tick % 3


def propose_tick(slot: int) -> int:
    return 3 * slot


def vote_tick(slot: int) -> int:
    return 3 * slot + 1


def aggregate_tick(slot: int) -> int:
    return 3 * slot + 2


@dataclass
class CommitteeSchedule:
    """Per-slot leader and attestor set."""

    epoch_length: int
    committees: dict[int, list[Validator]]
    leaders: dict[int, Validator]
    seed: int = 0

    def committee(self, slot: int) -> list[Validator]:
        return self.committees[slot]

    def leader(self, slot: int) -> Validator:
        return self.leaders[slot]


def assign_committees(
    seed: int,
    n_validators: int,
    committee_size: int,
    epoch_length: int = 32,
    adversarial_slots: Sequence[int] = (),
    fixed_attestor_set: bool = False,
) -> CommitteeSchedule:
    """Deterministic stand-in for the RANDAO shuffle.

    Slots 0..epoch_length-1 get disjoint committees of `committee_size`
    drawn from a seeded shuffle, so each validator attests exactly once per
    epoch; the leader is the first committee member.  Slots listed in
    `adversarial_slots` get an adversarial leader, everyone else is rational.
    In fixed-attestor mode the same committee serves every slot.
    """
    adversarial = set(adversarial_slots)
    if fixed_attestor_set:
        if n_validators < committee_size:
            raise InsufficientValidators(
                f"{n_validators} validators < committee size {committee_size}"
            )
    elif n_validators < committee_size * epoch_length:
        raise InsufficientValidators(
            f"{n_validators} validators cannot fill {epoch_length} disjoint "
            f"committees of {committee_size}"
        )
    order = list(range(n_validators))
    Random(seed).shuffle(order)

    committees: dict[int, list[Validator]] = {}
    leaders: dict[int, Validator] = {}
    for slot in range(epoch_length):
        if fixed_attestor_set:
            members = order[:committee_size]
        else:
            members = order[slot * committee_size : (slot + 1) * committee_size]
        leader_index = members[0]
        validators = []
        for idx in members:
            kind = (
                ValidatorKind.ADVERSARIAL
                if slot in adversarial and idx == leader_index
                else ValidatorKind.RATIONAL
            )
            validators.append(Validator(idx, kind))
        committees[slot] = validators
        leaders[slot] = validators[0]
    return CommitteeSchedule(epoch_length, committees, leaders, seed)


class Role(enum.Enum):
    LEADER = "leader"
    ATTESTOR = "attestor"


@dataclass(frozen=True)
class DecisionPoint:
    slot: int
    role: Role
    actor: int  # validator index

    @property
    def tick(self) -> int:
        return propose_tick(self.slot) if self.role is Role.LEADER else vote_tick(self.slot)


# -- target selectors --------------------------------------------------------
#
# Profile actions name their targets symbolically so that a deviation branch
# (where the tree looks different) still resolves to a meaningful block.


@dataclass(frozen=True)
class Tip:
    """The canonical chain tip in view at the action tick."""


@dataclass(frozen=True)
class ParentOfTip:
    pass


@dataclass(frozen=True)
class CompliantTip:
    """The tip prescribed by the extended game's compliant-tip procedure."""


@dataclass(frozen=True)
class FixedBlock:
    block: BlockId


Selector = object  # Tip | ParentOfTip | CompliantTip | FixedBlock


@dataclass(frozen=True)
class Propose:
    parent: Selector
    empty: bool = False
    include: str = "all"  # inclusion-policy name resolved by the game
    release_tick: Optional[int] = None


@dataclass(frozen=True)
class VoteFor:
    target: Selector
    release_tick: Optional[int] = None


@dataclass(frozen=True)
class Abstain:
    pass


PlayerAction = object  # Propose | VoteFor | Abstain


@dataclass
class StrategyProfile:
    """One action per decision point, ordered by tick."""

    actions: dict[DecisionPoint, PlayerAction] = field(default_factory=dict)

    def get(self, dp: DecisionPoint) -> Optional[PlayerAction]:
        return self.actions.get(dp)

    def with_action(self, dp: DecisionPoint, action: PlayerAction) -> "StrategyProfile":
        actions = dict(self.actions)
        actions[dp] = action
        return StrategyProfile(actions)

    def decision_points(self) -> list[DecisionPoint]:
        return sorted(self.actions, key=lambda d: (d.tick, d.actor))


@dataclass
class TraceEvent:
    tick: int
    kind: str  # "block" | "vote" | "evidence"
    release_tick: int
    payload: dict


@dataclass
class RunTrace:
    """Append-only record of a run; replaying it reproduces identical payoffs."""

    events: list[TraceEvent] = field(default_factory=list)
    tips: list[tuple[int, BlockId]] = field(default_factory=list)
    tree: BlockTree = field(default_factory=BlockTree)
    final_chain: list[BlockId] = field(default_factory=list)
    final_slot: int = 0
    boosted: Optional[BlockId] = None
    boost: int = 0
    labels: dict[str, BlockId] = field(default_factory=dict)
    payoffs: dict[int, str] = field(default_factory=dict)  # settled, as p/q strings

    def export_lines(self) -> list[str]:
        lines = []
        for ev in self.events:
            lines.append(
                json.dumps(
                    {
                        "tick": ev.tick,
                        "kind": ev.kind,
                        "release_tick": ev.release_tick,
                        "payload": ev.payload,
                    },
                    sort_keys=True,
                )
            )
        lines.append(
            json.dumps(
                {
                    "kind": "summary",
                    "final_chain": list(self.final_chain),
                    "final_slot": self.final_slot,
                    "tips": self.tips,
                    "payoffs": self.payoffs,
                },
                sort_keys=True,
            )
        )
        return lines


_KIND_ORDER = {"block": 0, "vote": 1, "evidence": 2}


@dataclass
class PendingMessage:
    release_tick: int
    kind: str
    payload: object
    seq: int


class Simulation:
    """Single-threaded lock-step run.

    The per-run state is self-contained, so disjoint simulations can run in
    parallel under independent drivers with no shared mutable state.
    """

    def __init__(
        self,
        schedule: Optional[CommitteeSchedule],
        boost: int,
        tie_break: TieBreakPolicy = TieBreakPolicy.ADVERSARY_FAVORING,
    ):
        self.schedule = schedule
        self.boost = boost
        self.tie_break = tie_break
        self.tree = BlockTree()  # the delivered view, shared by all agents
        self.pending: list[PendingMessage] = []
        self.delivered_evidences: list[EvidenceRecord] = []
        self.trace = RunTrace(boost=boost)
        self.tick = 0
        self._seq = 0
        self._voted: dict[tuple[int, int], BlockId] = {}
        self._proposed: dict[tuple[int, int], BlockId] = {}

    # -- message emission ------------------------------------------------

    def _push(self, kind: str, payload: object, created: int, release: int) -> None:
        if release < created:
            raise InvalidAction("cannot release a message before creating it")
        self.pending.append(PendingMessage(release, kind, payload, self._seq))
        self._seq += 1

    def emit_block(self, block: Block, created: int, release: Optional[int] = None) -> None:
        key = (block.proposer.index, block.slot)
        if key in self._proposed and block.proposer.kind is not ValidatorKind.ADVERSARIAL:
            raise InvalidAction(
                f"validator {block.proposer.index} already proposed for slot {block.slot}"
            )
        self._proposed[key] = block.id
        release = created if release is None else release
        self._push("block", block, created, release)
        self.trace.events.append(
            TraceEvent(
                created,
                "block",
                release,
                {
                    "id": block.id,
                    "slot": block.slot,
                    "parent": block.parent,
                    "proposer": block.proposer.index,
                    "empty": block.is_empty,
                    "votes": sorted(v.key() for v in block.included_votes),
                    "evidences": sorted(e.key() for e in block.included_evidences),
                },
            )
        )

    def emit_vote(self, vote: VoteRecord, created: int, release: Optional[int] = None) -> None:
        key = (vote.voter, vote.slot)
        prior = self._voted.get(key)
        if prior is not None and prior != vote.target:
            raise InvalidAction(f"validator {vote.voter} already voted at slot {vote.slot}")
        self._voted[key] = vote.target
        release = created if release is None else release
        vote = replace(vote, broadcast_time=release)
        self._push("vote", vote, created, release)
        self.trace.events.append(
            TraceEvent(
                created,
                "vote",
                release,
                {"slot": vote.slot, "voter": vote.voter, "target": vote.target},
            )
        )

    def emit_evidence(
        self, ev: EvidenceRecord, created: int, release: Optional[int] = None
    ) -> None:
        release = created if release is None else release
        self._push("evidence", ev, created, release)
        self.trace.events.append(TraceEvent(created, "evidence", release, {"key": ev.key()}))

    # -- view helpers ------------------------------------------------------

    def visible_votes_for(self, target: BlockId, slot: Optional[int] = None) -> int:
        return sum(
            1
            for v in self.tree.votes
            if v.target == target and (slot is None or v.slot == slot)
        )

    def boosted_block(self, query_slot: int) -> Optional[BlockId]:
        """The proposal of `query_slot` currently in view, if any."""
        candidates = [b.id for b in self.tree.blocks.values() if b.slot == query_slot]
        return max(candidates) if candidates else None

    def tip(self, query_slot: Optional[int] = None) -> BlockId:
        query_slot = slot_of(self.tick) if query_slot is None else query_slot
        return self.tree.fork_choice(
            query_slot, self.boosted_block(query_slot), self.boost, self.tie_break
        )

    def resolve(self, selector: Selector, compliant_tip: Optional[BlockId] = None) -> BlockId:
        if isinstance(selector, FixedBlock):
            return selector.block
        if isinstance(selector, Tip):
            return self.tip()
        if isinstance(selector, ParentOfTip):
            tip = self.tip()
            parent = self.tree.blocks[tip].parent
            return tip if parent is None else parent
        if isinstance(selector, CompliantTip):
            if compliant_tip is None:
                raise InvalidAction("no compliant tip available in this game")
            return compliant_tip
        raise InvalidAction(f"unknown selector {selector!r}")

    # -- run loop ----------------------------------------------------------

    def deliver(self) -> None:
        """Make every message released strictly before the current tick visible."""
        due = [m for m in self.pending if m.release_tick < self.tick]
        due.sort(key=lambda m: (m.release_tick, _KIND_ORDER[m.kind], m.seq))
        self.pending = [m for m in self.pending if m.release_tick >= self.tick]
        for msg in due:
            if msg.kind == "block":
                self.tree.insert_block(msg.payload)  # type: ignore[arg-type]
            elif msg.kind == "vote":
                self.tree.add_vote(msg.payload)  # type: ignore[arg-type]
            else:
                self.delivered_evidences.append(msg.payload)  # type: ignore[arg-type]

    def run_ticks(self, start: int, end: int, on_tick: Callable[[int], None]) -> None:
        for tick in range(start, end + 1):
            self.tick = tick
            self.deliver()
            on_tick(tick)
            self.trace.tips.append((tick, self.tip()))

    def finalize(self, final_slot: int) -> RunTrace:
        """Deliver everything outstanding and fix the final canonical chain.

        The final chain is evaluated from the perspective of `final_slot`, so
        that slot's proposal still enjoys the proposer boost; behavior after
        the game ends is assumed not to disturb it.
        """
        if self.pending:
            self.tick = max(m.release_tick for m in self.pending) + 1
            self.deliver()
        boosted = self.boosted_block(final_slot)
        self.trace.tree = self.tree
        self.trace.final_slot = final_slot
        self.trace.boosted = boosted
        self.trace.final_chain = self.tree.canonical_chain(
            final_slot, boosted, self.boost, self.tie_break
        )
        return self.trace
