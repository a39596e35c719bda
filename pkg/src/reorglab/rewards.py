"""Head-vote rewards under the next-slot-inclusion and DAG-votes rules.

A head vote earns its attestation reward r (and the includer's leader the
inclusion reward R) only if the vote is included in the canonical chain and
is both correct and timely.  Correctness is shared by both mechanisms: the
vote must name the last block at or before its slot on the chain.  The two
mechanisms differ on timeliness:

* next-slot inclusion: the vote must sit in the block of exactly the
  following slot - the lever every commitment attack pulls on;
* DAG votes: inclusion in the following slot's block still qualifies, but
  so does a strict majority (> W/2) of unique next-slot attestor signatures
  over the vote appearing anywhere later on the chain.

The module also carries the gwei-level quantification of what a one-block
reorg is worth to the attacking proposer, using the standard Altair reward
constants (increment 1e9 gwei, base factor 64, vote weights 14/26/14 and
proposer share 8/56 of a 64-part split).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional

from .chain import Block, BlockId, BlockTree, EvidenceRecord, VoteRecord
from .engine import RunTrace


class RewardError(Exception):
    pass


class TargetNotOnChainQueryable(RewardError):
    pass


class ZeroStake(RewardError):
    pass


class Mechanism(enum.Enum):
    ETHEREUM = "ethereum"
    DAG_VOTES = "dag-votes"


@dataclass(frozen=True)
class VoteWeights:
    source: int = 14
    target: int = 26
    head: int = 14
    denominator: int = 64
    proposer_num: int = 8
    proposer_den: int = 56

    @property
    def head_source_target(self) -> int:
        return self.source + self.target + self.head


@dataclass(frozen=True)
class RewardParams:
    r: Fraction = Fraction(1)
    R: Fraction = Fraction(1)
    mechanism: Mechanism = Mechanism.ETHEREUM
    committee_size: int = 0  # W, needed for the DAG evidence threshold
    vote_weights: VoteWeights = VoteWeights()


@dataclass
class PayoffLedger:
    payoffs: dict[int, Fraction] = field(default_factory=dict)
    per_slot: dict[tuple[int, int], Fraction] = field(default_factory=dict)

    def credit(self, validator: int, slot: int, amount: Fraction) -> None:
        self.payoffs[validator] = self.payoffs.get(validator, Fraction(0)) + amount
        key = (validator, slot)
        self.per_slot[key] = self.per_slot.get(key, Fraction(0)) + amount

    def get(self, validator: int) -> Fraction:
        return self.payoffs.get(validator, Fraction(0))

    def slot_part(self, validator: int, slot: int) -> Fraction:
        return self.per_slot.get((validator, slot), Fraction(0))


def correctness_target(chain: list[BlockId], tree: BlockTree, slot: int) -> Optional[BlockId]:
    """Last block on `chain` with slot <= `slot` (the required vote target)."""
    last = None
    for bid in chain:
        if tree.blocks[bid].slot <= slot:
            last = bid
        else:
            break
    return last


def head_vote_correct(vote: VoteRecord, chain: list[BlockId], tree: BlockTree) -> bool:
    if vote.target not in tree.blocks:
        raise TargetNotOnChainQueryable(f"vote target {vote.target} unknown")
    return correctness_target(chain, tree, vote.slot) == vote.target


def head_vote_timely_ethereum(vote: VoteRecord, including_block: Block) -> bool:
    return including_block.slot == vote.slot + 1


def _unique_evidence_signers(
    evidences: Iterable[EvidenceRecord], vote: VoteRecord
) -> set[int]:
    return {
        e.signer
        for e in evidences
        if e.vote.voter == vote.voter
        and e.vote.slot == vote.slot
        and e.vote.target == vote.target
    }


def head_vote_timely_dag(
    vote: VoteRecord, chain: list[BlockId], tree: BlockTree, committee_size: int
) -> bool:
    """Timely if next-slot-included on chain, or evidenced by > W/2 signers.

    Only evidences sitting in chain blocks strictly after the correctness
    target count; the threshold is strict, so W even with exactly W/2
    evidences is untimely.
    """
    target = correctness_target(chain, tree, vote.slot)
    after_target = target is None
    signers: set[int] = set()
    for bid in chain:
        block = tree.blocks[bid]
        if vote in block.included_votes and block.slot == vote.slot + 1:
            return True
        if after_target:
            signers |= _unique_evidence_signers(block.included_evidences, vote)
        if bid == target:
            after_target = True
    return 2 * len(signers) > committee_size


def settle_payoffs(trace: RunTrace, params: RewardParams) -> PayoffLedger:
    """Credit r per correct+timely included head vote, R to its includer.

    A vote included in several chain blocks is credited at most once.
    """
    ledger = PayoffLedger()
    tree = trace.tree
    chain = trace.final_chain
    credited: set[tuple[int, int]] = set()
    for bid in chain:
        block = tree.blocks[bid]
        for vote in block.included_votes:
            if vote.key() in credited:
                continue
            if not head_vote_correct(vote, chain, tree):
                continue
            if params.mechanism is Mechanism.ETHEREUM:
                timely = head_vote_timely_ethereum(vote, block)
            else:
                timely = head_vote_timely_dag(vote, chain, tree, params.committee_size)
            if not timely:
                continue
            credited.add(vote.key())
            ledger.credit(vote.voter, vote.slot, params.r)
            ledger.credit(block.proposer.index, block.slot, params.R)
    return ledger


# -- Altair-weight quantification -------------------------------------------


@dataclass(frozen=True)
class InclusionRewardBreakdown:
    """Average per-block attestation inclusion rewards, in gwei (exact)."""

    all_three_votes: Fraction
    source_target_only: Fraction
    head_only: Fraction
    attestor_head_committee_total: Fraction

    @property
    def success_case(self) -> Fraction:
        # a reorging block collects a full committee's worth of fresh
        # inclusion rewards plus the reorged slot's source/target share
        return self.all_three_votes + self.source_target_only

    @staticmethod
    def as_eth(gwei: Fraction) -> float:
        return float(gwei / 10**9)


def altair_block_inclusion_reward(
    n_validators: int,
    stake_per_validator_gwei: int = 32 * 10**9,
    weights: VoteWeights = VoteWeights(),
) -> InclusionRewardBreakdown:
    """Per-block proposer inclusion rewards split by vote weights.

    base reward per increment = 1e9 * 64 / isqrt(total stake in gwei); a
    validator holds stake/1e9 increments.  The proposer share of an included
    attestation with flag weight w is base * (w / 64) * (8 / 56); one block
    includes the attestations of one committee of n/32 validators.
    """
    if n_validators <= 0 or stake_per_validator_gwei <= 0:
        raise ZeroStake("total stake must be positive")
    total_stake = n_validators * stake_per_validator_gwei
    base_per_increment = Fraction(10**9 * 64, math.isqrt(total_stake))
    increments = stake_per_validator_gwei // 10**9
    base_reward = increments * base_per_increment
    committee = Fraction(n_validators, 32)
    proposer_share = Fraction(weights.proposer_num, weights.proposer_den)

    def inclusion_total(weight_sum: int) -> Fraction:
        per_attester = base_reward * Fraction(weight_sum, weights.denominator) * proposer_share
        return per_attester * committee

    head_attester_total = base_reward * Fraction(weights.head, weights.denominator) * committee
    return InclusionRewardBreakdown(
        all_three_votes=inclusion_total(weights.head_source_target),
        source_target_only=inclusion_total(weights.source + weights.target),
        head_only=inclusion_total(weights.head),
        attestor_head_committee_total=head_attester_total,
    )


@dataclass(frozen=True)
class AttackGainSummary:
    delta_gwei: Fraction
    delta_pct: Fraction  # relative to the no-attack block reward
    pool_head_loss_gwei: Fraction
    pool_net_gwei: Fraction

    @property
    def delta_eth(self) -> float:
        return float(self.delta_gwei / 10**9)

    @property
    def pool_net_eth(self) -> float:
        return float(self.pool_net_gwei / 10**9)

    @property
    def pool_head_loss_eth(self) -> float:
        return float(self.pool_head_loss_gwei / 10**9)


def attack_gain_summary(
    inclusion: InclusionRewardBreakdown,
    mev_fail_eth: Fraction,
    mev_success_eth: Fraction,
    pool_share: Fraction = Fraction(0),
) -> AttackGainSummary:
    """Reward delta of a successful one-block reorg; MEV averages are inputs.

    A pool reorging the slot t block forfeits the head-vote rewards of its
    own slot t-1 attestors, hence pool_net = delta - share * committee head
    reward.
    """
    gwei = Fraction(10**9)
    fail_total = inclusion.all_three_votes + mev_fail_eth * gwei
    success_total = inclusion.success_case + mev_success_eth * gwei
    delta = success_total - fail_total
    pool_loss = pool_share * inclusion.attestor_head_committee_total
    return AttackGainSummary(
        delta_gwei=delta,
        delta_pct=delta / fail_total if fail_total else Fraction(0),
        pool_head_loss_gwei=pool_loss,
        pool_net_gwei=delta - pool_loss,
    )
