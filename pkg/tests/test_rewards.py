from fractions import Fraction

import pytest

from reorglab.chain import Block, EvidenceRecord, Validator, VoteRecord
from reorglab.engine import RunTrace
from reorglab.rewards import (
    InclusionRewardBreakdown,
    RewardParams,
    TargetNotOnChainQueryable,
    ZeroStake,
    altair_block_inclusion_reward,
    attack_gain_summary,
    head_vote_correct,
    head_vote_timely_dag,
    head_vote_timely_ethereum,
    settle_payoffs,
)

from conftest import ADVERSARIAL, RATIONAL, make_tree


class TestCorrectness:
    def test_vote_for_own_slot_tip(self):
        tree = make_tree([None, 0, 1])
        assert head_vote_correct(VoteRecord(2, 1, 2), [0, 1, 2], tree)

    def test_compliant_vote_on_post_attack_chain(self):
        # chain [B_{t-1}, B_A]: a slot-t vote for B_{t-1} is correct
        tree = make_tree([None, 0, 0], [RATIONAL, RATIONAL, ADVERSARIAL])
        assert head_vote_correct(VoteRecord(1, 1, 0), [0, 2], tree)

    def test_compliant_vote_when_victim_survives(self):
        # chain [B_{t-1}, B_t, B_A]: the same vote is no longer correct
        tree = make_tree([None, 0, 1])
        assert not head_vote_correct(VoteRecord(1, 1, 0), [0, 1, 2], tree)

    def test_unknown_target(self):
        tree = make_tree([None])
        with pytest.raises(TargetNotOnChainQueryable):
            head_vote_correct(VoteRecord(1, 1, 42), [0], tree)


class TestTimelyEthereum:
    def test_next_slot(self):
        block = Block(9, 6, None, Validator(0, RATIONAL))
        assert head_vote_timely_ethereum(VoteRecord(5, 1, 0), block)

    def test_two_slots_late(self):
        block = Block(9, 7, None, Validator(0, RATIONAL))
        assert not head_vote_timely_ethereum(VoteRecord(5, 1, 0), block)

    def test_same_slot(self):
        block = Block(9, 5, None, Validator(0, RATIONAL))
        assert not head_vote_timely_ethereum(VoteRecord(5, 1, 0), block)


def _dag_tree(n_evidences: int, unique_signers: int = None):
    """Chain genesis - B1 - B2; a slot-1 vote included in B2 with evidences."""
    unique = n_evidences if unique_signers is None else unique_signers
    tree = make_tree([None, 0])
    v = VoteRecord(1, 7, 1)
    evs = []
    for i in range(n_evidences):
        signer = 100 + min(i, unique - 1)
        evs.append(EvidenceRecord(signer, v, 8))
    block = Block(tree.new_id(), 3, 1, Validator(50, RATIONAL),
                  included_votes=(v,), included_evidences=tuple(evs))
    tree.insert_block(block)
    return tree, v, block


class TestTimelyDag:
    def test_majority_evidence(self):
        tree, v, block = _dag_tree(6)
        assert head_vote_timely_dag(v, [0, 1, block.id], tree, committee_size=10)

    def test_exact_half_is_untimely(self):
        tree, v, block = _dag_tree(5)
        assert not head_vote_timely_dag(v, [0, 1, block.id], tree, committee_size=10)

    def test_duplicate_signers_collapse(self):
        # 7 evidences but 3 share one signer: 5 unique, below threshold
        tree, v, block = _dag_tree(7, unique_signers=5)
        signers = {e.signer for e in block.included_evidences}
        assert len(signers) == 5
        assert not head_vote_timely_dag(v, [0, 1, block.id], tree, committee_size=10)

    def test_next_slot_inclusion_still_counts(self):
        tree = make_tree([None, 0])
        v = VoteRecord(1, 7, 1)
        block = Block(tree.new_id(), 2, 1, Validator(50, RATIONAL), included_votes=(v,))
        tree.insert_block(block)
        assert head_vote_timely_dag(v, [0, 1, block.id], tree, committee_size=10)

    def test_monotone_in_evidence(self):
        for n in range(0, 11):
            tree, v, block = _dag_tree(n)
            timely = head_vote_timely_dag(v, [0, 1, block.id], tree, committee_size=10)
            assert timely == (n > 5)


def _trace_for(tree, chain):
    trace = RunTrace()
    trace.tree = tree
    trace.final_chain = chain
    return trace


class TestSettle:
    def test_ledger_conservation(self):
        tree = make_tree([None])
        votes = tuple(VoteRecord(0, i, 0) for i in range(4))
        block = Block(tree.new_id(), 1, 0, Validator(50, RATIONAL), included_votes=votes)
        tree.insert_block(block)
        params = RewardParams(r=Fraction(3), R=Fraction(5))
        ledger = settle_payoffs(_trace_for(tree, [0, 1]), params)
        attestor_total = sum(ledger.get(i) for i in range(4))
        assert attestor_total == 4 * params.r
        assert ledger.get(50) == 4 * params.R

    def test_exclusion_means_zero(self):
        # a correct vote not included in the next-slot block earns nothing
        tree = make_tree([None, 0])
        v = VoteRecord(0, 9, 0)
        block = Block(tree.new_id(), 3, 1, Validator(50, RATIONAL), included_votes=(v,))
        tree.insert_block(block)
        ledger = settle_payoffs(_trace_for(tree, [0, 1, block.id]), RewardParams())
        assert ledger.get(9) == 0

    def test_no_double_credit(self):
        tree = make_tree([None])
        v = VoteRecord(0, 9, 0)
        b1 = Block(tree.new_id(), 1, 0, Validator(50, RATIONAL), included_votes=(v,))
        tree.insert_block(b1)
        b2 = Block(tree.new_id(), 2, b1.id, Validator(51, RATIONAL), included_votes=(v,))
        tree.insert_block(b2)
        ledger = settle_payoffs(_trace_for(tree, [0, b1.id, b2.id]), RewardParams())
        assert ledger.get(9) == 1


class TestAltairQuantification:
    N = 1_073_375

    def test_reported_eth_figures(self):
        inc = altair_block_inclusion_reward(self.N)
        eth = InclusionRewardBreakdown.as_eth
        assert eth(inc.all_three_votes) == pytest.approx(0.0446, rel=0.01)
        assert eth(inc.success_case) == pytest.approx(0.0777, rel=0.01)
        assert eth(inc.head_only) == pytest.approx(0.0115, rel=0.02)

    def test_exact_weight_ratios(self):
        inc = altair_block_inclusion_reward(self.N)
        assert inc.head_only / inc.all_three_votes == Fraction(14, 54)
        assert inc.success_case / inc.all_three_votes == Fraction(94, 54)

    def test_attack_gain(self):
        inc = altair_block_inclusion_reward(self.N)
        s = attack_gain_summary(inc, Fraction("0.082"), Fraction("0.12"), Fraction("0.278"))
        assert s.delta_eth == pytest.approx(0.0711, rel=0.02)
        assert s.pool_head_loss_eth == pytest.approx(0.0225, rel=0.02)
        assert s.pool_net_eth == pytest.approx(0.0486, rel=0.02)
        assert float(s.delta_pct) == pytest.approx(0.56, abs=0.01)

    def test_mev_free_delta(self):
        inc = altair_block_inclusion_reward(self.N)
        s = attack_gain_summary(inc, Fraction(0), Fraction(0))
        assert s.delta_gwei == inc.success_case - inc.all_three_votes

    def test_zero_stake(self):
        with pytest.raises(ZeroStake):
            altair_block_inclusion_reward(0)
