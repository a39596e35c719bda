"""Compliant-tip identification and iterative compliance classification.

The extended attack coordinates leaders and attestors of slots 1..p onto a
fork of empty blocks built from B_{-p}.  Everyone locates the block to build
on (the *compliant tip*) with the same procedure: for every block B in the
tree, add the hypothetical weight (p - i + 1) * W + W_p that B's subtree
would gain if all remaining committees voted below B and the adversary's
boosted block extended that chain, run the fork choice, and keep B if it
lands on the resulting chain.  Among survivors, the winner is the block
whose prefix contains the fewest-recent non-compliant block; a fully
compliant prefix beats any non-compliant one.

Ties on that index are resolved toward the largest slot (the deepest block
of the compliant chain), then the lowest id.  The depth preference is what
makes the procedure return the previous slot's compliant block once all
earlier slots have complied, which the whole backward-induction argument
rests on.

The hypothetical weights are applied as virtual votes, so the scan never
mutates the tree: subtree weights after the scan trivially equal those
before.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional

from .chain import Block, BlockId, BlockTree, TieBreakPolicy, VoteRecord


class HonestMajority(Exception):
    pass


class EmptyCandidateSet(Exception):
    """No block survived the membership check.

    Cannot happen on trees rooted at B_{-p}: the root is on every chain the
    fork choice can return, so it always qualifies.  Raised as a defect
    assertion.
    """


def prefix_noncompliance_index(
    tree: BlockTree, bid: BlockId, marks: Mapping[BlockId, bool]
) -> Optional[int]:
    """Largest slot of a non-compliant block on the path root..bid, else None."""
    worst: Optional[int] = None
    for anc in tree.ancestors(bid):
        if not marks.get(anc, False):
            slot = tree.blocks[anc].slot
            if worst is None or slot > worst:
                worst = slot
    return worst


def compliant_tip(
    tree: BlockTree,
    slot_i: int,
    p: int,
    committee_size: int,
    boost: int,
    compliance_marks: Mapping[BlockId, bool],
    tie_break: TieBreakPolicy = TieBreakPolicy.ADVERSARY_FAVORING,
) -> BlockId:
    """The block a compliant slot-`slot_i` proposal or vote must build on.

    `slot_i` may be p+1 (the adversary's own run: no committees remain, the
    hypothetical weight degenerates to the proposer boost alone).
    """
    hypothetical = (p - slot_i + 1) * committee_size + boost
    best: Optional[tuple] = None
    best_block: Optional[BlockId] = None
    for bid in sorted(tree.blocks):
        chain = tree.canonical_chain(
            current_slot=slot_i,
            boosted=None,
            boost=0,
            tie_break=tie_break,
            virtual_votes={bid: hypothetical},
        )
        if bid not in chain:
            continue
        worst = prefix_noncompliance_index(tree, bid, compliance_marks)
        # None (fully compliant prefix) sorts before every slot number
        rank = (
            (0, 0) if worst is None else (1, worst),
            -tree.blocks[bid].slot,
            bid,
        )
        if best is None or rank < best:
            best = rank
            best_block = bid
    if best_block is None:
        raise EmptyCandidateSet("no candidate lies on its own hypothetical chain")
    return best_block


@dataclass
class ComplianceTracker:
    """Iteratively judged compliance marks for blocks and votes.

    Seeded with B_{-p} compliant and the original chain B_{-p+1}..B_0
    non-compliant; the extended-game driver feeds it the tree state at each
    classification tick.
    """

    p: int
    committee_size: int
    boost: int
    tie_break: TieBreakPolicy = TieBreakPolicy.ADVERSARY_FAVORING
    block_marks: dict[BlockId, bool] = field(default_factory=dict)
    vote_marks: dict[tuple[int, int, BlockId], bool] = field(default_factory=dict)
    leader_tips: dict[int, BlockId] = field(default_factory=dict)
    vote_tips: dict[int, BlockId] = field(default_factory=dict)

    def seed(self, genesis: BlockId, originals: list[BlockId]) -> None:
        self.block_marks[genesis] = True
        for bid in originals:
            self.block_marks[bid] = False

    def tip_at_leader_time(self, tree: BlockTree, slot_i: int) -> BlockId:
        tip = compliant_tip(
            tree, slot_i, self.p, self.committee_size, self.boost,
            self.block_marks, self.tie_break,
        )
        self.leader_tips[slot_i] = tip
        return tip

    def tip_at_vote_time(self, tree: BlockTree, slot_i: int) -> BlockId:
        tip = compliant_tip(
            tree, slot_i, self.p, self.committee_size, self.boost,
            self.block_marks, self.tie_break,
        )
        self.vote_tips[slot_i] = tip
        return tip

    def classify_block(self, block: Block) -> bool:
        """Judge a slot-i block against the compliant tip of its leader tick.

        Compliant means: empty, proposed on the compliant tip, and (for
        slots past the first) carrying only the compliant previous-slot
        votes for its parent.
        """
        slot_i = block.slot
        expected_parent = self.leader_tips.get(slot_i)
        ok = (
            block.is_empty
            and expected_parent is not None
            and block.parent == expected_parent
        )
        if ok and slot_i >= 2:
            for vote in block.included_votes:
                if vote.slot != slot_i - 1 or vote.target != block.parent:
                    ok = False
                    break
                if not self.vote_marks.get((vote.slot, vote.voter, vote.target), False):
                    ok = False
                    break
        self.block_marks[block.id] = ok
        return ok

    def classify_vote(self, vote: VoteRecord) -> bool:
        """A slot-i vote is compliant iff it names the vote-time compliant tip."""
        ok = self.vote_tips.get(vote.slot) == vote.target
        self.vote_marks[(vote.slot, vote.voter, vote.target)] = ok
        return ok

    def is_vote_compliant(self, vote: VoteRecord) -> bool:
        return self.vote_marks.get((vote.slot, vote.voter, vote.target), False)

    def compliant_block_of_slot(self, tree: BlockTree, slot_i: int) -> Optional[BlockId]:
        for bid in sorted(tree.blocks):
            if tree.blocks[bid].slot == slot_i and self.block_marks.get(bid, False):
                return bid
        return None


def required_attack_length(p: int, committee_size: int, honest_per_slot: int) -> int:
    """Slots the extended attack must run against W_h honest attestors per slot.

    ceil(p * W / (W - 2 * W_h)); an honest majority per committee makes the
    attack impossible.
    """
    if 2 * honest_per_slot >= committee_size:
        raise HonestMajority(
            f"{honest_per_slot} honest attestors out of {committee_size} "
            "cannot be outvoted"
        )
    num = p * committee_size
    den = committee_size - 2 * honest_per_slot
    return -(-num // den)
