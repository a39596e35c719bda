"""Block tree and the LMD GHOST fork-choice rule with proposer boost.

Blocks form a tree rooted at a genesis block; each block carries the votes
and evidences it includes on-chain.  Fork-choice weight, however, is computed
from the *delivered* votes known to the tree, independent of inclusion: a
vote influences the fork choice as soon as it is in view, and earns rewards
only once included (see rewards.py).

Block ids are plain increasing integers rather than hashes: the simulations
need determinism, not collision resistance.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

BlockId = int


class ChainError(Exception):
    pass


class UnknownParent(ChainError):
    pass


class UnknownBlock(ChainError):
    pass


class DuplicateId(ChainError):
    pass


class EquivocationRejected(ChainError):
    """A non-adversarial proposer attempted a second block for the same slot.

    Proposing two blocks for one slot is a slashable offense, so rational and
    honest agents never do it; the tree rejects the attempt loudly instead of
    silently modelling behavior outside every game's action space.
    """


class ValidatorKind(enum.Enum):
    HONEST = "honest"
    RATIONAL = "rational"
    ADVERSARIAL = "adversarial"


@dataclass(frozen=True)
class Validator:
    index: int
    kind: ValidatorKind
    pool: Optional[str] = None

    def __repr__(self) -> str:
        return f"V{self.index}({self.kind.value[0]})"


@dataclass(frozen=True)
class VoteRecord:
    """A head vote: attestor `voter` saw `target` as the chain tip at `slot`."""

    slot: int
    voter: int
    target: BlockId
    broadcast_time: int = 0

    def key(self) -> tuple[int, int]:
        return (self.voter, self.slot)


@dataclass(frozen=True)
class EvidenceRecord:
    """A next-slot attestor's signature over an earlier vote.

    `signer` is expected to belong to the committee of slot
    ``vote.slot + 1``; the game drivers only emit evidences from that
    committee.  Uniqueness is keyed by (signer, vote) so duplicates
    collapse when counted.
    """

    signer: int
    vote: VoteRecord
    created_tick: int = 0

    def key(self) -> tuple[int, int, int, BlockId]:
        return (self.signer, self.vote.voter, self.vote.slot, self.vote.target)


@dataclass
class Block:
    id: BlockId
    slot: int
    parent: Optional[BlockId]
    proposer: Validator
    is_empty: bool = False
    included_votes: tuple[VoteRecord, ...] = ()
    included_evidences: tuple[EvidenceRecord, ...] = ()


class TieBreakPolicy(enum.Enum):
    """How equal-weight sibling subtrees are resolved.

    ADVERSARY_FAVORING prefers the child whose subtree holds the most recent
    adversarial block (all the attack analyses assume the adversary breaks
    ties), falling back to the lowest block id.  LEXICOGRAPHIC always takes
    the lowest id.
    """

    ADVERSARY_FAVORING = "adversary-favoring"
    LEXICOGRAPHIC = "lexicographic"


@dataclass
class BlockTree:
    """A tree of blocks plus the multiset of delivered votes."""

    blocks: dict[BlockId, Block] = field(default_factory=dict)
    children: dict[BlockId, list[BlockId]] = field(default_factory=dict)
    votes: list[VoteRecord] = field(default_factory=list)
    genesis: Optional[BlockId] = None
    _next_id: int = 0

    def new_id(self) -> BlockId:
        bid = self._next_id
        self._next_id += 1
        return bid

    def insert_block(self, block: Block) -> None:
        if block.id in self.blocks:
            raise DuplicateId(f"block id {block.id} already in tree")
        if self.genesis is None:
            if block.parent is not None:
                raise UnknownParent("genesis must have no parent")
            self.genesis = block.id
        else:
            if block.parent not in self.blocks:
                raise UnknownParent(f"parent {block.parent} not in tree")
            parent = self.blocks[block.parent]
            if block.slot <= parent.slot:
                raise ChainError(
                    f"slot {block.slot} not greater than parent slot {parent.slot}"
                )
            if block.proposer.kind is not ValidatorKind.ADVERSARIAL:
                for other in self.blocks.values():
                    if (
                        other.slot == block.slot
                        and other.proposer.index == block.proposer.index
                    ):
                        raise EquivocationRejected(
                            f"proposer {block.proposer.index} already has a "
                            f"block at slot {block.slot}"
                        )
        self.blocks[block.id] = block
        self.children.setdefault(block.id, [])
        if block.parent is not None:
            self.children.setdefault(block.parent, []).append(block.id)

    def add_vote(self, vote: VoteRecord) -> None:
        if vote.target not in self.blocks:
            raise UnknownBlock(f"vote target {vote.target} not in tree")
        if self.blocks[vote.target].slot > vote.slot:
            raise ChainError(
                f"slot {vote.slot} vote for a slot "
                f"{self.blocks[vote.target].slot} block is invalid"
            )
        self.votes.append(vote)

    def ancestors(self, bid: BlockId) -> list[BlockId]:
        """Path from genesis to `bid`, inclusive."""
        if bid not in self.blocks:
            raise UnknownBlock(f"block {bid} not in tree")
        path = []
        cur: Optional[BlockId] = bid
        while cur is not None:
            path.append(cur)
            cur = self.blocks[cur].parent
        path.reverse()
        return path

    def is_ancestor(self, anc: BlockId, bid: BlockId) -> bool:
        cur: Optional[BlockId] = bid
        while cur is not None:
            if cur == anc:
                return True
            cur = self.blocks[cur].parent
        return False

    def latest_votes(self) -> list[VoteRecord]:
        """One vote per voter, keeping only the latest-slot message (LMD)."""
        best: dict[int, VoteRecord] = {}
        for v in self.votes:
            cur = best.get(v.voter)
            if cur is None or (v.slot, v.broadcast_time, -v.target) > (
                cur.slot,
                cur.broadcast_time,
                -cur.target,
            ):
                best[v.voter] = v
        return [best[k] for k in sorted(best)]

    def _weights(
        self,
        current_slot: int,
        boosted: Optional[BlockId],
        boost: int,
        virtual_votes: Optional[Mapping[BlockId, int]],
    ) -> dict[BlockId, int]:
        """Subtree weight of every block under the LMD rule plus boost."""
        weight = {bid: 0 for bid in self.blocks}

        def credit(bid: BlockId, amount: int) -> None:
            cur: Optional[BlockId] = bid
            while cur is not None:
                weight[cur] += amount
                cur = self.blocks[cur].parent

        for vote in self.latest_votes():
            credit(vote.target, 1)
        if virtual_votes:
            for bid, amount in virtual_votes.items():
                if bid not in self.blocks:
                    raise UnknownBlock(f"virtual weight target {bid} not in tree")
                credit(bid, amount)
        if (
            boosted is not None
            and boost > 0
            and boosted in self.blocks
            and self.blocks[boosted].slot == current_slot
        ):
            credit(boosted, boost)
        return weight

    def _latest_adversarial_slot(self, cache: dict[BlockId, int], bid: BlockId) -> int:
        """Largest slot of an adversarial block in the subtree of `bid`."""
        if bid in cache:
            return cache[bid]
        block = self.blocks[bid]
        best = block.slot if block.proposer.kind is ValidatorKind.ADVERSARIAL else -(10**9)
        for child in self.children.get(bid, []):
            best = max(best, self._latest_adversarial_slot(cache, child))
        cache[bid] = best
        return best

    def subtree_weight(
        self,
        root: BlockId,
        current_slot: int,
        boosted: Optional[BlockId] = None,
        boost: int = 0,
        virtual_votes: Optional[Mapping[BlockId, int]] = None,
    ) -> int:
        if root not in self.blocks:
            raise UnknownBlock(f"block {root} not in tree")
        return self._weights(current_slot, boosted, boost, virtual_votes)[root]

    def fork_choice(
        self,
        current_slot: int,
        boosted: Optional[BlockId] = None,
        boost: int = 0,
        tie_break: TieBreakPolicy = TieBreakPolicy.ADVERSARY_FAVORING,
        virtual_votes: Optional[Mapping[BlockId, int]] = None,
    ) -> BlockId:
        """Descend from genesis into the heaviest child subtree at each step.

        The weight of a subtree is the number of unique-per-voter latest
        votes landing in it, plus `boost` if it holds the `boosted` block and
        that block was proposed for `current_slot`.  `virtual_votes` lets
        callers add hypothetical weight at a block (used by the compliant-tip
        procedure); it participates in every subtree containing that block,
        exactly as real votes would.
        """
        if self.genesis is None:
            raise ChainError("empty tree")
        weight = self._weights(current_slot, boosted, boost, virtual_votes)
        adv_cache: dict[BlockId, int] = {}
        cur = self.genesis
        while True:
            kids = self.children.get(cur, [])
            if not kids:
                return cur
            if tie_break is TieBreakPolicy.ADVERSARY_FAVORING:
                cur = max(
                    kids,
                    key=lambda c: (
                        weight[c],
                        self._latest_adversarial_slot(adv_cache, c),
                        -c,
                    ),
                )
            else:
                cur = max(kids, key=lambda c: (weight[c], -c))

    def canonical_chain(
        self,
        current_slot: int,
        boosted: Optional[BlockId] = None,
        boost: int = 0,
        tie_break: TieBreakPolicy = TieBreakPolicy.ADVERSARY_FAVORING,
        virtual_votes: Optional[Mapping[BlockId, int]] = None,
    ) -> list[BlockId]:
        tip = self.fork_choice(current_slot, boosted, boost, tie_break, virtual_votes)
        return self.ancestors(tip)

def detect_reorg(
    chain_before: Iterable[BlockId], chain_after: Iterable[BlockId]
) -> list[BlockId]:
    """Blocks canonical at the earlier query but absent at the later one."""
    after = set(chain_after)
    return [b for b in chain_before if b not in after]
