"""Block and chain data model shared by the PoA, PoW and PoS engines.

Blocks are linked by 64-bit digests (a SplitMix64 fold of the header words).
:class:`ChainStore` keeps the block tree, its tips, cumulative seal weight per
block, and the canonical tip chosen by heaviest-chain fork choice.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .rng import fold64

Digest = int


@dataclass(frozen=True, slots=True)
class BlockHeader:
    parent: Digest
    height: int
    slot: int
    proposer: int
    seal_weight: int = 1
    payload_count: int = 0

    def words(self) -> tuple[int, int, int, int, int, int]:
        return (
            self.parent,
            self.height,
            self.slot,
            self.proposer,
            self.seal_weight,
            self.payload_count,
        )


def hash_block(header: BlockHeader) -> Digest:
    """Digest of a header: fold of its six fields, in declaration order."""
    return fold64(header.words())


@dataclass(frozen=True, slots=True)
class Block:
    header: BlockHeader
    digest: Digest

    @classmethod
    def seal(cls, header: BlockHeader) -> "Block":
        return cls(header, hash_block(header))

    # shorthands used all over the simulator
    @property
    def parent(self) -> Digest:
        return self.header.parent

    @property
    def height(self) -> int:
        return self.header.height

    @property
    def slot(self) -> int:
        return self.header.slot

    @property
    def proposer(self) -> int:
        return self.header.proposer

    def __repr__(self) -> str:
        h = self.header
        return (
            f"Block({self.digest:016x} h={h.height} slot={h.slot} "
            f"by={h.proposer} w={h.seal_weight} tx={h.payload_count})"
        )


GENESIS_HEADER = BlockHeader(parent=0, height=0, slot=0, proposer=0, seal_weight=0, payload_count=0)
GENESIS = Block.seal(GENESIS_HEADER)


class InsertError(ValueError):
    """A block was refused by :meth:`ChainStore.extend`."""


class UnknownParent(InsertError):
    pass


class BadHeight(InsertError):
    pass


class BadDigest(InsertError):
    pass


class Inserted(enum.Enum):
    NEW = "new"
    DUPLICATE = "duplicate"


class ChainStore:
    """Block tree rooted at genesis.

    Orphans are refused rather than buffered. Chain weight of a block is the
    sum of ``seal_weight`` from genesis to it; the canonical tip maximizes
    (weight, height, -digest), which is maintained incrementally because the
    maximum over all stored blocks is always a tip.
    """

    def __init__(self, genesis: Block = GENESIS) -> None:
        self.genesis: Digest = genesis.digest
        self.blocks: dict[Digest, Block] = {genesis.digest: genesis}
        self.children: dict[Digest, list[Digest]] = {genesis.digest: []}
        self.tips: set[Digest] = {genesis.digest}
        self.weight: dict[Digest, int] = {genesis.digest: 0}
        self._best: Digest = genesis.digest
        self._best_key = (0, 0, -genesis.digest)

    def __len__(self) -> int:
        return len(self.blocks)

    def __contains__(self, digest: Digest) -> bool:
        return digest in self.blocks

    def get(self, digest: Digest) -> Block:
        return self.blocks[digest]

    def extend(self, block: Block) -> Inserted:
        header = block.header
        if block.digest in self.blocks:
            return Inserted.DUPLICATE
        if block.digest != hash_block(header):
            raise BadDigest(f"cached digest {block.digest:016x} does not match header")
        parent = self.blocks.get(header.parent)
        if parent is None:
            raise UnknownParent(f"parent {header.parent:016x} not stored")
        if header.height != parent.header.height + 1:
            raise BadHeight(f"height {header.height} after parent height {parent.header.height}")

        d = block.digest
        self.blocks[d] = block
        self.children[d] = []
        self.children[header.parent].append(d)
        self.tips.discard(header.parent)
        self.tips.add(d)
        w = self.weight[header.parent] + header.seal_weight
        self.weight[d] = w
        key = (w, header.height, -d)
        if key > self._best_key:
            self._best_key = key
            self._best = d
        return Inserted.NEW

    def fork_choice(self) -> Digest:
        """Canonical tip: heaviest chain, then greater height, then smaller digest."""
        return self._best

    def chain_weight(self, digest: Digest) -> int:
        return self.weight[digest]

    def ancestors(self, digest: Digest):
        """Yield blocks from ``digest`` back to (and including) genesis."""
        blocks = self.blocks
        while True:
            b = blocks[digest]
            yield b
            if digest == self.genesis:
                return
            digest = b.header.parent

    def canonical_chain(self) -> list[Digest]:
        """Digests of the canonical chain, genesis first."""
        path = [b.digest for b in self.ancestors(self._best)]
        path.reverse()
        return path

    def fork_count(self) -> int:
        """Stored blocks that are not on the canonical chain."""
        return len(self.blocks) - (self.blocks[self._best].header.height + 1)

    def missing_segment(self, digest: Digest, known) -> list[Block]:
        """Ancestors of ``digest`` (inclusive) absent from ``known``, oldest first."""
        out = []
        for b in self.ancestors(digest):
            if b.digest in known:
                break
            out.append(b)
        out.reverse()
        return out
