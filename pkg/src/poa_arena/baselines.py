"""PoW and PoS baseline engines.

PoW is an exponential race: a miner with hashrate ``h`` facing difficulty
``D`` (expected hashes per block) finishes after ``-ln(u) * D / h`` ms.
PoS picks one leader per slot with probability proportional to stake, from
a per-slot stream every node can recompute on its own.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .events import EventKind, SimEvent
from .ledger import Block, BlockHeader
from .rng import DeterministicRng, splitmix64


class UnknownNode(KeyError):
    pass


@dataclass(frozen=True)
class MinerSpec:
    id: int
    hashrate: float

    def __post_init__(self) -> None:
        if not self.hashrate > 0:
            raise ValueError(f"miner {self.id}: hashrate must be positive")


@dataclass(frozen=True)
class DifficultyParam:
    difficulty: float

    def __post_init__(self) -> None:
        if not self.difficulty > 0:
            raise ValueError("difficulty must be positive")


@dataclass(frozen=True)
class StakeTable:
    entries: tuple[tuple[int, float], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "entries", tuple((int(i), float(s)) for i, s in self.entries))
        if not self.entries:
            raise ValueError("stake table is empty")
        for node, stake in self.entries:
            if not stake > 0:
                raise ValueError(f"node {node}: stake must be positive")

    @classmethod
    def from_stakes(cls, stakes: Sequence[float]) -> "StakeTable":
        return cls(tuple(enumerate(stakes)))

    @property
    def total(self) -> float:
        return math.fsum(s for _, s in self.entries)


def exponential_delay(u: float, hashrate: float, difficulty: float) -> float:
    return -math.log(u) * difficulty / hashrate


def pow_time_to_block(rng: DeterministicRng, miner: MinerSpec, diff: DifficultyParam) -> float:
    return exponential_delay(rng.random_open_closed(), miner.hashrate, diff.difficulty)


def selection_probability(i: int, stakes: StakeTable) -> float:
    for node, stake in stakes.entries:
        if node == i:
            return stake / stakes.total
    raise UnknownNode(i)


def pos_select_leader(rng: DeterministicRng, slot: int, stakes: StakeTable) -> int:
    u = DeterministicRng(splitmix64(rng.seed ^ slot)).random()
    total = stakes.total
    acc = 0.0
    for node, stake in stakes.entries:
        acc += stake / total
        if acc > u:
            return node
    # float round-off can leave the running sum a hair under 1.0
    return stakes.entries[-1][0]


def pow_step(node, rng: DeterministicRng, miner: MinerSpec, diff: DifficultyParam, now: int, seq: int) -> SimEvent:
    """Start a fresh attempt on the node's current tip.

    Bumping ``node.attempt`` invalidates any completion already queued, which
    is how a tip change cancels and resamples the race.
    """
    node.attempt += 1
    delay = pow_time_to_block(rng, miner, diff)
    return SimEvent(now + round(delay), seq, node.id, EventKind.MINING_COMPLETE, node.attempt)


def pow_block(node, now: int, payload: int) -> Block:
    store = node.store
    tip = store.fork_choice()
    return Block.seal(
        BlockHeader(
            parent=tip,
            height=store.blocks[tip].header.height + 1,
            slot=now,
            proposer=node.id,
            seal_weight=1,
            payload_count=payload,
        )
    )


def pos_step(node, slot: int, stakes: StakeTable, rng: DeterministicRng, payload: int = 100) -> Optional[Block]:
    if pos_select_leader(rng, slot, stakes) != node.id:
        return None
    store = node.store
    tip = store.fork_choice()
    parent = store.blocks[tip].header
    if parent.slot >= slot:
        return None
    return Block.seal(
        BlockHeader(
            parent=tip,
            height=parent.height + 1,
            slot=slot,
            proposer=node.id,
            seal_weight=1,
            payload_count=payload,
        )
    )
