"""Proof-of-Authority engine: a fixed sealer roster taking turns by slot.

The sealer for slot ``s`` is ``s mod n``. In-turn blocks carry seal weight 2,
backup (out-of-turn) blocks weight 1, so heaviest-chain fork choice prefers
the rotation. A sealer may not seal again until ``n // 2`` other canonical
blocks have followed its last one; a coalition smaller than half the roster
therefore cannot extend a chain on its own for long.

Reputation is a plain integer score per sealer. Good seals raise it,
misbehaviour lowers it with no floor, and falling below the ejection
threshold deactivates the sealer for every later slot.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Optional

from .ledger import Block, BlockHeader, ChainStore, Digest


class ReputationKind(str, enum.Enum):
    IN_TURN_SEAL = "IN_TURN_SEAL"
    OUT_OF_TURN_SEAL = "OUT_OF_TURN_SEAL"
    EQUIVOCATION = "EQUIVOCATION"
    INVALID_BLOCK = "INVALID_BLOCK"
    MISSED_SLOT = "MISSED_SLOT"


DEFAULT_DELTAS: dict[ReputationKind, int] = {
    ReputationKind.IN_TURN_SEAL: 2,
    ReputationKind.OUT_OF_TURN_SEAL: 1,
    ReputationKind.MISSED_SLOT: -1,
    ReputationKind.INVALID_BLOCK: -5,
    ReputationKind.EQUIVOCATION: -10,
}
DEFAULT_EJECTION_THRESHOLD = -10

MISBEHAVIOUR = (ReputationKind.EQUIVOCATION, ReputationKind.INVALID_BLOCK, ReputationKind.MISSED_SLOT)


@dataclass(frozen=True)
class SealerId:
    index: int
    label: str = ""

    def __post_init__(self) -> None:
        if not self.label:
            object.__setattr__(self, "label", f"sealer-{self.index}")


@dataclass(frozen=True)
class SealerRecord:
    id: SealerId
    reputation: int = 0
    active: bool = True
    # first slot for which this sealer's blocks are refused; None while active
    ejected_from: Optional[int] = None

    def active_at(self, slot: int) -> bool:
        return self.ejected_from is None or slot < self.ejected_from


@dataclass(frozen=True)
class ReputationEvent:
    kind: ReputationKind
    slot: int
    # slot during which the event was recorded; ejection bites from the next one
    recorded_at: Optional[int] = None


@dataclass
class AuthoritySet:
    sealers: list[SealerRecord]
    ejection_threshold: int = DEFAULT_EJECTION_THRESHOLD
    deltas: Mapping[ReputationKind, int] = field(default_factory=lambda: dict(DEFAULT_DELTAS))

    def __post_init__(self) -> None:
        if not self.sealers:
            raise ValueError("authority set needs at least one sealer")
        for i, rec in enumerate(self.sealers):
            if rec.id.index != i:
                raise ValueError(f"sealer at position {i} has index {rec.id.index}")

    @classmethod
    def of_size(cls, n: int, **kwargs) -> "AuthoritySet":
        return cls([SealerRecord(SealerId(i)) for i in range(n)], **kwargs)

    @property
    def n(self) -> int:
        return len(self.sealers)

    @property
    def window_size(self) -> int:
        return self.n // 2

    def __getitem__(self, index: int) -> SealerRecord:
        return self.sealers[index]

    def apply(self, index: int, event: ReputationEvent) -> SealerRecord:
        """Update sealer ``index`` in place and return its new record."""
        rec = update_reputation(self.sealers[index], event, self)
        self.sealers[index] = rec
        return rec


@dataclass(frozen=True)
class RecentSignerWindow:
    """(slot, sealer index) of the last ``n // 2`` blocks up to some parent."""

    window: tuple[tuple[int, int], ...] = ()

    def __contains__(self, sealer_index: int) -> bool:
        return any(s == sealer_index for _, s in self.window)

    def __len__(self) -> int:
        return len(self.window)

    @classmethod
    def ending_at(cls, store: ChainStore, parent: Digest, n: int) -> "RecentSignerWindow":
        size = n // 2
        entries = []
        blocks = store.blocks
        d = parent
        while len(entries) < size and d != store.genesis:
            h = blocks[d].header
            entries.append((h.slot, h.proposer))
            d = h.parent
        entries.reverse()
        return cls(tuple(entries))


class Verdict(str, enum.Enum):
    ACCEPT = "accept"
    NOT_AUTHORIZED = "not-authorized"
    SIGNED_RECENTLY = "signed-recently"
    WRONG_WEIGHT = "wrong-weight"


def in_turn_sealer(slot: int, authority_set: AuthoritySet) -> SealerId:
    return authority_set.sealers[slot % authority_set.n].id


def seal_weight(slot: int, proposer: SealerId | int, authority_set: AuthoritySet) -> int:
    index = proposer if isinstance(proposer, int) else proposer.index
    return 2 if index == slot % authority_set.n else 1


def max_byzantine(n: int) -> int:
    """Largest p with p < n/2."""
    if n < 1:
        raise ValueError("n must be positive")
    return (n + 1) // 2 - 1


def validate_seal(block: Block, authority_set: AuthoritySet, recent: RecentSignerWindow) -> Verdict:
    h = block.header
    if not 0 <= h.proposer < authority_set.n or not authority_set.sealers[h.proposer].active_at(h.slot):
        return Verdict.NOT_AUTHORIZED
    if h.proposer in recent:
        return Verdict.SIGNED_RECENTLY
    if h.seal_weight != seal_weight(h.slot, h.proposer, authority_set):
        return Verdict.WRONG_WEIGHT
    return Verdict.ACCEPT


def update_reputation(record: SealerRecord, event: ReputationEvent, authority_set: AuthoritySet) -> SealerRecord:
    reputation = record.reputation + authority_set.deltas[event.kind]
    if record.active and reputation < authority_set.ejection_threshold:
        at = event.slot if event.recorded_at is None else event.recorded_at
        return replace(record, reputation=reputation, active=False, ejected_from=at + 1)
    return replace(record, reputation=reputation)


def reputation_snapshot(authority_set: AuthoritySet) -> tuple[tuple[SealerId, int, bool], ...]:
    return tuple((r.id, r.reputation, r.active) for r in authority_set.sealers)


def snapshot_rows(authority_set: AuthoritySet) -> list[dict]:
    """JSON-ready form of :func:`reputation_snapshot`."""
    return [
        {"active": active, "index": sid.index, "label": sid.label, "reputation": rep}
        for sid, rep, active in reputation_snapshot(authority_set)
    ]


def backup_delay(sealer_index: int, n: int, slot_duration: int) -> int:
    """Wait before an out-of-turn sealer may step in, in ms after slot start."""
    return slot_duration // 2 + (sealer_index % n) * slot_duration // (4 * n)


def can_seal(store: ChainStore, tip: Digest, sealer: int, slot: int, authority_set: AuthoritySet) -> bool:
    if not authority_set.sealers[sealer].active_at(slot):
        return False
    if store.blocks[tip].header.slot >= slot:
        return False
    return sealer not in RecentSignerWindow.ending_at(store, tip, authority_set.n)


def make_block(store: ChainStore, tip: Digest, slot: int, sealer: int, authority_set: AuthoritySet, payload: int) -> Block:
    parent = store.blocks[tip].header
    return Block.seal(
        BlockHeader(
            parent=tip,
            height=parent.height + 1,
            slot=slot,
            proposer=sealer,
            seal_weight=seal_weight(slot, sealer, authority_set),
            payload_count=payload,
        )
    )


def poa_step(
    node,
    slot: int,
    authority_set: AuthoritySet,
    *,
    backup: bool = False,
    payload: int = 100,
) -> Optional[Block]:
    """Block the node should seal now, if any.

    Called with ``backup=False`` at slot start and ``backup=True`` once the
    out-of-turn delay has elapsed. ``node`` needs ``store``, ``sealers``
    (controlled sealer indices) and ``seen_slots`` (slots for which a block
    was already observed).
    """
    store: ChainStore = node.store
    tip = store.fork_choice()
    turn = slot % authority_set.n
    if not backup:
        if turn in node.sealers and can_seal(store, tip, turn, slot, authority_set):
            return make_block(store, tip, slot, turn, authority_set, payload)
        return None
    if slot in node.seen_slots:
        return None
    for sealer in backup_order(node.sealers, turn):
        if can_seal(store, tip, sealer, slot, authority_set):
            return make_block(store, tip, slot, sealer, authority_set, payload)
    return None


def backup_order(sealers: Iterable[int], turn: int) -> list[int]:
    return sorted(s for s in sealers if s != turn)
