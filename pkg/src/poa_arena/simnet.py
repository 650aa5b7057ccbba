"""Deterministic discrete-event network of consensus nodes.

One global queue ordered by (time, seq) drives every node. Links add a
latency (base plus uniform jitter), may drop messages at random, and are cut
between partition groups for a time window. A node that receives a block
whose parent it lacks drops it and pulls the missing ancestry from the
sender, retrying a bounded number of times.

Byzantine nodes:

* EQUIVOCATOR nodes form one colluding coalition. When a member is in turn
  it seals one block per audience (the honest nodes split in two halves),
  each extending the chain that audience has seen.
* CENSOR seals like an honest node but always with an empty payload.
* SYBIL_CLONER runs several sealer identities from one physical node.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

from . import poa
from .baselines import DifficultyParam, MinerSpec, StakeTable, pos_select_leader, pos_step, pow_block, pow_step
from .events import WORLD, EventKind, EventQueue, SimEvent
from .ledger import Block, ChainStore, Digest
from .poa import AuthoritySet, RecentSignerWindow, ReputationEvent, ReputationKind, Verdict
from .rng import MASK64, DeterministicRng, derive_seed, splitmix64

MAX_FETCH_RETRIES = 10

# sub-stream purposes under the scenario seed
NETWORK_STREAM = 1
LOTTERY_STREAM = 2
NODE_STREAM_BASE = 1000


class Protocol(str, enum.Enum):
    POA = "POA"
    POW = "POW"
    POS = "POS"


class BehaviorKind(str, enum.Enum):
    HONEST = "HONEST"
    EQUIVOCATOR = "EQUIVOCATOR"
    CENSOR = "CENSOR"
    SYBIL_CLONER = "SYBIL_CLONER"


@dataclass(frozen=True)
class NodeBehavior:
    kind: BehaviorKind = BehaviorKind.HONEST
    controlled: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", BehaviorKind(self.kind))
        object.__setattr__(self, "controlled", tuple(sorted(self.controlled)))
        if self.kind is BehaviorKind.SYBIL_CLONER:
            if len(set(self.controlled)) < 2:
                raise ValueError("SYBIL_CLONER must control at least two sealer identities")
        elif self.controlled:
            raise ValueError(f"{self.kind.value} does not take controlled identities")


HONEST = NodeBehavior()


@dataclass(frozen=True)
class LinkModel:
    base_latency: int = 50
    jitter: int = 10
    drop_probability: float = 0.0

    def __post_init__(self) -> None:
        if self.base_latency < 0 or self.jitter < 0:
            raise ValueError("latency and jitter must be non-negative")
        if not 0.0 <= self.drop_probability < 1.0:
            raise ValueError("drop_probability must lie in [0, 1)")

    @property
    def max_latency(self) -> int:
        return self.base_latency + self.jitter

    def sample_latency(self, rng: DeterministicRng) -> int:
        if not self.jitter:
            return self.base_latency
        return max(0, round(self.base_latency + rng.uniform(-self.jitter, self.jitter)))


@dataclass(frozen=True)
class PartitionSpec:
    groups: tuple[frozenset[int], ...]
    start: int
    until: int
    _group_of: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        groups = tuple(frozenset(g) for g in self.groups)
        object.__setattr__(self, "groups", groups)
        owner = {}
        for i, g in enumerate(groups):
            for node in g:
                if node in owner:
                    raise ValueError(f"node {node} appears in two partition groups")
                owner[node] = i
        object.__setattr__(self, "_group_of", owner)
        if self.until < self.start:
            raise ValueError("partition ends before it starts")

    def separates(self, a: int, b: int, t: int) -> bool:
        if not self.start <= t < self.until:
            return False
        ga = self._group_of.get(a)
        gb = self._group_of.get(b)
        # nodes outside every group are unaffected
        return ga is not None and gb is not None and ga != gb


@dataclass(frozen=True)
class NodeSpec:
    behavior: NodeBehavior = HONEST
    sealer: Optional[int] = None
    hashrate: float = 1.0
    stake: float = 1.0


class Node:
    def __init__(self, node_id: int, spec: NodeSpec, sealers: tuple[int, ...], rng: DeterministicRng) -> None:
        self.id = node_id
        self.behavior = spec.behavior
        self.spec = spec
        self.sealers = sealers
        self.rng = rng
        self.online = True
        self.store = ChainStore()
        self.canon: list[Digest] = [self.store.genesis]
        # first digest each height was finalized with; never revised
        self.final: dict[int, Digest] = {}
        self.final_height = 0
        self.final_delays: list[int] = []
        self.max_reorg = 0
        self.observed: dict[tuple[int, int], Digest] = {}
        self.seen_slots: set[int] = set()
        self.pending_fetch: set[Digest] = set()
        self.attempt = 0
        self.rejected = 0

    @property
    def honest(self) -> bool:
        return self.behavior.kind is BehaviorKind.HONEST

    def __repr__(self) -> str:
        return f"Node({self.id}, {self.behavior.kind.value}, height={len(self.canon) - 1})"


class Coalition:
    """Colluding equivocators sharing one view of the chain per audience."""

    def __init__(self, members: Sequence[int], node_count: int) -> None:
        self.members = tuple(members)
        others = [i for i in range(node_count) if i not in self.members]
        half = (len(others) + 1) // 2
        self.audiences: tuple[tuple[int, ...], tuple[int, ...]] = (tuple(others[:half]), tuple(others[half:]))
        self.audience_of = {n: h for h, aud in enumerate(self.audiences) for n in aud}
        self.views = (ChainStore(), ChainStore())

    def absorb(self, view: int, block: Block, source: ChainStore) -> None:
        store = self.views[view]
        for b in source.missing_segment(block.digest, store.blocks):
            store.extend(b)


class World:
    """A full simulation instance; owns the queue, the nodes and all counters."""

    def __init__(
        self,
        protocol: Protocol | str,
        specs: Sequence[NodeSpec],
        *,
        link: LinkModel = LinkModel(),
        partitions: Iterable[PartitionSpec] = (),
        seed: int = 0,
        slot_duration: int = 1000,
        difficulty: Optional[float] = None,
        finality_depth: int = 6,
        payload: int = 100,
        ejection_threshold: int = poa.DEFAULT_EJECTION_THRESHOLD,
        reputation_deltas=None,
        log_sink: Optional[Callable[[str], None]] = None,
    ) -> None:
        self.protocol = Protocol(protocol)
        self.link = link
        self.partitions = tuple(partitions)
        self.seed = seed & MASK64
        self.slot_duration = slot_duration
        self.finality_depth = finality_depth
        self.payload = payload
        self.queue = EventQueue()
        self.net_rng = DeterministicRng(derive_seed(self.seed, NETWORK_STREAM))
        self.lottery_rng = DeterministicRng(derive_seed(self.seed, LOTTERY_STREAM))
        self.log_sink = log_sink
        self.log_digest = 0
        self.dispatched = 0

        self.messages_sent = 0
        self.delivered = 0
        self.partition_dropped = 0
        self.random_dropped = 0

        self.created: dict[Digest, tuple[int, Block]] = {}
        self.proposals: set[tuple[int, int]] = set()
        self.reputation_trace: list[tuple[int, int, str, int, int]] = []
        self._equivocations: set[tuple[int, int]] = set()
        self._invalid: set[Digest] = set()

        self.nodes: list[Node] = []
        for i, spec in enumerate(specs):
            if spec.behavior.kind is BehaviorKind.SYBIL_CLONER:
                sealers = spec.behavior.controlled
            elif spec.sealer is not None:
                sealers = (spec.sealer,)
            else:
                sealers = ()
            rng = DeterministicRng(derive_seed(self.seed, NODE_STREAM_BASE + i))
            self.nodes.append(Node(i, spec, sealers, rng))

        self.authority: Optional[AuthoritySet] = None
        self.stakes: Optional[StakeTable] = None
        self.miners: list[MinerSpec] = []
        self.difficulty: Optional[DifficultyParam] = None
        if self.protocol is Protocol.POA:
            n = sum(len(node.sealers) for node in self.nodes)
            kwargs = {"ejection_threshold": ejection_threshold}
            if reputation_deltas is not None:
                kwargs["deltas"] = dict(reputation_deltas)
            self.authority = AuthoritySet.of_size(n, **kwargs)
            owned = sorted(s for node in self.nodes for s in node.sealers)
            if owned != list(range(n)):
                raise ValueError(f"sealer identities must be exactly 0..{n - 1}, got {owned}")
        elif self.protocol is Protocol.POS:
            self.stakes = StakeTable(tuple((i, s.stake) for i, s in enumerate(specs)))
        else:
            self.miners = [MinerSpec(i, s.hashrate) for i, s in enumerate(specs)]
            if difficulty is None:
                difficulty = sum(m.hashrate for m in self.miners) * slot_duration
            self.difficulty = DifficultyParam(difficulty)

        members = [n.id for n in self.nodes if n.behavior.kind is BehaviorKind.EQUIVOCATOR]
        self.coalition = Coalition(members, len(self.nodes)) if members else None
        self._started = False

    # -- clock ---------------------------------------------------------------

    @property
    def now(self) -> int:
        return self.queue.now

    def current_slot(self) -> int:
        return self.queue.now // self.slot_duration

    def start(self) -> None:
        if self._started:
            return
        self._started = True
        if self.protocol is Protocol.POW:
            for node in self.nodes:
                self._mine(node)
        else:
            self.queue.push(self.slot_duration, WORLD, EventKind.SLOT_TICK, 1)

    def crash(self, node_id: int) -> None:
        """Take a node offline: it neither acts nor receives from now on."""
        self.nodes[node_id].online = False

    def run_until(self, t_end: int) -> "World":
        self.start()
        q = self.queue
        while q._heap and q._heap[0][0] <= t_end:
            ev = q.pop()
            self._log(ev)
            self._dispatch(ev)
        if q.now < t_end:
            q.now = t_end
        return self

    def _log(self, ev: SimEvent) -> None:
        digest = 0
        if ev.kind is EventKind.BLOCK_ARRIVAL:
            digest = ev.payload[0].digest
        h = self.log_digest
        for w in (ev.at, ev.seq, ev.target & MASK64, int(ev.kind), digest):
            h = splitmix64(h ^ w)
        self.log_digest = h
        self.dispatched += 1
        if self.log_sink is not None:
            self.log_sink(
                json.dumps(
                    {"at": ev.at, "digest": f"{digest:016x}", "kind": ev.kind.name, "seq": ev.seq, "target": ev.target},
                    sort_keys=True,
                )
            )

    # -- dispatch ------------------------------------------------------------

    def _dispatch(self, ev: SimEvent) -> None:
        kind = ev.kind
        if kind is EventKind.BLOCK_ARRIVAL:
            block, sender, attempt = ev.payload
            self._receive(self.nodes[ev.target], block, sender, attempt)
        elif kind is EventKind.SLOT_TICK:
            self._tick(ev.payload)
        elif kind is EventKind.MINING_COMPLETE:
            node = self.nodes[ev.target]
            if node.online and ev.payload == node.attempt:
                self._publish(node, pow_block(node, self.now, self._payload(node)))
        else:
            self._timer(self.nodes[ev.target], ev.payload)

    def _payload(self, node: Node) -> int:
        return 0 if node.behavior.kind is BehaviorKind.CENSOR else self.payload

    def _tick(self, slot: int) -> None:
        self.queue.push((slot + 1) * self.slot_duration, WORLD, EventKind.SLOT_TICK, slot + 1)
        if self.protocol is Protocol.POA:
            prev = slot - 1
            if prev >= 1:
                turn = prev % self.authority.n
                if (turn, prev) not in self.proposals:
                    self._reputation(turn, ReputationKind.MISSED_SLOT, prev)
            for node in self.nodes:
                if node.online:
                    self.behave(node, slot)
        else:
            for node in self.nodes:
                if node.online:
                    block = pos_step(node, slot, self.stakes, self.lottery_rng, self._payload(node))
                    if block is not None:
                        self._publish(node, block)

    def behave(self, node: Node, slot: int) -> None:
        """Slot-start action of a PoA node according to its behaviour."""
        auth = self.authority
        if node.behavior.kind is BehaviorKind.EQUIVOCATOR:
            if slot % auth.n in node.sealers:
                self._equivocate(node, slot)
            return
        block = poa.poa_step(node, slot, auth, payload=self._payload(node))
        if block is not None:
            self._publish(node, block)
            return
        # arm the backup timer only if some identity could step in right now
        turn = slot % auth.n
        store = node.store
        tip = store.fork_choice()
        candidates = [s for s in poa.backup_order(node.sealers, turn) if poa.can_seal(store, tip, s, slot, auth)]
        if candidates:
            delay = min(poa.backup_delay(s, auth.n, self.slot_duration) for s in candidates)
            self.queue.push(self.now + delay, node.id, EventKind.TIMER, ("backup", slot))

    def _equivocate(self, node: Node, slot: int) -> None:
        co = self.coalition
        auth = self.authority
        sealer = node.sealers[0]
        for h, view in enumerate(co.views):
            tip = view.fork_choice()
            if not poa.can_seal(view, tip, sealer, slot, auth):
                continue
            block = poa.make_block(view, tip, slot, sealer, auth, self.payload - h)
            view.extend(block)
            self._record_creation(block)
            for m in co.members:
                member = self.nodes[m]
                for b in view.missing_segment(block.digest, member.store.blocks):
                    member.store.extend(b)
                member.seen_slots.add(slot)
                self._after_insert(member)
            for dst in co.audiences[h]:
                self._transmit(node.id, dst, (block,), 0)

    def _timer(self, node: Node, tag: tuple) -> None:
        if not node.online:
            return
        if tag[0] == "backup":
            slot = tag[1]
            if slot != self.current_slot():
                return
            block = poa.poa_step(node, slot, self.authority, backup=True, payload=self._payload(node))
            if block is not None:
                self._publish(node, block)
        else:
            _, block, sender, attempt = tag
            if block.digest in node.store.blocks or attempt > MAX_FETCH_RETRIES:
                node.pending_fetch.discard(block.digest)
                return
            source = self.nodes[sender].store
            if block.digest in source.blocks:
                self._transmit(sender, node.id, tuple(source.missing_segment(block.digest, node.store.blocks)), attempt)
            retry_at = self.now + self.link.max_latency + max(1, self.link.base_latency)
            self.queue.push(retry_at, node.id, EventKind.TIMER, ("fetch", block, sender, attempt + 1))

    # -- network -------------------------------------------------------------

    def separated(self, a: int, b: int, t: int) -> bool:
        return any(p.separates(a, b, t) for p in self.partitions)

    def _transmit(self, src: int, dst: int, blocks: tuple[Block, ...], attempt: int) -> None:
        self.messages_sent += 1
        now = self.queue.now
        if self.partitions and self.separated(src, dst, now):
            self.partition_dropped += 1
            return
        link = self.link
        if link.drop_probability and self.net_rng.random() < link.drop_probability:
            self.random_dropped += 1
            return
        self.delivered += 1
        at = now + link.sample_latency(self.net_rng)
        for b in blocks:
            self.queue.push(at, dst, EventKind.BLOCK_ARRIVAL, (b, src, attempt))

    def broadcast(self, src: int, block: Block, recipients: Optional[Iterable[int]] = None) -> None:
        targets = range(len(self.nodes)) if recipients is None else sorted(recipients)
        for dst in targets:
            if dst != src:
                self._transmit(src, dst, (block,), 0)

    # -- block handling ------------------------------------------------------

    def _record_creation(self, block: Block) -> None:
        h = block.header
        self.created[block.digest] = (self.queue.now, block)
        if self.protocol is Protocol.POA and (h.proposer, h.slot) not in self.proposals:
            self.proposals.add((h.proposer, h.slot))
            kind = ReputationKind.IN_TURN_SEAL if h.seal_weight == 2 else ReputationKind.OUT_OF_TURN_SEAL
            self._reputation(h.proposer, kind, h.slot)

    def _publish(self, node: Node, block: Block) -> None:
        self._record_creation(block)
        node.store.extend(block)
        node.seen_slots.add(block.header.slot)
        self._after_insert(node)
        self.broadcast(node.id, block)

    def _receive(self, node: Node, block: Block, sender: int, attempt: int) -> None:
        if not node.online:
            return
        store = node.store
        d = block.digest
        if d in store.blocks:
            return
        h = block.header
        poa_mode = self.protocol is Protocol.POA
        co = self.coalition
        member = co is not None and node.id in co.members
        if poa_mode and not member:
            key = (h.proposer, h.slot)
            seen = node.observed.get(key)
            if seen is None:
                node.observed[key] = d
            elif seen != d and key not in self._equivocations:
                self._equivocations.add(key)
                self._reputation(h.proposer, ReputationKind.EQUIVOCATION, h.slot)
        parent = store.blocks.get(h.parent)
        if parent is None:
            if attempt < MAX_FETCH_RETRIES and d not in node.pending_fetch:
                node.pending_fetch.add(d)
                self.queue.push(
                    self.now + self.link.base_latency, node.id, EventKind.TIMER, ("fetch", block, sender, attempt + 1)
                )
            return
        if not self._valid(store, parent, block):
            node.rejected += 1
            if poa_mode and not member and d not in self._invalid and 0 <= h.proposer < self.authority.n:
                self._invalid.add(d)
                self._reputation(h.proposer, ReputationKind.INVALID_BLOCK, h.slot)
            return
        store.extend(block)
        node.pending_fetch.discard(d)
        if poa_mode:
            node.seen_slots.add(h.slot)
        if member and sender not in co.members:
            # an honest broadcast reaches every audience it is not cut off from
            for view, audience in enumerate(co.audiences):
                if sender in audience or any(not self.separated(sender, a, self.now) for a in audience):
                    co.absorb(view, block, store)
        self._after_insert(node)

    def _valid(self, store: ChainStore, parent: Block, block: Block) -> bool:
        h = block.header
        if h.height != parent.header.height + 1:
            return False
        if self.protocol is Protocol.POA:
            if h.slot <= parent.header.slot:
                return False
            auth = self.authority
            window = RecentSignerWindow.ending_at(store, h.parent, auth.n)
            return poa.validate_seal(block, auth, window) is Verdict.ACCEPT
        if self.protocol is Protocol.POS:
            if h.slot <= parent.header.slot or h.seal_weight != 1:
                return False
            return pos_select_leader(self.lottery_rng, h.slot, self.stakes) == h.proposer
        return h.seal_weight == 1

    def _after_insert(self, node: Node) -> None:
        tip = node.store.fork_choice()
        if tip != node.canon[-1]:
            self._retip(node, tip)
            if self.protocol is Protocol.POW:
                self._mine(node)

    def _retip(self, node: Node, tip: Digest) -> None:
        canon = node.canon
        blocks = node.store.blocks
        path = []
        d = tip
        while True:
            hdr = blocks[d].header
            hgt = hdr.height
            if hgt < len(canon) and canon[hgt] == d:
                break
            path.append(d)
            d = hdr.parent
        depth = len(canon) - 1 - hgt
        if depth > node.max_reorg:
            node.max_reorg = depth
        del canon[hgt + 1 :]
        path.reverse()
        canon.extend(path)
        final_to = len(canon) - 1 - self.finality_depth
        now = self.queue.now
        while node.final_height < final_to:
            node.final_height += 1
            fd = canon[node.final_height]
            node.final.setdefault(node.final_height, fd)
            node.final_delays.append(now - self.created[fd][0])

    def _mine(self, node: Node) -> None:
        ev = pow_step(node, node.rng, self.miners[node.id], self.difficulty, self.queue.now, self.queue.next_seq())
        self.queue.schedule(ev)

    def _reputation(self, sealer: int, kind: ReputationKind, slot: int) -> None:
        before = self.authority.sealers[sealer].reputation
        rec = self.authority.apply(sealer, ReputationEvent(kind, slot, recorded_at=self.current_slot()))
        self.reputation_trace.append((self.queue.now, sealer, kind.value, rec.reputation - before, rec.reputation))

    # -- visibility ----------------------------------------------------------

    def reputation_snapshot(self, requester: int):
        """Reputation table as seen by node ``requester``: the same global view for all."""
        if not 0 <= requester < len(self.nodes):
            raise IndexError(requester)
        return poa.reputation_snapshot(self.authority)
