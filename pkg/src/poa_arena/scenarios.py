"""Experiment configs, metric extraction, safety checking and attack presets."""

from __future__ import annotations

import concurrent.futures
import csv
import io
import json
import math
import os
import statistics
from dataclasses import asdict, dataclass, field, replace
from itertools import combinations
from typing import Any, Iterable, Mapping, Optional, Sequence

from . import poa
from .poa import ReputationKind, max_byzantine
from .simnet import BehaviorKind, LinkModel, NodeBehavior, NodeSpec, PartitionSpec, Protocol, World


class ConfigError(ValueError):
    """Invalid scenario configuration; the message names the offending key."""


@dataclass(frozen=True)
class FinalityRule:
    k: int = 6

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("finality depth must be positive")

    def finalized_height(self, tip_height: int) -> int:
        return tip_height - self.k


@dataclass(frozen=True)
class Role:
    sealer: Optional[int] = None
    hashrate: Optional[float] = None
    stake: Optional[float] = None


@dataclass(frozen=True)
class ScenarioConfig:
    protocol: Protocol = Protocol.POA
    node_count: int = 4
    roles: tuple[Role, ...] = ()
    behaviors: tuple[NodeBehavior, ...] = ()
    slot_duration: int = 1000
    difficulty: Optional[float] = None
    link: LinkModel = LinkModel()
    partitions: tuple[PartitionSpec, ...] = ()
    duration: int = 100_000
    seed: int = 0
    finality_depth: int = 6
    reputation_deltas: Mapping[str, int] = field(default_factory=lambda: {k.value: v for k, v in poa.DEFAULT_DELTAS.items()})
    ejection_threshold: int = poa.DEFAULT_EJECTION_THRESHOLD
    fee_per_payload: float = 0.0
    payload_per_block: int = 100
    name: Optional[str] = None

    def with_seed(self, seed: int) -> "ScenarioConfig":
        return replace(self, seed=seed & 0xFFFFFFFFFFFFFFFF)

    @property
    def slots(self) -> int:
        return self.duration // self.slot_duration

    def node_specs(self) -> list[NodeSpec]:
        validate(self)
        specs = []
        for i in range(self.node_count):
            role = self.roles[i] if self.roles else Role()
            behavior = self.behaviors[i] if self.behaviors else NodeBehavior()
            if self.protocol is Protocol.POA:
                sealer = role.sealer
                if not self.roles and behavior.kind is not BehaviorKind.SYBIL_CLONER:
                    sealer = i
                specs.append(NodeSpec(behavior=behavior, sealer=sealer))
            elif self.protocol is Protocol.POW:
                specs.append(NodeSpec(behavior=behavior, hashrate=1.0 if role.hashrate is None else role.hashrate))
            else:
                specs.append(NodeSpec(behavior=behavior, stake=1.0 if role.stake is None else role.stake))
        return specs

    def build(self, log_sink=None) -> World:
        return World(
            self.protocol,
            self.node_specs(),
            link=self.link,
            partitions=self.partitions,
            seed=self.seed,
            slot_duration=self.slot_duration,
            difficulty=self.difficulty,
            finality_depth=self.finality_depth,
            payload=self.payload_per_block,
            ejection_threshold=self.ejection_threshold,
            reputation_deltas={ReputationKind(k): v for k, v in self.reputation_deltas.items()},
            log_sink=log_sink,
        )

    def to_dict(self) -> dict:
        return {
            "behaviors": [
                {"kind": b.kind.value, **({"controlled": list(b.controlled)} if b.controlled else {})} for b in self.behaviors
            ],
            "difficulty": self.difficulty,
            "duration": self.duration,
            "ejection_threshold": self.ejection_threshold,
            "fee_per_payload": self.fee_per_payload,
            "finality_depth": self.finality_depth,
            "link": asdict(self.link),
            "name": self.name,
            "node_count": self.node_count,
            "partitions": [
                {"from": p.start, "groups": [sorted(g) for g in p.groups], "until": p.until} for p in self.partitions
            ],
            "payload_per_block": self.payload_per_block,
            "protocol": self.protocol.value,
            "reputation_deltas": dict(sorted(self.reputation_deltas.items())),
            "roles": [{k: v for k, v in asdict(r).items() if v is not None} for r in self.roles],
            "seed": self.seed,
            "slot_duration": self.slot_duration,
        }


# -- JSON ingestion -----------------------------------------------------------

_TOP_KEYS = {
    "protocol", "node_count", "roles", "behaviors", "slot_duration", "difficulty", "link", "partitions",
    "duration", "seed", "finality_depth", "reputation_deltas", "ejection_threshold", "fee_per_payload",
    "payload_per_block", "name",
}
_ROLE_KEYS = {"sealer", "hashrate", "stake"}
_BEHAVIOR_KEYS = {"kind", "controlled"}
_LINK_KEYS = {"base_latency", "jitter", "drop_probability"}
_PARTITION_KEYS = {"groups", "from", "until"}


def _reject_unknown(obj: Any, allowed: set, where: str) -> None:
    if not isinstance(obj, dict):
        raise ConfigError(f"{where}: expected an object")
    for key in obj:
        if key not in allowed:
            raise ConfigError(f"{where}.{key}: unknown key" if where else f"{key}: unknown key")


def _int(value: Any, where: str, *, minimum: Optional[int] = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{where}: expected an integer")
    if minimum is not None and value < minimum:
        raise ConfigError(f"{where}: must be >= {minimum}")
    return value


def _num(value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(f"{where}: expected a finite number")
    return float(value)


def _list(value: Any, where: str) -> list:
    if not isinstance(value, list):
        raise ConfigError(f"{where}: expected a list")
    return value


def config_from_dict(doc: Mapping[str, Any]) -> ScenarioConfig:
    """Parse a JSON document into a validated :class:`ScenarioConfig`.

    Unknown keys anywhere are rejected. Missing keys take the dataclass
    defaults.
    """
    _reject_unknown(doc, _TOP_KEYS, "")
    kw: dict[str, Any] = {}
    if "protocol" in doc:
        try:
            kw["protocol"] = Protocol(doc["protocol"])
        except ValueError:
            raise ConfigError(f"protocol: must be one of POA, POW, POS, got {doc['protocol']!r}") from None
    for key, minimum in (("node_count", 1), ("slot_duration", 1), ("duration", 0), ("finality_depth", 1), ("payload_per_block", 0)):
        if key in doc:
            kw[key] = _int(doc[key], key, minimum=minimum)
    if "seed" in doc:
        kw["seed"] = _int(doc["seed"], "seed", minimum=0) & 0xFFFFFFFFFFFFFFFF
    if "ejection_threshold" in doc:
        kw["ejection_threshold"] = _int(doc["ejection_threshold"], "ejection_threshold")
    if doc.get("difficulty") is not None:
        kw["difficulty"] = _num(doc["difficulty"], "difficulty")
    if "fee_per_payload" in doc:
        kw["fee_per_payload"] = _num(doc["fee_per_payload"], "fee_per_payload")
    if "name" in doc and doc["name"] is not None:
        if not isinstance(doc["name"], str):
            raise ConfigError("name: expected a string")
        kw["name"] = doc["name"]

    roles = []
    for i, r in enumerate(_list(doc.get("roles", []), "roles")):
        where = f"roles[{i}]"
        _reject_unknown(r, _ROLE_KEYS, where)
        roles.append(
            Role(
                sealer=None if r.get("sealer") is None else _int(r["sealer"], f"{where}.sealer", minimum=0),
                hashrate=None if r.get("hashrate") is None else _num(r["hashrate"], f"{where}.hashrate"),
                stake=None if r.get("stake") is None else _num(r["stake"], f"{where}.stake"),
            )
        )
    kw["roles"] = tuple(roles)

    behaviors = []
    for i, b in enumerate(_list(doc.get("behaviors", []), "behaviors")):
        where = f"behaviors[{i}]"
        _reject_unknown(b, _BEHAVIOR_KEYS, where)
        controlled = tuple(_int(c, f"{where}.controlled", minimum=0) for c in _list(b.get("controlled", []), f"{where}.controlled"))
        try:
            behaviors.append(NodeBehavior(BehaviorKind(b.get("kind", "HONEST")), controlled))
        except ValueError as exc:
            raise ConfigError(f"{where}: {exc}") from None
    kw["behaviors"] = tuple(behaviors)

    if "link" in doc:
        link = doc["link"]
        _reject_unknown(link, _LINK_KEYS, "link")
        defaults = LinkModel()
        try:
            kw["link"] = LinkModel(
                base_latency=_int(link.get("base_latency", defaults.base_latency), "link.base_latency", minimum=0),
                jitter=_int(link.get("jitter", defaults.jitter), "link.jitter", minimum=0),
                drop_probability=_num(link.get("drop_probability", defaults.drop_probability), "link.drop_probability"),
            )
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"link: {exc}") from None

    partitions = []
    for i, p in enumerate(_list(doc.get("partitions", []), "partitions")):
        where = f"partitions[{i}]"
        _reject_unknown(p, _PARTITION_KEYS, where)
        for key in _PARTITION_KEYS:
            if key not in p:
                raise ConfigError(f"{where}.{key}: missing")
        groups = [
            frozenset(_int(n, f"{where}.groups", minimum=0) for n in _list(g, f"{where}.groups"))
            for g in _list(p["groups"], f"{where}.groups")
        ]
        try:
            partitions.append(
                PartitionSpec(tuple(groups), _int(p["from"], f"{where}.from", minimum=0), _int(p["until"], f"{where}.until", minimum=0))
            )
        except ValueError as exc:
            raise ConfigError(f"{where}: {exc}") from None
    kw["partitions"] = tuple(partitions)

    if "reputation_deltas" in doc:
        deltas = doc["reputation_deltas"]
        _reject_unknown(deltas, {k.value for k in ReputationKind}, "reputation_deltas")
        merged = {k.value: v for k, v in poa.DEFAULT_DELTAS.items()}
        merged.update({k: _int(v, f"reputation_deltas.{k}") for k, v in deltas.items()})
        kw["reputation_deltas"] = merged

    cfg = ScenarioConfig(**kw)
    validate(cfg)
    return cfg


def load_config(path: str) -> ScenarioConfig:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: malformed JSON: {exc}") from None
    try:
        return config_from_dict(doc)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def validate(cfg: ScenarioConfig) -> None:
    n = cfg.node_count
    if n < 1:
        raise ConfigError("node_count: must be >= 1")
    if cfg.roles and len(cfg.roles) != n:
        raise ConfigError(f"roles: expected {n} entries, got {len(cfg.roles)}")
    if cfg.behaviors and len(cfg.behaviors) != n:
        raise ConfigError(f"behaviors: expected {n} entries, got {len(cfg.behaviors)}")
    for p_i, p in enumerate(cfg.partitions):
        for g in p.groups:
            for node in g:
                if node >= n:
                    raise ConfigError(f"partitions[{p_i}].groups: node {node} does not exist")
    kinds = [b.kind for b in cfg.behaviors]
    proto = cfg.protocol
    for i, r in enumerate(cfg.roles):
        if proto is not Protocol.POA and r.sealer is not None:
            raise ConfigError(f"roles[{i}].sealer: only valid under POA")
        if proto is not Protocol.POW and r.hashrate is not None:
            raise ConfigError(f"roles[{i}].hashrate: only valid under POW")
        if proto is not Protocol.POS and r.stake is not None:
            raise ConfigError(f"roles[{i}].stake: only valid under POS")
        if r.hashrate is not None and not r.hashrate > 0:
            raise ConfigError(f"roles[{i}].hashrate: must be positive")
        if r.stake is not None and not r.stake > 0:
            raise ConfigError(f"roles[{i}].stake: must be positive")
    if proto is not Protocol.POA:
        for i, k in enumerate(kinds):
            if k in (BehaviorKind.EQUIVOCATOR, BehaviorKind.SYBIL_CLONER):
                raise ConfigError(f"behaviors[{i}].kind: {k.value} is only modeled under POA")
    else:
        owned = []
        for i in range(n):
            b = cfg.behaviors[i] if cfg.behaviors else NodeBehavior()
            if b.kind is BehaviorKind.SYBIL_CLONER:
                if cfg.roles and cfg.roles[i].sealer is not None:
                    raise ConfigError(f"roles[{i}].sealer: a SYBIL_CLONER takes its identities from behaviors[{i}].controlled")
                owned.extend(b.controlled)
            elif cfg.roles:
                if cfg.roles[i].sealer is None:
                    raise ConfigError(f"roles[{i}].sealer: missing")
                owned.append(cfg.roles[i].sealer)
            else:
                owned.append(i)
        if sorted(owned) != list(range(len(owned))):
            raise ConfigError(f"roles: sealer identities must be exactly 0..{len(owned) - 1} each once, got {sorted(owned)}")
    if cfg.difficulty is not None and not cfg.difficulty > 0:
        raise ConfigError("difficulty: must be positive")
    if proto is not Protocol.POW and cfg.difficulty is not None:
        raise ConfigError("difficulty: only valid under POW")
    if cfg.fee_per_payload < 0:
        raise ConfigError("fee_per_payload: must be non-negative")


# -- metrics ------------------------------------------------------------------

CSV_COLUMNS = (
    "protocol", "seed", "tps", "blocks_proposed", "blocks_canonical", "fork_count", "max_reorg_depth",
    "time_to_finality_ms", "agreement", "messages_sent", "messages_dropped", "safety_violations", "fees_collected",
)

NUMERIC_METRICS = CSV_COLUMNS[2:]


@dataclass
class MetricsReport:
    protocol: str
    seed: int
    tps: float
    blocks_proposed: int
    blocks_canonical: int
    fork_count: int
    max_reorg_depth: int
    time_to_finality_ms: Optional[float]
    agreement: float
    messages_sent: int
    messages_dropped: int
    safety_violations: int
    fees_collected: float
    canonical_payload: int
    event_log_digest: str
    reputation_final: Optional[list] = None
    name: Optional[str] = None

    def to_dict(self) -> dict:
        return dict(sorted(asdict(self).items()))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def csv_row(self) -> list:
        d = asdict(self)
        return ["" if d[c] is None else d[c] for c in CSV_COLUMNS]


def reports_to_csv(reports: Iterable[MetricsReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in reports:
        w.writerow(r.csv_row())
    return buf.getvalue()


def check_safety(finalized: Mapping[int, Mapping[int, int]]) -> int:
    """Number of (node pair, height) where two nodes finalized different blocks."""
    violations = 0
    for a, b in combinations(sorted(finalized), 2):
        fa, fb = finalized[a], finalized[b]
        if len(fb) < len(fa):
            fa, fb = fb, fa
        violations += sum(1 for h, d in fa.items() if h in fb and fb[h] != d)
    return violations


def finalized_prefix(world: World, node_id: int) -> list[int]:
    node = world.nodes[node_id]
    return node.canon[1 : max(0, len(node.canon) - world.finality_depth)]


def agreement(world: World, node_ids: Sequence[int]) -> float:
    """Fraction of node pairs whose end-of-run finalized prefixes are consistent."""
    pairs = list(combinations(node_ids, 2))
    if not pairs:
        return 1.0
    prefixes = {i: finalized_prefix(world, i) for i in node_ids}
    ok = 0
    for a, b in pairs:
        pa, pb = prefixes[a], prefixes[b]
        m = min(len(pa), len(pb))
        ok += pa[:m] == pb[:m]
    return ok / len(pairs)


def honest_ids(world: World) -> list[int]:
    ids = [n.id for n in world.nodes if n.honest]
    return ids or [n.id for n in world.nodes]


def reference_node(world: World) -> int:
    """Honest node holding the most blocks (lowest id on ties)."""
    ids = honest_ids(world)
    return max(ids, key=lambda i: (len(world.nodes[i].store), -i))


def canonical_blocks(world: World, node_id: Optional[int] = None):
    node = world.nodes[reference_node(world) if node_id is None else node_id]
    return [node.store.blocks[d] for d in node.canon[1:]]


def collect_metrics(world: World, cfg: ScenarioConfig) -> MetricsReport:
    honest = honest_ids(world)
    ref = world.nodes[reference_node(world)]
    chain = canonical_blocks(world, ref.id)
    payload = sum(b.header.payload_count for b in chain)
    seconds = cfg.duration / 1000.0
    delays = [d for i in honest for d in world.nodes[i].final_delays]
    return MetricsReport(
        protocol=cfg.protocol.value,
        seed=cfg.seed,
        tps=payload / seconds if seconds > 0 else 0.0,
        blocks_proposed=len(world.created),
        blocks_canonical=len(chain),
        fork_count=ref.store.fork_count(),
        max_reorg_depth=max(world.nodes[i].max_reorg for i in honest),
        time_to_finality_ms=statistics.fmean(delays) if delays else None,
        agreement=agreement(world, honest),
        messages_sent=world.messages_sent,
        messages_dropped=world.partition_dropped + world.random_dropped,
        safety_violations=check_safety({i: world.nodes[i].final for i in honest}),
        fees_collected=cfg.fee_per_payload * payload,
        canonical_payload=payload,
        event_log_digest=f"{world.log_digest:016x}",
        reputation_final=poa.snapshot_rows(world.authority) if world.authority is not None else None,
        name=cfg.name,
    )


def simulate(cfg: ScenarioConfig, log_sink=None) -> tuple[World, MetricsReport]:
    world = cfg.build(log_sink=log_sink)
    world.run_until(cfg.duration)
    return world, collect_metrics(world, cfg)


def run_scenario(cfg: ScenarioConfig, log_sink=None) -> MetricsReport:
    return simulate(cfg, log_sink)[1]


# -- comparison -----------------------------------------------------------------


def _threads() -> int:
    raw = os.environ.get("POA_ARENA_THREADS")
    if not raw:
        return 1
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"POA_ARENA_THREADS: expected a positive integer, got {raw!r}") from None
    if value < 1:
        raise ConfigError("POA_ARENA_THREADS: must be >= 1")
    return value


def run_many(configs: Sequence[ScenarioConfig]) -> list[MetricsReport]:
    threads = min(_threads(), len(configs))
    if threads <= 1:
        return [run_scenario(c) for c in configs]
    with concurrent.futures.ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(run_scenario, configs))


@dataclass
class ComparisonRow:
    config_index: int
    protocol: str
    name: Optional[str]
    runs: int
    mean: dict[str, float]
    std: dict[str, float]
    reports: list[MetricsReport] = field(repr=False, default_factory=list)

    def to_dict(self) -> dict:
        return {
            "config_index": self.config_index,
            "mean": dict(sorted(self.mean.items())),
            "name": self.name,
            "protocol": self.protocol,
            "runs": self.runs,
            "seeds": [r.seed for r in self.reports],
            "std": dict(sorted(self.std.items())),
        }


def compare(configs: Sequence[ScenarioConfig], repetitions: int = 1) -> list[ComparisonRow]:
    """Run each config under seeds seed+0 .. seed+repetitions-1 and aggregate."""
    if len(configs) < 2:
        raise ConfigError("compare needs at least two configs")
    if repetitions < 1:
        raise ConfigError("repetitions must be >= 1")
    jobs = [c.with_seed(c.seed + r) for c in configs for r in range(repetitions)]
    reports = run_many(jobs)
    rows = []
    for i, cfg in enumerate(configs):
        mine = reports[i * repetitions : (i + 1) * repetitions]
        mean, std = {}, {}
        for m in NUMERIC_METRICS:
            values = [getattr(r, m) for r in mine if getattr(r, m) is not None]
            mean[m] = statistics.fmean(values) if values else None
            std[m] = statistics.stdev(values) if len(values) > 1 else 0.0
        rows.append(ComparisonRow(i, cfg.protocol.value, cfg.name, repetitions, mean, std, mine))
    return rows


def comparison_to_json(rows: Sequence[ComparisonRow]) -> str:
    return json.dumps({"rows": [r.to_dict() for r in rows]}, sort_keys=True, indent=2)


def comparison_to_csv(rows: Sequence[ComparisonRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["config_index", "protocol", "runs"] + [f"{s}_{m}" for m in NUMERIC_METRICS for s in ("mean", "std")])
    for r in rows:
        cells = []
        for m in NUMERIC_METRICS:
            cells += ["" if r.mean[m] is None else r.mean[m], r.std[m]]
        w.writerow([r.config_index, r.protocol, r.runs] + cells)
    return buf.getvalue()


# -- presets ------------------------------------------------------------------

ATTACK_NAMES = ("equivocation-minority", "equivocation-majority", "sybil-clone", "censorship", "partition-heal")


def equivocation_config(n: int, p: int, *, slots: int = 500, partitioned: bool = False, **kw) -> ScenarioConfig:
    """PoA with the first ``p`` of ``n`` nodes colluding equivocators.

    With ``partitioned`` the two honest audiences are cut off from each other
    for the first half of the run while the equivocators can reach both.
    """
    behaviors = [NodeBehavior(BehaviorKind.EQUIVOCATOR)] * p + [NodeBehavior()] * (n - p)
    partitions = ()
    slot_duration = kw.pop("slot_duration", 1000)
    if partitioned:
        honest = list(range(p, n))
        half = (len(honest) + 1) // 2
        partitions = (PartitionSpec((frozenset(honest[:half]), frozenset(honest[half:])), 0, slots * slot_duration // 2),)
    return ScenarioConfig(
        protocol=Protocol.POA,
        node_count=n,
        behaviors=tuple(behaviors),
        partitions=partitions,
        slot_duration=slot_duration,
        duration=slots * slot_duration,
        **kw,
    )


def sybil_config(n: int = 7, identities: int = 4, *, slots: int = 200, **kw) -> ScenarioConfig:
    """One operator running ``identities`` of the ``n`` sealer identities.

    The operator is cut off from the honest nodes for the first half of the
    run, then the network heals and fork choice decides between the chains.
    """
    honest = n - identities
    node_count = honest + 1
    behaviors = [NodeBehavior(BehaviorKind.SYBIL_CLONER, tuple(range(identities)))] + [NodeBehavior()] * honest
    roles = [Role()] + [Role(sealer=identities + i) for i in range(honest)]
    slot_duration = kw.pop("slot_duration", 1000)
    partitions = (PartitionSpec((frozenset({0}), frozenset(range(1, node_count))), 0, slots * slot_duration // 2),)
    return ScenarioConfig(
        protocol=Protocol.POA,
        node_count=node_count,
        roles=tuple(roles),
        behaviors=tuple(behaviors),
        partitions=partitions,
        slot_duration=slot_duration,
        duration=slots * slot_duration,
        **kw,
    )


def attack_catalog(n: int = 7, slots: int = 500, seed: int = 0) -> list[tuple[str, ScenarioConfig]]:
    """Named PoA attack presets over an authority set of ``n`` sealers."""
    p = max_byzantine(n)
    censor = ScenarioConfig(
        protocol=Protocol.POA,
        node_count=n,
        behaviors=(NodeBehavior(BehaviorKind.CENSOR),) + (NodeBehavior(),) * (n - 1),
        duration=slots * 1000,
        seed=seed,
    )
    split = (n + 1) // 2 - 1 if n > 2 else 1
    heal = ScenarioConfig(
        protocol=Protocol.POA,
        node_count=n,
        partitions=(PartitionSpec((frozenset(range(split)), frozenset(range(split, n))), slots * 1000 // 4, slots * 1000 // 2),),
        duration=slots * 1000,
        seed=seed,
    )
    presets = [
        ("equivocation-minority", equivocation_config(n, p, slots=slots, seed=seed)),
        ("equivocation-majority", equivocation_config(n, p + 1, slots=slots, partitioned=True, seed=seed)),
        ("sybil-clone", sybil_config(n, n // 2 + 1, slots=slots, seed=seed)),
        ("censorship", censor),
        ("partition-heal", heal),
    ]
    return [(name, replace(cfg, name=name)) for name, cfg in presets]


def preset(name: str, **kw) -> ScenarioConfig:
    for preset_name, cfg in attack_catalog(**kw):
        if preset_name == name:
            return cfg
    raise KeyError(name)
