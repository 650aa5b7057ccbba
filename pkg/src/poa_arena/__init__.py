"""Deterministic simulator comparing Proof-of-Authority with PoW and PoS."""

from .ledger import Block, BlockHeader, ChainStore, hash_block
from .poa import AuthoritySet, in_turn_sealer, max_byzantine, seal_weight, validate_seal
from .scenarios import ScenarioConfig, attack_catalog, check_safety, compare, config_from_dict, run_scenario

__all__ = [
    "AuthoritySet",
    "Block",
    "BlockHeader",
    "ChainStore",
    "ScenarioConfig",
    "attack_catalog",
    "check_safety",
    "compare",
    "config_from_dict",
    "hash_block",
    "in_turn_sealer",
    "max_byzantine",
    "run_scenario",
    "seal_weight",
    "validate_seal",
]

__version__ = "0.1.0"
