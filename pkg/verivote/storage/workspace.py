"""
An election's output directory seen as typed artifacts.

Every CLI stage opens the workspace, reads its predecessors' artifacts
through it and writes its own. Reads name the stage so a missing or
corrupt input can be reported against the stage that needed it.
"""

import json
from functools import cached_property
from typing import Any, Dict, List, Optional

from verivote.config import ConfigError, ElectionConfig
from verivote.groups import GroupContext, setup_group
from verivote.services.election_runner import ElectionSetup
from verivote.storage.base import ArtifactCorruptError, ArtifactError, ArtifactStore
from verivote.storage.codecs import ElectionPublic, decode_private_keys, decode_public
from verivote.storage.formats import ArtifactHeader, dump_board, load_board, unwrap_json, wrap_json

CONFIG_KEY = "config.json"
ELECTION_KEY = "election.json"
KEYS_KEY = "private/keys.json"
REGISTRY_KEY = "private/registry.json"
GROUND_TRUTH_KEY = "private/ground_truth.json"
EA_STORE_KEY = "private/ea_store.json"
TOKEN_AUDIT_KEY = "audit/token_audit.json"
EA_FLAGS_KEY = "audit/ea_flags.json"
ENVELOPES_KEY = "collection/envelopes.json"
UNIVERSAL_REPORT_KEY = "reports/universal.txt"
INDIVIDUAL_REPORT_KEY = "reports/individual.json"
TAMPER_DELTA_KEY = "reports/tamper_delta.json"


def tokens_key(booth: int) -> str:
    return f"tokens/booth_{booth}.json"


def polling_key(booth: int) -> str:
    return f"polling/booth_{booth}.json"


def ledger_key(booth: int) -> str:
    return f"polling/ledger_{booth}.json"


def board_key(name: str) -> str:
    return f"boards/{name}.txt"


class ElectionWorkspace:
    def __init__(self, store: ArtifactStore, config: ElectionConfig, stage: str):
        self.store = store
        self.config = config
        self.stage = stage

    @classmethod
    def create(cls, store: ArtifactStore, config: ElectionConfig, stage: str) -> "ElectionWorkspace":
        """Start a new election directory by writing its resolved config"""
        store.write_text(CONFIG_KEY, config.to_json() + "\n")
        return cls(store, config, stage)

    @classmethod
    def open(cls, store: ArtifactStore, stage: str) -> "ElectionWorkspace":
        """
        Raises:
            ArtifactError: If config.json is missing or invalid
        """
        try:
            values = json.loads(store.read_text(CONFIG_KEY))
            values.pop("output_dir", None)
            config = ElectionConfig.build(**values)
        except ArtifactError as exc:
            exc.stage = exc.stage or stage
            raise
        except (json.JSONDecodeError, AttributeError) as exc:
            raise ArtifactCorruptError(f"{CONFIG_KEY} is not a JSON object", key=CONFIG_KEY, stage=stage) from exc
        except ConfigError as exc:
            raise ArtifactCorruptError(f"{CONFIG_KEY}: {exc}", key=CONFIG_KEY, stage=stage) from exc
        return cls(store, config, stage)

    @cached_property
    def ctx(self) -> GroupContext:
        return setup_group(self.config.security_profile, self.config.seed)

    @property
    def m(self) -> int:
        return self.config.m

    def header(self, kind: str) -> ArtifactHeader:
        return ArtifactHeader.for_context(self.ctx, kind, self.m)

    # raw access

    def _tag(self, exc: ArtifactError, key: str) -> ArtifactError:
        exc.stage = exc.stage or self.stage
        exc.key = exc.key or key
        return exc

    def read_text(self, key: str) -> str:
        try:
            return self.store.read_text(key)
        except ArtifactError as exc:
            raise self._tag(exc, key)

    def exists(self, key: str) -> bool:
        return self.store.exists(key)

    def write_text(self, key: str, text: str) -> str:
        return self.store.write_text(key, text)

    # typed access

    def write_json(self, key: str, kind: str, body: Any) -> str:
        return self.write_text(key, wrap_json(self.header(kind), body))

    def read_json(self, key: str, kind: str) -> Any:
        text = self.read_text(key)
        try:
            return unwrap_json(text, self.header(kind))
        except ArtifactError as exc:
            raise self._tag(exc, key)

    def write_board(self, name: str, rows: List[Any]) -> str:
        return self.write_text(board_key(name), dump_board(self.ctx, name, self.m, rows))

    def read_board(self, name: str) -> List[Any]:
        key = board_key(name)
        text = self.read_text(key)
        try:
            return load_board(self.ctx, name, self.m, text)
        except ArtifactError as exc:
            raise self._tag(exc, key)

    def read_optional_board(self, name: str) -> Optional[List[Any]]:
        return self.read_board(name) if self.exists(board_key(name)) else None

    def decode(self, key: str, decoder, *args):
        """Run a codec decoder, tagging its failures with this key and stage"""
        try:
            return decoder(*args)
        except ArtifactError as exc:
            raise self._tag(exc, key)

    # election parameters

    def public(self) -> ElectionPublic:
        return self.decode(ELECTION_KEY, decode_public, self.ctx, self.read_json(ELECTION_KEY, "election"))

    def setup(self) -> ElectionSetup:
        ea_keys, officers, evm_keys = self.decode(
            KEYS_KEY, decode_private_keys, self.ctx, self.read_json(KEYS_KEY, "keys"))
        return ElectionSetup(self.ctx, self.m, ea_keys, officers, evm_keys)

    def audited(self) -> Dict[int, List[str]]:
        body = self.read_json(TOKEN_AUDIT_KEY, "token_audit")
        try:
            return {int(booth): list(ids) for booth, ids in body["audited"].items()}
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise self._tag(ArtifactCorruptError(f"{TOKEN_AUDIT_KEY} does not decode: {exc!r}"), TOKEN_AUDIT_KEY)
