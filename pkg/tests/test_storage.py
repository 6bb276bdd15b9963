"""Tests for artifact stores, on-disk formats and the election workspace."""

import json

import pytest

from verivote.services.election_authority import ea_ingest
from verivote.services.tokens import TokenRegistry
from verivote.storage.base import (
    ArtifactCorruptError,
    ArtifactError,
    ArtifactHeaderError,
    ArtifactNotFoundError,
    normalize_key,
)
from verivote.storage.codecs import (
    decode_envelopes,
    decode_flags,
    decode_store,
    encode_envelopes,
    encode_flags,
    encode_store,
)
from verivote.storage.factory import get_store
from verivote.storage.formats import ArtifactHeader, dump_board, dump_tally, load_board, load_tally, unwrap_json, wrap_json
from verivote.storage.local_backend import LocalArtifactStore
from verivote.storage.memory_backend import MemoryArtifactStore
from verivote.storage.workspace import ElectionWorkspace, board_key


@pytest.fixture(params=["memory", "local"])
def store(request, tmp_path):
    if request.param == "memory":
        return MemoryArtifactStore()
    return LocalArtifactStore(tmp_path / "election")


class TestStores:
    def test_write_read_delete(self, store):
        store.write_text("boards/bb3.txt", "rows\n")
        store.write_bytes("private/keys.json", b"{}")
        assert store.read_text("boards/bb3.txt") == "rows\n"
        assert store.exists("private/keys.json")
        assert store.list_keys() == ["boards/bb3.txt", "private/keys.json"]
        assert store.list_keys("boards/") == ["boards/bb3.txt"]
        assert store.delete("boards/bb3.txt")
        assert not store.delete("boards/bb3.txt")

    def test_missing_artifact(self, store):
        with pytest.raises(ArtifactNotFoundError) as info:
            store.read_bytes("boards/bb1.txt")
        assert info.value.key == "boards/bb1.txt"

    def test_overwrite_replaces_content(self, store):
        store.write_text("config.json", "a")
        store.write_text("config.json", "b")
        assert store.read_text("config.json") == "b"

    def test_invalid_utf8_is_corrupt(self, store):
        store.write_bytes("reports/universal.txt", b"\xff\xfe")
        with pytest.raises(ArtifactCorruptError):
            store.read_text("reports/universal.txt")


@pytest.mark.parametrize("key", ["", "/etc/passwd", "../outside", "boards/../../x"])
def test_keys_stay_inside_the_store(key):
    with pytest.raises(ArtifactError):
        normalize_key(key)


def test_keys_are_normalized():
    assert normalize_key("./boards//bb0.txt") == "boards/bb0.txt"


def test_store_factory(tmp_path):
    assert isinstance(get_store("memory"), MemoryArtifactStore)
    local = get_store("local", root=tmp_path)
    assert isinstance(local, LocalArtifactStore)
    with pytest.raises(ArtifactError):
        get_store("s3")


class TestBoards:
    def test_bb3_text_layout(self, small_election):
        text = dump_board(small_election.ctx, "bb3", 3, small_election.publication.bb3)
        header, *rows = text.splitlines()
        assert header.startswith("# verivote/1 board=bb3 ")
        assert " m=3 rows=12 " in header
        assert len(rows) == 12
        assert all(len(row.split("|")) == 6 for row in rows)

    @pytest.mark.parametrize("name", ["bb0", "bb1", "bb2", "bb3"])
    def test_boards_reload(self, small_election, name):
        artifacts = small_election.artifacts()
        rows = getattr(artifacts, name)
        text = dump_board(small_election.ctx, name, 3, rows)
        reloaded = load_board(small_election.ctx, name, 3, text)
        assert len(reloaded) == len(rows)
        assert dump_board(small_election.ctx, name, 3, reloaded) == text

    def test_board_for_other_parameters_rejected(self, small_election, toy_ctx):
        text = dump_board(small_election.ctx, "bb3", 3, small_election.publication.bb3)
        with pytest.raises(ArtifactHeaderError, match="m=3"):
            load_board(small_election.ctx, "bb3", 4, text)
        with pytest.raises(ArtifactHeaderError):
            load_board(toy_ctx, "bb3", 3, text)
        with pytest.raises(ArtifactHeaderError):
            load_board(small_election.ctx, "bb2", 3, text)

    def test_edited_board_rejected(self, small_election):
        text = dump_board(small_election.ctx, "bb3", 3, small_election.publication.bb3)
        header, body = text.split("\n", 1)
        edited = header + "\n" + ("1" if body[0] != "1" else "2") + body[1:]
        with pytest.raises(ArtifactCorruptError):
            load_board(small_election.ctx, "bb3", 3, edited)

    def test_tally_reload(self, small_election):
        text = dump_tally(small_election.ctx, small_election.result)
        assert load_tally(small_election.ctx, 3, text) == small_election.result


class TestWrappedJson:
    def test_round_trip_and_hash(self, ctx):
        header = ArtifactHeader.for_context(ctx, "ground_truth", 5)
        text = wrap_json(header, {"tally": [1, 2]})
        assert unwrap_json(text, header) == {"tally": [1, 2]}

        doc = json.loads(text)
        doc["body"]["tally"] = [2, 1]
        with pytest.raises(ArtifactCorruptError):
            unwrap_json(json.dumps(doc), header)

    def test_kind_mismatch(self, ctx):
        text = wrap_json(ArtifactHeader.for_context(ctx, "keys", 5), {})
        with pytest.raises(ArtifactHeaderError, match="kind=keys"):
            unwrap_json(text, ArtifactHeader.for_context(ctx, "election", 5))

    def test_not_a_wrapped_artifact(self, ctx):
        with pytest.raises(ArtifactCorruptError):
            unwrap_json("[1, 2]", ArtifactHeader.for_context(ctx, "keys", 5))


class TestCodecs:
    def test_envelopes_reload(self, small_election):
        body = encode_envelopes(small_election.envelopes)
        assert encode_envelopes(decode_envelopes(small_election.ctx, body)) == body

    def test_store_reload(self, small_election):
        body = encode_store(small_election.publication.store)
        reloaded = decode_store(small_election.ctx, 3, body)
        assert len(reloaded) == 12
        assert encode_store(reloaded) == body

    def test_flags_reload(self, small_election):
        setup = small_election.setup
        _, flags = ea_ingest(setup.ctx, small_election.envelopes[:3], setup.ea_keys, small_election.batch.bb0,
                             TokenRegistry(), setup.evm_ring, 3)
        body = encode_flags(flags, sorted({flag.record for flag in flags}))
        assert len(body["flagged_records"]) == 3
        assert decode_flags(body) == flags

    def test_garbage_is_corrupt(self, ctx):
        with pytest.raises(ArtifactCorruptError):
            decode_envelopes(ctx, {"envelopes": [{"ciphertext": "zz"}]})
        with pytest.raises(ArtifactCorruptError):
            decode_flags({"flags": [{"record": "x", "reason": "no_such_reason", "detail": ""}]})


class TestWorkspace:
    def test_boards_through_the_workspace(self, small_config, small_election):
        store = MemoryArtifactStore()
        ElectionWorkspace.create(store, small_config, "setup").write_board("bb3", small_election.publication.bb3)

        ws = ElectionWorkspace.open(store, "tally")
        assert ws.config.seed == small_config.seed
        assert len(ws.read_board("bb3")) == 12
        assert ws.read_optional_board("bb2") is None

    def test_missing_input_names_key_and_stage(self, small_config):
        ws = ElectionWorkspace.create(MemoryArtifactStore(), small_config, "close")
        with pytest.raises(ArtifactNotFoundError) as info:
            ws.read_board("bb1")
        assert info.value.key == board_key("bb1")
        assert info.value.stage == "close"

    def test_open_without_config(self):
        with pytest.raises(ArtifactNotFoundError) as info:
            ElectionWorkspace.open(MemoryArtifactStore(), "gen-tokens")
        assert info.value.stage == "gen-tokens"

    def test_open_with_invalid_config(self):
        store = MemoryArtifactStore()
        store.write_text("config.json", json.dumps({"booths": 0}))
        with pytest.raises(ArtifactCorruptError):
            ElectionWorkspace.open(store, "setup")
