"""
verivote command line.

Each subcommand runs one stage of an election against an output directory:
it reads the artifacts its predecessors wrote and writes its own. Exit
codes: 0 success, 1 a verification or audit failed, 2 an input was
missing, corrupt or written for other parameters.
"""

from typing import Callable, Dict, List, Optional, Tuple

import click

from verivote import __version__
from verivote.config import ConfigError, ElectionConfig
from verivote.constants import EXIT_MALFORMED_INPUT, EXIT_OK, EXIT_VERIFICATION_FAILED
from verivote.errors import VerivoteError
from verivote.groups import SecurityProfile
from verivote.security.tamper import BOARD_ATTACKS, AttackKind, ElectionArtifacts, tamper
from verivote.services import election_runner as runner
from verivote.services.evm import VoterReceipt
from verivote.services.tally import tally
from verivote.services.tokens import Token, TokenBatch, TokenRegistry
from verivote.storage import ArtifactError, ArtifactStore, get_store
from verivote.storage import codecs
from verivote.storage.formats import dump_tally, load_tally
from verivote.storage.workspace import (
    EA_FLAGS_KEY,
    EA_STORE_KEY,
    ELECTION_KEY,
    ENVELOPES_KEY,
    GROUND_TRUTH_KEY,
    INDIVIDUAL_REPORT_KEY,
    KEYS_KEY,
    REGISTRY_KEY,
    TAMPER_DELTA_KEY,
    TOKEN_AUDIT_KEY,
    UNIVERSAL_REPORT_KEY,
    ElectionWorkspace,
    board_key,
    ledger_key,
    polling_key,
    tokens_key,
)
from verivote.utils.logging_service import Stage, get_logger
from verivote.validators.receipt_validator import verify_bb2_entry, verify_receipt_local
from verivote.validators.universal_validator import universal_verify

VoterKey = Tuple[int, int]


def _verdict(passed: bool) -> str:
    return "PASS" if passed else "FAIL"


# Shared loaders

def _load_tokens(ws: ElectionWorkspace) -> Dict[int, List[Token]]:
    tokens = {}
    for booth in runner.booth_ids(ws.config):
        key = tokens_key(booth)
        number, booth_tokens = ws.decode(key, codecs.decode_tokens, ws.ctx, ws.read_json(key, "tokens"))
        tokens[number] = booth_tokens
    return tokens


def _load_registry(ws: ElectionWorkspace) -> TokenRegistry:
    return ws.decode(REGISTRY_KEY, codecs.decode_registry, ws.ctx, ws.read_json(REGISTRY_KEY, "registry"))


def _load_polling(ws: ElectionWorkspace, booth: int) -> codecs.PollingRecord:
    key = polling_key(booth)
    return ws.decode(key, codecs.decode_polling, ws.ctx, ws.read_json(key, "polling"))


# Stages

def run_setup(store: ArtifactStore, config: ElectionConfig) -> int:
    ws = ElectionWorkspace.create(store, config, Stage.SETUP.value)
    setup = runner.setup_election(config)
    ws.write_json(ELECTION_KEY, "election",
                  codecs.encode_public(config.m, setup.ea_keys.public(), setup.evm_ring, setup.po_publics()))
    ws.write_json(KEYS_KEY, "keys", codecs.encode_private_keys(setup.ea_keys, setup.officers, setup.evm_keys))
    click.echo(f"election {config.election_id}: {config.booths} booths, {config.candidates} candidates, "
               f"profile {config.security_profile.value}")
    return EXIT_OK


def run_gen_tokens(ws: ElectionWorkspace) -> int:
    batch = runner.issue_tokens(ws.setup(), ws.config)
    for booth, tokens in sorted(batch.tokens.items()):
        ws.write_json(tokens_key(booth), "tokens", codecs.encode_tokens(booth, tokens))
    ws.write_json(REGISTRY_KEY, "registry", codecs.encode_registry(batch.registry))
    ws.write_board("bb0", batch.bb0)
    click.echo(f"printed {len(batch.registry)} tokens; BB0 holds {len(batch.bb0)} keys")
    return EXIT_OK


def run_audit_tokens(ws: ElectionWorkspace) -> int:
    batch = TokenBatch(tokens=_load_tokens(ws), bb0=ws.read_board("bb0"), registry=_load_registry(ws))
    audit = runner.audit_tokens(ws.setup(), batch, ws.config)
    body = {
        "audited": {str(booth): ids for booth, ids in sorted(audit.audited.items())},
        "reports": [
            {"token_id": r.metadata["token_id"], "booth": r.metadata["booth"],
             "verdict": _verdict(r.passed), "failed": r.failed_checks}
            for r in audit.reports
        ],
        "uniqueness": {"verdict": _verdict(audit.uniqueness.passed), "failed": audit.uniqueness.failed_checks},
        "passed": audit.passed,
    }
    ws.write_json(TOKEN_AUDIT_KEY, "token_audit", body)
    failed = [r for r in body["reports"] if r["verdict"] == "FAIL"]
    for r in failed:
        click.echo(f"token {r['token_id']} (booth {r['booth']}) failed: {', '.join(r['failed'])}")
    for name in audit.uniqueness.failed_checks:
        click.echo(f"uniqueness check failed: {name}")
    click.echo(f"audited {len(audit.reports)} tokens: {_verdict(audit.passed)}")
    return EXIT_OK if audit.passed else EXIT_VERIFICATION_FAILED


def run_election(ws: ElectionWorkspace) -> int:
    config = ws.config
    setup = ws.setup()
    audited = ws.audited()
    for booth, ids in audited.items():
        setup.officers[booth].retire(ids)
    pool = runner.voting_pool(TokenBatch(tokens=_load_tokens(ws), bb0=[]), audited)
    polling = runner.run_polling(setup, pool, runner.draw_votes(config), config)

    truth = []
    for booth, result in sorted(polling.items()):
        voters = [(v.voter, v.receipt, v.acknowledged, v.error) for v in result.voters]
        ws.write_json(polling_key(booth), "polling", codecs.encode_polling(
            booth, result.evm.records, result.officer.printouts, result.evm.flags, voters))
        truth.extend(
            {"booth": v.booth, "voter": v.voter, "v": v.v, "rid": v.rid.to_bytes().hex(), "recorded": v.recorded}
            for v in result.voters
        )
    counts = [0] * config.m
    for entry in truth:
        if entry["recorded"]:
            counts[entry["v"]] += 1
    ws.write_json(GROUND_TRUTH_KEY, "ground_truth", {"voters": truth, "tally": counts})
    click.echo(f"{sum(counts)} votes recorded across {len(polling)} booths")
    return EXIT_OK


def run_close(ws: ElectionWorkspace) -> int:
    setup = ws.setup()
    booths = {}
    for booth in runner.booth_ids(ws.config):
        record = _load_polling(ws, booth)
        evm = setup.evm(booth)
        evm.records = record.records
        evm.flags = list(record.evm_flags)
        officer = setup.officers[booth]
        officer.printouts = record.printouts
        booths[booth] = (evm, officer)
    ledgers, bb1 = runner.close_booths(setup, booths, ws.config)
    for booth, ledger in sorted(ledgers.items()):
        ws.write_json(ledger_key(booth), "ledger", codecs.encode_ledger(ledger))
        for flag in ledger.flags:
            click.echo(f"booth {booth}: {flag}")
    ws.write_board("bb1", bb1)
    click.echo(f"closed {len(bb1)} booths; N = {sum(row.count for row in bb1)}")
    return EXIT_OK


def run_collect(ws: ElectionWorkspace) -> int:
    ledgers = {}
    for booth in runner.booth_ids(ws.config):
        key = ledger_key(booth)
        ledgers[booth] = ws.decode(key, codecs.decode_ledger, ws.ctx, ws.read_json(key, "ledger"))
    envelopes = runner.collect(ledgers, ws.config)
    ws.write_json(ENVELOPES_KEY, "envelopes", codecs.encode_envelopes(envelopes))
    click.echo(f"collected and shuffled {len(envelopes)} records")
    return EXIT_OK


def run_publish(ws: ElectionWorkspace) -> int:
    envelopes = ws.decode(ENVELOPES_KEY, codecs.decode_envelopes, ws.ctx, ws.read_json(ENVELOPES_KEY, "envelopes"))
    registry = _load_registry(ws)
    for ids in ws.audited().values():
        for token_id in ids:
            registry.mark_audited(token_id)
    batch = TokenBatch(tokens={}, bb0=ws.read_board("bb0"), registry=registry)
    publication = runner.publish(ws.setup(), envelopes, batch, ws.config)

    ws.write_board("bb3", publication.bb3)
    if publication.bb2 is not None:
        ws.write_board("bb2", publication.bb2)
    else:
        ws.store.delete(board_key("bb2"))
    ws.write_json(EA_FLAGS_KEY, "ea_flags", codecs.encode_flags(publication.flags, publication.store.flagged_records))
    ws.write_json(EA_STORE_KEY, "ea_store", codecs.encode_store(publication.store))
    for flag in publication.flags:
        click.echo(f"flagged {flag.record}: {flag.reason.value} {flag.detail}".rstrip())
    click.echo(f"published {len(publication.bb3)} records on BB3")
    return EXIT_OK


def run_tally(ws: ElectionWorkspace) -> int:
    result = tally(ws.read_board("bb3"), ws.m)
    ws.write_text(board_key("tally"), dump_tally(ws.ctx, result))
    for line in result.to_lines():
        click.echo(line)
    return EXIT_OK


def _published_tally(ws: ElectionWorkspace):
    key = board_key("tally")
    if not ws.exists(key):
        return None
    return ws.decode(key, load_tally, ws.ctx, ws.m, ws.read_text(key))


def _verified_fraction(ws: ElectionWorkspace) -> Optional[float]:
    if not ws.exists(INDIVIDUAL_REPORT_KEY):
        return None
    body = ws.read_json(INDIVIDUAL_REPORT_KEY, "individual")
    return body.get("verified_fraction") if isinstance(body, dict) else None


def run_verify_universal(ws: ElectionWorkspace) -> int:
    public = ws.public()
    fraction = _verified_fraction(ws)
    report = universal_verify(
        ws.ctx, ws.read_board("bb0"), ws.read_board("bb1"), ws.read_optional_board("bb2"), ws.read_board("bb3"),
        public.evm_ring, public.po_ring, ws.m, published_tally=_published_tally(ws), verified_fraction=fraction,
    )
    lines = report.to_lines()
    if fraction is not None:
        lines.insert(-1, f"INFO  verified-fraction {fraction:.4f}")
    ws.write_text(UNIVERSAL_REPORT_KEY, "\n".join(lines) + "\n")
    for line in lines:
        click.echo(line)
    return EXIT_OK if report.passed else EXIT_VERIFICATION_FAILED


def _collect_receipts(ws: ElectionWorkspace, booth: Optional[int], voter: Optional[int]
                      ) -> Tuple[Dict[VoterKey, VoterReceipt], List[VoterKey]]:
    """Receipts to verify, plus voters who left without one"""
    booths = [booth] if booth is not None else runner.booth_ids(ws.config)
    receipts: Dict[VoterKey, VoterReceipt] = {}
    without: List[VoterKey] = []
    for b in booths:
        record = _load_polling(ws, b)
        voters = [voter] if voter is not None else [entry["voter"] for entry in record.receipts]
        for i in voters:
            receipt = ws.decode(polling_key(b), codecs.receipt_for, ws.ctx, record, i)
            if receipt is None:
                without.append((b, i))
            else:
                receipts[(b, i)] = receipt
    return receipts, without


def run_verify_individual(ws: ElectionWorkspace, booth: Optional[int], voter: Optional[int]) -> int:
    if voter is not None and booth is None:
        raise ConfigError("--voter needs --booth", field="booth")
    public = ws.public()
    bb3 = ws.read_board("bb3")
    bb2 = ws.read_optional_board("bb2")
    store = ws.decode(EA_STORE_KEY, codecs.decode_store, ws.ctx, ws.m, ws.read_json(EA_STORE_KEY, "ea_store"))
    receipts, without = _collect_receipts(ws, booth, voter)
    results = runner.verify_receipts(ws.ctx, receipts, store, bb3, ws.config)

    entries = []
    for key, receipt in sorted(receipts.items()):
        local = verify_receipt_local(ws.ctx, receipt, public.ea.signing, public.evm_ring, ws.m)
        on_bb2 = verify_bb2_entry(receipt, bb2) if bb2 is not None else None
        result = results[key]
        passed = local.passed and on_bb2 is not False and bool(result)
        entries.append({
            "booth": key[0], "voter": key[1], "receipt": _verdict(local.passed),
            "bb2": "SKIP" if on_bb2 is None else _verdict(on_bb2),
            "proof": result.status.value, "passed": passed,
        })
        click.echo(f"booth {key[0]} voter {key[1]}: receipt {entries[-1]['receipt']} bb2 {entries[-1]['bb2']} "
                   f"proof {result.status.value} -> {_verdict(passed)}")
    for b, i in without:
        click.echo(f"booth {b} voter {i}: no receipt (session aborted)")

    fraction = runner.verified_fraction({(e["booth"], e["voter"]): e["passed"] for e in entries})
    if voter is None:
        ws.write_json(INDIVIDUAL_REPORT_KEY, "individual", {
            "voters": entries,
            "without_receipt": [{"booth": b, "voter": i} for b, i in without],
            "verified_fraction": fraction,
        })
        if fraction is not None:
            click.echo(f"verified fraction {fraction:.4f}")
    all_passed = bool(entries) and all(e["passed"] for e in entries) and (voter is None or not without)
    return EXIT_OK if all_passed else EXIT_VERIFICATION_FAILED


def _ground_truth_voter(ws: ElectionWorkspace, rid: int) -> Optional[Dict[str, int]]:
    if not ws.exists(GROUND_TRUTH_KEY):
        return None
    for entry in ws.read_json(GROUND_TRUTH_KEY, "ground_truth")["voters"]:
        if int(entry["rid"], 16) == rid:
            return {"booth": entry["booth"], "voter": entry["voter"]}
    return None


def run_tamper(ws: ElectionWorkspace, attack: AttackKind, target: Optional[int]) -> int:
    if attack in BOARD_ATTACKS:
        artifacts = ElectionArtifacts(ws.read_board("bb0"), ws.read_board("bb1"), ws.read_optional_board("bb2"),
                                      ws.read_board("bb3"))
    else:
        artifacts = ElectionArtifacts([], [], None, [], tokens=_load_tokens(ws))
    rng = runner.streams_for(ws.config).stream(f"tamper/{attack.value}")
    mutated, delta = tamper(ws.ctx, artifacts, attack, ws.m, rng, target)

    if attack in BOARD_ATTACKS:
        ws.write_board("bb3", mutated.bb3)
    else:
        for booth, tokens in sorted(mutated.tokens.items()):
            ws.write_json(tokens_key(booth), "tokens", codecs.encode_tokens(booth, tokens))

    body = delta.to_dict()
    body["victim_rid"] = str(delta.victim_rid) if delta.victim_rid is not None else None
    body["victim"] = _ground_truth_voter(ws, delta.victim_rid) if delta.victim_rid is not None else None
    ws.write_json(TAMPER_DELTA_KEY, "tamper_delta", body)
    click.echo(f"applied {attack.value}: {delta.detail}")
    if body["victim"] is not None:
        click.echo(f"victim: booth {body['victim']['booth']} voter {body['victim']['voter']}")
    if delta.expected_checks:
        click.echo(f"expected to fail: {', '.join(delta.expected_checks)}")
    return EXIT_OK


def run_simulation(store: ArtifactStore, config: ElectionConfig) -> int:
    """Every stage in order; the exit code is the worst of the verifications"""
    code = run_setup(store, config)

    def stage(name: Stage) -> ElectionWorkspace:
        return ElectionWorkspace.open(store, name.value)

    run_gen_tokens(stage(Stage.TOKEN_GENERATION))
    code = max(code, run_audit_tokens(stage(Stage.TOKEN_AUDIT)))
    run_election(stage(Stage.POLLING))
    run_close(stage(Stage.BOOTH_CLOSE))
    run_collect(stage(Stage.COLLECTION))
    run_publish(stage(Stage.PUBLICATION))
    run_tally(stage(Stage.TALLY))
    code = max(code, run_verify_individual(stage(Stage.INDIVIDUAL_VERIFICATION), None, None))
    code = max(code, run_verify_universal(stage(Stage.UNIVERSAL_VERIFICATION)))
    return code


# Click plumbing

def _execute(stage: Stage, action: Callable[[], int]):
    """Run a stage and exit with its code; library errors exit with 2"""
    log = get_logger()
    try:
        with log.performance_timer(f"cli {stage.value}"):
            code = action()
    except ArtifactError as exc:
        where = f" ({exc.key})" if exc.key else ""
        click.echo(f"error in {exc.stage or stage.value}{where}: {exc.message}", err=True)
        log.log_error("Stage input rejected", exception=exc, stage=stage.value)
        code = EXIT_MALFORMED_INPUT
    except VerivoteError as exc:
        click.echo(f"error in {stage.value}: {exc.message}", err=True)
        log.log_error("Stage failed", exception=exc, stage=stage.value)
        code = EXIT_MALFORMED_INPUT
    click.get_current_context().exit(code)


def _store(out: Optional[str]) -> ArtifactStore:
    return get_store(root=out)


def _open(out: Optional[str], stage: Stage) -> ElectionWorkspace:
    return ElectionWorkspace.open(_store(out), stage.value)


def _resolve_config(config_file: Optional[str], out: Optional[str], **flags) -> ElectionConfig:
    overrides = {"output_dir": out, **flags}
    if config_file:
        return ElectionConfig.from_file(config_file, **overrides)
    return ElectionConfig.build(**overrides)


out_option = click.option("--out", "out", type=click.Path(file_okay=False), default=None,
                          help="Election output directory [default: VERIVOTE_STORAGE_ROOT or ./election]")


def config_options(fn):
    options = [
        click.option("--config", "config_file", type=click.Path(exists=True, dir_okay=False),
                     help="JSON config file; flags override its values"),
        click.option("--seed", default=None, help="Master seed; fixes the whole run"),
        click.option("--profile", "security_profile", type=click.Choice([p.value for p in SecurityProfile]),
                     default=None, help="Security profile [default: test]"),
        click.option("--booths", type=int, default=None, help="Number of booths"),
        click.option("--voters", "voters_per_booth", type=int, default=None, help="Voters per booth"),
        click.option("--candidates", type=int, default=None, help="Number of candidates m"),
        click.option("--parallel/--sequential", "parallel", default=None, help="Run booths in parallel"),
        out_option,
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


def _flags(parallel: Optional[bool], **values) -> dict:
    if parallel is not None:
        values["execution_mode"] = "parallel" if parallel else "sequential"
    return values


@click.group()
@click.version_option(__version__, prog_name="verivote")
@click.option("--log-level", default="WARNING", show_default=True,
              type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"], case_sensitive=False))
def cli(log_level: str):
    """Individually verifiable polling-booth elections."""
    get_logger().set_level(log_level)


@cli.command()
@config_options
def setup(config_file, out, parallel, **values):
    """Generate every party's keys and the public election parameters."""
    def action():
        config = _resolve_config(config_file, out, **_flags(parallel, **values))
        return run_setup(_store(out or str(config.output_dir)), config)
    _execute(Stage.SETUP, action)


@cli.command("gen-tokens")
@out_option
def gen_tokens(out):
    """Print tokens for every booth and publish BB0."""
    _execute(Stage.TOKEN_GENERATION, lambda: run_gen_tokens(_open(out, Stage.TOKEN_GENERATION)))


@cli.command("audit-tokens")
@out_option
def audit_tokens(out):
    """Audit a random sample of tokens and retire it."""
    _execute(Stage.TOKEN_AUDIT, lambda: run_audit_tokens(_open(out, Stage.TOKEN_AUDIT)))


@cli.command("run-election")
@out_option
def run_election_command(out):
    """Poll every booth with simulated voters."""
    _execute(Stage.POLLING, lambda: run_election(_open(out, Stage.POLLING)))


@cli.command()
@out_option
def close(out):
    """Match acknowledgments to records and publish BB1."""
    _execute(Stage.BOOTH_CLOSE, lambda: run_close(_open(out, Stage.BOOTH_CLOSE)))


@cli.command()
@out_option
def collect(out):
    """Gather acknowledged records from every booth and shuffle them."""
    _execute(Stage.COLLECTION, lambda: run_collect(_open(out, Stage.COLLECTION)))


@cli.command()
@out_option
def publish(out):
    """Decrypt and check the records, then publish BB3 (and BB2)."""
    _execute(Stage.PUBLICATION, lambda: run_publish(_open(out, Stage.PUBLICATION)))


@cli.command("tally")
@out_option
def tally_command(out):
    """Count BB3."""
    _execute(Stage.TALLY, lambda: run_tally(_open(out, Stage.TALLY)))


@cli.command("verify-universal")
@out_option
def verify_universal(out):
    """Run every universal check over the published boards."""
    _execute(Stage.UNIVERSAL_VERIFICATION,
             lambda: run_verify_universal(_open(out, Stage.UNIVERSAL_VERIFICATION)))


@cli.command("verify-individual")
@out_option
@click.option("--booth", type=int, default=None, help="Only this booth")
@click.option("--voter", type=int, default=None, help="Only this voter of --booth")
def verify_individual(out, booth, voter):
    """Check receipts and run the voters' membership proofs against BB3."""
    _execute(Stage.INDIVIDUAL_VERIFICATION,
             lambda: run_verify_individual(_open(out, Stage.INDIVIDUAL_VERIFICATION), booth, voter))


@cli.command("tamper")
@out_option
@click.option("--attack", required=True, type=click.Choice([a.value for a in AttackKind]))
@click.option("--target", type=int, default=None, help="Row or token index to attack [default: random]")
def tamper_command(out, attack, target):
    """Apply one attack to the published boards or the printed tokens."""
    _execute(Stage.TAMPER, lambda: run_tamper(_open(out, Stage.TAMPER), AttackKind(attack), target))


@cli.command()
@config_options
def simulate(config_file, out, parallel, **values):
    """Run every stage from setup to verification."""
    def action():
        config = _resolve_config(config_file, out, **_flags(parallel, **values))
        return run_simulation(_store(out or str(config.output_dir)), config)
    _execute(Stage.SETUP, action)


if __name__ == "__main__":
    cli()
