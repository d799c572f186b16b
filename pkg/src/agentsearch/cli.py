"""Command-line entry point.

Exit codes: 0 on success, 1 when a run fails, 2 for usage or configuration
errors.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
import tempfile
from pathlib import Path
from typing import Sequence

from .actions import ActionRegistry
from .backends.remote import RemoteChatBackend, RemoteMediaBackend
from .backends.scripted import RecordingBackend, ScriptedBackend, read_fixture_file
from .backends.stub import StubMediaBackend
from .backends.synthetic import SyntheticChatBackend
from .cognition import cognize, load_plan, plan_modalities
from .config import Config, load_config
from .core import Modality, SearchConfig, TaskKind
from .errors import AgentSearchError, ConfigError, DatasetError, FixtureError, RegistryError
from .instruction_eval import evaluate, file_predictor, load_dataset, render_table
from .orchestrator import (
    MediaInput,
    RunRecord,
    Session,
    recorded_inputs,
    replay,
    run,
    run_generation,
    run_reasoning,
)
from .roles import registry_load
from .sweep import SweepTask, parse_grid, render_sweep, sweep
from .trace import EventKind, describe_event, read_trace

logger = logging.getLogger("agentsearch")

EXIT_OK, EXIT_RUN_ERROR, EXIT_CONFIG_ERROR = 0, 1, 2
_CONFIG_ERRORS = (ConfigError, RegistryError, FixtureError, DatasetError)


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # argparse exits 2 already; keep the usage text on stderr
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG_ERROR, f"{self.prog}: error: {message}\n")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="TOML config file")
    p.add_argument("--offline", action="store_true", help="never touch the network; answer from --fixtures")
    p.add_argument("--fixtures", type=Path, help="fixture file for scripted backends")
    p.add_argument("--chat", choices=("remote", "scripted", "synthetic"), help="override the chat backend kind")
    p.add_argument("--runs-dir", type=Path, help="where run directories are created")
    p.add_argument("--seed", type=int, help="run-level seed")
    p.add_argument("--deterministic", action="store_true", default=None,
                   help="omit timestamps and name runs after their inputs")
    p.add_argument("--threshold", type=float, help="override the acceptance threshold")
    p.add_argument("--beam-width", type=int)
    p.add_argument("--max-depth", type=int)
    p.add_argument("--strategy", choices=("exhaustive", "selector_guided"))
    p.add_argument("--record", type=Path, metavar="FIXTURES_OUT",
                   help="write every backend call of this command to a fixture file")
    p.add_argument("-v", "--verbose", action="count", default=0)


def _media_arg(p: argparse.ArgumentParser) -> None:
    p.add_argument("--media", action="append", default=[], metavar="[MODALITY=]PATH",
                   help="attach an input file (repeatable)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="agentsearch", description="Growth-aware multi-agent search over multimodal tasks.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="plan, search every step, and answer")
    _common(p)
    p.add_argument("instruction", nargs="?")
    _media_arg(p)
    p.add_argument("--plan", type=Path, help="use this plan JSON instead of running cognition")
    p.add_argument("--replay", type=Path, metavar="RUN_DIR", help="re-run a stored run from its trace")
    p.add_argument("--parallel-steps", action="store_true", default=None)

    p = sub.add_parser("cognize", help="print the task plan for an instruction")
    _common(p)
    p.add_argument("instruction")
    _media_arg(p)
    p.add_argument("--max-rounds", type=int)

    p = sub.add_parser("reason", help="search for the answer to a question about the media")
    _common(p)
    p.add_argument("--question", required=True)
    _media_arg(p)
    p.add_argument("--modality", choices=[m.value for m in Modality])

    p = sub.add_parser("generate", help="search for the best artifact for a prompt")
    _common(p)
    p.add_argument("--prompt", required=True)
    p.add_argument("--modality", required=True, choices=[m.value for m in (Modality.IMAGE, Modality.VIDEO,
                                                                            Modality.AUDIO)])
    p.add_argument("--no-extend", action="store_true", help="start from the prompt as written")

    p = sub.add_parser("eval-instructions", help="score predicted output modalities against a dataset")
    _common(p)
    p.add_argument("--dataset", type=Path, required=True)
    p.add_argument("--predictions", type=Path, help="precomputed predictions; default runs cognition")
    p.add_argument("--json", action="store_true", help="print the report as JSON")

    p = sub.add_parser("trace", help="inspect a run's trace")
    tsub = p.add_subparsers(dest="trace_command", required=True, parser_class=_Parser)
    show = tsub.add_parser("show", help="print one line per event")
    show.add_argument("run_dir", type=Path)
    show.add_argument("--kind", choices=[k.value for k in EventKind], action="append")

    p = sub.add_parser("sweep-threshold", help="re-run the fixture task suite over a threshold grid")
    _common(p)
    p.add_argument("--grid", default="0.0,0.5,0.7,0.9,1.0")

    p = sub.add_parser("make-fixtures", help="record a fixture file from the synthetic backend")
    p.add_argument("--tasks", type=Path, required=True,
                   help="JSON list of {question, modality} sweep tasks")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-v", "--verbose", action="count", default=0)
    return parser


# -- wiring ------------------------------------------------------------------


def resolve_config(args: argparse.Namespace) -> Config:
    cfg = load_config(args.config)
    changes: dict = {}
    if args.offline:
        changes["offline"] = True
    if args.fixtures is not None:
        changes["fixtures"] = args.fixtures
    if args.runs_dir is not None:
        changes["runs_dir"] = args.runs_dir
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.deterministic:
        changes["deterministic_trace"] = True
    if args.chat is not None:
        changes["chat"] = dataclasses.replace(cfg.chat, kind=args.chat)
    settings = cfg.settings
    search = {k: v for k, v in (("threshold", args.threshold), ("beam_width", args.beam_width),
                                ("max_depth", args.max_depth), ("expansion_strategy", args.strategy))
              if v is not None}
    if search:
        try:
            settings = dataclasses.replace(
                settings,
                reasoning=dataclasses.replace(settings.reasoning, **search),
                generation=dataclasses.replace(settings.generation, **search),
                search={k: dataclasses.replace(v, **search) for k, v in settings.search.items()},
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    if getattr(args, "parallel_steps", None):
        settings = dataclasses.replace(settings, parallel_steps=True)
    if getattr(args, "max_rounds", None) is not None:
        settings = dataclasses.replace(settings, max_rounds=args.max_rounds)
    if getattr(args, "no_extend", False):
        settings = dataclasses.replace(settings, extend_prompts=False)
    cfg = dataclasses.replace(cfg, settings=settings, **changes)
    cfg.validate()
    return cfg


def build_backends(cfg: Config):
    """Chat and media backends for ``cfg``. Offline, remote backends become scripted ones."""
    entries = read_fixture_file(cfg.fixtures) if cfg.fixtures is not None else {}
    chat_kind = "scripted" if cfg.offline and cfg.chat.kind == "remote" else cfg.chat.kind
    media_kind = cfg.media.kind
    if cfg.offline and media_kind == "remote":
        media_kind = "scripted" if cfg.fixtures is not None else "stub"
    stub = StubMediaBackend()
    if media_kind == "scripted":
        media = ScriptedBackend(entries, media_fallback=stub)
    elif media_kind == "stub":
        media = stub
    else:
        media = RemoteMediaBackend(cfg.media.base_url, api_key_env=cfg.media.api_key_env,
                                   timeout_s=cfg.media.timeout_s, poll_interval_s=cfg.media.poll_interval_s)
    if chat_kind == "scripted":
        chat = ScriptedBackend(entries, media_fallback=stub)
    elif chat_kind == "synthetic":
        chat = SyntheticChatBackend(cfg.synthetic_seed, supports_token_probs=cfg.chat.supports_token_probs)
    else:
        chat = RemoteChatBackend(cfg.chat.base_url, cfg.chat.model, api_key_env=cfg.chat.api_key_env,
                                 timeout_s=cfg.chat.timeout_s, supports_token_probs=cfg.chat.supports_token_probs)
    return chat, media


def _backends(cfg: Config, args: argparse.Namespace):
    chat, media = build_backends(cfg)
    if getattr(args, "record", None) is not None:
        recorder = RecordingBackend(chat, media)
        args.recorder = recorder
        return recorder, recorder
    return chat, media


def _registries(cfg: Config):
    actions = ActionRegistry.load(cfg.catalog_extension)
    roles = registry_load(cfg.role_overrides, actions=actions)
    return roles, actions


def parse_media(items: Sequence[str]) -> list[MediaInput]:
    out = []
    for item in items:
        label, sep, path = item.partition("=")
        modality = None
        if sep and label in {m.value for m in Modality}:
            modality = Modality(label)
        else:
            path = item
        out.append(MediaInput.from_path(path, modality))
    return out


def _session(cfg: Config, mode: str, inputs: dict, chat, media) -> Session:
    roles, actions = _registries(cfg)
    return Session(cfg.runs_dir, mode=mode, inputs=inputs, chat_backend=chat, media_backend=media,
                   settings=cfg.settings, roles=roles, actions=actions, seed=cfg.seed,
                   deterministic=cfg.deterministic_trace)


def _report(record: RunRecord, run_dir: Path) -> None:
    print(f"run: {run_dir}")
    for step in record.step_outcomes:
        d = step.to_dict()
        if step.error:
            print(f"  step {step.index}: {d['kind']} FAILED {step.error}")
        elif step.delegated:
            print(f"  step {step.index}: {d['kind']} answered by the Speaker")
        else:
            best = d["best_node"]
            print(f"  step {step.index}: {d['kind']} {d['terminated_by']} explored={d['explored_count']} "
                  f"best={best['id']} score={best['score']:.4f}")
    for ref in record.artifacts:
        print(f"  artifact: {run_dir / ref.uri}")
    print(record.final_response)


# -- commands ----------------------------------------------------------------


def cmd_run(args: argparse.Namespace) -> int:
    cfg = resolve_config(args)
    roles, actions = _registries(cfg)
    if args.replay is not None:
        if not (args.replay / "trace.jsonl").is_file():
            raise ConfigError(f"{args.replay} is not a run directory")
        record = replay(args.replay, cfg.runs_dir, settings=cfg.settings, roles=roles, actions=actions,
                        deterministic=cfg.deterministic_trace)
        _report(record, record.run_dir or cfg.runs_dir)
        return _status(record)
    if not args.instruction:
        raise ConfigError("run needs an instruction (or --replay)")
    media_inputs = parse_media(args.media)
    plan_data = None
    if args.plan is not None:
        if not args.plan.is_file():
            raise ConfigError(f"plan file not found: {args.plan}")
        plan_data = json.loads(args.plan.read_text(encoding="utf-8"))
    chat, media = _backends(cfg, args)
    inputs = recorded_inputs("run", {"instruction": args.instruction, "plan": plan_data}, media_inputs)
    session = _session(cfg, "run", inputs, chat, media)
    refs = session.import_media(media_inputs)
    plan = load_plan(args.plan, refs) if args.plan is not None else None
    record = run(session, args.instruction, refs, plan=plan, plan_source=plan_data)
    _report(record, session.run_dir)
    return _status(record)


def _status(record: RunRecord) -> int:
    return EXIT_RUN_ERROR if any(s.error for s in record.step_outcomes) else EXIT_OK


def cmd_reason(args: argparse.Namespace) -> int:
    cfg = resolve_config(args)
    media_inputs = parse_media(args.media)
    modality = Modality(args.modality) if args.modality else (media_inputs[0].modality if media_inputs
                                                               else Modality.TEXT)
    chat, media = _backends(cfg, args)
    inputs = recorded_inputs("reason", {"question": args.question, "task_kind": str(TaskKind.reasoning(modality))},
                             media_inputs)
    session = _session(cfg, "reason", inputs, chat, media)
    refs = session.import_media(media_inputs)
    record = run_reasoning(session, args.question, refs, modality)
    _report(record, session.run_dir)
    return _status(record)


def cmd_generate(args: argparse.Namespace) -> int:
    cfg = resolve_config(args)
    modality = Modality(args.modality)
    chat, media = _backends(cfg, args)
    inputs = recorded_inputs("generate", {"prompt": args.prompt, "task_kind": str(TaskKind.generation(modality))}, [])
    session = _session(cfg, "generate", inputs, chat, media)
    record = run_generation(session, args.prompt, modality)
    _report(record, session.run_dir)
    return _status(record)


def _scratch_session(cfg: Config, chat, media, tmp: str) -> Session:
    return _session(dataclasses.replace(cfg, runs_dir=Path(tmp), deterministic_trace=True), "cognize", {}, chat,
                    media)


def cmd_cognize(args: argparse.Namespace) -> int:
    cfg = resolve_config(args)
    media_inputs = parse_media(args.media)
    chat, media = _backends(cfg, args)
    with tempfile.TemporaryDirectory(prefix="cognize-") as tmp:
        session = _scratch_session(cfg, chat, media, tmp)
        refs = session.import_media(media_inputs)
        plan = cognize(session.ctx, args.instruction, refs, cfg.settings.max_rounds)
    print(json.dumps(plan.to_dict(), indent=2, ensure_ascii=False))
    if not plan.approved:
        logger.warning("the plan was not approved after %d revisions", plan.revision_count)
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    samples = load_dataset(args.dataset)
    if args.predictions is not None:
        report = evaluate(samples, file_predictor(args.predictions))
    else:
        cfg = resolve_config(args)
        chat, media = _backends(cfg, args)
        with tempfile.TemporaryDirectory(prefix="eval-") as tmp:
            session = _scratch_session(cfg, chat, media, tmp)
            report = evaluate(samples, lambda text: plan_modalities(
                cognize(session.ctx, text, (), cfg.settings.max_rounds)))
    if args.json:
        print(json.dumps(report.to_dict(), indent=2))
    else:
        print(render_table(report, samples))
    return EXIT_OK


def cmd_trace_show(args: argparse.Namespace) -> int:
    path = args.run_dir / "trace.jsonl" if args.run_dir.is_dir() else args.run_dir
    if not path.is_file():
        raise ConfigError(f"no trace at {path}")
    header, events = read_trace(path)
    print(f"trace {header.get('schema')} v{header.get('version')} run={header.get('run_id')} "
          f"seed={header.get('seed')} events={len(events)}")
    kinds = set(args.kind or [])
    for event in events:
        if not kinds or event.kind.value in kinds:
            print(describe_event(event))
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    cfg = resolve_config(args)
    try:
        grid = parse_grid(args.grid)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if cfg.fixtures is None:
        raise ConfigError("sweep-threshold needs --fixtures with a 'tasks' list")
    tasks = [SweepTask.from_dict(t) for t in read_fixture_file(cfg.fixtures).get("tasks") or []]
    chat, media = _backends(cfg, args)
    roles, actions = _registries(cfg)
    rows = sweep(tasks, grid, chat_backend=chat, media_backend=media, base_config=cfg.settings.reasoning,
                 roles=roles, actions=actions, probs_fallback=cfg.settings.probs_fallback, seed=cfg.seed)
    print(render_sweep(rows))
    return EXIT_RUN_ERROR if any(r.failures for r in rows) else EXIT_OK


def cmd_make_fixtures(args: argparse.Namespace) -> int:
    try:
        raw = json.loads(args.tasks.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read tasks {args.tasks}: {exc}") from None
    tasks = [SweepTask.from_dict(t) for t in raw]
    recorder = RecordingBackend(SyntheticChatBackend(args.seed), StubMediaBackend())
    # a threshold above 1 explores everything, so any lower threshold replays a prefix
    sweep(tasks, [1.5], chat_backend=recorder, media_backend=recorder,
          base_config=SearchConfig(threshold=1.5))
    recorder.dump(args.out, [t.to_dict() for t in tasks])
    print(f"wrote {len(recorder.entries)} fixtures for {len(tasks)} tasks to {args.out}")
    return EXIT_OK


COMMANDS = {
    "run": cmd_run,
    "cognize": cmd_cognize,
    "reason": cmd_reason,
    "generate": cmd_generate,
    "eval-instructions": cmd_eval,
    "trace": cmd_trace_show,
    "sweep-threshold": cmd_sweep,
    "make-fixtures": cmd_make_fixtures,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose if hasattr(args, "verbose") else 0, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        code = COMMANDS[args.command](args)
        recorder = getattr(args, "recorder", None)
        if recorder is not None:
            recorder.dump(args.record)
        return code
    except _CONFIG_ERRORS as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except AgentSearchError as exc:
        print(f"run failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUN_ERROR
    except ValueError as exc:  # bad argument values that argparse cannot see, e.g. a blank question
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except OSError as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return EXIT_RUN_ERROR


if __name__ == "__main__":
    sys.exit(main())
