"""Command-line entry point.

Exit status: 0 on success, 1 when inputs fail validation (one finding per
line on stderr), 2 on usage errors.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from ._parallel import map_ordered, resolve_threads
from .align import project_assoc
from .datamodel import (
    Bundle,
    FrameScoreStream,
    load_bundle,
    load_manifest,
    validate_bundle,
    write_bundle,
    write_embedding_sidecar,
    write_manifest,
)
from .exceptions import AsdkitError, ParseError
from .fusion import DEFAULT_GRID, fuse_streams, sweep_alpha
from .fva import HeadParams, TrainConfig, init_params, score_clip, train_head
from .metrics import evaluate
from .report import (
    load_report_json,
    write_json,
    write_masking_csv,
    write_report_json,
    write_strata_csv,
    write_summary_csv,
    write_sweep_csv,
)
from .simgen import SimConfig, generate_bundle, synth_sync_scores
from .strata import evaluate_strata, masking_experiment, stratify_by_quality, summarize_masking

log = logging.getLogger("asdkit")

MATCH_KEYS = ("clip_id", "utt_id", "person_id", "probability")


class UsageError(Exception):
    pass


class Findings(Exception):
    def __init__(self, findings):
        self.findings = list(findings)
        super().__init__(f"{len(self.findings)} finding(s)")


# --------------------------------------------------------------------------
# helpers

def parse_grid(spec: str) -> list[float]:
    """``start:stop:step`` (inclusive) or a comma-separated list."""
    spec = spec.strip()
    try:
        if ":" in spec:
            start, stop, step = (float(x) for x in spec.split(":"))
            if step <= 0:
                raise ValueError
            n = int(np.floor((stop - start) / step + 1e-9)) + 1
            return [round(start + i * step, 10) for i in range(n)]
        return [float(x) for x in spec.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad grid {spec!r}; use start:stop:step or a,b,c") from None


def _method_spec(text: str) -> tuple[str, str]:
    name, sep, path = text.partition("=")
    if not sep or not name or not path:
        raise argparse.ArgumentTypeError(f"expected NAME=FILE, got {text!r}")
    return name, path


def _existing(path: str) -> Path:
    p = Path(path)
    if not p.exists():
        raise UsageError(f"no such file or directory: {path}")
    return p


def _load_bundle(args) -> Bundle:
    return load_bundle(_existing(args.bundle), strict=not args.lenient)


def _load_streams(path: str, args, bundle: Bundle | None = None) -> list[FrameScoreStream]:
    return load_manifest(
        _existing(path), "scores", strict=not args.lenient, tracks=bundle.tracks if bundle else None
    )


def write_matches(path, matches: Sequence[tuple[str, str, float]], bundle: Bundle) -> None:
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        for uid, pid, prob in matches:
            rec = {"clip_id": bundle.utterance(uid).clip_id, "utt_id": uid, "person_id": pid, "probability": prob}
            fh.write(json.dumps(rec, separators=(",", ":")) + "\n")


def read_matches(path) -> list[tuple[str, str, float]]:
    out = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                if set(rec) != set(MATCH_KEYS):
                    raise ValueError(f"keys must be {MATCH_KEYS}")
                p = float(rec["probability"])
                if not 0.0 <= p <= 1.0:
                    raise ValueError("probability outside [0, 1]")
            except (ValueError, TypeError, AttributeError) as exc:
                raise ParseError(path, line_no, str(exc)) from None
            out.append((rec["utt_id"], rec["person_id"], p))
    return out


def _check(findings) -> None:
    if findings:
        raise Findings(findings)


# --------------------------------------------------------------------------
# subcommands

def cmd_ingest(args) -> None:
    bundle = load_bundle(_existing(args.input), strict=not args.lenient)
    _check(validate_bundle(bundle.clips, bundle.tracks, bundle.labels, bundle.utterances,
                           bundle.utt_embeddings, bundle.face_embeddings))
    write_bundle(args.out, bundle)
    if args.sidecar:
        write_embedding_sidecar(Path(args.out) / "utt_emb.bin",
                                ((e.utt_id, e.vector) for e in bundle.utt_embeddings))
        write_embedding_sidecar(Path(args.out) / "face_emb.bin",
                                ((f"{f.clip_id}/{f.person_id}", f.frames) for f in bundle.face_embeddings))


def cmd_validate(args) -> None:
    bundle = load_bundle(_existing(args.input), strict=not args.lenient)
    scores = []
    for path in args.scores or ():
        scores.extend(_load_streams(path, args))
    _check(validate_bundle(bundle.clips, bundle.tracks, bundle.labels, bundle.utterances,
                           bundle.utt_embeddings, bundle.face_embeddings, scores))


def cmd_simulate(args) -> None:
    values = {}
    if args.config:
        values.update(SimConfig.from_toml(_existing(args.config)).to_mapping())
    values["seed"] = args.seed
    if args.n_clips is not None:
        values["n_clips"] = args.n_clips
    cfg = SimConfig.from_mapping(values)
    bundle = generate_bundle(cfg, threads=args.threads)
    out = Path(args.out)
    write_bundle(out, bundle)
    write_manifest(out / "sync_scores.jsonl", synth_sync_scores(cfg, bundle))
    write_json(out / "sim_config.json", cfg.to_mapping())


def cmd_fva_train(args) -> None:
    bundle = _load_bundle(args)
    if not bundle.utt_embeddings or not bundle.face_embeddings:
        raise UsageError("bundle has no embeddings to train on")
    cfg = TrainConfig(
        lr=args.lr,
        decay_factor=args.decay_factor,
        decay_every=args.decay_every,
        epochs=args.epochs,
        freeze_projections=not args.train_projections,
        train_encoder_ffn=not args.freeze_ffn,
        max_frames=args.max_frames,
        seed=args.seed,
    )
    init = init_params(bundle.utt_embeddings[0].dim, bundle.face_embeddings[0].dim,
                       args.d, args.heads, args.xattn_heads, rng=args.seed)
    params, trace = train_head(init, bundle, cfg)
    params.save(args.out)
    if args.loss_out:
        lines = [f"{i},{loss!r}\n" for i, loss in enumerate(trace)]
        Path(args.loss_out).write_text("epoch,loss\n" + "".join(lines), encoding="utf-8")


def cmd_fva_score(args) -> None:
    bundle = _load_bundle(args)
    params = HeadParams.load(_existing(args.params))
    clips = [c for c in bundle.clip_ids if bundle.faces_of(c)]
    parts = map_ordered(lambda c: score_clip(params, bundle, c, args.max_frames), clips, args.threads)
    write_matches(args.out, [m for part in parts for m in part], bundle)


def cmd_project(args) -> None:
    bundle = _load_bundle(args)
    matches = read_matches(_existing(args.matches))
    fps = {c.clip_id: c.video_fps for c in bundle.clips}
    write_manifest(args.out, project_assoc(matches, bundle.utterances, bundle.tracks, fps))


def cmd_fuse(args) -> None:
    sync = _load_streams(args.sync, args)
    assoc = _load_streams(args.assoc, args)
    write_manifest(args.out, fuse_streams(sync, assoc, args.alpha))


def cmd_sweep(args) -> None:
    labels = load_manifest(_existing(args.labels), "labels", strict=not args.lenient)
    result = sweep_alpha(labels, _load_streams(args.sync, args), _load_streams(args.assoc, args),
                         args.grid, args.metric)
    write_sweep_csv(args.out, result.table)


def cmd_eval(args) -> None:
    labels = load_manifest(_existing(args.labels), "labels", strict=not args.lenient)
    streams = _load_streams(args.scores, args)
    report = evaluate(streams, labels, model=args.model, ensemble=args.ensemble, alpha=args.alpha,
                      metric=args.metric)
    write_report_json(args.out, report)
    if args.csv:
        write_summary_csv(args.csv, [report])


def cmd_stratify(args) -> None:
    bundle = _load_bundle(args)
    methods = {name: _load_streams(path, args, bundle) for name, path in args.method}
    strata = stratify_by_quality(bundle.tracks, args.bins)
    write_strata_csv(args.out, evaluate_strata(strata, methods, bundle.labels, args.metric))


def cmd_mask_sweep(args) -> None:
    bundle = _load_bundle(args)
    sync = _load_streams(args.sync, args, bundle)
    matches = read_matches(_existing(args.matches))
    alpha = args.alpha
    if alpha is None:
        fps = {c.clip_id: c.video_fps for c in bundle.clips}
        assoc = project_assoc(matches, bundle.utterances, bundle.tracks, fps)
        alpha = sweep_alpha(bundle.labels, sync, assoc, DEFAULT_GRID, "ap").best_alpha
    trials = masking_experiment(bundle, sync, matches, args.grid, args.trials, args.seed,
                                alpha=alpha, mode=args.mode, strength=args.strength, threads=args.threads)
    write_masking_csv(args.out, summarize_masking(trials))


def cmd_report(args) -> None:
    write_summary_csv(args.out, [load_report_json(_existing(p)) for p in args.reports])


# --------------------------------------------------------------------------
# parser

def _alpha_or_auto(text: str):
    if text == "auto":
        return None
    v = float(text)
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError(f"alpha {v} outside [0, 1]")
    return v


def _alpha(text: str) -> float:
    v = _alpha_or_auto(text)
    if v is None:
        raise argparse.ArgumentTypeError("alpha must be a number here")
    return v


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected an integer >= 1, got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--lenient", action="store_true", help="ignore unknown manifest keys")
    common.add_argument("--threads", type=_positive_int, default=None,
                        help="worker threads (default: $ASDKIT_THREADS or 1)")
    common.add_argument("--config", help="flat TOML file of option defaults")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="asdkit", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"asdkit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name, func, help_, aliases=()):
        p = sub.add_parser(name, parents=[common], help=help_, aliases=list(aliases))
        p.set_defaults(func=func)
        return p

    p = add("ingest", cmd_ingest, "validate a manifest directory and rewrite it canonically")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--sidecar", action="store_true", help="also write binary embedding sidecars")

    p = add("validate", cmd_validate, "cross-check a manifest directory")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--scores", action="append", help="score manifest to check against the tracks")

    p = add("simulate", cmd_simulate, "generate a synthetic bundle and sync scores")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--n-clips", type=_positive_int)

    p = add("fva-train", cmd_fva_train, "train the association head")
    p.add_argument("--bundle", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--lr", type=float, default=1e-5)
    p.add_argument("--decay-factor", type=float, default=0.2)
    p.add_argument("--decay-every", type=_positive_int, default=5)
    p.add_argument("--d", type=_positive_int, default=64)
    p.add_argument("--heads", type=_positive_int, default=4)
    p.add_argument("--xattn-heads", type=_positive_int, default=4)
    p.add_argument("--max-frames", type=_positive_int, default=128)
    p.add_argument("--train-projections", action="store_true")
    p.add_argument("--freeze-ffn", action="store_true")
    p.add_argument("--loss-out", help="CSV of per-epoch mean loss")

    p = add("fva-score", cmd_fva_score, "score utterance/identity matches")
    p.add_argument("--bundle", required=True)
    p.add_argument("--params", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--max-frames", type=_positive_int, default=128)

    p = add("project", cmd_project, "project matches onto face-track frames")
    p.add_argument("--bundle", required=True)
    p.add_argument("--matches", required=True)
    p.add_argument("--out", required=True)

    p = add("fuse", cmd_fuse, "weighted-mean fusion of sync and assoc scores")
    p.add_argument("--alpha", type=_alpha, required=True)
    p.add_argument("--sync", required=True)
    p.add_argument("--assoc", required=True)
    p.add_argument("--out", required=True)

    p = add("sweep", cmd_sweep, "score fusion over a grid of alpha values")
    p.add_argument("--labels", required=True)
    p.add_argument("--sync", required=True)
    p.add_argument("--assoc", required=True)
    p.add_argument("--grid", type=parse_grid, default=list(DEFAULT_GRID))
    p.add_argument("--metric", choices=("map", "ap"), default="map")
    p.add_argument("--out", required=True)

    p = add("eval", cmd_eval, "evaluate one score manifest")
    p.add_argument("--scores", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--metric", choices=("map", "ap"), default="map")
    p.add_argument("--model", default="model")
    p.add_argument("--ensemble", action="store_true")
    p.add_argument("--alpha", type=_alpha, default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--csv", help="also write a one-row summary CSV")

    p = add("stratify", cmd_stratify, "AP per face-quality stratum")
    p.add_argument("--bundle", required=True)
    p.add_argument("--method", type=_method_spec, action="append", required=True, metavar="NAME=FILE")
    p.add_argument("--bins", type=_positive_int, default=8)
    p.add_argument("--metric", choices=("map", "ap"), default="ap")
    p.add_argument("--out", required=True)

    p = add("mask-sweep", cmd_mask_sweep, "AP under random utterance masking")
    p.add_argument("--bundle", required=True)
    p.add_argument("--sync", required=True)
    p.add_argument("--matches", required=True)
    p.add_argument("--grid", type=parse_grid, default=parse_grid("0:1:0.1"))
    p.add_argument("--trials", type=_positive_int, default=10)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--alpha", type=_alpha_or_auto, default=None, help="number or 'auto' (default)")
    p.add_argument("--mode", choices=("silence", "noise"), default="silence")
    p.add_argument("--strength", type=float, default=0.5)
    p.add_argument("--out", required=True)

    p = add("report", cmd_report, "summary CSV from eval JSON reports")
    p.add_argument("--reports", nargs="+", required=True)
    p.add_argument("--out", required=True)

    # `fva train` / `fva score` spellings
    fva = sub.add_parser("fva", help="association head (train | score)")
    fva_sub = fva.add_subparsers(dest="fva_command", required=True)
    for name in ("train", "score"):
        src = sub.choices[f"fva-{name}"]
        q = fva_sub.add_parser(name, parents=[src], add_help=False, conflict_handler="resolve")
        q.set_defaults(func=src.get_default("func"))
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> list[str]:
    """Turn values from ``--config`` into defaults; explicit flags still win."""
    # a full parse would already fail on options the file is meant to supply
    config = None
    for i, tok in enumerate(argv):
        if tok == "--config" and i + 1 < len(argv):
            config = argv[i + 1]
        elif tok.startswith("--config="):
            config = tok.split("=", 1)[1]
    words = [tok for tok in argv if not tok.startswith("-")]
    choices = parser._subparsers._group_actions[0].choices
    if config is None or not words or words[0] not in choices or words[0] == "simulate":
        return argv
    import tomli

    with _existing(config).open("rb") as fh:
        values = tomli.load(fh)
    command = words[0]
    sp = choices[command]
    if command == "fva":
        fva_choices = sp._subparsers._group_actions[0].choices
        if len(words) < 2 or words[1] not in fva_choices:
            return argv
        sp = fva_choices[words[1]]
    known = {a.dest: a for a in sp._actions}
    for key, val in values.items():
        dest = key.replace("-", "_")
        if dest not in known:
            raise UsageError(f"config key {key!r} is not an option of {command}")
        action = known[dest]
        if isinstance(val, str) and action.type is not None:
            val = action.type(val)
        sp.set_defaults(**{dest: val})
        action.required = False
    return argv


def run(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _apply_config(parser, argv)
        args = parser.parse_args(argv)
        args.threads = resolve_threads(args.threads)
    except SystemExit as exc:
        return int(exc.code or 0)
    except (UsageError, ValueError) as exc:
        print(f"asdkit: error: {exc}", file=sys.stderr)
        return 2
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except UsageError as exc:
        print(f"asdkit: error: {exc}", file=sys.stderr)
        return 2
    except Findings as exc:
        for f in exc.findings:
            print(str(f), file=sys.stderr)
        return 1
    except AsdkitError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
