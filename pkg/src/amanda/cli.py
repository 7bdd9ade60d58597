"""Operator command line: training, synthesis, evaluation, chat, serving.

Exit codes: 0 on success, 1 on validation errors (bad files, bad
arguments, malformed data), 2 on unexpected runtime failures.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import dsp
from .dialogue import DialogueState, Thresholds, handle_message, switch_language
from .evaluation import (
    CsvValidationError,
    flag_reference_divergence,
    ingest_csv,
    mos_aggregate,
    render_mos_report,
    render_sus_report,
    report_json,
    sus_summary,
)
from .kb import KbError, load_kb
from .nlu import IntentClassifier, NluError, load_training_corpus, train_intents

VALIDATION_ERRORS = (
    FileNotFoundError,
    NotADirectoryError,
    ValueError,  # covers KbError, NluError, CsvValidationError, ParameterError
    KeyError,
)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except VALIDATION_ERRORS as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        return 130
    except Exception as e:
        print(f"unexpected failure: {type(e).__name__}: {e}", file=sys.stderr)
        return 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="amanda",
        description="Diabetes-care conversational agent: TTS training, NLU, evaluation, chat service.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train-tts", help="train the speech model on a corpus directory")
    p.add_argument("--data", required=True, help="corpus dir: metadata.csv (id|transcript) + <id>.wav")
    p.add_argument("--steps", type=int, default=1000)
    p.add_argument("--batch", type=int, default=32)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--lambda", dest="lam", type=float, default=1.0,
                   help="consistency-regularizer weight")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-mels", type=int, default=80)
    p.add_argument("--hidden", type=int, default=64, help="encoder/decoder width")
    p.add_argument("--out", required=True, help="checkpoint path to write")
    p.set_defaults(func=cmd_train_tts)

    p = sub.add_parser("synth", help="synthesize speech from text")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--text", required=True)
    p.add_argument("--out", required=True, help="WAV path to write")
    p.add_argument("--max-frames", type=int, default=400)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train-nlu", help="train the intent classifier")
    p.add_argument("--corpus", required=True, help="JSON training corpus")
    p.add_argument("--kb", help="KB file used to resolve intent topics")
    p.add_argument("--epochs", type=int, default=400)
    p.add_argument("--lr", type=float, default=4.0)
    p.add_argument("--out", required=True, help="model checkpoint path to write")
    p.set_defaults(func=cmd_train_nlu)

    p = sub.add_parser("chat", help="terminal chat session")
    p.add_argument("--kb", required=True)
    p.add_argument("--model", required=True, help="trained NLU checkpoint")
    p.add_argument("--lang", choices=["en", "zh"], default="en")
    p.add_argument("--confirm-threshold", type=float, default=0.35)
    p.add_argument("--direct-threshold", type=float, default=1.01)
    p.set_defaults(func=cmd_chat)

    p = sub.add_parser("eval-mos", help="aggregate mean-opinion-score responses")
    p.add_argument("--csv", required=True)
    p.add_argument("--json-out", help="also write the report as JSON")
    p.set_defaults(func=cmd_eval_mos)

    p = sub.add_parser("eval-sus", help="score usability-scale responses")
    p.add_argument("--csv", required=True)
    p.add_argument("--json-out", help="also write the report as JSON")
    p.set_defaults(func=cmd_eval_sus)

    p = sub.add_parser("serve", help="run the HTTP chat service")
    p.add_argument("--config", help="service config JSON (or set AMANDA_CONFIG)")
    p.set_defaults(func=cmd_serve)

    return parser


def cmd_train_tts(args) -> int:
    from .nn import LrSchedule
    from .tts import TtsConfig, TtsModelParams, load_corpus_dir, sample_loss, split_corpus, train_on_pairs

    pairs = load_corpus_dir(args.data, n_mels=args.n_mels)
    train_pairs, test_pairs = split_corpus(pairs, test_fraction=0.1, seed=args.seed)
    if not train_pairs:
        train_pairs = pairs
    config = TtsConfig(
        n_mels=args.n_mels,
        d_enc=args.hidden,
        d_dec=args.hidden,
        d_att=args.hidden,
        postnet_hidden=args.hidden,
    )
    params = TtsModelParams.init(config, seed=args.seed)
    sched = LrSchedule(initial_lr=args.lr)
    print(f"corpus: {len(train_pairs)} train / {len(test_pairs)} held-out pairs")
    if args.steps > 0:
        history = train_on_pairs(
            train_pairs,
            params,
            steps=args.steps,
            batch_size=args.batch,
            sched=sched,
            lam=args.lam,
            seed=args.seed,
            log_every=max(args.steps // 10, 1),
        )
        print(f"final training loss: {history[-1]:.4f}")
        if test_pairs:
            held = sum(
                sample_loss(t, m, params, lam=args.lam).total.item() for t, m in test_pairs
            ) / len(test_pairs)
            print(f"held-out loss: {held:.4f}")
    params.save(
        args.out,
        {
            "step": args.steps,
            "schedule": {"initial_lr": args.lr, "decay_start_step": sched.decay_start_step},
            "lambda": args.lam,
            "seed": args.seed,
        },
    )
    print(f"checkpoint written: {args.out}")
    return 0


def cmd_synth(args) -> int:
    from .tts import TtsModelParams, encode_text, synthesize

    params, _ = TtsModelParams.load(args.ckpt)
    out = synthesize(encode_text(args.text), params, max_frames=args.max_frames)
    cfg = dsp.StftConfig()
    bank = dsp.mel_filterbank(cfg.n_fft, params.config.n_mels)
    clip = dsp.mel_to_audio(
        dsp.MelSpectrogram(out.mel_after, n_mels=params.config.n_mels), cfg, bank
    )
    dsp.write_wav(args.out, clip)
    print(
        json.dumps(
            {
                "out": str(args.out),
                "frames": out.stop_step,
                "samples": len(clip),
                "hop": cfg.hop,
                "n_fft": cfg.n_fft,
            }
        )
    )
    return 0


def cmd_train_nlu(args) -> int:
    kb = load_kb(args.kb) if args.kb else None
    examples, labels = load_training_corpus(args.corpus, kb=kb)
    clf = train_intents(examples, labels, epochs=args.epochs, lr=args.lr)
    hits = sum(clf.predict(e.text, e.language).top_intent == e.intent for e in examples)
    print(f"training accuracy: {hits}/{len(examples)}")
    clf.save(args.out)
    print(f"model written: {args.out}")
    return 0


def cmd_chat(args) -> int:
    kb = load_kb(args.kb)
    clf = IntentClassifier.load(args.model)
    thresholds = Thresholds(confirm=args.confirm_threshold, direct=args.direct_threshold)
    state = DialogueState(session_id="terminal", language=args.lang)
    print("Chat session started. Commands: /lang en|zh, /quit.")
    from .kb import DEMO_DISCLAIMER

    print(DEMO_DISCLAIMER)
    while True:
        try:
            line = input("you> ")
        except EOFError:
            print()
            return 0
        stripped = line.strip()
        if stripped == "/quit":
            return 0
        if stripped.startswith("/lang"):
            parts = stripped.split()
            if len(parts) == 2 and parts[1] in ("en", "zh"):
                state = switch_language(state, parts[1])
                print(f"[language set to {parts[1]}]")
            else:
                print("[usage: /lang en|zh]")
            continue
        state, reply = handle_message(state, line, clf, kb, thresholds)
        print(f"bot[{reply.kind}]> {reply.text}")
        for q in reply.suggestions:
            print(f"  suggestion: {q}")


def cmd_eval_mos(args) -> int:
    try:
        responses = ingest_csv(args.csv, "mos")
    except CsvValidationError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    report = mos_aggregate(responses)
    flags = flag_reference_divergence(report.overall)
    print(render_mos_report(report, flags))
    if args.json_out:
        payload = report.to_json_dict()
        payload["reference_flags"] = flags
        Path(args.json_out).write_text(
            json.dumps(payload, indent=2, ensure_ascii=False), encoding="utf-8"
        )
        print(f"JSON report written: {args.json_out}")
    return 0


def cmd_eval_sus(args) -> int:
    try:
        responses = ingest_csv(args.csv, "sus")
    except CsvValidationError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    summary = sus_summary(responses)
    print(render_sus_report(summary))
    if args.json_out:
        Path(args.json_out).write_text(report_json(summary), encoding="utf-8")
        print(f"JSON report written: {args.json_out}")
    return 0


def cmd_serve(args) -> int:
    from .service import ServiceConfig, serve_forever

    config_path = args.config or os.environ.get("AMANDA_CONFIG")
    if not config_path:
        raise ValueError("no config: pass --config or set AMANDA_CONFIG")
    config = ServiceConfig.from_file(config_path)
    serve_forever(config)
    return 0


if __name__ == "__main__":
    sys.exit(main())
