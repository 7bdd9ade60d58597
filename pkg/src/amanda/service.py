"""HTTP chat and speech service.

Logic tier: each POST /api/chat runs intent prediction and the dialogue
engine under a per-session lock, persists the user and bot turns
atomically, and (when speech is enabled) attaches a stable audio URL.
Data tier: an append-only document store holds chat records and security
logs; audio WAVs are cached on disk keyed by content hash.  A built web
client, when present, is served statically at /.
"""

from __future__ import annotations

import hashlib
import json
import re
import threading
import time
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

import numpy as np

from . import dsp
from .dialogue import BotReply, DialogueState, Thresholds, handle_message, switch_language
from .kb import KnowledgeBase, load_kb
from .nlu import IntentClassifier
from .store import DocumentStore, FileDocumentStore

MAX_BODY_BYTES = 64 * 1024
MAX_SESSION_ID_LEN = 128
SENTENCE_SPLIT = re.compile(r"(?<=[.!?。！？])\s*")
TTS_CHUNK_CHARS = 200

CHAT_COLLECTION = "chat"
SECURITY_COLLECTION = "security"


@dataclass(frozen=True)
class ChatRecord:
    session_id: str
    timestamp: int  # UTC milliseconds
    direction: str  # "user" | "bot"
    text: str
    language: str
    reply_kind: str | None = None  # bot turns only
    audio_ref: str | None = None

    def to_doc(self) -> dict:
        doc = {
            "session_id": self.session_id,
            "timestamp": self.timestamp,
            "direction": self.direction,
            "text": self.text,
            "language": self.language,
        }
        if self.reply_kind is not None:
            doc["reply_kind"] = self.reply_kind
        if self.audio_ref is not None:
            doc["audio_ref"] = self.audio_ref
        return doc


@dataclass(frozen=True)
class ServiceConfig:
    kb_path: str
    nlu_model_path: str
    store_dir: str
    port: int = 8080
    tts_checkpoint_path: str | None = None
    tts_enabled: bool = False
    thresholds: Thresholds = field(default_factory=Thresholds)
    static_dir: str | None = None

    @classmethod
    def from_file(cls, path) -> "ServiceConfig":
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        thresholds = Thresholds(**raw.get("thresholds", {}))
        config = cls(
            kb_path=raw["kb_path"],
            nlu_model_path=raw["nlu_model_path"],
            store_dir=raw["store_dir"],
            port=int(raw.get("port", 8080)),
            tts_checkpoint_path=raw.get("tts_checkpoint_path"),
            tts_enabled=bool(raw.get("tts_enabled", False)),
            thresholds=thresholds,
            static_dir=raw.get("static_dir"),
        )
        config.validate()
        return config

    def validate(self) -> None:
        for label, p in (("kb_path", self.kb_path), ("nlu_model_path", self.nlu_model_path)):
            if not Path(p).exists():
                raise FileNotFoundError(f"{label}: {p} does not exist")
        if self.tts_enabled:
            if not self.tts_checkpoint_path:
                raise ValueError("tts_enabled requires tts_checkpoint_path")
            if not Path(self.tts_checkpoint_path).exists():
                raise FileNotFoundError(f"tts_checkpoint_path: {self.tts_checkpoint_path} does not exist")


class Speaker:
    """Synthesizes reply audio and caches immutable WAVs by content hash."""

    def __init__(self, checkpoint_path, audio_dir, max_frames: int = 400):
        from .tts import TtsModelParams  # deferred: the service can run without TTS

        self.params, _ = TtsModelParams.load(checkpoint_path)
        self.audio_dir = Path(audio_dir)
        self.audio_dir.mkdir(parents=True, exist_ok=True)
        self.max_frames = max_frames
        self.cfg = dsp.StftConfig()
        self.bank = dsp.mel_filterbank(self.cfg.n_fft, self.params.config.n_mels)
        self._fingerprint = hashlib.sha256(Path(checkpoint_path).read_bytes()).hexdigest()[:8]
        self._lock = threading.Lock()

    def audio_id(self, text: str, language: str) -> str:
        key = f"{self._fingerprint}|{language}|{text}"
        return hashlib.sha256(key.encode("utf-8")).hexdigest()[:16]

    def speak(self, text: str, language: str) -> str:
        """Synthesize (or reuse) the WAV for a reply; returns the audio id."""
        from .tts import encode_text, synthesize

        audio_id = self.audio_id(text, language)
        path = self.audio_dir / f"{audio_id}.wav"
        with self._lock:
            if path.exists():
                return audio_id
            chunks = _sentence_chunks(text) if len(text) > TTS_CHUNK_CHARS else [text]
            pieces = []
            for chunk in chunks:
                mel = synthesize(encode_text(chunk), self.params, max_frames=self.max_frames)
                clip = dsp.mel_to_audio(
                    dsp.MelSpectrogram(mel.mel_after, n_mels=self.params.config.n_mels),
                    self.cfg,
                    self.bank,
                )
                pieces.append(clip.samples)
            joined = np.concatenate(pieces) if len(pieces) > 1 else pieces[0]
            tmp = path.with_suffix(".tmp")
            dsp.write_wav(tmp, dsp.AudioClip(joined))
            tmp.rename(path)
        return audio_id

    def wav_path(self, audio_id: str) -> Path:
        return self.audio_dir / f"{audio_id}.wav"


def _sentence_chunks(text: str) -> list:
    parts = [p.strip() for p in SENTENCE_SPLIT.split(text) if p.strip()]
    return parts or [text]


class RequestError(Exception):
    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status


class ChatService:
    """Transport-independent core shared by the HTTP layer and tests."""

    def __init__(
        self,
        kb: KnowledgeBase,
        classifier: IntentClassifier,
        store: DocumentStore,
        thresholds: Thresholds = Thresholds(),
        speaker: Speaker | None = None,
    ):
        self.kb = kb
        self.classifier = classifier
        self.store = store
        self.thresholds = thresholds
        self.speaker = speaker
        self._sessions: dict = {}
        self._session_locks: dict = {}
        self._last_timestamp: dict = {}
        self._registry_lock = threading.Lock()

    @classmethod
    def from_config(cls, config: ServiceConfig) -> "ChatService":
        config.validate()
        store = FileDocumentStore(config.store_dir)
        speaker = None
        if config.tts_enabled:
            speaker = Speaker(config.tts_checkpoint_path, Path(config.store_dir) / "audio")
        return cls(
            kb=load_kb(config.kb_path),
            classifier=IntentClassifier.load(config.nlu_model_path),
            store=store,
            thresholds=config.thresholds,
            speaker=speaker,
        )

    def _session_lock(self, session_id: str) -> threading.Lock:
        with self._registry_lock:
            if session_id not in self._session_locks:
                self._session_locks[session_id] = threading.Lock()
            return self._session_locks[session_id]

    def _timestamp(self, session_id: str) -> int:
        now = int(time.time() * 1000)
        last = self._last_timestamp.get(session_id, 0)
        ts = max(now, last)
        self._last_timestamp[session_id] = ts
        return ts

    def security_log(self, module: str, severity: str, detail: dict) -> None:
        self.store.append(
            SECURITY_COLLECTION,
            {
                "timestamp": int(time.time() * 1000),
                "module": module,
                "severity": severity,
                "detail": detail,
            },
        )

    def chat(self, session_id: str, text: str, language: str) -> dict:
        """One user turn: NLU -> dialogue -> persistence -> optional speech."""
        if not isinstance(session_id, str) or not session_id or len(session_id) > MAX_SESSION_ID_LEN:
            raise RequestError(400, "session_id must be a non-empty string")
        if language not in ("en", "zh"):
            raise RequestError(400, "language must be 'en' or 'zh'")
        if not isinstance(text, str):
            raise RequestError(400, "text must be a string")

        with self._session_lock(session_id):
            state = self._sessions.get(session_id)
            if state is None:
                state = DialogueState(session_id=session_id, language=language)
            elif state.language != language:
                state = switch_language(state, language)
            new_state, reply = handle_message(
                state, text, self.classifier, self.kb, self.thresholds
            )

            audio_ref = None
            if self.speaker is not None and reply.text:
                audio_ref = self.speaker.speak(reply.text, language)
                reply = BotReply(
                    text=reply.text,
                    kind=reply.kind,
                    suggestions=reply.suggestions,
                    audio_ref=audio_ref,
                )

            user_record = ChatRecord(
                session_id=session_id,
                timestamp=self._timestamp(session_id),
                direction="user",
                text=text,
                language=language,
            )
            bot_record = ChatRecord(
                session_id=session_id,
                timestamp=self._timestamp(session_id),
                direction="bot",
                text=reply.text,
                language=language,
                reply_kind=reply.kind,
                audio_ref=audio_ref,
            )
            self.store.append_many(
                CHAT_COLLECTION, [user_record.to_doc(), bot_record.to_doc()]
            )
            self._sessions[session_id] = new_state

        response = {
            "reply_text": reply.text,
            "kind": reply.kind,
            "suggestions": list(reply.suggestions),
            "state_phase": new_state.phase,
        }
        if audio_ref is not None:
            response["audio_url"] = f"/api/audio/{audio_ref}"
        return response

    def history(self, session_id: str) -> list:
        records = [d for d in self.store.scan(CHAT_COLLECTION) if d.get("session_id") == session_id]
        if not records:
            raise RequestError(404, f"unknown session {session_id!r}")
        return records

    def audio_bytes(self, audio_id: str) -> bytes:
        if self.speaker is None or not re.fullmatch(r"[0-9a-f]{16}", audio_id or ""):
            raise RequestError(404, "unknown audio id")
        path = self.speaker.wav_path(audio_id)
        if not path.exists():
            raise RequestError(404, "unknown audio id")
        return path.read_bytes()


_PLACEHOLDER_PAGE = (
    "<!doctype html><html><head><meta charset='utf-8'><title>AMANDA</title></head>"
    "<body><h1>AMANDA service is running</h1>"
    "<p>No web client is bundled at this path; the API lives under /api.</p>"
    "</body></html>"
)

_STATIC_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".json": "application/json",
    ".svg": "image/svg+xml",
    ".png": "image/png",
    ".ico": "image/x-icon",
    ".map": "application/json",
}


class _Handler(BaseHTTPRequestHandler):
    service: ChatService = None  # set by make_server
    static_dir: Path | None = None

    # quiet the default stderr access log
    def log_message(self, fmt, *args):
        pass

    def _send_json(self, status: int, payload: dict) -> None:
        body = json.dumps(payload, ensure_ascii=False).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _send_bytes(self, status: int, body: bytes, content_type: str) -> None:
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_POST(self):
        if self.path.rstrip("/") != "/api/chat":
            self._send_json(404, {"error": "not found"})
            return
        try:
            length = int(self.headers.get("Content-Length", "0"))
            if length > MAX_BODY_BYTES:
                self.service.security_log(
                    "api", "warn", {"event": "oversized_payload", "bytes": length}
                )
                self._send_json(413, {"error": "payload too large"})
                return
            try:
                body = json.loads(self.rfile.read(length).decode("utf-8"))
            except (json.JSONDecodeError, UnicodeDecodeError):
                self.service.security_log("api", "warn", {"event": "malformed_body"})
                self._send_json(400, {"error": "body must be valid JSON"})
                return
            if not isinstance(body, dict):
                self._send_json(400, {"error": "body must be a JSON object"})
                return
            response = self.service.chat(
                body.get("session_id"), body.get("text"), body.get("language", "en")
            )
            self._send_json(200, response)
        except RequestError as e:
            self._send_json(e.status, {"error": str(e)})
        except Exception as e:  # never leak internals
            self.service.security_log(
                "api", "error", {"event": "internal_error", "type": type(e).__name__}
            )
            self._send_json(500, {"error": "internal error"})

    def do_GET(self):
        try:
            if self.path.startswith("/api/audio/"):
                audio_id = self.path[len("/api/audio/") :]
                body = self.service.audio_bytes(audio_id)
                self._send_bytes(200, body, "audio/wav")
            elif self.path.startswith("/api/history/"):
                session_id = self.path[len("/api/history/") :]
                self._send_json(200, {"records": self.service.history(session_id)})
            elif self.path.startswith("/api"):
                self._send_json(404, {"error": "not found"})
            else:
                self._serve_static()
        except RequestError as e:
            self._send_json(e.status, {"error": str(e)})
        except Exception as e:
            self.service.security_log(
                "api", "error", {"event": "internal_error", "type": type(e).__name__}
            )
            self._send_json(500, {"error": "internal error"})

    def _serve_static(self):
        rel = self.path.split("?")[0].lstrip("/") or "index.html"
        if self.static_dir is not None:
            root = self.static_dir.resolve()
            target = (root / rel).resolve()
            if target.is_file() and (root == target.parent or root in target.parents):
                ctype = _STATIC_TYPES.get(target.suffix, "application/octet-stream")
                self._send_bytes(200, target.read_bytes(), ctype)
                return
        if self.path in ("/", "/index.html"):
            self._send_bytes(200, _PLACEHOLDER_PAGE.encode("utf-8"), "text/html; charset=utf-8")
        else:
            self._send_json(404, {"error": "not found"})


def make_server(service: ChatService, port: int = 0, static_dir=None) -> ThreadingHTTPServer:
    """Bind a threading HTTP server; port 0 picks a free port."""
    handler = type(
        "BoundHandler",
        (_Handler,),
        {
            "service": service,
            "static_dir": Path(static_dir) if static_dir else None,
        },
    )
    return ThreadingHTTPServer(("127.0.0.1", port), handler)


def serve_forever(config: ServiceConfig) -> None:
    service = ChatService.from_config(config)
    server = make_server(service, config.port, config.static_dir)
    host, port = server.server_address
    print(f"serving on http://{host}:{port} (store: {config.store_dir})")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
