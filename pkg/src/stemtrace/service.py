"""Small HTTP service exposing mask generation and evaluation.

The API is versioned under /v1 and stateless: POST /v1/mask turns a
control-point request into a PNG (byte-identical to the CLI preview for
the same parameters), POST /v1/evaluate compares two masks, GET /healthz
reports liveness.  Configuration comes from environment variables:
STEMTRACE_ADDR (default 127.0.0.1:8080), STEMTRACE_ALLOWED_ORIGINS
(comma-separated, default none) and STEMTRACE_MAX_BODY_BYTES (default
10 MiB).
"""

from __future__ import annotations

import base64
import binascii
import json
import logging
import math
import os
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from . import __version__
from .annotations import DEFAULT_TAU
from .mask_png import MaskFormatError, read_mask_png, write_mask_png
from .metrics import confusion, f1, precision, recall
from .raster import generate_annotation_mask, resolved_samples_per_segment
from .spline import Point2, SPLINE_ORDER

logger = logging.getLogger(__name__)

DEFAULT_ADDR = "127.0.0.1:8080"
DEFAULT_MAX_BODY_BYTES = 10 * 1024 * 1024

ENV_ADDR = "STEMTRACE_ADDR"
ENV_ALLOWED_ORIGINS = "STEMTRACE_ALLOWED_ORIGINS"
ENV_MAX_BODY_BYTES = "STEMTRACE_MAX_BODY_BYTES"


class RequestError(Exception):
    """A client error carrying a machine-readable code."""

    def __init__(self, code: str, message: str, status: int = 400):
        super().__init__(message)
        self.code = code
        self.status = status


@dataclass(frozen=True)
class GenerateRequest:
    """Transport form of one image's control-point input."""

    image_width: int
    image_height: int
    stems: tuple[tuple[Point2, ...], ...]
    tau: int = DEFAULT_TAU
    clamp_ends: bool = False
    samples_per_segment: int | None = None


def _require_int(doc: dict, key: str, minimum: int, code: str) -> int:
    value = doc.get(key)
    if isinstance(value, bool):
        raise RequestError(code, f"{key} must be an integer, got {value!r}")
    if isinstance(value, float) and value.is_integer():
        value = int(value)
    if not isinstance(value, int):
        raise RequestError(code, f"{key} must be an integer, got {value!r}")
    if value < minimum:
        raise RequestError(code, f"{key} must be >= {minimum}, got {value}")
    return value


def parse_generate_request(body: bytes) -> GenerateRequest:
    try:
        doc = json.loads(body.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise RequestError("invalid_json", f"request body is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise RequestError("invalid_request", "request body must be a JSON object")

    width = _require_int(doc, "image_width", 1, "invalid_dimensions")
    height = _require_int(doc, "image_height", 1, "invalid_dimensions")

    raw_stems = doc.get("stems")
    if not isinstance(raw_stems, list) or not raw_stems:
        raise RequestError("no_stems", "stems must be a non-empty list of control-point lists")
    diagonal = math.hypot(width, height)
    stems: list[tuple[Point2, ...]] = []
    for i, raw in enumerate(raw_stems):
        if not isinstance(raw, list):
            raise RequestError("invalid_request", f"stems[{i}] must be a list of [x, y] points")
        if len(raw) < SPLINE_ORDER:
            raise RequestError(
                "insufficient_control_points",
                f"stems[{i}] has {len(raw)} control points; at least {SPLINE_ORDER} are required",
            )
        points = []
        for j, entry in enumerate(raw):
            if not isinstance(entry, (list, tuple)) or len(entry) != 2:
                raise RequestError("invalid_control_point", f"stems[{i}][{j}] must be [x, y]")
            try:
                point = Point2(float(entry[0]), float(entry[1]))
            except (TypeError, ValueError) as exc:
                raise RequestError("invalid_control_point", f"stems[{i}][{j}]: {exc}") from exc
            off_x = max(0.0, -point.x, point.x - width)
            off_y = max(0.0, -point.y, point.y - height)
            if math.hypot(off_x, off_y) > diagonal:
                raise RequestError(
                    "control_point_out_of_range",
                    f"stems[{i}][{j}] at ({point.x}, {point.y}) is more than one image "
                    f"diagonal outside the {width}x{height} canvas",
                )
            points.append(point)
        stems.append(tuple(points))

    tau = DEFAULT_TAU if "tau" not in doc else _require_int(doc, "tau", 1, "invalid_tau")
    clamp_ends = doc.get("clamp_ends", False)
    if not isinstance(clamp_ends, bool):
        raise RequestError("invalid_request", f"clamp_ends must be a boolean, got {clamp_ends!r}")
    samples = None
    if doc.get("samples_per_segment") is not None:
        samples = _require_int(doc, "samples_per_segment", 2, "invalid_samples_per_segment")

    return GenerateRequest(
        image_width=width,
        image_height=height,
        stems=tuple(stems),
        tau=tau,
        clamp_ends=clamp_ends,
        samples_per_segment=samples,
    )


def render_request_png(request: GenerateRequest) -> tuple[bytes, list[int]]:
    """Produce the PNG payload and the per-stem sampling actually used."""
    mask = generate_annotation_mask(
        request.stems,
        request.tau,
        request.image_width,
        request.image_height,
        samples_per_segment=request.samples_per_segment,
        clamp_ends=request.clamp_ends,
    )
    sampling = [
        resolved_samples_per_segment(stem, request.samples_per_segment, request.clamp_ends)
        for stem in request.stems
    ]
    return write_mask_png(mask), sampling


def _decode_mask_field(doc: dict, side: str):
    inline = doc.get(f"{side}_png")
    path = doc.get(f"{side}_path")
    if inline is not None:
        if not isinstance(inline, str):
            raise RequestError("undecodable_mask", f"{side}_png must be a base64 string")
        try:
            payload = base64.b64decode(inline, validate=True)
        except (binascii.Error, ValueError) as exc:
            raise RequestError("undecodable_mask", f"{side}_png is not valid base64: {exc}") from exc
    elif path is not None:
        if not isinstance(path, str):
            raise RequestError("unreadable_path", f"{side}_path must be a string")
        try:
            payload = Path(path).read_bytes()
        except OSError as exc:
            raise RequestError("unreadable_path", f"cannot read {side}_path: {exc}") from exc
    else:
        raise RequestError("invalid_request", f"request needs {side}_png (base64) or {side}_path")
    try:
        return read_mask_png(payload)
    except MaskFormatError as exc:
        raise RequestError("undecodable_mask", f"{side} mask: {exc}") from exc


def evaluate_request_json(body: bytes) -> dict:
    try:
        doc = json.loads(body.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise RequestError("invalid_json", f"request body is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise RequestError("invalid_request", "request body must be a JSON object")
    pred = _decode_mask_field(doc, "pred")
    gt = _decode_mask_field(doc, "gt")
    try:
        counts = confusion(pred, gt)
    except ValueError as exc:
        raise RequestError("dimension_mismatch", str(exc)) from exc
    return {
        "tp": counts.tp,
        "fp": counts.fp,
        "fn": counts.fn,
        "tn": counts.tn,
        "precision": precision(counts),
        "recall": recall(counts),
        "f1_standard": f1(counts, "standard"),
        "f1_paper": f1(counts, "paper"),
    }


@dataclass(frozen=True)
class ServiceConfig:
    host: str
    port: int
    allowed_origins: tuple[str, ...] = ()
    max_body_bytes: int = DEFAULT_MAX_BODY_BYTES

    def allows_origin(self, origin: str | None) -> bool:
        if origin is None:
            return False
        return "*" in self.allowed_origins or origin in self.allowed_origins

    @classmethod
    def from_env(
        cls,
        addr: str | None = None,
        allowed_origins: tuple[str, ...] | None = None,
        max_body_bytes: int | None = None,
    ) -> "ServiceConfig":
        raw_addr = addr or os.environ.get(ENV_ADDR, DEFAULT_ADDR)
        host, _, port_text = raw_addr.rpartition(":")
        if not host or not port_text.isdigit():
            raise ValueError(f"address must look like host:port, got {raw_addr!r}")
        if allowed_origins is None:
            raw = os.environ.get(ENV_ALLOWED_ORIGINS, "")
            allowed_origins = tuple(o.strip() for o in raw.split(",") if o.strip())
        if max_body_bytes is None:
            max_body_bytes = int(os.environ.get(ENV_MAX_BODY_BYTES, DEFAULT_MAX_BODY_BYTES))
        return cls(host, int(port_text), tuple(allowed_origins), max_body_bytes)


class StemTraceHandler(BaseHTTPRequestHandler):
    server_version = f"stemtrace/{__version__}"
    protocol_version = "HTTP/1.1"

    @property
    def config(self) -> ServiceConfig:
        return self.server.config  # type: ignore[attr-defined]

    def log_message(self, format: str, *args) -> None:  # noqa: A002 - stdlib signature
        logger.debug("%s %s", self.address_string(), format % args)

    def _cors_headers(self) -> list[tuple[str, str]]:
        origin = self.headers.get("Origin")
        if self.config.allows_origin(origin):
            return [("Access-Control-Allow-Origin", origin), ("Vary", "Origin")]
        return []

    def _respond(self, status: int, content_type: str, payload: bytes, extra=()) -> None:
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(payload)))
        for key, value in (*self._cors_headers(), *extra):
            self.send_header(key, value)
        self.end_headers()
        self.wfile.write(payload)

    def _respond_json(self, status: int, doc: dict, extra=()) -> None:
        self._respond(status, "application/json", json.dumps(doc).encode("utf-8"), extra)

    def _respond_error(self, status: int, code: str, message: str) -> None:
        self._respond_json(status, {"error": code, "message": message})

    def _path(self) -> str:
        return self.path.split("?", 1)[0]

    _DISCARD_CAP = 16 * 1024 * 1024

    def _read_body(self) -> bytes | None:
        length_text = self.headers.get("Content-Length")
        if length_text is None or not length_text.isdigit():
            self.close_connection = True
            self._respond_error(411, "length_required", "Content-Length header is required")
            return None
        length = int(length_text)
        if length > self.config.max_body_bytes:
            # Drain moderate overshoots so the client sees the 413 cleanly;
            # hang up on absurd lengths instead of reading them.
            if length <= self._DISCARD_CAP:
                remaining = length
                while remaining > 0:
                    chunk = self.rfile.read(min(65536, remaining))
                    if not chunk:
                        break
                    remaining -= len(chunk)
            else:
                self.close_connection = True
            self._respond_error(
                413, "body_too_large",
                f"request body of {length} bytes exceeds the {self.config.max_body_bytes} byte limit",
            )
            return None
        return self.rfile.read(length)

    def do_GET(self) -> None:
        path = self._path()
        if path == "/healthz":
            self._respond(200, "text/plain; charset=utf-8", f"ok {__version__}".encode("utf-8"))
        elif path in ("/v1/mask", "/v1/evaluate"):
            self._respond_error(405, "method_not_allowed", f"{path} expects POST")
        else:
            self._respond_error(404, "not_found", f"unknown path {path}")

    def do_POST(self) -> None:
        path = self._path()
        if path == "/healthz":
            self._respond_error(405, "method_not_allowed", "/healthz expects GET")
            return
        if path not in ("/v1/mask", "/v1/evaluate"):
            self._respond_error(404, "not_found", f"unknown path {path}")
            return
        body = self._read_body()
        if body is None:
            return
        try:
            if path == "/v1/mask":
                request = parse_generate_request(body)
                payload, sampling = render_request_png(request)
                self._respond(
                    200,
                    "image/png",
                    payload,
                    extra=(
                        ("X-Stemtrace-Tau", str(request.tau)),
                        ("X-Stemtrace-Samples-Per-Segment", ",".join(str(s) for s in sampling)),
                    ),
                )
            else:
                self._respond_json(200, evaluate_request_json(body))
        except RequestError as exc:
            self._respond_error(exc.status, exc.code, str(exc))
        except Exception as exc:  # noqa: BLE001 - surface as 500, keep serving
            logger.exception("unhandled error serving %s", path)
            self._respond_error(500, "internal_error", f"{type(exc).__name__}: {exc}")

    def do_OPTIONS(self) -> None:
        path = self._path()
        if path not in ("/healthz", "/v1/mask", "/v1/evaluate"):
            self._respond_error(404, "not_found", f"unknown path {path}")
            return
        extra = []
        if self._cors_headers():
            extra = [
                ("Access-Control-Allow-Methods", "GET, POST, OPTIONS"),
                ("Access-Control-Allow-Headers", "Content-Type"),
                ("Access-Control-Max-Age", "600"),
            ]
        self._respond(204, "text/plain", b"", extra=extra)


def create_server(
    addr: str | None = None,
    allowed_origins: tuple[str, ...] | None = None,
    max_body_bytes: int | None = None,
) -> ThreadingHTTPServer:
    """Build (but do not start) the HTTP server; call serve_forever() on it."""
    config = ServiceConfig.from_env(addr, allowed_origins, max_body_bytes)
    server = ThreadingHTTPServer((config.host, config.port), StemTraceHandler)
    server.config = config  # type: ignore[attr-defined]
    server.daemon_threads = True
    return server


def serve(addr: str | None = None) -> None:
    server = create_server(addr)
    host, port = server.server_address[:2]
    logger.info("stemtrace service listening on %s:%s", host, port)
    print(f"stemtrace {__version__} serving on http://{host}:{port}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        server.shutdown()
