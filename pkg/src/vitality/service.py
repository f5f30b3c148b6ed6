"""Read-only HTTP API over a computed snapshot directory.

The server holds one immutable snapshot in memory.  Every response carries
the snapshot etag (a hash of the manifest, which itself hashes every file),
so a client can cheaply revalidate with If-None-Match and any byte change
in the snapshot shows up as a new etag.  Recomputation happens through the
command line pipeline, never through the server.
"""
from __future__ import annotations

import csv
import hashlib
import json
import socket
from dataclasses import dataclass
from http import HTTPStatus
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.responses import HTMLResponse, JSONResponse
from starlette.exceptions import HTTPException as StarletteHTTPException

from .errors import BindError, ConfigError, SnapshotCorruptError

REQUIRED_FILES = (
    "choropleth.geojson",
    "histogram.json",
    "assignments.csv",
    "silhouette.json",
    "radar.json",
    "importance.json",
    "shap_global.json",
    "shap_clusters.json",
    "lvi.json",
    "report.html",
)

# categorical fills for sector layers; assigned to sorted sector names so
# clients never invent their own color logic
SECTOR_PALETTE = (
    "#4477aa",
    "#ee6677",
    "#228833",
    "#ccbb44",
    "#66ccee",
    "#aa3377",
    "#bbbbbb",
)

# endpoint path -> schema file shipped under resources/schemas/
ENDPOINT_SCHEMAS = {
    "/api/health": "health.schema.json",
    "/api/das": "choropleth.schema.json",
    "/api/das/{id}": "da.schema.json",
    "/api/cvi/histogram": "histogram.schema.json",
    "/api/clusters": "clusters.schema.json",
    "/api/importance": "importance.schema.json",
    "/api/shap/global": "shap_global.schema.json",
    "/api/shap/clusters": "shap_clusters.schema.json",
    "/api/lvi": "lvi.schema.json",
}


@dataclass(frozen=True)
class Snapshot:
    """Immutable in-memory view of one pipeline output directory."""

    etag: str
    health: dict
    das: dict
    features_by_id: dict
    labels: dict
    histogram: dict
    clusters: dict
    importance: dict
    shap_global: dict
    shap_clusters: dict
    lvi: dict
    report_html: str


def _read_assignments(path: Path) -> dict:
    with path.open(encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["da_id", "sector"]:
            raise SnapshotCorruptError(
                f"{path.name}: unexpected header {header}"
            )
        return {da: sector for da, sector in reader}


def load_snapshot(path: str | Path) -> Snapshot:
    """Verify every artifact against the manifest hashes, then load them."""
    root = Path(path)
    manifest_path = root / "manifest.json"
    if not manifest_path.is_file():
        raise SnapshotCorruptError(f"{root}: manifest.json missing")
    manifest_bytes = manifest_path.read_bytes()
    try:
        manifest = json.loads(manifest_bytes)
    except json.JSONDecodeError as exc:
        raise SnapshotCorruptError(f"{manifest_path}: not valid JSON: {exc}")
    files = manifest.get("files") or {}
    for name in REQUIRED_FILES:
        if name not in files:
            raise SnapshotCorruptError(
                f"snapshot incomplete: {name} not in manifest; "
                f"run the full pipeline first"
            )
    for name, digest in sorted(files.items()):
        target = root / name
        if not target.is_file():
            raise SnapshotCorruptError(f"{name}: listed in manifest but missing")
        if hashlib.sha256(target.read_bytes()).hexdigest() != digest:
            raise SnapshotCorruptError(
                f"{name}: bytes do not match the manifest hash"
            )

    def _load(name):
        return json.loads((root / name).read_text(encoding="utf-8"))

    das = _load("choropleth.geojson")
    features_by_id = {
        f["properties"]["DAUID"]: f for f in das.get("features", [])
    }
    assignments = _read_assignments(root / "assignments.csv")
    sector_colors = {
        sector: SECTOR_PALETTE[i % len(SECTOR_PALETTE)]
        for i, sector in enumerate(sorted(set(assignments.values())))
    }
    config = manifest.get("config") or {}
    health = {
        "status": "ok",
        "package": manifest.get("package", ""),
        "seed": config.get("seed"),
        "da_count": len(features_by_id),
        "files": len(files),
    }
    return Snapshot(
        etag='"' + hashlib.sha256(manifest_bytes).hexdigest()[:32] + '"',
        health=health,
        das=das,
        features_by_id=features_by_id,
        labels=das.get("labels", {}),
        histogram=_load("histogram.json"),
        clusters={
            "assignments": assignments,
            "colors": sector_colors,
            "silhouette": _load("silhouette.json"),
            "radar": _load("radar.json"),
        },
        importance=_load("importance.json"),
        shap_global=_load("shap_global.json"),
        shap_clusters=_load("shap_clusters.json"),
        lvi=_load("lvi.json"),
        report_html=(root / "report.html").read_text(encoding="utf-8"),
    )


def _etag_matches(header: str | None, etag: str) -> bool:
    if header is None:
        return False
    tokens = [t.strip() for t in header.split(",")]
    if "*" in tokens:
        return True
    bare = etag.strip('"')
    for token in tokens:
        if token.startswith("W/"):
            token = token[2:]
        if token == etag or token.strip('"') == bare:
            return True
    return False


def create_app(snapshot: Snapshot, cors_origin: str | None = None,
               static_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="vitality snapshot API", docs_url=None, redoc_url=None)
    if cors_origin:
        from fastapi.middleware.cors import CORSMiddleware

        app.add_middleware(
            CORSMiddleware,
            allow_origins=[cors_origin],
            allow_methods=["GET"],
            allow_headers=["*"],
        )

    def conditional(request: Request) -> Response | None:
        if _etag_matches(request.headers.get("if-none-match"), snapshot.etag):
            return Response(status_code=304, headers={"ETag": snapshot.etag})
        return None

    def body(request: Request, payload) -> Response:
        return conditional(request) or JSONResponse(
            payload, headers={"ETag": snapshot.etag}
        )

    @app.exception_handler(StarletteHTTPException)
    async def problem_document(request: Request, exc: StarletteHTTPException):
        return JSONResponse(
            {
                "type": "about:blank",
                "title": HTTPStatus(exc.status_code).phrase,
                "status": exc.status_code,
                "detail": str(exc.detail),
            },
            status_code=exc.status_code,
            media_type="application/problem+json",
        )

    @app.get("/api/health")
    async def health(request: Request):
        return body(request, snapshot.health)

    @app.get("/api/das")
    async def das(request: Request):
        return body(request, snapshot.das)

    @app.get("/api/das/{da_id}")
    async def da(request: Request, da_id: str):
        feature = snapshot.features_by_id.get(da_id)
        if feature is None:
            raise StarletteHTTPException(404, f"unknown DA id {da_id!r}")
        return body(request, {"feature": feature, "labels": snapshot.labels})

    @app.get("/api/cvi/histogram")
    async def histogram(request: Request):
        return body(request, snapshot.histogram)

    @app.get("/api/clusters")
    async def clusters(request: Request):
        return body(request, snapshot.clusters)

    @app.get("/api/importance")
    async def importance(request: Request):
        return body(request, snapshot.importance)

    @app.get("/api/shap/global")
    async def shap_global(request: Request):
        return body(request, snapshot.shap_global)

    @app.get("/api/shap/clusters")
    async def shap_clusters(request: Request):
        return body(request, snapshot.shap_clusters)

    @app.get("/api/lvi")
    async def lvi(request: Request):
        return body(request, snapshot.lvi)

    @app.get("/api/report")
    async def report(request: Request):
        return conditional(request) or HTMLResponse(
            snapshot.report_html, headers={"ETag": snapshot.etag}
        )

    if static_dir is not None:
        from fastapi.staticfiles import StaticFiles

        # mounted last so the API routes above keep precedence
        app.mount("/", StaticFiles(directory=static_dir, html=True))

    return app


def parse_bind(bind: str) -> tuple[str, int]:
    host, sep, port_text = bind.rpartition(":")
    if not sep or not host:
        raise BindError(f"bind address must be HOST:PORT, got {bind!r}")
    try:
        port = int(port_text)
    except ValueError:
        raise BindError(f"port must be an integer, got {port_text!r}")
    if not 0 <= port <= 65535:
        raise BindError(f"port {port} outside 0-65535")
    return host, port


def serve(snapshot_path, bind: str = "127.0.0.1:8000",
          cors_origin: str | None = None,
          static_dir: str | Path | None = None) -> None:
    """Load and verify the snapshot, then block serving it."""
    import uvicorn

    host, port = parse_bind(bind)
    if static_dir is not None and not Path(static_dir).is_dir():
        raise ConfigError(f"static directory not found: {static_dir}")
    app = create_app(load_snapshot(snapshot_path), cors_origin=cors_origin,
                     static_dir=static_dir)
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        probe.bind((host, port))
    except OSError as exc:
        raise BindError(f"cannot bind {bind}: {exc}")
    finally:
        probe.close()
    uvicorn.run(app, host=host, port=port, log_level="warning")
