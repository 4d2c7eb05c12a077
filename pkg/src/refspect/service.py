"""HTTP/JSON API over one analysis session.

Reads are side-effect-free and report the staleness counter they were
computed at; mutations are serialized and may carry the counter the
client last saw, in which case a stale counter is rejected with 409 so
the client refetches before retrying.  Error bodies are always
{"code", "message", "detail"}.
"""

from __future__ import annotations

import secrets
import threading

from fastapi import FastAPI, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, PlainTextResponse
from pydantic import BaseModel, Field

from .clustering import InvalidPartitionError, ReferenceCluster, UnknownClusterError
from .exports import clusters_csv, spectrum_csv
from .session import AnalysisSession, Filters


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str, detail: str = ""):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message
        self.detail = detail


class MergeBody(BaseModel):
    ids: list[str] = Field(min_length=2)
    note: str = ""
    counter: int | None = None
    token: str | None = None


class SplitBody(BaseModel):
    partition: list[list[str]]
    note: str = ""
    counter: int | None = None
    token: str | None = None


class YearBody(BaseModel):
    rpy: int
    note: str = ""
    counter: int | None = None
    token: str | None = None


class MarkersBody(BaseModel):
    cluster_ids: list[str] = Field(min_length=1)
    mode: str = "or"
    counter: int | None = None
    token: str | None = None


class SaveBody(BaseModel):
    path: str | None = None
    token: str | None = None


def _cluster_payload(cluster: ReferenceCluster, ncr: int) -> dict:
    canonical = cluster.canonical
    return {
        "cluster_id": cluster.cluster_id,
        "rpy": cluster.effective_rpy,
        "ncr": ncr,
        "author": canonical.author_norm,
        "source": canonical.source_norm,
        "volume": canonical.volume,
        "page": canonical.start_page,
        "doi": canonical.doi_norm,
        "n_variants": len(cluster.variants),
        "canonical": canonical.raw_text,
        "variants": [v.raw_text for v in cluster.variants],
    }


def _filters_payload(filters: Filters) -> dict:
    return {
        "cutoff_year": filters.cutoff_year,
        "era_rules": [[r.year_range[0], r.year_range[1], r.min_ncr] for r in filters.era_rules],
        "year_range": list(filters.year_range) if filters.year_range else None,
        "document_types": list(filters.document_types) if filters.document_types else None,
    }


def create_app(session: AnalysisSession, session_path: str | None = None) -> FastAPI:
    app = FastAPI(title="refspect", docs_url=None, redoc_url=None)
    token = secrets.token_hex(16)
    mutation_lock = threading.Lock()

    @app.exception_handler(ApiError)
    async def _api_error(_request: Request, exc: ApiError):
        return JSONResponse(
            status_code=exc.status,
            content={"code": exc.code, "message": exc.message, "detail": exc.detail},
        )

    @app.exception_handler(RequestValidationError)
    async def _validation_error(_request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=400,
            content={"code": "validation_error", "message": "invalid request body",
                     "detail": str(exc.errors()[:3])},
        )

    def guard_mutation(counter: int | None, body_token: str | None) -> None:
        if body_token is not None and body_token != token:
            raise ApiError(403, "bad_token", "ownership token does not match this session")
        if counter is not None and counter != session.counter:
            raise ApiError(
                409, "stale_counter",
                "session changed since this state was fetched; refetch and retry",
                detail=f"expected {session.counter}, got {counter}",
            )

    def run_mutation(counter: int | None, body_token: str | None, action):
        with mutation_lock:
            guard_mutation(counter, body_token)
            try:
                return action()
            except UnknownClusterError as exc:
                raise ApiError(404, "unknown_cluster", str(exc))
            except InvalidPartitionError as exc:
                raise ApiError(400, "invalid_partition", str(exc))
            except ValueError as exc:
                raise ApiError(400, "invalid_request", str(exc))

    def parse_range(from_year: int | None, to_year: int | None) -> tuple[int, int] | None:
        if from_year is None and to_year is None:
            return None
        if from_year is None or to_year is None:
            raise ApiError(400, "invalid_range", "provide both 'from' and 'to', or neither")
        if from_year > to_year:
            raise ApiError(400, "invalid_range", f"inverted year range: {from_year}..{to_year}")
        return (from_year, to_year)

    @app.get("/session")
    def get_session():
        table = session.table()
        return {
            "counter": session.counter,
            "session_id": session.session_id,
            "token": token,
            "fingerprint": session.fingerprint,
            "num_records": len(session.records),
            "num_clusters": len(table),
            "filters": _filters_payload(session.filters),
            "markers": {
                "cluster_ids": list(session.markers.cluster_ids),
                "mode": session.markers.mode,
            },
            "ledger": [
                {"op": e.op, "args": e.args, "timestamp": e.timestamp, "note": e.note}
                for e in session.ledger
            ],
        }

    @app.get("/spectrum")
    def get_spectrum(
        from_year: int | None = Query(default=None, alias="from"),
        to_year: int | None = Query(default=None, alias="to"),
    ):
        chosen = parse_range(from_year, to_year)
        spectrum = session.spectrum(chosen)
        return {
            "counter": session.counter,
            "year_range": list(spectrum.year_range) if spectrum.year_range else None,
            "points": [
                {"rpy": p.rpy, "ncr": p.ncr_total, "median5": p.median5, "dev": p.deviation}
                for p in spectrum.points
            ],
            "warnings": list(session.active_view().warnings),
        }

    @app.get("/years/{rpy}/references")
    def get_year_references(rpy: int, k: int = 50):
        if k < 1:
            raise ApiError(400, "invalid_request", "k must be >= 1")
        ranked = session.top_references(rpy, k)
        return {
            "counter": session.counter,
            "rpy": rpy,
            "references": [_cluster_payload(cluster, ncr) for cluster, ncr in ranked],
        }

    @app.get("/peaks")
    def get_peaks(
        min_deviation: int = 1,
        max_peaks: int | None = Query(default=None, alias="max"),
        k: int = 3,
    ):
        if min_deviation < 0:
            raise ApiError(400, "invalid_request", "min_deviation must be >= 0")
        peaks = session.peaks(min_deviation=min_deviation, max_peaks=max_peaks, top_k=k)
        return {
            "counter": session.counter,
            "peaks": [
                {
                    "rpy": p.rpy,
                    "dev": p.deviation,
                    "ncr": p.ncr_total,
                    "top_clusters": [{"cluster_id": cid, "ncr": n} for cid, n in p.top_clusters],
                }
                for p in peaks
            ],
        }

    @app.post("/clusters/merge")
    def post_merge(body: MergeBody):
        new_id = run_mutation(
            body.counter, body.token, lambda: session.merge_clusters(body.ids, note=body.note)
        )
        return {"counter": session.counter, "cluster_id": new_id}

    @app.post("/clusters/{cluster_id}/split")
    def post_split(cluster_id: str, body: SplitBody):
        new_ids = run_mutation(
            body.counter, body.token,
            lambda: session.split_cluster(cluster_id, body.partition, note=body.note),
        )
        return {"counter": session.counter, "cluster_ids": new_ids}

    @app.post("/clusters/{cluster_id}/year")
    def post_year(cluster_id: str, body: YearBody):
        live = run_mutation(
            body.counter, body.token,
            lambda: session.correct_year(cluster_id, body.rpy, note=body.note),
        )
        return {"counter": session.counter, "cluster_id": live}

    @app.put("/markers")
    def put_markers(body: MarkersBody):
        markers = run_mutation(
            body.counter, body.token, lambda: session.set_markers(body.cluster_ids, mode=body.mode)
        )
        return {
            "counter": session.counter,
            "markers": {"cluster_ids": list(markers.cluster_ids), "mode": markers.mode},
        }

    @app.delete("/markers")
    def delete_markers():
        with mutation_lock:
            session.clear_markers()
        return {"counter": session.counter, "markers": {"cluster_ids": [], "mode": "or"}}

    @app.get("/export/spectrum.csv")
    def export_spectrum():
        return PlainTextResponse(spectrum_csv(session.spectrum()), media_type="text/csv")

    @app.get("/export/clusters.csv")
    def export_clusters():
        return PlainTextResponse(
            clusters_csv(session.effective_clusters(), session.cluster_ncr()),
            media_type="text/csv",
        )

    @app.post("/session/save")
    def save_session(body: SaveBody):
        if body.token is not None and body.token != token:
            raise ApiError(403, "bad_token", "ownership token does not match this session")
        path = body.path or session_path
        if not path:
            raise ApiError(400, "no_destination", "no session path configured or provided")
        session.save(path)
        return {"counter": session.counter, "path": path}

    return app


def serve(
    session: AnalysisSession,
    host: str = "127.0.0.1",
    port: int = 8237,
    session_path: str | None = None,
) -> None:
    """Run the service until interrupted."""
    import uvicorn

    uvicorn.run(create_app(session, session_path=session_path), host=host, port=port)
