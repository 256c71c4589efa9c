"""HTTP surface.

Thin translation layer: parse JSON by hand (the dataclass from_dict methods
are the single schema source), call the store or gateway, and map domain
errors onto the fixed {code, message, field} error body.
"""

from __future__ import annotations

from datetime import date, datetime
from typing import Optional

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .clock import Clock, WallClock
from .context_model import Location, StudentProfile, format_instant, parse_instant
from .errors import CampusNotifyError, InvalidQuery, InvalidRequest
from .gateway import ReaderGateway, TagDetectionEvent
from .store import NotificationDraft, NotificationStore, SearchQuery

_STATUS_BY_CODE = {
    "invalid_request": 400,
    "invalid_targeting": 400,
    "expiry_in_past": 400,
    "invalid_query": 400,
    "clock_skew": 400,
    "not_found": 404,
    "unknown_reader": 404,
    "unknown_tag": 404,
}


async def _body(request: Request) -> dict:
    try:
        data = await request.json()
    except Exception:
        raise InvalidRequest("request body is not valid JSON") from None
    if not isinstance(data, dict):
        raise InvalidRequest("request body must be a JSON object")
    return data


def _sender(request: Request) -> str:
    # Posting identity rides on a trusted header; there is no auth layer here.
    sender = request.headers.get("X-Sender", "").strip()
    if not sender:
        raise InvalidRequest("X-Sender header is required to post", field="X-Sender")
    return sender


def create_app(
    store: NotificationStore,
    *,
    clock: Optional[Clock] = None,
    allow_now_override: bool = False,
) -> FastAPI:
    """Wire one store (and one clock) into a FastAPI app.

    allow_now_override opens the test-only `now` query parameter on GET
    /feed; leave it off for real deployments so feeds always reflect server
    time.
    """
    clock = clock if clock is not None else WallClock()
    gateway = ReaderGateway(store, clock)
    app = FastAPI(title="campus-notify", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.store = store
    app.state.gateway = gateway
    app.state.clock = clock

    @app.exception_handler(CampusNotifyError)
    async def _domain_error(request: Request, exc: CampusNotifyError):
        return JSONResponse(
            status_code=_STATUS_BY_CODE.get(exc.code, 400),
            content={"code": exc.code, "message": exc.message, "field": exc.field},
        )

    @app.get("/health")
    async def health():
        return {"status": "ok", "time": format_instant(clock.now())}

    @app.post("/notifications", status_code=201)
    async def post_notification(request: Request):
        sender = _sender(request)
        draft = NotificationDraft.from_dict(await _body(request))
        notification = store.create_notification(draft, sender, now=clock.now())
        return notification.to_dict()

    @app.get("/notifications")
    async def search_notifications(
        poster: Optional[str] = None,
        created_on: Optional[str] = None,
        title: Optional[str] = None,
    ):
        created: Optional[date] = None
        if created_on is not None:
            try:
                created = date.fromisoformat(created_on)
            except ValueError:
                raise InvalidQuery(
                    f"created_on must be YYYY-MM-DD, got {created_on!r}", field="created_on"
                ) from None
        query = SearchQuery(poster=poster, created_on=created, title_substring=title)
        return {"notifications": [n.to_dict() for n in store.search(query)]}

    @app.post("/profiles", status_code=201)
    async def post_profile(request: Request):
        profile = store.register_profile(StudentProfile.from_dict(await _body(request)))
        return profile.to_dict()

    @app.get("/profiles")
    async def list_profiles():
        return {
            "profiles": [store.profiles[tag].to_dict() for tag in sorted(store.profiles)]
        }

    @app.post("/readers", status_code=201)
    async def post_reader(request: Request):
        data = await _body(request)
        reader_id = str(data.get("reader_id", ""))
        location = Location.from_dict(data.get("location", data))
        store.register_reader(reader_id, location)
        return {"reader_id": reader_id, "location": location.to_dict()}

    @app.get("/readers")
    async def list_readers():
        return {
            "readers": [
                {"reader_id": rid, "location": store.readers[rid].to_dict()}
                for rid in sorted(store.readers)
            ]
        }

    @app.get("/courses")
    async def list_courses():
        return {"courses": store.courses()}

    @app.post("/events")
    async def post_event(request: Request):
        event = TagDetectionEvent.from_dict(await _body(request))
        return gateway.ingest_event(event).to_dict()

    @app.get("/feed")
    async def get_feed(reader_id: str = "", tag_id: str = "", now: Optional[str] = None):
        if not reader_id:
            raise InvalidRequest("reader_id query parameter is required", field="reader_id")
        if not tag_id:
            raise InvalidRequest("tag_id query parameter is required", field="tag_id")
        at: datetime
        if now is not None:
            if not allow_now_override:
                raise InvalidRequest("now override is not enabled on this server", field="now")
            at = parse_instant(now)
        else:
            at = clock.now()
        return gateway.payload_for(tag_id, reader_id, at).to_dict()

    @app.put("/read-state")
    async def put_read_state(request: Request):
        data = await _body(request)
        missing = [k for k in ("tag_id", "notification_id", "state") if k not in data]
        if missing:
            raise InvalidRequest(f"missing field {missing[0]!r}", field=missing[0])
        try:
            notification_id = int(data["notification_id"])
        except (TypeError, ValueError):
            raise InvalidRequest(
                "notification_id must be an integer", field="notification_id"
            ) from None
        tag_id = str(data["tag_id"])
        state = str(data["state"])
        store.set_read_state(tag_id, notification_id, state)
        return {"tag_id": tag_id, "notification_id": notification_id, "state": state}

    return app
