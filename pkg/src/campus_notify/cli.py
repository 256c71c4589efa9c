"""Command line entry points.

Exit code discipline across subcommands: 0 success, 1 runtime failure
(port taken, missing file, failed expectations), 2 bad input (malformed
records, broken scripts, usage errors).
"""

from __future__ import annotations

import json
import socket
import sys
import urllib.request
from pathlib import Path
from typing import Optional

import click

from .clock import PinnedClock, WallClock
from .context_model import parse_instant
from .errors import CampusNotifyError, ScriptError
from .gateway import (
    ReaderGateway,
    TagDetectionEvent,
    load_bundled_scenario,
    load_scenario_text,
    random_events,
    run_scenario,
    simulate_readers,
)
from .store import NotificationStore

DATA_ENVVAR = "CAMPUS_NOTIFY_DATA"
DEFAULT_DATA = "campus.jsonl"

data_option = click.option(
    "--data",
    "data_path",
    envvar=DATA_ENVVAR,
    default=DEFAULT_DATA,
    show_default=True,
    help=f"Store file (JSONL); also read from ${DATA_ENVVAR}.",
)


@click.group()
def main():
    """Context-aware campus notifications: post notices, feed kiosks."""


@main.command()
@data_option
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8080, show_default=True, type=int)
@click.option("--log-level", default="info", show_default=True)
@click.option(
    "--pin-clock",
    default=None,
    metavar="RFC3339",
    help="Freeze server time for rehearsals and tests.",
)
@click.option(
    "--allow-now-override",
    is_flag=True,
    help="Honor the test-only 'now' query parameter on GET /feed.",
)
def serve(data_path, host, port, log_level, pin_clock, allow_now_override):
    """Run the HTTP service."""
    import uvicorn

    from .api import create_app

    clock = WallClock()
    if pin_clock is not None:
        try:
            clock = PinnedClock(parse_instant(pin_clock))
        except CampusNotifyError as exc:
            click.echo(f"error: --pin-clock: {exc.message}", err=True)
            sys.exit(2)
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.bind((host, port))
    except OSError as exc:
        click.echo(f"error: cannot listen on {host}:{port}: {exc}", err=True)
        sys.exit(1)
    finally:
        probe.close()
    try:
        store = NotificationStore(Path(data_path))
    except CampusNotifyError as exc:
        click.echo(f"error: {exc.message}", err=True)
        sys.exit(2)
    app = create_app(store, clock=clock, allow_now_override=allow_now_override)
    click.echo(f"serving on http://{host}:{port} (data: {data_path})")
    uvicorn.run(app, host=host, port=port, log_level=log_level)


def _read_jsonl_records(path: Path) -> list[dict]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise ScriptError(f"{path}:{lineno}: not valid JSON ({exc.msg})") from None
    return records


def _bundled_fixture_text(name: str) -> Optional[str]:
    from importlib.resources import files

    resource = files("campus_notify") / "fixtures" / name
    if resource.is_file():
        return resource.read_text(encoding="utf-8")
    return None


@main.command()
@click.argument("source")
@data_option
def seed(source, data_path):
    """Load fixture records (JSONL) into the store, all or nothing.

    SOURCE is a file path or a bundled fixture name. Re-seeding the same
    file is a no-op with identical output.
    """
    try:
        if Path(source).is_file():
            records = _read_jsonl_records(Path(source))
        else:
            text = _bundled_fixture_text(source if "." in source else f"{source}.jsonl")
            if text is None:
                click.echo(f"error: no such file or bundled fixture: {source}", err=True)
                sys.exit(1)
            records = []
            for lineno, line in enumerate(text.splitlines(), start=1):
                if line.strip():
                    records.append(json.loads(line))
        store = NotificationStore(Path(data_path))
        counts = store.seed_records(records)
    except ScriptError as exc:
        click.echo(f"error: {exc.message}", err=True)
        sys.exit(2)
    except CampusNotifyError as exc:
        click.echo(f"error: {exc.message}", err=True)
        sys.exit(2)
    click.echo(
        "seeded "
        + ", ".join(f"{counts[k]} {k}" for k in ("profile", "reader", "notification", "read_state"))
        + f" records into {data_path}"
    )


@main.command()
@click.argument("script")
@click.option("--json", "as_json", is_flag=True, help="Emit the report as JSON.")
def scenario(script, as_json):
    """Replay a scripted day (bundled name or path) and check expectations."""
    try:
        path = Path(script)
        if path.is_file():
            loaded = load_scenario_text(path.read_text(encoding="utf-8"))
        else:
            loaded = load_bundled_scenario(script)
        report = run_scenario(loaded)
    except ScriptError as exc:
        click.echo(f"error: {exc.message}", err=True)
        sys.exit(2)
    if as_json:
        click.echo(json.dumps(report.to_dict(), indent=2))
    else:
        for outcome in report.outcomes:
            mark = "PASS" if outcome.passed else "FAIL"
            click.echo(f"{mark} step {outcome.step_index}: {outcome.detail}")
        verdict = "passed" if report.passed else "FAILED"
        click.echo(f"scenario {report.name}: {verdict} "
                   f"({sum(o.passed for o in report.outcomes)}/{len(report.outcomes)} expectations)")
    sys.exit(0 if report.passed else 1)


@main.command()
@data_option
@click.option("--count", default=1000, show_default=True, type=int)
@click.option("--seed", "seed_value", default=0, show_default=True, type=int)
@click.option("--plan", "plan_path", default=None, help="JSON array of events to replay.")
@click.option("--server", default=None, metavar="URL", help="Deliver over HTTP instead of in-process.")
@click.option(
    "--pacing",
    type=click.Choice(["fast", "real-time"]),
    default="fast",
    show_default=True,
)
def simulate(data_path, count, seed_value, plan_path, server, pacing):
    """Generate or replay reader traffic and report throughput."""
    store = NotificationStore(Path(data_path)) if Path(data_path).exists() else NotificationStore()
    try:
        if plan_path is not None:
            raw = json.loads(Path(plan_path).read_text(encoding="utf-8"))
            if not isinstance(raw, list):
                raise ScriptError("plan must be a JSON array of events")
            events = [TagDetectionEvent.from_dict(item) for item in raw]
        else:
            events = random_events(
                store, count, seed_value, base_time=WallClock().now()
            )
    except (CampusNotifyError, OSError, json.JSONDecodeError) as exc:
        message = exc.message if isinstance(exc, CampusNotifyError) else str(exc)
        click.echo(f"error: {message}", err=True)
        sys.exit(2)
    if not events:
        click.echo("error: nothing to simulate", err=True)
        sys.exit(2)

    deliver = None
    if server is not None:
        def deliver(event_dict: dict) -> dict:
            request = urllib.request.Request(
                server.rstrip("/") + "/events",
                data=json.dumps(event_dict).encode(),
                headers={"Content-Type": "application/json"},
                method="POST",
            )
            with urllib.request.urlopen(request) as response:
                return json.loads(response.read())
        gateway = ReaderGateway(store, WallClock())
    else:
        # The simulated server clock rides along with the event stream, so
        # replaying an old plan does not trip the skew guard.
        clock = PinnedClock(events[0].timestamp)
        gateway = ReaderGateway(store, clock)

        def deliver(event_dict: dict) -> dict:
            clock.pin(parse_instant(event_dict["timestamp"]))
            wire_in = json.loads(json.dumps(event_dict))
            payload = gateway.ingest_event(TagDetectionEvent.from_dict(wire_in))
            return json.loads(json.dumps(payload.to_dict()))

    result = simulate_readers(gateway, events, deliver=deliver, pacing=pacing)
    rate = result.delivered / result.elapsed_seconds if result.elapsed_seconds > 0 else 0.0
    click.echo(
        f"delivered {result.delivered}/{result.events_total} events "
        f"in {result.elapsed_seconds:.2f}s ({rate:.0f} events/s), "
        f"{len(result.errors)} rejected"
    )
    for error in result.errors[:10]:
        click.echo(f"  event {error['index']} ({error['nonce']}): {error['code']}: {error['message']}")
    sys.exit(0)


@main.command()
@data_option
@click.option("--out", "out_path", default=None, help="Write here instead of stdout.")
def export(data_path, out_path):
    """Write a compacted snapshot of the store (same JSONL format)."""
    if not Path(data_path).exists():
        click.echo(f"error: no data file at {data_path}", err=True)
        sys.exit(1)
    store = NotificationStore(Path(data_path))
    lines = [json.dumps(r, separators=(",", ":")) for r in store.export_records()]
    text = "\n".join(lines) + ("\n" if lines else "")
    if out_path is None:
        click.echo(text, nl=False)
    else:
        Path(out_path).write_text(text, encoding="utf-8")
        click.echo(f"exported {len(lines)} records to {out_path}")


@main.command(name="import")
@click.argument("source")
@data_option
@click.option("--force", is_flag=True, help="Replace an existing data file.")
def import_(source, data_path, force):
    """Rebuild the store from a snapshot; refuses to clobber without --force."""
    target = Path(data_path)
    if target.exists() and not force:
        click.echo(f"error: {data_path} exists; pass --force to replace it", err=True)
        sys.exit(1)
    if not Path(source).is_file():
        click.echo(f"error: no such file: {source}", err=True)
        sys.exit(1)
    try:
        records = _read_jsonl_records(Path(source))
        probe = NotificationStore()
        probe.seed_records(records)
    except (ScriptError, CampusNotifyError) as exc:
        click.echo(f"error: {exc.message}", err=True)
        sys.exit(2)
    tmp = target.with_suffix(target.suffix + ".tmp")
    tmp.parent.mkdir(parents=True, exist_ok=True)
    with open(tmp, "w", encoding="utf-8") as fh:
        for record in probe.export_records():
            fh.write(json.dumps(record, separators=(",", ":")) + "\n")
    tmp.replace(target)
    click.echo(f"imported {len(records)} records into {data_path}")


if __name__ == "__main__":
    main()
