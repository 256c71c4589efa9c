// Integration suite: boots the real notification service as a child process
// and drives it over HTTP, exactly as the page would.  Covers the wire
// formats the UI depends on plus the two acceptance checks:
//   1. the post form renders the server-set created_at and sender read-only
//      after a 201, and highlights the expiry field named by an ApiError;
//   2. a kiosk shows a freshly posted matching notification within one poll
//      interval, without a reload, in exactly the payload's order.

import { spawn, ChildProcess } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { createServer } from "node:net";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { setTimeout as sleep } from "node:timers/promises";
import { Window } from "happy-dom";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient, ApiError, DisplayPayloadWire } from "../src/api.js";
import { DisplayScreenController } from "../src/displayScreen.js";
import { DomKioskView, KioskController } from "../src/kiosk.js";
import {
  DomPostForm,
  ExpiryParts,
  PostFormController,
} from "../src/postForm.js";
import { RecordingView } from "./helpers.js";

let proc: ChildProcess;
let dataDir: string;
let api: ApiClient;
let baseUrl: string;

async function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const probe = createServer();
    probe.once("error", reject);
    probe.listen(0, "127.0.0.1", () => {
      const address = probe.address();
      if (address === null || typeof address === "string") {
        reject(new Error("no port assigned"));
        return;
      }
      probe.close(() => resolve(address.port));
    });
  });
}

async function waitForHealth(client: ApiClient): Promise<void> {
  const deadline = Date.now() + 15000;
  let lastError: unknown = null;
  while (Date.now() < deadline) {
    try {
      const health = await client.health();
      if (health.status === "ok") return;
    } catch (err) {
      lastError = err;
    }
    await sleep(100);
  }
  throw new Error(`service did not come up: ${lastError}`);
}

/** 12-hour parts for a UTC instant, for building form states around "now". */
function partsFor(instant: Date): ExpiryParts {
  const hour24 = instant.getUTCHours();
  return {
    date: instant.toISOString().slice(0, 10),
    meridiem: hour24 < 12 ? "AM" : "PM",
    hour: hour24 % 12 === 0 ? 12 : hour24 % 12,
    minute: instant.getUTCMinutes(),
  };
}

const FORM_HTML = `
  <input id="post-sender" value="Sports Office">
  <input id="post-title">
  <textarea id="post-body"></textarea>
  <textarea id="post-details"></textarea>
  <input id="post-expiry-date" type="date">
  <select id="post-expiry-meridiem"><option>AM</option><option>PM</option></select>
  <select id="post-expiry-hour">${[...Array(12)]
    .map((_, i) => `<option>${i + 1}</option>`)
    .join("")}</select>
  <select id="post-expiry-minute">${[...Array(60)]
    .map((_, i) => `<option>${i}</option>`)
    .join("")}</select>
  <select id="post-target-mode">
    <option value="students">student list</option>
    <option value="course">course</option>
    <option value="broadcast">category broadcast</option>
  </select>
  <input id="post-target-value">
  <input id="post-scope-building">
  <input id="post-scope-venue">
  <button id="post-submit">post</button>
  <p id="post-banner"></p>
  <input id="post-created-at" readonly>
  <input id="post-stored-sender" readonly>
`;

interface FormPage {
  document: Document;
  form: DomPostForm;
  fill(fields: Record<string, string>): void;
  input(id: string): HTMLInputElement;
}

function formPage(now?: () => Date): FormPage {
  const window = new Window();
  const document = window.document as unknown as Document;
  document.body.innerHTML = FORM_HTML;
  const controller = now
    ? new PostFormController(api, now)
    : new PostFormController(api);
  const form = new DomPostForm(document, controller);
  const input = (id: string) =>
    document.getElementById(id) as HTMLInputElement;
  return {
    document,
    form,
    input,
    fill(fields) {
      for (const [id, value] of Object.entries(fields)) {
        input(id).value = value;
      }
    },
  };
}

function setExpiry(page: FormPage, parts: ExpiryParts): void {
  page.fill({
    "post-expiry-date": parts.date,
    "post-expiry-meridiem": parts.meridiem,
    "post-expiry-hour": String(parts.hour),
    "post-expiry-minute": String(parts.minute),
  });
}

beforeAll(async () => {
  dataDir = mkdtempSync(join(tmpdir(), "campus-ui-"));
  const port = await freePort();
  baseUrl = `http://127.0.0.1:${port}`;
  proc = spawn(
    "campus-notify",
    [
      "serve",
      "--data",
      join(dataDir, "campus.jsonl"),
      "--host",
      "127.0.0.1",
      "--port",
      String(port),
      "--log-level",
      "warning",
    ],
    { stdio: ["ignore", "pipe", "pipe"] },
  );
  api = new ApiClient(baseUrl);
  await waitForHealth(api);

  await api.registerReader({
    reader_id: "R-LIB-1",
    location: { building_name: "Library", venue_name: "Entrance" },
  });
  await api.registerReader({
    reader_id: "R-SPORT-1",
    location: { building_name: "Sports Complex" },
  });
  await api.registerProfile({
    tag_id: "1001",
    course_ids: ["CS101"],
    preferences: ["Sports", "Events"],
    display_name: "Aisha Rahman",
  });
  await api.registerProfile({
    tag_id: "1002",
    course_ids: ["MA201"],
    preferences: ["Book"],
    display_name: "Ben Ortiz",
  });
});

afterAll(async () => {
  proc?.kill("SIGTERM");
  await new Promise((resolve) => {
    proc?.once("exit", resolve);
    setTimeout(resolve, 3000);
  });
  rmSync(dataDir, { recursive: true, force: true });
});

describe("wire formats", () => {
  it("serves health with a UTC timestamp", async () => {
    const health = await api.health();
    expect(health.status).toBe("ok");
    expect(health.time).toMatch(/^\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}Z$/);
  });

  it("answers errors with the {code, message, field} body", async () => {
    try {
      await api.feed("R-GHOST", "1001");
      expect.unreachable("expected a 404");
    } catch (err) {
      expect(err).toBeInstanceOf(ApiError);
      const apiErr = err as ApiError;
      expect(apiErr.status).toBe(404);
      expect(apiErr.code).toBe("unknown_reader");
      expect(apiErr.field).toBe("reader_id");
      expect(typeof apiErr.message).toBe("string");
    }
  });

  it("stores and echoes notifications with server-side stamps", async () => {
    const stored = await api.postNotification(
      {
        title: "Library hours",
        body: "open till midnight during exams",
        expiry: "2099-12-31 PM 11:59",
        targeting: { broadcast: "Book" },
      },
      "Library Desk",
    );
    expect(stored.id).toBeGreaterThan(0);
    expect(stored.sender_name).toBe("Library Desk");
    expect(stored.created_at).toMatch(/^\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}Z$/);
    expect(stored.expiry).toBe("2099-12-31 PM 11:59");

    const found = await api.searchNotifications({ poster: "library desk" });
    expect(found.map((n) => n.id)).toContain(stored.id);
  });

  it("feeds, detection events and read-state agree on one payload shape", async () => {
    const posted = await api.postNotification(
      {
        title: "Course notice",
        body: "lecture moved to the main hall",
        expiry: "2099-12-31 PM 11:59",
        targeting: { course: "CS101" },
      },
      "Prof. Layne",
    );

    const viaEvent = await api.postEvent({
      tag_id: "1001",
      reader_id: "R-LIB-1",
      timestamp: new Date().toISOString().replace(/\.\d{3}Z$/, "Z"),
      nonce: `it-${Date.now()}`,
    });
    const viaFeed = await api.feed("R-LIB-1", "1001");
    expect(viaEvent.reader_id).toBe("R-LIB-1");
    expect(viaEvent.display_name).toBe("Aisha Rahman");
    expect(viaEvent).toEqual(viaFeed);

    const entry = viaFeed.entries.find((e) => e.id === posted.id);
    expect(entry).toMatchObject({
      id: posted.id,
      title: "Course notice",
      sender_name: "Prof. Layne",
      read: false,
      matched_via: "course_batch",
    });

    const state = await api.setReadState("1001", posted.id, "read");
    expect(state).toEqual({
      tag_id: "1001",
      notification_id: posted.id,
      state: "read",
    });
    const after = await api.feed("R-LIB-1", "1001");
    expect(after.entries.find((e) => e.id === posted.id)?.read).toBe(true);
  });

  it("keeps read state per student", async () => {
    const posted = await api.postNotification(
      {
        title: "Shared notice",
        body: "for both",
        expiry: "2099-12-31 PM 11:59",
        targeting: { students: ["1001", "1002"] },
      },
      "Admin",
    );
    await api.setReadState("1001", posted.id, "read");
    const a = await api.feed("R-LIB-1", "1001");
    const b = await api.feed("R-LIB-1", "1002");
    expect(a.entries.find((e) => e.id === posted.id)?.read).toBe(true);
    expect(b.entries.find((e) => e.id === posted.id)?.read).toBe(false);
  });
});

describe("post form against the live service", () => {
  it("renders server-set created_at and sender read-only after a 201", async () => {
    const page = formPage();
    page.fill({
      "post-title": "Pool closure",
      "post-body": "closed for cleaning on Friday",
      "post-target-mode": "broadcast",
      "post-target-value": "Sports",
      "post-sender": "Sports Office",
    });
    setExpiry(page, partsFor(new Date(Date.now() + 60 * 60 * 1000)));

    const outcome = await page.form.submit();
    expect(outcome.kind).toBe("created");
    if (outcome.kind !== "created") return;

    const created = page.input("post-created-at");
    const sender = page.input("post-stored-sender");
    expect(created.value).toBe(outcome.notification.created_at);
    expect(created.value).toMatch(/^\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}Z$/);
    expect(created.readOnly).toBe(true);
    expect(sender.value).toBe("Sports Office");
    expect(sender.readOnly).toBe(true);

    // The server's copy is authoritative and identical to what is shown.
    const found = await api.searchNotifications({ title: "Pool closure" });
    expect(found[0]?.created_at).toBe(created.value);
    expect(found[0]?.sender_name).toBe(sender.value);
  });

  it("highlights the expiry field named by the server's rejection", async () => {
    // Client-side validation is pinned to an earlier clock so the stale
    // expiry slips through locally and the server is the one to say no.
    const skewedNow = () => new Date(Date.now() - 2 * 60 * 60 * 1000);
    const page = formPage(skewedNow);
    page.fill({
      "post-title": "Yesterday's game",
      "post-body": "already over",
      "post-target-mode": "broadcast",
      "post-target-value": "Sports",
      "post-sender": "Sports Office",
    });
    setExpiry(page, partsFor(new Date(Date.now() - 60 * 60 * 1000)));

    const outcome = await page.form.submit();
    expect(outcome).toMatchObject({
      kind: "rejected",
      field: "expiry",
      code: "expiry_in_past",
    });

    expect(
      page.input("post-expiry-date").classList.contains("field-error"),
    ).toBe(true);
    const banner = page.document.getElementById("post-banner") as HTMLElement;
    expect(banner.className).toBe("banner-error");
    expect(banner.textContent).not.toBe("");
  });

  it("surfaces an unknown course as a rejection, not a crash", async () => {
    const page = formPage();
    page.fill({
      "post-title": "Ghost course",
      "post-body": "nobody takes this",
      "post-target-mode": "course",
      "post-target-value": "XX999",
      "post-sender": "Office",
    });
    setExpiry(page, partsFor(new Date(Date.now() + 60 * 60 * 1000)));
    const outcome = await page.form.submit();
    expect(outcome).toMatchObject({ kind: "rejected", code: "invalid_targeting" });
  });
});

describe("kiosk against the live service", () => {
  it("shows a new matching notification within one poll interval, order intact", async () => {
    const window = new Window();
    const document = window.document as unknown as Document;
    document.body.innerHTML = `<div id="screen"></div>`;
    const view = new DomKioskView(
      document,
      document.getElementById("screen") as unknown as HTMLElement,
    );
    // Default interval is 3 s; the criterion allows exactly one of them.
    const kiosk = new KioskController(api, view, "R-SPORT-1");
    expect(kiosk.pollIntervalMs).toBe(3000);
    expect(await kiosk.start()).toBe(true);
    await kiosk.scan("1001");

    const renderedIds = () =>
      [...document.querySelectorAll("#display-entries .entry")].map((li) =>
        Number((li as HTMLElement).dataset["notificationId"]),
      );
    const baseline = renderedIds();

    const posted = await api.postNotification(
      {
        title: "Trials tonight",
        body: "inter-varsity football league is on now",
        expiry: "2099-12-31 PM 11:59",
        targeting: { broadcast: "Sports" },
        location_scope: { building_name: "Sports Complex" },
      },
      "Sports Office",
    );
    const postedAt = Date.now();

    // No rescan, no reload: the poll alone must surface it.
    let appeared = -1;
    while (Date.now() - postedAt < kiosk.pollIntervalMs + 1500) {
      if (renderedIds().includes(posted.id)) {
        appeared = Date.now() - postedAt;
        break;
      }
      await sleep(50);
    }
    kiosk.stop();
    expect(appeared).toBeGreaterThanOrEqual(0);
    expect(appeared).toBeLessThanOrEqual(kiosk.pollIntervalMs + 1500);
    expect(renderedIds().length).toBeGreaterThan(baseline.length);

    // Rendered order must be exactly the payload order the service answers.
    const payload = await api.feed("R-SPORT-1", "1001");
    expect(renderedIds()).toEqual(payload.entries.map((e) => e.id));
  });

  it("boots into the configuration error screen for an unknown reader", async () => {
    const view = new RecordingView();
    const kiosk = new KioskController(api, view, "R-NOWHERE", 500);
    expect(await kiosk.start()).toBe(false);
    expect(view.last().kind).toBe("configError");
  });

  it("display actions round-trip through the service", async () => {
    const posted = await api.postNotification(
      {
        title: "Round trip",
        body: "toggle me",
        expiry: "2099-12-31 PM 11:59",
        targeting: { students: ["1002"] },
      },
      "Admin",
    );
    const view = new RecordingView();
    const screen = new DisplayScreenController(api, view, "R-LIB-1", "1002");
    await screen.refresh();

    await screen.markRead(posted.id);
    let shown = view.last().payload?.entries.find((e) => e.id === posted.id);
    expect(shown?.read).toBe(true);

    await screen.markUnread(posted.id);
    shown = view.last().payload?.entries.find((e) => e.id === posted.id);
    expect(shown?.read).toBe(false);

    await screen.remove(posted.id);
    const ids = view.last().payload?.entries.map((e) => e.id) ?? [];
    expect(ids).not.toContain(posted.id);

    // Deleted entries stay gone on the server, not just on this screen.
    const fresh: DisplayPayloadWire = await api.feed("R-LIB-1", "1002");
    expect(fresh.entries.map((e) => e.id)).not.toContain(posted.id);
  });
});
