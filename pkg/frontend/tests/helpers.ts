// Shared fakes for unit tests: an in-memory stand-in for the HTTP client and
// recording views.  The fake only mimics the handful of behaviours the
// controllers rely on; wire-format fidelity is the integration suite's job.

import {
  ApiClient,
  ApiError,
  DisplayPayloadWire,
  FeedEntryWire,
  NotificationWire,
  ReaderWire,
} from "../src/api.js";
import { DisplayView, EntryActions } from "../src/displayScreen.js";
import { KioskView } from "../src/kiosk.js";

export function entry(
  id: number,
  overrides: Partial<FeedEntryWire> = {},
): FeedEntryWire {
  return {
    id,
    title: `notice ${id}`,
    body: `body ${id}`,
    details: "",
    sender_name: "Office",
    created_at: "2026-01-05T12:00:00Z",
    expiry: "2026-12-31 PM 11:59",
    read: false,
    matched_via: "preference_broadcast",
    ...overrides,
  };
}

export function payload(
  entries: FeedEntryWire[],
  readerId = "R-LIB-1",
  displayName = "Aisha Rahman",
): DisplayPayloadWire {
  return { reader_id: readerId, display_name: displayName, entries };
}

export function apiError(
  status: number,
  code: string,
  field: string | null = null,
  message = code,
): ApiError {
  return new ApiError(status, { code, message, field });
}

export interface Call {
  method: string;
  args: unknown[];
}

/**
 * ApiClient double: scripted responses per method, call recording.  Methods
 * not scripted throw, which keeps tests honest about what they exercise.
 */
export class FakeApi {
  readonly calls: Call[] = [];
  feeds: DisplayPayloadWire[] = [];
  feedError: Error | null = null;
  postResult: NotificationWire | Error | null = null;
  readers: ReaderWire[] = [];
  listReadersError: Error | null = null;
  readStateError: Error | null = null;

  asClient(): ApiClient {
    return this as unknown as ApiClient;
  }

  async feed(readerId: string, tagId: string): Promise<DisplayPayloadWire> {
    this.calls.push({ method: "feed", args: [readerId, tagId] });
    if (this.feedError) throw this.feedError;
    if (this.feeds.length === 0) throw new Error("FakeApi: no feed scripted");
    // Consume the queue but keep re-serving the last payload.
    return this.feeds.length > 1
      ? (this.feeds.shift() as DisplayPayloadWire)
      : (this.feeds[0] as DisplayPayloadWire);
  }

  async postNotification(
    draft: unknown,
    sender: string,
  ): Promise<NotificationWire> {
    this.calls.push({ method: "postNotification", args: [draft, sender] });
    if (this.postResult === null) {
      throw new Error("FakeApi: no post result scripted");
    }
    if (this.postResult instanceof Error) throw this.postResult;
    return this.postResult;
  }

  async listReaders(): Promise<ReaderWire[]> {
    this.calls.push({ method: "listReaders", args: [] });
    if (this.listReadersError) throw this.listReadersError;
    return this.readers;
  }

  async setReadState(
    tagId: string,
    notificationId: number,
    state: string,
  ): Promise<unknown> {
    this.calls.push({
      method: "setReadState",
      args: [tagId, notificationId, state],
    });
    if (this.readStateError) throw this.readStateError;
    return { tag_id: tagId, notification_id: notificationId, state };
  }
}

export interface ViewEvent {
  kind: "payload" | "empty" | "error" | "closed" | "configError" | "idle";
  payload?: DisplayPayloadWire;
  message?: string;
  actions?: EntryActions;
}

export class RecordingView implements DisplayView, KioskView {
  readonly events: ViewEvent[] = [];

  renderPayload(payload: DisplayPayloadWire, actions: EntryActions): void {
    this.events.push({ kind: "payload", payload, actions });
  }

  renderEmpty(payload: DisplayPayloadWire, actions: EntryActions): void {
    this.events.push({ kind: "empty", payload, actions });
  }

  renderError(message: string): void {
    this.events.push({ kind: "error", message });
  }

  closed(): void {
    this.events.push({ kind: "closed" });
  }

  configurationError(message: string): void {
    this.events.push({ kind: "configError", message });
  }

  idle(): void {
    this.events.push({ kind: "idle" });
  }

  last(): ViewEvent {
    const event = this.events[this.events.length - 1];
    if (!event) throw new Error("no view events yet");
    return event;
  }

  ofKind(kind: ViewEvent["kind"]): ViewEvent[] {
    return this.events.filter((e) => e.kind === kind);
  }
}
