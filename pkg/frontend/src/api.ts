// Typed HTTP client for the notification service.
//
// Every helper resolves with parsed JSON on 2xx and throws ApiError when the
// server answers with its {code, message, field} error body.  Anything else
// (connection refused, DNS, aborted request) surfaces as the underlying
// fetch rejection so callers can tell "server said no" apart from "no server".

export interface ApiErrorBody {
  code: string;
  message: string;
  field: string | null;
}

export class ApiError extends Error {
  readonly code: string;
  readonly field: string | null;
  readonly status: number;

  constructor(status: number, body: ApiErrorBody) {
    super(body.message);
    this.name = "ApiError";
    this.status = status;
    this.code = body.code;
    this.field = body.field;
  }
}

export interface LocationWire {
  building_name: string;
  venue_name?: string;
}

// Exactly one of the three keys is present on the wire.
export interface TargetingWire {
  students?: string[];
  course?: string;
  broadcast?: string;
}

export interface NotificationDraftWire {
  title: string;
  body: string;
  expiry: string;
  targeting: TargetingWire;
  location_scope?: LocationWire | null;
  details?: string;
}

export interface NotificationWire {
  id: number;
  title: string;
  body: string;
  details: string;
  sender_name: string;
  created_at: string;
  expiry: string;
  targeting: TargetingWire;
  location_scope: LocationWire | null;
}

export interface FeedEntryWire {
  id: number;
  title: string;
  body: string;
  details: string;
  sender_name: string;
  created_at: string;
  expiry: string;
  read: boolean;
  matched_via: string;
}

export interface DisplayPayloadWire {
  reader_id: string;
  display_name: string;
  entries: FeedEntryWire[];
}

export interface ProfileWire {
  tag_id: string;
  course_ids: string[];
  preferences: string[];
  display_name?: string;
}

export interface ReaderWire {
  reader_id: string;
  location: LocationWire;
}

export interface ReadStateWire {
  tag_id: string;
  notification_id: number;
  state: "unread" | "read" | "deleted";
}

export type SearchQuery =
  | { poster: string }
  | { created_on: string }
  | { title: string };

export type FetchLike = (
  input: string,
  init?: RequestInit,
) => Promise<Response>;

async function errorFromResponse(resp: Response): Promise<ApiError> {
  let body: ApiErrorBody;
  try {
    body = (await resp.json()) as ApiErrorBody;
  } catch {
    body = { code: "http_error", message: `HTTP ${resp.status}`, field: null };
  }
  return new ApiError(resp.status, body);
}

export class ApiClient {
  readonly baseUrl: string;
  private readonly fetchFn: FetchLike;

  constructor(baseUrl: string, fetchFn?: FetchLike) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
    // Bind so a bare `fetch` keeps its global receiver in browsers.
    this.fetchFn = fetchFn ?? ((input, init) => fetch(input, init));
  }

  private async request(
    path: string,
    init?: RequestInit,
  ): Promise<unknown> {
    const resp = await this.fetchFn(this.baseUrl + path, init);
    if (!resp.ok) {
      throw await errorFromResponse(resp);
    }
    return resp.json();
  }

  private async postJson(
    path: string,
    payload: unknown,
    headers: Record<string, string> = {},
  ): Promise<unknown> {
    return this.request(path, {
      method: "POST",
      headers: { "Content-Type": "application/json", ...headers },
      body: JSON.stringify(payload),
    });
  }

  async health(): Promise<{ status: string; time: string }> {
    return (await this.request("/health")) as { status: string; time: string };
  }

  async postNotification(
    draft: NotificationDraftWire,
    sender: string,
  ): Promise<NotificationWire> {
    return (await this.postJson("/notifications", draft, {
      "X-Sender": sender,
    })) as NotificationWire;
  }

  async searchNotifications(query: SearchQuery): Promise<NotificationWire[]> {
    const params = new URLSearchParams(query as Record<string, string>);
    const data = (await this.request(`/notifications?${params}`)) as {
      notifications: NotificationWire[];
    };
    return data.notifications;
  }

  async registerProfile(profile: ProfileWire): Promise<ProfileWire> {
    return (await this.postJson("/profiles", profile)) as ProfileWire;
  }

  async registerReader(reader: ReaderWire): Promise<ReaderWire> {
    return (await this.postJson("/readers", reader)) as ReaderWire;
  }

  async listReaders(): Promise<ReaderWire[]> {
    const data = (await this.request("/readers")) as { readers: ReaderWire[] };
    return data.readers;
  }

  async listCourses(): Promise<string[]> {
    const data = (await this.request("/courses")) as { courses: string[] };
    return data.courses;
  }

  async postEvent(event: {
    tag_id: string;
    reader_id: string;
    timestamp: string;
    nonce: string;
  }): Promise<DisplayPayloadWire> {
    return (await this.postJson("/events", event)) as DisplayPayloadWire;
  }

  async feed(readerId: string, tagId: string): Promise<DisplayPayloadWire> {
    const params = new URLSearchParams({ reader_id: readerId, tag_id: tagId });
    return (await this.request(`/feed?${params}`)) as DisplayPayloadWire;
  }

  async setReadState(
    tagId: string,
    notificationId: number,
    state: "unread" | "read" | "deleted",
  ): Promise<ReadStateWire> {
    return (await this.request("/read-state", {
      method: "PUT",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({
        tag_id: tagId,
        notification_id: notificationId,
        state,
      }),
    })) as ReadStateWire;
  }
}
