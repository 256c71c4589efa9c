// Post-notification form: local validation that mirrors the server's rules,
// plus a small controller that turns submit attempts into one of three
// outcomes (created / rejected / network trouble).  The view layer stays
// dumb: it renders whatever outcome it is handed.

import {
  ApiClient,
  ApiError,
  NotificationDraftWire,
  NotificationWire,
  TargetingWire,
} from "./api.js";

export const CATEGORIES = ["Book", "Class", "Sports", "Events", "Misc"];

export type Meridiem = "AM" | "PM";

export interface ExpiryParts {
  date: string; // YYYY-MM-DD from the date picker
  meridiem: Meridiem;
  hour: number; // 1..12
  minute: number; // 0..59
}

export type TargetMode = "students" | "course" | "broadcast";

export interface PostFormState {
  title: string;
  body: string;
  details: string;
  expiry: ExpiryParts;
  targetMode: TargetMode;
  studentsRaw: string; // comma or whitespace separated tag ids
  course: string;
  category: string;
  scopeBuilding: string;
  scopeVenue: string;
}

export function emptyForm(): PostFormState {
  return {
    title: "",
    body: "",
    details: "",
    expiry: { date: "", meridiem: "PM", hour: 12, minute: 0 },
    targetMode: "broadcast",
    studentsRaw: "",
    course: "",
    category: "",
    scopeBuilding: "",
    scopeVenue: "",
  };
}

/** Render parts in the service's 12-hour wire format, minute zero-padded. */
export function formatExpiry(parts: ExpiryParts): string {
  const minute = String(parts.minute).padStart(2, "0");
  return `${parts.date} ${parts.meridiem} ${parts.hour}:${minute}`;
}

/** The UTC instant the parts denote, or null when they do not form one. */
export function expiryInstant(parts: ExpiryParts): Date | null {
  if (!/^\d{4}-\d{2}-\d{2}$/.test(parts.date)) return null;
  if (!Number.isInteger(parts.hour) || parts.hour < 1 || parts.hour > 12) {
    return null;
  }
  if (!Number.isInteger(parts.minute) || parts.minute < 0 || parts.minute > 59) {
    return null;
  }
  let hour = parts.hour % 12;
  if (parts.meridiem === "PM") hour += 12;
  const stamp = Date.parse(
    `${parts.date}T${String(hour).padStart(2, "0")}:` +
      `${String(parts.minute).padStart(2, "0")}:00Z`,
  );
  return Number.isNaN(stamp) ? null : new Date(stamp);
}

export function parseStudentList(raw: string): string[] {
  return raw
    .split(/[,\s]+/)
    .map((s) => s.trim())
    .filter((s) => s.length > 0);
}

export type FieldErrors = Partial<Record<string, string>>;

/**
 * Client-side mirror of what the server enforces, so honest mistakes get
 * caught before the round trip.  The server remains the authority; anything
 * it still rejects comes back through ApiError and is highlighted the same
 * way.
 */
export function validateForm(state: PostFormState, now: Date): FieldErrors {
  const errors: FieldErrors = {};
  if (state.title.trim() === "") {
    errors["title"] = "title must not be empty";
  }
  const instant = expiryInstant(state.expiry);
  if (instant === null) {
    errors["expiry"] = "pick a complete expiry date and time";
  } else if (instant.getTime() < now.getTime()) {
    errors["expiry"] = "expiry is already in the past";
  }
  if (state.targetMode === "students") {
    if (parseStudentList(state.studentsRaw).length === 0) {
      errors["targeting"] = "list at least one student tag id";
    }
  } else if (state.targetMode === "course") {
    if (state.course.trim() === "") {
      errors["targeting"] = "pick a course";
    }
  } else {
    if (state.category.trim() === "") {
      errors["targeting"] = "pick a preference category";
    }
  }
  return errors;
}

export function canSubmit(state: PostFormState, now: Date): boolean {
  return Object.keys(validateForm(state, now)).length === 0;
}

export function toDraft(state: PostFormState): NotificationDraftWire {
  let targeting: TargetingWire;
  if (state.targetMode === "students") {
    targeting = { students: parseStudentList(state.studentsRaw) };
  } else if (state.targetMode === "course") {
    targeting = { course: state.course.trim() };
  } else {
    targeting = { broadcast: state.category };
  }
  const draft: NotificationDraftWire = {
    title: state.title.trim(),
    body: state.body,
    expiry: formatExpiry(state.expiry),
    targeting,
    details: state.details,
  };
  const building = state.scopeBuilding.trim();
  if (building !== "") {
    draft.location_scope = { building_name: building };
    const venue = state.scopeVenue.trim();
    if (venue !== "") {
      draft.location_scope.venue_name = venue;
    }
  }
  return draft;
}

export type SubmitOutcome =
  | { kind: "created"; notification: NotificationWire }
  | { kind: "invalid"; errors: FieldErrors }
  | { kind: "rejected"; field: string | null; message: string; code: string }
  | { kind: "network"; message: string };

export class PostFormController {
  private readonly api: ApiClient;
  private readonly now: () => Date;

  constructor(api: ApiClient, now: () => Date = () => new Date()) {
    this.api = api;
    this.now = now;
  }

  async submit(state: PostFormState, sender: string): Promise<SubmitOutcome> {
    const errors = validateForm(state, this.now());
    if (Object.keys(errors).length > 0) {
      return { kind: "invalid", errors };
    }
    try {
      const notification = await this.api.postNotification(
        toDraft(state),
        sender,
      );
      return { kind: "created", notification };
    } catch (err) {
      if (err instanceof ApiError) {
        return {
          kind: "rejected",
          field: err.field,
          message: err.message,
          code: err.code,
        };
      }
      const message = err instanceof Error ? err.message : String(err);
      return { kind: "network", message };
    }
  }
}

// ---------------------------------------------------------------------------
// DOM binding

const FIELD_IDS: Record<string, string> = {
  title: "post-title",
  body: "post-body",
  expiry: "post-expiry-date",
  date: "post-expiry-date",
  meridiem: "post-expiry-meridiem",
  targeting: "post-target-value",
  "X-Sender": "post-sender",
};

/**
 * Wires the static form markup to the controller.  All state lives in the
 * inputs themselves; a submit reads them, runs the controller and renders
 * the outcome.  Nothing here caches server data.
 */
export class DomPostForm {
  private readonly root: Document | HTMLElement;
  private readonly controller: PostFormController;

  constructor(root: Document | HTMLElement, controller: PostFormController) {
    this.root = root;
    this.controller = controller;
  }

  private input(id: string): HTMLInputElement {
    const el = this.root.querySelector(`#${id}`);
    if (!el) throw new Error(`missing element #${id}`);
    return el as HTMLInputElement;
  }

  private value(id: string): string {
    return this.input(id).value;
  }

  readState(): PostFormState {
    return {
      title: this.value("post-title"),
      body: this.value("post-body"),
      details: this.value("post-details"),
      expiry: {
        date: this.value("post-expiry-date"),
        meridiem: this.value("post-expiry-meridiem") as Meridiem,
        hour: Number(this.value("post-expiry-hour")),
        minute: Number(this.value("post-expiry-minute")),
      },
      targetMode: this.value("post-target-mode") as TargetMode,
      studentsRaw:
        this.value("post-target-mode") === "students"
          ? this.value("post-target-value")
          : "",
      course:
        this.value("post-target-mode") === "course"
          ? this.value("post-target-value")
          : "",
      category:
        this.value("post-target-mode") === "broadcast"
          ? this.value("post-target-value")
          : "",
      scopeBuilding: this.value("post-scope-building"),
      scopeVenue: this.value("post-scope-venue"),
    };
  }

  clearMarks(): void {
    for (const el of this.root.querySelectorAll(".field-error")) {
      el.classList.remove("field-error");
    }
    const banner = this.root.querySelector("#post-banner") as HTMLElement;
    banner.textContent = "";
    banner.className = "";
  }

  highlight(field: string | null, message: string): void {
    const id = field !== null ? FIELD_IDS[field] : undefined;
    if (id) {
      this.input(id).classList.add("field-error");
    }
    const banner = this.root.querySelector("#post-banner") as HTMLElement;
    banner.textContent = message;
    banner.className = "banner-error";
  }

  showNetworkTrouble(message: string): void {
    // Form inputs are left untouched so the user can simply retry.
    const banner = this.root.querySelector("#post-banner") as HTMLElement;
    banner.textContent = `could not reach the server (${message}); your draft is still here, try again`;
    banner.className = "banner-retry";
  }

  showCreated(notification: NotificationWire): void {
    const banner = this.root.querySelector("#post-banner") as HTMLElement;
    banner.textContent = `posted notification #${notification.id}`;
    banner.className = "banner-ok";
    // created_at and sender come back from the server and are display-only.
    const created = this.input("post-created-at");
    created.value = notification.created_at;
    created.readOnly = true;
    const sender = this.input("post-stored-sender");
    sender.value = notification.sender_name;
    sender.readOnly = true;
  }

  /** Submit-button state mirrors validity, e.g. course mode with no course. */
  refreshSubmitState(now: Date = new Date()): void {
    const button = this.root.querySelector(
      "#post-submit",
    ) as HTMLButtonElement;
    button.disabled = !canSubmit(this.readState(), now);
  }

  async submit(): Promise<SubmitOutcome> {
    this.clearMarks();
    const sender = this.value("post-sender");
    const outcome = await this.controller.submit(this.readState(), sender);
    if (outcome.kind === "created") {
      this.showCreated(outcome.notification);
    } else if (outcome.kind === "invalid") {
      const [field, message] = Object.entries(outcome.errors)[0] ?? [
        null,
        "invalid form",
      ];
      this.highlight(field, message ?? "invalid form");
    } else if (outcome.kind === "rejected") {
      this.highlight(outcome.field, outcome.message);
    } else {
      this.showNetworkTrouble(outcome.message);
    }
    return outcome;
  }

  attach(): void {
    const button = this.root.querySelector(
      "#post-submit",
    ) as HTMLButtonElement;
    button.addEventListener("click", (ev) => {
      ev.preventDefault();
      void this.submit();
    });
    for (const id of [
      "post-title",
      "post-expiry-date",
      "post-expiry-hour",
      "post-expiry-minute",
      "post-target-mode",
      "post-target-value",
    ]) {
      this.input(id).addEventListener("input", () => this.refreshSubmitState());
      this.input(id).addEventListener("change", () => this.refreshSubmitState());
    }
    this.refreshSubmitState();
  }
}
