// Per-student display screen: the list a reader shows after a detection.
//
// Rendering always reflects the last payload the server returned.  Every
// action (read, unread, delete) is a PUT to the read-state endpoint followed
// by a fresh feed fetch; the screen never mutates entries locally, so it can
// not drift from what the service would answer.

import { ApiClient, DisplayPayloadWire, FeedEntryWire } from "./api.js";

/** What an entry's buttons can do, implemented by the controller. */
export interface EntryActions {
  markRead(notificationId: number): Promise<void>;
  markUnread(notificationId: number): Promise<void>;
  remove(notificationId: number): Promise<void>;
  close(): void;
}

export interface DisplayView {
  renderPayload(payload: DisplayPayloadWire, actions: EntryActions): void;
  renderEmpty(payload: DisplayPayloadWire, actions: EntryActions): void;
  renderError(message: string): void;
  closed(): void;
}

export class DisplayScreenController implements EntryActions {
  private readonly api: ApiClient;
  private readonly view: DisplayView;
  readonly readerId: string;
  readonly tagId: string;
  private lastPayload: DisplayPayloadWire | null = null;

  constructor(
    api: ApiClient,
    view: DisplayView,
    readerId: string,
    tagId: string,
  ) {
    this.api = api;
    this.view = view;
    this.readerId = readerId;
    this.tagId = tagId;
  }

  /** The payload most recently rendered, for tests and the kiosk shell. */
  current(): DisplayPayloadWire | null {
    return this.lastPayload;
  }

  private render(payload: DisplayPayloadWire): void {
    this.lastPayload = payload;
    if (payload.entries.length === 0) {
      this.view.renderEmpty(payload, this);
    } else {
      this.view.renderPayload(payload, this);
    }
  }

  /** Show a payload the caller already holds (e.g. from a detection POST). */
  show(payload: DisplayPayloadWire): void {
    this.render(payload);
  }

  async refresh(): Promise<void> {
    try {
      this.render(await this.api.feed(this.readerId, this.tagId));
    } catch (err) {
      this.view.renderError(err instanceof Error ? err.message : String(err));
    }
  }

  private async mutate(
    notificationId: number,
    state: "read" | "unread" | "deleted",
  ): Promise<void> {
    try {
      await this.api.setReadState(this.tagId, notificationId, state);
    } catch (err) {
      this.view.renderError(err instanceof Error ? err.message : String(err));
      return;
    }
    // Re-render from the authoritative answer, not from local bookkeeping.
    await this.refresh();
  }

  async markRead(notificationId: number): Promise<void> {
    await this.mutate(notificationId, "read");
  }

  async markUnread(notificationId: number): Promise<void> {
    await this.mutate(notificationId, "unread");
  }

  async remove(notificationId: number): Promise<void> {
    await this.mutate(notificationId, "deleted");
  }

  close(): void {
    this.lastPayload = null;
    this.view.closed();
  }
}

// ---------------------------------------------------------------------------
// DOM binding

function entryNode(
  doc: Document,
  entry: FeedEntryWire,
  actions: EntryActions,
): HTMLElement {
  const item = doc.createElement("li");
  item.className = entry.read ? "entry entry-read" : "entry entry-unread";
  item.dataset["notificationId"] = String(entry.id);

  const title = doc.createElement("span");
  title.className = "entry-title";
  title.textContent = entry.title;
  item.appendChild(title);

  const meta = doc.createElement("span");
  meta.className = "entry-meta";
  meta.textContent = `${entry.sender_name} · ${entry.created_at} · expires ${entry.expiry}`;
  item.appendChild(meta);

  const body = doc.createElement("p");
  body.className = "entry-body";
  body.textContent = entry.body;
  item.appendChild(body);

  if (entry.details !== "") {
    const details = doc.createElement("p");
    details.className = "entry-details";
    details.textContent = entry.details;
    item.appendChild(details);
  }

  const buttons: Array<["open" | "unread" | "delete", string]> = [
    ["open", entry.read ? "open" : "open/read"],
    ["unread", "mark unread"],
    ["delete", "delete"],
  ];
  for (const [action, label] of buttons) {
    const button = doc.createElement("button");
    button.textContent = label;
    button.dataset["action"] = action;
    button.addEventListener("click", () => {
      if (action === "open") void actions.markRead(entry.id);
      else if (action === "unread") void actions.markUnread(entry.id);
      else void actions.remove(entry.id);
    });
    item.appendChild(button);
  }
  return item;
}

/**
 * Renders payloads into a container element.  Entries appear exactly in
 * payload order; the server already sorted them.
 */
export class DomDisplayView implements DisplayView {
  protected readonly doc: Document;
  protected readonly root: HTMLElement;

  constructor(doc: Document, root: HTMLElement) {
    this.doc = doc;
    this.root = root;
  }

  private header(
    payload: DisplayPayloadWire,
    actions: EntryActions,
  ): HTMLElement {
    const head = this.doc.createElement("div");
    head.className = "display-head";
    const who = this.doc.createElement("span");
    who.id = "display-student";
    who.textContent =
      payload.display_name !== "" ? payload.display_name : "(unknown tag)";
    head.appendChild(who);
    const close = this.doc.createElement("button");
    close.id = "display-close";
    close.textContent = "close";
    close.addEventListener("click", () => actions.close());
    head.appendChild(close);
    return head;
  }

  renderPayload(payload: DisplayPayloadWire, actions: EntryActions): void {
    this.root.textContent = "";
    this.root.appendChild(this.header(payload, actions));
    const list = this.doc.createElement("ul");
    list.id = "display-entries";
    for (const entry of payload.entries) {
      list.appendChild(entryNode(this.doc, entry, actions));
    }
    this.root.appendChild(list);
  }

  renderEmpty(payload: DisplayPayloadWire, actions: EntryActions): void {
    this.root.textContent = "";
    this.root.appendChild(this.header(payload, actions));
    const note = this.doc.createElement("p");
    note.id = "display-empty";
    note.textContent = "no notifications";
    this.root.appendChild(note);
  }

  renderError(message: string): void {
    this.root.textContent = "";
    const note = this.doc.createElement("p");
    note.className = "banner-error";
    note.textContent = message;
    this.root.appendChild(note);
  }

  closed(): void {
    this.root.textContent = "";
  }
}
