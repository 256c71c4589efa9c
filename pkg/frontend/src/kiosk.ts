// Kiosk shell for a wall display attached to one reader.
//
// In production the RFID hardware posts detection events; the kiosk only
// renders.  Demo mode stands in for the hardware with a text box: entering a
// tag id asks the service for that student's feed at this reader.  After a
// scan the kiosk re-polls the feed on a timer, so notifications posted while
// the screen is up appear on the next tick without a reload.

import { ApiClient, ApiError } from "./api.js";
import {
  DisplayScreenController,
  DisplayView,
  DomDisplayView,
} from "./displayScreen.js";

export const DEFAULT_POLL_INTERVAL_MS = 3000;

export interface KioskView extends DisplayView {
  /** Reader id not registered with the service: a deployment mistake. */
  configurationError(message: string): void;
  /** No tag scanned yet. */
  idle(): void;
}

export class KioskController {
  private readonly api: ApiClient;
  private readonly view: KioskView;
  readonly readerId: string;
  readonly pollIntervalMs: number;
  private screen: DisplayScreenController | null = null;
  private timer: ReturnType<typeof setInterval> | null = null;
  private polling = false;

  constructor(
    api: ApiClient,
    view: KioskView,
    readerId: string,
    pollIntervalMs: number = DEFAULT_POLL_INTERVAL_MS,
  ) {
    this.api = api;
    this.view = view;
    this.readerId = readerId;
    this.pollIntervalMs = pollIntervalMs;
  }

  currentScreen(): DisplayScreenController | null {
    return this.screen;
  }

  /** Scan (or demo-type) a tag: fetch that student's feed and show it. */
  async scan(tagId: string): Promise<void> {
    const trimmed = tagId.trim();
    if (trimmed === "") return;
    let payload;
    try {
      payload = await this.api.feed(this.readerId, trimmed);
    } catch (err) {
      if (err instanceof ApiError && err.code === "unknown_reader") {
        this.view.configurationError(
          `reader "${this.readerId}" is not registered`,
        );
      } else {
        this.view.renderError(
          err instanceof Error ? err.message : String(err),
        );
      }
      return;
    }
    // The screen's close must also stop the kiosk polling for this tag, so
    // wrap the view and route closed() back through closeScreen().
    const screenView: DisplayView = {
      renderPayload: (p, a) => this.view.renderPayload(p, a),
      renderEmpty: (p, a) => this.view.renderEmpty(p, a),
      renderError: (m) => this.view.renderError(m),
      closed: () => this.closeScreen(),
    };
    this.screen = new DisplayScreenController(
      this.api,
      screenView,
      this.readerId,
      trimmed,
    );
    this.screen.show(payload);
  }

  private async tick(): Promise<void> {
    if (this.screen === null || this.polling) return;
    this.polling = true;
    try {
      await this.screen.refresh();
    } finally {
      this.polling = false;
    }
  }

  /**
   * Verify the reader is registered, then begin polling.  Resolves false
   * (after showing the configuration-error screen) when it is not.
   */
  async start(): Promise<boolean> {
    try {
      const readers = await this.api.listReaders();
      if (!readers.some((r) => r.reader_id === this.readerId)) {
        this.view.configurationError(
          `reader "${this.readerId}" is not registered`,
        );
        return false;
      }
    } catch (err) {
      this.view.configurationError(
        err instanceof Error ? err.message : String(err),
      );
      return false;
    }
    this.view.idle();
    this.timer = setInterval(() => void this.tick(), this.pollIntervalMs);
    return true;
  }

  stop(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }

  /** Close the current student's screen and fall back to the idle state. */
  closeScreen(): void {
    this.screen = null;
    this.view.idle();
  }
}

// ---------------------------------------------------------------------------
// DOM binding

export class DomKioskView extends DomDisplayView implements KioskView {
  configurationError(message: string): void {
    this.root.textContent = "";
    const box = this.doc.createElement("div");
    box.id = "kiosk-config-error";
    box.className = "banner-error";
    const head = this.doc.createElement("strong");
    head.textContent = "kiosk misconfigured";
    box.appendChild(head);
    const note = this.doc.createElement("p");
    note.textContent = message;
    box.appendChild(note);
    this.root.appendChild(box);
  }

  idle(): void {
    this.root.textContent = "";
    const note = this.doc.createElement("p");
    note.id = "kiosk-idle";
    note.textContent = "scan a tag to see notifications";
    this.root.appendChild(note);
  }

  override closed(): void {
    this.idle();
  }
}

