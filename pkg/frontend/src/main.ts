// Page bootstrap: wires the static markup in index.html to the controllers.
// Query parameters: ?server=http://host:port — ?reader=R-LIB-1 — ?poll=3000

import { ApiClient } from "./api.js";
import { DomPostForm, PostFormController } from "./postForm.js";
import { DEFAULT_POLL_INTERVAL_MS, DomKioskView, KioskController } from "./kiosk.js";

function fillSelect(
  select: HTMLSelectElement,
  values: Array<string | number>,
  selected?: string,
): void {
  for (const value of values) {
    const option = document.createElement("option");
    option.value = String(value);
    option.textContent = String(value);
    if (selected !== undefined && option.value === selected) {
      option.selected = true;
    }
    select.appendChild(option);
  }
}

function byId<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
}

export function boot(): void {
  const params = new URLSearchParams(window.location.search);
  const serverUrl =
    params.get("server") ?? `http://${window.location.hostname || "127.0.0.1"}:8080`;
  const api = new ApiClient(serverUrl);
  byId<HTMLElement>("server-url").textContent = serverUrl;

  const hours = Array.from({ length: 12 }, (_, i) => i + 1);
  const minutes = Array.from({ length: 60 }, (_, i) => i);
  fillSelect(byId<HTMLSelectElement>("post-expiry-hour"), hours, "12");
  fillSelect(byId<HTMLSelectElement>("post-expiry-minute"), minutes, "0");

  const form = new DomPostForm(document, new PostFormController(api));
  form.attach();

  const kioskRoot = byId<HTMLElement>("kiosk-screen");
  const view = new DomKioskView(document, kioskRoot);
  let kiosk: KioskController | null = null;

  byId<HTMLButtonElement>("kiosk-attach").addEventListener("click", () => {
    const readerId = byId<HTMLInputElement>("kiosk-reader").value.trim();
    const pollRaw = params.get("poll");
    const poll = pollRaw !== null ? Number(pollRaw) : DEFAULT_POLL_INTERVAL_MS;
    kiosk?.stop();
    kiosk = new KioskController(api, view, readerId, poll);
    void kiosk.start();
  });

  byId<HTMLButtonElement>("kiosk-scan").addEventListener("click", () => {
    const tag = byId<HTMLInputElement>("kiosk-tag").value;
    void kiosk?.scan(tag);
  });

  const presetReader = params.get("reader");
  if (presetReader !== null) {
    byId<HTMLInputElement>("kiosk-reader").value = presetReader;
    byId<HTMLButtonElement>("kiosk-attach").click();
  }
}

// Skip auto-boot under tests, which import modules without the page markup.
if (typeof document !== "undefined" && document.getElementById("post-submit")) {
  boot();
}
