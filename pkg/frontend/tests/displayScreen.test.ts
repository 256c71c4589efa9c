import { describe, expect, it } from "vitest";

import { DisplayScreenController } from "../src/displayScreen.js";
import { FakeApi, RecordingView, apiError, entry, payload } from "./helpers.js";

function setup() {
  const api = new FakeApi();
  const view = new RecordingView();
  const controller = new DisplayScreenController(
    api.asClient(),
    view,
    "R-LIB-1",
    "1001",
  );
  return { api, view, controller };
}

describe("DisplayScreenController", () => {
  it("renders a handed-over payload without fetching", () => {
    const { api, view, controller } = setup();
    controller.show(payload([entry(2), entry(1)]));
    expect(api.calls).toHaveLength(0);
    expect(view.last().kind).toBe("payload");
    expect(view.last().payload?.entries.map((e) => e.id)).toEqual([2, 1]);
  });

  it("keeps entries in payload order, untouched", () => {
    const { view, controller } = setup();
    const entries = [entry(3), entry(1), entry(2)];
    controller.show(payload(entries));
    expect(view.last().payload?.entries).toEqual(entries);
  });

  it("renders the empty state when the feed has no entries", () => {
    const { view, controller } = setup();
    controller.show(payload([]));
    expect(view.last().kind).toBe("empty");
    expect(view.last().payload?.display_name).toBe("Aisha Rahman");
  });

  it("refresh fetches the feed for its reader and tag", async () => {
    const { api, view, controller } = setup();
    api.feeds = [payload([entry(5)])];
    await controller.refresh();
    expect(api.calls).toEqual([{ method: "feed", args: ["R-LIB-1", "1001"] }]);
    expect(view.last().payload?.entries.map((e) => e.id)).toEqual([5]);
  });

  it("marking read round-trips and re-renders from the fresh feed", async () => {
    const { api, view, controller } = setup();
    controller.show(payload([entry(5, { read: false })]));
    api.feeds = [payload([entry(5, { read: true })])];
    await controller.markRead(5);
    expect(api.calls.map((c) => c.method)).toEqual(["setReadState", "feed"]);
    expect(api.calls[0]?.args).toEqual(["1001", 5, "read"]);
    expect(view.last().payload?.entries[0]?.read).toBe(true);
  });

  it("marking unread sends the unread state", async () => {
    const { api, controller } = setup();
    api.feeds = [payload([entry(5, { read: false })])];
    await controller.markUnread(5);
    expect(api.calls[0]?.args).toEqual(["1001", 5, "unread"]);
  });

  it("deleting drops the entry on the re-render", async () => {
    const { api, view, controller } = setup();
    controller.show(payload([entry(5)]));
    api.feeds = [payload([])];
    await controller.remove(5);
    expect(api.calls[0]?.args).toEqual(["1001", 5, "deleted"]);
    expect(view.last().kind).toBe("empty");
  });

  it("a failed mutation shows the error and skips the refetch", async () => {
    const { api, view, controller } = setup();
    api.readStateError = apiError(404, "not_found", null, "no such notification");
    await controller.markRead(99);
    expect(view.last()).toMatchObject({
      kind: "error",
      message: "no such notification",
    });
    expect(api.calls.map((c) => c.method)).toEqual(["setReadState"]);
  });

  it("a failed refresh shows the error", async () => {
    const { api, view, controller } = setup();
    api.feedError = apiError(404, "unknown_reader", "reader_id", "no reader");
    await controller.refresh();
    expect(view.last()).toMatchObject({ kind: "error", message: "no reader" });
  });

  it("close clears the payload and notifies the view", () => {
    const { view, controller } = setup();
    controller.show(payload([entry(1)]));
    controller.close();
    expect(controller.current()).toBeNull();
    expect(view.last().kind).toBe("closed");
  });
});
