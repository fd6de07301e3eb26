import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { OFFLINE_AFTER_FAILURES, SessionPoller, nextPollDelay } from "../src/poll.js";

describe("poll backoff", () => {
  it("steps 2s, 4s, 8s and caps at 8s", () => {
    expect(nextPollDelay(0)).toBe(2000);
    expect(nextPollDelay(1)).toBe(4000);
    expect(nextPollDelay(2)).toBe(8000);
    expect(nextPollDelay(3)).toBe(8000);
    expect(nextPollDelay(10)).toBe(8000);
  });
});

describe("SessionPoller", () => {
  beforeEach(() => vi.useFakeTimers());
  afterEach(() => vi.useRealTimers());

  function harness(fetchVersion: () => Promise<number | null>) {
    const seen = { newer: 0, offline: [] as boolean[], paused: false, last: 1 };
    const poller = new SessionPoller({
      fetchVersion,
      onNewer: () => {
        seen.newer += 1;
      },
      onOffline: (o) => {
        seen.offline.push(o);
      },
      isPaused: () => seen.paused,
      lastSeen: () => seen.last,
    });
    return { poller, seen };
  }

  it("fires onNewer only for newer versions", async () => {
    let version = 1;
    const { poller, seen } = harness(() => Promise.resolve(version));
    poller.start();
    await vi.advanceTimersByTimeAsync(2000);
    expect(seen.newer).toBe(0); // same version: no re-render
    version = 2;
    await vi.advanceTimersByTimeAsync(2000);
    expect(seen.newer).toBe(1);
    poller.stop();
  });

  it("treats 304 (null) as unchanged", async () => {
    const { poller, seen } = harness(() => Promise.resolve(null));
    poller.start();
    await vi.advanceTimersByTimeAsync(6000);
    expect(seen.newer).toBe(0);
    poller.stop();
  });

  it("suspends while a mutation is pending", async () => {
    let calls = 0;
    const { poller, seen } = harness(() => {
      calls += 1;
      return Promise.resolve(null);
    });
    seen.paused = true;
    poller.start();
    await vi.advanceTimersByTimeAsync(10000);
    expect(calls).toBe(0);
    seen.paused = false;
    await vi.advanceTimersByTimeAsync(2000);
    expect(calls).toBe(1);
    poller.stop();
  });

  it("goes offline after three straight failures and recovers", async () => {
    let failing = true;
    const { poller, seen } = harness(() =>
      failing ? Promise.reject(new Error("down")) : Promise.resolve(null),
    );
    poller.start();
    // failures at 2s, then +4s, then +8s (backoff), third marks offline
    await vi.advanceTimersByTimeAsync(2000);
    await vi.advanceTimersByTimeAsync(4000);
    expect(seen.offline).not.toContain(true);
    await vi.advanceTimersByTimeAsync(8000);
    expect(seen.offline).toContain(true);
    expect(OFFLINE_AFTER_FAILURES).toBe(3);
    failing = false;
    await vi.advanceTimersByTimeAsync(8000);
    expect(seen.offline[seen.offline.length - 1]).toBe(false);
    poller.stop();
  });
});
