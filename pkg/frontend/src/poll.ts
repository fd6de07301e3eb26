// Shared-session polling: conditional GETs every 2 seconds, paused while a
// local mutation is in flight, exponential backoff capped at 8s on failures.

export const POLL_INTERVAL_MS = 2000;
export const OFFLINE_AFTER_FAILURES = 3;

export function nextPollDelay(consecutiveFailures: number): number {
  if (consecutiveFailures <= 0) return POLL_INTERVAL_MS;
  const factor = Math.min(consecutiveFailures, 2); // 2s -> 4s -> 8s cap
  return POLL_INTERVAL_MS * Math.pow(2, factor);
}

export interface PollCallbacks {
  /** Fetch session state; resolve with the new version or null for 304. */
  fetchVersion: () => Promise<number | null>;
  onNewer: () => void;
  onOffline: (offline: boolean) => void;
  isPaused: () => boolean;
  lastSeen: () => number;
}

export class SessionPoller {
  private timer: ReturnType<typeof setTimeout> | null = null;
  private failures = 0;
  private stopped = false;

  constructor(private callbacks: PollCallbacks) {}

  start(): void {
    this.stopped = false;
    this.schedule(POLL_INTERVAL_MS);
  }

  stop(): void {
    this.stopped = true;
    if (this.timer !== null) clearTimeout(this.timer);
  }

  private schedule(delay: number): void {
    if (this.stopped) return;
    this.timer = setTimeout(() => void this.tick(), delay);
  }

  private async tick(): Promise<void> {
    if (this.stopped) return;
    if (this.callbacks.isPaused()) {
      this.schedule(POLL_INTERVAL_MS);
      return;
    }
    try {
      const version = await this.callbacks.fetchVersion();
      this.failures = 0;
      this.callbacks.onOffline(false);
      if (version !== null && version > this.callbacks.lastSeen()) {
        this.callbacks.onNewer();
      }
    } catch {
      this.failures += 1;
      if (this.failures >= OFFLINE_AFTER_FAILURES) {
        this.callbacks.onOffline(true);
      }
    }
    this.schedule(nextPollDelay(this.failures));
  }
}
