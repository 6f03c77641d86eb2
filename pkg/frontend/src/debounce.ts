// Latest-wins debouncer for drag-driven assess requests: at most one
// request in flight, the newest argument always wins, trailing edge fires
// after the quiet period.

export class LatestWins<T> {
  private pending: T | undefined;
  private timer: ReturnType<typeof setTimeout> | null = null;
  private inFlight = false;

  constructor(
    private delayMs: number,
    private run: (arg: T) => Promise<void>,
  ) {}

  push(arg: T): void {
    this.pending = arg;
    if (this.timer !== null) {
      clearTimeout(this.timer);
    }
    this.timer = setTimeout(() => {
      this.timer = null;
      void this.fire();
    }, this.delayMs);
  }

  /** Bypass the quiet period (e.g. on drag end). */
  flush(): void {
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
    void this.fire();
  }

  private async fire(): Promise<void> {
    if (this.inFlight || this.pending === undefined) {
      return;
    }
    const arg = this.pending;
    this.pending = undefined;
    this.inFlight = true;
    try {
      await this.run(arg);
    } finally {
      this.inFlight = false;
      if (this.pending !== undefined && this.timer === null) {
        // a newer argument arrived while the request was out
        void this.fire();
      }
    }
  }
}
