/**
 * Single-lane execution queue with a bounded backlog.
 *
 * Model inference runs one request at a time (a single-device deployment
 * cannot parallelize the model anyway); requests beyond the backlog are
 * rejected so the client's 503 retry path engages instead of piling up.
 */

export class QueueFullError extends Error {}

export class RequestQueue {
  private inflight = 0;
  private waiting: Array<() => void> = [];

  constructor(private capacity: number) {}

  get backlog(): number {
    return this.waiting.length;
  }

  async run<T>(task: () => Promise<T>): Promise<T> {
    if (this.inflight > 0 && this.waiting.length >= this.capacity) {
      throw new QueueFullError("backlog full");
    }
    if (this.inflight > 0) {
      await new Promise<void>((resolve) => this.waiting.push(resolve));
    }
    this.inflight += 1;
    try {
      return await task();
    } finally {
      this.inflight -= 1;
      const next = this.waiting.shift();
      if (next) next();
    }
  }
}
