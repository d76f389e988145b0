/** Rate limiting for slider-driven requests: at most one call per
 * interval (leading edge fires immediately, a trailing call delivers
 * the final value), plus a sequence gate that drops stale responses. */

export function rateLimit<A extends unknown[]>(
  fn: (...args: A) => void,
  intervalMs: number,
): (...args: A) => void {
  let lastFire = -Infinity;
  let pending: ReturnType<typeof setTimeout> | null = null;
  let lastArgs: A;

  return (...args: A) => {
    lastArgs = args;
    const now = Date.now();
    if (now - lastFire >= intervalMs) {
      lastFire = now;
      fn(...args);
      return;
    }
    if (pending === null) {
      pending = setTimeout(() => {
        pending = null;
        lastFire = Date.now();
        fn(...lastArgs);
      }, intervalMs - (now - lastFire));
    }
  };
}

/** Monotone ticket dispenser: a response is applied only if it carries
 * the newest ticket (last write wins). */
export class SequenceGate {
  private issued = 0;

  issue(): number {
    return ++this.issued;
  }

  isCurrent(ticket: number): boolean {
    return ticket === this.issued;
  }
}
