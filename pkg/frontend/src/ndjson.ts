/** Newline-delimited JSON plumbing for the live record stream. */

/** Reassembles complete lines from arbitrary chunk boundaries. */
export class LineBuffer {
  private pending = "";

  push(chunk: string): string[] {
    this.pending += chunk;
    const lines: string[] = [];
    let idx: number;
    while ((idx = this.pending.indexOf("\n")) >= 0) {
      lines.push(this.pending.slice(0, idx));
      this.pending = this.pending.slice(idx + 1);
    }
    return lines;
  }

  /** Whatever trails the final newline (a partial line, or ""). */
  tail(): string {
    return this.pending;
  }
}

/**
 * Yields one parsed object per non-blank line.  Blank lines are the
 * server's keepalives; malformed lines are skipped rather than fatal,
 * since a live console should survive a torn write on teardown.
 */
export async function* ndjson<T>(
  stream: ReadableStream<Uint8Array>,
): AsyncGenerator<T> {
  const reader = stream.getReader();
  const decoder = new TextDecoder();
  const buffer = new LineBuffer();
  try {
    while (true) {
      const { value, done } = await reader.read();
      if (done) break;
      for (const line of buffer.push(decoder.decode(value, { stream: true }))) {
        const parsed = parseLine<T>(line);
        if (parsed !== undefined) yield parsed;
      }
    }
    const tail = parseLine<T>(buffer.tail());
    if (tail !== undefined) yield tail;
  } finally {
    reader.releaseLock();
  }
}

function parseLine<T>(line: string): T | undefined {
  const trimmed = line.trim();
  if (!trimmed) return undefined;
  try {
    return JSON.parse(trimmed) as T;
  } catch {
    return undefined;
  }
}
