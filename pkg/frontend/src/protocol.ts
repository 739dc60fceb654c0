/**
 * Wire protocol client: length-prefixed, newline-delimited JSON frames.
 * Mirrors docs/protocol.md in the engine repository.
 */

export const PROTOCOL_VERSION = 1;

export type FrameKind =
  | 'hello'
  | 'state-sync'
  | 'event'
  | 'suggestion-push'
  | 'apply-suggestion'
  | 'chat-send'
  | 'chat-response'
  | 'capture-request'
  | 'capture-result'
  | 'trace-request'
  | 'trace-result'
  | 'error';

export interface Frame {
  kind: FrameKind;
  seq: number;
  body: Record<string, unknown>;
}

export interface CellValue {
  t: 'text' | 'number' | 'boolean' | 'date' | 'image-ref' | 'missing';
  v?: string | number | boolean;
}

export interface ColumnSpec {
  name: string;
  type: string;
}

export interface TableJson {
  kind: 'table';
  id: string;
  name: string;
  columns: ColumnSpec[];
  rows: CellValue[][];
}

export interface VisualizationJson {
  kind: 'visualization';
  id: string;
  name: string;
  source_instance_id: string;
  chart_type: string;
  encodings: [string, string][];
  interactions: string[];
  valid: boolean;
}

export type InstanceJson = TableJson | VisualizationJson;

export interface SuggestionJson {
  id: string;
  scope: 'micro' | 'macro';
  trigger_rule: string;
  description: string;
  plan: { steps: unknown[]; rendered_steps: string[] };
  confidence: number;
  base_version: number;
  modality: 'in-situ' | 'peripheral';
  status: string;
  ghost_diff?: GhostDiffJson;
  needs_navigation?: boolean;
}

export interface GhostDiffJson {
  instance_id: string;
  added_rows?: CellValue[][];
  start_row?: number;
  column?: string;
  cells?: Record<string, CellValue>;
  headers?: Record<string, string>;
  match_count?: number;
  [key: string]: unknown;
}

/** Anything that can carry encoded frame bytes to the engine. */
export interface Transport {
  send(data: Uint8Array): void;
  onReceive(handler: (data: Uint8Array) => void): void;
}

const encoder = new TextEncoder();
const decoder = new TextDecoder();

export function encodeFrame(frame: Frame): Uint8Array {
  const payload = encoder.encode(JSON.stringify(frame));
  const header = encoder.encode(`${payload.length}\n`);
  const out = new Uint8Array(header.length + payload.length + 1);
  out.set(header, 0);
  out.set(payload, header.length);
  out[out.length - 1] = 0x0a;
  return out;
}

/** Incremental frame decoder; feed() returns every completed frame. */
export class FrameDecoder {
  private buffer = new Uint8Array(0);

  feed(data: Uint8Array): Frame[] {
    const merged = new Uint8Array(this.buffer.length + data.length);
    merged.set(this.buffer, 0);
    merged.set(data, this.buffer.length);
    this.buffer = merged;
    const frames: Frame[] = [];
    for (;;) {
      const newline = this.buffer.indexOf(0x0a);
      if (newline < 0) break;
      const length = parseInt(decoder.decode(this.buffer.subarray(0, newline)), 10);
      if (Number.isNaN(length) || length < 0) {
        throw new Error('bad frame header');
      }
      const end = newline + 1 + length;
      if (this.buffer.length < end + 1) break;
      const payload = this.buffer.subarray(newline + 1, end);
      frames.push(JSON.parse(decoder.decode(payload)) as Frame);
      this.buffer = this.buffer.subarray(end + 1);
    }
    return frames;
  }
}

export interface PendingReply {
  resolve(frame: Frame): void;
}

/**
 * Request/response client. The engine answers each request with exactly one
 * frame; suggestion pushes interleave and are surfaced through a handler.
 */
export class ProtocolClient {
  private seq = 0;
  private decoder = new FrameDecoder();
  private pending: PendingReply[] = [];
  private pushHandlers: Array<(frame: Frame) => void> = [];
  readonly sent: Frame[] = [];

  constructor(private transport: Transport) {
    transport.onReceive((data) => this.receive(data));
  }

  onPush(handler: (frame: Frame) => void): void {
    this.pushHandlers.push(handler);
  }

  private receive(data: Uint8Array): void {
    for (const frame of this.decoder.feed(data)) {
      if (frame.kind === 'suggestion-push') {
        for (const handler of this.pushHandlers) handler(frame);
        continue;
      }
      const waiter = this.pending.shift();
      if (waiter) waiter.resolve(frame);
    }
  }

  request(kind: FrameKind, body: Record<string, unknown>): Promise<Frame> {
    this.seq += 1;
    const frame: Frame = { kind, seq: this.seq, body };
    this.sent.push(frame);
    const reply = new Promise<Frame>((resolve) => {
      this.pending.push({ resolve });
    });
    this.transport.send(encodeFrame(frame));
    return reply;
  }

  hello(): Promise<Frame> {
    return this.request('hello', { protocol_version: PROTOCOL_VERSION });
  }
}
