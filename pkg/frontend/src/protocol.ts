// Wire protocol: 4-byte big-endian payload length, 1 frame-type byte,
// payload. Control and event payloads are UTF-8; control payloads are JSON
// objects carrying `kind` and a session-scoped `id`.

export const FrameType = {
  Control: 0x01,
  Audio: 0x02,
  Video: 0x03,
  Event: 0x04,
} as const;

export const MAX_PAYLOAD = 16 * 1024 * 1024;

export interface Frame {
  type: number;
  payload: Uint8Array;
}

export type ControlKind =
  | "query"
  | "response"
  | "confirm_request"
  | "confirm_reply"
  | "clarify_question"
  | "clarify_reply"
  | "tool_call"
  | "tool_result"
  | "transcript"
  | "halt"
  | "tools_list"
  | "error";

export interface ControlMessage {
  kind: ControlKind;
  id: string;
  [field: string]: unknown;
}

const KINDS: ReadonlySet<string> = new Set([
  "query",
  "response",
  "confirm_request",
  "confirm_reply",
  "clarify_question",
  "clarify_reply",
  "tool_call",
  "tool_result",
  "transcript",
  "halt",
  "tools_list",
  "error",
]);

const encoder = new TextEncoder();
const decoder = new TextDecoder();

export function encodeFrame(frame: Frame): Uint8Array {
  if (frame.payload.length > MAX_PAYLOAD) {
    throw new Error(`oversize frame: ${frame.payload.length} bytes`);
  }
  const out = new Uint8Array(5 + frame.payload.length);
  const view = new DataView(out.buffer);
  view.setUint32(0, frame.payload.length, false);
  out[4] = frame.type;
  out.set(frame.payload, 5);
  return out;
}

export function encodeControl(message: ControlMessage): Uint8Array {
  if (!KINDS.has(message.kind)) {
    throw new Error(`unknown control kind ${message.kind}`);
  }
  return encodeFrame({
    type: FrameType.Control,
    payload: encoder.encode(JSON.stringify(message)),
  });
}

export function decodeControl(frame: Frame): ControlMessage {
  if (frame.type !== FrameType.Control) {
    throw new Error(`not a control frame: type 0x${frame.type.toString(16)}`);
  }
  const message = JSON.parse(decoder.decode(frame.payload));
  if (typeof message !== "object" || message === null) {
    throw new Error("control payload is not an object");
  }
  if (!KINDS.has(message.kind) || !("id" in message)) {
    throw new Error(`bad control message: ${decoder.decode(frame.payload)}`);
  }
  return message as ControlMessage;
}

/** Incremental decoder for a byte stream carrying concatenated frames. */
export class FrameDecoder {
  private buffer = new Uint8Array(0);

  feed(data: Uint8Array): Frame[] {
    const merged = new Uint8Array(this.buffer.length + data.length);
    merged.set(this.buffer, 0);
    merged.set(data, this.buffer.length);
    this.buffer = merged;

    const frames: Frame[] = [];
    for (;;) {
      if (this.buffer.length < 5) return frames;
      const view = new DataView(
        this.buffer.buffer,
        this.buffer.byteOffset,
        this.buffer.byteLength,
      );
      const length = view.getUint32(0, false);
      if (length > MAX_PAYLOAD) {
        throw new Error(`oversize frame: declared ${length} bytes`);
      }
      const type = this.buffer[4]!;
      if (type < 0x01 || type > 0x04) {
        throw new Error(`unknown frame type 0x${type.toString(16)}`);
      }
      if (this.buffer.length < 5 + length) return frames;
      frames.push({ type, payload: this.buffer.slice(5, 5 + length) });
      this.buffer = this.buffer.slice(5 + length);
    }
  }
}
