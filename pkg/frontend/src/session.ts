// Client-side session state. All execution authority stays on the server:
// this model only sends queries and relays the user's replies to prompts,
// and renders whatever arrives, in arrival order.

import type { Connection } from "./connection.js";
import {
  ControlMessage,
  FrameDecoder,
  FrameType,
  encodeControl,
  encodeFrame,
} from "./protocol.js";

export type ConnectionStatus = "connecting" | "connected" | "closed" | "error";

export interface TranscriptRow {
  id: string;
  query: string;
  response?: string;
  partial?: boolean;
  pending: boolean;
}

export interface PendingPrompt {
  id: string;
  kind: "confirm" | "clarify";
  text: string;
  tool?: string;
}

export interface TraceRow {
  kind: string;
  turn: string;
  name?: string;
  detail: string;
}

export interface ToolInfo {
  name: string;
  description: string;
  side_effecting: boolean;
}

export interface SessionView {
  status: ConnectionStatus;
  sessionId: string | null;
  tools: ToolInfo[];
  transcript: TranscriptRow[];
  prompts: PendingPrompt[];
  trace: TraceRow[];
  boardFen: string | null;
  notices: string[];
  halted: boolean;
}

export class Session {
  readonly view: SessionView = {
    status: "connecting",
    sessionId: null,
    tools: [],
    transcript: [],
    prompts: [],
    trace: [],
    boardFen: null,
    notices: [],
    halted: false,
  };

  /** Every control message, in arrival order (kept for trace inspection). */
  readonly received: ControlMessage[] = [];

  private decoder = new FrameDecoder();
  private listeners: Array<() => void> = [];
  private queryCounter = 0;

  constructor(private conn: Connection) {
    conn.onData((data) => {
      for (const frame of this.decoder.feed(data)) {
        if (frame.type === FrameType.Control) {
          this.handleControl(JSON.parse(new TextDecoder().decode(frame.payload)));
        }
        // audio frames carry synthesized speech; the console does not play it
      }
      this.emit();
    });
    conn.onClose(() => {
      this.view.status = "closed";
      this.emit();
    });
    conn.onError(() => {
      this.view.status = "error";
      this.emit();
    });
  }

  onChange(cb: () => void): void {
    this.listeners.push(cb);
  }

  private emit(): void {
    for (const cb of this.listeners) cb();
  }

  /** Open the session: the server greets with tools_list. */
  hello(): void {
    this.conn.send(encodeControl({ kind: "tools_list", id: "hello" }));
  }

  get queryBlocked(): boolean {
    return this.view.prompts.length > 0;
  }

  submitQuery(text: string): string {
    const trimmed = text.trim();
    if (!trimmed) throw new Error("empty query");
    if (this.view.status !== "connected") throw new Error("not connected");
    if (this.queryBlocked) {
      throw new Error("a prompt is pending; reply to it first");
    }
    this.queryCounter += 1;
    const id = `q${this.queryCounter}`;
    this.view.transcript.push({ id, query: trimmed, pending: true });
    this.conn.send(encodeControl({ kind: "query", id, text: trimmed }));
    this.emit();
    return id;
  }

  respondPrompt(promptId: string, choice: string): void {
    const index = this.view.prompts.findIndex((p) => p.id === promptId);
    if (index < 0) {
      this.view.notices.push(`stale prompt ${promptId} ignored`);
      this.emit();
      return;
    }
    const prompt = this.view.prompts[index]!;
    const kind = prompt.kind === "confirm" ? "confirm_reply" : "clarify_reply";
    this.conn.send(encodeControl({ kind, id: prompt.id, reply: choice }));
    this.view.prompts.splice(index, 1);
    this.emit();
  }

  /** Stream raw PCM16 mono samples as one audio frame. */
  sendAudio(samples: Int16Array): void {
    const bytes = new Uint8Array(samples.buffer.slice(0), samples.byteOffset, samples.byteLength);
    this.conn.send(encodeFrame({ type: FrameType.Audio, payload: bytes }));
  }

  close(): void {
    this.conn.close();
  }

  private handleControl(message: ControlMessage): void {
    this.received.push(message);
    switch (message.kind) {
      case "tools_list": {
        this.view.status = "connected";
        this.view.sessionId = (message.session as string) ?? null;
        this.view.tools = (message.tools as ToolInfo[]) ?? [];
        break;
      }
      case "response": {
        const row = this.view.transcript.find((r) => r.id === message.id);
        const text = String(message.text ?? "");
        if (row) {
          row.response = text;
          row.partial = Boolean(message.partial);
          row.pending = false;
        } else {
          this.view.transcript.push({
            id: message.id,
            query: "(voice)",
            response: text,
            partial: Boolean(message.partial),
            pending: false,
          });
        }
        this.view.trace.push({
          kind: "response",
          turn: message.id,
          detail: text,
        });
        break;
      }
      case "transcript": {
        this.view.transcript.push({
          id: message.id,
          query: String(message.text ?? ""),
          pending: true,
        });
        break;
      }
      case "confirm_request": {
        this.view.prompts.push({
          id: message.id,
          kind: "confirm",
          text: String(message.prompt ?? ""),
          tool: message.tool as string | undefined,
        });
        break;
      }
      case "clarify_question": {
        this.view.prompts.push({
          id: message.id,
          kind: "clarify",
          text: String(message.question ?? ""),
        });
        break;
      }
      case "tool_call": {
        this.view.trace.push({
          kind: "tool_call",
          turn: String(message.turn ?? message.id),
          name: message.name as string,
          detail: JSON.stringify(message.arguments ?? {}),
        });
        break;
      }
      case "tool_result": {
        this.view.trace.push({
          kind: "tool_result",
          turn: String(message.turn ?? message.id),
          name: message.name as string,
          detail: `${message.status}${message.error_detail ? `: ${message.error_detail}` : ""}`,
        });
        const payload = message.payload as { fen?: unknown } | null | undefined;
        if (payload && typeof payload === "object" && typeof payload.fen === "string") {
          this.view.boardFen = payload.fen;
        }
        break;
      }
      case "halt": {
        this.view.halted = true;
        this.view.trace.push({ kind: "halt", turn: message.id, detail: "playback halted" });
        break;
      }
      case "error": {
        this.view.notices.push(String(message.message ?? "server error"));
        this.view.trace.push({
          kind: "error",
          turn: message.id,
          detail: String(message.message ?? ""),
        });
        break;
      }
      default:
        break;
    }
  }
}
