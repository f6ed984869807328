// DOM wiring for the operator console. One session per page; everything
// renders from the SessionView snapshot on every change.

import { PushToTalk, chunked, parseWavPcm16 } from "./audio.js";
import { parseFen, pieceGlyph } from "./board.js";
import { WsConnection } from "./connection.js";
import { Session } from "./session.js";

let session: Session | null = null;
let talk: PushToTalk | null = null;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

function render(): void {
  if (!session) return;
  const view = session.view;

  const status = el<HTMLSpanElement>("status");
  status.textContent = view.sessionId
    ? `${view.status} (${view.sessionId})`
    : view.status;
  status.className = `status ${view.status}`;

  el<HTMLSpanElement>("tools").textContent = view.tools
    .map((t) => (t.side_effecting ? `${t.name}!` : t.name))
    .join("  ");

  const transcript = el<HTMLDivElement>("transcript");
  transcript.innerHTML = "";
  for (const row of view.transcript) {
    const user = document.createElement("div");
    user.className = "query";
    user.textContent = `> ${row.query}`;
    transcript.appendChild(user);
    if (row.response !== undefined) {
      const bot = document.createElement("div");
      bot.className = row.partial ? "reply partial" : "reply";
      bot.textContent = (row.partial ? "[partial] " : "") + row.response;
      transcript.appendChild(bot);
    } else if (row.pending) {
      const wait = document.createElement("div");
      wait.className = "reply pending";
      wait.textContent = "...";
      transcript.appendChild(wait);
    }
  }
  transcript.scrollTop = transcript.scrollHeight;

  const prompts = el<HTMLDivElement>("prompts");
  prompts.innerHTML = "";
  for (const prompt of view.prompts) {
    const box = document.createElement("div");
    box.className = "prompt";
    const text = document.createElement("div");
    text.textContent = `${prompt.kind === "confirm" ? "Confirm" : "Clarify"}: ${prompt.text}`;
    box.appendChild(text);
    if (prompt.kind === "confirm") {
      for (const choice of ["yes", "no"]) {
        const button = document.createElement("button");
        button.textContent = choice;
        button.onclick = () => session!.respondPrompt(prompt.id, choice);
        box.appendChild(button);
      }
    } else {
      const reply = document.createElement("input");
      reply.placeholder = "your answer";
      const send = document.createElement("button");
      send.textContent = "reply";
      send.onclick = () => {
        if (reply.value.trim()) session!.respondPrompt(prompt.id, reply.value);
      };
      box.appendChild(reply);
      box.appendChild(send);
    }
    prompts.appendChild(box);
  }

  const input = el<HTMLInputElement>("query");
  const sendButton = el<HTMLButtonElement>("send");
  const blocked = view.status !== "connected" || session.queryBlocked;
  input.disabled = blocked;
  sendButton.disabled = blocked || !input.value.trim();
  el<HTMLSpanElement>("input-hint").textContent = session.queryBlocked
    ? "reply to the pending prompt first"
    : "";

  const trace = el<HTMLTableSectionElement>("trace-body");
  trace.innerHTML = "";
  for (const row of view.trace) {
    const tr = document.createElement("tr");
    for (const cell of [row.turn, row.kind, row.name ?? "", row.detail]) {
      const td = document.createElement("td");
      td.textContent = cell;
      tr.appendChild(td);
    }
    trace.appendChild(tr);
  }

  const board = el<HTMLDivElement>("board");
  board.innerHTML = "";
  if (view.boardFen) {
    try {
      const model = parseFen(view.boardFen);
      model.ranks.forEach((rank, r) => {
        rank.forEach((piece, c) => {
          const cell = document.createElement("div");
          cell.className = (r + c) % 2 === 0 ? "sq light" : "sq dark";
          cell.textContent = piece ? pieceGlyph(piece) : "";
          board.appendChild(cell);
        });
      });
      el<HTMLDivElement>("board-fen").textContent = view.boardFen;
    } catch (err) {
      el<HTMLDivElement>("board-fen").textContent = `bad FEN: ${err}`;
    }
  }

  el<HTMLDivElement>("notices").textContent = view.notices.slice(-3).join(" | ");
}

function connect(): void {
  const address = el<HTMLInputElement>("address").value.trim();
  session?.close();
  const conn = new WsConnection(`ws://${address}/`);
  session = new Session(conn);
  session.onChange(render);
  void conn.ready().then(() => session!.hello());
  render();
}

export function boot(): void {
  el<HTMLButtonElement>("connect").onclick = connect;
  el<HTMLButtonElement>("send").onclick = () => {
    const input = el<HTMLInputElement>("query");
    if (session && input.value.trim()) {
      session.submitQuery(input.value);
      input.value = "";
    }
  };
  el<HTMLInputElement>("query").addEventListener("keydown", (event) => {
    if (event.key === "Enter" && session && !session.queryBlocked) {
      const input = el<HTMLInputElement>("query");
      if (input.value.trim()) {
        session.submitQuery(input.value);
        input.value = "";
      }
    }
  });
  el<HTMLInputElement>("query").addEventListener("input", render);

  const talkButton = el<HTMLButtonElement>("talk");
  talkButton.onmousedown = () => {
    if (!session) return;
    talk = new PushToTalk((chunk) => session!.sendAudio(chunk));
    void talk.start();
    talkButton.classList.add("live");
  };
  talkButton.onmouseup = () => {
    talk?.stop();
    talk = null;
    talkButton.classList.remove("live");
  };

  el<HTMLInputElement>("wav").addEventListener("change", async (event) => {
    const file = (event.target as HTMLInputElement).files?.[0];
    if (!file || !session) return;
    const wav = parseWavPcm16(new Uint8Array(await file.arrayBuffer()));
    for (const piece of chunked(wav.samples)) {
      session.sendAudio(piece.slice());
    }
  });
}

boot();
