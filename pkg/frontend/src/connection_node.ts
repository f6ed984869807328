// Raw framed-TCP carrier for Node (tests and headless tooling). Browsers
// use WsConnection instead; the frames on the wire are the same.
import * as net from "node:net";

import type { Connection } from "./connection.js";

export class TcpConnection implements Connection {
  private socket: net.Socket;
  private dataCb: (data: Uint8Array) => void = () => {};
  private closeCb: () => void = () => {};
  private errorCb: (err: unknown) => void = () => {};

  private constructor(socket: net.Socket) {
    this.socket = socket;
    socket.on("data", (chunk: Buffer) => this.dataCb(new Uint8Array(chunk)));
    socket.on("close", () => this.closeCb());
    socket.on("error", (err) => this.errorCb(err));
  }

  static connect(host: string, port: number, timeoutMs = 5000): Promise<TcpConnection> {
    return new Promise((resolve, reject) => {
      const socket = net.createConnection({ host, port });
      const timer = setTimeout(() => {
        socket.destroy();
        reject(new Error(`connect timeout to ${host}:${port}`));
      }, timeoutMs);
      socket.once("connect", () => {
        clearTimeout(timer);
        resolve(new TcpConnection(socket));
      });
      socket.once("error", (err) => {
        clearTimeout(timer);
        reject(err);
      });
    });
  }

  send(data: Uint8Array): void {
    this.socket.write(data);
  }

  onData(cb: (data: Uint8Array) => void): void {
    this.dataCb = cb;
  }

  onClose(cb: () => void): void {
    this.closeCb = cb;
  }

  onError(cb: (err: unknown) => void): void {
    this.errorCb = cb;
  }

  close(): void {
    this.socket.destroy();
  }
}
