// Transport carriers. The browser path wraps each outgoing frame in one
// WebSocket binary message; inbound binary data is fed to the same frame
// decoder either way, because the byte format is identical on both carriers.

export interface Connection {
  send(data: Uint8Array): void;
  onData(cb: (data: Uint8Array) => void): void;
  onClose(cb: () => void): void;
  onError(cb: (err: unknown) => void): void;
  close(): void;
}

export class WsConnection implements Connection {
  private socket: WebSocket;
  private dataCb: (data: Uint8Array) => void = () => {};
  private closeCb: () => void = () => {};
  private errorCb: (err: unknown) => void = () => {};

  constructor(url: string) {
    this.socket = new WebSocket(url);
    this.socket.binaryType = "arraybuffer";
    this.socket.onmessage = (event) => {
      if (event.data instanceof ArrayBuffer) {
        this.dataCb(new Uint8Array(event.data));
      }
    };
    this.socket.onclose = () => this.closeCb();
    this.socket.onerror = (err) => this.errorCb(err);
  }

  ready(): Promise<void> {
    if (this.socket.readyState === WebSocket.OPEN) return Promise.resolve();
    return new Promise((resolve, reject) => {
      this.socket.addEventListener("open", () => resolve(), { once: true });
      this.socket.addEventListener("error", (e) => reject(e), { once: true });
    });
  }

  send(data: Uint8Array): void {
    this.socket.send(data);
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
    this.socket.close();
  }
}
