/**
 * Pluggable line transports. The backend speaks newline-delimited JSON on
 * a local TCP socket; in Node (tests, tooling) we connect directly, in a
 * browser the same session logic runs over a WebSocket-to-TCP bridge
 * (e.g. websockify) pointed at the serve endpoint.
 */

export interface TransportHandlers {
  onLine(line: string): void;
  onClose(error?: Error): void;
}

export interface Transport {
  send(line: string): void;
  close(): void;
}

export type TransportFactory = (handlers: TransportHandlers) => Promise<Transport>;

/** Direct TCP connection (Node only). */
export function tcpTransport(host: string, port: number): TransportFactory {
  return async (handlers) => {
    const net = await import("node:net");
    const socket = net.createConnection({ host, port });
    let buffer = "";
    let closed = false;
    socket.setEncoding("utf-8");
    socket.on("data", (chunk: string) => {
      buffer += chunk;
      let index;
      while ((index = buffer.indexOf("\n")) >= 0) {
        const line = buffer.slice(0, index);
        buffer = buffer.slice(index + 1);
        handlers.onLine(line);
      }
    });
    const finish = (error?: Error) => {
      if (!closed) {
        closed = true;
        handlers.onClose(error);
      }
    };
    socket.on("error", (error: Error) => finish(error));
    socket.on("close", () => finish());
    await new Promise<void>((resolve, reject) => {
      socket.once("connect", () => resolve());
      socket.once("error", reject);
    });
    return {
      send: (line) => socket.write(line),
      close: () => socket.destroy(),
    };
  };
}

/** Browser transport via a WebSocket bridge carrying the same lines. */
export function webSocketTransport(url: string): TransportFactory {
  return async (handlers) => {
    const ws = new WebSocket(url);
    let buffer = "";
    ws.onmessage = (event) => {
      buffer += String(event.data);
      let index;
      while ((index = buffer.indexOf("\n")) >= 0) {
        handlers.onLine(buffer.slice(0, index));
        buffer = buffer.slice(index + 1);
      }
    };
    ws.onclose = () => handlers.onClose();
    ws.onerror = () => handlers.onClose(new Error("websocket error"));
    await new Promise<void>((resolve, reject) => {
      ws.onopen = () => resolve();
      ws.onerror = () => reject(new Error("websocket connect failed"));
    });
    return {
      send: (line) => ws.send(line),
      close: () => ws.close(),
    };
  };
}
