// Cell connectivity: the WebSocket bus leg and the operator-side /generate
// endpoint. The panel never builds program text itself; one source of truth
// for the grammar lives on the operator service.

import { BusMessage, Command, JobForm, CapturePayloadData, parseBusMessage } from "./protocol.js";

export interface GeneratedProgram {
  program_name: string;
  program_text: string;
}

export class CellClient {
  private ws: WebSocket | null = null;
  private msgId = 0;
  private listeners: Array<(msg: BusMessage, raw: string) => void> = [];

  constructor(
    readonly wsUrl: string,
    readonly topic: string,
  ) {}

  connect(): Promise<void> {
    return new Promise((resolve, reject) => {
      const ws = new WebSocket(this.wsUrl);
      this.ws = ws;
      ws.onerror = () => reject(new Error(`cannot reach ${this.wsUrl}`));
      ws.onopen = () => {
        ws.send(JSON.stringify({ subscribe: this.topic }));
      };
      ws.onmessage = (ev) => {
        const raw = typeof ev.data === "string" ? ev.data : "";
        let ack: unknown;
        try {
          ack = JSON.parse(raw);
        } catch {
          return;
        }
        if (
          typeof ack === "object" &&
          ack !== null &&
          (ack as Record<string, unknown>)["subscribed"] === this.topic
        ) {
          ws.onmessage = (event) => this.dispatch(event);
          resolve();
          return;
        }
      };
      ws.onclose = () => reject(new Error("bus connection closed"));
    });
  }

  private dispatch(ev: MessageEvent): void {
    const raw = typeof ev.data === "string" ? ev.data : "";
    const msg = parseBusMessage(raw);
    if (msg === null || msg.topic !== this.topic) return;
    for (const listener of this.listeners) listener(msg, raw);
  }

  onMessage(listener: (msg: BusMessage, raw: string) => void): void {
    this.listeners.push(listener);
  }

  publish(command: Command, payload: Record<string, unknown> = {}): void {
    if (this.ws === null || this.ws.readyState !== WebSocket.OPEN) {
      throw new Error("bus is not connected");
    }
    const msg: BusMessage = {
      topic: this.topic,
      command,
      payload,
      msg_id: ++this.msgId,
      timestamp: Date.now(),
    };
    this.ws.send(JSON.stringify(msg));
  }

  close(): void {
    this.ws?.close();
  }
}

export async function generateProgram(
  baseUrl: string,
  choices: JobForm,
  capture: CapturePayloadData,
): Promise<GeneratedProgram> {
  const resp = await fetch(`${baseUrl}/generate`, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify({ choices, capture }),
  });
  const body = (await resp.json()) as Record<string, unknown>;
  if (!resp.ok) {
    const code = String(body["code"] ?? resp.status);
    throw new Error(`${code}: ${String(body["error"] ?? "generate failed")}`);
  }
  return body as unknown as GeneratedProgram;
}
