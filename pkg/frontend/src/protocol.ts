// Bus message schema shared with the cell: one JSON object per WebSocket
// frame, {topic, command, payload, msg_id, timestamp}.

export type Command =
  | "InterfaceReady"
  | "HandlerRobotReady"
  | "Capture"
  | "AnswerCapture"
  | "ProgramUpload"
  | "FTP_OK"
  | "FTP_NO_OK"
  | "Welding"
  | "EndWelding"
  | "Pickup"
  | "Pickuped"
  | "ErrorReport";

export interface BusMessage {
  topic: string;
  command: Command;
  payload: Record<string, unknown>;
  msg_id: number;
  timestamp: number;
}

export interface PlaneData {
  normal: [number, number, number];
  d: number;
}

export interface SeamData {
  corner: [number, number, number];
  direction: [number, number, number];
  length_max: number;
  plane_pair: [number, number];
  orientation_class: "horizontal" | "vertical";
}

export interface CapturePayloadData {
  planes: PlaneData[];
  corner: [number, number, number];
  seams: SeamData[]; // [horizontal, vertical]
  cloud: number[][];
  capture_time: number;
}

export interface JobForm {
  structure: "L" | "U";
  length_h: number;
  length_v: number;
  weld_scheme: number;
  weave_scheme: number;
  simulate: boolean;
}

export function parseBusMessage(raw: string): BusMessage | null {
  let obj: unknown;
  try {
    obj = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof obj !== "object" || obj === null) return null;
  const m = obj as Partial<BusMessage>;
  if (typeof m.topic !== "string" || typeof m.command !== "string") return null;
  if (typeof m.payload !== "object" || m.payload === null) return null;
  return m as BusMessage;
}

export function capturePayloadFrom(msg: BusMessage): CapturePayloadData {
  return msg.payload as unknown as CapturePayloadData;
}
