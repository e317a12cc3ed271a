// Operator session state machine, kept free of DOM so it is testable.
//
// Three-step flow: (1) choose the structure and capture, (2) inspect the
// rendered cloud and pick lengths/schemes, (3) send the program and give the
// weld order. Step 2 stays locked until an AnswerCapture arrives; the weld
// button stays locked until the robot acknowledged the program with FTP_OK.

import {
  BusMessage,
  CapturePayloadData,
  capturePayloadFrom,
} from "./protocol.js";

export type ConnectionState = "disconnected" | "connecting" | "ready";
export type Step = 1 | 2 | 3;

export class UiSession {
  connection: ConnectionState = "disconnected";
  step: Step = 1;
  capture: CapturePayloadData | null = null;
  programSent = false;
  weldReady = false; // FTP_OK received
  jobRunning = false;
  jobDone = false;
  lastError: string | null = null;
  readonly log: string[] = []; // append-only message log

  appendLog(line: string): void {
    this.log.push(line);
  }

  // every bus message lands here, verbatim, before state handling
  handleBusMessage(msg: BusMessage, raw: string): void {
    this.appendLog(raw);
    switch (msg.command) {
      case "HandlerRobotReady":
        this.connection = "ready";
        break;
      case "AnswerCapture":
        this.capture = capturePayloadFrom(msg);
        this.step = 2;
        this.programSent = false;
        this.weldReady = false;
        this.jobDone = false;
        this.lastError = null;
        break;
      case "FTP_OK":
        this.weldReady = true;
        this.step = 3;
        break;
      case "FTP_NO_OK":
        this.weldReady = false; // restart the transfer; weld stays locked
        this.lastError = "program transfer rejected";
        break;
      case "EndWelding":
        this.jobRunning = false;
        this.jobDone = true;
        break;
      case "Pickuped":
        this.resetForNextJob();
        break;
      case "ErrorReport": {
        const code = String(msg.payload["code"] ?? "Error");
        const detail = String(msg.payload["detail"] ?? "");
        this.lastError = `${code}: ${detail}`;
        this.jobRunning = false;
        break;
      }
      default:
        break; // operator-side echoes carry no state
    }
  }

  resetForNextJob(): void {
    this.step = 1;
    this.capture = null;
    this.programSent = false;
    this.weldReady = false;
    this.jobRunning = false;
  }

  // gating invariants used by the panel
  canCapture(): boolean {
    return this.connection === "ready" && !this.jobRunning;
  }

  canConfigure(): boolean {
    return this.capture !== null && this.step >= 2;
  }

  canSendProgram(): boolean {
    return this.canConfigure() && !this.jobRunning;
  }

  canWeld(): boolean {
    return this.weldReady && !this.jobRunning;
  }

  horizontalMax(): number {
    return this.capture?.seams[0]?.length_max ?? 0;
  }

  verticalMax(): number {
    return this.capture?.seams[1]?.length_max ?? 0;
  }
}
