// Panel wiring: DOM events in, bus messages out. All state decisions live in
// UiSession; all geometry and program text come from the cell.

import { CellClient, generateProgram } from "./client.js";
import { clampLength, mmToCmLabel, secondsLabel } from "./format.js";
import { JobForm } from "./protocol.js";
import { drawCloud, fitView, ViewParams } from "./render.js";
import { UiSession } from "./session.js";

const $ = <T extends HTMLElement>(id: string): T =>
  document.getElementById(id) as T;

const session = new UiSession();
let client: CellClient | null = null;
let view: ViewParams | null = null;

const canvas = $("cloud") as unknown as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;

function refresh(): void {
  $("status").textContent =
    session.lastError ??
    (session.connection === "ready"
      ? session.jobRunning
        ? "welding in progress"
        : session.jobDone
          ? "job finished"
          : `step ${session.step} of 3`
      : "connecting to the cell...");
  $("status").classList.toggle("error", session.lastError !== null);

  ($("capture") as HTMLButtonElement).disabled = !session.canCapture();
  for (const el of document.querySelectorAll<HTMLInputElement>(".step2")) {
    el.disabled = !session.canConfigure();
  }
  ($("send-program") as HTMLButtonElement).disabled = !session.canSendProgram();
  ($("weld") as HTMLButtonElement).disabled = !session.canWeld();

  if (session.capture !== null) {
    $("label-h").textContent = mmToCmLabel(session.horizontalMax());
    $("label-v").textContent = mmToCmLabel(session.verticalMax());
    $("capture-time").textContent = secondsLabel(session.capture.capture_time);
    const lh = $("length-h") as HTMLInputElement;
    const lv = $("length-v") as HTMLInputElement;
    lh.max = String(Math.floor(session.horizontalMax()));
    lv.max = String(Math.floor(session.verticalMax()));
    if (lh.value === "" || Number(lh.value) > Number(lh.max)) lh.value = lh.max;
    if (lv.value === "" || Number(lv.value) > Number(lv.max)) lv.value = lv.max;
  } else {
    $("label-h").textContent = "-";
    $("label-v").textContent = "-";
  }

  const logEl = $("log");
  logEl.textContent = session.log.join("\n");
  logEl.scrollTop = logEl.scrollHeight;
}

function redrawCloud(): void {
  if (session.capture === null || view === null) {
    ctx.clearRect(0, 0, canvas.width, canvas.height);
    return;
  }
  drawCloud(ctx, session.capture.cloud, view, canvas.width, canvas.height);
}

function currentForm(): JobForm {
  return {
    structure: ($("structure") as HTMLSelectElement).value as "L" | "U",
    length_h: clampLength(
      Number(($("length-h") as HTMLInputElement).value),
      session.horizontalMax(),
    ),
    length_v: clampLength(
      Number(($("length-v") as HTMLInputElement).value),
      session.verticalMax(),
    ),
    weld_scheme: Number(($("weld-scheme") as HTMLSelectElement).value),
    weave_scheme: Number(($("weave-scheme") as HTMLSelectElement).value),
    simulate: ($("simulate") as HTMLInputElement).checked,
  };
}

async function boot(): Promise<void> {
  const config = (await (await fetch("/config")).json()) as {
    ws_port: number;
    topic: string;
  };
  const wsUrl = `ws://${location.hostname}:${config.ws_port}`;
  client = new CellClient(wsUrl, config.topic);
  session.connection = "connecting";
  refresh();

  client.onMessage((msg, raw) => {
    session.handleBusMessage(msg, raw);
    if (msg.command === "AnswerCapture" && session.capture !== null) {
      view = fitView(session.capture.cloud, canvas.width, canvas.height);
      redrawCloud();
    }
    if (msg.command === "EndWelding") {
      client!.publish("Pickup"); // bring the arm home for the next job
    }
    refresh();
  });

  await client.connect();
  client.publish("InterfaceReady");
  refresh();
}

$("capture").addEventListener("click", () => {
  client?.publish("Capture");
});

$("send-program").addEventListener("click", () => {
  void (async () => {
    try {
      const form = currentForm();
      const generated = await generateProgram("", form, session.capture!);
      session.appendLog(`generated ${generated.program_name} (${
        generated.program_text.length} bytes)`);
      client?.publish("ProgramUpload", {
        program_name: generated.program_name,
        text: generated.program_text,
      });
      session.programSent = true;
    } catch (err) {
      session.lastError = String(err);
    }
    refresh();
  })();
});

$("weld").addEventListener("click", () => {
  session.jobRunning = true;
  client?.publish("Welding");
  refresh();
});

// drag to orbit the cloud
let dragging = false;
let lastX = 0;
let lastY = 0;
canvas.addEventListener("mousedown", (ev) => {
  dragging = true;
  lastX = ev.clientX;
  lastY = ev.clientY;
});
window.addEventListener("mouseup", () => {
  dragging = false;
});
window.addEventListener("mousemove", (ev) => {
  if (!dragging || view === null) return;
  view.yawDeg += (ev.clientX - lastX) * 0.5;
  view.pitchDeg += (ev.clientY - lastY) * 0.5;
  lastX = ev.clientX;
  lastY = ev.clientY;
  redrawCloud();
});

void boot().catch((err) => {
  session.lastError = String(err);
  refresh();
});
