"""Headless operator client: the three-step job flow, job log, bench harness.

run_job scripts the operator's three interactions (choose structure, choose
lengths/schemes, send the order), drives the full bus protocol against a live
handler, generates the robot program locally from the AnswerCapture geometry,
and appends one CSV job record per completed weld. bench repeats a job and
reports the per-step timing means.

Units: geometry is mm everywhere; the job log stores distances in cm
(converted only at this persistence boundary).
"""

import os
import time
from dataclasses import dataclass
from datetime import datetime

from .errors import NoThreePlanes, ProtocolError, WorkspaceViolation
from .handler import CapturePayload
from .msgbus import DEFAULT_TOPIC, OPERATOR_COMMANDS, BusClient, Command
from .seamgeom import (DEFAULT_TRAVEL_ANGLE_DEG, outward_normal, torch_pose_at)
from .weldprog import (APPROACH_OFFSET_MM, ProgramParams, generate_program,
                       render_program, validate_program)

DEFAULT_TIMEOUT_S = 30.0

JOB_CSV_FIELDS = (
    "timestamp",
    "vertical_welded_distance_cm",
    "horizontal_welded_distance_cm",
    "vertical_max_size_cm",
    "horizontal_max_size_cm",
    "process_time_s",
    "capture_time_s",
    "structure_type",
    "welding_scheme",
    "weave_sine_scheme",
)
JOB_CSV_HEADER = ",".join(JOB_CSV_FIELDS)

BENCH_COLUMNS = ("TP/HMI Interaction", "Calculations", "Create program",
                 "Send/Execute program", "Total time")


@dataclass(frozen=True)
class JobChoices:
    """The operator's three-step selections, scripted."""

    structure: str = "U"
    length_h: float = 600.0   # mm along the horizontal seam
    length_v: float = 400.0   # mm along the vertical seam
    weld_scheme: int = 1
    weave_scheme: int = 1
    simulate: bool = True
    interaction_delay_s: float = 0.0  # synthetic human think time


@dataclass(frozen=True)
class JobRecord:
    """One Table-style row of the job log (cm / s units)."""

    timestamp: str
    vertical_welded_distance_cm: float
    horizontal_welded_distance_cm: float
    vertical_max_size_cm: float
    horizontal_max_size_cm: float
    process_time_s: float
    capture_time_s: float
    structure_type: str
    welding_scheme: int
    weave_sine_scheme: int


@dataclass(frozen=True)
class StepTimings:
    hmi_interaction_s: float
    calculations_s: float
    create_program_s: float
    send_execute_s: float
    total_s: float

    def as_row(self):
        return (self.hmi_interaction_s, self.calculations_s,
                self.create_program_s, self.send_execute_s, self.total_s)


def build_job_program(choices, payload, travel_angle=DEFAULT_TRAVEL_ANGLE_DEG,
                      approach_offset=APPROACH_OFFSET_MM, name=None):
    """Generate the weld program for a job from the capture geometry.

    This is the single source of program text for both the CLI operator and
    the browser HMI (via the /generate endpoint). Raises LengthExceedsMax /
    EmptySelection on bad lengths and WorkspaceViolation when a register
    falls outside the work area.
    """
    centroid = payload.cloud_points.mean(axis=0)
    selections, poses = [], []
    for seam, length in ((payload.horizontal, choices.length_h),
                         (payload.vertical, choices.length_v)):
        normals = tuple(outward_normal(payload.planes[i], centroid)
                        for i in seam.plane_pair)
        poses.append(torch_pose_at(seam.corner, seam, normals,
                                   travel_sign=1, travel_angle=travel_angle))
        selections.append((seam, length))

    params = ProgramParams(weld_scheme=choices.weld_scheme,
                           weave_scheme=choices.weave_scheme,
                           simulate=choices.simulate)
    prog = generate_program(selections, poses, params,
                            approach_offset=approach_offset,
                            name=name or f"{choices.structure}_JOB")
    violations = validate_program(prog)
    if violations:
        raise WorkspaceViolation("; ".join(str(v) for v in violations))
    return prog


def _await(client, wanted, timeout, deadline=None):
    """Next handler-side message among `wanted`; ErrorReport is raised."""
    deadline = deadline or (time.monotonic() + timeout)
    while True:
        remaining = deadline - time.monotonic()
        if remaining <= 0:
            names = "/".join(c.value for c in wanted)
            raise ProtocolError(f"timed out waiting for {names}")
        msg = client.receive(timeout=remaining)
        if msg is None or msg.command in OPERATOR_COMMANDS:
            continue  # own echo or unrelated chatter
        if msg.command is Command.ErrorReport:
            code = msg.payload.get("code", "")
            detail = msg.payload.get("detail", "")
            if code == "NoThreePlanes":
                raise NoThreePlanes(detail)
            raise ProtocolError(f"handler reported {code}: {detail}")
        if msg.command in wanted:
            return msg


def run_job(choices, bus_host, bus_port, topic=DEFAULT_TOPIC, log_path=None,
            timeout=DEFAULT_TIMEOUT_S, dump_program_path=None):
    """Execute one full job against a live handler.

    Returns (JobRecord, StepTimings). The record is appended to `log_path`
    only when the job reached the Welding dispatch; a refused program
    (FTP_NO_OK) or any earlier fault aborts without logging.
    dump_program_path additionally writes the uploaded .wp text to a file.
    """
    with BusClient(bus_host, bus_port, default_topic=topic,
                   client_id="operator") as client:
        client.subscribe()

        t_start = time.perf_counter()
        if choices.interaction_delay_s > 0:
            time.sleep(choices.interaction_delay_s)
        client.publish(Command.InterfaceReady)
        _await(client, {Command.HandlerRobotReady}, timeout)

        t_capture_req = time.perf_counter()
        client.publish(Command.Capture)
        answer = _await(client, {Command.AnswerCapture}, timeout)
        t_answer = time.perf_counter()

        t_gen0 = time.perf_counter()
        payload = CapturePayload.from_json_payload(answer.payload)
        prog = build_job_program(choices, payload)
        text = render_program(prog)
        t_gen1 = time.perf_counter()
        if dump_program_path is not None:
            with open(dump_program_path, "w", encoding="utf-8") as fh:
                fh.write(text)

        t_send0 = time.perf_counter()
        client.publish(Command.ProgramUpload,
                       {"program_name": prog.name, "text": text})
        ack = _await(client, {Command.FTP_OK, Command.FTP_NO_OK}, timeout)
        if ack.command is Command.FTP_NO_OK:
            raise ProtocolError(
                f"robot rejected the program: {ack.payload.get('detail', '')}")
        client.publish(Command.Welding)
        t_dispatch = time.perf_counter()

        _await(client, {Command.EndWelding}, timeout)
        client.publish(Command.Pickup)
        _await(client, {Command.Pickuped}, timeout)

    timings = StepTimings(
        hmi_interaction_s=t_capture_req - t_start,
        calculations_s=t_answer - t_capture_req,
        create_program_s=t_gen1 - t_gen0,
        send_execute_s=t_dispatch - t_send0,
        total_s=t_dispatch - t_start,  # process time: start until welding begins
    )
    record = JobRecord(
        timestamp=datetime.now().isoformat(timespec="seconds"),
        vertical_welded_distance_cm=choices.length_v / 10.0,
        horizontal_welded_distance_cm=choices.length_h / 10.0,
        vertical_max_size_cm=payload.vertical.length_max / 10.0,
        horizontal_max_size_cm=payload.horizontal.length_max / 10.0,
        process_time_s=timings.total_s,
        capture_time_s=payload.capture_time,
        structure_type=choices.structure,
        welding_scheme=choices.weld_scheme,
        weave_sine_scheme=choices.weave_scheme,
    )
    if log_path is not None:
        append_job_record(record, log_path)
    return record, timings


# --- job log -----------------------------------------------------------------

def append_job_record(record, path):
    """Append one CSV row, writing the stable header on first use."""
    fresh = not os.path.exists(path) or os.path.getsize(path) == 0
    with open(path, "a", encoding="utf-8", newline="") as fh:
        if fresh:
            fh.write(JOB_CSV_HEADER + "\n")
        row = [
            record.timestamp,
            repr(record.vertical_welded_distance_cm),
            repr(record.horizontal_welded_distance_cm),
            repr(record.vertical_max_size_cm),
            repr(record.horizontal_max_size_cm),
            repr(record.process_time_s),
            repr(record.capture_time_s),
            record.structure_type,
            str(record.welding_scheme),
            str(record.weave_sine_scheme),
        ]
        fh.write(",".join(row) + "\n")


def read_job_records(path):
    """Parse a job log back into JobRecord rows (floats round-trip exactly)."""
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        lines = [line.rstrip("\n") for line in fh if line.strip()]
    if not lines or lines[0] != JOB_CSV_HEADER:
        raise ValueError(f"{path} does not start with the job-log header")
    for line in lines[1:]:
        f = line.split(",")
        if len(f) != len(JOB_CSV_FIELDS):
            raise ValueError(f"job row has {len(f)} fields: {line!r}")
        records.append(JobRecord(
            timestamp=f[0],
            vertical_welded_distance_cm=float(f[1]),
            horizontal_welded_distance_cm=float(f[2]),
            vertical_max_size_cm=float(f[3]),
            horizontal_max_size_cm=float(f[4]),
            process_time_s=float(f[5]),
            capture_time_s=float(f[6]),
            structure_type=f[7],
            welding_scheme=int(f[8]),
            weave_sine_scheme=int(f[9]),
        ))
    return records


# --- timing harness ------------------------------------------------------------

@dataclass
class BenchResult:
    runs: list       # StepTimings per repetition
    means: StepTimings

    def table_text(self):
        header = "  ".join(f"{c:>20}" for c in BENCH_COLUMNS)
        mean_row = "  ".join(f"{v:20.3f}" for v in self.means.as_row())
        lines = [header, mean_row]
        return "\n".join(lines) + "\n"

    def to_csv(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(",".join(BENCH_COLUMNS) + "\n")
            fh.write(",".join(repr(v) for v in self.means.as_row()) + "\n")


def bench(n_repeats, choices, bus_host, bus_port, topic=DEFAULT_TOPIC,
          timeout=DEFAULT_TIMEOUT_S):
    """Run the job n_repeats times (paper protocol: 5) and average each step."""
    if n_repeats < 1:
        raise ValueError("n_repeats must be >= 1")
    runs = []
    for _ in range(n_repeats):
        _, timings = run_job(choices, bus_host, bus_port, topic=topic,
                             timeout=timeout)
        runs.append(timings)
    n = len(runs)
    means = StepTimings(
        hmi_interaction_s=sum(r.hmi_interaction_s for r in runs) / n,
        calculations_s=sum(r.calculations_s for r in runs) / n,
        create_program_s=sum(r.create_program_s for r in runs) / n,
        send_execute_s=sum(r.send_execute_s for r in runs) / n,
        total_s=sum(r.total_s for r in runs) / n,
    )
    return BenchResult(runs=runs, means=means)
