"""Simulated six-axis robot endpoint working in TCP Cartesian space.

The simulator loads .wp programs and executes them segment by segment:
linear moves run straight at their commanded speed (WELD_SPEED resolves to
the active welding scheme's travel speed), joint moves are timed as
length / (percent * v_jmax). During real (non-simulate) weld moves a
sinusoidal weave offset is superposed along the lateral axis of the target
register's tool frame. Time is simulated, not wall clock.

State machine: Disconnected -> AtHome -> ProgramLoaded -> Executing ->
Finished -> AtHome. go_home also discards a loaded program (handler reset).
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import weldprog
from .errors import IllegalState, LoadError, ParseError
from .geom3d import rotation_from_wpr, slerp

V_JMAX_MM_S = 1000.0      # nominal full-speed joint transit, mm/s
DEFAULT_WELD_SPEED = 8.0  # mm/s fillet travel when no scheme table is given
DEFAULT_SAMPLE_RATE = 200.0  # Hz of trace sampling (simulated time)


class RobotState(Enum):
    Disconnected = "Disconnected"
    AtHome = "AtHome"
    ProgramLoaded = "ProgramLoaded"
    Executing = "Executing"
    Finished = "Finished"


@dataclass(frozen=True)
class WeaveScheme:
    id: int
    amplitude: float   # mm
    frequency: float   # cycles per mm of travel

    def __post_init__(self):
        if self.amplitude < 0.0 or self.frequency < 0.0:
            raise ValueError("weave amplitude and frequency must be >= 0")


NO_WEAVE = WeaveScheme(id=0, amplitude=0.0, frequency=0.0)


@dataclass(eq=False)
class ExecutionTrace:
    """Sampled TCP trajectory of one program run.

    samples columns: times (s), positions (n, 3), line_nos, welding flags.
    orientations carries the slerp'ed tool frame per sample (recorded for
    playback; not asserted by the planning tests).
    """

    times: np.ndarray
    positions: np.ndarray
    line_nos: np.ndarray
    welding: np.ndarray
    orientations: np.ndarray
    per_instruction_durations: list
    total: float

    def __len__(self):
        return len(self.times)

    def lateral_offsets(self, line_no):
        """Offsets of the sampled points from the commanded straight segment,
        projected on the segment's lateral axis (weave diagnostics).

        The segment runs from the previous instruction's arrival sample to
        this instruction's arrival sample.
        """
        idx = np.nonzero(self.line_nos == line_no)[0]
        if len(idx) == 0:
            raise KeyError(f"no samples for instruction {line_no}")
        start = self.positions[idx[0] - 1]
        end = self.positions[idx[-1]]
        seg = end - start
        seg_len = np.linalg.norm(seg)
        if seg_len < 1e-12:
            return np.zeros(len(idx))
        d = seg / seg_len
        rel = self.positions[idx] - start
        perp = rel - np.outer(rel @ d, d)
        lateral = self.orientations[idx[-1]][:, 1]
        return perp @ lateral


def save_trace_csv(trace, path):
    """Trace export for plotting/HMI playback: t,x,y,z,line_no,welding."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("t,x,y,z,line_no,welding\n")
        for i in range(len(trace)):
            p = trace.positions[i]
            fh.write(f"{float(trace.times[i])!r},{float(p[0])!r},"
                     f"{float(p[1])!r},{float(p[2])!r},"
                     f"{int(trace.line_nos[i])},{int(trace.welding[i])}\n")


class Robot:
    """One simulated robot cell; commands are processed one at a time."""

    def __init__(self, home_position=(0.0, -200.0, 500.0), home_wpr=(0.0, 0.0, 0.0),
                 v_jmax=V_JMAX_MM_S):
        self.home_position = np.asarray(home_position, dtype=float)
        self.home_rotation = rotation_from_wpr(*home_wpr)
        self.v_jmax = float(v_jmax)
        self.state = RobotState.Disconnected
        self.program = None
        self.tcp_position = self.home_position.copy()
        self.tcp_rotation = self.home_rotation.copy()

    def _require(self, *states):
        if self.state not in states:
            allowed = "/".join(s.value for s in states)
            raise IllegalState(f"robot is {self.state.value}, needs {allowed}")

    def connect(self):
        self._require(RobotState.Disconnected)
        self.state = RobotState.AtHome
        return self.state

    def load_program(self, text):
        """Parse and stage a program. Raises LoadError on bad text (state is
        unchanged), IllegalState unless the robot is AtHome."""
        self._require(RobotState.AtHome)
        try:
            program = weldprog.parse_program(text)
        except ParseError as exc:
            raise LoadError(f"program rejected: {exc}") from exc
        self.program = program
        self.state = RobotState.ProgramLoaded
        return self.state

    def execute(self, weld_scheme=None, weave=NO_WEAVE, weld_speed=DEFAULT_WELD_SPEED,
                sample_rate=DEFAULT_SAMPLE_RATE):
        """Run the loaded program and return its ExecutionTrace.

        weld_scheme is the opaque scheme id being applied (bookkeeping only;
        the resolved travel speed arrives as weld_speed). simulate=True in the
        program params runs the same path with welding flags forced false.
        """
        self._require(RobotState.ProgramLoaded)
        prog = self.program
        self.state = RobotState.Executing
        try:
            trace = _run_program(prog, self.tcp_position, self.tcp_rotation,
                                 weave, weld_speed, self.v_jmax, sample_rate)
        except Exception:
            self.state = RobotState.ProgramLoaded
            raise
        self.tcp_position = trace.positions[-1].copy()
        self.tcp_rotation = trace.orientations[-1].copy()
        self.state = RobotState.Finished
        return trace

    def go_home(self):
        """Return to the home pose; also discards a loaded program."""
        self._require(RobotState.AtHome, RobotState.Finished, RobotState.ProgramLoaded)
        self.program = None
        self.tcp_position = self.home_position.copy()
        self.tcp_rotation = self.home_rotation.copy()
        self.state = RobotState.AtHome
        return self.state


def _resolve_speed(speed, weld_speed, v_jmax):
    if isinstance(speed, weldprog.Percent):
        return speed.value / 100.0 * v_jmax
    if isinstance(speed, weldprog.MmPerSec):
        return float(speed.value)
    return float(weld_speed)


def _run_program(prog, start_pos, start_rot, weave, weld_speed, v_jmax,
                 sample_rate):
    if sample_rate <= 0.0:
        raise ValueError("sample_rate must be positive")
    dt = 1.0 / sample_rate

    times, positions, line_nos, welding, orients = [], [], [], [], []

    def emit(t, pos, rot, line_no, is_weld):
        times.append(t)
        positions.append(pos)
        orients.append(rot)
        line_nos.append(line_no)
        welding.append(is_weld)

    pos, rot = np.asarray(start_pos, dtype=float), np.asarray(start_rot, dtype=float)
    emit(0.0, pos.copy(), rot.copy(), 0, False)

    durations = []
    t_base = 0.0
    for ins in prog.instructions:
        reg = prog.register(ins.position_index)
        target = np.array(reg.xyz)
        target_rot = rotation_from_wpr(*reg.wpr)
        seg = target - pos
        seg_len = float(np.linalg.norm(seg))
        speed = _resolve_speed(ins.speed, weld_speed, v_jmax)
        duration = seg_len / speed if seg_len > 0.0 else 0.0
        durations.append(duration)

        is_weld = ins.weld and not prog.params.simulate
        apply_weave = is_weld and weave.amplitude > 0.0 and seg_len > 0.0
        if apply_weave:
            direction = seg / seg_len
            lateral = target_rot[:, 1]

        if duration > 0.0:
            # interior samples on the instruction-local dt grid, then the
            # exact endpoint; times use k*dt directly so the arrival stamp
            # stays strictly larger
            n_interior = int(duration / dt)
            for k in range(1, n_interior + 1):
                offset = k * dt
                if offset >= duration:
                    break
                f = offset / duration
                p = pos + f * seg
                if apply_weave:
                    s = f * seg_len
                    p = p + weave.amplitude * np.sin(2.0 * np.pi * weave.frequency * s) * lateral
                emit(t_base + offset, p,
                     slerp(rot, target_rot, f), ins.line_no, is_weld)
            # arrival sample is the commanded register pose (weave closes out)
            emit(t_base + duration, target.copy(), target_rot.copy(),
                 ins.line_no, is_weld)
        t_base += duration
        pos, rot = target, target_rot

    return ExecutionTrace(
        times=np.array(times),
        positions=np.array(positions),
        line_nos=np.array(line_nos, dtype=int),
        welding=np.array(welding, dtype=bool),
        orientations=np.array(orients),
        per_instruction_durations=durations,
        total=float(sum(durations)),
    )
