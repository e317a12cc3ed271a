"""Robot weld-program model: generation, rendering, parsing, validation.

Program text (.wp) is UTF-8 with three blocks:

    PROGRAM <name>
    PARAMS weld_scheme=<int> weave_scheme=<int> simulate=<0|1>

    P[<i>] = <x> <y> <z> <w> <p> <r>
    ...

    <n>: <J|L> P[<i>] <speed> <FINE|CNTnn>;

Speeds render as ``10%``, ``100 mm/sec`` or ``WELD_SPEED``; floats are written
with repr so parse(render(p)) == p exactly. The two metadata lines are
optional on input (uploads from other sources may omit them).

Each selected seam is welded in two passes split at its midpoint. Horizontal
seams weld forward twice with a retreat-and-return between passes; vertical
seams weld up to the midpoint, travel to the far end and weld back down to
the midpoint, reusing the midpoint register. A two-seam job therefore emits
12 instructions with weld moves at lines 3, 6, 9 and 11.
"""

import re
from dataclasses import dataclass, field

from .errors import EmptySelection, LengthExceedsMax, ParseError
from .geom3d import wpr_from_rotation
from .seamgeom import point_along_seam

APPROACH_OFFSET_MM = 50.0
APPROACH_SPEED = 100   # mm/sec for approach/retreat linear moves
JOINT_PERCENT = 10     # percent speed for joint transit moves

WORKSPACE_MM = {"x": 900.0, "z": 700.0}


# --- speed / termination operands ------------------------------------------

@dataclass(frozen=True)
class Percent:
    value: int

    def __post_init__(self):
        if not 1 <= self.value <= 100:
            raise ValueError("percent speed must be 1..100")

    def __str__(self):
        return f"{self.value}%"


@dataclass(frozen=True)
class MmPerSec:
    value: int

    def __post_init__(self):
        if self.value <= 0:
            raise ValueError("mm/sec speed must be positive")

    def __str__(self):
        return f"{self.value} mm/sec"


@dataclass(frozen=True)
class WeldSpeed:
    """Symbolic speed resolved by the robot from its welding scheme."""

    def __str__(self):
        return "WELD_SPEED"


@dataclass(frozen=True)
class Fine:
    def __str__(self):
        return "FINE"


@dataclass(frozen=True)
class Cnt:
    value: int

    def __post_init__(self):
        if not 0 <= self.value <= 100:
            raise ValueError("CNT smoothness must be 0..100")

    def __str__(self):
        return f"CNT{self.value}"


# --- program structure ------------------------------------------------------

@dataclass(frozen=True)
class PositionRegister:
    index: int
    x: float
    y: float
    z: float
    w: float  # fixed-axis roll, deg
    p: float  # pitch
    r: float  # yaw

    def __post_init__(self):
        if self.index < 1:
            raise ValueError("register index is 1-based")

    @property
    def xyz(self):
        return (self.x, self.y, self.z)

    @property
    def wpr(self):
        return (self.w, self.p, self.r)


@dataclass(frozen=True)
class Instruction:
    line_no: int
    motion: str  # "J" joint or "L" linear
    position_index: int
    speed: object
    termination: object

    def __post_init__(self):
        if self.line_no < 1:
            raise ValueError("line numbers are 1-based")
        if self.motion not in ("J", "L"):
            raise ValueError(f"unknown motion {self.motion!r}")
        if isinstance(self.speed, WeldSpeed) and self.motion != "L":
            raise ValueError("weld moves must be linear")

    @property
    def weld(self):
        return isinstance(self.speed, WeldSpeed)

    def __str__(self):
        return (f"{self.line_no}: {self.motion} P[{self.position_index}] "
                f"{self.speed} {self.termination};")


@dataclass
class ProgramParams:
    weld_scheme: int = 1
    weave_scheme: int = 1
    simulate: bool = False


@dataclass
class WeldProgram:
    name: str
    positions: list
    instructions: list
    params: ProgramParams = field(default_factory=ProgramParams)

    def __post_init__(self):
        indices = [p.index for p in self.positions]
        if len(set(indices)) != len(indices):
            raise ValueError("duplicate position register index")
        defined = set(indices)
        for k, ins in enumerate(self.instructions, start=1):
            if ins.line_no != k:
                raise ValueError(
                    f"instruction line numbers must run 1..N, got {ins.line_no} at {k}")
            if ins.position_index not in defined:
                raise ValueError(f"undefined position register P[{ins.position_index}]")

    def register(self, index):
        for p in self.positions:
            if p.index == index:
                return p
        raise KeyError(index)

    @property
    def weld_instruction_lines(self):
        return [ins.line_no for ins in self.instructions if ins.weld]


# --- generation ---------------------------------------------------------------

class _Builder:
    def __init__(self):
        self.positions = []
        self.instructions = []

    def reg(self, point, wpr):
        index = len(self.positions) + 1
        self.positions.append(PositionRegister(
            index, float(point[0]), float(point[1]), float(point[2]),
            float(wpr[0]), float(wpr[1]), float(wpr[2])))
        return index

    def move(self, motion, reg_index, speed, term):
        self.instructions.append(Instruction(
            len(self.instructions) + 1, motion, reg_index, speed, term))


def generate_program(seams, torch_poses, params=None,
                     approach_offset=APPROACH_OFFSET_MM, name="WELD_JOB"):
    """Build a WeldProgram from seam selections and their torch poses.

    `seams` is a list of (SeamSegment, selected_length_mm); `torch_poses` the
    matching TorchPose per seam (orientation is constant along a straight
    seam). Horizontal seams are emitted before vertical ones. Raises
    EmptySelection / LengthExceedsMax on bad selected lengths.
    """
    if params is None:
        params = ProgramParams()
    jobs = list(zip(seams, torch_poses))
    jobs.sort(key=lambda j: 0 if j[0][0].orientation_class == "horizontal" else 1)

    for (seam, length), _ in jobs:
        if length <= 0.0:
            raise EmptySelection(f"selected length {length} mm on {seam.orientation_class} seam")
        if length > seam.length_max:
            raise LengthExceedsMax(
                f"selected {length:.1f} mm exceeds measured maximum "
                f"{seam.length_max:.1f} mm on the {seam.orientation_class} seam")

    b = _Builder()
    last_exit = None
    for (seam, length), pose in jobs:
        wpr = wpr_from_rotation(pose.rotation)
        approach = pose.approach_axis
        start = point_along_seam(seam.corner, seam.direction, 0.0)
        mid = point_along_seam(seam.corner, seam.direction, length / 2.0)
        end = point_along_seam(seam.corner, seam.direction, length)
        hover = start - approach_offset * approach

        r_hover = b.reg(hover, wpr)
        r_start = b.reg(start, wpr)
        r_mid = b.reg(mid, wpr)
        b.move("J", r_hover, Percent(JOINT_PERCENT), Fine())
        b.move("L", r_start, MmPerSec(APPROACH_SPEED), Fine())
        b.move("L", r_mid, WeldSpeed(), Cnt(100))
        if seam.orientation_class == "horizontal":
            r_retreat = b.reg(mid - approach_offset * approach, wpr)
            r_end = b.reg(end, wpr)
            b.move("L", r_retreat, MmPerSec(APPROACH_SPEED), Fine())
            b.move("L", r_mid, MmPerSec(APPROACH_SPEED), Fine())
            b.move("L", r_end, WeldSpeed(), Cnt(100))
        else:
            r_end = b.reg(end, wpr)
            b.move("L", r_end, MmPerSec(APPROACH_SPEED), Fine())
            b.move("L", r_mid, WeldSpeed(), Cnt(100))
        last_exit = (end - approach_offset * approach, wpr)

    if last_exit is None:
        raise EmptySelection("no seams selected")
    r_exit = b.reg(*last_exit)
    b.move("J", r_exit, Percent(JOINT_PERCENT), Fine())
    return WeldProgram(name=name, positions=b.positions,
                       instructions=b.instructions, params=params)


# --- rendering ----------------------------------------------------------------

def render_program(prog):
    """Program text; exact inverse of parse_program (floats via repr)."""
    lines = [f"PROGRAM {prog.name}",
             f"PARAMS weld_scheme={prog.params.weld_scheme} "
             f"weave_scheme={prog.params.weave_scheme} "
             f"simulate={1 if prog.params.simulate else 0}",
             ""]
    for p in prog.positions:
        lines.append(f"P[{p.index}] = {p.x!r} {p.y!r} {p.z!r} {p.w!r} {p.p!r} {p.r!r}")
    lines.append("")
    for ins in prog.instructions:
        lines.append(str(ins))
    return "\n".join(lines) + "\n"


# --- parsing --------------------------------------------------------------------

_NAME_RE = re.compile(r"^PROGRAM\s+(\S+)\s*$")
_PARAMS_RE = re.compile(
    r"^PARAMS\s+weld_scheme=(\d+)\s+weave_scheme=(\d+)\s+simulate=([01])\s*$")
_POSITION_RE = re.compile(r"^P\[(\d+)\]\s*=\s*(.*)$")
_LINENO_RE = re.compile(r"^(\d+):")
_MOTION_RE = re.compile(r"\s*([A-Za-z_]+)")
_REG_RE = re.compile(r"\s*P\[(\d+)\]")
_SPEED_PERCENT_RE = re.compile(r"\s*(\d+)%")
_SPEED_MMSEC_RE = re.compile(r"\s*(\d+)\s+mm/sec")
_SPEED_WELD_RE = re.compile(r"\s*WELD_SPEED\b")
_TERM_RE = re.compile(r"\s*(FINE\b|CNT(\d+))")


def parse_program(text):
    """Parse .wp text into a WeldProgram.

    Tolerates trailing whitespace per line, nothing else; raises ParseError
    with the offending 1-based line (and column for instruction lines).
    """
    name = "UPLOADED"
    params = ProgramParams()
    positions = []
    instructions = []
    seen_indices = set()

    lines = text.splitlines()
    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip()
        if not line:
            continue
        if line.startswith("PROGRAM"):
            if positions or instructions:
                raise ParseError("PROGRAM line must precede positions", line=lineno)
            m = _NAME_RE.match(line)
            if not m:
                raise ParseError("malformed PROGRAM line", line=lineno)
            name = m.group(1)
        elif line.startswith("PARAMS"):
            if positions or instructions:
                raise ParseError("PARAMS line must precede positions", line=lineno)
            m = _PARAMS_RE.match(line)
            if not m:
                raise ParseError("malformed PARAMS line", line=lineno)
            params = ProgramParams(weld_scheme=int(m.group(1)),
                                   weave_scheme=int(m.group(2)),
                                   simulate=m.group(3) == "1")
        elif line.startswith("P["):
            if instructions:
                raise ParseError("position register after first instruction",
                                 line=lineno)
            positions.append(_parse_position(line, lineno, seen_indices))
        else:
            instructions.append(
                _parse_instruction(line, lineno, len(instructions) + 1))

    if not instructions:
        raise ParseError("no instructions", line=max(len(lines), 1))
    defined = {p.index for p in positions}
    for ins in instructions:
        if ins.position_index not in defined:
            raise ParseError(f"undefined position register P[{ins.position_index}]",
                             line=_instruction_source_line(lines, ins.line_no))
    return WeldProgram(name=name, positions=positions,
                       instructions=instructions, params=params)


def _instruction_source_line(lines, line_no):
    pattern = re.compile(rf"^\s*{line_no}:")
    for i, line in enumerate(lines, start=1):
        if pattern.match(line):
            return i
    return 0


def _parse_position(line, lineno, seen_indices):
    m = _POSITION_RE.match(line)
    if not m:
        raise ParseError("malformed position register line", line=lineno)
    index = int(m.group(1))
    if index in seen_indices:
        raise ParseError(f"duplicate position register P[{index}]", line=lineno)
    seen_indices.add(index)
    fields = m.group(2).split()
    if len(fields) != 6:
        raise ParseError(f"expected 6 pose values, got {len(fields)}",
                         line=lineno, column=m.start(2) + 1)
    try:
        vals = [float(v) for v in fields]
    except ValueError:
        raise ParseError("non-numeric pose value", line=lineno,
                         column=m.start(2) + 1) from None
    return PositionRegister(index, *vals)


def _parse_instruction(line, lineno, expected_no):
    m = _LINENO_RE.match(line)
    if not m:
        raise ParseError("expected '<n>:' instruction prefix", line=lineno, column=1)
    stated_no = int(m.group(1))
    if stated_no != expected_no:
        raise ParseError(f"instruction numbered {stated_no}, expected {expected_no}",
                         line=lineno, column=1)
    pos = m.end()

    m = _MOTION_RE.match(line, pos)
    if not m:
        raise ParseError("missing motion letter", line=lineno, column=pos + 1)
    motion = m.group(1)
    if motion not in ("J", "L"):
        raise ParseError(f"unknown motion {motion!r}", line=lineno,
                         column=m.start(1) + 1)
    pos = m.end()

    m = _REG_RE.match(line, pos)
    if not m:
        raise ParseError("malformed position register operand", line=lineno,
                         column=pos + 1)
    reg_index = int(m.group(1))
    pos = m.end()

    speed, pos = _parse_speed(line, lineno, pos)
    term, pos = _parse_termination(line, lineno, pos)

    rest = line[pos:].lstrip()
    if not rest.startswith(";"):
        raise ParseError("missing semicolon", line=lineno, column=len(line.rstrip()) + 1)
    if rest[1:].strip():
        raise ParseError("trailing characters after ';'", line=lineno,
                         column=line.index(";", pos) + 2)
    try:
        return Instruction(expected_no, motion, reg_index, speed, term)
    except ValueError as exc:
        raise ParseError(str(exc), line=lineno) from None


def _parse_speed(line, lineno, pos):
    m = _SPEED_PERCENT_RE.match(line, pos)
    if m:
        return Percent(int(m.group(1))), m.end()
    m = _SPEED_MMSEC_RE.match(line, pos)
    if m:
        return MmPerSec(int(m.group(1))), m.end()
    m = _SPEED_WELD_RE.match(line, pos)
    if m:
        return WeldSpeed(), m.end()
    col = len(line[:pos]) + len(line[pos:]) - len(line[pos:].lstrip()) + 1
    raise ParseError("bad speed token", line=lineno, column=col)


def _parse_termination(line, lineno, pos):
    m = _TERM_RE.match(line, pos)
    if not m:
        col = pos + len(line[pos:]) - len(line[pos:].lstrip()) + 1
        raise ParseError("bad termination token", line=lineno, column=col)
    if m.group(1).startswith("CNT"):
        value = int(m.group(2))
        if value > 100:
            raise ParseError(f"CNT{value} out of range 0..100", line=lineno,
                             column=m.start(1) + 1)
        return Cnt(value), m.end()
    return Fine(), m.end()


# --- validation -------------------------------------------------------------------

@dataclass(frozen=True)
class WorkspaceViolationReport:
    register_index: int
    axis: str
    value: float
    limit: float

    def __str__(self):
        return (f"P[{self.register_index}]: {self.axis} = {self.value:.1f} mm "
                f"exceeds {self.limit:.0f} mm")


def validate_program(prog, workspace=None):
    """Check every referenced register against the work-area box.

    The box is closed: x <= 900 and z <= 700 pass. Returns one violation per
    offending register and axis; empty list means the program fits.
    """
    if workspace is None:
        workspace = WORKSPACE_MM
    referenced = sorted({ins.position_index for ins in prog.instructions})
    violations = []
    for index in referenced:
        reg = prog.register(index)
        for axis, value in (("x", reg.x), ("z", reg.z)):
            limit = workspace[axis]
            if value > limit:
                violations.append(WorkspaceViolationReport(index, axis, value, limit))
    return violations
