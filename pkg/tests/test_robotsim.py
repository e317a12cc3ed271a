import numpy as np
import pytest

from weldcell import robotsim, weldprog
from weldcell.errors import IllegalState, LoadError
from weldcell.robotsim import NO_WEAVE, Robot, RobotState, WeaveScheme
from weldcell.weldprog import (Fine, Instruction, MmPerSec, Percent,
                               PositionRegister, ProgramParams, WeldProgram,
                               WeldSpeed, render_program)

from conftest import exact_u_geometry


def straight_pass_program(length=200.0, simulate=False):
    """Approach + one weld pass along +x at y=z=0, lateral axis = +y."""
    regs = [PositionRegister(1, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0),
            PositionRegister(2, length, 0.0, 0.0, 0.0, 0.0, 0.0)]
    ins = [Instruction(1, "L", 1, MmPerSec(100), Fine()),
           Instruction(2, "L", 2, WeldSpeed(), weldprog.Cnt(100))]
    return WeldProgram("PASS", regs, ins,
                       ProgramParams(simulate=simulate))


def fresh_robot(home=(0.0, 50.0, 50.0)):
    robot = Robot(home_position=home)
    robot.connect()
    return robot


def count_zero_crossings(values, tol):
    """Sign-run counting: transitions between opposite nonzero runs, plus a
    trailing zero-run that follows a nonzero run (the sine parking on zero)."""
    crossings = 0
    prev = 0
    pending_zero = False
    for v in values:
        s = 0 if abs(v) <= tol else (1 if v > 0 else -1)
        if s == 0:
            if prev != 0:
                pending_zero = True
            continue
        if prev != 0 and s != prev:
            crossings += 1
        prev = s
        pending_zero = False
    if pending_zero:
        crossings += 1
    return crossings


# --- state machine ----------------------------------------------------------------

def test_load_valid_program():
    robot = fresh_robot()
    text = render_program(straight_pass_program())
    assert robot.load_program(text) is RobotState.ProgramLoaded


def test_load_corrupted_text_keeps_state():
    robot = fresh_robot()
    with pytest.raises(LoadError):
        robot.load_program("garbage !!")
    assert robot.state is RobotState.AtHome


def test_load_while_executing_rejected():
    robot = fresh_robot()
    robot.state = RobotState.Executing  # simulate an in-flight execution
    with pytest.raises(IllegalState):
        robot.load_program(render_program(straight_pass_program()))


def test_execute_requires_loaded_program():
    robot = fresh_robot()
    with pytest.raises(IllegalState):
        robot.execute()


def test_go_home_transitions():
    robot = Robot()
    with pytest.raises(IllegalState):
        robot.go_home()  # disconnected
    robot.connect()
    assert robot.go_home() is RobotState.AtHome  # idempotent
    robot.load_program(render_program(straight_pass_program()))
    assert robot.go_home() is RobotState.AtHome  # discards the program
    assert robot.program is None
    robot.load_program(render_program(straight_pass_program()))
    robot.execute()
    assert robot.state is RobotState.Finished
    assert robot.go_home() is RobotState.AtHome
    robot.state = RobotState.Executing
    with pytest.raises(IllegalState):
        robot.go_home()


def test_never_executing_without_load():
    # exhaustive walk: execute() refuses every state but ProgramLoaded
    for state in RobotState:
        robot = Robot()
        robot.state = state
        if state is RobotState.ProgramLoaded:
            continue
        with pytest.raises(IllegalState):
            robot.execute()


# --- motion timing ------------------------------------------------------------------

def test_100mm_at_100mms_takes_one_second():
    robot = fresh_robot(home=(0.0, 0.0, 0.0))
    regs = [PositionRegister(1, 100.0, 0.0, 0.0, 0.0, 0.0, 0.0)]
    ins = [Instruction(1, "L", 1, MmPerSec(100), Fine())]
    robot.load_program(render_program(WeldProgram("ONE", regs, ins)))
    trace = robot.execute()
    assert trace.per_instruction_durations[0] == pytest.approx(1.0, abs=1e-12)
    assert trace.total == pytest.approx(1.0, abs=1e-12)


def test_joint_move_timing_uses_percent_of_vjmax():
    robot = fresh_robot(home=(0.0, 0.0, 0.0))
    regs = [PositionRegister(1, 500.0, 0.0, 0.0, 0.0, 0.0, 0.0)]
    ins = [Instruction(1, "J", 1, Percent(10), Fine())]
    robot.load_program(render_program(WeldProgram("J", regs, ins)))
    trace = robot.execute()
    # 500 mm / (10% of 1000 mm/s) = 5 s
    assert trace.total == pytest.approx(5.0, abs=1e-12)


def test_total_equals_sum_of_durations_and_times_increase():
    robot = fresh_robot()
    selections, poses = exact_u_geometry()
    prog = weldprog.generate_program(selections, poses)
    robot.load_program(render_program(prog))
    trace = robot.execute(weave=WeaveScheme(1, 2.0, 0.05), weld_speed=8.0)
    assert trace.total == pytest.approx(sum(trace.per_instruction_durations),
                                        abs=1e-9)
    assert np.all(np.diff(trace.times) > 0.0)


def test_total_invariant_under_sample_rate():
    robot_a, robot_b = fresh_robot(), fresh_robot()
    text = render_program(straight_pass_program())
    robot_a.load_program(text)
    robot_b.load_program(text)
    total_a = robot_a.execute(sample_rate=100.0).total
    total_b = robot_b.execute(sample_rate=333.0).total
    assert total_a == pytest.approx(total_b, abs=1e-12)


def test_boundary_samples_hit_registers_exactly():
    robot = fresh_robot()
    prog = straight_pass_program()
    robot.load_program(render_program(prog))
    trace = robot.execute(weave=WeaveScheme(1, 2.0, 0.05), weld_speed=8.0)
    for ins in prog.instructions:
        reg = prog.register(ins.position_index)
        idx = np.nonzero(trace.line_nos == ins.line_no)[0]
        arrival = trace.positions[idx[-1]]
        assert np.max(np.abs(arrival - np.array(reg.xyz))) < 1e-6


# --- weave ---------------------------------------------------------------------------

def weave_trace(amplitude, frequency=0.05, simulate=False, rate=200.0):
    robot = fresh_robot()
    robot.load_program(render_program(straight_pass_program(simulate=simulate)))
    return robot.execute(weave=WeaveScheme(1, amplitude, frequency),
                         weld_speed=8.0, sample_rate=rate)


def test_weave_amplitude_and_zero_crossings():
    trace = weave_trace(2.0)
    offsets = trace.lateral_offsets(2)
    assert np.max(np.abs(offsets)) == pytest.approx(2.0, rel=0.01)
    assert count_zero_crossings(offsets, tol=2.0 * 1e-9) == 20


def test_zero_amplitude_reproduces_straight_pass_bitwise():
    straight = weave_trace(0.0)
    zeroed = weave_trace(0.0)
    no_weave = fresh_robot()
    no_weave.load_program(render_program(straight_pass_program()))
    plain = no_weave.execute(weave=NO_WEAVE, weld_speed=8.0, sample_rate=200.0)
    assert np.array_equal(straight.positions, plain.positions)
    assert np.array_equal(straight.times, plain.times)
    assert np.array_equal(straight.positions, zeroed.positions)


def test_weave_arc_length_exceeds_straight_length():
    woven = weave_trace(2.0)
    straight = weave_trace(0.0)

    def arc(trace):
        pts = trace.positions[trace.line_nos == 2]
        return float(np.sum(np.linalg.norm(np.diff(pts, axis=0), axis=1)))

    assert arc(woven) > arc(straight)
    assert arc(straight) == pytest.approx(200.0, rel=1e-3)


def test_simulate_forces_welding_flags_false():
    live = weave_trace(2.0, simulate=False)
    dry = weave_trace(2.0, simulate=True)
    assert live.welding.any()
    assert not dry.welding.any()
    # dry run keeps the same instruction path (same arrivals)
    assert np.array_equal(live.line_nos, dry.line_nos)
    np.testing.assert_allclose(dry.positions[-1], live.positions[-1], atol=1e-9)


def test_welding_flag_only_on_weld_instructions():
    trace = weave_trace(1.0)
    assert not trace.welding[trace.line_nos == 1].any()
    assert trace.welding[trace.line_nos == 2].all()


# --- trace export --------------------------------------------------------------------

def test_trace_csv_export(tmp_path):
    trace = weave_trace(1.0)
    path = tmp_path / "trace.csv"
    robotsim.save_trace_csv(trace, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "t,x,y,z,line_no,welding"
    assert len(lines) == len(trace) + 1
    t, x, y, z, line_no, welding = lines[1].split(",")
    assert float(t) == trace.times[0]
    assert int(welding) in (0, 1)
