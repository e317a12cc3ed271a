"""Simulated execution with sinusoidal weave.

Loads a 200 mm weld pass, executes it at 8 mm/s with a 2 mm / 0.05 cyc/mm
weave, and plots the lateral oscillation (saved headless to /tmp). The trace
is exported as CSV for HMI playback.
"""

import numpy as np

from weldcell import robotsim, weldprog
from weldcell.robotsim import Robot, WeaveScheme

regs = [weldprog.PositionRegister(1, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0),
        weldprog.PositionRegister(2, 200.0, 0.0, 0.0, 0.0, 0.0, 0.0)]
ins = [weldprog.Instruction(1, "L", 1, weldprog.MmPerSec(100), weldprog.Fine()),
       weldprog.Instruction(2, "L", 2, weldprog.WeldSpeed(), weldprog.Cnt(100))]
prog = weldprog.WeldProgram("PASS", regs, ins)

robot = Robot(home_position=(0.0, 40.0, 40.0))
robot.connect()
robot.load_program(weldprog.render_program(prog))
trace = robot.execute(weave=WeaveScheme(id=1, amplitude=2.0, frequency=0.05),
                      weld_speed=8.0, sample_rate=200.0)

print(f"{len(trace)} samples over {trace.total:.2f} s "
      f"(per instruction: {[round(d, 3) for d in trace.per_instruction_durations]})")

offsets = trace.lateral_offsets(2)
print(f"weld pass: max lateral deviation {np.abs(offsets).max():.3f} mm "
      f"(commanded 2.0), {int(trace.welding.sum())} welding samples")

robotsim.save_trace_csv(trace, "/tmp/weave_trace.csv")
print("trace exported to /tmp/weave_trace.csv")

try:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    pass_pts = trace.positions[trace.line_nos == 2]
    fig, ax = plt.subplots(figsize=(9, 3))
    ax.plot(pass_pts[:, 0], pass_pts[:, 1], lw=0.8)
    ax.set_xlabel("travel, mm")
    ax.set_ylabel("lateral, mm")
    ax.set_title("weld pass with sinusoidal weave")
    fig.tight_layout()
    fig.savefig("/tmp/weave_trace.png", dpi=120)
    print("plot saved to /tmp/weave_trace.png")
except ImportError:
    pass
