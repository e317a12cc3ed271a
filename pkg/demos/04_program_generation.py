"""Dynamic robot-program generation and the .wp grammar.

Builds the two-seam U job (12 instructions, weld moves at lines 3/6/9/11 —
each seam split into two passes at its midpoint), renders it to program text,
parses it back, and shows workspace validation flagging an out-of-area
register.
"""

from weldcell import scene, seamgeom, planefind, weldprog
from weldcell.handler import SyntheticSource, capture_once
from weldcell.operator_cli import JobChoices, build_job_program

source = SyntheticSource(scene.u_canonical_spec(), scene.u_canonical_sampling())
_, payload = capture_once(source)

choices = JobChoices(structure="U", length_h=600.0, length_v=400.0,
                     weld_scheme=3, weave_scheme=1, simulate=False)
prog = build_job_program(choices, payload)

print(f"program {prog.name}: {len(prog.positions)} position registers, "
      f"{len(prog.instructions)} instructions")
print(f"weld moves at lines: {prog.weld_instruction_lines}")
print()

text = weldprog.render_program(prog)
print(text)

back = weldprog.parse_program(text)
print("parse(render(p)) == p:", back == prog)

# workspace rule: the cell refuses registers beyond x=900 / z=700
bad = weldprog.WeldProgram(
    "OUT", [weldprog.PositionRegister(1, 950.0, 0.0, 720.0, 0, 0, 0)],
    [weldprog.Instruction(1, "J", 1, weldprog.Percent(10), weldprog.Fine())])
for violation in weldprog.validate_program(bad):
    print("violation:", violation)
