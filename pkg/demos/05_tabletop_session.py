"""Headless tour of the tabletop session: robots, messengers, and commands.

A Session binds an algorithm run to a physical scene: one display robot per
node positioned on an iteration chart, plus (in column mode) one messenger
robot per directed edge ferrying values between columns.  Commands are the
same JSON dicts the websocket service accepts, so this script exercises the
full interactive loop without a network.

To watch it live instead:  gridswarm serve --scenario dispatch3 --autostart
"""

from gridswarm import Session, builtin_scenario

session = Session(builtin_scenario("dispatch3"))

frame = session.snapshot()
nodes = [r for r in frame.robots if r["role"] == "node"]
couriers = [r for r in frame.robots if r["role"] == "messenger"]
print(f"scene: {len(nodes)} node robots and {len(couriers)} messengers")
for r in nodes:
    print(f"  node {r['id']}: ({r['x_mm']:.0f}, {r['y_mm']:.0f}) mm, "
          f"text={r['text']!r}")

session.apply_command({"cmd": "start"})
for _ in range(5):
    session.step_iteration()
    for _ in range(30):          # let the robots drive toward their targets
        session.tick_scene(1 / 60)
    frame = session.snapshot()
    print(f"iteration {frame.iteration}: values "
          f"{[round(v, 4) for v in frame.values]}")

# nudge a robot by hand: the run restarts from the perturbed vector
session.apply_command({"cmd": "move_robot", "id": 1, "x_mm": 50.0, "y_mm": 550.0})
print(f"after dragging node 1 to the top: values "
      f"{[round(v, 4) for v in session.snapshot().values]}, "
      f"iteration reset to {session.snapshot().iteration}")

csv_text, scenario_json = None, None
session.apply_command({"cmd": "start"})
session.step_iteration()
csv_text, scenario_json = session.export_run()
print(f"export: {len(csv_text.splitlines())} CSV rows + scenario JSON "
      f"({len(scenario_json)} bytes)")
