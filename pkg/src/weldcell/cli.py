"""weldcell command line.

Subcommands:
  operator  run one scripted job against a cell (or --local for in-process)
  bench     repeat a job and print the per-step timing means
  calib     solve a tool frame from a flange-pose CSV
  serve     run broker + handler from a TOML config until interrupted
  ui        serve the browser HMI statics + /generate endpoint

Exit codes: 0 success, 2 protocol error, 3 geometry error, 4 validation error.
"""

import argparse
import sys
import time

import numpy as np

from . import calib as calibmod
from . import operator_cli
from .errors import (DegenerateCorner, DegenerateFit, DegenerateOrientation,
                     EmptySeam, EmptySelection, LengthExceedsMax, NoPlaneFound,
                     NoThreePlanes, ParallelPlanes, UndefinedBisector,
                     UnderdeterminedCalibration, WeldCellError,
                     WorkspaceViolation)
from .handler import CellConfig, LocalCell
from .msgbus import DEFAULT_TOPIC

EXIT_PROTOCOL = 2
EXIT_GEOMETRY = 3
EXIT_VALIDATION = 4

_GEOMETRY_ERRORS = (NoThreePlanes, NoPlaneFound, EmptySeam, DegenerateCorner,
                    DegenerateFit, ParallelPlanes, UndefinedBisector,
                    DegenerateOrientation, UnderdeterminedCalibration)
_VALIDATION_ERRORS = (LengthExceedsMax, EmptySelection, WorkspaceViolation)


def _exit_code(exc):
    if isinstance(exc, _GEOMETRY_ERRORS):
        return EXIT_GEOMETRY
    if isinstance(exc, _VALIDATION_ERRORS):
        return EXIT_VALIDATION
    return EXIT_PROTOCOL


def _parse_bus(value):
    host, _, port = value.rpartition(":")
    return host or "127.0.0.1", int(port)


def _add_job_arguments(parser):
    parser.add_argument("--structure", choices=["L", "U"], default="U")
    parser.add_argument("--length-h", type=float, default=600.0,
                        help="horizontal weld length, mm")
    parser.add_argument("--length-v", type=float, default=400.0,
                        help="vertical weld length, mm")
    parser.add_argument("--weld-scheme", type=int, default=1)
    parser.add_argument("--weave-scheme", type=int, default=1)
    parser.add_argument("--simulate", action="store_true",
                        help="dry run: trajectories without lighting the torch")
    parser.add_argument("--interaction-delay", type=float, default=0.0,
                        help="synthetic operator think time, s")
    parser.add_argument("--bus", default="127.0.0.1:7800", help="host:port")
    parser.add_argument("--topic", default=DEFAULT_TOPIC)
    parser.add_argument("--local", action="store_true",
                        help="spin up broker + handler in-process")
    parser.add_argument("--config", help="TOML cell config (with --local/serve)")
    parser.add_argument("--timeout", type=float, default=30.0)


def _choices_from(args):
    return operator_cli.JobChoices(
        structure=args.structure,
        length_h=args.length_h,
        length_v=args.length_v,
        weld_scheme=args.weld_scheme,
        weave_scheme=args.weave_scheme,
        simulate=args.simulate,
        interaction_delay_s=args.interaction_delay,
    )


def _with_cell(args, fn):
    """Run fn(host, port) against --bus or an in-process --local cell."""
    if args.local:
        config = CellConfig.from_toml(args.config) if args.config else CellConfig()
        with LocalCell(config) as cell:
            return fn(*cell.address)
    host, port = _parse_bus(args.bus)
    return fn(host, port)


def _cmd_operator(args):
    choices = _choices_from(args)

    def go(host, port):
        record, _ = operator_cli.run_job(
            choices, host, port, topic=args.topic, log_path=args.log,
            timeout=args.timeout, dump_program_path=args.dump_program)
        print(f"job done: h {record.horizontal_welded_distance_cm} cm, "
              f"v {record.vertical_welded_distance_cm} cm, "
              f"process {record.process_time_s:.3f} s, "
              f"capture {record.capture_time_s:.3f} s")
        if args.log:
            print(f"record appended to {args.log}")
        return 0

    return _with_cell(args, go)


def _cmd_bench(args):
    choices = _choices_from(args)

    def go(host, port):
        result = operator_cli.bench(args.repeats, choices, host, port,
                                    topic=args.topic, timeout=args.timeout)
        print(result.table_text(), end="")
        if args.csv:
            result.to_csv(args.csv)
            print(f"means written to {args.csv}")
        return 0

    return _with_cell(args, go)


def _cmd_calib(args):
    poses = calibmod.load_poses_csv(args.poses)
    orient = None
    if args.orient:
        pts = np.loadtxt(args.orient, delimiter=",", ndmin=2)
        if pts.shape != (3, 3):
            raise WeldCellError("--orient CSV must hold 3 rows of x,y,z")
        orient = pts
    frame = calibmod.solve_tool_frame(
        poses,
        orient_origin=None if orient is None else orient[0],
        x_point=None if orient is None else orient[1],
        z_point=None if orient is None else orient[2])
    off = frame.offset
    print(f"tool offset (flange frame): "
          f"[{off[0]:.4f}, {off[1]:.4f}, {off[2]:.4f}] mm")
    print("tool rotation (flange frame):")
    for row in frame.rotation:
        print(f"  [{row[0]:+.6f} {row[1]:+.6f} {row[2]:+.6f}]")
    print(f"touch residual (RMS): {frame.residual:.6f} mm")
    return 0


def _cmd_serve(args):
    config = CellConfig.from_toml(args.config) if args.config else CellConfig()
    if args.port is not None:
        config.bus_port = args.port
    if args.ws_port is not None:
        config.ws_port = args.ws_port
    from .handler import HandlerService
    from .msgbus import Broker
    broker = Broker(host=config.bus_host, port=config.bus_port,
                    ws_port=config.ws_port)
    broker.start()
    config.bus_port = broker.port
    if broker.ws_port is not None:
        config.ws_port = broker.ws_port
    service = HandlerService(config)
    service.start()
    print(f"bus on {config.bus_host}:{broker.port}"
          + (f", websocket on :{broker.ws_port}" if broker.ws_port else "")
          + f", topic {config.topic!r}")
    ui = None
    if args.ui_port is not None:
        from .uiservice import UiService
        ui = UiService(host=config.bus_host, port=args.ui_port,
                       ws_port=broker.ws_port, topic=config.topic,
                       static_dir=args.static)
        ui.start()
        print(f"HMI on http://{config.bus_host}:{ui.port}/")
    try:
        while True:
            time.sleep(0.5)
    except KeyboardInterrupt:
        pass
    finally:
        if ui is not None:
            ui.stop()
        service.stop()
        broker.stop()
    return 0


def _cmd_ui(args):
    from .uiservice import UiService
    host, _ = _parse_bus(args.bus)
    ui = UiService(host=host, port=args.port, ws_port=args.ws_port,
                   topic=args.topic, static_dir=args.static)
    ui.start()
    print(f"HMI service on http://{host}:{ui.port}/ "
          f"(websocket bus port {args.ws_port})")
    try:
        while True:
            time.sleep(0.5)
    except KeyboardInterrupt:
        pass
    finally:
        ui.stop()
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="weldcell",
        description="Online-programmed fillet welding cell, desk scale.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("operator", help="run one scripted welding job")
    _add_job_arguments(p)
    p.add_argument("--log", help="CSV job log to append to")
    p.add_argument("--dump-program",
                   help="also write the generated .wp program text here")
    p.set_defaults(fn=_cmd_operator)

    p = sub.add_parser("bench", help="timing harness over repeated jobs")
    _add_job_arguments(p)
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--csv", help="write the mean row as CSV")
    p.set_defaults(fn=_cmd_bench)

    p = sub.add_parser("calib", help="tool-frame calibration from flange poses")
    p.add_argument("--poses", required=True,
                   help="CSV: x,y,z + row-major rotation (12 columns per row)")
    p.add_argument("--orient",
                   help="optional CSV: orient origin / X point / Z point rows")
    p.set_defaults(fn=_cmd_calib)

    p = sub.add_parser("serve", help="run broker + handler (+ optional HMI)")
    p.add_argument("--config", help="TOML cell config")
    p.add_argument("--port", type=int, help="bus port override")
    p.add_argument("--ws-port", type=int, help="websocket port override")
    p.add_argument("--ui-port", type=int, help="also serve the HMI on this port")
    p.add_argument("--static", help="HMI static bundle directory")
    p.set_defaults(fn=_cmd_serve)

    p = sub.add_parser("ui", help="serve the HMI statics + /generate endpoint")
    p.add_argument("--bus", default="127.0.0.1:7800")
    p.add_argument("--ws-port", type=int, required=True)
    p.add_argument("--topic", default=DEFAULT_TOPIC)
    p.add_argument("--port", type=int, default=8780)
    p.add_argument("--static", help="static bundle directory")
    p.set_defaults(fn=_cmd_ui)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except WeldCellError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _exit_code(exc)


if __name__ == "__main__":
    sys.exit(main())
