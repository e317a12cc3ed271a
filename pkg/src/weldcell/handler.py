"""Robot-handler service: capture -> geometry -> program load -> execution.

The handler owns the robot and the (synthetic) camera. It reacts to operator
commands on the bus and answers with the matching handler-side messages,
walking the job state machine AwaitingInterface -> Ready -> Captured ->
ProgramLoaded -> Welding -> Done -> Ready. Any fault publishes an ErrorReport
and falls back to Ready; a fresh InterfaceReady always restarts a clean job.
Messages are processed strictly one at a time.
"""

import os
import sys
import threading
import time
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .errors import ConnectionLost, IllegalState, LoadError, WeldCellError
from .msgbus import (DEFAULT_TOPIC, OPERATOR_COMMANDS, Broker, BusClient,
                     Command)
from .planefind import Plane, RansacConfig, extract_planes
from .robotsim import (DEFAULT_SAMPLE_RATE, DEFAULT_WELD_SPEED, NO_WEAVE,
                       Robot, RobotState, V_JMAX_MM_S, WeaveScheme)
from .scene import (SamplingSpec, StructureSpec, generate_structure,
                    load_cloud, u_canonical_sampling, u_canonical_spec)
from .seamgeom import (DEFAULT_BAND_MM, DEFAULT_GAP_TOL_MM, SeamSegment,
                       extract_seams)

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

DOWNSAMPLE_MAX_POINTS = 5000  # cloud size shipped inside AnswerCapture


class HandlerState(Enum):
    AwaitingInterface = "AwaitingInterface"
    Ready = "Ready"
    Captured = "Captured"
    ProgramLoaded = "ProgramLoaded"
    Welding = "Welding"
    Done = "Done"


# --- capture payload ---------------------------------------------------------

@dataclass
class CapturePayload:
    """Geometry shipped to the operator in AnswerCapture."""

    planes: list            # 3 fitted Plane
    corner: np.ndarray
    seams: list             # [horizontal, vertical] SeamSegment
    cloud_points: np.ndarray  # downsampled (M, 3) for display / centroid
    capture_time: float     # s spent acquiring + computing

    def __post_init__(self):
        self.corner = np.asarray(self.corner, dtype=float).reshape(3)
        self.cloud_points = np.asarray(self.cloud_points, dtype=float).reshape(-1, 3)
        classes = [s.orientation_class for s in self.seams]
        if classes != ["horizontal", "vertical"]:
            raise ValueError(f"need [horizontal, vertical] seams, got {classes}")

    @property
    def horizontal(self):
        return self.seams[0]

    @property
    def vertical(self):
        return self.seams[1]

    def to_json_payload(self):
        return {
            "planes": [{"normal": p.normal.tolist(), "d": p.d} for p in self.planes],
            "corner": self.corner.tolist(),
            "seams": [{
                "corner": s.corner.tolist(),
                "direction": s.direction.tolist(),
                "length_max": s.length_max,
                "plane_pair": list(s.plane_pair),
                "orientation_class": s.orientation_class,
            } for s in self.seams],
            "cloud": self.cloud_points.tolist(),
            "capture_time": self.capture_time,
        }

    @classmethod
    def from_json_payload(cls, obj):
        planes = [Plane(np.array(p["normal"], dtype=float), p["d"])
                  for p in obj["planes"]]
        seams = [SeamSegment(corner=np.array(s["corner"], dtype=float),
                             direction=np.array(s["direction"], dtype=float),
                             length_max=float(s["length_max"]),
                             plane_pair=tuple(s["plane_pair"]),
                             orientation_class=s["orientation_class"])
                 for s in obj["seams"]]
        return cls(planes=planes, corner=np.array(obj["corner"], dtype=float),
                   seams=seams, cloud_points=np.array(obj["cloud"], dtype=float),
                   capture_time=float(obj["capture_time"]))


# --- scene sources -------------------------------------------------------------

@dataclass(frozen=True)
class SyntheticSource:
    spec: StructureSpec
    sampling: SamplingSpec

    def acquire(self):
        cloud, _ = generate_structure(self.spec, self.sampling)
        return cloud

    def check(self):
        return True


@dataclass(frozen=True)
class FileSource:
    path: str

    def acquire(self):
        return load_cloud(self.path)

    def check(self):
        return os.path.exists(self.path)


def capture_once(source, ransac=None, band=DEFAULT_BAND_MM,
                 gap_tol=DEFAULT_GAP_TOL_MM, downsample_max=DOWNSAMPLE_MAX_POINTS):
    """Acquire a cloud and compute the full capture geometry.

    Returns (cloud, CapturePayload). Deterministic for a synthetic source
    with a fixed seed, except for the measured capture_time.
    """
    ransac = ransac or RansacConfig()
    t0 = time.perf_counter()
    cloud = source.acquire()
    fitted = extract_planes(cloud, ransac)
    planes = [plane for plane, _ in fitted]
    inlier_points = [cloud.points[idx] for _, idx in fitted]
    corner, seams = extract_seams(planes, inlier_points, cloud.points,
                                  band=band, gap_tol=gap_tol)
    stride = max(1, -(-len(cloud.points) // downsample_max))  # ceil division
    payload = CapturePayload(planes=planes, corner=corner, seams=seams,
                             cloud_points=cloud.points[::stride],
                             capture_time=time.perf_counter() - t0)
    return cloud, payload


# --- configuration ---------------------------------------------------------------

@dataclass
class CellConfig:
    """Everything the handler needs, loadable from a TOML file."""

    bus_host: str = "127.0.0.1"
    bus_port: int = 7800
    ws_port: int | None = None
    topic: str = DEFAULT_TOPIC
    scene: object = None  # SyntheticSource | FileSource
    ransac: RansacConfig = field(default_factory=RansacConfig)
    band: float = DEFAULT_BAND_MM
    gap_tol: float = DEFAULT_GAP_TOL_MM
    downsample_max: int = DOWNSAMPLE_MAX_POINTS
    robot_home: tuple = (0.0, -200.0, 500.0)
    v_jmax: float = V_JMAX_MM_S
    sample_rate: float = DEFAULT_SAMPLE_RATE
    weld_schemes: dict = field(default_factory=lambda: {1: DEFAULT_WELD_SPEED})
    weave_schemes: dict = field(
        default_factory=lambda: {0: NO_WEAVE,
                                 1: WeaveScheme(id=1, amplitude=2.0, frequency=0.05)})

    def __post_init__(self):
        if self.scene is None:
            self.scene = SyntheticSource(u_canonical_spec(), u_canonical_sampling())

    def weld_speed_for(self, scheme_id):
        return self.weld_schemes.get(scheme_id, DEFAULT_WELD_SPEED)

    def weave_for(self, scheme_id):
        return self.weave_schemes.get(scheme_id, NO_WEAVE)

    @classmethod
    def from_toml(cls, path):
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
        cfg = cls()
        bus = doc.get("bus", {})
        cfg.bus_host = bus.get("host", cfg.bus_host)
        cfg.bus_port = bus.get("port", cfg.bus_port)
        cfg.ws_port = bus.get("ws_port", cfg.ws_port)
        cfg.topic = bus.get("topic", cfg.topic)

        sc = doc.get("scene", {})
        if "file" in sc:
            cfg.scene = FileSource(sc["file"])
        elif sc:
            spec = StructureSpec(
                kind=sc.get("kind", "U"),
                horizontal_extent=sc.get("horizontal", 600.0),
                vertical_extent=sc.get("vertical", 400.0),
                plate_offsets=sc.get("plate_offsets", 200.0))
            sampling = SamplingSpec(
                points_per_plane=sc.get("points_per_plane", 15000),
                noise_sigma=sc.get("noise_sigma", 0.3),
                outlier_fraction=sc.get("outlier_fraction", 0.1),
                rng_seed=sc.get("seed", 7))
            cfg.scene = SyntheticSource(spec, sampling)

        ra = doc.get("ransac", {})
        if ra:
            cfg.ransac = replace(
                RansacConfig(),
                max_iterations=ra.get("max_iterations", 500),
                inlier_threshold=ra.get("inlier_threshold", 1.0),
                min_inliers=ra.get("min_inliers", 50),
                rng_seed=ra.get("seed", 0),
                refine=ra.get("refine", True))

        geo = doc.get("geometry", {})
        cfg.band = geo.get("band", cfg.band)
        cfg.gap_tol = geo.get("gap_tol", cfg.gap_tol)

        rb = doc.get("robot", {})
        cfg.robot_home = tuple(rb.get("home", list(cfg.robot_home)))
        cfg.v_jmax = rb.get("v_jmax", cfg.v_jmax)
        cfg.sample_rate = rb.get("sample_rate", cfg.sample_rate)

        schemes = doc.get("schemes", {})
        for key, speed in schemes.get("weld", {}).items():
            cfg.weld_schemes[int(key)] = float(speed)
        for key, spec in schemes.get("weave", {}).items():
            cfg.weave_schemes[int(key)] = WeaveScheme(
                id=int(key), amplitude=float(spec["amplitude"]),
                frequency=float(spec["frequency"]))
        return cfg


# --- the service -------------------------------------------------------------------

class HandlerService:
    """Bus-driven orchestration of one robot cell."""

    def __init__(self, config=None, robot=None):
        self.config = config or CellConfig()
        self.robot = robot or Robot(home_position=self.config.robot_home,
                                    v_jmax=self.config.v_jmax)
        self.state = HandlerState.AwaitingInterface
        self.last_payload = None
        self.last_trace = None
        self._client = None
        self._thread = None
        self._stop = threading.Event()

    def start(self):
        cfg = self.config
        self._client = BusClient(cfg.bus_host, cfg.bus_port,
                                 default_topic=cfg.topic, client_id="handler")
        self._client.connect()
        self._client.subscribe()
        self._thread = threading.Thread(target=self._loop, daemon=True)
        self._thread.start()
        return self

    def stop(self):
        self._stop.set()
        if self._client is not None:
            self._client.close()
        if self._thread is not None:
            self._thread.join(timeout=5.0)

    def __enter__(self):
        return self.start()

    def __exit__(self, *exc):
        self.stop()

    def _loop(self):
        while not self._stop.is_set():
            try:
                msg = self._client.receive(timeout=0.1)
            except ConnectionLost:
                return
            if msg is None or msg.command not in OPERATOR_COMMANDS:
                continue
            self._dispatch(msg)

    def _publish(self, command, payload=None):
        try:
            self._client.publish(command, payload or {})
        except ConnectionLost:
            pass

    def _error(self, code, detail):
        self._publish(Command.ErrorReport, {"code": code, "detail": detail})
        if self.state is not HandlerState.AwaitingInterface:
            self._reset_robot()
            self.state = HandlerState.Ready

    def _reset_robot(self):
        if self.robot.state in (RobotState.ProgramLoaded, RobotState.Finished):
            self.robot.go_home()

    def _dispatch(self, msg):
        try:
            handler = {
                Command.InterfaceReady: self._on_interface_ready,
                Command.Capture: self._on_capture,
                Command.ProgramUpload: self._on_upload,
                Command.Welding: self._on_welding,
                Command.Pickup: self._on_pickup,
            }[msg.command]
            handler(msg)
        except IllegalState as exc:
            self._error("IllegalState", str(exc))
        except WeldCellError as exc:
            self._error(type(exc).__name__, str(exc))

    def _require(self, *states):
        if self.state not in states:
            allowed = "/".join(s.value for s in states)
            raise IllegalState(
                f"handler is {self.state.value}, command needs {allowed}")

    def _on_interface_ready(self, msg):
        # the "necessary checks": robot responds and the scene source exists
        if self.robot.state is RobotState.Disconnected:
            self.robot.connect()
        self._reset_robot()
        if not self.config.scene.check():
            self._error("SceneUnavailable", "configured scene source is missing")
            return
        self.last_payload = None
        self.state = HandlerState.Ready
        self._publish(Command.HandlerRobotReady,
                      {"robot_state": self.robot.state.value})

    def _on_capture(self, msg):
        self._require(HandlerState.Ready, HandlerState.Captured)
        cfg = self.config
        _, payload = capture_once(cfg.scene, ransac=cfg.ransac, band=cfg.band,
                                  gap_tol=cfg.gap_tol,
                                  downsample_max=cfg.downsample_max)
        self.last_payload = payload
        self.state = HandlerState.Captured
        self._publish(Command.AnswerCapture, payload.to_json_payload())

    def _on_upload(self, msg):
        self._require(HandlerState.Captured)
        text = msg.payload.get("text", "")
        try:
            self.robot.load_program(text)
        except LoadError as exc:
            self._publish(Command.FTP_NO_OK, {"detail": str(exc)})
            return
        self.state = HandlerState.ProgramLoaded
        self._publish(Command.FTP_OK,
                      {"program_name": msg.payload.get("program_name", "")})

    def _on_welding(self, msg):
        self._require(HandlerState.ProgramLoaded)
        self.state = HandlerState.Welding
        cfg = self.config
        params = self.robot.program.params
        trace = self.robot.execute(
            weld_scheme=params.weld_scheme,
            weave=cfg.weave_for(params.weave_scheme),
            weld_speed=cfg.weld_speed_for(params.weld_scheme),
            sample_rate=cfg.sample_rate)
        self.last_trace = trace
        self.state = HandlerState.Done
        self._publish(Command.EndWelding,
                      {"total_s": trace.total, "simulate": params.simulate})

    def _on_pickup(self, msg):
        self._require(HandlerState.Done)
        self.robot.go_home()
        self.state = HandlerState.Ready
        self._publish(Command.Pickuped, {"robot_state": self.robot.state.value})


class LocalCell:
    """Broker + robot + handler wired together in-process (tests, demos,
    ``--local`` CLI runs)."""

    def __init__(self, config=None, with_ws=False):
        self.config = config or CellConfig()
        self.broker = Broker(host=self.config.bus_host, port=0,
                             ws_port=0 if with_ws else None)
        self.handler = None

    def start(self):
        self.broker.start()
        self.config.bus_port = self.broker.port
        if self.broker.ws_port is not None:
            self.config.ws_port = self.broker.ws_port
        self.handler = HandlerService(self.config)
        self.handler.start()
        return self

    def stop(self):
        if self.handler is not None:
            self.handler.stop()
        self.broker.stop()

    def __enter__(self):
        return self.start()

    def __exit__(self, *exc):
        self.stop()

    @property
    def address(self):
        return (self.config.bus_host, self.config.bus_port)
