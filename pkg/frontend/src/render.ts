// Orthographic point-sprite rendering of the capture cloud: rotate the
// points with an orbit (yaw about the vertical z axis, then pitch about the
// screen x axis), drop depth, scale to the canvas. Pure math kept separate
// from the canvas calls so it is testable.

export interface ViewParams {
  yawDeg: number;
  pitchDeg: number;
  scale: number; // px per mm
  centerX: number; // canvas px of the cloud centroid
  centerY: number;
}

export function cloudCentroid(points: number[][]): [number, number, number] {
  let x = 0;
  let y = 0;
  let z = 0;
  for (const p of points) {
    x += p[0];
    y += p[1];
    z += p[2];
  }
  const n = Math.max(points.length, 1);
  return [x / n, y / n, z / n];
}

export function fitView(
  points: number[][],
  width: number,
  height: number,
): ViewParams {
  let radius = 1;
  const c = cloudCentroid(points);
  for (const p of points) {
    const d = Math.hypot(p[0] - c[0], p[1] - c[1], p[2] - c[2]);
    if (d > radius) radius = d;
  }
  return {
    yawDeg: -35,
    pitchDeg: -60,
    scale: (0.45 * Math.min(width, height)) / radius,
    centerX: width / 2,
    centerY: height / 2,
  };
}

// screen coordinates, one (x, y) pair per point
export function projectPoints(
  points: number[][],
  view: ViewParams,
  centroid?: [number, number, number],
): Float32Array {
  const c = centroid ?? cloudCentroid(points);
  const yaw = (view.yawDeg * Math.PI) / 180;
  const pitch = (view.pitchDeg * Math.PI) / 180;
  const cy = Math.cos(yaw);
  const sy = Math.sin(yaw);
  const cp = Math.cos(pitch);
  const sp = Math.sin(pitch);
  const out = new Float32Array(points.length * 2);
  for (let i = 0; i < points.length; i++) {
    const x = points[i][0] - c[0];
    const y = points[i][1] - c[1];
    const z = points[i][2] - c[2];
    // yaw about z
    const rx = cy * x - sy * y;
    const ry = sy * x + cy * y;
    // pitch about the screen x axis; screen y grows downward
    const sz = cp * z - sp * ry;
    out[2 * i] = view.centerX + view.scale * rx;
    out[2 * i + 1] = view.centerY - view.scale * sz;
  }
  return out;
}

export function drawCloud(
  ctx: CanvasRenderingContext2D,
  points: number[][],
  view: ViewParams,
  width: number,
  height: number,
): void {
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = "#0b2a4a";
  ctx.fillRect(0, 0, width, height);
  const xy = projectPoints(points, view);
  ctx.fillStyle = "#7fd2ff";
  for (let i = 0; i < points.length; i++) {
    ctx.fillRect(xy[2 * i], xy[2 * i + 1], 2, 2);
  }
}
