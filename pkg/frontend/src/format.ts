// Unit conversion at the display boundary: geometry is mm, labels are cm.

export function mmToCmLabel(mm: number): string {
  return `${(mm / 10).toFixed(1)} cm`;
}

export function clampLength(value: number, max: number): number {
  if (!Number.isFinite(value) || value < 1) return 1;
  return Math.min(value, max);
}

export function secondsLabel(s: number): string {
  return `${s.toFixed(2)} s`;
}
