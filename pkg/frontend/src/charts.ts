/** Tiny canvas charts: layout math is pure and unit-tested, painting is thin. */

export interface Bar {
  x: number;
  y: number;
  width: number;
  height: number;
  label: string;
  value: number;
}

export interface BarLayout {
  bars: Bar[];
  maxValue: number;
}

const PAD = { top: 18, right: 8, bottom: 24, left: 8 };

export function barLayout(
  labels: readonly string[],
  values: readonly number[],
  width: number,
  height: number,
): BarLayout {
  const n = Math.min(labels.length, values.length);
  const innerW = width - PAD.left - PAD.right;
  const innerH = height - PAD.top - PAD.bottom;
  const maxValue = n ? Math.max(...values.slice(0, n), 0) : 0;
  const bars: Bar[] = [];
  if (n === 0 || maxValue <= 0) return { bars, maxValue };
  const slot = innerW / n;
  const barW = Math.max(1, slot * 0.72);
  for (let i = 0; i < n; i++) {
    const h = (values[i] / maxValue) * innerH;
    bars.push({
      x: PAD.left + i * slot + (slot - barW) / 2,
      y: PAD.top + innerH - h,
      width: barW,
      height: h,
      label: labels[i],
      value: values[i],
    });
  }
  return { bars, maxValue };
}

export interface LinePoint {
  x: number;
  y: number;
}

export function lineLayout(
  values: readonly number[],
  width: number,
  height: number,
): LinePoint[] {
  if (values.length === 0) return [];
  const innerW = width - PAD.left - PAD.right;
  const innerH = height - PAD.top - PAD.bottom;
  const maxValue = Math.max(...values, 1e-12);
  const step = values.length > 1 ? innerW / (values.length - 1) : 0;
  return values.map((v, i) => ({
    x: PAD.left + i * step,
    y: PAD.top + innerH - (v / maxValue) * innerH,
  }));
}

export function drawBarChart(
  ctx: CanvasRenderingContext2D,
  title: string,
  labels: readonly string[],
  values: readonly number[],
  color = "#4f8edc",
): void {
  const { width, height } = ctx.canvas;
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = "#c9d2e0";
  ctx.font = "11px sans-serif";
  ctx.fillText(title, PAD.left, 12);
  const layout = barLayout(labels, values, width, height);
  ctx.fillStyle = color;
  for (const bar of layout.bars) {
    ctx.fillRect(bar.x, bar.y, bar.width, bar.height);
  }
  ctx.fillStyle = "#8a93a5";
  ctx.font = "9px sans-serif";
  for (const bar of layout.bars) {
    ctx.save();
    ctx.translate(bar.x + bar.width / 2, height - 2);
    ctx.rotate(-Math.PI / 5);
    ctx.fillText(bar.label.slice(-8), -14, 0);
    ctx.restore();
  }
}

export function drawLineChart(
  ctx: CanvasRenderingContext2D,
  title: string,
  values: readonly number[],
  markerIndex: number | null,
  color = "#64c98a",
): void {
  const { width, height } = ctx.canvas;
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = "#c9d2e0";
  ctx.font = "11px sans-serif";
  ctx.fillText(title, PAD.left, 12);
  const points = lineLayout(values, width, height);
  if (points.length === 0) return;
  ctx.strokeStyle = color;
  ctx.lineWidth = 1.5;
  ctx.beginPath();
  points.forEach((p, i) => (i === 0 ? ctx.moveTo(p.x, p.y) : ctx.lineTo(p.x, p.y)));
  ctx.stroke();
  if (markerIndex !== null && markerIndex >= 0 && markerIndex < points.length) {
    const p = points[markerIndex];
    ctx.fillStyle = "#f3c969";
    ctx.beginPath();
    ctx.arc(p.x, p.y, 3, 0, 2 * Math.PI);
    ctx.fill();
  }
}
