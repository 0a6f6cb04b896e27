// SVG occupancy chart with 85% and 100% capacity reference lines.
// Rendering is a pure string function so it is testable without a DOM;
// decimation is display-only and never feeds back into any number shown.

export interface ChartPoint {
  index: number;
  value: number;
}

export const MAX_CHART_POINTS = 2000;

/** Thin a daily series for drawing, always keeping first and last points. */
export function decimate(values: number[], maxPoints: number = MAX_CHART_POINTS): ChartPoint[] {
  if (values.length <= maxPoints) {
    return values.map((value, index) => ({ index, value }));
  }
  const step = (values.length - 1) / (maxPoints - 1);
  const points: ChartPoint[] = [];
  for (let i = 0; i < maxPoints; i++) {
    const index = Math.round(i * step);
    points.push({ index, value: values[index] as number });
  }
  return points;
}

export interface ChartOptions {
  width?: number;
  height?: number;
  capacity?: number | null;
  title?: string;
}

/**
 * Polyline chart of an occupancy series. When a capacity is given, dashed
 * horizontal reference lines mark 85% and 100% of it.
 */
export function occupancyChartSvg(series: number[], options: ChartOptions = {}): string {
  const width = options.width ?? 720;
  const height = options.height ?? 240;
  const capacity = options.capacity ?? null;
  const pad = 28;
  const points = decimate(series);
  const top = Math.max(
    ...points.map((p) => p.value),
    capacity !== null ? capacity * 1.05 : 0,
    1e-9,
  );
  const lastIndex = Math.max(points[points.length - 1]?.index ?? 1, 1);
  const sx = (index: number) => pad + (index / lastIndex) * (width - 2 * pad);
  const sy = (value: number) => height - pad - (value / top) * (height - 2 * pad);

  const path = points.map((p) => `${sx(p.index).toFixed(1)},${sy(p.value).toFixed(1)}`).join(" ");
  const parts = [
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${width} ${height}" class="occupancy-chart">`,
    options.title ? `<title>${options.title}</title>` : "",
    `<polyline fill="none" stroke="#2563eb" stroke-width="1.5" points="${path}"/>`,
  ];
  if (capacity !== null) {
    for (const [fraction, cls] of [
      [0.85, "threshold-85"],
      [1.0, "threshold-100"],
    ] as const) {
      const y = sy(capacity * fraction).toFixed(1);
      parts.push(
        `<line class="${cls}" x1="${pad}" x2="${width - pad}" y1="${y}" y2="${y}" ` +
          `stroke="${fraction === 1 ? "#dc2626" : "#16a34a"}" stroke-dasharray="6 4"/>`,
        `<text x="${width - pad + 2}" y="${y}" font-size="10">${Math.round(fraction * 100)}%</text>`,
      );
    }
  }
  parts.push("</svg>");
  return parts.filter(Boolean).join("");
}
