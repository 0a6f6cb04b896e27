import { describe, expect, it } from "vitest";

import { decimate, MAX_CHART_POINTS, occupancyChartSvg } from "../src/chart.js";

describe("decimate", () => {
  it("passes short series through unchanged", () => {
    const points = decimate([1, 2, 3]);
    expect(points).toEqual([
      { index: 0, value: 1 },
      { index: 1, value: 2 },
      { index: 2, value: 3 },
    ]);
  });

  it("caps long series at the display budget and keeps the endpoints", () => {
    const values = Array.from({ length: 9000 }, (_, i) => i * 0.5);
    const points = decimate(values);
    expect(points.length).toBe(MAX_CHART_POINTS);
    expect(points[0]).toEqual({ index: 0, value: 0 });
    expect(points[points.length - 1]).toEqual({ index: 8999, value: 8999 * 0.5 });
    for (let i = 1; i < points.length; i++) {
      expect(points[i]!.index).toBeGreaterThan(points[i - 1]!.index);
    }
  });

  it("samples true values, never interpolations", () => {
    const values = Array.from({ length: 5000 }, (_, i) => (i % 7) * 3);
    for (const p of decimate(values)) {
      expect(p.value).toBe(values[p.index]);
    }
  });
});

describe("occupancyChartSvg", () => {
  it("draws the series as a polyline", () => {
    const svg = occupancyChartSvg([5, 6, 7, 8]);
    expect(svg).toContain("<svg");
    expect(svg).toContain("<polyline");
  });

  it("marks 85% and 100% of capacity with dashed lines", () => {
    const svg = occupancyChartSvg([10, 12, 14], { capacity: 20 });
    expect(svg).toContain('class="threshold-85"');
    expect(svg).toContain('class="threshold-100"');
    expect(svg).toContain("stroke-dasharray");
    expect(svg).toContain(">85%</text>");
    expect(svg).toContain(">100%</text>");
  });

  it("places the reference lines at the right heights", () => {
    const height = 240;
    const pad = 28;
    const capacity = 20;
    const svg = occupancyChartSvg([10, 20], { capacity, height });
    // top of scale = capacity * 1.05 (series max is below capacity)
    const top = capacity * 1.05;
    const y = (value: number) => height - pad - (value / top) * (height - 2 * pad);
    expect(svg).toContain(`y1="${y(capacity).toFixed(1)}"`);
    expect(svg).toContain(`y1="${y(0.85 * capacity).toFixed(1)}"`);
  });

  it("omits reference lines without a capacity", () => {
    const svg = occupancyChartSvg([1, 2, 3]);
    expect(svg).not.toContain("threshold-85");
  });
});
