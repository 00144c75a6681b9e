/**
 * SVG rendering of multi-curve figures via echarts server-side rendering.
 *
 * Rendering is read-only: curves come in fully prepared, and a null sample
 * is drawn as a gap (flagged sweep rows are never interpolated over).
 */

import * as echarts from "echarts";

export interface Curve {
  name: string;
  /** [x, y] pairs; y === null marks a gap. */
  points: Array<[number, number | null]>;
}

export interface Layout {
  title: string;
  xLabel: string;
  yLabel: string;
  xLog?: boolean;
  width?: number;
  height?: number;
}

export function renderSvg(layout: Layout, curves: Curve[]): string {
  if (curves.length === 0) {
    throw new Error("nothing to draw: no curves");
  }
  const chart = echarts.init(null, null, {
    renderer: "svg",
    ssr: true,
    width: layout.width ?? 960,
    height: layout.height ?? 640,
  });
  try {
    chart.setOption({
      animation: false,
      title: { text: layout.title, left: "center" },
      legend: { top: 28, type: "plain" },
      grid: { left: 80, right: 30, top: 70, bottom: 60 },
      xAxis: {
        type: layout.xLog ? "log" : "value",
        name: layout.xLabel,
        nameLocation: "middle",
        nameGap: 30,
      },
      yAxis: {
        type: "value",
        name: layout.yLabel,
        nameLocation: "middle",
        nameGap: 60,
      },
      series: curves.map((curve) => ({
        name: curve.name,
        type: "line",
        showSymbol: curve.points.length <= 64,
        connectNulls: false,
        data: curve.points.map(([x, y]) => [x, y]),
      })),
    });
    return chart.renderToSVGString();
  } finally {
    chart.dispose();
  }
}
