/**
 * Figure builders: each one turns simulator CSVs (plus their run sidecars)
 * into curves and axis labels.  No physics is recomputed here; the CSVs are
 * the single source of numerical truth.
 */

import { readFileSync } from "node:fs";

import {
  SchemaError,
  SWEEP_HEADER,
  Table,
  TRAJECTORY_HEADER,
  column,
  num,
  parseCsv,
  requireHeader,
} from "./csv";
import { Curve, Layout } from "./render";

export type FigureId = "fig2" | "fig3a" | "fig3b" | "fig4" | "fig5";

export interface FigureData {
  layout: Layout;
  curves: Curve[];
}

interface Sidecar {
  params?: Record<string, number>;
  delta_omega?: number;
  [key: string]: unknown;
}

function loadTable(path: string): Table {
  return parseCsv(readFileSync(path, "utf-8"), path);
}

function loadSidecar(csvPath: string): Sidecar {
  const path = csvPath.replace(/\.csv$/, ".run.json");
  try {
    return JSON.parse(readFileSync(path, "utf-8")) as Sidecar;
  } catch {
    return {};
  }
}

function formatValue(x: number): string {
  if (x === 0) return "0";
  const abs = Math.abs(x);
  if (abs >= 1e-3 && abs < 1e4) return String(Number(x.toPrecision(6)));
  return x.toExponential(2).replace(/e([+-])0(\d)$/, "e$1$2");
}

/** Deterministic stride keeping at most `maxPoints` samples per curve. */
function downsample(
  points: Array<[number, number | null]>,
  maxPoints: number,
): Array<[number, number | null]> {
  if (points.length <= maxPoints) return points;
  const stride = Math.ceil(points.length / maxPoints);
  const out = points.filter((_, i) => i % stride === 0);
  if (out[out.length - 1] !== points[points.length - 1]) {
    out.push(points[points.length - 1]);
  }
  return out;
}

/** Quadrature evolution: one trajectory CSV per frequency shift. */
export function buildFig2(inputs: string[], maxPoints = 4000): FigureData {
  if (inputs.length === 0) throw new SchemaError("fig2 needs trajectory CSVs");
  const curves = inputs.map((path) => {
    const table = loadTable(path);
    requireHeader(table, TRAJECTORY_HEADER);
    const t = column(table, "t");
    const xc = column(table, "x_c");
    const points = t.map(
      (cell, i): [number, number | null] => [
        num(cell, table, "t"),
        num(xc[i], table, "x_c"),
      ],
    );
    const sidecar = loadSidecar(path);
    const dw = sidecar.delta_omega;
    const name =
      dw !== undefined ? `d_omega = ${formatValue(Number(dw))}` : path;
    return { name, points: downsample(points, maxPoints) };
  });
  return {
    layout: {
      title: "Cavity quadrature evolution per mechanical frequency shift",
      xLabel: "t (1/kappa)",
      yLabel: "<X_c>",
    },
    curves,
  };
}

interface SweepRows {
  axisValue: number[];
  deltaOmega: number[];
  deltaXc: Array<number | null>;
}

function loadSweep(path: string, expectedAxis: string): [SweepRows, Sidecar] {
  const table = loadTable(path);
  requireHeader(table, SWEEP_HEADER);
  const axis = column(table, "axis");
  for (const a of axis) {
    if (a !== expectedAxis) {
      throw new SchemaError(
        `${path}: sweep axis ${a} does not match expected ${expectedAxis}`,
      );
    }
  }
  const status = column(table, "status");
  const deltaXcRaw = column(table, "delta_xc");
  const rows: SweepRows = {
    axisValue: column(table, "axis_value").map((c) =>
      num(c, table, "axis_value"),
    ),
    deltaOmega: column(table, "delta_omega").map((c) =>
      num(c, table, "delta_omega"),
    ),
    // flagged rows become explicit gaps, never interpolated over
    deltaXc: deltaXcRaw.map((c, i) =>
      status[i] === "ok" ? num(c, table, "delta_xc") : null,
    ),
  };
  return [rows, loadSidecar(path)];
}

function curvesByDeltaOmega(
  rows: SweepRows,
  xOf: (axisValue: number) => number,
): Curve[] {
  const groups = new Map<number, Array<[number, number | null]>>();
  rows.axisValue.forEach((v, i) => {
    const dw = rows.deltaOmega[i];
    if (!groups.has(dw)) groups.set(dw, []);
    groups.get(dw)!.push([xOf(v), rows.deltaXc[i]]);
  });
  return [...groups.entries()]
    .sort((a, b) => a[0] - b[0])
    .map(([dw, points]) => ({
      name: `d_omega = ${formatValue(dw)}`,
      points: points.sort((a, b) => a[0] - b[0]),
    }));
}

/** Sensing signal versus dimensionless drive intensity E/delta. */
export function buildFig3a(inputs: string[]): FigureData {
  const [rows, sidecar] = loadSweep(single(inputs, "fig3a"), "drive_E");
  const delta = sidecar.params?.delta;
  if (!delta || !(delta > 0)) {
    throw new SchemaError(
      "fig3a needs the run sidecar (params.delta) to scale the drive axis",
    );
  }
  return {
    layout: {
      title: "Sensing signal vs dimensionless drive intensity",
      xLabel: "E / delta",
      yLabel: "Delta X_c",
    },
    curves: curvesByDeltaOmega(rows, (e) => e / delta),
  };
}

/** Sensing signal versus single-photon coupling at fixed E/delta. */
export function buildFig3b(inputs: string[]): FigureData {
  const [rows] = loadSweep(single(inputs, "fig3b"), "g_m");
  return {
    layout: {
      title: "Sensing signal vs optomechanical coupling",
      xLabel: "g_m (kappa)",
      yLabel: "Delta X_c",
    },
    curves: curvesByDeltaOmega(rows, (g) => g),
  };
}

/** Sensing signal versus relative shift, one curve per sideband resolution. */
export function buildFig4(inputs: string[]): FigureData {
  const [rows] = loadSweep(single(inputs, "fig4"), "sideband");
  const groups = new Map<number, Array<[number, number | null]>>();
  rows.axisValue.forEach((omega, i) => {
    if (!groups.has(omega)) groups.set(omega, []);
    groups.get(omega)!.push([rows.deltaOmega[i] / omega, rows.deltaXc[i]]);
  });
  const curves = [...groups.entries()]
    .sort((a, b) => a[0] - b[0])
    .map(([omega, points]) => ({
      name: `omega_m/kappa = ${formatValue(omega)}`,
      points: points.sort((a, b) => a[0] - b[0]),
    }));
  return {
    layout: {
      title: "Sensing signal vs relative frequency shift",
      xLabel: "delta_omega / omega_m",
      yLabel: "Delta X_c",
    },
    curves,
  };
}

/** Sensing signal versus mechanical quality factor (log axis). */
export function buildFig5(inputs: string[]): FigureData {
  const [rows] = loadSweep(single(inputs, "fig5"), "quality");
  return {
    layout: {
      title: "Sensing signal vs mechanical quality factor",
      xLabel: "Q_m",
      yLabel: "Delta X_c",
      xLog: true,
    },
    curves: curvesByDeltaOmega(rows, (q) => q),
  };
}

function single(inputs: string[], figure: string): string {
  if (inputs.length !== 1) {
    throw new SchemaError(`${figure} takes exactly one sweep CSV`);
  }
  return inputs[0];
}

export const BUILDERS: Record<FigureId, (inputs: string[]) => FigureData> = {
  fig2: buildFig2,
  fig3a: buildFig3a,
  fig3b: buildFig3b,
  fig4: buildFig4,
  fig5: buildFig5,
};
