import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { SchemaError, num, parseCsv, requireHeader } from "../src/csv";
import {
  buildFig2,
  buildFig3a,
  buildFig3b,
  buildFig4,
  buildFig5,
} from "../src/figures";
import { parseArgs, runFigure } from "../src/cli";
import { renderSvg } from "../src/render";

const SWEEP_HEADER =
  "axis,axis_value,delta_omega,delta_xc,amp_ref,amp_shifted,status";

function tempDir(): string {
  return mkdtempSync(join(tmpdir(), "qsfig-"));
}

function writeSweep(
  dir: string,
  name: string,
  axis: string,
  rows: Array<[number, number, number | "nan", string]>,
  sidecar?: object,
): string {
  const lines = [SWEEP_HEADER];
  for (const [v, dw, dxc, status] of rows) {
    lines.push(`${axis},${v},${dw},${dxc},1,1,${status}`);
  }
  const path = join(dir, name);
  writeFileSync(path, lines.join("\n") + "\n");
  if (sidecar) {
    writeFileSync(
      path.replace(/\.csv$/, ".run.json"),
      JSON.stringify(sidecar),
    );
  }
  return path;
}

function writeTrajectory(dir: string, name: string, n: number,
                         sidecar?: object): string {
  const lines = ["t,x_c,p_c,x_m,p_m"];
  for (let i = 0; i < n; i++) {
    const t = i * 0.01;
    lines.push(`${t},${Math.sin(t)},0,0,0`);
  }
  const path = join(dir, name);
  writeFileSync(path, lines.join("\n") + "\n");
  if (sidecar) {
    writeFileSync(
      path.replace(/\.csv$/, ".run.json"),
      JSON.stringify(sidecar),
    );
  }
  return path;
}

describe("csv parsing", () => {
  it("parses header and rows", () => {
    const t = parseCsv("a,b\n1,2\n3,4\n");
    expect(t.header).toEqual(["a", "b"]);
    expect(t.rows).toEqual([
      ["1", "2"],
      ["3", "4"],
    ]);
  });

  it("rejects ragged rows", () => {
    expect(() => parseCsv("a,b\n1\n")).toThrow(SchemaError);
  });

  it("rejects wrong headers", () => {
    const t = parseCsv("a,b\n1,2\n");
    expect(() => requireHeader(t, ["a", "c"])).toThrow(SchemaError);
    expect(() => requireHeader(t, ["a"])).toThrow(SchemaError);
  });

  it("accepts nan cells but rejects garbage", () => {
    const t = parseCsv("a\nnan\n");
    expect(Number.isNaN(num(t.rows[0][0], t, "a"))).toBe(true);
    const bad = parseCsv("a\npotato\n");
    expect(() => num(bad.rows[0][0], bad, "a")).toThrow(SchemaError);
  });
});

describe("fig2 trajectories", () => {
  it("one curve per file, labelled from the sidecar", () => {
    const dir = tempDir();
    const a = writeTrajectory(dir, "t1.csv", 50, { delta_omega: 0 });
    const b = writeTrajectory(dir, "t2.csv", 50, { delta_omega: 0.001 });
    const fig = buildFig2([a, b]);
    expect(fig.curves.map((c) => c.name)).toEqual([
      "d_omega = 0",
      "d_omega = 0.001",
    ]);
    expect(fig.curves[0].points.length).toBe(50);
  });

  it("downsamples deterministically and keeps the last point", () => {
    const dir = tempDir();
    const a = writeTrajectory(dir, "t.csv", 10001);
    const fig = buildFig2([a], 1000);
    expect(fig.curves[0].points.length).toBeLessThanOrEqual(1001);
    const last = fig.curves[0].points.at(-1)!;
    expect(last[0]).toBeCloseTo(100.0, 9);
    const again = buildFig2([a], 1000);
    expect(again.curves).toEqual(fig.curves);
  });

  it("rejects sweep files", () => {
    const dir = tempDir();
    const p = writeSweep(dir, "s.csv", "drive_E", [[1, 0.001, 1, "ok"]]);
    expect(() => buildFig2([p])).toThrow(SchemaError);
  });
});

describe("sweep figures", () => {
  it("fig3a scales the drive axis by delta from the sidecar", () => {
    const dir = tempDir();
    const p = writeSweep(
      dir,
      "d.csv",
      "drive_E",
      [
        [1e6, 0.001, 2.0, "ok"],
        [2e6, 0.001, 3.0, "ok"],
      ],
      { params: { delta: 100.0 } },
    );
    const fig = buildFig3a([p]);
    expect(fig.curves).toHaveLength(1);
    expect(fig.curves[0].points).toEqual([
      [1e4, 2.0],
      [2e4, 3.0],
    ]);
  });

  it("fig3a without a sidecar is a schema error", () => {
    const dir = tempDir();
    const p = writeSweep(dir, "d.csv", "drive_E", [[1e6, 0.001, 2.0, "ok"]]);
    expect(() => buildFig3a([p])).toThrow(SchemaError);
  });

  it("flagged rows become gaps, not interpolation", () => {
    const dir = tempDir();
    const p = writeSweep(dir, "g.csv", "g_m", [
      [1e-7, 0.001, 1.0, "ok"],
      [1e-6, 0.001, "nan", "error:NotStabilized"],
      [1e-5, 0.001, 3.0, "ok"],
    ]);
    const fig = buildFig3b([p]);
    expect(fig.curves[0].points).toEqual([
      [1e-7, 1.0],
      [1e-6, null],
      [1e-5, 3.0],
    ]);
  });

  it("wrong sweep axis is a schema error", () => {
    const dir = tempDir();
    const p = writeSweep(dir, "q.csv", "quality", [[1e4, 0.001, 1.0, "ok"]]);
    expect(() => buildFig3b([p])).toThrow(SchemaError);
  });

  it("fig4 groups by sideband resolution and rescales the shift", () => {
    const dir = tempDir();
    const p = writeSweep(dir, "s.csv", "sideband", [
      [50, 0.0005, 1.0, "ok"],
      [50, 0.005, 2.0, "ok"],
      [100, 0.001, 3.0, "ok"],
      [100, 0.01, 4.0, "ok"],
    ]);
    const fig = buildFig4([p]);
    expect(fig.curves.map((c) => c.name)).toEqual([
      "omega_m/kappa = 50",
      "omega_m/kappa = 100",
    ]);
    expect(fig.curves[0].points).toEqual([
      [1e-5, 1.0],
      [1e-4, 2.0],
    ]);
    expect(fig.curves[1].points).toEqual([
      [1e-5, 3.0],
      [1e-4, 4.0],
    ]);
  });

  it("fig5 uses a log axis and one curve per shift", () => {
    const dir = tempDir();
    const p = writeSweep(dir, "q.csv", "quality", [
      [1e4, 0.001, 1.0, "ok"],
      [1e5, 0.001, 2.0, "ok"],
      [1e4, 0.002, 3.0, "ok"],
      [1e5, 0.002, 4.0, "ok"],
    ]);
    const fig = buildFig5([p]);
    expect(fig.layout.xLog).toBe(true);
    expect(fig.curves.map((c) => c.name)).toEqual([
      "d_omega = 0.001",
      "d_omega = 0.002",
    ]);
  });
});

describe("rendering", () => {
  it("produces an svg with a legend entry per curve", () => {
    const svg = renderSvg({ title: "T", xLabel: "x", yLabel: "y" }, [
      { name: "curve-one", points: [[0, 1], [1, 2]] },
      { name: "curve-two", points: [[0, 2], [1, null], [2, 0]] },
    ]);
    expect(svg.startsWith("<svg")).toBe(true);
    expect(svg).toContain("curve-one");
    expect(svg).toContain("curve-two");
  });

  it("refuses an empty figure", () => {
    expect(() =>
      renderSvg({ title: "T", xLabel: "x", yLabel: "y" }, []),
    ).toThrow();
  });
});

describe("cli", () => {
  it("parses --in and --out", () => {
    expect(parseArgs(["--in", "a.csv", "b.csv", "--out", "x.svg"])).toEqual({
      inputs: ["a.csv", "b.csv"],
      out: "x.svg",
    });
    expect(() => parseArgs(["--out", "x.svg"])).toThrow();
    expect(() => parseArgs(["--in", "a.csv"])).toThrow();
    expect(() => parseArgs(["--bogus"])).toThrow();
  });

  it("renders a figure end to end and exits 0", () => {
    const dir = tempDir();
    const p = writeSweep(dir, "q.csv", "quality", [
      [1e4, 0.001, 1.0, "ok"],
      [1e5, 0.001, 2.0, "ok"],
    ]);
    const out = join(dir, "fig5.svg");
    expect(runFigure("fig5", ["--in", p, "--out", out])).toBe(0);
    expect(readFileSync(out, "utf-8")).toContain("<svg");
  });

  it("exits 2 on schema mismatch", () => {
    const dir = tempDir();
    const p = writeTrajectory(dir, "t.csv", 10);
    const out = join(dir, "fig5.svg");
    expect(runFigure("fig5", ["--in", p, "--out", out])).toBe(2);
  });
});
