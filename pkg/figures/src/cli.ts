/**
 * Shared command-line driver for the per-figure scripts.
 *
 * Usage: figN --in data.csv [more.csv ...] --out figure.svg
 * Exits 2 on schema mismatch, 1 on anything else.
 */

import { writeFileSync } from "node:fs";

import { SchemaError } from "./csv";
import { BUILDERS, FigureId } from "./figures";
import { renderSvg } from "./render";

export interface Args {
  inputs: string[];
  out: string;
}

export function parseArgs(argv: string[]): Args {
  const inputs: string[] = [];
  let out: string | undefined;
  let mode: "in" | "out" | null = null;
  for (const arg of argv) {
    if (arg === "--in") {
      mode = "in";
    } else if (arg === "--out") {
      mode = "out";
    } else if (arg.startsWith("--")) {
      throw new Error(`unknown option ${arg}`);
    } else if (mode === "in") {
      inputs.push(arg);
    } else if (mode === "out") {
      out = arg;
      mode = null;
    } else {
      throw new Error(`unexpected argument ${arg}`);
    }
  }
  if (inputs.length === 0 || !out) {
    throw new Error("usage: --in CSV [CSV ...] --out PATH");
  }
  return { inputs, out };
}

export function runFigure(figure: FigureId, argv: string[]): number {
  try {
    const args = parseArgs(argv);
    const data = BUILDERS[figure](args.inputs);
    writeFileSync(args.out, renderSvg(data.layout, data.curves));
    console.log(args.out);
    return 0;
  } catch (err) {
    if (err instanceof SchemaError) {
      console.error(`schema error: ${err.message}`);
      return 2;
    }
    console.error(String(err instanceof Error ? err.message : err));
    return 1;
  }
}
