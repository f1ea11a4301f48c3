#!/usr/bin/env node
/**
 * Figure CLI.
 *
 * Either render one or more specs from a JSON file:
 *   oraclesim-figures --spec figures.json
 * where the file holds a FigureSpec object or an array of them, e.g.
 *   {"kind": "entropy", "inputs": ["sweep-metrics.csv"], "output": "entropy.svg",
 *    "groupBy": "strategy"}
 *
 * Or give one spec directly with flags:
 *   oraclesim-figures --kind detection --input metrics.csv --output det.svg
 *                     [--group-by strategy] [--title "..."]
 */

import { readFileSync } from "fs";
import { FIGURE_KINDS, FigureKind, FigureSpec, GroupKey } from "./figures";
import { render } from "./render";

function fail(message: string): never {
  console.error(`error: ${message}`);
  process.exit(1);
}

function parseArgs(argv: string[]): Map<string, string[]> {
  const args = new Map<string, string[]>();
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (!arg.startsWith("--")) fail(`unexpected argument ${arg}`);
    const value = argv[i + 1];
    if (value === undefined || value.startsWith("--")) fail(`missing value for ${arg}`);
    const key = arg.slice(2);
    args.set(key, [...(args.get(key) ?? []), value]);
    i++;
  }
  return args;
}

function specFromFlags(args: Map<string, string[]>): FigureSpec {
  const kind = args.get("kind")?.[0];
  if (!kind || !(FIGURE_KINDS as readonly string[]).includes(kind)) {
    fail(`--kind must be one of ${FIGURE_KINDS.join(", ")}`);
  }
  const inputs = args.get("input");
  if (!inputs || inputs.length === 0) fail("--input is required");
  const output = args.get("output")?.[0];
  if (!output) fail("--output is required");
  return {
    kind: kind as FigureKind,
    inputs,
    output,
    groupBy: args.get("group-by")?.[0] as GroupKey | undefined,
    title: args.get("title")?.[0],
  };
}

function specsFromFile(path: string): FigureSpec[] {
  let parsed: unknown;
  try {
    parsed = JSON.parse(readFileSync(path, "utf-8"));
  } catch (err) {
    fail(`cannot read spec file ${path}: ${(err as Error).message}`);
  }
  const list = Array.isArray(parsed) ? parsed : [parsed];
  return list.map((entry, i) => {
    const spec = entry as Partial<FigureSpec>;
    if (!spec.kind || !(FIGURE_KINDS as readonly string[]).includes(spec.kind)) {
      fail(`spec ${i}: kind must be one of ${FIGURE_KINDS.join(", ")}`);
    }
    if (!spec.inputs || spec.inputs.length === 0) fail(`spec ${i}: inputs required`);
    if (!spec.output) fail(`spec ${i}: output required`);
    return spec as FigureSpec;
  });
}

export function main(argv: string[]): number {
  const args = parseArgs(argv);
  const specFile = args.get("spec")?.[0];
  const specs = specFile ? specsFromFile(specFile) : [specFromFlags(args)];
  for (const spec of specs) {
    try {
      const out = render(spec);
      console.log(`${spec.kind} -> ${out}`);
    } catch (err) {
      console.error(`error rendering ${spec.kind}: ${(err as Error).message}`);
      return 1;
    }
  }
  return 0;
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
