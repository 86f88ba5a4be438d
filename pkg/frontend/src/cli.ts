#!/usr/bin/env node
/**
 * Figure CLI.
 *
 *   rough-symplectic-plots --kind loglog-error --input convergence-midpoint.csv \
 *       --slopes 0.2,0.5 --output error.svg
 *
 * Flags: --kind {loglog-error|area-snapshots|phase-trajectory|drift},
 * --input (repeatable), --slopes (comma-separated, loglog-error only),
 * --output. Exit codes: 0 success, 1 input data unreadable or off-schema,
 * 2 usage error.
 */

import { parseArgs } from "node:util";
import { pathToFileURL } from "node:url";

import { CsvError } from "./csv.js";
import { FIGURE_KINDS, render, type FigureKind } from "./figures.js";

export const EXIT_OK = 0;
export const EXIT_DATA = 1;
export const EXIT_USAGE = 2;

const USAGE = `usage: rough-symplectic-plots --kind KIND --input FILE [--input FILE ...]
                              [--slopes S1,S2,...] --output FILE.svg

kinds: ${FIGURE_KINDS.join(", ")}
  loglog-error      convergence CSVs (path_index,h,max_error); one line per
                    path, dashed guide lines at the --slopes values
  area-snapshots    one area CSV (scheme,t,area); per-snapshot square
                    outlines with side sqrt(area), one panel per time
  phase-trajectory  trajectory CSVs (t,y1,y2[,...]); y2 against y1
  drift             drift CSVs (t,drift); drift against time

--slopes applies to loglog-error and is ignored by the other kinds.
`;

function fail(stream: NodeJS.WriteStream, message: string): void {
  stream.write(message.endsWith("\n") ? message : message + "\n");
}

export function main(argv: string[]): number {
  let values: {
    kind?: string;
    input?: string[];
    slopes?: string;
    output?: string;
    help?: boolean;
  };
  try {
    ({ values } = parseArgs({
      args: argv,
      options: {
        kind: { type: "string" },
        input: { type: "string", multiple: true },
        slopes: { type: "string" },
        output: { type: "string" },
        help: { type: "boolean", short: "h" },
      },
      allowPositionals: false,
    }));
  } catch (err) {
    fail(process.stderr, `error: ${(err as Error).message}`);
    return EXIT_USAGE;
  }

  if (values.help) {
    process.stdout.write(USAGE);
    return EXIT_OK;
  }
  const kind = values.kind;
  if (kind === undefined || !(FIGURE_KINDS as readonly string[]).includes(kind)) {
    fail(
      process.stderr,
      kind === undefined
        ? "error: --kind is required"
        : `error: unknown figure kind "${kind}" (expected one of: ${FIGURE_KINDS.join(", ")})`,
    );
    return EXIT_USAGE;
  }
  const inputs = values.input ?? [];
  if (inputs.length === 0) {
    fail(process.stderr, "error: at least one --input is required");
    return EXIT_USAGE;
  }
  if (values.output === undefined || values.output === "") {
    fail(process.stderr, "error: --output is required");
    return EXIT_USAGE;
  }
  const slopes: number[] = [];
  for (const token of (values.slopes ?? "").split(",")) {
    if (token.trim() === "") continue;
    const slope = Number(token);
    if (!Number.isFinite(slope)) {
      fail(process.stderr, `error: --slopes: "${token}" is not a number`);
      return EXIT_USAGE;
    }
    slopes.push(slope);
  }

  try {
    render({ kind: kind as FigureKind, inputs, slopes, output: values.output });
  } catch (err) {
    if (err instanceof CsvError) {
      fail(process.stderr, `error: ${err.message}`);
      return EXIT_DATA;
    }
    if (err instanceof Error && "code" in err) {
      // fs errors: missing input, unwritable output directory, ...
      fail(process.stderr, `error: ${err.message}`);
      return EXIT_DATA;
    }
    fail(process.stderr, `error: ${(err as Error).message}`);
    return EXIT_USAGE;
  }
  process.stdout.write(`wrote ${values.output}\n`);
  return EXIT_OK;
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url === pathToFileURL(process.argv[1]).href;
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
