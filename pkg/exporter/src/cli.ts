#!/usr/bin/env node
/**
 * Command-line entry point.
 *
 * Exactly one input mode per invocation:
 *
 *   mp3s-export --checkpoint CKPT --audio-list LIST.txt --out DIR
 *               [--max-seconds 60] [--layers 0,4,8]
 *   mp3s-export --arrays-dir DIR --labels LABELS.csv --out DIR
 *               [--encoder-name NAME] [--frame-rate 50]
 *
 * Exit codes: 0 success, 1 usage error, 2 data error (unreadable or
 * malformed input, or a produced archive failing verification).
 */

import { pathToFileURL } from 'node:url';
import { parseArgs } from 'node:util';

import { convertArrays } from './convert.js';
import { ExportError } from './errors.js';
import { checkLayerOrder, exportHiddenStates, DEFAULT_MAX_SECONDS } from './export.js';

const USAGE = `usage:
  mp3s-export --checkpoint CKPT --audio-list LIST.txt --out DIR
              [--max-seconds ${DEFAULT_MAX_SECONDS}] [--layers 0,4,8]
  mp3s-export --arrays-dir DIR --labels LABELS.csv --out DIR
              [--encoder-name NAME] [--frame-rate 50]`;

export interface Io {
  out: (line: string) => void;
  err: (line: string) => void;
}

function parseLayerList(text: string): number[] {
  const layers = text.split(',').map((part) => {
    const n = Number(part.trim());
    if (!Number.isInteger(n)) {
      throw new ExportError(`--layers entry '${part.trim()}' is not an integer`);
    }
    return n;
  });
  checkLayerOrder(layers);
  return layers;
}

function utterances(n: number): string {
  return n === 1 ? '1 utterance' : `${n} utterances`;
}

function parsePositiveNumber(text: string, flag: string): number {
  const n = Number(text);
  if (!Number.isFinite(n) || n <= 0) {
    throw new ExportError(`${flag} must be a positive number, got '${text}'`);
  }
  return n;
}

export function main(argv: string[], io: Io): number {
  let values: Record<string, string | boolean | undefined>;
  try {
    ({ values } = parseArgs({
      args: argv,
      options: {
        checkpoint: { type: 'string' },
        'audio-list': { type: 'string' },
        'arrays-dir': { type: 'string' },
        labels: { type: 'string' },
        out: { type: 'string' },
        'max-seconds': { type: 'string' },
        layers: { type: 'string' },
        'encoder-name': { type: 'string' },
        'frame-rate': { type: 'string' },
        help: { type: 'boolean' },
      },
      allowPositionals: false,
    }));
  } catch (err) {
    io.err(`error: ${(err as Error).message}`);
    io.err(USAGE);
    return 1;
  }
  if (values.help) {
    io.out(USAGE);
    return 0;
  }

  const checkpointMode = values.checkpoint !== undefined || values['audio-list'] !== undefined;
  const arraysMode = values['arrays-dir'] !== undefined || values.labels !== undefined;
  if (checkpointMode === arraysMode) {
    io.err('error: pass either --checkpoint/--audio-list or --arrays-dir/--labels');
    io.err(USAGE);
    return 1;
  }
  if (values.out === undefined) {
    io.err('error: --out is required');
    io.err(USAGE);
    return 1;
  }

  // Bad flag values are usage errors; failures on input files come later.
  let maxSeconds: number | undefined;
  let layers: number[] | undefined;
  let frameRateHz: number | undefined;
  try {
    if (values['max-seconds'] !== undefined) {
      maxSeconds = parsePositiveNumber(values['max-seconds'] as string, '--max-seconds');
    }
    if (values.layers !== undefined) {
      layers = parseLayerList(values.layers as string);
    }
    if (values['frame-rate'] !== undefined) {
      frameRateHz = parsePositiveNumber(values['frame-rate'] as string, '--frame-rate');
    }
  } catch (err) {
    io.err(`error: ${(err as Error).message}`);
    io.err(USAGE);
    return 1;
  }

  try {
    if (checkpointMode) {
      if (values.checkpoint === undefined || values['audio-list'] === undefined) {
        io.err('error: checkpoint mode needs both --checkpoint and --audio-list');
        io.err(USAGE);
        return 1;
      }
      if (values['encoder-name'] !== undefined || frameRateHz !== undefined) {
        io.err('error: --encoder-name/--frame-rate apply only to --arrays-dir mode');
        io.err(USAGE);
        return 1;
      }
      const summary = exportHiddenStates({
        checkpointDir: values.checkpoint as string,
        audioListPath: values['audio-list'] as string,
        outDir: values.out as string,
        maxSeconds,
        layers,
      });
      io.out(
        `wrote ${utterances(summary.numUtterances)} (L=${summary.numLayers}, ` +
          `D=${summary.dim}, ${summary.frameRateHz} Hz, encoder '${summary.encoder}') ` +
          `to ${summary.outDir}`,
      );
    } else {
      if (values['arrays-dir'] === undefined || values.labels === undefined) {
        io.err('error: array mode needs both --arrays-dir and --labels');
        io.err(USAGE);
        return 1;
      }
      if (maxSeconds !== undefined || layers !== undefined) {
        io.err('error: --max-seconds/--layers apply only to --checkpoint mode');
        io.err(USAGE);
        return 1;
      }
      const summary = convertArrays({
        arraysDir: values['arrays-dir'] as string,
        labelsPath: values.labels as string,
        outDir: values.out as string,
        encoder: values['encoder-name'] as string | undefined,
        frameRateHz,
      });
      io.out(
        `wrote ${utterances(summary.numUtterances)} (L=${summary.numLayers}, ` +
          `D=${summary.dim}, ${summary.frameRateHz} Hz, encoder '${summary.encoder}') ` +
          `to ${summary.outDir}`,
      );
    }
  } catch (err) {
    if (err instanceof ExportError) {
      io.err(`error: ${err.message}`);
      return 2;
    }
    throw err;
  }
  return 0;
}

// Invoke only when run as a script, not when imported by tests.
const isEntryPoint =
  process.argv[1] !== undefined && import.meta.url === pathToFileURL(process.argv[1]).href;
if (isEntryPoint) {
  process.exitCode = main(process.argv.slice(2), {
    out: (line) => process.stdout.write(line + '\n'),
    err: (line) => process.stderr.write(line + '\n'),
  });
}
