/**
 * Convert a directory of .npy array dumps plus a label CSV into an archive.
 *
 * Each array file holds one utterance as [L, T, D] or [T, D] (the latter
 * becomes a single-layer stack); the utt id is the file stem.  The CSV has
 * a `file,label` header and one row per array file; labels land on the
 * archive records as `class_label`.
 */

import { readFileSync, readdirSync } from 'node:fs';
import { join } from 'node:path';

import { writeArchive, verifyArchive } from './archive.js';
import type { LayerStack, Utterance } from './archive.js';
import { ExportError } from './errors.js';
import { decodeNpy } from './npy.js';

export interface ConvertJob {
  arraysDir: string;
  labelsPath: string;
  outDir: string;
  encoder?: string;
  frameRateHz?: number;
}

export const DEFAULT_ENCODER = 'converted';
export const DEFAULT_FRAME_RATE_HZ = 50;

/** Parse a `file,label` CSV into a filename→label map. */
export function parseLabels(text: string, source: string): Map<string, string> {
  const lines = text.split('\n').map((line) => line.trim());
  while (lines.length > 0 && lines[lines.length - 1].length === 0) {
    lines.pop();
  }
  if (lines.length === 0 || lines[0].replace(/\s/g, '') !== 'file,label') {
    throw new ExportError(`${source}: expected a 'file,label' header row`);
  }
  const labels = new Map<string, string>();
  for (let i = 1; i < lines.length; i++) {
    if (lines[i].length === 0) {
      continue;
    }
    const parts = lines[i].split(',');
    if (parts.length !== 2) {
      throw new ExportError(`${source} row ${i + 1}: expected 'file,label'`);
    }
    const file = parts[0].trim();
    const label = parts[1].trim();
    if (file.length === 0 || label.length === 0) {
      throw new ExportError(`${source} row ${i + 1}: empty file or label field`);
    }
    if (labels.has(file)) {
      throw new ExportError(`${source} row ${i + 1}: duplicate entry for '${file}'`);
    }
    labels.set(file, label);
  }
  return labels;
}

function stackFromNpy(file: string, shape: number[], data: Float32Array): LayerStack {
  if (shape.length === 2) {
    return { numLayers: 1, numFrames: shape[0], dim: shape[1], data };
  }
  if (shape.length === 3) {
    return { numLayers: shape[0], numFrames: shape[1], dim: shape[2], data };
  }
  throw new ExportError(
    `${file}: expected a [T, D] or [L, T, D] array, got shape (${shape.join(', ')})`,
  );
}

export interface ConvertSummary {
  outDir: string;
  numUtterances: number;
  numLayers: number;
  dim: number;
  frameRateHz: number;
  encoder: string;
}

/** Run a full conversion job; the output archive is re-read and verified. */
export function convertArrays(job: ConvertJob): ConvertSummary {
  let labelText: string;
  try {
    labelText = readFileSync(job.labelsPath, 'utf-8');
  } catch (err) {
    throw new ExportError(`cannot read label CSV: ${(err as Error).message}`);
  }
  const labels = parseLabels(labelText, job.labelsPath);

  let names: string[];
  try {
    names = readdirSync(job.arraysDir);
  } catch (err) {
    throw new ExportError(`cannot list array directory: ${(err as Error).message}`);
  }
  const arrayFiles = names.filter((name) => name.endsWith('.npy')).sort();
  if (arrayFiles.length === 0) {
    throw new ExportError(`no .npy files in '${job.arraysDir}'`);
  }
  for (const file of labels.keys()) {
    if (!arrayFiles.includes(file)) {
      const hint = arrayFiles.includes(`${file}.npy`) ? ` (did you mean '${file}.npy'?)` : '';
      throw new ExportError(
        `label CSV names '${file}' but '${job.arraysDir}' has no such file${hint}`,
      );
    }
  }

  const utterances: Utterance[] = [];
  let firstFile = '';
  let firstStack: LayerStack | undefined;
  for (const file of arrayFiles) {
    const label = labels.get(file);
    if (label === undefined) {
      throw new ExportError(`no label for array file '${file}'`);
    }
    const parsed = decodeNpy(readFileSync(join(job.arraysDir, file)), file);
    const stack = stackFromNpy(file, parsed.shape, parsed.data);
    if (firstStack === undefined) {
      firstFile = file;
      firstStack = stack;
    } else if (stack.numLayers !== firstStack.numLayers || stack.dim !== firstStack.dim) {
      throw new ExportError(
        `${firstFile} is L=${firstStack.numLayers}, D=${firstStack.dim} but ` +
          `${file} is L=${stack.numLayers}, D=${stack.dim}`,
      );
    }
    utterances.push({ uttId: file.slice(0, -'.npy'.length), stack, classLabel: label });
  }

  const spec = {
    encoder: job.encoder ?? DEFAULT_ENCODER,
    frameRateHz: job.frameRateHz ?? DEFAULT_FRAME_RATE_HZ,
    utterances,
  };
  writeArchive(spec, job.outDir);
  verifyArchive(spec, job.outDir);
  return {
    outDir: job.outDir,
    numUtterances: utterances.length,
    numLayers: utterances[0].stack.numLayers,
    dim: utterances[0].stack.dim,
    frameRateHz: spec.frameRateHz,
    encoder: spec.encoder,
  };
}
