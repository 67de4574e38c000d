/**
 * Audio-to-archive export: run a checkpoint over a list of WAV files and
 * write one layer stack per utterance.
 *
 * Long audio is processed in overlap-free chunks of `maxSeconds` (default
 * 60 s) whose frame outputs are concatenated.  This bounds memory but is an
 * approximation: frames near chunk joins see silence-free truncated context,
 * and a trailing remainder shorter than one front-end window is dropped.
 */

import { readFileSync } from 'node:fs';
import { basename } from 'node:path';

import { writeArchive, verifyArchive } from './archive.js';
import type { LayerStack, Utterance } from './archive.js';
import { loadCheckpoint } from './checkpoint.js';
import type { Checkpoint } from './checkpoint.js';
import { forward, frameCount, frameRateHz } from './encoder.js';
import { ExportError } from './errors.js';
import { decodeWav } from './wav.js';

export interface ExportJob {
  checkpointDir: string;
  audioListPath: string;
  outDir: string;
  /** Chunk cap for long audio, in seconds. */
  maxSeconds?: number;
  /** Hidden-state indices to keep (default: all, 0 = front-end output). */
  layers?: number[];
}

export interface AudioEntry {
  path: string;
  uttId: string;
}

export const DEFAULT_MAX_SECONDS = 60;

/**
 * Parse an audio list: one entry per line, `path [utt_id]`, with blank
 * lines and `#` comments skipped.  The utt id defaults to the file stem.
 */
export function parseAudioList(text: string): AudioEntry[] {
  const entries: AudioEntry[] = [];
  const seen = new Set<string>();
  const lines = text.split('\n');
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i].trim();
    if (line.length === 0 || line.startsWith('#')) {
      continue;
    }
    const parts = line.split(/\s+/);
    if (parts.length > 2) {
      throw new ExportError(
        `audio list line ${i + 1}: expected 'path [utt_id]', got ${parts.length} fields`,
      );
    }
    const path = parts[0];
    const uttId = parts.length === 2 ? parts[1] : stemOf(path);
    if (seen.has(uttId)) {
      throw new ExportError(`audio list line ${i + 1}: duplicate utt_id '${uttId}'`);
    }
    seen.add(uttId);
    entries.push({ path, uttId });
  }
  if (entries.length === 0) {
    throw new ExportError('audio list holds no entries');
  }
  return entries;
}

function stemOf(path: string): string {
  const name = basename(path);
  const dot = name.lastIndexOf('.');
  return dot > 0 ? name.slice(0, dot) : name;
}

/** Validate a layer selection against the stack height L. */
/** The checks that need no checkpoint: the list itself must be well formed. */
export function checkLayerOrder(layers: number[]): void {
  if (layers.length === 0) {
    throw new ExportError('layer selection is empty');
  }
  for (let i = 0; i < layers.length; i++) {
    if (!Number.isInteger(layers[i]) || layers[i] < 0) {
      throw new ExportError(`layer selection entry ${layers[i]} must be a non-negative integer`);
    }
    if (i > 0 && layers[i] <= layers[i - 1]) {
      throw new ExportError('layer selection must be strictly increasing');
    }
  }
}

export function checkLayerSelection(layers: number[], numLayers: number): void {
  checkLayerOrder(layers);
  for (const layer of layers) {
    if (layer >= numLayers) {
      throw new ExportError(`layer selection entry ${layer} out of range for L=${numLayers}`);
    }
  }
}

function selectLayers(stack: LayerStack, layers: number[] | undefined): LayerStack {
  if (layers === undefined) {
    return stack;
  }
  checkLayerSelection(layers, stack.numLayers);
  const slab = stack.numFrames * stack.dim;
  const data = new Float32Array(layers.length * slab);
  for (let i = 0; i < layers.length; i++) {
    data.set(stack.data.subarray(layers[i] * slab, (layers[i] + 1) * slab), i * slab);
  }
  return { numLayers: layers.length, numFrames: stack.numFrames, dim: stack.dim, data };
}

/** Concatenate per-chunk stacks along the frame axis. */
export function concatStacks(stacks: LayerStack[]): LayerStack {
  const { numLayers, dim } = stacks[0];
  let numFrames = 0;
  for (const stack of stacks) {
    numFrames += stack.numFrames;
  }
  const data = new Float32Array(numLayers * numFrames * dim);
  let frameBase = 0;
  for (const stack of stacks) {
    for (let layer = 0; layer < numLayers; layer++) {
      const src = stack.data.subarray(
        layer * stack.numFrames * dim,
        (layer + 1) * stack.numFrames * dim,
      );
      data.set(src, (layer * numFrames + frameBase) * dim);
    }
    frameBase += stack.numFrames;
  }
  return { numLayers, numFrames, dim, data };
}

/** Encode one clip, chunking anything longer than `maxSeconds`. */
export function encodeClip(
  checkpoint: Checkpoint,
  samples: Float64Array,
  maxSeconds: number,
  uttId: string,
): LayerStack {
  const chunkSamples = Math.floor(maxSeconds * checkpoint.config.sampleRateHz);
  if (chunkSamples < 1) {
    throw new ExportError(`chunk cap of ${maxSeconds} s is below one sample`);
  }
  if (samples.length <= chunkSamples) {
    return forward(checkpoint, samples);
  }
  const stacks: LayerStack[] = [];
  for (let start = 0; start < samples.length; start += chunkSamples) {
    const chunk = samples.subarray(start, Math.min(start + chunkSamples, samples.length));
    if (frameCount(checkpoint.config, chunk.length) === 0) {
      break; // trailing remainder shorter than one front-end window
    }
    stacks.push(forward(checkpoint, chunk));
  }
  if (stacks.length === 0) {
    throw new ExportError(`utterance '${uttId}': audio yields no frames`);
  }
  return concatStacks(stacks);
}

export interface ExportSummary {
  outDir: string;
  encoder: string;
  numUtterances: number;
  numLayers: number;
  dim: number;
  frameRateHz: number;
}

/** Run a full export job; the output archive is re-read and verified. */
export function exportHiddenStates(job: ExportJob): ExportSummary {
  const checkpoint = loadCheckpoint(job.checkpointDir);
  const maxSeconds = job.maxSeconds ?? DEFAULT_MAX_SECONDS;

  let listText: string;
  try {
    listText = readFileSync(job.audioListPath, 'utf-8');
  } catch (err) {
    throw new ExportError(`cannot read audio list: ${(err as Error).message}`);
  }
  const entries = parseAudioList(listText);

  const utterances: Utterance[] = [];
  for (const entry of entries) {
    let raw: Buffer;
    try {
      raw = readFileSync(entry.path);
    } catch (err) {
      throw new ExportError(`cannot read audio file: ${(err as Error).message}`);
    }
    const audio = decodeWav(raw, entry.path);
    if (audio.sampleRateHz !== checkpoint.config.sampleRateHz) {
      throw new ExportError(
        `${entry.path}: sampled at ${audio.sampleRateHz} Hz but the checkpoint ` +
          `expects ${checkpoint.config.sampleRateHz} Hz`,
      );
    }
    const full = encodeClip(checkpoint, audio.samples, maxSeconds, entry.uttId);
    utterances.push({ uttId: entry.uttId, stack: selectLayers(full, job.layers) });
  }

  const spec = {
    encoder: checkpoint.config.name,
    frameRateHz: frameRateHz(checkpoint.config),
    utterances,
  };
  writeArchive(spec, job.outDir);
  verifyArchive(spec, job.outDir);
  return {
    outDir: job.outDir,
    encoder: spec.encoder,
    numUtterances: utterances.length,
    numLayers: utterances[0].stack.numLayers,
    dim: utterances[0].stack.dim,
    frameRateHz: spec.frameRateHz,
  };
}
