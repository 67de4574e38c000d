/**
 * Writer (and self-check reader) for representation archives.
 *
 * An archive is a directory holding `manifest.json` plus one binary tensor
 * file per utterance under `tensors/`.  Each tensor file stores a full
 * layer stack for one utterance:
 *
 *     magic `MP3SR\0` | u8 version=1 | u32 L | u32 T | u32 D | L*T*D float32
 *
 * All integers and floats are little-endian; values are row-major [L][T][D].
 * The manifest carries `encoder`, `num_layers`, `dim`, `frame_rate_hz` and a
 * `records` list with per-utterance `utt_id`, `tensor` path and optional
 * `speaker` / `class_label` / `segments` metadata.
 */

import { mkdirSync, readFileSync, renameSync, writeFileSync } from 'node:fs';
import { join } from 'node:path';

import { ExportError } from './errors.js';

export const MAGIC = 'MP3SR\0';
export const FORMAT_VERSION = 1;
export const HEADER_BYTES = 6 + 1 + 4 + 4 + 4;

const UTT_ID_RE = /^[A-Za-z0-9._-]+$/;

/** One utterance's layer stack: row-major [L][T][D] float32 values. */
export interface LayerStack {
  numLayers: number;
  numFrames: number;
  dim: number;
  /** Row-major [L][T][D]; length numLayers * numFrames * dim. */
  data: Float32Array;
}

export interface Utterance {
  uttId: string;
  stack: LayerStack;
  speaker?: string;
  classLabel?: string;
}

export interface ArchiveSpec {
  encoder: string;
  frameRateHz: number;
  utterances: Utterance[];
}

/** Validate a stack's shape/length and that every value is finite. */
export function checkStack(uttId: string, stack: LayerStack): void {
  const { numLayers, numFrames, dim, data } = stack;
  if (numLayers < 1 || numFrames < 1 || dim < 1) {
    throw new ExportError(
      `utterance '${uttId}': degenerate stack shape [${numLayers}, ${numFrames}, ${dim}]`,
    );
  }
  const expected = numLayers * numFrames * dim;
  if (data.length !== expected) {
    throw new ExportError(
      `utterance '${uttId}': stack declares [${numLayers}, ${numFrames}, ${dim}] ` +
        `(${expected} values) but holds ${data.length}`,
    );
  }
  for (let i = 0; i < data.length; i++) {
    if (!Number.isFinite(data[i])) {
      const layer = Math.floor(i / (numFrames * dim));
      const frame = Math.floor(i / dim) % numFrames;
      throw new ExportError(
        `utterance '${uttId}': non-finite value at layer ${layer}, frame ${frame}, ` +
          `dim ${i % dim}`,
      );
    }
  }
}

/** Serialize one stack to tensor-file bytes (header + little-endian floats). */
export function encodeTensor(stack: LayerStack): Buffer {
  const buf = Buffer.alloc(HEADER_BYTES + 4 * stack.data.length);
  buf.write(MAGIC, 0, 'latin1');
  buf.writeUInt8(FORMAT_VERSION, 6);
  buf.writeUInt32LE(stack.numLayers, 7);
  buf.writeUInt32LE(stack.numFrames, 11);
  buf.writeUInt32LE(stack.dim, 15);
  for (let i = 0; i < stack.data.length; i++) {
    buf.writeFloatLE(stack.data[i], HEADER_BYTES + 4 * i);
  }
  return buf;
}

/** Parse tensor-file bytes back into a stack (inverse of encodeTensor). */
export function decodeTensor(raw: Buffer, uttId: string): LayerStack {
  if (raw.length < HEADER_BYTES) {
    throw new ExportError(`utterance '${uttId}': tensor file shorter than header`);
  }
  if (raw.toString('latin1', 0, 6) !== MAGIC) {
    throw new ExportError(`utterance '${uttId}': bad magic`);
  }
  const version = raw.readUInt8(6);
  if (version !== FORMAT_VERSION) {
    throw new ExportError(`utterance '${uttId}': unsupported format version ${version}`);
  }
  const numLayers = raw.readUInt32LE(7);
  const numFrames = raw.readUInt32LE(11);
  const dim = raw.readUInt32LE(15);
  const expected = HEADER_BYTES + 4 * numLayers * numFrames * dim;
  if (raw.length !== expected) {
    throw new ExportError(
      `utterance '${uttId}': header declares L=${numLayers}, T=${numFrames}, D=${dim} ` +
        `(${expected} bytes) but file holds ${raw.length} bytes`,
    );
  }
  const data = new Float32Array(numLayers * numFrames * dim);
  for (let i = 0; i < data.length; i++) {
    data[i] = raw.readFloatLE(HEADER_BYTES + 4 * i);
  }
  return { numLayers, numFrames, dim, data };
}

/**
 * Write an archive directory; byte-deterministic for identical input.
 *
 * Everything is validated up front and tensor files are written before the
 * manifest, which lands last via an atomic rename — a crashed export never
 * leaves a directory that parses as a complete archive.
 */
export function writeArchive(spec: ArchiveSpec, outDir: string): void {
  if (!(spec.frameRateHz > 0)) {
    throw new ExportError(`frame_rate_hz must be positive, got ${spec.frameRateHz}`);
  }
  if (spec.utterances.length === 0) {
    throw new ExportError('refusing to write an archive with no utterances');
  }
  const seen = new Set<string>();
  const first = spec.utterances[0].stack;
  for (const utt of spec.utterances) {
    if (!UTT_ID_RE.test(utt.uttId)) {
      throw new ExportError(
        `utterance '${utt.uttId}': utt_id must match ${UTT_ID_RE.source}`,
      );
    }
    if (seen.has(utt.uttId)) {
      throw new ExportError(`duplicate utt_id '${utt.uttId}'`);
    }
    seen.add(utt.uttId);
    checkStack(utt.uttId, utt.stack);
    if (utt.stack.numLayers !== first.numLayers || utt.stack.dim !== first.dim) {
      throw new ExportError(
        `utterance '${utt.uttId}': stack is L=${utt.stack.numLayers}, D=${utt.stack.dim} ` +
          `but archive is L=${first.numLayers}, D=${first.dim}`,
      );
    }
  }

  const entries = [...spec.utterances].sort((a, b) =>
    a.uttId < b.uttId ? -1 : a.uttId > b.uttId ? 1 : 0,
  );
  mkdirSync(join(outDir, 'tensors'), { recursive: true });
  const records = [];
  for (const utt of entries) {
    const tensorRel = `tensors/${utt.uttId}.mp3sr`;
    writeFileSync(join(outDir, tensorRel), encodeTensor(utt.stack));
    // Insertion order is sorted-key order so the manifest text is stable.
    const record: Record<string, unknown> = {};
    if (utt.classLabel !== undefined) record.class_label = utt.classLabel;
    if (utt.speaker !== undefined) record.speaker = utt.speaker;
    record.tensor = tensorRel;
    record.utt_id = utt.uttId;
    records.push(record);
  }
  const manifest = {
    dim: first.dim,
    encoder: spec.encoder,
    frame_rate_hz: spec.frameRateHz,
    num_layers: first.numLayers,
    records,
  };
  const text = JSON.stringify(manifest, null, 2) + '\n';
  const tmpPath = join(outDir, '.manifest.json.tmp');
  writeFileSync(tmpPath, text, 'utf-8');
  renameSync(tmpPath, join(outDir, 'manifest.json'));
}

/**
 * Re-read a written archive and verify it decodes to exactly the stacks in
 * `spec`, bitwise.  Guards the export pipeline against serialization bugs.
 */
export function verifyArchive(spec: ArchiveSpec, outDir: string): void {
  const manifest = JSON.parse(readFileSync(join(outDir, 'manifest.json'), 'utf-8'));
  const byId = new Map(manifest.records.map((r: { utt_id: string }) => [r.utt_id, r]));
  for (const utt of spec.utterances) {
    const record = byId.get(utt.uttId) as { tensor: string } | undefined;
    if (record === undefined) {
      throw new ExportError(`verification failed: '${utt.uttId}' missing from manifest`);
    }
    const readBack = decodeTensor(readFileSync(join(outDir, record.tensor)), utt.uttId);
    const same =
      readBack.numLayers === utt.stack.numLayers &&
      readBack.numFrames === utt.stack.numFrames &&
      readBack.dim === utt.stack.dim &&
      readBack.data.length === utt.stack.data.length &&
      Buffer.from(readBack.data.buffer, readBack.data.byteOffset, readBack.data.byteLength).equals(
        Buffer.from(utt.stack.data.buffer, utt.stack.data.byteOffset, utt.stack.data.byteLength),
      );
    if (!same) {
      throw new ExportError(
        `verification failed: '${utt.uttId}' did not round-trip bit-exactly`,
      );
    }
  }
}
