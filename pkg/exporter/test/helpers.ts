/** Shared test fixtures: WAV/npy byte builders and synthetic checkpoints. */

import { mkdirSync, mkdtempSync, writeFileSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { join } from 'node:path';

import type { EncoderConfig } from '../src/checkpoint.js';
import { parameterCount } from '../src/checkpoint.js';

export function tempDir(prefix: string): string {
  return mkdtempSync(join(tmpdir(), `${prefix}-`));
}

/** Deterministic PRNG (mulberry32) so fixtures are stable across runs. */
export function makeRng(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

/** PCM16 WAV bytes; `channels` arrays must share a length. */
export function makeWavBytes(sampleRateHz: number, channels: Float64Array[]): Buffer {
  const numChannels = channels.length;
  const numFrames = channels[0].length;
  const dataBytes = 2 * numChannels * numFrames;
  const buf = Buffer.alloc(44 + dataBytes);
  buf.write('RIFF', 0, 'latin1');
  buf.writeUInt32LE(36 + dataBytes, 4);
  buf.write('WAVE', 8, 'latin1');
  buf.write('fmt ', 12, 'latin1');
  buf.writeUInt32LE(16, 16);
  buf.writeUInt16LE(1, 20); // PCM
  buf.writeUInt16LE(numChannels, 22);
  buf.writeUInt32LE(sampleRateHz, 24);
  buf.writeUInt32LE(sampleRateHz * 2 * numChannels, 28);
  buf.writeUInt16LE(2 * numChannels, 32);
  buf.writeUInt16LE(16, 34);
  buf.write('data', 36, 'latin1');
  buf.writeUInt32LE(dataBytes, 40);
  for (let t = 0; t < numFrames; t++) {
    for (let c = 0; c < numChannels; c++) {
      const clamped = Math.max(-1, Math.min(1, channels[c][t]));
      const quantized = Math.max(-32768, Math.min(32767, Math.round(clamped * 32768)));
      buf.writeInt16LE(quantized, 44 + 2 * (t * numChannels + c));
    }
  }
  return buf;
}

/** A deterministic mono test tone (two sines plus a soft click train). */
export function makeTone(numSamples: number, sampleRateHz: number): Float64Array {
  const samples = new Float64Array(numSamples);
  for (let t = 0; t < numSamples; t++) {
    const at = t / sampleRateHz;
    samples[t] =
      0.45 * Math.sin(2 * Math.PI * 220 * at) +
      0.25 * Math.sin(2 * Math.PI * 1375 * at) +
      (t % 1600 < 8 ? 0.2 : 0);
  }
  return samples;
}

/** Version-1 .npy bytes for float32/float64 C-order data. */
export function makeNpyBytes(
  shape: number[],
  values: ArrayLike<number>,
  dtype: '<f4' | '<f8' = '<f4',
): Buffer {
  const shapeText =
    shape.length === 1 ? `(${shape[0]},)` : `(${shape.join(', ')})`;
  let header = `{'descr': '${dtype}', 'fortran_order': False, 'shape': ${shapeText}, }`;
  const unpadded = 10 + header.length + 1;
  header = header + ' '.repeat((64 - (unpadded % 64)) % 64) + '\n';
  const itemBytes = dtype === '<f4' ? 4 : 8;
  const buf = Buffer.alloc(10 + header.length + itemBytes * values.length);
  buf.write('\x93NUMPY', 0, 'latin1');
  buf.writeUInt8(1, 6);
  buf.writeUInt8(0, 7);
  buf.writeUInt16LE(header.length, 8);
  buf.write(header, 10, 'latin1');
  for (let i = 0; i < values.length; i++) {
    if (dtype === '<f4') {
      buf.writeFloatLE(values[i], 10 + header.length + 4 * i);
    } else {
      buf.writeDoubleLE(values[i], 10 + header.length + 8 * i);
    }
  }
  return buf;
}

export interface CheckpointShape {
  name: string;
  convChannels: number;
  hiddenDim: number;
  numTransformerLayers: number;
}

export const FRONT_END = {
  convKernels: [10, 3, 3, 3, 3, 2, 2],
  convStrides: [5, 2, 2, 2, 2, 2, 2],
};

/** A small config for fast unit tests (not family-scale). */
export function tinyConfig(overrides: Partial<EncoderConfig> = {}): EncoderConfig {
  return {
    name: 'tiny-synth',
    sampleRateHz: 16000,
    convChannels: 4,
    convKernels: [10, 3, 3, 3, 3, 2, 2],
    convStrides: [5, 2, 2, 2, 2, 2, 2],
    hiddenDim: 8,
    numTransformerLayers: 3,
    ...overrides,
  };
}

/**
 * Write a checkpoint directory with seeded weights scaled by fan-in so
 * activations stay well-conditioned regardless of width.
 */
export function writeCheckpoint(dir: string, config: EncoderConfig, seed = 7): void {
  mkdirSync(dir, { recursive: true });
  writeFileSync(
    join(dir, 'config.json'),
    JSON.stringify(
      {
        name: config.name,
        sample_rate_hz: config.sampleRateHz,
        conv_channels: config.convChannels,
        conv_kernels: config.convKernels,
        conv_strides: config.convStrides,
        hidden_dim: config.hiddenDim,
        num_transformer_layers: config.numTransformerLayers,
      },
      null,
      2,
    ) + '\n',
  );
  const rng = makeRng(seed);
  const count = parameterCount(config);
  const weights = new Float32Array(count);
  let at = 0;
  const fill = (n: number, fanIn: number) => {
    const scale = 1 / Math.sqrt(fanIn);
    for (let i = 0; i < n; i++) {
      weights[at++] = (2 * rng() - 1) * scale;
    }
  };
  let inCh = 1;
  for (const kernel of config.convKernels) {
    fill(config.convChannels * inCh * kernel, inCh * kernel); // weight
    fill(config.convChannels, 4); // bias, modest spread
    inCh = config.convChannels;
  }
  fill(config.hiddenDim * config.convChannels, config.convChannels);
  fill(config.hiddenDim, 4);
  for (let layer = 0; layer < config.numTransformerLayers; layer++) {
    fill(config.hiddenDim * config.hiddenDim, config.hiddenDim);
    fill(config.hiddenDim, 4);
  }
  if (at !== count) {
    throw new Error(`fixture bug: filled ${at} of ${count} parameters`);
  }
  const buf = Buffer.alloc(4 * count);
  for (let i = 0; i < count; i++) {
    buf.writeFloatLE(weights[i], 4 * i);
  }
  writeFileSync(join(dir, 'weights.bin'), buf);
}
