/**
 * Encoder checkpoint container: a directory holding `config.json` plus
 * `weights.bin`.
 *
 * `config.json` declares the architecture:
 *
 *     {
 *       "name": "...",                  // archive encoder id
 *       "sample_rate_hz": 16000,
 *       "conv_channels": 32,
 *       "conv_kernels": [10, 3, 3, 3, 3, 2, 2],
 *       "conv_strides": [5, 2, 2, 2, 2, 2, 2],
 *       "hidden_dim": 768,
 *       "num_transformer_layers": 12
 *     }
 *
 * `weights.bin` is the flat little-endian float32 parameter vector, in order:
 *
 *   1. per conv layer: weight [out_ch][in_ch][kernel] row-major, then bias
 *      [out_ch] — in_ch is 1 for the first layer, conv_channels after;
 *   2. frame projection: weight [hidden_dim][conv_channels], bias [hidden_dim];
 *   3. per transformer layer: weight [hidden_dim][hidden_dim], bias [hidden_dim].
 */

import { readFileSync } from 'node:fs';
import { join } from 'node:path';

import { ExportError } from './errors.js';

export interface EncoderConfig {
  name: string;
  sampleRateHz: number;
  convChannels: number;
  convKernels: number[];
  convStrides: number[];
  hiddenDim: number;
  numTransformerLayers: number;
}

export interface Checkpoint {
  config: EncoderConfig;
  /** Flat parameter vector, laid out as documented above. */
  weights: Float32Array;
}

function requirePositiveInt(config: Record<string, unknown>, key: string): number {
  const value = config[key];
  if (typeof value !== 'number' || !Number.isInteger(value) || value < 1) {
    throw new ExportError(`config.json: '${key}' must be a positive integer`);
  }
  return value;
}

function requireIntList(config: Record<string, unknown>, key: string): number[] {
  const value = config[key];
  if (
    !Array.isArray(value) ||
    value.length === 0 ||
    value.some((n) => typeof n !== 'number' || !Number.isInteger(n) || n < 1)
  ) {
    throw new ExportError(`config.json: '${key}' must be a non-empty list of positive integers`);
  }
  return value as number[];
}

export function parseConfig(text: string): EncoderConfig {
  let parsed: unknown;
  try {
    parsed = JSON.parse(text);
  } catch (err) {
    throw new ExportError(`config.json is not valid JSON: ${(err as Error).message}`);
  }
  if (typeof parsed !== 'object' || parsed === null || Array.isArray(parsed)) {
    throw new ExportError('config.json: expected a JSON object');
  }
  const obj = parsed as Record<string, unknown>;
  if (typeof obj.name !== 'string' || obj.name.length === 0) {
    throw new ExportError("config.json: 'name' must be a non-empty string");
  }
  const config: EncoderConfig = {
    name: obj.name,
    sampleRateHz: requirePositiveInt(obj, 'sample_rate_hz'),
    convChannels: requirePositiveInt(obj, 'conv_channels'),
    convKernels: requireIntList(obj, 'conv_kernels'),
    convStrides: requireIntList(obj, 'conv_strides'),
    hiddenDim: requirePositiveInt(obj, 'hidden_dim'),
    numTransformerLayers: requirePositiveInt(obj, 'num_transformer_layers'),
  };
  if (config.convKernels.length !== config.convStrides.length) {
    throw new ExportError(
      `config.json: ${config.convKernels.length} conv kernels but ` +
        `${config.convStrides.length} strides`,
    );
  }
  return config;
}

/** Number of float32 parameters `weights.bin` must hold for a config. */
export function parameterCount(config: EncoderConfig): number {
  let count = 0;
  let inCh = 1;
  for (const kernel of config.convKernels) {
    count += config.convChannels * inCh * kernel + config.convChannels;
    inCh = config.convChannels;
  }
  count += config.hiddenDim * config.convChannels + config.hiddenDim;
  count += config.numTransformerLayers * (config.hiddenDim * config.hiddenDim + config.hiddenDim);
  return count;
}

export function loadCheckpoint(dir: string): Checkpoint {
  let configText: string;
  try {
    configText = readFileSync(join(dir, 'config.json'), 'utf-8');
  } catch (err) {
    throw new ExportError(`cannot load checkpoint '${dir}': ${(err as Error).message}`);
  }
  const config = parseConfig(configText);

  let rawWeights: Buffer;
  try {
    rawWeights = readFileSync(join(dir, 'weights.bin'));
  } catch (err) {
    throw new ExportError(`cannot load checkpoint '${dir}': ${(err as Error).message}`);
  }
  if (rawWeights.length % 4 !== 0) {
    throw new ExportError(
      `checkpoint '${dir}': weights.bin length ${rawWeights.length} is not a multiple of 4`,
    );
  }
  const expected = parameterCount(config);
  const held = rawWeights.length / 4;
  if (held !== expected) {
    throw new ExportError(
      `checkpoint '${dir}': weights.bin holds ${held} parameters but the ` +
        `config requires ${expected}`,
    );
  }
  const weights = new Float32Array(expected);
  for (let i = 0; i < expected; i++) {
    weights[i] = rawWeights.readFloatLE(4 * i);
  }
  for (let i = 0; i < expected; i++) {
    if (!Number.isFinite(weights[i])) {
      throw new ExportError(`checkpoint '${dir}': non-finite parameter at index ${i}`);
    }
  }
  return { config, weights };
}
