/**
 * Deterministic encoder forward pass.
 *
 * Geometry follows the usual speech-SSL layout: a strided 1-D convolutional
 * front-end turns raw samples into frames (e.g. kernels 10/3/3/3/3/2/2 with
 * strides 5/2/2/2/2/2/2 give one frame per 320 samples — 50 Hz at 16 kHz),
 * a per-frame projection lifts frames to `hidden_dim`, and a stack of
 * residual mixing layers produces one hidden state per layer.  The exported
 * stack holds the front-end output as layer 0 followed by every layer's
 * output: L = num_transformer_layers + 1.
 *
 * All arithmetic runs in float64 and is narrowed to float32 only when the
 * stack is materialized, so identical inputs give bit-identical stacks.
 */

import type { LayerStack } from './archive.js';
import type { Checkpoint, EncoderConfig } from './checkpoint.js';
import { ExportError } from './errors.js';

/** Frames a strided window of size `kernel` yields over `inputLen` steps. */
export function convOutputLength(inputLen: number, kernel: number, stride: number): number {
  if (inputLen < kernel) {
    return 0;
  }
  return Math.floor((inputLen - kernel) / stride) + 1;
}

/** Frame count after the full convolutional front-end. */
export function frameCount(config: EncoderConfig, numSamples: number): number {
  let len = numSamples;
  for (let i = 0; i < config.convKernels.length; i++) {
    len = convOutputLength(len, config.convKernels[i], config.convStrides[i]);
  }
  return len;
}

/** Frame rate implied by the front-end: sample rate over the stride product. */
export function frameRateHz(config: EncoderConfig): number {
  const strideProduct = config.convStrides.reduce((acc, s) => acc * s, 1);
  return config.sampleRateHz / strideProduct;
}

/**
 * Strided 1-D convolution, channel-major buffers (`input[c * inLen + t]`).
 *
 *     out[o][j] = bias[o] + sum_c sum_k weight[o][c][k] * input[c][j*stride + k]
 *
 * `weight` is row-major [outCh][inCh][kernel]; no activation is applied.
 */
export function convolve1d(
  input: Float64Array,
  inLen: number,
  inCh: number,
  outCh: number,
  kernel: number,
  stride: number,
  weight: Float32Array | Float64Array,
  bias: Float32Array | Float64Array,
): { output: Float64Array; outLen: number } {
  const outLen = convOutputLength(inLen, kernel, stride);
  const output = new Float64Array(outCh * outLen);
  for (let o = 0; o < outCh; o++) {
    for (let j = 0; j < outLen; j++) {
      let acc = bias[o];
      const start = j * stride;
      for (let c = 0; c < inCh; c++) {
        const wBase = (o * inCh + c) * kernel;
        const xBase = c * inLen + start;
        for (let k = 0; k < kernel; k++) {
          acc += weight[wBase + k] * input[xBase + k];
        }
      }
      output[o * outLen + j] = acc;
    }
  }
  return { output, outLen };
}

/** Walks the flat parameter vector in its documented layout. */
class WeightCursor {
  private at = 0;

  constructor(private readonly weights: Float32Array) {}

  take(count: number): Float32Array {
    const slice = this.weights.subarray(this.at, this.at + count);
    this.at += count;
    return slice;
  }
}

/**
 * Run the encoder over mono samples; returns the full layer stack.
 *
 * Throws when the clip is shorter than one front-end window.
 */
export function forward(checkpoint: Checkpoint, samples: Float64Array): LayerStack {
  const { config } = checkpoint;
  const cursor = new WeightCursor(checkpoint.weights);
  const C = config.convChannels;
  const D = config.hiddenDim;

  // Convolutional front-end with tanh activations.
  let act: Float64Array = Float64Array.from(samples);
  let len = samples.length;
  let inCh = 1;
  for (let i = 0; i < config.convKernels.length; i++) {
    const kernel = config.convKernels[i];
    const stride = config.convStrides[i];
    const weight = cursor.take(C * inCh * kernel);
    const bias = cursor.take(C);
    if (convOutputLength(len, kernel, stride) === 0) {
      throw new ExportError(
        `audio too short: ${samples.length} samples yield no frames ` +
          `(conv stage ${i} sees ${len} steps, needs ${kernel})`,
      );
    }
    const { output, outLen } = convolve1d(act, len, inCh, C, kernel, stride, weight, bias);
    for (let n = 0; n < output.length; n++) {
      output[n] = Math.tanh(output[n]);
    }
    act = output;
    len = outLen;
    inCh = C;
  }
  const T = len;

  // Per-frame projection to hidden_dim: layer 0 of the exported stack.
  const projWeight = cursor.take(D * C);
  const projBias = cursor.take(D);
  let hidden = new Float64Array(T * D);
  for (let t = 0; t < T; t++) {
    for (let d = 0; d < D; d++) {
      let acc: number = projBias[d];
      const wBase = d * C;
      for (let c = 0; c < C; c++) {
        acc += projWeight[wBase + c] * act[c * T + t];
      }
      hidden[t * D + d] = Math.tanh(acc);
    }
  }

  const L = config.numTransformerLayers + 1;
  const stack = new Float32Array(L * T * D);
  stack.set(hidden, 0);

  // Residual mixing layers: h <- h + tanh(W h + b), one stack slab each.
  for (let layer = 0; layer < config.numTransformerLayers; layer++) {
    const weight = cursor.take(D * D);
    const bias = cursor.take(D);
    const next = new Float64Array(T * D);
    for (let t = 0; t < T; t++) {
      const hBase = t * D;
      for (let d = 0; d < D; d++) {
        let acc: number = bias[d];
        const wBase = d * D;
        for (let e = 0; e < D; e++) {
          acc += weight[wBase + e] * hidden[hBase + e];
        }
        next[hBase + d] = hidden[hBase + d] + Math.tanh(acc);
      }
    }
    hidden = next;
    stack.set(hidden, (layer + 1) * T * D);
  }

  return { numLayers: L, numFrames: T, dim: D, data: stack };
}
