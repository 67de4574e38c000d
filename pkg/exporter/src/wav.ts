/**
 * Minimal RIFF/WAVE reader: PCM 16-bit and IEEE float32, any channel count
 * (channels are averaged to mono).  Returns samples in [-1, 1].
 */

import { ExportError } from './errors.js';

export interface WavAudio {
  sampleRateHz: number;
  /** Mono samples in [-1, 1]. */
  samples: Float64Array;
}

const PCM = 1;
const IEEE_FLOAT = 3;

export function decodeWav(raw: Buffer, source: string): WavAudio {
  if (raw.length < 12 || raw.toString('latin1', 0, 4) !== 'RIFF' ||
      raw.toString('latin1', 8, 12) !== 'WAVE') {
    throw new ExportError(`${source}: not a RIFF/WAVE file`);
  }

  let formatTag = 0;
  let channels = 0;
  let sampleRateHz = 0;
  let bitsPerSample = 0;
  let dataStart = -1;
  let dataLength = 0;

  // Walk the chunk list; chunks are word-aligned (odd sizes get a pad byte).
  let offset = 12;
  while (offset + 8 <= raw.length) {
    const chunkId = raw.toString('latin1', offset, offset + 4);
    const chunkSize = raw.readUInt32LE(offset + 4);
    const body = offset + 8;
    if (chunkId === 'fmt ') {
      if (chunkSize < 16) {
        throw new ExportError(`${source}: truncated fmt chunk`);
      }
      formatTag = raw.readUInt16LE(body);
      channels = raw.readUInt16LE(body + 2);
      sampleRateHz = raw.readUInt32LE(body + 4);
      bitsPerSample = raw.readUInt16LE(body + 14);
    } else if (chunkId === 'data') {
      dataStart = body;
      dataLength = Math.min(chunkSize, raw.length - body);
    }
    offset = body + chunkSize + (chunkSize % 2);
  }

  if (formatTag === 0) {
    throw new ExportError(`${source}: missing fmt chunk`);
  }
  if (dataStart < 0) {
    throw new ExportError(`${source}: missing data chunk`);
  }
  if (channels < 1) {
    throw new ExportError(`${source}: fmt chunk declares ${channels} channels`);
  }
  if (formatTag !== PCM && formatTag !== IEEE_FLOAT) {
    throw new ExportError(
      `${source}: unsupported WAVE format tag ${formatTag} (want PCM or IEEE float)`,
    );
  }
  if (formatTag === PCM && bitsPerSample !== 16) {
    throw new ExportError(
      `${source}: unsupported PCM bit depth ${bitsPerSample} (want 16)`,
    );
  }
  if (formatTag === IEEE_FLOAT && bitsPerSample !== 32) {
    throw new ExportError(
      `${source}: unsupported float bit depth ${bitsPerSample} (want 32)`,
    );
  }

  const bytesPerSample = bitsPerSample / 8;
  const frameBytes = bytesPerSample * channels;
  const numFrames = Math.floor(dataLength / frameBytes);
  if (numFrames === 0) {
    throw new ExportError(`${source}: data chunk holds no samples`);
  }

  const samples = new Float64Array(numFrames);
  for (let t = 0; t < numFrames; t++) {
    let acc = 0;
    for (let c = 0; c < channels; c++) {
      const at = dataStart + t * frameBytes + c * bytesPerSample;
      acc += formatTag === PCM ? raw.readInt16LE(at) / 32768 : raw.readFloatLE(at);
    }
    samples[t] = acc / channels;
  }
  return { sampleRateHz, samples };
}
