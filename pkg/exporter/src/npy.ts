/**
 * Reader for a practical subset of the .npy array container: versions 1–3,
 * little-endian float32/float64, C-contiguous layout.
 */

import { ExportError } from './errors.js';

export interface NpyArray {
  shape: number[];
  dtype: '<f4' | '<f8';
  /** Row-major values; float64 input is narrowed to float32 precision. */
  data: Float32Array;
}

const NPY_MAGIC = '\x93NUMPY';

export function decodeNpy(raw: Buffer, source: string): NpyArray {
  if (raw.length < 8 || raw.toString('latin1', 0, 6) !== NPY_MAGIC) {
    throw new ExportError(`${source}: not an .npy file`);
  }
  const major = raw.readUInt8(6);
  let headerLen: number;
  let headerStart: number;
  if (major === 1) {
    headerLen = raw.readUInt16LE(8);
    headerStart = 10;
  } else if (major === 2 || major === 3) {
    headerLen = raw.readUInt32LE(8);
    headerStart = 12;
  } else {
    throw new ExportError(`${source}: unsupported .npy version ${major}`);
  }
  const dataStart = headerStart + headerLen;
  if (dataStart > raw.length) {
    throw new ExportError(`${source}: truncated .npy header`);
  }
  const header = raw.toString('latin1', headerStart, dataStart);

  const descrMatch = header.match(/'descr'\s*:\s*'([^']+)'/);
  const fortranMatch = header.match(/'fortran_order'\s*:\s*(True|False)/);
  const shapeMatch = header.match(/'shape'\s*:\s*\(([^)]*)\)/);
  if (!descrMatch || !fortranMatch || !shapeMatch) {
    throw new ExportError(`${source}: malformed .npy header`);
  }
  const dtype = descrMatch[1];
  if (dtype !== '<f4' && dtype !== '<f8') {
    throw new ExportError(
      `${source}: unsupported dtype '${dtype}' (want little-endian float32 or float64)`,
    );
  }
  if (fortranMatch[1] === 'True') {
    throw new ExportError(`${source}: Fortran-ordered arrays are not supported`);
  }
  const shape = shapeMatch[1]
    .split(',')
    .map((part) => part.trim())
    .filter((part) => part.length > 0)
    .map((part) => {
      const n = Number(part);
      if (!Number.isInteger(n) || n < 0) {
        throw new ExportError(`${source}: bad shape entry '${part}'`);
      }
      return n;
    });

  const count = shape.reduce((acc, n) => acc * n, 1);
  const itemBytes = dtype === '<f4' ? 4 : 8;
  if (raw.length - dataStart !== count * itemBytes) {
    throw new ExportError(
      `${source}: shape (${shape.join(', ')}) needs ${count * itemBytes} data bytes ` +
        `but file holds ${raw.length - dataStart}`,
    );
  }
  const data = new Float32Array(count);
  for (let i = 0; i < count; i++) {
    data[i] =
      dtype === '<f4'
        ? raw.readFloatLE(dataStart + 4 * i)
        : Math.fround(raw.readDoubleLE(dataStart + 8 * i));
  }
  return { shape, dtype, data };
}
