export {
  MAGIC,
  FORMAT_VERSION,
  HEADER_BYTES,
  checkStack,
  encodeTensor,
  decodeTensor,
  writeArchive,
  verifyArchive,
} from './archive.js';
export type { LayerStack, Utterance, ArchiveSpec } from './archive.js';
export { loadCheckpoint, parseConfig, parameterCount } from './checkpoint.js';
export type { Checkpoint, EncoderConfig } from './checkpoint.js';
export { convertArrays, parseLabels, DEFAULT_ENCODER, DEFAULT_FRAME_RATE_HZ } from './convert.js';
export type { ConvertJob, ConvertSummary } from './convert.js';
export {
  convolve1d,
  convOutputLength,
  forward,
  frameCount,
  frameRateHz,
} from './encoder.js';
export { ExportError } from './errors.js';
export {
  concatStacks,
  checkLayerSelection,
  encodeClip,
  exportHiddenStates,
  parseAudioList,
  DEFAULT_MAX_SECONDS,
} from './export.js';
export type { AudioEntry, ExportJob, ExportSummary } from './export.js';
export { decodeNpy } from './npy.js';
export type { NpyArray } from './npy.js';
export { decodeWav } from './wav.js';
export type { WavAudio } from './wav.js';
