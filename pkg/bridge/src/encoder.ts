/**
 * Frame-level feature extraction: 16 kHz mono audio -> N x 1024 matrix at a
 * 20 ms hop.
 *
 * The built-in "dsp" encoder is a deterministic spectral front end: each
 * frame is a Hann-windowed 50 ms segment, zero-padded to a 2048-point FFT,
 * reduced to the log power of bins 1..1024. It stands in for checkpoint-
 * backed speech encoders (which would plug in behind the same interface)
 * so the rest of the pipeline can be exercised without downloading models.
 */

import { fft, hannWindow } from './dsp.js';
import type { Matrix } from './lvcf.js';
import { resampleLinear, type RawAudio } from './wav.js';

export const SAMPLE_RATE = 16_000;
export const HOP_SECONDS = 0.02;
export const HOP_SAMPLES = SAMPLE_RATE * HOP_SECONDS; // 320
export const FEATURE_DIM = 1024;

const WINDOW_SAMPLES = 800; // 50 ms analysis window
const FFT_SIZE = 2048;      // bins 1..1024 cover 7.8 Hz .. 8 kHz
const LOG_FLOOR = 1e-10;

export interface EncoderConfig {
  /** encoder id; "dsp" is the built-in spectral encoder */
  encoder: string;
  /** reserved for checkpoint-backed encoders with layered features */
  layer: number;
}

export const DEFAULT_CONFIG: EncoderConfig = { encoder: 'dsp', layer: 6 };

export function frameCount(sampleCount: number): number {
  return Math.max(1, Math.ceil(sampleCount / HOP_SAMPLES));
}

/** Resample/mixdown already happened; samples are 16 kHz mono. */
export function extractFeatures(samples: Float32Array, config: EncoderConfig = DEFAULT_CONFIG): Matrix {
  if (config.encoder !== 'dsp') {
    throw new Error(
      `unknown encoder ${JSON.stringify(config.encoder)}; available encoders: dsp`
    );
  }
  const n = frameCount(samples.length);
  const window = hannWindow(WINDOW_SAMPLES);
  const half = WINDOW_SAMPLES / 2;
  const data = new Float32Array(n * FEATURE_DIM);
  const re = new Float64Array(FFT_SIZE);
  const im = new Float64Array(FFT_SIZE);

  for (let frame = 0; frame < n; frame++) {
    const center = frame * HOP_SAMPLES;
    re.fill(0);
    im.fill(0);
    for (let t = 0; t < WINDOW_SAMPLES; t++) {
      const idx = center - half + t;
      const sample = idx >= 0 && idx < samples.length ? samples[idx] : 0;
      re[t] = sample * window[t];
    }
    fft(re, im);
    const base = frame * FEATURE_DIM;
    for (let bin = 1; bin <= FEATURE_DIM; bin++) {
      const power = re[bin] * re[bin] + im[bin] * im[bin];
      data[base + bin - 1] = Math.log(power + LOG_FLOOR);
    }
  }
  return { rows: n, cols: FEATURE_DIM, data };
}

export function toEncoderInput(audio: RawAudio): Float32Array {
  if (audio.sampleRate === SAMPLE_RATE) return audio.samples;
  return resampleLinear(audio.samples, audio.sampleRate, SAMPLE_RATE);
}
