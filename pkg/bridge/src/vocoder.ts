/**
 * Waveform synthesis from N x 1024 feature matrices.
 *
 * Inverts the dsp encoder's log-power spectra: per frame, magnitudes are
 * rebuilt for FFT bins 1..1024 with phase-vocoder bin phases (each bin's
 * phase advances by its center frequency per hop, keeping overlapping
 * frames coherent), inverse-transformed, and Hann-overlap-added at the
 * 20 ms hop. Output duration is exactly N hops.
 */

import { fft, hannWindow } from './dsp.js';
import { FEATURE_DIM, HOP_SAMPLES, SAMPLE_RATE } from './encoder.js';
import type { Matrix } from './lvcf.js';
import type { RawAudio } from './wav.js';

const WINDOW_SAMPLES = 800;
const FFT_SIZE = 2048;
const PEAK_TARGET = 0.9;

/** Deterministic per-bin phase offsets; decorrelates the sinusoid bank so
 * neighbouring bins do not beat coherently against the analysis window. */
function binPhaseOffsets(count: number): Float64Array {
  const offsets = new Float64Array(count + 1);
  let state = 0x9e3779b9;
  for (let bin = 1; bin <= count; bin++) {
    state ^= state << 13;
    state ^= state >>> 17;
    state ^= state << 5;
    state >>>= 0;
    offsets[bin] = (state / 0x100000000) * 2 * Math.PI;
  }
  return offsets;
}

export function vocodeFeatures(features: Matrix): RawAudio {
  if (features.cols !== FEATURE_DIM) {
    throw new Error(`expected ${FEATURE_DIM}-dim features, got ${features.cols}`);
  }
  const n = features.rows;
  const outLength = n * HOP_SAMPLES;
  const window = hannWindow(WINDOW_SAMPLES);
  const half = WINDOW_SAMPLES / 2;
  const acc = new Float64Array(outLength);
  const norm = new Float64Array(outLength);
  const re = new Float64Array(FFT_SIZE);
  const im = new Float64Array(FFT_SIZE);
  const phasePerHop = (2 * Math.PI * HOP_SAMPLES) / FFT_SIZE;
  const phaseOffset = binPhaseOffsets(FEATURE_DIM);
  let windowSum = 0;
  for (const w of window) windowSum += w;
  const gain = FFT_SIZE / windowSum; // undo analysis window gain and 1/N of the inverse FFT

  for (let frame = 0; frame < n; frame++) {
    re.fill(0);
    im.fill(0);
    const base = frame * FEATURE_DIM;
    for (let bin = 1; bin <= FEATURE_DIM; bin++) {
      const magnitude = gain * Math.exp(features.data[base + bin - 1] / 2);
      const phase = phasePerHop * bin * frame + phaseOffset[bin];
      const binRe = magnitude * Math.cos(phase);
      const binIm = magnitude * Math.sin(phase);
      re[bin] = binRe;
      im[bin] = binIm;
      if (bin !== FFT_SIZE - bin) {
        re[FFT_SIZE - bin] = binRe;   // conjugate symmetry -> real signal
        im[FFT_SIZE - bin] = -binIm;
      }
    }
    fft(re, im, true);
    const center = frame * HOP_SAMPLES;
    for (let t = 0; t < WINDOW_SAMPLES; t++) {
      const idx = center - half + t;
      if (idx < 0 || idx >= outLength) continue;
      acc[idx] += re[t] * window[t];
      norm[idx] += window[t] * window[t];
    }
  }

  const samples = new Float32Array(outLength);
  let peak = 0;
  for (let i = 0; i < outLength; i++) {
    samples[i] = norm[i] > 1e-8 ? acc[i] / norm[i] : 0;
    peak = Math.max(peak, Math.abs(samples[i]));
  }
  if (peak > PEAK_TARGET) {
    const gain = PEAK_TARGET / peak;
    for (let i = 0; i < outLength; i++) samples[i] *= gain;
  }
  return { samples, sampleRate: SAMPLE_RATE };
}

export function durationSeconds(features: Matrix): number {
  return (features.rows * HOP_SAMPLES) / SAMPLE_RATE;
}
