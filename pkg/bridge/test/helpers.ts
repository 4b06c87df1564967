import { encodeWavPcm16, type RawAudio } from '../src/wav.js';

/** Deterministic noise/speech-ish test signal (no RNG dependencies). */
export function testClip(seconds: number, sampleRate = 16_000): RawAudio {
  const n = Math.round(seconds * sampleRate);
  const samples = new Float32Array(n);
  let state = 0x12345678;
  for (let i = 0; i < n; i++) {
    // xorshift noise + two slowly modulated tones
    state ^= state << 13;
    state ^= state >>> 17;
    state ^= state << 5;
    state >>>= 0;
    const noise = (state / 0xffffffff) * 2 - 1;
    const t = i / sampleRate;
    const tone =
      0.4 * Math.sin(2 * Math.PI * 220 * t + 3 * Math.sin(2 * Math.PI * 2 * t)) +
      0.2 * Math.sin(2 * Math.PI * 1200 * t);
    samples[i] = 0.6 * tone + 0.15 * noise;
  }
  return { samples, sampleRate };
}

export function silentClip(seconds: number, sampleRate = 16_000): RawAudio {
  return { samples: new Float32Array(Math.round(seconds * sampleRate)), sampleRate };
}

export function clipToWavBuffer(clip: RawAudio): Buffer {
  return encodeWavPcm16(clip);
}
