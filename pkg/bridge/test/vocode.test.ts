import { spawnSync } from 'node:child_process';
import { mkdtempSync, readFileSync, writeFileSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { join } from 'node:path';
import { describe, expect, it } from 'vitest';

import { extractFeatures } from '../src/encoder.js';
import { encodeLvcf } from '../src/lvcf.js';
import { vocodeFeatures } from '../src/vocoder.js';
import { decodeWav } from '../src/wav.js';
import { clipToWavBuffer, testClip } from './helpers.js';

describe('vocoding', () => {
  it('100 frames synthesize to 2.0 seconds', () => {
    const data = new Float32Array(100 * 1024).fill(-20);
    const audio = vocodeFeatures({ rows: 100, cols: 1024, data });
    expect(audio.sampleRate).toBe(16_000);
    expect(audio.samples.length / audio.sampleRate).toBeCloseTo(2.0, 6);
  });

  it('rejects wrong feature width', () => {
    expect(() => vocodeFeatures({ rows: 3, cols: 12, data: new Float32Array(36) }))
      .toThrow(/1024/);
  });

  it('extract -> vocode round trip stays within 5% of the source duration', () => {
    const clip = testClip(1.3);
    const features = extractFeatures(clip.samples);
    const audio = vocodeFeatures(features);
    const sourceSeconds = clip.samples.length / clip.sampleRate;
    const outSeconds = audio.samples.length / audio.sampleRate;
    expect(Math.abs(outSeconds - sourceSeconds) / sourceSeconds).toBeLessThan(0.05);
    let peak = 0;
    for (const v of audio.samples) {
      expect(Number.isFinite(v)).toBe(true);
      peak = Math.max(peak, Math.abs(v));
    }
    expect(peak).toBeGreaterThan(0.01); // audibly non-silent
    expect(peak).toBeLessThanOrEqual(1.0);
  });

  it('converted features stay vocodable (projection output shape)', () => {
    const features = extractFeatures(testClip(0.5).samples);
    // stand-in for a projected matrix: same shape, shifted values
    const projected = {
      rows: features.rows,
      cols: features.cols,
      data: features.data.map((v) => v * 0.9 - 1),
    };
    const audio = vocodeFeatures(projected);
    expect(audio.samples.length).toBe(features.rows * 320);
  });
});

describe('vocode CLI', () => {
  it('end-to-end: wav -> extract -> vocode -> wav within 5% duration', () => {
    const dir = mkdtempSync(join(tmpdir(), 'vocode-'));
    const srcWav = join(dir, 'src.wav');
    const lvcf = join(dir, 'features.lvcf');
    const outWav = join(dir, 'out.wav');
    const clip = testClip(1.0);
    writeFileSync(srcWav, clipToWavBuffer(clip));

    const extract = spawnSync(
      'node', [join(__dirname, '..', 'dist', 'extract.js'), '--in', srcWav, '--out', lvcf],
      { encoding: 'utf-8' },
    );
    expect(extract.status, extract.stderr).toBe(0);

    const vocode = spawnSync(
      'node', [join(__dirname, '..', 'dist', 'vocode.js'), '--in', lvcf, '--out', outWav],
      { encoding: 'utf-8' },
    );
    expect(vocode.status, vocode.stderr).toBe(0);
    expect(JSON.parse(vocode.stdout.trim()).sampleRate).toBe(16_000);

    const out = decodeWav(readFileSync(outWav));
    expect(out.sampleRate).toBe(16_000);
    const sourceSeconds = clip.samples.length / clip.sampleRate;
    const outSeconds = out.samples.length / out.sampleRate;
    expect(Math.abs(outSeconds - sourceSeconds) / sourceSeconds).toBeLessThan(0.05);
  });

  it('vocode rejects malformed matrices', () => {
    const dir = mkdtempSync(join(tmpdir(), 'vocode-bad-'));
    const bad = join(dir, 'bad.lvcf');
    writeFileSync(bad, encodeLvcf({ rows: 2, cols: 8, data: new Float32Array(16) }));
    const run = spawnSync(
      'node', [join(__dirname, '..', 'dist', 'vocode.js'), '--in', bad, '--out', join(dir, 'o.wav')],
      { encoding: 'utf-8' },
    );
    expect(run.status).toBe(1);
    expect(run.stderr).toMatch(/1024/);
  });
});
