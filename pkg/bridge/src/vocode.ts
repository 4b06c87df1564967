/**
 * vocode: LVCF feature matrix in, 16 kHz 16-bit PCM WAV out.
 *
 *   node dist/vocode.js --in features.lvcf --out speech.wav
 *
 * Prints the synthesized duration in seconds on stdout.
 */

import { parseArgs, required } from './args.js';
import { readLvcf } from './lvcf.js';
import { durationSeconds, vocodeFeatures } from './vocoder.js';
import { writeWav } from './wav.js';

export async function runVocode(argv: string[]): Promise<number> {
  const parsed = parseArgs(argv, new Set(['in', 'out']));
  const inPath = required(parsed, 'in');
  const outPath = required(parsed, 'out');
  const features = await readLvcf(inPath);
  const audio = vocodeFeatures(features);
  await writeWav(audio, outPath);
  const seconds = durationSeconds(features);
  console.log(JSON.stringify({ seconds, sampleRate: audio.sampleRate }));
  return seconds;
}

const isMain = process.argv[1] && import.meta.url.endsWith(process.argv[1].split('/').pop()!);
if (isMain) {
  runVocode(process.argv.slice(2)).catch((err) => {
    console.error(`vocode: ${err instanceof Error ? err.message : err}`);
    process.exit(1);
  });
}
