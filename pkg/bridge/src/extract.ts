/**
 * extract: WAV in, LVCF feature matrix out.
 *
 *   node dist/extract.js --in speech.wav --out speech.lvcf [--encoder dsp] [--layer 6]
 *
 * Audio is mixed down to mono and resampled to 16 kHz; the output is one
 * 1024-dim frame per 20 ms hop. Prints the frame count on stdout.
 */

import { parseArgs, required } from './args.js';
import { DEFAULT_CONFIG, extractFeatures, toEncoderInput } from './encoder.js';
import { writeLvcf } from './lvcf.js';
import { readWav } from './wav.js';

export async function runExtract(argv: string[]): Promise<number> {
  const parsed = parseArgs(argv, new Set(['in', 'out', 'encoder', 'layer']));
  const inPath = required(parsed, 'in');
  const outPath = required(parsed, 'out');
  const config = {
    encoder: parsed.values.get('encoder') ?? DEFAULT_CONFIG.encoder,
    layer: Number(parsed.values.get('layer') ?? DEFAULT_CONFIG.layer),
  };
  const audio = await readWav(inPath);
  const features = extractFeatures(toEncoderInput(audio), config);
  await writeLvcf(features, outPath);
  console.log(JSON.stringify({ frames: features.rows, dim: features.cols }));
  return features.rows;
}

const isMain = process.argv[1] && import.meta.url.endsWith(process.argv[1].split('/').pop()!);
if (isMain) {
  runExtract(process.argv.slice(2)).catch((err) => {
    console.error(`extract: ${err instanceof Error ? err.message : err}`);
    process.exit(1);
  });
}
