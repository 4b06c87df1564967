/** Minimal RIFF/WAVE codec: 16-bit PCM and 32-bit float, any channel count. */

export interface RawAudio {
  /** mono samples in [-1, 1] */
  samples: Float32Array;
  sampleRate: number;
}

export function decodeWav(buf: Buffer): RawAudio {
  if (buf.length < 12 || buf.toString('ascii', 0, 4) !== 'RIFF' ||
      buf.toString('ascii', 8, 12) !== 'WAVE') {
    throw new Error('not a RIFF/WAVE file');
  }
  let format = 0;
  let channels = 0;
  let sampleRate = 0;
  let bitsPerSample = 0;
  let data: Buffer | null = null;

  let offset = 12;
  while (offset + 8 <= buf.length) {
    const chunkId = buf.toString('ascii', offset, offset + 4);
    const chunkSize = buf.readUInt32LE(offset + 4);
    const body = offset + 8;
    if (chunkId === 'fmt ') {
      format = buf.readUInt16LE(body);
      channels = buf.readUInt16LE(body + 2);
      sampleRate = buf.readUInt32LE(body + 4);
      bitsPerSample = buf.readUInt16LE(body + 14);
    } else if (chunkId === 'data') {
      data = buf.subarray(body, body + chunkSize);
    }
    offset = body + chunkSize + (chunkSize % 2); // chunks are word-aligned
  }
  if (data === null || channels === 0) {
    throw new Error('missing fmt or data chunk');
  }

  let interleaved: Float32Array;
  if (format === 1 && bitsPerSample === 16) {
    const n = Math.floor(data.length / 2);
    interleaved = new Float32Array(n);
    for (let i = 0; i < n; i++) {
      interleaved[i] = data.readInt16LE(2 * i) / 32768;
    }
  } else if (format === 3 && bitsPerSample === 32) {
    const n = Math.floor(data.length / 4);
    interleaved = new Float32Array(n);
    for (let i = 0; i < n; i++) {
      interleaved[i] = data.readFloatLE(4 * i);
    }
  } else {
    throw new Error(`unsupported WAV encoding: format ${format}, ${bitsPerSample} bits`);
  }

  const frames = Math.floor(interleaved.length / channels);
  const samples = new Float32Array(frames);
  for (let i = 0; i < frames; i++) {
    let acc = 0;
    for (let ch = 0; ch < channels; ch++) {
      acc += interleaved[i * channels + ch];
    }
    samples[i] = acc / channels;
  }
  return { samples, sampleRate };
}

export function encodeWavPcm16(audio: RawAudio): Buffer {
  const { samples, sampleRate } = audio;
  const dataSize = samples.length * 2;
  const buf = Buffer.alloc(44 + dataSize);
  buf.write('RIFF', 0, 'ascii');
  buf.writeUInt32LE(36 + dataSize, 4);
  buf.write('WAVE', 8, 'ascii');
  buf.write('fmt ', 12, 'ascii');
  buf.writeUInt32LE(16, 16);
  buf.writeUInt16LE(1, 20);            // PCM
  buf.writeUInt16LE(1, 22);            // mono
  buf.writeUInt32LE(sampleRate, 24);
  buf.writeUInt32LE(sampleRate * 2, 28);
  buf.writeUInt16LE(2, 32);
  buf.writeUInt16LE(16, 34);
  buf.write('data', 36, 'ascii');
  buf.writeUInt32LE(dataSize, 40);
  for (let i = 0; i < samples.length; i++) {
    const v = Math.max(-1, Math.min(1, samples[i]));
    buf.writeInt16LE(Math.max(-32768, Math.min(32767, Math.round(v * 32767))), 44 + 2 * i);
  }
  return buf;
}

export async function readWav(path: string): Promise<RawAudio> {
  const { readFile } = await import('node:fs/promises');
  return decodeWav(await readFile(path));
}

export async function writeWav(audio: RawAudio, path: string): Promise<void> {
  const { writeFile, rename } = await import('node:fs/promises');
  const tmp = `${path}.tmp-${process.pid}`;
  await writeFile(tmp, encodeWavPcm16(audio));
  await rename(tmp, path);
}

export function resampleLinear(input: Float32Array, inRate: number, outRate: number): Float32Array {
  if (inRate === outRate) return input.slice();
  const ratio = outRate / inRate;
  const outLength = Math.max(1, Math.round(input.length * ratio));
  const out = new Float32Array(outLength);
  for (let i = 0; i < outLength; i++) {
    const pos = i / ratio;
    const i0 = Math.floor(pos);
    const i1 = Math.min(i0 + 1, input.length - 1);
    const frac = pos - i0;
    const s0 = input[i0] ?? 0;
    const s1 = input[i1] ?? s0;
    out[i] = s0 + (s1 - s0) * frac;
  }
  return out;
}
