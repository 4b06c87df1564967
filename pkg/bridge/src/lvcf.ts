/**
 * LVCF matrix files: little-endian, 24-byte header, float32 payload.
 *
 * Layout: magic "LVCF" (bytes 0-3), version 1 (byte 4), dtype 1 = float32
 * (byte 5), reserved zeros (bytes 6-7), rows u64 (bytes 8-15), cols u64
 * (bytes 16-23), then rows*cols float32 values, row-major.
 */

export const LVCF_MAGIC = 'LVCF';
export const LVCF_VERSION = 1;
export const LVCF_DTYPE_F32 = 1;
export const LVCF_HEADER_SIZE = 24;

export interface Matrix {
  rows: number;
  cols: number;
  /** row-major, length rows*cols */
  data: Float32Array;
}

export function encodeLvcf(matrix: Matrix): Buffer {
  const { rows, cols, data } = matrix;
  if (rows < 1 || cols < 1) {
    throw new Error(`matrix must be at least 1x1, got ${rows}x${cols}`);
  }
  if (data.length !== rows * cols) {
    throw new Error(`data length ${data.length} != rows*cols ${rows * cols}`);
  }
  for (let i = 0; i < data.length; i++) {
    if (!Number.isFinite(data[i])) {
      throw new Error(`non-finite value at element ${i}`);
    }
  }
  const buf = Buffer.alloc(LVCF_HEADER_SIZE + 4 * rows * cols);
  buf.write(LVCF_MAGIC, 0, 'ascii');
  buf.writeUInt8(LVCF_VERSION, 4);
  buf.writeUInt8(LVCF_DTYPE_F32, 5);
  buf.writeUInt16LE(0, 6);
  buf.writeBigUInt64LE(BigInt(rows), 8);
  buf.writeBigUInt64LE(BigInt(cols), 16);
  for (let i = 0; i < data.length; i++) {
    buf.writeFloatLE(data[i], LVCF_HEADER_SIZE + 4 * i);
  }
  return buf;
}

export function decodeLvcf(buf: Buffer): Matrix {
  if (buf.length < LVCF_HEADER_SIZE) {
    throw new Error(`file too short: ${buf.length} bytes < ${LVCF_HEADER_SIZE}-byte header`);
  }
  if (buf.toString('ascii', 0, 4) !== LVCF_MAGIC) {
    throw new Error(`bad magic at byte offset 0`);
  }
  if (buf.readUInt8(4) !== LVCF_VERSION) {
    throw new Error(`unsupported version ${buf.readUInt8(4)} at byte offset 4`);
  }
  if (buf.readUInt8(5) !== LVCF_DTYPE_F32) {
    throw new Error(`unsupported dtype ${buf.readUInt8(5)} at byte offset 5`);
  }
  if (buf.readUInt16LE(6) !== 0) {
    throw new Error('reserved header bytes must be zero (byte offset 6)');
  }
  const rows = Number(buf.readBigUInt64LE(8));
  const cols = Number(buf.readBigUInt64LE(16));
  if (rows < 1 || cols < 1) {
    throw new Error(`rows and cols must be >= 1, got ${rows}x${cols}`);
  }
  const expected = 4 * rows * cols;
  const actual = buf.length - LVCF_HEADER_SIZE;
  if (actual !== expected) {
    throw new Error(`payload length mismatch: expected ${expected} bytes, got ${actual}`);
  }
  const data = new Float32Array(rows * cols);
  for (let i = 0; i < data.length; i++) {
    data[i] = buf.readFloatLE(LVCF_HEADER_SIZE + 4 * i);
    if (!Number.isFinite(data[i])) {
      throw new Error(`non-finite value at element ${i} (byte offset ${LVCF_HEADER_SIZE + 4 * i})`);
    }
  }
  return { rows, cols, data };
}

export async function readLvcf(path: string): Promise<Matrix> {
  const { readFile } = await import('node:fs/promises');
  return decodeLvcf(await readFile(path));
}

export async function writeLvcf(matrix: Matrix, path: string): Promise<void> {
  const { writeFile, rename } = await import('node:fs/promises');
  const tmp = `${path}.tmp-${process.pid}`;
  await writeFile(tmp, encodeLvcf(matrix));
  await rename(tmp, path);
}
