/**
 * NTKE embedding-matrix file format.
 *
 * Layout: magic "NTKE", version byte 0x01, u32-LE row count, u32-LE dim
 * count, then row-major little-endian float32 data. The reader hands the
 * body back as a Float32Array view over its own freshly read buffer, so no
 * copy happens on little-endian hosts.
 */

import { openSync, readSync, closeSync, writeFileSync } from "node:fs";
import { endianness } from "node:os";

export const NTKE_MAGIC = "NTKE";
export const NTKE_VERSION = 0x01;
const HEADER_BYTES = 13;

export interface NtkeMatrix {
  rows: number;
  dims: number;
  /** Row-major payload; a zero-copy view over the file body on LE hosts. */
  data: Float32Array;
}

export class NtkeFormatError extends Error {}

export function readNtke(path: string): NtkeMatrix {
  const fd = openSync(path, "r");
  try {
    const header = Buffer.alloc(HEADER_BYTES);
    if (readSync(fd, header, 0, HEADER_BYTES, 0) !== HEADER_BYTES) {
      throw new NtkeFormatError(`${path}: truncated header`);
    }
    if (header.toString("latin1", 0, 4) !== NTKE_MAGIC) {
      throw new NtkeFormatError(`${path}: not an NTKE file`);
    }
    if (header[4] !== NTKE_VERSION) {
      throw new NtkeFormatError(`${path}: unsupported version ${header[4]}`);
    }
    const rows = header.readUInt32LE(5);
    const dims = header.readUInt32LE(9);
    const bytes = rows * dims * 4;
    // read the body into its own allocation: 4-byte aligned, so the
    // Float32Array below is a view, not a copy
    const body = Buffer.allocUnsafeSlow(bytes);
    if (readSync(fd, body, 0, bytes, HEADER_BYTES) !== bytes) {
      throw new NtkeFormatError(`${path}: truncated body`);
    }
    let data: Float32Array;
    if (endianness() === "LE") {
      data = new Float32Array(body.buffer, body.byteOffset, rows * dims);
    } else {
      data = new Float32Array(rows * dims);
      for (let i = 0; i < data.length; i++) data[i] = body.readFloatLE(4 * i);
    }
    return { rows, dims, data };
  } finally {
    closeSync(fd);
  }
}

export function writeNtke(path: string, matrix: NtkeMatrix): void {
  const { rows, dims, data } = matrix;
  if (data.length !== rows * dims) {
    throw new NtkeFormatError(`data length ${data.length} != ${rows}x${dims}`);
  }
  const out = Buffer.alloc(HEADER_BYTES + 4 * data.length);
  out.write(NTKE_MAGIC, 0, "latin1");
  out[4] = NTKE_VERSION;
  out.writeUInt32LE(rows, 5);
  out.writeUInt32LE(dims, 9);
  if (endianness() === "LE") {
    Buffer.from(data.buffer, data.byteOffset, 4 * data.length).copy(out, HEADER_BYTES);
  } else {
    for (let i = 0; i < data.length; i++) out.writeFloatLE(data[i], HEADER_BYTES + 4 * i);
  }
  writeFileSync(path, out);
}

/** Zero-copy row view into a matrix. */
export function row(matrix: NtkeMatrix, index: number): Float32Array {
  if (index < 0 || index >= matrix.rows) {
    throw new RangeError(`row ${index} out of 0..${matrix.rows - 1}`);
  }
  return matrix.data.subarray(index * matrix.dims, (index + 1) * matrix.dims);
}
