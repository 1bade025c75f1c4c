import type { RleMask } from './types';

// The server's canonical mask encoding: alternating run lengths over the
// row-major bit sequence, always starting with a (possibly empty) zero-run.

export function decodeRle(rle: RleMask): Uint8Array {
  const total = rle.width * rle.height;
  const sum = rle.runs.reduce((a, b) => a + b, 0);
  if (sum !== total) {
    throw new Error(`RLE runs sum to ${sum}, expected ${total}`);
  }
  const bits = new Uint8Array(total);
  let pos = 0;
  let value = 0;
  for (const run of rle.runs) {
    if (value === 1) {
      bits.fill(1, pos, pos + run);
    }
    pos += run;
    value ^= 1;
  }
  return bits;
}

export function encodeRle(bits: Uint8Array, width: number, height: number): RleMask {
  if (bits.length !== width * height) {
    throw new Error('bit buffer does not match dimensions');
  }
  const runs: number[] = [];
  let current = 0;
  let length = 0;
  for (let i = 0; i < bits.length; i++) {
    const bit = bits[i] ? 1 : 0;
    if (bit === current) {
      length++;
    } else {
      runs.push(length);
      current = bit;
      length = 1;
    }
  }
  runs.push(length);
  return { width, height, runs };
}

export function foregroundCount(rle: RleMask): number {
  let count = 0;
  for (let i = 1; i < rle.runs.length; i += 2) {
    count += rle.runs[i];
  }
  return count;
}

// Paint a decoded mask into an RGBA buffer for canvas rendering.
export function maskToRgba(
  bits: Uint8Array,
  color: [number, number, number],
  alpha: number,
): Uint8ClampedArray<ArrayBuffer> {
  const out = new Uint8ClampedArray(bits.length * 4);
  const a = Math.round(alpha * 255);
  for (let i = 0; i < bits.length; i++) {
    if (bits[i]) {
      const o = i * 4;
      out[o] = color[0];
      out[o + 1] = color[1];
      out[o + 2] = color[2];
      out[o + 3] = a;
    }
  }
  return out;
}
