/** PNG I/O matching the grasp pipeline's file contracts:
 * depth = 16-bit grayscale PNG (raw sensor units), mask = 8-bit grayscale
 * with 0 background / 255 collar. */

import { readFileSync, writeFileSync, renameSync } from 'node:fs';
import { decode, encode } from 'fast-png';

export interface DepthImage {
  width: number;
  height: number;
  /** Row-major raw depth values. */
  data: Uint16Array;
}

export interface MaskImage {
  width: number;
  height: number;
  /** Row-major booleans, true = collar. */
  data: Uint8Array;
}

export function readDepth(path: string): DepthImage {
  const png = decode(readFileSync(path));
  if (png.channels !== 1) {
    throw new Error(`${path}: depth PNG must be single-channel, got ${png.channels}`);
  }
  const data = new Uint16Array(png.width * png.height);
  data.set(png.data as unknown as ArrayLike<number>);
  return { width: png.width, height: png.height, data };
}

export function writeDepth(path: string, depth: DepthImage): void {
  const bytes = encode({
    width: depth.width,
    height: depth.height,
    depth: 16,
    channels: 1,
    data: depth.data,
  });
  writeFileSync(path, bytes);
}

export function readMask(path: string): MaskImage {
  const png = decode(readFileSync(path));
  const stride = png.channels;
  const data = new Uint8Array(png.width * png.height);
  const max = png.depth === 16 ? 65535 : 255;
  for (let i = 0; i < data.length; i++) {
    data[i] = (png.data[i * stride] as number) >= max / 2 ? 1 : 0;
  }
  return { width: png.width, height: png.height, data };
}

export function writeMask(path: string, mask: MaskImage): void {
  const bytes = new Uint8Array(mask.width * mask.height);
  for (let i = 0; i < bytes.length; i++) {
    bytes[i] = mask.data[i] ? 255 : 0;
  }
  const payload = encode({
    width: mask.width,
    height: mask.height,
    depth: 8,
    channels: 1,
    data: bytes,
  });
  // write-then-rename so the grasp pipeline never reads a partial mask
  const tmp = `${path}.tmp`;
  writeFileSync(tmp, payload);
  renameSync(tmp, path);
}
