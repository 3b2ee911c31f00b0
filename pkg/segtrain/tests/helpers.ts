/** Shared toy-dataset builders: blobs raised toward the camera (smaller
 * depth) are the collar class, a mapping the network can learn. */

import { mkdirSync, writeFileSync } from 'node:fs';
import { join } from 'node:path';
import { writeDepth, writeMask } from '../src/pngio.js';

export interface ToyDataset {
  manifest: string;
  depthDir: string;
  maskDir: string;
  entries: { depth: string; mask: string; frame: number }[];
}

export function makeToyDataset(
  dir: string,
  count: number,
  seedBase = 0,
  size: [number, number] = [32, 32],
): ToyDataset {
  const [h, w] = size;
  const depthDir = join(dir, 'depth');
  const maskDir = join(dir, 'mask');
  mkdirSync(depthDir, { recursive: true });
  mkdirSync(maskDir, { recursive: true });
  const entries = [];
  const lines = [];
  for (let i = 0; i < count; i++) {
    const depth = new Uint16Array(h * w).fill(800);
    const mask = new Uint8Array(h * w);
    const cy = Math.floor(h / 4) + ((i * 7 + seedBase) % Math.floor(h / 2));
    const cx = Math.floor(w / 4) + ((i * 13 + seedBase) % Math.floor(w / 2));
    const radius = Math.max(4, Math.floor(h / 7));
    for (let y = 0; y < h; y++) {
      for (let x = 0; x < w; x++) {
        if ((y - cy) ** 2 + (x - cx) ** 2 <= radius ** 2) {
          depth[y * w + x] = 760;
          mask[y * w + x] = 1;
        }
      }
    }
    const depthPath = join(depthDir, `frame_${String(i).padStart(6, '0')}_depth.png`);
    const maskPath = join(maskDir, `frame_${String(i).padStart(6, '0')}_mask.png`);
    writeDepth(depthPath, { width: w, height: h, data: depth });
    writeMask(maskPath, { width: w, height: h, data: mask });
    const entry = { depth: depthPath, mask: maskPath, frame: i };
    entries.push(entry);
    lines.push(JSON.stringify(entry));
  }
  const manifest = join(dir, 'manifest.jsonl');
  writeFileSync(manifest, lines.join('\n') + '\n');
  return { manifest, depthDir, maskDir, entries };
}

export function iouOf(pred: Uint8Array, gt: Uint8Array): number {
  let tp = 0;
  let union = 0;
  for (let i = 0; i < pred.length; i++) {
    if (pred[i] && gt[i]) tp++;
    if (pred[i] || gt[i]) union++;
  }
  return union > 0 ? tp / union : 1.0;
}
