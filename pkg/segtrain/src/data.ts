/** Manifest loading and tensor preparation.
 *
 * Manifests are the JSON-lines files the labeling tool writes:
 * {"depth": path, "mask": path, "frame": int} per line. Depth images are
 * standardized per image and stacked to three channels so the encoder
 * sees RGB-shaped input.
 */

import { readFileSync } from 'node:fs';
import { dirname, isAbsolute, resolve } from 'node:path';
import * as tf from '@tensorflow/tfjs';
import { DepthImage, MaskImage, readDepth, readMask } from './pngio.js';

export interface ManifestEntry {
  depth: string;
  mask: string;
  frame: number;
}

export function readManifest(path: string): ManifestEntry[] {
  const base = dirname(resolve(path));
  const entries: ManifestEntry[] = [];
  for (const line of readFileSync(path, 'utf8').split('\n')) {
    const text = line.trim();
    if (!text) continue;
    const doc = JSON.parse(text) as ManifestEntry;
    entries.push({
      depth: isAbsolute(doc.depth) ? doc.depth : resolve(base, doc.depth),
      mask: isAbsolute(doc.mask) ? doc.mask : resolve(base, doc.mask),
      frame: doc.frame,
    });
  }
  if (entries.length === 0) {
    throw new Error(`${path}: manifest has no entries`);
  }
  return entries;
}

/** Per-image standardization, then stacked to three identical channels. */
export function depthToInput(depth: DepthImage): tf.Tensor3D {
  return tf.tidy(() => {
    const raw = tf.tensor2d(Float32Array.from(depth.data), [depth.height, depth.width]);
    const { mean, variance } = tf.moments(raw);
    const std = tf.sqrt(variance);
    const safeStd = tf.where(tf.greater(std, 0), std, tf.onesLike(std));
    const normalized = raw.sub(mean).div(safeStd);
    return tf.stack([normalized, normalized, normalized], 2) as tf.Tensor3D;
  });
}

export function maskToTarget(mask: MaskImage): tf.Tensor3D {
  return tf.tensor3d(Float32Array.from(mask.data), [mask.height, mask.width, 1]);
}

export interface Sample {
  input: tf.Tensor3D;  // [h, w, 3]
  target: tf.Tensor3D; // [h, w, 1]
}

/** Load one manifest entry resized to the network size. */
export function loadSample(entry: ManifestEntry, size: [number, number]): Sample {
  const depth = readDepth(entry.depth);
  const mask = readMask(entry.mask);
  if (depth.width !== mask.width || depth.height !== mask.height) {
    throw new Error(
      `frame ${entry.frame}: depth ${depth.width}x${depth.height} does not ` +
      `match mask ${mask.width}x${mask.height}`);
  }
  return tf.tidy(() => {
    const input = tf.image.resizeBilinear(depthToInput(depth), size);
    const target = tf.image
      .resizeNearestNeighbor(maskToTarget(mask), size)
      .clipByValue(0, 1);
    return { input: input as tf.Tensor3D, target: target as tf.Tensor3D };
  });
}

export function disposeSample(sample: Sample): void {
  sample.input.dispose();
  sample.target.dispose();
}
