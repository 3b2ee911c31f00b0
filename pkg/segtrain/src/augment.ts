/** Training-time augmentation: flips, right-angle rotations, and grid
 * distortion. Every draw comes from the caller's seeded RNG and the same
 * transform is applied to the depth input and its mask. */

import * as tf from '@tensorflow/tfjs';
import { Sample } from './data.js';
import { Rng } from './rng.js';

export interface AugmentOptions {
  flip: boolean;
  rotation: boolean;
  gridDistortion: boolean;
}

function rot90(t: tf.Tensor3D, quarterTurns: number): tf.Tensor3D {
  let out = t;
  for (let i = 0; i < quarterTurns; i++) {
    out = tf.reverse(tf.transpose(out, [1, 0, 2]), 1) as tf.Tensor3D;
  }
  return out;
}

/** Source-pixel lookup table for a piecewise-linear warp: the nodes of a
 * coarse grid get jittered (edges pinned) and every output pixel reads
 * from the interpolated source location, rounded so masks stay binary. */
export function buildGridIndices(
  h: number,
  w: number,
  rng: Rng,
  cells = 4,
  magnitude = 0.08,
): Int32Array {
  const nodes: number[][][] = [];
  for (let gy = 0; gy <= cells; gy++) {
    const row: number[][] = [];
    for (let gx = 0; gx <= cells; gx++) {
      const edge = gy === 0 || gy === cells || gx === 0 || gx === cells;
      const dy = edge ? 0 : (rng.next() * 2 - 1) * magnitude * (h / cells);
      const dx = edge ? 0 : (rng.next() * 2 - 1) * magnitude * (w / cells);
      row.push([(gy * h) / cells + dy, (gx * w) / cells + dx]);
    }
    nodes.push(row);
  }

  const indices = new Int32Array(h * w);
  for (let y = 0; y < h; y++) {
    const gy = Math.min(Math.floor((y * cells) / h), cells - 1);
    const fy = (y * cells) / h - gy;
    for (let x = 0; x < w; x++) {
      const gx = Math.min(Math.floor((x * cells) / w), cells - 1);
      const fx = (x * cells) / w - gx;
      const topY = nodes[gy][gx][0] * (1 - fx) + nodes[gy][gx + 1][0] * fx;
      const topX = nodes[gy][gx][1] * (1 - fx) + nodes[gy][gx + 1][1] * fx;
      const botY = nodes[gy + 1][gx][0] * (1 - fx) + nodes[gy + 1][gx + 1][0] * fx;
      const botX = nodes[gy + 1][gx][1] * (1 - fx) + nodes[gy + 1][gx + 1][1] * fx;
      const srcY = Math.min(Math.max(Math.round(topY * (1 - fy) + botY * fy), 0), h - 1);
      const srcX = Math.min(Math.max(Math.round(topX * (1 - fy) + botX * fy), 0), w - 1);
      indices[y * w + x] = srcY * w + srcX;
    }
  }
  return indices;
}

function applyIndices(t: tf.Tensor3D, indices: Int32Array): tf.Tensor3D {
  return tf.tidy(() => {
    const [h, w, c] = t.shape;
    const flat = t.reshape([h * w, c]);
    return tf.gather(flat, tf.tensor1d(indices, 'int32')).reshape([h, w, c]) as tf.Tensor3D;
  });
}

/** Returns a new sample; the caller still owns (and disposes) the input. */
export function augmentSample(sample: Sample, options: AugmentOptions, rng: Rng): Sample {
  return tf.tidy(() => {
    let input = sample.input;
    let target = sample.target;
    if (options.flip && rng.next() < 0.5) {
      const axis = rng.next() < 0.5 ? 0 : 1;
      input = tf.reverse(input, axis) as tf.Tensor3D;
      target = tf.reverse(target, axis) as tf.Tensor3D;
    }
    if (options.rotation) {
      const turns = rng.int(4);
      if (turns > 0) {
        input = rot90(input, turns);
        target = rot90(target, turns);
      }
    }
    if (options.gridDistortion && rng.next() < 0.5) {
      const [h, w] = [input.shape[0], input.shape[1]];
      const indices = buildGridIndices(h, w, rng);
      input = applyIndices(input, indices);
      target = applyIndices(target, indices);
    }
    return {
      input: input.clone() as tf.Tensor3D,
      target: target.clone() as tf.Tensor3D,
    };
  });
}
