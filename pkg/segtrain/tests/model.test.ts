import { mkdtempSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { join } from 'node:path';
import * as tf from '@tensorflow/tfjs';
import { describe, expect, it } from 'vitest';
import { loadCheckpoint, saveCheckpoint } from '../src/checkpoint.js';
import { diceLoss, maskIou } from '../src/losses.js';
import { buildModel } from '../src/model.js';

const tmp = mkdtempSync(join(tmpdir(), 'segtrain-model-'));

describe('model', () => {
  it('maps [h, w, 3] to per-pixel probabilities', () => {
    const model = buildModel({ imageSize: [16, 16], baseFilters: 2, seed: 0 });
    const out = model.predict(tf.zeros([2, 16, 16, 3])) as tf.Tensor4D;
    expect(out.shape).toEqual([2, 16, 16, 1]);
    const values = out.dataSync();
    expect(Math.min(...values)).toBeGreaterThanOrEqual(0);
    expect(Math.max(...values)).toBeLessThanOrEqual(1);
  });

  it('builds identical weights for identical seeds', () => {
    const a = buildModel({ imageSize: [16, 16], baseFilters: 2, seed: 7 });
    const b = buildModel({ imageSize: [16, 16], baseFilters: 2, seed: 7 });
    const c = buildModel({ imageSize: [16, 16], baseFilters: 2, seed: 8 });
    const wa = a.getWeights().map((w) => Array.from(w.dataSync()));
    const wb = b.getWeights().map((w) => Array.from(w.dataSync()));
    expect(wa).toEqual(wb);
    const differs = c.getWeights().some((w, i) =>
      Array.from(w.dataSync()).some((v, j) => v !== wa[i][j]));
    expect(differs).toBe(true);
  });

  it('round trips through a checkpoint with identical predictions', async () => {
    const model = buildModel({ imageSize: [16, 16], baseFilters: 2, seed: 3 });
    const x = tf.randomNormal([1, 16, 16, 3], 0, 1, 'float32', 11);
    const before = (model.predict(x) as tf.Tensor).dataSync();
    await saveCheckpoint(join(tmp, 'ckpt'), model,
                         { imageSize: [16, 16], baseFilters: 2, seed: 3 });
    const { model: loaded, meta } = await loadCheckpoint(join(tmp, 'ckpt'));
    expect(meta.imageSize).toEqual([16, 16]);
    const after = (loaded.predict(x) as tf.Tensor).dataSync();
    expect(Array.from(after)).toEqual(Array.from(before));
  });
});

describe('losses', () => {
  it('dice loss is 0 on a perfect prediction and near 1 on disjoint', () => {
    const g = tf.tensor4d([1, 1, 0, 0], [1, 2, 2, 1]);
    expect(diceLoss(g, g).dataSync()[0]).toBeCloseTo(0, 5);
    const disjoint = tf.tensor4d([0, 0, 1, 1], [1, 2, 2, 1]);
    expect(diceLoss(g, disjoint).dataSync()[0]).toBeCloseTo(1, 5);
  });

  it('mask IoU counts thresholded overlap', () => {
    const g = tf.tensor2d([[1, 1], [0, 0]]);
    const p = tf.tensor2d([[0.9, 0.2], [0.1, 0.1]]);
    expect(maskIou(g, p)).toBeCloseTo(0.5, 6);
    expect(maskIou(tf.zeros([2, 2]), tf.zeros([2, 2]))).toBe(1.0);
  });
});
