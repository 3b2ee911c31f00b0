/** Batch inference: every depth PNG in a directory becomes a mask PNG of
 * identical dimensions, thresholded from the network's probability map. */

import { mkdirSync, readdirSync } from 'node:fs';
import { join } from 'node:path';
import * as tf from '@tensorflow/tfjs';
import { loadCheckpoint } from './checkpoint.js';
import { depthToInput } from './data.js';
import { readDepth, writeMask } from './pngio.js';

export interface InferStats {
  files: number;
  setPixels: number;
}

export function predictMask(
  model: tf.LayersModel,
  netSize: [number, number],
  depthPath: string,
  threshold: number,
): { width: number; height: number; data: Uint8Array } {
  const depth = readDepth(depthPath);
  const probabilities = tf.tidy(() => {
    const input = tf.image.resizeBilinear(depthToInput(depth), netSize);
    const output = model.predict(input.expandDims(0)) as tf.Tensor4D;
    const back = tf.image.resizeBilinear(output, [depth.height, depth.width]);
    return back.squeeze([0, 3]) as tf.Tensor2D;
  });
  const values = probabilities.dataSync();
  probabilities.dispose();
  const data = new Uint8Array(depth.width * depth.height);
  for (let i = 0; i < data.length; i++) {
    data[i] = values[i] >= threshold ? 1 : 0;
  }
  return { width: depth.width, height: depth.height, data };
}

export async function inferDirectory(
  checkpointDir: string,
  inDir: string,
  outDir: string,
  threshold = 0.5,
  log: (line: string) => void = console.log,
): Promise<InferStats> {
  const { model, meta } = await loadCheckpoint(checkpointDir);
  mkdirSync(outDir, { recursive: true });
  const files = readdirSync(inDir)
    .filter((name) => name.endsWith('.png'))
    .sort();
  if (files.length === 0) {
    throw new Error(`${inDir}: no .png depth images found`);
  }
  let setPixels = 0;
  for (const name of files) {
    const mask = predictMask(model, meta.imageSize, join(inDir, name), threshold);
    const outName = name.endsWith('_depth.png')
      ? name.replace(/_depth\.png$/, '_mask.png')
      : name.replace(/\.png$/, '_mask.png');
    writeMask(join(outDir, outName), mask);
    setPixels += mask.data.reduce((a, b) => a + b, 0);
    log(`${name} -> ${outName}`);
  }
  model.dispose();
  return { files: files.length, setPixels };
}
