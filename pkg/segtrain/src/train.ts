/** Training loop: seeded shuffling, optional augmentation, dice loss,
 * per-epoch validation IoU. Deterministic for a fixed config and seed on
 * the single-threaded CPU backend. */

import { existsSync } from 'node:fs';
import * as tf from '@tensorflow/tfjs';
import { AugmentOptions, augmentSample } from './augment.js';
import { CheckpointMeta, saveCheckpoint } from './checkpoint.js';
import { TrainConfig } from './config.js';
import { ManifestEntry, Sample, disposeSample, loadSample, readManifest } from './data.js';
import { diceLoss, maskIou } from './losses.js';
import { buildModel } from './model.js';
import { Rng } from './rng.js';

export interface EpochStats {
  epoch: number;
  trainDice: number;
  valIou: number | null;
}

export interface TrainResult {
  model: tf.LayersModel;
  history: EpochStats[];
}

function batchTensors(samples: Sample[]): { x: tf.Tensor4D; y: tf.Tensor4D } {
  return tf.tidy(() => ({
    x: tf.stack(samples.map((s) => s.input)) as tf.Tensor4D,
    y: tf.stack(samples.map((s) => s.target)) as tf.Tensor4D,
  }));
}

function validationIou(
  model: tf.LayersModel,
  entries: ManifestEntry[],
  size: [number, number],
): number {
  let total = 0;
  for (const entry of entries) {
    const sample = loadSample(entry, size);
    const iou = tf.tidy(() => {
      const prediction = model.predict(sample.input.expandDims(0)) as tf.Tensor4D;
      return maskIou(sample.target, prediction.squeeze([0]));
    });
    total += iou;
    disposeSample(sample);
  }
  return total / entries.length;
}

export async function train(
  config: TrainConfig,
  options: { log?: (line: string) => void; saveEvery?: boolean } = {},
): Promise<TrainResult> {
  const log = options.log ?? ((line: string) => console.log(line));
  if (config.pretrained && !existsSync(config.pretrained)) {
    throw new Error(
      `pretrained weights ${config.pretrained} not found; omit "pretrained" ` +
      'for random initialization');
  }

  const trainEntries = readManifest(config.trainManifest);
  const valEntries = config.valManifest ? readManifest(config.valManifest) : [];

  const model = buildModel({
    imageSize: config.imageSize,
    baseFilters: config.baseFilters,
    seed: config.seed,
  });
  const optimizer = tf.train.adam(config.learningRate);
  const rng = new Rng(config.seed + 1);
  const augment: AugmentOptions = config.augment;
  const useAugment = augment.flip || augment.rotation || augment.gridDistortion;

  const history: EpochStats[] = [];
  for (let epoch = 1; epoch <= config.epochs; epoch++) {
    const order = rng.shuffle([...trainEntries.keys()]);
    let epochLoss = 0;
    let batches = 0;
    for (let start = 0; start < order.length; start += config.batchSize) {
      const slice = order.slice(start, start + config.batchSize);
      const samples = slice.map((i) => {
        const base = loadSample(trainEntries[i], config.imageSize);
        if (!useAugment) return base;
        const augmented = augmentSample(base, augment, rng);
        disposeSample(base);
        return augmented;
      });
      const { x, y } = batchTensors(samples);
      samples.forEach(disposeSample);

      const lossScalar = optimizer.minimize(
        () => diceLoss(y, model.apply(x, { training: true }) as tf.Tensor),
        true,
      ) as tf.Scalar;
      epochLoss += lossScalar.dataSync()[0];
      batches += 1;
      lossScalar.dispose();
      x.dispose();
      y.dispose();
    }

    const stats: EpochStats = {
      epoch,
      trainDice: epochLoss / batches,
      valIou: valEntries.length ? validationIou(model, valEntries, config.imageSize) : null,
    };
    history.push(stats);
    const valText = stats.valIou === null ? '' : `  val IoU ${stats.valIou.toFixed(4)}`;
    log(`epoch ${epoch}/${config.epochs}  dice loss ${stats.trainDice.toFixed(4)}${valText}`);
  }
  optimizer.dispose();

  const meta: CheckpointMeta = {
    imageSize: config.imageSize,
    baseFilters: config.baseFilters,
    seed: config.seed,
  };
  await saveCheckpoint(config.checkpointDir, model, meta);
  return { model, history };
}
