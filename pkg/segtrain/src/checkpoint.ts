/** File-based checkpoints without the native tfjs-node bindings: the
 * model topology and weight manifest go to JSON, weight data to a binary
 * blob, plus the input geometry infer needs. */

import { mkdirSync, readFileSync, writeFileSync } from 'node:fs';
import { join } from 'node:path';
import * as tf from '@tensorflow/tfjs';

export interface CheckpointMeta {
  imageSize: [number, number];
  baseFilters: number;
  seed: number;
}

export async function saveCheckpoint(
  dir: string,
  model: tf.LayersModel,
  meta: CheckpointMeta,
): Promise<void> {
  mkdirSync(dir, { recursive: true });
  await model.save(
    tf.io.withSaveHandler(async (artifacts) => {
      writeFileSync(join(dir, 'model.json'), JSON.stringify(artifacts.modelTopology));
      writeFileSync(join(dir, 'weights.json'), JSON.stringify(artifacts.weightSpecs));
      const data = artifacts.weightData as ArrayBuffer;
      writeFileSync(join(dir, 'weights.bin'), Buffer.from(data));
      return { modelArtifactsInfo: { dateSaved: new Date(), modelTopologyType: 'JSON' } };
    }),
  );
  writeFileSync(join(dir, 'meta.json'), JSON.stringify(meta, null, 2) + '\n');
}

export async function loadCheckpoint(
  dir: string,
): Promise<{ model: tf.LayersModel; meta: CheckpointMeta }> {
  const modelTopology = JSON.parse(readFileSync(join(dir, 'model.json'), 'utf8'));
  const weightSpecs = JSON.parse(readFileSync(join(dir, 'weights.json'), 'utf8'));
  const weightBuffer = readFileSync(join(dir, 'weights.bin'));
  const weightData = weightBuffer.buffer.slice(
    weightBuffer.byteOffset,
    weightBuffer.byteOffset + weightBuffer.byteLength,
  );
  const model = await tf.loadLayersModel(
    tf.io.fromMemory({ modelTopology, weightSpecs, weightData }),
  );
  const meta = JSON.parse(readFileSync(join(dir, 'meta.json'), 'utf8')) as CheckpointMeta;
  return { model, meta };
}
