import { readFileSync } from 'node:fs';
import { z } from 'zod';

export const trainConfigSchema = z.object({
  trainManifest: z.string(),
  valManifest: z.string().optional(),
  checkpointDir: z.string(),
  epochs: z.number().int().min(1).default(5),
  batchSize: z.number().int().min(1).default(4),
  learningRate: z.number().positive().default(1e-3),
  /** Network input size [height, width]; both divisible by 4. */
  imageSize: z.tuple([z.number().int(), z.number().int()]).default([64, 64]),
  baseFilters: z.number().int().min(2).default(8),
  seed: z.number().int().default(0),
  augment: z
    .object({
      flip: z.boolean().default(false),
      rotation: z.boolean().default(false),
      gridDistortion: z.boolean().default(false),
    })
    .default({ flip: false, rotation: false, gridDistortion: false }),
  /** Path to pretrained encoder weights; there is no bundled download,
   * so leaving it unset means random initialization. */
  pretrained: z.string().optional(),
});

export type TrainConfig = z.infer<typeof trainConfigSchema>;

export function loadTrainConfig(path: string): TrainConfig {
  const config = trainConfigSchema.parse(JSON.parse(readFileSync(path, 'utf8')));
  const [h, w] = config.imageSize;
  if (h % 4 !== 0 || w % 4 !== 0) {
    throw new Error(`imageSize must be divisible by 4, got ${h}x${w}`);
  }
  return config;
}
