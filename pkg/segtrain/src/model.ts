/** U-Net style encoder-decoder for pixel-level collar prediction.
 *
 * The encoder is built from residual conv blocks (identity shortcut with a
 * 1x1 projection on channel change); the decoder upsamples and merges the
 * matching encoder features through skip connections. A 1x1 sigmoid head
 * outputs per-pixel collar probability. All initializers take the run
 * seed so two builds with the same seed are identical.
 */

import * as tf from '@tensorflow/tfjs';

export interface ModelOptions {
  imageSize: [number, number];
  baseFilters: number;
  seed: number;
}

function convBn(
  x: tf.SymbolicTensor,
  filters: number,
  seed: number,
  kernel = 3,
  relu = true,
): tf.SymbolicTensor {
  const convolved = tf.layers
    .conv2d({
      filters,
      kernelSize: kernel,
      padding: 'same',
      useBias: false,
      kernelInitializer: tf.initializers.heNormal({ seed }),
    })
    .apply(x) as tf.SymbolicTensor;
  // momentum 0.9 so the inference-time moving statistics catch up within
  // the short training runs this model actually gets
  const normalized = tf.layers.batchNormalization({ momentum: 0.9 })
    .apply(convolved) as tf.SymbolicTensor;
  return relu ? (tf.layers.reLU().apply(normalized) as tf.SymbolicTensor) : normalized;
}

/** conv-BN-relu, conv-BN, additive shortcut, relu: a ResNet v1 block.
 * The normalization keeps the stacked blocks from saturating the
 * sigmoid head, which would kill the dice gradient. */
function residualBlock(x: tf.SymbolicTensor, filters: number, seed: number): tf.SymbolicTensor {
  let shortcut = x;
  if (x.shape[x.shape.length - 1] !== filters) {
    shortcut = convBn(x, filters, seed + 1, 1, false);
  }
  const y1 = convBn(x, filters, seed + 2);
  const y2 = convBn(y1, filters, seed + 3, 3, false);
  const added = tf.layers.add().apply([shortcut, y2]) as tf.SymbolicTensor;
  return tf.layers.reLU().apply(added) as tf.SymbolicTensor;
}

export function buildModel(options: ModelOptions): tf.LayersModel {
  const [h, w] = options.imageSize;
  const f = options.baseFilters;
  const seed = options.seed;

  const input = tf.input({ shape: [h, w, 3] });

  const enc1 = residualBlock(input, f, seed + 10);
  const down1 = tf.layers.maxPooling2d({ poolSize: 2 }).apply(enc1) as tf.SymbolicTensor;
  const enc2 = residualBlock(down1, 2 * f, seed + 20);
  const down2 = tf.layers.maxPooling2d({ poolSize: 2 }).apply(enc2) as tf.SymbolicTensor;

  const bottleneck = residualBlock(down2, 4 * f, seed + 30);

  const up2 = tf.layers.upSampling2d({ size: [2, 2] }).apply(bottleneck) as tf.SymbolicTensor;
  const cat2 = tf.layers.concatenate().apply([up2, enc2]) as tf.SymbolicTensor;
  const dec2 = residualBlock(cat2, 2 * f, seed + 40);

  const up1 = tf.layers.upSampling2d({ size: [2, 2] }).apply(dec2) as tf.SymbolicTensor;
  const cat1 = tf.layers.concatenate().apply([up1, enc1]) as tf.SymbolicTensor;
  const dec1 = residualBlock(cat1, f, seed + 50);

  const head = tf.layers
    .conv2d({
      filters: 1,
      kernelSize: 1,
      activation: 'sigmoid',
      kernelInitializer: tf.initializers.glorotUniform({ seed: seed + 60 }),
    })
    .apply(dec1) as tf.SymbolicTensor;

  return tf.model({ inputs: input, outputs: head, name: 'collar_unet' });
}
