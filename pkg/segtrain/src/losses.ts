import * as tf from '@tensorflow/tfjs';

/** Soft dice loss, 1 - 2|P.G| / (|P| + |G|); robust to the heavy
 * background/collar class imbalance. */
export function diceLoss(target: tf.Tensor, prediction: tf.Tensor, epsilon = 1e-6): tf.Scalar {
  return tf.tidy(() => {
    const p = prediction.flatten();
    const g = target.flatten();
    const intersection = p.mul(g).sum();
    const denominator = p.sum().add(g.sum());
    const dice = intersection.mul(2).add(epsilon).div(denominator.add(epsilon));
    return tf.scalar(1).sub(dice) as tf.Scalar;
  });
}

/** Pixel IoU of the thresholded prediction: tp / (tp + fp + fn), defined
 * as 1 when the union is empty. */
export function maskIou(target: tf.Tensor, prediction: tf.Tensor, threshold = 0.5): number {
  return tf.tidy(() => {
    const p = prediction.greaterEqual(threshold);
    const g = target.greaterEqual(0.5);
    const tp = p.logicalAnd(g).sum().dataSync()[0];
    const union = p.logicalOr(g).sum().dataSync()[0];
    return union > 0 ? tp / union : 1.0;
  });
}
