/** Backend selection. Conv gradients only exist on the pure-JS 'cpu'
 * backend, so training always runs there; inference has no gradients and
 * can use the much faster WASM backend when available. */

import { createRequire } from 'node:module';
import { dirname, join } from 'node:path';
import * as tf from '@tensorflow/tfjs';

export async function selectBackend(preferred: 'cpu' | 'wasm'): Promise<string> {
  if (preferred === 'wasm') {
    try {
      const require = createRequire(import.meta.url);
      const wasm = await import('@tensorflow/tfjs-backend-wasm');
      const entry = require.resolve('@tensorflow/tfjs-backend-wasm');
      wasm.setWasmPaths(join(dirname(entry), '/'));
      if (await tf.setBackend('wasm')) {
        await tf.ready();
        return tf.getBackend();
      }
    } catch {
      // fall through to cpu
    }
  }
  await tf.setBackend('cpu');
  await tf.ready();
  return tf.getBackend();
}
