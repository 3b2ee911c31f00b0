#!/usr/bin/env node
/** segtrain command line: `fit --config F`, `infer --ckpt D --in D --out D
 * [--threshold T]`. */

import yargs from 'yargs';
import { hideBin } from 'yargs/helpers';
import { selectBackend } from './backend.js';
import { loadTrainConfig } from './config.js';
import { inferDirectory } from './infer.js';
import { train } from './train.js';

async function main(): Promise<void> {
  await yargs(hideBin(process.argv))
    .command(
      'fit',
      'train the segmentation network from a JSON config',
      (y) => y.option('config', { type: 'string', demandOption: true }),
      async (argv) => {
        await selectBackend('cpu');
        const config = loadTrainConfig(argv.config);
        const { history } = await train(config);
        const last = history[history.length - 1];
        console.log(
          `checkpoint written to ${config.checkpointDir} ` +
          `(final dice loss ${last.trainDice.toFixed(4)})`);
      },
    )
    .command(
      'infer',
      'write predicted mask PNGs for every depth PNG in a directory',
      (y) =>
        y
          .option('ckpt', { type: 'string', demandOption: true })
          .option('in', { type: 'string', demandOption: true })
          .option('out', { type: 'string', demandOption: true })
          .option('threshold', { type: 'number', default: 0.5 }),
      async (argv) => {
        const backend = await selectBackend('wasm');
        const stats = await inferDirectory(
          argv.ckpt,
          argv.in as string,
          argv.out as string,
          argv.threshold,
        );
        console.log(
          `wrote ${stats.files} masks (${stats.setPixels} collar pixels, ` +
          `${backend} backend)`);
      },
    )
    .demandCommand(1)
    .strict()
    .fail((message, error) => {
      console.error(error?.message ?? message);
      process.exit(1);
    })
    .parseAsync();
}

main().catch((error) => {
  console.error(error instanceof Error ? error.message : String(error));
  process.exit(1);
});
