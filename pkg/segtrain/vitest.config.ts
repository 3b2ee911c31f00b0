import { defineConfig } from 'vitest/config';

export default defineConfig({
  test: {
    include: ['tests/**/*.test.ts'],
    // training tests are CPU-heavy; run files one at a time
    fileParallelism: false,
    testTimeout: 600_000,
    hookTimeout: 600_000,
  },
});
