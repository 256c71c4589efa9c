import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["tests/**/*.test.ts"],
    environment: "node",
    // Integration tests spawn the real backend process.
    testTimeout: 30000,
    hookTimeout: 30000,
  },
});
