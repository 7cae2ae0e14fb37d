import { defineConfig } from "vitest/config";

export default defineConfig({
  build: {
    outDir: "dist",
    emptyOutDir: true,
  },
  server: {
    // dev server proxies into a running `gradekit serve`
    proxy: {
      "/api": "http://127.0.0.1:8787",
    },
  },
  test: {
    environment: "happy-dom",
  },
});
