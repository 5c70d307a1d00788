import { defineConfig } from "vitest/config";

export default defineConfig({
    test: {
        environment: "jsdom",
        include: ["tests/**/*.test.ts"],
        // e2e spawns a real service process; startup dominates
        testTimeout: 60_000,
        hookTimeout: 180_000,
    },
});
