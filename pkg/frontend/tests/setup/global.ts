/**
 * One-time setup for the integration tests: train the acceptance model
 * through the Python CLI (shipped defaults, seed 42) into .cache/ unless
 * it is already there.
 */

import { execFileSync } from "node:child_process";
import { existsSync, mkdirSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

const here = dirname(fileURLToPath(import.meta.url));
export const CACHE_DIR = join(here, "..", "..", ".cache");
export const DATASET = join(CACHE_DIR, "dataset.csv");
export const WEIGHTS = join(CACHE_DIR, "run", "weights.glvw");

export default function setup(): void {
  if (existsSync(WEIGHTS)) return;
  mkdirSync(CACHE_DIR, { recursive: true });
  console.log("hallglove-ui setup: generating dataset and training the model (seed 42)...");
  execFileSync("python3", ["-m", "hallglove.cli", "gen", "--out", DATASET, "--seed", "42"], {
    stdio: "inherit",
  });
  execFileSync(
    "python3",
    ["-m", "hallglove.cli", "train", "--data", DATASET, "--out", join(CACHE_DIR, "run"), "--seed", "42"],
    { stdio: "inherit" },
  );
}
