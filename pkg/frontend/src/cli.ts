/**
 * Usage: node dist/cli.js [--recipe recipe.json] [--out-dir build]
 */

import { fileURLToPath } from "node:url";
import { dirname, resolve } from "node:path";
import { renderRecipe } from "./render.js";

function parseArgs(argv: string[]): { recipe: string; outDir: string } {
  const here = dirname(fileURLToPath(import.meta.url));
  let recipe = resolve(here, "..", "recipe.json");
  let outDir = resolve(here, "..", "build");
  for (let i = 0; i < argv.length; i += 1) {
    if (argv[i] === "--recipe") recipe = resolve(argv[++i]);
    else if (argv[i] === "--out-dir") outDir = resolve(argv[++i]);
    else throw new Error(`unknown argument '${argv[i]}'`);
  }
  return { recipe, outDir };
}

try {
  const { recipe, outDir } = parseArgs(process.argv.slice(2));
  const written = renderRecipe(recipe, outDir);
  for (const path of written) console.log(`wrote ${path}`);
} catch (err) {
  console.error(`error: ${err instanceof Error ? err.message : err}`);
  process.exit(1);
}
