/**
 * Server-side SVG rendering of figure panels from recipe descriptions.
 */

import { mkdirSync, readFileSync, writeFileSync } from "node:fs";
import { dirname, extname, resolve } from "node:path";
import { init, use } from "echarts/core";
import { LineChart } from "echarts/charts";
import {
  GridComponent,
  LegendComponent,
  TitleComponent,
} from "echarts/components";
import { SVGRenderer } from "echarts/renderers";
import { buildOption, PanelSpec } from "./chart.js";
import { loadCsv } from "./csv.js";

use([LineChart, GridComponent, LegendComponent, TitleComponent, SVGRenderer]);

export interface RecipePanel extends PanelSpec {
  csv: string;
}

export interface FigureRecipe {
  width?: number;
  height?: number;
  panels: RecipePanel[];
}

export function loadRecipe(path: string): FigureRecipe {
  const recipe = JSON.parse(readFileSync(path, "utf-8")) as FigureRecipe;
  if (!Array.isArray(recipe.panels) || recipe.panels.length === 0) {
    throw new Error("recipe has no panels");
  }
  for (const p of recipe.panels) {
    for (const field of ["csv", "kind", "title", "out"] as const) {
      if (!(field in p)) throw new Error(`panel is missing '${field}'`);
    }
    if (p.kind !== "snr" && p.kind !== "ratio") {
      throw new Error(`unknown panel kind '${p.kind}'`);
    }
  }
  return recipe;
}

export function renderPanelSvg(
  panel: RecipePanel,
  baseDir: string,
  width = 760,
  height = 540,
): string {
  const table = loadCsv(resolve(baseDir, panel.csv));
  const option = buildOption(panel, table);
  const chart = init(null, null, {
    renderer: "svg",
    ssr: true,
    width,
    height,
  });
  chart.setOption(option);
  const svg = chart.renderToSVGString();
  chart.dispose();
  return svg;
}

export function renderRecipe(recipePath: string, outDir: string): string[] {
  const recipe = loadRecipe(recipePath);
  const baseDir = dirname(resolve(recipePath));
  const written: string[] = [];
  for (const panel of recipe.panels) {
    const ext = extname(panel.out).toLowerCase();
    if (ext !== ".svg") {
      throw new Error(
        `unsupported output extension '${ext}' for ${panel.out}; ` +
          "this renderer emits SVG",
      );
    }
    const svg = renderPanelSvg(panel, baseDir, recipe.width, recipe.height);
    const target = resolve(outDir, panel.out);
    mkdirSync(dirname(target), { recursive: true });
    writeFileSync(target, svg, "utf-8");
    written.push(target);
  }
  return written;
}
