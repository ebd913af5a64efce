/**
 * Chart-option assembly: one panel per CSV, curve identity taken from the
 * `state` / `pair` column (never from row order), with the fixed style map
 * for the probe families and a unit guide line on ratio panels.
 */

import type { ComposeOption } from "echarts/core";
import type { LineSeriesOption } from "echarts/charts";
import type {
  GridComponentOption,
  LegendComponentOption,
  TitleComponentOption,
} from "echarts/components";
import { CsvTable, seriesByKey } from "./csv.js";

export type PanelOption = ComposeOption<
  | LineSeriesOption
  | GridComponentOption
  | LegendComponentOption
  | TitleComponentOption
>;

export interface PanelSpec {
  kind: "snr" | "ratio";
  title: string;
  logX: boolean;
  logY: boolean;
  out: string;
}

interface CurveStyle {
  color: string;
  dash: number[] | "solid";
}

const STATE_STYLES: Record<string, CurveStyle> = {
  tmsv: { color: "#d62728", dash: [8, 6] }, // red, dashed
  coherent: { color: "#1f77b4", dash: "solid" }, // blue, solid
  ds: { color: "#9467bd", dash: "solid" },
  cct: { color: "#222222", dash: [10, 4, 2, 4] }, // black, dot-dashed
};

const PAIR_STYLES: Record<string, CurveStyle> = {
  "tmsv/coherent": { color: "#1f77b4", dash: "solid" },
  "tmsv/cct": { color: "#d62728", dash: [8, 6] },
  "coherent/cct": { color: "#222222", dash: [10, 4, 2, 4] },
};

function styleFor(kind: "snr" | "ratio", key: string): CurveStyle {
  const table = kind === "snr" ? STATE_STYLES : PAIR_STYLES;
  return table[key] ?? { color: "#2ca02c", dash: "solid" };
}

export function buildOption(panel: PanelSpec, table: CsvTable): PanelOption {
  const keyCol = panel.kind === "snr" ? "state" : "pair";
  const yCol = panel.kind === "snr" ? "snr_exact" : "ratio";
  const grouped = seriesByKey(table, keyCol, "n_s", yCol);
  if (grouped.size === 0) throw new Error("no finite data points to plot");

  const series: LineSeriesOption[] = [];
  for (const [key, pts] of grouped) {
    const style = styleFor(panel.kind, key);
    series.push({
      name: key,
      type: "line",
      showSymbol: false,
      data: pts,
      lineStyle: {
        width: 2,
        color: style.color,
        type: style.dash === "solid" ? "solid" : style.dash,
      },
      itemStyle: { color: style.color },
    });
  }
  if (panel.kind === "ratio") {
    // unit guide line across the x range
    const xs = [...grouped.values()].flat().map((p) => p[0]);
    const lo = Math.min(...xs);
    const hi = Math.max(...xs);
    series.push({
      name: "unity",
      type: "line",
      showSymbol: false,
      data: [
        [lo, 1],
        [hi, 1],
      ],
      lineStyle: { width: 1.5, color: "#2ca02c", type: [2, 4] },
      itemStyle: { color: "#2ca02c" },
    });
  }
  return {
    animation: false,
    title: { text: panel.title, left: "center" },
    legend: { bottom: 0 },
    grid: { left: 70, right: 25, top: 45, bottom: 60 },
    xAxis: {
      type: panel.logX ? "log" : "value",
      name: "signal photons per mode",
      nameLocation: "middle",
      nameGap: 28,
    },
    yAxis: {
      type: panel.logY ? "log" : "value",
      name: panel.kind === "snr" ? "SNR" : "SNR ratio",
    },
    series,
  };
}

export function curveCount(option: PanelOption): number {
  const s = option.series;
  return Array.isArray(s) ? s.length : s ? 1 : 0;
}
